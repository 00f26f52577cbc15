use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid or missing input; exit code 2.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] polar_ot::Error),
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use polar_ot::Error as E;
        match self {
            CliError::Usage(_) => 2,
            // Inputs the library rejects before doing any work.
            CliError::Core(
                E::Infeasible { .. }
                | E::NoFeasiblePermutation(_)
                | E::IncompatibleSelection(_)
                | E::NotBijection(_)
                | E::NotPowerOfTwo(_)
                | E::Capacity { .. },
            ) => 2,
            _ => 1,
        }
    }
}

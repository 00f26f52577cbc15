use serde::Serialize;

use polar_ot::reliability::cp_upper;
use polar_ot::CpQuery;

use crate::args::{CpBoundArgs, Format};
use crate::config::{probability, require};
use crate::error::CliError;
use crate::report::{num, Provenance, Report, Table};

#[derive(Serialize)]
struct Body {
    k: u64,
    trials: u64,
    delta: f64,
    upper: f64,
}

pub fn run(args: &CpBoundArgs) -> Result<(), CliError> {
    let k = require(args.k, "k")?;
    let trials = require(args.m, "m")?;
    let delta = probability(require(args.delta, "delta")?, "delta")?;
    if trials == 0 || k > trials {
        return Err(CliError::Usage(format!(
            "k: need 0 ≤ k ≤ m and m ≥ 1 (k={k}, m={trials})"
        )));
    }
    let query = CpQuery { k, trials, delta };
    let upper = cp_upper(&query)?;
    let body = Body {
        k,
        trials,
        delta,
        upper,
    };
    let mut table = Table::new(&["k", "trials", "delta", "upper"]);
    table.push(vec![
        k.to_string(),
        trials.to_string(),
        num(delta),
        num(upper),
    ]);
    let prov = Provenance::new("cp-bound", None, &query)?;
    let mut report = Report::new(prov, &body, table)?;
    report.scalar = Some(num(upper));
    report.emit(&args.output, Format::Text)
}

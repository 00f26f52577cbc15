use serde::Serialize;

use polar_ot::proto::truncated_pairs;
use polar_ot::reliability::{mc_hash_input_error, union_bound_prefix};
use polar_ot::{ChannelParams, MiProfile, OtSelection, ReliabilityQuery};

use crate::args::{Format, SimulateArgs};
use crate::commands::read_session;
use crate::config::{probability, require, snr_from, FileConfig};
use crate::error::CliError;
use crate::report::{num, one_based, Provenance, Report, Table};

pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Serialize)]
struct Resolved<'a> {
    m: usize,
    snr: f64,
    sigma: &'a [usize],
    pairs: &'a [(usize, usize)],
    trials: u64,
    delta: f64,
    rand: &'a [usize],
    seed: u64,
}

#[derive(Serialize)]
struct Row {
    rand: usize,
    trials: u64,
    errors: u64,
    p_hat: f64,
    cp_upper: f64,
    ber: f64,
    union_bound: f64,
}

#[derive(Serialize)]
struct Body {
    m: usize,
    n: usize,
    snr: f64,
    snr_db: f64,
    delta: f64,
    hash_set: Vec<usize>,
    partners: Vec<usize>,
    rows: Vec<Row>,
}

pub fn run(args: &SimulateArgs, file: &FileConfig) -> Result<(), CliError> {
    let path = require(
        args.selection.as_ref().or(file.selection.as_ref()),
        "selection",
    )?;
    let cfg = read_session(path, "selection")?;
    let snr = if args.snr.is_some() || args.snr_db.is_some() {
        snr_from(args.snr, args.snr_db)?
    } else if file.snr.is_some() || file.snr_db.is_some() {
        snr_from(file.snr, file.snr_db)?
    } else {
        cfg.snr
    };
    let trials = require(args.trials.or(file.trials), "trials")?;
    if trials == 0 {
        return Err(CliError::Usage("trials: must be positive".into()));
    }
    let delta = probability(args.delta.or(file.delta).unwrap_or(DEFAULT_DELTA), "delta")?;
    let seed = require(args.seed.or(file.seed), "seed")?;

    let profile = MiProfile::ga(cfg.m, snr)?;
    let sel = OtSelection::from_file(&cfg.selection, &profile)?;
    let pairs = truncated_pairs(&sel, &profile, cfg.pairs)?;
    let rand = args
        .rand
        .clone()
        .or_else(|| file.rand.clone())
        .unwrap_or_else(|| vec![pairs.len()]);
    if let Some(&r) = rand.iter().find(|&&r| r > pairs.len()) {
        return Err(CliError::Usage(format!(
            "rand: {r} exceeds the {} announced pairs",
            pairs.len()
        )));
    }
    let mut hash_set: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    hash_set.sort_unstable();
    let partners: Vec<usize> = pairs.iter().map(|p| p.1).collect();

    let params = ChannelParams::linear(snr, seed)?;
    let mut rows = Vec::with_capacity(rand.len());
    for &r in &rand {
        let rq = ReliabilityQuery {
            hash_set: hash_set.clone(),
            random_set: partners[..r].to_vec(),
        };
        let mc = mc_hash_input_error(cfg.m, &rq, &params, trials, seed, delta)?;
        tracing::info!(rand = r, errors = mc.errors, p_hat = mc.p_hat, "simulated");
        rows.push(Row {
            rand: r,
            trials,
            errors: mc.errors,
            p_hat: mc.p_hat,
            cp_upper: mc.cp_upper,
            ber: mc.ber,
            union_bound: union_bound_prefix(&rq, profile.z()),
        });
    }

    let mut table = Table::new(&[
        "rand",
        "trials",
        "errors",
        "p_hat",
        "cp_upper",
        "ber",
        "union_bound",
    ]);
    for r in &rows {
        table.push(vec![
            r.rand.to_string(),
            r.trials.to_string(),
            r.errors.to_string(),
            num(r.p_hat),
            num(r.cp_upper),
            num(r.ber),
            num(r.union_bound),
        ]);
    }
    let resolved = Resolved {
        m: cfg.m,
        snr,
        sigma: &cfg.selection.sigma,
        pairs: &pairs,
        trials,
        delta,
        rand: &rand,
        seed,
    };
    let prov = Provenance::new("simulate", Some(seed), &resolved)?;
    let body = Body {
        m: cfg.m,
        n: cfg.n(),
        snr,
        snr_db: 10.0 * snr.log10(),
        delta,
        hash_set: one_based(&hash_set),
        partners: one_based(&partners),
        rows,
    };
    Report::new(prov, &body, table)?.emit(&args.output, Format::Csv)
}

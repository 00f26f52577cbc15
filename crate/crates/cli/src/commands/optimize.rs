use rayon::prelude::*;
use serde::Serialize;

use polar_ot::optimize::{candidate_perms, inner_topk, outer_search};
use polar_ot::{MiProfile, Pairing, SessionConfig, SplitRule};

use crate::args::{Format, OptimizeArgs, PairingArg, SplitArg};
use crate::config::{require, ChannelSpec, FileConfig};
use crate::error::CliError;
use crate::report::{num, one_based, write_output, Provenance, Report, Table};

pub const DEFAULT_MAX_PERMS: usize = 256;

#[derive(Serialize)]
struct Resolved {
    channel: ChannelSpec,
    k: usize,
    ell: usize,
    pairing: PairingArg,
    split: SplitArg,
    max_perms: usize,
    seed: u64,
}

#[derive(Serialize)]
struct Body {
    m: usize,
    n: usize,
    snr: f64,
    snr_db: f64,
    k: usize,
    pairing: PairingArg,
    split: SplitArg,
    evaluated: usize,
    feasible: usize,
    sigma: String,
    sigma_array: Vec<usize>,
    pi_cycles: String,
    good_sel: Vec<usize>,
    bad_sel: Vec<usize>,
    s: f64,
    rate: f64,
}

/// What `--save` writes: a session config plus its provenance.
#[derive(Serialize)]
struct Artifact<'a> {
    #[serde(flatten)]
    config: &'a SessionConfig,
    pairing: PairingArg,
    provenance: &'a Provenance,
}

pub fn pairing(p: PairingArg) -> Pairing {
    match p {
        PairingArg::Any => Pairing::Any,
        PairingArg::Swap => Pairing::Swap,
    }
}

pub fn split_rule(s: SplitArg) -> SplitRule {
    match s {
        SplitArg::Profile => SplitRule::Profile,
        SplitArg::Canonical => SplitRule::Canonical,
    }
}

pub fn run(args: &OptimizeArgs, file: &FileConfig) -> Result<(), CliError> {
    let channel = ChannelSpec::resolve(&args.channel, file)?;
    let k = require(args.k.or(file.k), "k")?;
    if k == 0 || k > channel.n / 2 {
        return Err(CliError::Usage(format!(
            "k: {k} outside 1..={}",
            channel.n / 2
        )));
    }
    let ell = args.ell.or(file.ell).unwrap_or(k);
    if ell == 0 || ell > k {
        return Err(CliError::Usage(format!("ell: {ell} outside 1..={k}")));
    }
    let pairing_arg = args.pairing.or(file.pairing).unwrap_or(PairingArg::Swap);
    let split_arg = args.split.or(file.split).unwrap_or(SplitArg::Profile);
    let max_perms = args
        .max_perms
        .or(file.max_perms)
        .unwrap_or(DEFAULT_MAX_PERMS);
    if max_perms == 0 {
        return Err(CliError::Usage("max_perms: must be positive".into()));
    }
    let seed = require(args.seed.or(file.seed), "seed")?;

    let profile = MiProfile::ga(channel.m, channel.snr)?;
    let split = split_rule(split_arg).split(&profile);
    let candidates = candidate_perms(channel.m, max_perms, seed)?;
    let outcome = outer_search(&profile, &split, &candidates, k, pairing(pairing_arg))?;
    let best = &outcome.best;
    tracing::info!(
        evaluated = outcome.evaluated,
        feasible = outcome.feasible,
        s = best.s,
        "search done"
    );

    let format = args.output.format.unwrap_or(Format::Json);
    let mut table = Table::new(&["candidate", "sigma", "feasible", "s", "rate"]);
    if format == Format::Csv {
        let per: Vec<Option<f64>> = candidates
            .par_iter()
            .map(|s| {
                inner_topk(s, &profile, &split, k, pairing(pairing_arg))
                    .ok()
                    .map(|sel| sel.s)
            })
            .collect();
        for (t, (sigma, s)) in candidates.iter().zip(per).enumerate() {
            table.push(vec![
                (t + 1).to_string(),
                sigma.to_string(),
                (s.is_some() as u8).to_string(),
                s.map(num).unwrap_or_default(),
                s.map(|s| num(s / channel.n as f64)).unwrap_or_default(),
            ]);
        }
    }

    let body = Body {
        m: channel.m,
        n: channel.n,
        snr: channel.snr,
        snr_db: channel.snr_db,
        k,
        pairing: pairing_arg,
        split: split_arg,
        evaluated: outcome.evaluated,
        feasible: outcome.feasible,
        sigma: best.sigma.to_string(),
        sigma_array: best.sigma.as_slice().to_vec(),
        pi_cycles: best.pi.to_string(),
        good_sel: one_based(&best.good_sel),
        bad_sel: one_based(&best.bad_sel),
        s: best.s,
        rate: best.rate(),
    };
    let resolved = Resolved {
        channel,
        k,
        ell,
        pairing: pairing_arg,
        split: split_arg,
        max_perms,
        seed,
    };
    let prov = Provenance::new("optimize", Some(seed), &resolved)?;
    if let Some(path) = &args.save {
        let config = SessionConfig {
            m: channel.m,
            snr: channel.snr,
            selection: best.to_file(),
            split: split_rule(split_arg),
            pairs: k,
            ell,
        };
        let artifact = Artifact {
            config: &config,
            pairing: pairing_arg,
            provenance: &prov,
        };
        let mut bytes = serde_json::to_vec_pretty(&artifact)?;
        bytes.push(b'\n');
        write_output(Some(path), &bytes)?;
    }
    Report::new(prov, &body, table)?.emit(&args.output, Format::Json)
}

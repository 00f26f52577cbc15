use serde::Serialize;

use polar_ot::optimize::inner_topk;
use polar_ot::privacy::BudgetParams;
use polar_ot::proto::truncated_pairs;
use polar_ot::{BitPermutation, KeyBudget, MiProfile, OtSelection};

use crate::args::{Format, PairingArg, RateArgs, SplitArg};
use crate::commands::optimize::{pairing, split_rule};
use crate::commands::{read_json, read_session};
use crate::config::{probability, require, snr_from, ChannelSpec, FileConfig};
use crate::error::CliError;
use crate::report::{num, one_based, Provenance, Report, Table};

#[derive(Serialize)]
struct Resolved<'a> {
    m: usize,
    snr: f64,
    sigma: &'a [usize],
    good_sel: &'a [usize],
    budget: BudgetParams,
}

#[derive(Serialize)]
struct Body {
    m: usize,
    n: usize,
    snr: f64,
    snr_db: f64,
    sigma: String,
    k: usize,
    good_sel: Vec<usize>,
    bad_sel: Vec<usize>,
    s: f64,
    #[serde(flatten)]
    budget: KeyBudget,
}

/// The selection under evaluation, whichever way it was given.
fn selection(args: &RateArgs, file: &FileConfig) -> Result<(MiProfile, OtSelection), CliError> {
    if let Some(path) = args
        .selection
        .as_ref()
        .or(file.selection.as_ref())
        .filter(|_| args.sigma.is_none())
    {
        let cfg = read_session(path, "selection")?;
        if args.channel.n.is_some() || args.channel.m.is_some() {
            return Err(CliError::Usage(
                "n: block length comes from the selection file".into(),
            ));
        }
        let snr = if args.channel.snr.is_some() || args.channel.snr_db.is_some() {
            snr_from(args.channel.snr, args.channel.snr_db)?
        } else {
            cfg.snr
        };
        let profile = MiProfile::ga(cfg.m, snr)?;
        let sel = OtSelection::from_file(&cfg.selection, &profile)?;
        // The announced pairs are the hidden string.
        let good: Vec<usize> = truncated_pairs(&sel, &profile, cfg.pairs)?
            .into_iter()
            .map(|p| p.0)
            .collect();
        let sel = OtSelection::new(sel.sigma, good, &profile)?;
        return Ok((profile, sel));
    }
    let Some(path) = &args.sigma else {
        return Err(CliError::Usage(
            "selection: give --selection or --sigma".into(),
        ));
    };
    let sigma: BitPermutation = read_json(path, "sigma")?;
    let channel = ChannelSpec::resolve(&args.channel, file)?;
    if sigma.m() != channel.m {
        return Err(CliError::Usage(format!(
            "sigma: m = {} but n = 2^{}",
            sigma.m(),
            channel.m
        )));
    }
    let k = require(args.k.or(file.k), "k")?;
    let pairing_arg = args.pairing.or(file.pairing).unwrap_or(PairingArg::Any);
    let split_arg = args.split.or(file.split).unwrap_or(SplitArg::Profile);
    let profile = MiProfile::ga(channel.m, channel.snr)?;
    let split = split_rule(split_arg).split(&profile);
    let sel = inner_topk(&sigma, &profile, &split, k, pairing(pairing_arg))?;
    Ok((profile, sel))
}

pub fn run(args: &RateArgs, file: &FileConfig) -> Result<(), CliError> {
    let b = &args.budget;
    let defaults = BudgetParams::default();
    let params = BudgetParams {
        eps_s: probability(b.eps_s.or(file.eps_s).unwrap_or(defaults.eps_s), "eps_s")?,
        eps_p: probability(b.eps_p.or(file.eps_p).unwrap_or(defaults.eps_p), "eps_p")?,
        eps_sw: probability(
            b.eps_sw.or(file.eps_sw).unwrap_or(defaults.eps_sw),
            "eps_sw",
        )?,
        v: b.v.or(file.v).unwrap_or(0.0),
        psi_mean: 0.0,
        c_eps_override: b.c_eps.or(file.c_eps),
    };
    if !params.v.is_finite() || params.v < 0.0 {
        return Err(CliError::Usage(format!(
            "v: {} must be finite and non-negative",
            params.v
        )));
    }
    let (profile, sel) = selection(args, file)?;
    if params.c_eps_override.is_none() {
        tracing::warn!("E[psi] not supplied; using 0 in the min-entropy correction");
    }
    let budget = KeyBudget::compute(&sel.good_sel, &sel.pi, &profile, &params)?;

    let mut table = Table::new(&[
        "k",
        "s",
        "ell",
        "ell_swc",
        "ell_net",
        "ell_net_bits",
        "rate",
        "leakage",
        "c_eps",
        "beta_n",
    ]);
    table.push(vec![
        sel.k().to_string(),
        num(sel.s),
        budget.ell.to_string(),
        num(budget.ell_swc),
        num(budget.ell_net),
        budget.ell_net_bits.to_string(),
        num(budget.rate),
        num(budget.leakage),
        num(budget.c_eps),
        num(budget.beta_n),
    ]);
    let resolved = Resolved {
        m: profile.m(),
        snr: profile.snr(),
        sigma: sel.sigma.as_slice(),
        good_sel: &sel.good_sel,
        budget: params,
    };
    let prov = Provenance::new("rate", None, &resolved)?;
    let body = Body {
        m: profile.m(),
        n: profile.n(),
        snr: profile.snr(),
        snr_db: 10.0 * profile.snr().log10(),
        sigma: sel.sigma.to_string(),
        k: sel.k(),
        good_sel: one_based(&sel.good_sel),
        bad_sel: one_based(&sel.bad_sel),
        s: sel.s,
        budget,
    };
    Report::new(prov, &body, table)?.emit(&args.output, Format::Json)
}

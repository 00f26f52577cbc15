use serde::Serialize;

use polar_ot::construct::{default_gamma, good_bad_sets, reliability_sorted};
use polar_ot::MiProfile;

use crate::args::{ConstructArgs, Format};
use crate::config::{ChannelSpec, FileConfig};
use crate::error::CliError;
use crate::report::{num, one_based, Provenance, Report, Table};

#[derive(Serialize)]
struct Resolved {
    channel: ChannelSpec,
    gamma: f64,
}

#[derive(Serialize)]
struct Row {
    paper_index: usize,
    binary_label: String,
    mi: f64,
    z: f64,
    rank: usize,
    in_good: bool,
    in_bad: bool,
}

#[derive(Serialize)]
struct Body {
    m: usize,
    n: usize,
    snr: f64,
    snr_db: f64,
    gamma: f64,
    good: Vec<usize>,
    bad: Vec<usize>,
    channels: Vec<Row>,
}

pub fn run(args: &ConstructArgs, file: &FileConfig) -> Result<(), CliError> {
    let channel = ChannelSpec::resolve(&args.channel, file)?;
    let gamma = args
        .gamma
        .or(file.gamma)
        .unwrap_or_else(|| default_gamma(channel.n));
    if !(0.0..=0.5).contains(&gamma) {
        return Err(CliError::Usage(format!("gamma: {gamma} outside [0, 0.5]")));
    }
    let profile = MiProfile::ga(channel.m, channel.snr)?;
    let sets = good_bad_sets(&profile, gamma)?;
    let mut rank = vec![0; channel.n];
    for (r, i) in reliability_sorted(profile.mi()).into_iter().enumerate() {
        rank[i] = r + 1;
    }
    let channels: Vec<Row> = (0..channel.n)
        .map(|i| Row {
            paper_index: i + 1,
            binary_label: format!("{i:0w$b}", w = channel.m),
            mi: profile.mi()[i],
            z: profile.z()[i],
            rank: rank[i],
            in_good: sets.good.binary_search(&i).is_ok(),
            in_bad: sets.bad.binary_search(&i).is_ok(),
        })
        .collect();

    let mut table = Table::new(&[
        "paper_index",
        "binary_label",
        "I",
        "Z",
        "in_good",
        "in_bad",
        "rank",
    ]);
    for r in &channels {
        table.push(vec![
            r.paper_index.to_string(),
            r.binary_label.clone(),
            num(r.mi),
            num(r.z),
            (r.in_good as u8).to_string(),
            (r.in_bad as u8).to_string(),
            r.rank.to_string(),
        ]);
    }
    let body = Body {
        m: channel.m,
        n: channel.n,
        snr: channel.snr,
        snr_db: channel.snr_db,
        gamma,
        good: one_based(&sets.good),
        bad: one_based(&sets.bad),
        channels,
    };
    let prov = Provenance::new("construct", None, &Resolved { channel, gamma })?;
    Report::new(prov, &body, table)?.emit(&args.output, Format::Csv)
}

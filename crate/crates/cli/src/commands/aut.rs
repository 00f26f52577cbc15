use std::path::Path;

use serde::{Deserialize, Serialize};

use polar_ot::aut::{
    centralizer_auts, enumerate_aut, induced_index_perm, is_automorphism, permutation_matrix,
    table_row, MAX_ENUM_STAGES,
};
use polar_ot::polar::build_transform;
use polar_ot::{BitPermutation, IndexPermutation};

use crate::args::{AutArgs, Format};
use crate::commands::read_json;
use crate::config::FileConfig;
use crate::error::CliError;
use crate::report::{Provenance, Report, Table};

/// Largest m for the dense matrix check.
const MAX_CHECK_STAGES: usize = 12;

/// `sigma` of length `m` is a bit permutation; of length `2^m` an index map.
#[derive(Serialize, Deserialize)]
struct PermFile {
    m: usize,
    sigma: Vec<usize>,
}

#[derive(Serialize)]
struct Row {
    id: usize,
    /// `[b_{σ(m−1)} … b_{σ(0)}]`, MSB left.
    sigma: String,
    sigma_array: Vec<usize>,
    pi_cycles: String,
    order: u128,
    table_row: Vec<usize>,
}

fn rows(perms: &[BitPermutation]) -> Vec<Row> {
    perms
        .iter()
        .enumerate()
        .map(|(t, s)| {
            let pi = induced_index_perm(s);
            Row {
                id: t + 1,
                sigma: s.to_string(),
                sigma_array: s.as_slice().to_vec(),
                pi_cycles: pi.to_string(),
                order: pi.order(),
                table_row: table_row(s),
            }
        })
        .collect()
}

fn row_table(rows: &[Row]) -> Table {
    let mut t = Table::new(&["id", "sigma", "pi_cycles", "order", "table_row"]);
    for r in rows {
        let tr: Vec<String> = r.table_row.iter().map(usize::to_string).collect();
        t.push(vec![
            r.id.to_string(),
            r.sigma.clone(),
            r.pi_cycles.clone(),
            r.order.to_string(),
            tr.join(" "),
        ]);
    }
    t
}

fn enum_stages(m: Option<usize>) -> Result<usize, CliError> {
    let m = m.ok_or_else(|| CliError::Usage("m: missing".into()))?;
    if m == 0 || m > MAX_ENUM_STAGES {
        return Err(CliError::Usage(format!(
            "m: {m} outside 1..={MAX_ENUM_STAGES} for enumeration"
        )));
    }
    Ok(m)
}

fn load_bit_perm(path: &Path, field: &str) -> Result<BitPermutation, CliError> {
    let f: PermFile = read_json(path, field)?;
    if f.sigma.len() != f.m {
        return Err(CliError::Usage(format!(
            "{field}: sigma has {} entries, m = {}",
            f.sigma.len(),
            f.m
        )));
    }
    BitPermutation::new(f.sigma).map_err(|e| CliError::Usage(format!("{field}: {e}")))
}

#[derive(Serialize)]
struct ListBody {
    m: usize,
    count: usize,
    permutations: Vec<Row>,
}

#[derive(Serialize)]
struct CheckBody {
    m: usize,
    kind: &'static str,
    pi_cycles: String,
    automorphism: bool,
}

pub fn run(args: &AutArgs, file: &FileConfig) -> Result<(), CliError> {
    let m_arg = args.m.or(file.m);
    if let Some(path) = &args.check {
        let f: PermFile = read_json(path, "check")?;
        if f.m == 0 || f.m > MAX_CHECK_STAGES {
            return Err(CliError::Usage(format!(
                "check: m = {} outside 1..={MAX_CHECK_STAGES}",
                f.m
            )));
        }
        if m_arg.is_some_and(|m| m != f.m) {
            return Err(CliError::Usage(format!(
                "m: {} disagrees with the file's m = {}",
                m_arg.unwrap_or(0),
                f.m
            )));
        }
        let n = 1usize << f.m;
        let (kind, pi) = if f.sigma.len() == f.m {
            let s =
                BitPermutation::new(f.sigma).map_err(|e| CliError::Usage(format!("check: {e}")))?;
            ("bit", induced_index_perm(&s))
        } else if f.sigma.len() == n {
            let p = IndexPermutation::new(f.sigma)
                .map_err(|e| CliError::Usage(format!("check: {e}")))?;
            ("index", p)
        } else {
            return Err(CliError::Usage(format!(
                "check: sigma must have m = {} or n = {n} entries",
                f.m
            )));
        };
        let t = build_transform(f.m)?;
        let automorphism = is_automorphism(&permutation_matrix(&pi), &t)?;
        let body = CheckBody {
            m: f.m,
            kind,
            pi_cycles: pi.to_string(),
            automorphism,
        };
        let mut table = Table::new(&["m", "kind", "pi_cycles", "automorphism"]);
        table.push(vec![
            f.m.to_string(),
            kind.into(),
            body.pi_cycles.clone(),
            automorphism.to_string(),
        ]);
        let prov = Provenance::new(
            "aut",
            None,
            &serde_json::json!({"check": body.pi_cycles, "m": f.m}),
        )?;
        return Report::new(prov, &body, table)?.emit(&args.output, Format::Json);
    }

    let (m, perms, resolved) = if let Some(path) = &args.centralizer {
        let s = load_bit_perm(path, "centralizer")?;
        let m = enum_stages(Some(s.m()))?;
        let perms = centralizer_auts(&s)?;
        (
            m,
            perms,
            serde_json::json!({"centralizer": s.as_slice(), "m": m}),
        )
    } else {
        let m = enum_stages(m_arg)?;
        (
            m,
            enumerate_aut(m)?,
            serde_json::json!({"list": true, "m": m}),
        )
    };
    let rows = rows(&perms);
    let table = row_table(&rows);
    let body = ListBody {
        m,
        count: rows.len(),
        permutations: rows,
    };
    let prov = Provenance::new("aut", None, &resolved)?;
    Report::new(prov, &body, table)?.emit(&args.output, Format::Csv)
}

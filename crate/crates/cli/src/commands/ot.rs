use std::net::{TcpListener, TcpStream};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use polar_ot::proto::{
    run_alice, run_bob, run_loopback, AliceInput, BobInput, TcpLink, Transcript,
};
use polar_ot::{SessionPlan, SplitMix64};

use crate::args::{Format, OtRunArgs, RoleArg};
use crate::commands::{bit_string, read_json, read_session};
use crate::config::require;
use crate::error::CliError;
use crate::report::{write_output, Provenance, Report, Table};

/// How long Bob keeps retrying a refused connection.
const CONNECT_PATIENCE: Duration = Duration::from_secs(10);

/// `{"m0": "0110", "m1": "1010"}`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MessagesFile {
    m0: String,
    m1: String,
}

fn parse_bits(s: &str, field: &str, ell: usize) -> Result<Vec<u8>, CliError> {
    let bits: Vec<u8> = s
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(CliError::Usage(format!("{field}: '{c}' is not a bit"))),
        })
        .collect::<Result<_, _>>()?;
    if bits.len() != ell {
        return Err(CliError::Usage(format!(
            "{field}: {} bits, session needs ell = {ell}",
            bits.len()
        )));
    }
    Ok(bits)
}

/// Per-party seeds, so a TCP run with the same seed on both ends repeats
/// the loopback session exactly.
fn party_seeds(seed: u64) -> (u64, u64) {
    (
        SplitMix64::substream(seed, 0).next_u64(),
        SplitMix64::substream(seed, 1).next_u64(),
    )
}

fn link(args: &OtRunArgs) -> Result<TcpLink, CliError> {
    match (&args.listen, &args.connect) {
        (Some(addr), None) => {
            let listener = TcpListener::bind(addr)
                .map_err(|e| CliError::Runtime(format!("listen {addr}: {e}")))?;
            tracing::info!(addr = %listener.local_addr()?, "waiting for peer");
            let (stream, peer) = listener.accept()?;
            tracing::info!(%peer, "peer connected");
            Ok(TcpLink::new(stream)?)
        }
        (None, Some(addr)) => {
            let start = Instant::now();
            loop {
                match TcpStream::connect(addr) {
                    Ok(s) => return Ok(TcpLink::new(s)?),
                    Err(e)
                        if e.kind() == std::io::ErrorKind::ConnectionRefused
                            && start.elapsed() < CONNECT_PATIENCE =>
                    {
                        thread::sleep(Duration::from_millis(50));
                    }
                    Err(e) => return Err(CliError::Runtime(format!("connect {addr}: {e}"))),
                }
            }
        }
        _ => Err(CliError::Usage(
            "listen: give exactly one of --listen or --connect".into(),
        )),
    }
}

/// Transcript, announced sets, Bob's output and the loopback check.
type Finished = (Transcript, [Vec<usize>; 2], Option<Vec<u8>>, Option<bool>);

#[derive(Serialize)]
struct Resolved<'a> {
    role: &'static str,
    config: &'a polar_ot::SessionConfig,
    choice: Option<u8>,
    seed: u64,
}

#[derive(Serialize)]
struct Body {
    role: &'static str,
    n: usize,
    ell: usize,
    /// 1-based sets as announced.
    j0: Vec<usize>,
    j1: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    choice: Option<u8>,
    /// Bob's output.
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    /// Loopback only: whether Bob's output equals `m_choice`.
    #[serde(skip_serializing_if = "Option::is_none")]
    recovered: Option<bool>,
    frames: usize,
}

pub fn run(args: &OtRunArgs) -> Result<(), CliError> {
    let cfg = read_session(&args.config, "config")?;
    let plan = SessionPlan::new(&cfg)?;
    let seed = require(args.seed, "seed")?;
    let (alice_seed, bob_seed) = party_seeds(seed);
    let (role, needs_choice, needs_messages) = match args.role {
        RoleArg::Alice => ("alice", false, true),
        RoleArg::Bob => ("bob", true, false),
        RoleArg::Loopback => ("loopback", true, true),
    };
    let choice = if needs_choice {
        match require(args.choice, "choice")? {
            c @ (0 | 1) => Some(c),
            c => return Err(CliError::Usage(format!("choice: {c} is not 0 or 1"))),
        }
    } else {
        None
    };
    let messages = if needs_messages {
        let f: MessagesFile = read_json(require(args.messages.as_ref(), "messages")?, "messages")?;
        Some([
            parse_bits(&f.m0, "messages.m0", cfg.ell)?,
            parse_bits(&f.m1, "messages.m1", cfg.ell)?,
        ])
    } else {
        None
    };
    let alice = messages.map(|messages| AliceInput {
        messages,
        seed: alice_seed,
    });
    let bob = choice.map(|choice| BobInput {
        choice,
        seed: bob_seed,
    });
    if args.role == RoleArg::Loopback && (args.listen.is_some() || args.connect.is_some()) {
        return Err(CliError::Usage("listen: loopback runs in-process".into()));
    }

    let (transcript, sets, message, recovered): Finished = match (alice, bob) {
        (Some(a), None) => {
            let out = run_alice(&plan, &a, link(args)?)?;
            let sets = announced(&out.transcript)?;
            (out.transcript, sets, None, None)
        }
        (None, Some(b)) => {
            let out = run_bob(&plan, &b, link(args)?)?;
            (
                out.transcript,
                out.state.published.clone(),
                Some(out.message),
                None,
            )
        }
        (Some(a), Some(b)) => {
            let out = run_loopback(&plan, &a, &b)?;
            let ok = out.recovered();
            (
                out.bob.transcript,
                out.bob.state.published,
                Some(out.bob.message),
                Some(ok),
            )
        }
        (None, None) => unreachable!("every role has an input"),
    };
    if let Some(path) = &args.transcript {
        write_output(Some(path), transcript.to_text().as_bytes())?;
    }

    let body = Body {
        role,
        n: cfg.n(),
        ell: cfg.ell,
        j0: sets[0].iter().map(|i| i + 1).collect(),
        j1: sets[1].iter().map(|i| i + 1).collect(),
        choice,
        message: message.as_deref().map(bit_string),
        recovered,
        frames: transcript.lines.len(),
    };
    let mut table = Table::new(&["role", "choice", "message", "recovered", "frames"]);
    table.push(vec![
        role.into(),
        choice.map(|c| c.to_string()).unwrap_or_default(),
        body.message.clone().unwrap_or_default(),
        recovered.map(|r| r.to_string()).unwrap_or_default(),
        body.frames.to_string(),
    ]);
    let resolved = Resolved {
        role,
        config: &cfg,
        choice,
        seed,
    };
    let prov = Provenance::new("ot run", Some(seed), &resolved)?;
    Report::new(prov, &body, table)?.emit(&args.output, Format::Json)
}

/// Index sets as Alice received them.
fn announced(t: &Transcript) -> Result<[Vec<usize>; 2], CliError> {
    for msg in t.messages()? {
        if let polar_ot::proto::Message::IndexSets { j0, j1 } = msg {
            let zero = |v: Vec<usize>| v.into_iter().map(|i| i.saturating_sub(1)).collect();
            return Ok([zero(j0), zero(j1)]);
        }
    }
    Err(CliError::Runtime("transcript has no index sets".into()))
}

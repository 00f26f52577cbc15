//! The two parties as sequential state machines over a [`Link`].

use std::thread;

use crate::channel::{add_noise, modulate, ChannelParams};
use crate::error::{Error, Result};
use crate::privacy::HashSeed;
use crate::rng::SplitMix64;

use super::wire::{memory_pair, Bits, Endpoint, Link, Message, Reals, Role, Transcript};
use super::{
    alice_encode, alice_keys, bob_align_decode, bob_decipher, bob_setup, AliceState, BobState,
    SessionPlan,
};

#[derive(Clone, Debug)]
pub struct AliceInput {
    pub messages: [Vec<u8>; 2],
    pub seed: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct BobInput {
    pub choice: u8,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct AliceOutcome {
    pub state: AliceState,
    pub transcript: Transcript,
}

#[derive(Clone, Debug)]
pub struct BobOutcome {
    pub state: BobState,
    /// Full decision in Alice's coordinates.
    pub u_hat: Vec<u8>,
    pub message: Vec<u8>,
    pub transcript: Transcript,
}

#[derive(Clone, Debug)]
pub struct SessionOutcome {
    pub alice: AliceOutcome,
    pub bob: BobOutcome,
}

impl SessionOutcome {
    pub fn recovered(&self) -> bool {
        self.bob.message == self.alice.state.messages[self.bob.state.choice as usize]
    }
}

fn hello(plan: &SessionPlan, role: Role) -> Message {
    Message::Hello {
        role,
        n: plan.n(),
        pairs: plan.config.pairs,
        ell: plan.config.ell,
    }
}

fn check_hello(plan: &SessionPlan, msg: &Message, peer: Role) -> Result<()> {
    match msg {
        Message::Hello {
            role,
            n,
            pairs,
            ell,
        } if *role == peer => {
            if (*n, *pairs, *ell) != (plan.n(), plan.config.pairs, plan.config.ell) {
                return Err(Error::Protocol(format!(
                    "peer parameters (n={n}, pairs={pairs}, ell={ell}) differ from ours"
                )));
            }
            Ok(())
        }
        Message::Hello { role, .. } => Err(Error::Protocol(format!("peer claims role {role:?}"))),
        other => Err(Error::Protocol(format!(
            "expected hello, got {}",
            other.kind()
        ))),
    }
}

fn from_wire_set(set: &[usize], n: usize) -> Result<Vec<usize>> {
    set.iter()
        .map(|&i| {
            if i == 0 || i > n {
                Err(Error::Protocol(format!("index {i} outside 1..={n}")))
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

fn to_wire_set(set: &[usize]) -> Vec<usize> {
    set.iter().map(|i| i + 1).collect()
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Protocol(format!(
            "{what} has length {got}, expected {want}"
        )));
    }
    Ok(())
}

/// Alice's side of one session.
pub fn run_alice<L: Link>(plan: &SessionPlan, input: &AliceInput, link: L) -> Result<AliceOutcome> {
    let (n, pairs, ell) = (plan.n(), plan.config.pairs, plan.config.ell);
    for m in &input.messages {
        if m.len() != ell {
            return Err(Error::Dimension {
                expected: ell,
                got: m.len(),
            });
        }
    }
    let mut ep = Endpoint::new(link);
    let msg = ep.recv("hello")?;
    check_hello(plan, &msg, Role::Bob)?;
    ep.send(&hello(plan, Role::Alice))?;

    let Message::PublicTransform { f } = ep.recv("public_transform")? else {
        unreachable!()
    };
    if f.rows() != n || f.cols() != n {
        return Err(Error::Protocol(format!(
            "transform is {}×{}, expected {n}×{n}",
            f.rows(),
            f.cols()
        )));
    }
    let Message::IndexSets { j0, j1 } = ep.recv("index_sets")? else {
        unreachable!()
    };
    let sets = [from_wire_set(&j0, n)?, from_wire_set(&j1, n)?];
    check_len("J̃0", sets[0].len(), pairs)?;
    check_len("J̃1", sets[1].len(), pairs)?;

    let (u, x) = alice_encode(&f, &sets, &mut SplitMix64::substream(input.seed, 0))
        .map_err(|e| Error::Protocol(format!("index sets rejected: {e}")))?;
    ep.send(&Message::ChannelFrame {
        symbols: Reals(modulate(&x)),
    })?;

    let mut rng = SplitMix64::substream(input.seed, 1);
    let seeds = [
        HashSeed::random(pairs, ell, &mut rng),
        HashSeed::random(pairs, ell, &mut rng),
    ];
    ep.send(&Message::HashSeeds {
        a: pairs,
        l: ell,
        h0: Bits(seeds[0].bits.clone()),
        h1: Bits(seeds[1].bits.clone()),
    })?;
    let (keys, ciphertexts) = alice_keys(&u, &sets, &seeds, &input.messages)?;
    ep.send(&Message::Ciphertexts {
        c0: Bits(ciphertexts[0].clone()),
        c1: Bits(ciphertexts[1].clone()),
    })?;
    ep.recv("close")?;
    Ok(AliceOutcome {
        state: AliceState {
            messages: input.messages.clone(),
            u,
            x,
            keys,
            ciphertexts,
        },
        transcript: ep.into_transcript(),
    })
}

/// Bob's side of one session. Channel noise is drawn locally from Bob's seed.
pub fn run_bob<L: Link>(plan: &SessionPlan, input: &BobInput, link: L) -> Result<BobOutcome> {
    let (n, pairs, ell) = (plan.n(), plan.config.pairs, plan.config.ell);
    let mut ep = Endpoint::new(link);
    ep.send(&hello(plan, Role::Bob))?;
    let msg = ep.recv("hello")?;
    check_hello(plan, &msg, Role::Alice)?;

    let state = bob_setup(
        plan,
        input.choice,
        &mut SplitMix64::substream(input.seed, 0),
    )?;
    ep.send(&Message::PublicTransform { f: state.f.clone() })?;
    ep.send(&Message::IndexSets {
        j0: to_wire_set(&state.published[0]),
        j1: to_wire_set(&state.published[1]),
    })?;

    let Message::ChannelFrame { symbols } = ep.recv("channel_frame")? else {
        unreachable!()
    };
    check_len("channel frame", symbols.0.len(), n)?;
    let params = ChannelParams::linear(plan.config.snr, input.seed)?;
    let y = add_noise(
        &symbols.0,
        &params,
        &mut SplitMix64::substream(input.seed, 1),
    );
    let u_hat = bob_align_decode(plan, &state, &y)?;

    let Message::HashSeeds { a, l, h0, h1 } = ep.recv("hash_seeds")? else {
        unreachable!()
    };
    if (a, l) != (pairs, ell) {
        return Err(Error::Protocol(format!(
            "hash shape {a}→{l}, expected {pairs}→{ell}"
        )));
    }
    let seeds = [HashSeed::new(a, l, h0.0)?, HashSeed::new(a, l, h1.0)?];
    let Message::Ciphertexts { c0, c1 } = ep.recv("ciphertexts")? else {
        unreachable!()
    };
    check_len("c0", c0.0.len(), ell)?;
    check_len("c1", c1.0.len(), ell)?;
    let message = bob_decipher(&state, &u_hat, &seeds, &[c0.0, c1.0])?;
    ep.send(&Message::Close)?;
    Ok(BobOutcome {
        state,
        u_hat,
        message,
        transcript: ep.into_transcript(),
    })
}

fn is_hangup(e: &Error) -> bool {
    matches!(e, Error::Protocol(msg) if msg == "peer hung up")
}

/// Runs both parties in-process, Alice on a helper thread.
pub fn run_loopback(
    plan: &SessionPlan,
    alice: &AliceInput,
    bob: &BobInput,
) -> Result<SessionOutcome> {
    let (la, lb) = memory_pair();
    thread::scope(|s| {
        let handle = s.spawn(|| run_alice(plan, alice, la));
        let bob_out = run_bob(plan, bob, lb);
        let alice_out = handle
            .join()
            .map_err(|_| Error::Protocol("alice thread panicked".into()))?;
        // A failing side drops its link, so the other reports a hang-up;
        // surface the original error.
        let (alice, bob) = match (alice_out, bob_out) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(a), Err(b)) if is_hangup(&a) => return Err(b),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        Ok(SessionOutcome { alice, bob })
    })
}

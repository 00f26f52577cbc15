//! The 1-out-of-2 OT protocol over a polar-coded BI-AWGN link.
//!
//! Bob publishes `F = P1ᵀ·A^V·T` with `P1 = A^K`, where `A` is the permutation
//! matrix of the selection's automorphism, `K` is uniform on `0..N` and
//! `V = B ⊕ S_sw`. Alice encodes random bits on the announced sets through
//! `F`; Bob realigns with `y·P1` and SC-decodes against `T`. Under view `V`
//! Bob learns `u` on `π^V(𝒢*)` and nothing useful on `π^V(ℬ*)`.

mod session;
mod wire;

use serde::{Deserialize, Serialize};

use crate::aut::{permutation_matrix, BitPermutation, IndexPermutation};
use crate::channel::{llr_map, ChannelParams};
use crate::construct::{HalfSplit, MiProfile};
use crate::error::{Error, Result};
use crate::optimize::{OtSelection, SelectionFile};
use crate::polar::{
    apply_index_perm, apply_index_perm_inv, build_transform, BitMatrix, PolarTransform,
};
use crate::privacy::{toeplitz_hash, HashSeed};
use crate::rng::SplitMix64;
use crate::scdec::{Combine, FrozenSpec, ScDecoder};

pub use session::{
    run_alice, run_bob, run_loopback, AliceInput, AliceOutcome, BobInput, BobOutcome,
    SessionOutcome,
};
pub use wire::{
    memory_pair, Bits, Endpoint, Envelope, Link, MemoryLink, Message, Reals, Role, TcpLink,
    Transcript, WIRE_VERSION,
};

/// How the rate-1/2 good half is chosen when deciding which view decodes what.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitRule {
    /// Top half of the GA profile.
    #[default]
    Profile,
    /// Upper half of the index range.
    Canonical,
}

impl SplitRule {
    pub fn split(self, profile: &MiProfile) -> HalfSplit {
        match self {
            SplitRule::Profile => HalfSplit::from_profile(profile),
            SplitRule::Canonical => HalfSplit::canonical(profile.n()),
        }
    }
}

/// Public session parameters shared by both parties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub m: usize,
    /// Linear SNR of the simulated channel.
    pub snr: f64,
    pub selection: SelectionFile,
    #[serde(default)]
    pub split: SplitRule,
    /// Cross-cut pairs announced per set.
    pub pairs: usize,
    /// Key and message length in bits.
    pub ell: usize,
}

impl SessionConfig {
    pub fn n(&self) -> usize {
        1 << self.m
    }
}

/// A validated session: transform, automorphism orbit and the decodable set
/// of each view, all in Alice's `u` coordinates.
#[derive(Clone, Debug)]
pub struct SessionPlan {
    pub config: SessionConfig,
    pub profile: MiProfile,
    pub selection: OtSelection,
    pub transform: PolarTransform,
    pub pi: IndexPermutation,
    /// Order `N` of `A`.
    pub order: u128,
    /// `(g, π(g))`, by decreasing `I_g`, truncated to `pairs`.
    pub pairs: Vec<(usize, usize)>,
    /// Union of both announced sets, ascending.
    pub union: Vec<usize>,
    /// `decodable[v]`: indices of `u` that view `v` recovers, ascending.
    pub decodable: [Vec<usize>; 2],
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Selection pairs by decreasing MI of the good member, ties to the smaller
/// index, truncated to `pairs`.
pub fn truncated_pairs(
    sel: &OtSelection,
    profile: &MiProfile,
    pairs: usize,
) -> Result<Vec<(usize, usize)>> {
    if pairs > sel.k() {
        return Err(Error::Domain(format!(
            "{pairs} pairs requested, selection has {}",
            sel.k()
        )));
    }
    let mi = profile.mi();
    let mut v: Vec<(usize, usize)> = sel
        .good_sel
        .iter()
        .copied()
        .zip(sel.bad_sel.iter().copied())
        .collect();
    v.sort_by(|a, b| mi[b.0].total_cmp(&mi[a.0]).then(a.0.cmp(&b.0)));
    v.truncate(pairs);
    Ok(v)
}

/// Indices of `union` that land on the good half in view `v`, where view 1
/// sees `u_i` through bit-channel `π⁻¹(i)`.
pub fn view_decodable(
    union: &[usize],
    pi: &IndexPermutation,
    split: &HalfSplit,
    v: u8,
) -> Vec<usize> {
    let inv = pi.inverse();
    union
        .iter()
        .copied()
        .filter(|&i| split.is_good(if v == 0 { i } else { inv.apply(i) }))
        .collect()
}

impl SessionPlan {
    pub fn new(config: &SessionConfig) -> Result<Self> {
        if config.selection.m != config.m {
            return Err(Error::Dimension {
                expected: config.m,
                got: config.selection.m,
            });
        }
        let profile = MiProfile::ga(config.m, config.snr)?;
        let selection = OtSelection::from_file(&config.selection, &profile)?;
        let pairs = truncated_pairs(&selection, &profile, config.pairs)?;
        if config.ell > config.pairs {
            return Err(Error::Domain(format!(
                "key length {} exceeds the {} hash-input bits",
                config.ell, config.pairs
            )));
        }
        let pi = selection.pi.clone();
        for &(g, b) in &pairs {
            if pi.apply(b) != g {
                return Err(Error::IncompatibleSelection(format!(
                    "π maps {} to {}, not back to {}",
                    b + 1,
                    pi.apply(b) + 1,
                    g + 1
                )));
            }
        }
        let good: Vec<usize> = sorted(pairs.iter().map(|p| p.0).collect());
        let bad: Vec<usize> = sorted(pairs.iter().map(|p| p.1).collect());
        let union = sorted(good.iter().chain(&bad).copied().collect());
        let split = config.split.split(&profile);
        let decodable = [
            view_decodable(&union, &pi, &split, 0),
            view_decodable(&union, &pi, &split, 1),
        ];
        if decodable[0] != good || decodable[1] != bad {
            return Err(Error::IncompatibleSelection(
                "views do not split the announced indices into the selected good and bad sets"
                    .into(),
            ));
        }
        Ok(Self {
            config: config.clone(),
            profile,
            order: pi.order(),
            selection,
            transform: build_transform(config.m)?,
            pi,
            pairs,
            union,
            decodable,
        })
    }

    pub fn m(&self) -> usize {
        self.config.m
    }

    pub fn n(&self) -> usize {
        self.config.n()
    }

    pub fn sigma(&self) -> &BitPermutation {
        &self.selection.sigma
    }

    /// The automorphism `A`.
    pub fn a_matrix(&self) -> BitMatrix {
        permutation_matrix(&self.pi)
    }

    /// `(A^k)ᵀ·A^v·T`, whose row `j` is row `π^{k−v}(j)` of `T`.
    pub fn published_transform(&self, v: u8, k: u128) -> BitMatrix {
        published_transform(&self.transform, &self.pi, v, k)
    }
}

fn published_transform(t: &PolarTransform, pi: &IndexPermutation, v: u8, k: u128) -> BitMatrix {
    let order = pi.order();
    let rho = pi.pow((k % order + order - (v as u128) % order) % order);
    t.matrix().permute_rows(|j| rho.apply(j))
}

/// Bob's private session state.
#[derive(Clone, Debug, PartialEq)]
pub struct BobState {
    pub choice: u8,
    pub swap: u8,
    /// `V = B ⊕ S_sw`: Bob decodes against `T_V`.
    pub view: u8,
    pub k: u128,
    /// `π^K`, the index map of `P1`.
    pub p1: IndexPermutation,
    pub f: BitMatrix,
    /// Announced `(J̃0, J̃1)`; `J̃_B` is what view `V` decodes.
    pub published: [Vec<usize>; 2],
}

/// Bob's setup: pick `S_sw`, `K`, publish `F` and the ordered index sets.
pub fn bob_setup(plan: &SessionPlan, choice: u8, rng: &mut SplitMix64) -> Result<BobState> {
    if choice > 1 {
        return Err(Error::Domain(format!("choice bit {choice}")));
    }
    let swap = rng.next_bit();
    let k = rng.below(plan.order as u64) as u128;
    let view = choice ^ swap;
    let mut published = [Vec::new(), Vec::new()];
    published[choice as usize] = plan.decodable[view as usize].clone();
    published[1 - choice as usize] = plan.decodable[1 - view as usize].clone();
    Ok(BobState {
        choice,
        swap,
        view,
        k,
        p1: plan.pi.pow(k),
        f: plan.published_transform(view, k),
        published,
    })
}

/// Alice's view of one session.
#[derive(Clone, Debug, PartialEq)]
pub struct AliceState {
    pub messages: [Vec<u8>; 2],
    /// Random on `J̃0 ∪ J̃1`, zero elsewhere.
    pub u: Vec<u8>,
    pub x: Vec<u8>,
    pub keys: [Vec<u8>; 2],
    pub ciphertexts: [Vec<u8>; 2],
}

/// Alice's encoding: `u` uniform on the announced sets, `x = u·F`.
pub fn alice_encode(
    f: &BitMatrix,
    sets: &[Vec<usize>; 2],
    rng: &mut SplitMix64,
) -> Result<(Vec<u8>, Vec<u8>)> {
    let n = f.rows();
    if !f.is_square() {
        return Err(Error::Dimension {
            expected: n,
            got: f.cols(),
        });
    }
    if sets[0].len() != sets[1].len() {
        return Err(Error::Dimension {
            expected: sets[0].len(),
            got: sets[1].len(),
        });
    }
    let mut active = vec![false; n];
    for &i in sets.iter().flatten() {
        if i >= n {
            return Err(Error::Domain(format!("index {} outside 1..={n}", i + 1)));
        }
        if active[i] {
            return Err(Error::Overlap(i + 1));
        }
        active[i] = true;
    }
    let u: Vec<u8> = rng
        .bits(n)
        .into_iter()
        .zip(&active)
        .map(|(b, &a)| b & a as u8)
        .collect();
    let x = f.left_mul_vec(&u)?;
    Ok((u, x))
}

/// Bob's decoding: realign `y·P1`, SC-decode against `T` and map the decision back
/// to Alice's coordinates. Returns the full `û`; only `J̃_B` is meaningful.
pub fn bob_align_decode(plan: &SessionPlan, state: &BobState, y: &[f64]) -> Result<Vec<u8>> {
    let n = plan.n();
    if y.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: y.len(),
        });
    }
    let y2 = apply_index_perm_inv(y, &state.p1)?;
    let params = ChannelParams::linear(plan.config.snr, 0)?;
    // In view 1 the codeword is (u·A)·T and u'_j = u_{π(j)}; the union is
    // π-invariant so the frozen pattern is the same in both coordinates.
    let spec = FrozenSpec::from_unfrozen(n, &plan.union)?;
    let u_prime = ScDecoder::new(plan.m(), Combine::Exact)
        .decode(&llr_map(&y2, &params), &spec)?
        .u_hat;
    if state.view == 0 {
        Ok(u_prime)
    } else {
        apply_index_perm(&u_prime, &plan.pi)
    }
}

/// `u` restricted to `set`, in ascending index order.
pub fn restrict(u: &[u8], set: &[usize]) -> Vec<u8> {
    sorted(set.to_vec()).into_iter().map(|i| u[i]).collect()
}

pub fn xor_bits(a: &[u8], b: &[u8]) -> Result<Vec<u8>> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x ^ y).collect())
}

/// `(keys, ciphertexts)`, indexed by set.
pub type KeyPair = ([Vec<u8>; 2], [Vec<u8>; 2]);

/// Alice's keys: `k_b = h_b(u|J̃_b)`, `c_b = m_b ⊕ k_b`.
pub fn alice_keys(
    u: &[u8],
    sets: &[Vec<usize>; 2],
    seeds: &[HashSeed; 2],
    messages: &[Vec<u8>; 2],
) -> Result<KeyPair> {
    let mut keys = [Vec::new(), Vec::new()];
    let mut cts = [Vec::new(), Vec::new()];
    for b in 0..2 {
        keys[b] = toeplitz_hash(&restrict(u, &sets[b]), &seeds[b])?;
        cts[b] = xor_bits(&messages[b], &keys[b])?;
    }
    Ok((keys, cts))
}

/// Bob's output: `m̂_B = c_B ⊕ h_B(û|J̃_B)`.
pub fn bob_decipher(
    state: &BobState,
    u_hat: &[u8],
    seeds: &[HashSeed; 2],
    cts: &[Vec<u8>; 2],
) -> Result<Vec<u8>> {
    let b = state.choice as usize;
    let key = toeplitz_hash(&restrict(u_hat, &state.published[b]), &seeds[b])?;
    xor_bits(&cts[b], &key)
}

/// Multiset `{F(B, S_sw=0, K=k)}_k` of published transforms for one choice.
pub fn transform_orbit(plan: &SessionPlan, choice: u8) -> Vec<BitMatrix> {
    (0..plan.order)
        .map(|k| plan.published_transform(choice, k))
        .collect()
}

/// Per-orbit-element outcome of the transcript symmetry check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// `holds[e]` for `p = A^e`.
    pub holds: Vec<bool>,
    /// View 0 decodes `𝒢*` and not `ℬ*` under the configured split.
    pub views_consistent: bool,
}

impl SymmetryReport {
    pub fn pass(&self) -> bool {
        self.views_consistent && self.holds.iter().all(|&h| h)
    }
}

/// Compares the public tuple `Φ_{1,pA}` with the swapped tuple
/// `Γ_sw(Φ_{0,p})` for every `p = A^e` in the orbit, where
/// `Φ_{v,p} = (pᵀ·A^v·T, π^v(𝒢), π^v(ℬ))` lists the set view `v` decodes
/// first. Works on unvalidated configurations so that broken selections are
/// reported rather than rejected.
pub fn verify_transcript_symmetry(config: &SessionConfig) -> Result<SymmetryReport> {
    let profile = MiProfile::ga(config.m, config.snr)?;
    let sel = OtSelection::from_file(&config.selection, &profile)?;
    let pairs = truncated_pairs(&sel, &profile, config.pairs)?;
    let t = build_transform(config.m)?;
    let pi = &sel.pi;
    let good = sorted(pairs.iter().map(|p| p.0).collect());
    let bad = sorted(pairs.iter().map(|p| p.1).collect());
    let union = sorted(good.iter().chain(&bad).copied().collect());
    let split = config.split.split(&profile);
    let views_consistent = view_decodable(&union, pi, &split, 0) == good;
    let order = pi.order();
    let holds = (0..order)
        .map(|e| {
            let phi0 = (published_transform(&t, pi, 0, e), good.clone(), bad.clone());
            let swapped = (phi0.0, phi0.2, phi0.1);
            let phi1 = (
                published_transform(&t, pi, 1, (e + 1) % order),
                sorted(pi.image(&good)),
                sorted(pi.image(&bad)),
            );
            phi1 == swapped
        })
        .collect();
    Ok(SymmetryReport {
        holds,
        views_consistent,
    })
}

/// Selection file for explicit sets, mostly for hand-built instances.
pub fn selection_file(
    sigma: &BitPermutation,
    good: &[usize],
    profile: &MiProfile,
) -> Result<SelectionFile> {
    Ok(OtSelection::new(sigma.clone(), good.to_vec(), profile)?.to_file())
}

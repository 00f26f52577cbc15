//! OT-rate optimization: weights, eligible sets, the top-k inner solver and
//! the outer search over bit permutations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aut::{
    enumerate_aut, induced_index_perm, BitPermutation, IndexPermutation, MAX_ENUM_STAGES,
};
use crate::construct::{HalfSplit, MiProfile};
use crate::error::{Error, Result};
use crate::privacy::check_cross_cut;
use crate::rng::SplitMix64;

/// Which indices may be paired with their image.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Any `i` with `π(i)` on the bad side.
    #[default]
    Any,
    /// Only 2-cycles of `π`, so that `π(ℬ) = 𝒢` as the protocol requires.
    Swap,
}

/// `w_i = ½(I_i − I_{π(i)})`.
pub fn weights(pi: &IndexPermutation, profile: &MiProfile) -> Result<Vec<f64>> {
    if pi.n() != profile.n() {
        return Err(Error::Dimension {
            expected: profile.n(),
            got: pi.n(),
        });
    }
    let mi = profile.mi();
    Ok((0..pi.n())
        .map(|i| 0.5 * (mi[i] - mi[pi.apply(i)]))
        .collect())
}

/// `{i ∈ 𝒢̃ : π(i) ∈ ℬ̃}`, ascending.
pub fn eligible_set(pi: &IndexPermutation, split: &HalfSplit, pairing: Pairing) -> Vec<usize> {
    (0..pi.n())
        .filter(|&i| split.is_good(i) && !split.is_good(pi.apply(i)))
        .filter(|&i| pairing == Pairing::Any || pi.apply(pi.apply(i)) == i)
        .collect()
}

/// A cross-cut selection `(σ, 𝒢*, ℬ* = π(𝒢*))`.
#[derive(Clone, Debug, PartialEq)]
pub struct OtSelection {
    pub sigma: BitPermutation,
    pub pi: IndexPermutation,
    /// Ascending.
    pub good_sel: Vec<usize>,
    /// `bad_sel[t] = π(good_sel[t])`.
    pub bad_sel: Vec<usize>,
    /// `½ Σ_{𝒢*} (I_i − I_{π(i)})`.
    pub s: f64,
}

impl OtSelection {
    pub fn new(
        sigma: BitPermutation,
        mut good_sel: Vec<usize>,
        profile: &MiProfile,
    ) -> Result<Self> {
        let pi = induced_index_perm(&sigma);
        if pi.n() != profile.n() {
            return Err(Error::Dimension {
                expected: profile.n(),
                got: pi.n(),
            });
        }
        good_sel.sort_unstable();
        check_cross_cut(&good_sel, &pi)?;
        let w = weights(&pi, profile)?;
        let s = good_sel.iter().map(|&i| w[i]).sum();
        let bad_sel = pi.image(&good_sel);
        Ok(Self {
            sigma,
            pi,
            good_sel,
            bad_sel,
            s,
        })
    }

    pub fn k(&self) -> usize {
        self.good_sel.len()
    }

    pub fn m(&self) -> usize {
        self.sigma.m()
    }

    pub fn n(&self) -> usize {
        self.pi.n()
    }

    /// OT rate `s / n`.
    pub fn rate(&self) -> f64 {
        self.s / self.n() as f64
    }

    /// `𝒢* ∪ ℬ*`, ascending.
    pub fn ot_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.good_sel.iter().chain(&self.bad_sel).copied().collect();
        v.sort_unstable();
        v
    }

    /// True when `π` maps `ℬ*` back onto `𝒢*` pairwise.
    pub fn is_swap_closed(&self) -> bool {
        self.bad_sel
            .iter()
            .zip(&self.good_sel)
            .all(|(&b, &g)| self.pi.apply(b) == g)
    }

    pub fn to_file(&self) -> SelectionFile {
        SelectionFile {
            m: self.m(),
            sigma: self.sigma.as_slice().to_vec(),
            good_sel: self.good_sel.clone(),
            bad_sel: self.bad_sel.clone(),
            s: self.s,
        }
    }

    /// Rebuilds a stored selection, recomputing `π` and `s` against `profile`.
    pub fn from_file(f: &SelectionFile, profile: &MiProfile) -> Result<Self> {
        if f.sigma.len() != f.m {
            return Err(Error::Dimension {
                expected: f.m,
                got: f.sigma.len(),
            });
        }
        let sel = Self::new(
            BitPermutation::new(f.sigma.clone())?,
            f.good_sel.clone(),
            profile,
        )?;
        let mut stored: Vec<(usize, usize)> = f
            .good_sel
            .iter()
            .copied()
            .zip(f.bad_sel.iter().copied())
            .collect();
        stored.sort_unstable();
        let recomputed: Vec<(usize, usize)> = sel
            .good_sel
            .iter()
            .copied()
            .zip(sel.bad_sel.iter().copied())
            .collect();
        if f.bad_sel.len() != f.good_sel.len() || stored != recomputed {
            return Err(Error::Malformed(
                "bad_sel is not the image of good_sel".into(),
            ));
        }
        Ok(sel)
    }
}

/// On-disk selection, 0-based indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionFile {
    pub m: usize,
    pub sigma: Vec<usize>,
    pub good_sel: Vec<usize>,
    pub bad_sel: Vec<usize>,
    pub s: f64,
}

/// Top-k rule: the `k` largest weights in `𝒱_σ`, ties to the smaller index.
pub fn inner_topk(
    sigma: &BitPermutation,
    profile: &MiProfile,
    split: &HalfSplit,
    k: usize,
    pairing: Pairing,
) -> Result<OtSelection> {
    let pi = induced_index_perm(sigma);
    let w = weights(&pi, profile)?;
    let mut v = eligible_set(&pi, split, pairing);
    if v.len() < k {
        return Err(Error::Infeasible {
            eligible: v.len(),
            k,
        });
    }
    v.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    v.truncate(k);
    OtSelection::new(sigma.clone(), v, profile)
}

/// Candidate permutations: all of `S_m` for `m ≤ 8`; otherwise the identity,
/// every adjacent transposition and seeded uniform samples up to `limit`.
pub fn candidate_perms(m: usize, limit: usize, seed: u64) -> Result<Vec<BitPermutation>> {
    if m <= MAX_ENUM_STAGES {
        return enumerate_aut(m);
    }
    let mut out = vec![BitPermutation::identity(m)];
    for a in 0..m - 1 {
        out.push(BitPermutation::transposition(m, a, a + 1)?);
    }
    let mut seen: std::collections::HashSet<BitPermutation> = out.iter().cloned().collect();
    let mut rng = SplitMix64::new(seed);
    let mut attempts = 0;
    while out.len() < limit.max(out.len()) && attempts < 16 * limit {
        attempts += 1;
        let mut sigma: Vec<usize> = (0..m).collect();
        rng.shuffle(&mut sigma);
        let p = BitPermutation::new(sigma)?;
        if seen.insert(p.clone()) {
            out.push(p);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub best: OtSelection,
    pub evaluated: usize,
    pub feasible: usize,
}

/// Maximizes `s(σ)` over `candidates`; ties go to the earlier candidate.
pub fn outer_search(
    profile: &MiProfile,
    split: &HalfSplit,
    candidates: &[BitPermutation],
    k: usize,
    pairing: Pairing,
) -> Result<SearchOutcome> {
    let results: Vec<Option<OtSelection>> = candidates
        .par_iter()
        .map(|s| inner_topk(s, profile, split, k, pairing).ok())
        .collect();
    let feasible = results.iter().flatten().count();
    let best = results
        .into_iter()
        .flatten()
        .reduce(|best, c| if c.s > best.s { c } else { best })
        .ok_or(Error::NoFeasiblePermutation(candidates.len()))?;
    tracing::debug!(
        evaluated = candidates.len(),
        feasible,
        s = best.s,
        "outer search done"
    );
    Ok(SearchOutcome {
        best,
        evaluated: candidates.len(),
        feasible,
    })
}

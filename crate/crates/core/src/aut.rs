//! Automorphisms of the polar transform: bit-position permutations, the
//! index permutations they induce, cycle structure, conjugation and the
//! universal partial order.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::{BitMatrix, PolarTransform};
use crate::rng::SplitMix64;

/// Largest stage count for which `S_m` is enumerated (8! = 40320).
pub const MAX_ENUM_STAGES: usize = 8;

/// A permutation of the `m` label bit positions.
///
/// Stored LSB-indexed: bit `k` of the permuted label is bit `sigma[k]` of the
/// original label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "BitPermutationFile", into = "BitPermutationFile")]
pub struct BitPermutation {
    sigma: Vec<usize>,
}

/// On-disk form: `{"m": 4, "sigma": [0, 1, 3, 2]}`.
#[derive(Serialize, Deserialize)]
struct BitPermutationFile {
    m: usize,
    sigma: Vec<usize>,
}

impl TryFrom<BitPermutationFile> for BitPermutation {
    type Error = Error;

    fn try_from(f: BitPermutationFile) -> Result<Self> {
        if f.sigma.len() != f.m {
            return Err(Error::Dimension {
                expected: f.m,
                got: f.sigma.len(),
            });
        }
        BitPermutation::new(f.sigma)
    }
}

impl From<BitPermutation> for BitPermutationFile {
    fn from(s: BitPermutation) -> Self {
        BitPermutationFile {
            m: s.m(),
            sigma: s.sigma,
        }
    }
}

impl BitPermutation {
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        check_bijection(&sigma)?;
        Ok(Self { sigma })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            sigma: (0..m).collect(),
        }
    }

    /// Exchanges bit positions `a` and `b`.
    pub fn transposition(m: usize, a: usize, b: usize) -> Result<Self> {
        if a >= m || b >= m {
            return Err(Error::Domain(format!(
                "bit position out of range for m={m}"
            )));
        }
        let mut sigma: Vec<usize> = (0..m).collect();
        sigma.swap(a, b);
        Ok(Self { sigma })
    }

    pub fn m(&self) -> usize {
        self.sigma.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.sigma
    }

    pub fn is_identity(&self) -> bool {
        self.sigma.iter().enumerate().all(|(k, &s)| k == s)
    }

    /// Permutes the bits of label `i`.
    #[inline]
    pub fn apply_label(&self, i: usize) -> usize {
        self.sigma
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &s)| acc | (((i >> s) & 1) << k))
    }

    /// `self ∘ other` as label maps: first `other`, then `self`.
    pub fn compose(&self, other: &BitPermutation) -> BitPermutation {
        assert_eq!(self.m(), other.m());
        BitPermutation {
            sigma: self.sigma.iter().map(|&s| other.sigma[s]).collect(),
        }
    }

    pub fn inverse(&self) -> BitPermutation {
        let mut inv = vec![0; self.m()];
        for (k, &s) in self.sigma.iter().enumerate() {
            inv[s] = k;
        }
        BitPermutation { sigma: inv }
    }
}

/// MSB-left notation, e.g. `[b2 b3 b1 b0]` for the swap of bits 3 and 2.
impl fmt::Display for BitPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = self.sigma.iter().rev().map(|s| format!("b{s}")).join(" ");
        write!(f, "[{parts}]")
    }
}

/// A bijection on `0..n` with its cycle decomposition and order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexPermutation {
    map: Vec<usize>,
    cycles: Vec<Vec<usize>>,
    order: u128,
}

impl IndexPermutation {
    /// Validates `map` and decomposes it into cycles.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        check_bijection(&map)?;
        let n = map.len();
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        let mut order: u128 = 1;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = map[i];
            }
            order = lcm(order, cycle.len() as u128)
                .ok_or_else(|| Error::Domain("permutation order overflows u128".into()))?;
            cycles.push(cycle);
        }
        Ok(Self { map, cycles, order })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
            cycles: (0..n).map(|i| vec![i]).collect(),
            order: 1,
        }
    }

    /// Builds a permutation from disjoint cycles; unlisted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for c in cycles {
            for (k, &a) in c.iter().enumerate() {
                if a >= n || std::mem::replace(&mut touched[a], true) {
                    return Err(Error::NotBijection(format!("bad cycle element {a}")));
                }
                map[a] = c[(k + 1) % c.len()];
            }
        }
        Self::new(map)
    }

    /// Uniformly random permutation of `0..n`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        SplitMix64::new(seed).shuffle(&mut map);
        Self::new(map).expect("shuffle yields a bijection")
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// Cycles in order of their smallest element, each starting there.
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn cycle_lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }

    /// Smallest `t ≥ 1` with `π^t = id`.
    pub fn order(&self) -> u128 {
        self.order
    }

    pub fn is_identity(&self) -> bool {
        self.order == 1
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (i, &p) in self.map.iter().enumerate() {
            inv[p] = i;
        }
        Self::new(inv).expect("inverse of a bijection")
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &IndexPermutation) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: other.n(),
            });
        }
        Self::new(other.map.iter().map(|&i| self.map[i]).collect())
    }

    pub fn pow(&self, k: u128) -> Self {
        let k = k % self.order;
        let map = (0..self.n())
            .map(|start| {
                let mut i = start;
                for _ in 0..k {
                    i = self.map[i];
                }
                i
            })
            .collect();
        Self::new(map).expect("power of a bijection")
    }

    /// Image of an index set, in the order given.
    pub fn image(&self, set: &[usize]) -> Vec<usize> {
        set.iter().map(|&i| self.map[i]).collect()
    }
}

/// 1-based cycle notation including fixed points, e.g. `(1 4 3)(2 5)(6)`.
impl fmt::Display for IndexPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cycles {
            write!(f, "({})", c.iter().map(|i| i + 1).join(" "))?;
        }
        Ok(())
    }
}

fn check_bijection(map: &[usize]) -> Result<()> {
    let mut seen = vec![false; map.len()];
    for &p in map {
        if p >= map.len() {
            return Err(Error::NotBijection(format!(
                "image {p} outside 0..{}",
                map.len()
            )));
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::NotBijection(format!("image {p} repeated")));
        }
    }
    Ok(())
}

fn lcm(a: u128, b: u128) -> Option<u128> {
    fn gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// Decomposes a bijection of `0..n` into disjoint cycles.
pub fn cycle_decompose(map: &[usize]) -> Result<IndexPermutation> {
    IndexPermutation::new(map.to_vec())
}

/// `π(i) = bin2int(σ(int2bin(i)))` on 0-based indices.
pub fn induced_index_perm(sigma: &BitPermutation) -> IndexPermutation {
    let n = 1usize << sigma.m();
    IndexPermutation::new((0..n).map(|i| sigma.apply_label(i)).collect())
        .expect("bit permutations induce bijections")
}

/// The matrix `A` with `A e_j = e_{π(j)}`, i.e. entry `(π(j), j)` is one.
pub fn permutation_matrix(pi: &IndexPermutation) -> BitMatrix {
    let mut a = BitMatrix::zeros(pi.n(), pi.n());
    for j in 0..pi.n() {
        a.set(pi.apply(j), j, true);
    }
    a
}

/// Recovers `π` from a matrix built by [`permutation_matrix`].
pub fn matrix_to_perm(a: &BitMatrix) -> Result<IndexPermutation> {
    let rows = a.as_row_permutation().ok_or(Error::NotPermutationMatrix)?;
    // Row r has its one in column rows[r], so π(rows[r]) = r.
    let mut map = vec![0; rows.len()];
    for (r, &c) in rows.iter().enumerate() {
        map[c] = r;
    }
    IndexPermutation::new(map)
}

/// `Pᵀ T P = T` over GF(2).
pub fn is_automorphism(p: &BitMatrix, t: &PolarTransform) -> Result<bool> {
    if p.rows() != t.n() || p.cols() != t.n() {
        return Err(Error::Dimension {
            expected: t.n(),
            got: p.rows(),
        });
    }
    if p.as_row_permutation().is_none() {
        return Err(Error::NotPermutationMatrix);
    }
    Ok(p.transpose().mul(t.matrix())?.mul(p)? == *t.matrix())
}

/// All `m!` bit permutations in lexicographic order of their arrays, so the
/// identity comes first.
pub fn enumerate_aut(m: usize) -> Result<Vec<BitPermutation>> {
    if m > MAX_ENUM_STAGES {
        return Err(Error::Capacity {
            m,
            max: MAX_ENUM_STAGES,
        });
    }
    Ok((0..m)
        .permutations(m)
        .map(|sigma| BitPermutation { sigma })
        .collect())
}

/// Bit permutations commuting with `sigma`.
pub fn centralizer_auts(sigma: &BitPermutation) -> Result<Vec<BitPermutation>> {
    Ok(enumerate_aut(sigma.m())?
        .into_iter()
        .filter(|tau| tau.compose(sigma) == sigma.compose(tau))
        .collect())
}

/// `ρ ∘ α ∘ ρ⁻¹`.
pub fn conjugate_perm(
    rho: &IndexPermutation,
    alpha: &IndexPermutation,
) -> Result<IndexPermutation> {
    rho.compose(alpha)?.compose(&rho.inverse())
}

/// `{A^k : 0 ≤ k < N}` in increasing `k`.
pub fn perm_orbit(a: &IndexPermutation) -> Vec<IndexPermutation> {
    let mut out = vec![IndexPermutation::identity(a.n())];
    for _ in 1..a.order() {
        let next = a.compose(out.last().unwrap()).expect("same size");
        out.push(next);
    }
    out
}

/// Universal partial order: `i ⪯ j` iff every prefix sum of the bits of `i`,
/// read from the most significant bit, is at most that of `j`. Under the
/// non-reversed transform this implies `I_i ≤ I_j` on every symmetric channel.
pub fn upo_leq(i: usize, j: usize, m: usize) -> bool {
    let (mut si, mut sj) = (0u32, 0u32);
    for t in (0..m).rev() {
        si += ((i >> t) & 1) as u32;
        sj += ((j >> t) & 1) as u32;
        if si > sj {
            return false;
        }
    }
    true
}

/// 1-based quality order under `sigma`: entry `t` is `1 + π(n−1−t)`.
pub fn table_row(sigma: &BitPermutation) -> Vec<usize> {
    let pi = induced_index_perm(sigma);
    let n = pi.n();
    (0..n).map(|t| 1 + pi.apply(n - 1 - t)).collect()
}

//! Toeplitz hashing and the key-length budget: leftover-hash length,
//! min-entropy gap correction, leakage, reconciliation and net key length.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::aut::IndexPermutation;
use crate::construct::MiProfile;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Diagonal bits of an `ℓ × a` Toeplitz matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashSeed {
    pub input_len: usize,
    pub output_len: usize,
    pub bits: Vec<u8>,
}

fn seed_len(a: usize, l: usize) -> usize {
    if a == 0 || l == 0 {
        0
    } else {
        a + l - 1
    }
}

impl HashSeed {
    pub fn new(input_len: usize, output_len: usize, bits: Vec<u8>) -> Result<Self> {
        let want = seed_len(input_len, output_len);
        if bits.len() != want {
            return Err(Error::Dimension {
                expected: want,
                got: bits.len(),
            });
        }
        Ok(Self {
            input_len,
            output_len,
            bits,
        })
    }

    pub fn random(input_len: usize, output_len: usize, rng: &mut SplitMix64) -> Self {
        Self {
            input_len,
            output_len,
            bits: rng.bits(seed_len(input_len, output_len)),
        }
    }
}

/// `out_j = ⊕_i in_i · seed_{j − i + a − 1}`.
pub fn toeplitz_hash(input: &[u8], seed: &HashSeed) -> Result<Vec<u8>> {
    let a = seed.input_len;
    if input.len() != a {
        return Err(Error::Dimension {
            expected: a,
            got: input.len(),
        });
    }
    if seed.bits.len() != seed_len(a, seed.output_len) {
        return Err(Error::Dimension {
            expected: seed_len(a, seed.output_len),
            got: seed.bits.len(),
        });
    }
    Ok((0..seed.output_len)
        .map(|j| {
            input
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &x)| acc ^ (x & seed.bits[j + a - 1 - i]))
        })
        .collect())
}

fn binary_entropy(t: f64) -> f64 {
    let h = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    h(t) + h(1.0 - t)
}

/// `ψ_v(t) = H_b(t) + (1−t)·log₂(v−1) + log₂ t`.
pub fn psi(v: u64, t: f64) -> Result<f64> {
    if v == 0 || !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain(format!(
            "psi needs v ≥ 1 and t ∈ (0,1], got v={v}, t={t}"
        )));
    }
    if v == 1 {
        if t != 1.0 {
            return Err(Error::Domain("psi with v = 1 requires t = 1".into()));
        }
        return Ok(0.0);
    }
    Ok(binary_entropy(t) + (1.0 - t) * ((v - 1) as f64).log2() + t.log2())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinEntropyGapInput {
    /// `E[ψ_V(T)]`.
    pub psi_mean: f64,
    /// Smoothing parameter.
    pub eps: f64,
    /// `H_max(X)`.
    pub hmax: f64,
}

/// `Δ = E[ψ] − log₂(1−ε) + ε/(1−ε)·H_max`.
pub fn delta_correction(g: &MinEntropyGapInput) -> Result<f64> {
    if !(0.0..1.0).contains(&g.eps) {
        return Err(Error::Domain(format!(
            "smoothing eps {} outside [0,1)",
            g.eps
        )));
    }
    if g.hmax < 0.0 {
        return Err(Error::Domain(format!("H_max {} negative", g.hmax)));
    }
    Ok(g.psi_mean - (1.0 - g.eps).log2() + g.eps / (1.0 - g.eps) * g.hmax)
}

/// `⌊H_min − 2·log₂(1/ε_p)⌋`, clamped at 0.
pub fn lhl_length(hmin_smooth: f64, eps_p: f64) -> Result<u64> {
    check_open_unit("eps_p", eps_p)?;
    let v = (hmin_smooth - 2.0 * (1.0 / eps_p).log2()).floor();
    Ok(if v > 0.0 { v as u64 } else { 0 })
}

/// `c_ε = Δ + 2·log₂(1/ε_p)`.
pub fn c_eps(delta: f64, eps_p: f64) -> Result<f64> {
    check_open_unit("eps_p", eps_p)?;
    Ok(delta + 2.0 * (1.0 / eps_p).log2())
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} outside (0,1)")))
    }
}

/// Checks that `good` and `π(good)` are disjoint and in range.
pub fn check_cross_cut(good: &[usize], pi: &IndexPermutation) -> Result<()> {
    let n = pi.n();
    let mut mark = vec![0u8; n];
    for &i in good {
        if i >= n {
            return Err(Error::Domain(format!("index {i} outside 0..{n}")));
        }
        if mark[i] & 1 == 1 {
            return Err(Error::Domain(format!("index {i} repeated")));
        }
        mark[i] |= 1;
    }
    for &i in good {
        mark[pi.apply(i)] |= 2;
    }
    match mark.iter().position(|&m| m == 3) {
        Some(i) => Err(Error::Overlap(i)),
        None => Ok(()),
    }
}

/// `L = ½ Σ_{i∈𝒢} (I_i + I_{π(i)})`.
pub fn leakage(good: &[usize], pi: &IndexPermutation, profile: &MiProfile) -> Result<f64> {
    check_cross_cut(good, pi)?;
    let mi = profile.mi();
    Ok(0.5 * good.iter().map(|&i| mi[i] + mi[pi.apply(i)]).sum::<f64>())
}

/// Leakage bound from the bad side: `|S|·γ`.
pub fn bad_side_bound(count: usize, gamma: f64) -> f64 {
    count as f64 * gamma
}

/// `β_n = √(n·V)·Φ⁻¹(1 − ε_sw)`.
pub fn beta_n(n: usize, v: f64, eps_sw: f64) -> Result<f64> {
    check_open_unit("eps_sw", eps_sw)?;
    if v < 0.0 {
        return Err(Error::Domain(format!("variance {v} negative")));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let std_normal = Normal::standard();
    Ok((n as f64 * v).sqrt() * std_normal.inverse_cdf(1.0 - eps_sw))
}

/// `(ℓ_SWC, β_n)` with `ℓ_SWC = Σ_{𝒜ᶜ}(1 − I_i) + β_n`.
pub fn swc_length(
    recon: &[usize],
    profile: &MiProfile,
    n: usize,
    v: f64,
    eps_sw: f64,
) -> Result<(f64, f64)> {
    let beta = beta_n(n, v, eps_sw)?;
    let mi = profile.mi();
    if let Some(&i) = recon.iter().find(|&&i| i >= mi.len()) {
        return Err(Error::Domain(format!("index {i} outside profile")));
    }
    Ok((recon.iter().map(|&i| 1.0 - mi[i]).sum::<f64>() + beta, beta))
}

/// `s = ½ Σ_{i∈𝒢} (I_i − I_{π(i)})` for a cross-cut selection.
pub fn selection_sum(good: &[usize], pi: &IndexPermutation, profile: &MiProfile) -> Result<f64> {
    check_cross_cut(good, pi)?;
    let mi = profile.mi();
    Ok(good.iter().map(|&i| 0.5 * (mi[i] - mi[pi.apply(i)])).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NetKey {
    /// Net key length, clamped at 0.
    pub ell_net: f64,
    /// `ell_net / n`, bits per channel use.
    pub rate: f64,
}

/// `ℓ_net = ½ Σ (I_i − I_{π(i)}) − β − c_ε`, clamped at 0.
pub fn ell_net(
    good: &[usize],
    pi: &IndexPermutation,
    profile: &MiProfile,
    beta_n: f64,
    c_eps: f64,
) -> Result<NetKey> {
    let s = selection_sum(good, pi, profile)?;
    let ell_net = (s - beta_n - c_eps).max(0.0);
    Ok(NetKey {
        ell_net,
        rate: ell_net / profile.n() as f64,
    })
}

/// Inputs of a full key budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetParams {
    pub eps_s: f64,
    pub eps_p: f64,
    pub eps_sw: f64,
    /// Information-density variance for `β_n`; 0 gives first-order lengths.
    pub v: f64,
    /// `E[ψ_V(T)]`; 0 unless supplied.
    pub psi_mean: f64,
    /// Replaces the computed `c_ε` when set.
    pub c_eps_override: Option<f64>,
}

impl Default for BudgetParams {
    fn default() -> Self {
        Self {
            eps_s: 1e-6,
            eps_p: 1e-6,
            eps_sw: 1e-6,
            v: 0.0,
            psi_mean: 0.0,
            c_eps_override: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KeyBudget {
    /// Extractable key bits before reconciliation.
    pub ell: u64,
    pub ell_swc: f64,
    pub ell_net: f64,
    /// `⌊ell_net⌋`, the usable key size.
    pub ell_net_bits: u64,
    pub rate: f64,
    pub leakage: f64,
    pub c_eps: f64,
    pub delta: f64,
    pub beta_n: f64,
    pub eps_s: f64,
    pub eps_p: f64,
    pub eps_sw: f64,
    pub v: f64,
}

impl KeyBudget {
    /// Budget for a cross-cut selection `good` under `π`.
    ///
    /// The hidden string has `|𝒢|` uniform bits, so `H_max = |𝒢|` and its
    /// conditional entropy is `|𝒢| − L`.
    pub fn compute(
        good: &[usize],
        pi: &IndexPermutation,
        profile: &MiProfile,
        p: &BudgetParams,
    ) -> Result<Self> {
        let k = good.len() as f64;
        let leakage = leakage(good, pi, profile)?;
        let delta = delta_correction(&MinEntropyGapInput {
            psi_mean: p.psi_mean,
            eps: p.eps_s,
            hmax: k,
        })?;
        let c = match p.c_eps_override {
            Some(c) => c,
            None => c_eps(delta, p.eps_p)?,
        };
        let ell = lhl_length(k - leakage - delta, p.eps_p)?;
        let (ell_swc, beta) = swc_length(good, profile, profile.n(), p.v, p.eps_sw)?;
        let net = ell_net(good, pi, profile, beta, c)?;
        Ok(Self {
            ell,
            ell_swc,
            ell_net: net.ell_net,
            ell_net_bits: net.ell_net.floor() as u64,
            rate: net.rate,
            leakage,
            c_eps: c,
            delta,
            beta_n: beta,
            eps_s: p.eps_s,
            eps_p: p.eps_p,
            eps_sw: p.eps_sw,
            v: p.v,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aut::{induced_index_perm, BitPermutation};
    use proptest::prelude::*;

    fn sigma2() -> IndexPermutation {
        induced_index_perm(&BitPermutation::new(vec![0, 1, 3, 2]).unwrap())
    }

    fn half_mi_profile() -> MiProfile {
        MiProfile::from_i0(4, 0.5).unwrap()
    }

    /// Indices 10 and 11 (1-based), stored 0-based.
    const G_STAR: [usize; 2] = [9, 10];

    fn all_bits(len: usize) -> Vec<Vec<u8>> {
        (0..1u32 << len)
            .map(|v| (0..len).map(|k| ((v >> k) & 1) as u8).collect())
            .collect()
    }

    #[test]
    fn hash_trivial_cases() {
        let seed = HashSeed::new(4, 2, vec![1, 0, 1, 1, 0]).unwrap();
        assert_eq!(toeplitz_hash(&[0; 4], &seed).unwrap(), vec![0, 0]);
        let zero = HashSeed::new(4, 2, vec![0; 5]).unwrap();
        assert_eq!(toeplitz_hash(&[1, 0, 1, 1], &zero).unwrap(), vec![0, 0]);
        assert!(HashSeed::new(4, 2, vec![0; 4]).is_err());
        assert!(toeplitz_hash(&[0; 3], &seed).is_err());
        let empty = HashSeed::new(4, 0, vec![]).unwrap();
        assert!(toeplitz_hash(&[1, 1, 0, 1], &empty).unwrap().is_empty());
    }

    #[test]
    fn hash_matches_explicit_matrix() {
        // Row j, column i holds seed[j − i + a − 1].
        let (a, l) = (5, 3);
        let seed = HashSeed::new(a, l, vec![1, 1, 0, 1, 0, 0, 1]).unwrap();
        for x in all_bits(a) {
            let want: Vec<u8> = (0..l)
                .map(|j| (0..a).map(|i| x[i] * seed.bits[j + a - 1 - i]).sum::<u8>() % 2)
                .collect();
            assert_eq!(toeplitz_hash(&x, &seed).unwrap(), want);
        }
    }

    #[test]
    fn universality_exhaustive() {
        for a in 1..=6 {
            for l in 1..=3 {
                let seeds = all_bits(a + l - 1);
                let inputs = all_bits(a);
                let table: Vec<Vec<Vec<u8>>> = seeds
                    .iter()
                    .map(|s| {
                        let seed = HashSeed::new(a, l, s.clone()).unwrap();
                        inputs
                            .iter()
                            .map(|x| toeplitz_hash(x, &seed).unwrap())
                            .collect()
                    })
                    .collect();
                let bound = seeds.len() as f64 / f64::from(1u32 << l);
                for x in 0..inputs.len() {
                    for y in x + 1..inputs.len() {
                        let coll = table.iter().filter(|t| t[x] == t[y]).count();
                        assert!(coll as f64 <= bound, "a={a} l={l}");
                    }
                }
            }
        }
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(5, 1.0).unwrap(), 0.0);
        assert!(psi(2, 0.5).unwrap().abs() < 1e-15);
        assert!((psi(4, 0.5).unwrap() - 0.792_481_250_360_578).abs() < 1e-12);
        for v in 1..=64u64 {
            assert!(psi(v, 1.0 / v as f64).unwrap().abs() < 1e-12, "v={v}");
        }
        assert!(psi(0, 0.5).is_err());
        assert!(psi(3, 0.0).is_err());
        assert!(psi(1, 0.5).is_err());
    }

    #[test]
    fn delta_values() {
        let d = |psi_mean, eps, hmax| {
            delta_correction(&MinEntropyGapInput {
                psi_mean,
                eps,
                hmax,
            })
            .unwrap()
        };
        assert_eq!(d(0.0, 0.0, 3.0), 0.0);
        assert!((d(0.0, 0.5, 1.0) - 2.0).abs() < 1e-15);
        assert!((d(0.1, 0.01, 8.0) - 0.1953).abs() < 1e-4);
        assert!(delta_correction(&MinEntropyGapInput {
            psi_mean: 0.0,
            eps: 1.0,
            hmax: 1.0
        })
        .is_err());
    }

    #[test]
    fn lhl_values() {
        assert_eq!(lhl_length(0.0, 0.5).unwrap(), 0);
        assert_eq!(lhl_length(100.0, 2f64.powi(-10)).unwrap(), 80);
        assert_eq!(lhl_length(20.5, 0.5).unwrap(), 18);
        assert!(lhl_length(10.0, 1.0).is_err());
    }

    #[test]
    fn leakage_values() {
        let p = half_mi_profile();
        let pi = sigma2();
        assert_eq!(leakage(&[], &pi, &p).unwrap(), 0.0);
        assert!((leakage(&G_STAR, &pi, &p).unwrap() - 1.0).abs() < 0.04);
        // Indices 12 and 8 form one 2-cycle, so 𝒢 meets π(𝒢).
        assert!(matches!(leakage(&[11, 7], &pi, &p), Err(Error::Overlap(_))));
        let perfect = MiProfile::from_values(1.0, vec![0.0, 0.0, 1.0, 1.0], vec![0.0; 4]).unwrap();
        let swap = IndexPermutation::new(vec![2, 3, 0, 1]).unwrap();
        assert_eq!(leakage(&[2, 3], &swap, &perfect).unwrap(), 1.0);
        assert_eq!(bad_side_bound(4, 0.01), 0.04);
    }

    #[test]
    fn swc_values() {
        let p = half_mi_profile();
        let (l, b) = swc_length(&G_STAR, &p, 16, 0.0, 1e-3).unwrap();
        assert_eq!(b, 0.0);
        assert!((l - 0.8541).abs() < 0.04);
        let perfect = MiProfile::from_values(1.0, vec![1.0; 4], vec![0.0; 4]).unwrap();
        assert_eq!(swc_length(&[0, 1], &perfect, 4, 0.0, 0.1).unwrap().0, 0.0);
        assert_eq!(beta_n(100, 1.0, 0.5).unwrap(), 0.0);
        assert!((beta_n(100, 1.0, 0.025).unwrap() - 10.0 * 1.959_963_984_540_054).abs() < 1e-9);
    }

    #[test]
    fn net_key_values() {
        let p = half_mi_profile();
        let pi = sigma2();
        let net = ell_net(&G_STAR, &pi, &p, 0.0, 0.0).unwrap();
        assert!((net.ell_net - 0.1459).abs() < 0.02);
        assert!((net.rate - 9.12e-3).abs() < 9.12e-3 * 0.15);
        let flat = MiProfile::from_values(1.0, vec![0.5; 16], vec![0.5; 16]).unwrap();
        assert_eq!(ell_net(&G_STAR, &pi, &flat, 0.0, 0.0).unwrap().ell_net, 0.0);
        assert_eq!(ell_net(&G_STAR, &pi, &p, 0.1, 0.1).unwrap().ell_net, 0.0);
    }

    #[test]
    fn budget_consistency() {
        let p = half_mi_profile();
        let pi = sigma2();
        let params = BudgetParams {
            eps_s: 0.0,
            eps_p: 0.5,
            eps_sw: 0.5,
            ..BudgetParams::default()
        };
        let b = KeyBudget::compute(&G_STAR, &pi, &p, &params).unwrap();
        assert_eq!(b.c_eps, 2.0);
        // |𝒢| − L − ℓ_SWC equals the selection sum.
        let s = selection_sum(&G_STAR, &pi, &p).unwrap();
        assert!((2.0 - b.leakage - b.ell_swc - s).abs() < 1e-12);
        assert!(b.ell_net_bits <= b.ell);
    }

    proptest! {
        #[test]
        fn hash_is_linear(x in proptest::collection::vec(0u8..2, 12), y in proptest::collection::vec(0u8..2, 12), s in any::<u64>()) {
            let seed = HashSeed::random(12, 5, &mut SplitMix64::new(s));
            let xy: Vec<u8> = x.iter().zip(&y).map(|(a, b)| a ^ b).collect();
            let hx = toeplitz_hash(&x, &seed).unwrap();
            let hy = toeplitz_hash(&y, &seed).unwrap();
            let sum: Vec<u8> = hx.iter().zip(&hy).map(|(a, b)| a ^ b).collect();
            prop_assert_eq!(toeplitz_hash(&xy, &seed).unwrap(), sum);
        }

        #[test]
        fn net_key_monotone(b1 in 0.0f64..1.0, b2 in 0.0f64..1.0, c in 0.0f64..0.2) {
            let p = MiProfile::from_i0(5, 0.6).unwrap();
            let pi = induced_index_perm(&BitPermutation::new(vec![0, 1, 2, 4, 3]).unwrap());
            let good = [23usize, 22];
            let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
            let a = ell_net(&good, &pi, &p, lo, c).unwrap().ell_net;
            let b = ell_net(&good, &pi, &p, hi, c).unwrap().ell_net;
            prop_assert!(b <= a);
            let more_c = ell_net(&good, &pi, &p, lo, c + 0.1).unwrap().ell_net;
            prop_assert!(more_c <= a);
        }

        #[test]
        fn leakage_grows_with_selection(extra in 0usize..16) {
            let p = MiProfile::from_i0(5, 0.6).unwrap();
            let pi = induced_index_perm(&BitPermutation::new(vec![0, 1, 2, 4, 3]).unwrap());
            // Indices with bit 4 set and bit 3 clear map across the 3↔4 swap.
            let base = vec![16usize];
            let cand = 16 + (extra % 8);
            if cand != 16 {
                let l1 = leakage(&base, &pi, &p).unwrap();
                let l2 = leakage(&[16, cand], &pi, &p).unwrap();
                prop_assert!(l2 >= l1);
            }
        }
    }
}

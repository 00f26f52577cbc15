//! Gaussian-approximation construction: the J-function, per-index mutual
//! information and Bhattacharyya profiles, good/bad sets and reliability
//! relabeling.

use std::sync::OnceLock;

use serde::Serialize;

use crate::aut::IndexPermutation;
use crate::error::{Error, Result};

const GH_NODES: usize = 64;
/// Upper end of the `J⁻¹` search interval; `J(60)` is 1 to double precision.
pub const J_SIGMA_MAX: f64 = 60.0;
const J_INV_TOL: f64 = 1e-12;

/// Gauss–Hermite nodes and weights for `∫ e^{−x²} f(x) dx`.
fn gauss_hermite() -> &'static (Vec<f64>, Vec<f64>) {
    static CELL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CELL.get_or_init(|| hermite_rule(GH_NODES))
}

fn hermite_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // Orthonormal Hermite recurrence.
            let (mut p1, mut p2) = (pim4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `log₂(1 + e^{−l})` without overflow.
#[inline]
fn log2_1p_exp_neg(l: f64) -> f64 {
    let v = if l > 0.0 {
        (-l).exp().ln_1p()
    } else {
        -l + l.exp().ln_1p()
    };
    v / std::f64::consts::LN_2
}

/// `J(σ) = 1 − E[log₂(1 + e^{−L})]` with `L ~ N(σ²/2, σ²)`.
pub fn j_fun(sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    let (x, w) = gauss_hermite();
    let mu = sigma * sigma / 2.0;
    let s = std::f64::consts::SQRT_2 * sigma;
    let e: f64 = x
        .iter()
        .zip(w)
        .map(|(&xk, &wk)| wk * log2_1p_exp_neg(mu + s * xk))
        .sum::<f64>()
        / std::f64::consts::PI.sqrt();
    (1.0 - e).clamp(0.0, 1.0)
}

/// Inverse of [`j_fun`] by bisection on `[0, 60]`.
pub fn j_inv(i: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&i) {
        return Err(Error::Domain(format!(
            "mutual information {i} outside [0,1]"
        )));
    }
    Ok(j_inv_clamped(i))
}

fn j_inv_clamped(i: f64) -> f64 {
    if i <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, J_SIGMA_MAX);
    if j_fun(hi) <= i {
        return hi;
    }
    while hi - lo > J_INV_TOL {
        let mid = 0.5 * (lo + hi);
        if j_fun(mid) < i {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Upgraded child: `J(√2 · J⁻¹(I))`.
pub fn f_plus(i: f64) -> f64 {
    j_fun(std::f64::consts::SQRT_2 * j_inv_clamped(i.clamp(0.0, 1.0)))
}

/// Degraded child: `1 − J(√2 · J⁻¹(1 − I))`.
pub fn f_minus(i: f64) -> f64 {
    1.0 - j_fun(std::f64::consts::SQRT_2 * j_inv_clamped((1.0 - i).clamp(0.0, 1.0)))
}

/// Channel MI at linear SNR under BPSK: `J(2√snr)`.
pub fn channel_mi(snr: f64) -> f64 {
    if snr.is_infinite() {
        1.0
    } else {
        j_fun(2.0 * snr.sqrt())
    }
}

/// Linear SNR whose channel MI is `i0`.
pub fn snr_for_i0(i0: f64) -> Result<f64> {
    let s = j_inv(i0)? / 2.0;
    Ok(s * s)
}

/// Expands a root value through `m` polarization stages. Index bits are
/// consumed most significant first: a one applies `plus`, a zero `minus`.
fn polarize(
    m: usize,
    root: f64,
    plus: impl Fn(f64) -> f64,
    minus: impl Fn(f64) -> f64,
) -> Vec<f64> {
    let mut level = vec![root];
    for _ in 0..m {
        level = level.iter().flat_map(|&v| [minus(v), plus(v)]).collect();
    }
    level
}

/// GA bit-channel mutual informations starting from channel MI `i0`.
pub fn ga_profile_from_i0(m: usize, i0: f64) -> Vec<f64> {
    polarize(m, i0, f_plus, f_minus)
}

/// GA bit-channel mutual informations at linear SNR.
pub fn ga_mi_profile(m: usize, snr: f64) -> Vec<f64> {
    ga_profile_from_i0(m, channel_mi(snr))
}

/// Bhattacharyya upper bounds seeded with `Z₀ = e^{−snr}`.
pub fn z_profile(m: usize, snr: f64) -> Vec<f64> {
    polarize(m, (-snr).exp(), |z| z * z, |z| 2.0 * z - z * z)
}

/// Per-index mutual information and Bhattacharyya parameters at one SNR.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MiProfile {
    m: usize,
    snr: f64,
    mi: Vec<f64>,
    z: Vec<f64>,
}

impl MiProfile {
    pub fn ga(m: usize, snr: f64) -> Result<Self> {
        check_snr(snr)?;
        Ok(Self {
            m,
            snr,
            mi: ga_mi_profile(m, snr),
            z: z_profile(m, snr),
        })
    }

    /// Profile whose channel MI is `i0`.
    pub fn from_i0(m: usize, i0: f64) -> Result<Self> {
        let snr = snr_for_i0(i0)?;
        check_snr(snr)?;
        Ok(Self {
            m,
            snr,
            mi: ga_profile_from_i0(m, i0),
            z: z_profile(m, snr),
        })
    }

    /// Wraps externally supplied values.
    pub fn from_values(snr: f64, mi: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        let n = mi.len();
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if z.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: z.len(),
            });
        }
        if let Some(v) = mi.iter().chain(&z).find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("profile entry {v} outside [0,1]")));
        }
        Ok(Self {
            m: n.trailing_zeros() as usize,
            snr,
            mi,
            z,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.mi.len()
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn mi(&self) -> &[f64] {
        &self.mi
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }
}

fn check_snr(snr: f64) -> Result<()> {
    if snr > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("snr must be positive, got {snr}")))
    }
}

/// Default threshold `γ_n = 2^{−n^{0.3}}` clipped to `[1e−6, 0.25]`.
pub fn default_gamma(n: usize) -> f64 {
    (-(n as f64).powf(0.3)).exp2().clamp(1e-6, 0.25)
}

/// Thresholded good (`I ≥ 1−γ`) and bad (`I ≤ γ`) index sets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodBadSets {
    pub gamma: f64,
    pub good: Vec<usize>,
    pub bad: Vec<usize>,
}

pub fn good_bad_sets(profile: &MiProfile, gamma: f64) -> Result<GoodBadSets> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma {gamma} outside [0,1]")));
    }
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for (i, &v) in profile.mi().iter().enumerate() {
        // With γ = 1/2 both tests can hold; the good side wins so the sets stay disjoint.
        if v >= 1.0 - gamma {
            good.push(i);
        } else if v <= gamma {
            bad.push(i);
        }
    }
    Ok(GoodBadSets { gamma, good, bad })
}

/// Indices sorted by decreasing reliability, ties to the smaller index.
pub fn reliability_sorted(mi: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..mi.len()).collect();
    order.sort_by(|&a, &b| mi[b].total_cmp(&mi[a]).then(a.cmp(&b)));
    order
}

/// Rate-1/2 partition into the "good half" 𝒢̃ and its complement ℬ̃.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfSplit {
    in_good: Vec<bool>,
}

impl HalfSplit {
    /// Top `n/2` indices of the profile (ties to the smaller index).
    pub fn from_profile(profile: &MiProfile) -> Self {
        Self::from_order(&reliability_sorted(profile.mi()))
    }

    /// First half of a most-to-least reliable order.
    pub fn from_order(order: &[usize]) -> Self {
        let mut in_good = vec![false; order.len()];
        for &i in &order[..order.len() / 2] {
            in_good[i] = true;
        }
        Self { in_good }
    }

    /// The canonical split: upper half of the index range is good.
    pub fn canonical(n: usize) -> Self {
        Self {
            in_good: (0..n).map(|i| i >= n / 2).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.in_good.len()
    }

    pub fn is_good(&self, i: usize) -> bool {
        self.in_good[i]
    }

    pub fn good(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.in_good[i]).collect()
    }

    pub fn bad(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.in_good[i]).collect()
    }
}

/// Relabeling that maps the physical reliability order onto `(n, …, 1)`.
#[derive(Clone, Debug)]
pub struct RelabelMap {
    /// Most to least reliable, 0-based.
    pub order_real: Vec<usize>,
    /// `pi_rel(order_real[t]) = n − 1 − t`.
    pub pi_rel: IndexPermutation,
    pub split: HalfSplit,
}

impl RelabelMap {
    pub fn from_order(order_real: Vec<usize>) -> Result<Self> {
        let n = order_real.len();
        let mut map = vec![usize::MAX; n];
        for (t, &i) in order_real.iter().enumerate() {
            if i >= n {
                return Err(Error::NotBijection(format!("index {i} outside 0..{n}")));
            }
            map[i] = n - 1 - t;
        }
        let pi_rel = IndexPermutation::new(map)?;
        let split = HalfSplit::from_order(&order_real);
        Ok(Self {
            order_real,
            pi_rel,
            split,
        })
    }
}

pub fn reliability_order(profile: &MiProfile) -> RelabelMap {
    RelabelMap::from_order(reliability_sorted(profile.mi()))
        .expect("sorted indices form a bijection")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aut::{
        conjugate_perm, enumerate_aut, induced_index_perm, permutation_matrix, upo_leq,
    };
    use crate::polar::build_transform;

    #[test]
    fn hermite_weights_integrate_polynomials() {
        let (x, w) = gauss_hermite();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((w.iter().sum::<f64>() - sqrt_pi).abs() < 1e-12);
        let m2: f64 = x.iter().zip(w).map(|(x, w)| w * x * x).sum();
        assert!((m2 - sqrt_pi / 2.0).abs() < 1e-12);
    }

    #[test]
    fn j_endpoints() {
        assert_eq!(j_fun(0.0), 0.0);
        assert!(j_fun(J_SIGMA_MAX) > 1.0 - 1e-15);
        assert!((j_fun(2.0 * 1.044f64.sqrt()) - 0.5).abs() < 0.01);
    }

    #[test]
    fn j_inverse_round_trip() {
        for k in 1..100 {
            let i = k as f64 / 100.0;
            let s = j_inv(i).unwrap();
            assert!((j_fun(s) - i).abs() < 1e-9, "I={i}");
        }
        assert!(j_inv(1.5).is_err());
        assert!(j_inv(-0.1).is_err());
    }

    #[test]
    fn j_strictly_increasing() {
        let vals: Vec<f64> = (0..200).map(|k| j_fun(k as f64 * 0.05)).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn golden_sixteen_point_profile() {
        let p = ga_profile_from_i0(4, 0.5);
        let quoted = [
            (12, 0.9464),
            (8, 0.8881),
            (11, 0.6230),
            (7, 0.4771),
            (10, 0.5229),
            (6, 0.3770),
            (9, 0.1119),
            (5, 0.0536),
        ];
        for (idx, want) in quoted {
            assert!((p[idx - 1] - want).abs() < 0.02, "I{idx} = {}", p[idx - 1]);
        }
    }

    #[test]
    fn high_snr_saturates() {
        assert!(ga_mi_profile(5, 1e4).iter().all(|&v| v > 1.0 - 1e-9));
    }

    #[test]
    fn z_recursion() {
        assert_eq!(z_profile(0, 1.5), vec![(-1.5f64).exp()]);
        let z0 = (-0.7f64).exp();
        assert_eq!(z_profile(1, 0.7), vec![2.0 * z0 - z0 * z0, z0 * z0]);
    }

    fn ranks(v: &[f64]) -> Vec<f64> {
        let order = reliability_sorted(v);
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in order.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }

    #[test]
    fn z_order_anticorrelates_with_mi() {
        let p = MiProfile::ga(3, 2.0).unwrap();
        let (ri, rz) = (ranks(p.mi()), ranks(p.z()));
        let n = ri.len() as f64;
        let d2: f64 = ri.iter().zip(&rz).map(|(a, b)| (a - b).powi(2)).sum();
        let spearman = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
        assert!(spearman < 0.0, "spearman {spearman}");
    }

    #[test]
    fn degradation_split() {
        for k in 0..=100 {
            let i = k as f64 / 100.0;
            assert!(f_plus(i) >= i - 1e-9);
            assert!(f_minus(i) <= i + 1e-9);
        }
    }

    #[test]
    fn monotone_in_snr() {
        let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
        let profiles: Vec<MiProfile> = grid.iter().map(|&s| MiProfile::ga(4, s).unwrap()).collect();
        for w in profiles.windows(2) {
            for i in 0..16 {
                assert!(w[1].mi()[i] >= w[0].mi()[i] - 1e-12);
                assert!(w[1].z()[i] <= w[0].z()[i] + 1e-12);
            }
        }
    }

    #[test]
    fn upo_consistency() {
        for m in 1..=6 {
            for snr in [0.5, 1.0, 2.0, 4.0] {
                let p = ga_mi_profile(m, snr);
                for i in 0..p.len() {
                    for j in 0..p.len() {
                        if upo_leq(i, j, m) {
                            assert!(p[i] <= p[j] + 1e-9, "m={m} snr={snr} {i}⪯{j}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn good_bad_thresholds() {
        let p = MiProfile::from_i0(4, 0.5).unwrap();
        let half = good_bad_sets(&p, 0.5).unwrap();
        assert_eq!(half.good.len() + half.bad.len(), 16);
        let s = good_bad_sets(&p, 0.12).unwrap();
        assert!(s.bad.contains(&(9 - 1)) && s.bad.contains(&(5 - 1)));
        assert!(s.good.iter().all(|i| !s.bad.contains(i)));
        let none = good_bad_sets(&p, 0.0).unwrap();
        assert!(none.good.is_empty() && none.bad.is_empty());
        assert!(good_bad_sets(&p, 1.2).is_err());
    }

    #[test]
    fn default_gamma_range() {
        assert_eq!(default_gamma(2), 2f64.powf(-(2f64.powf(0.3))).min(0.25));
        assert_eq!(default_gamma(1 << 16), 1e-6);
        assert!((1e-6..=0.25).contains(&default_gamma(1024)));
    }

    #[test]
    fn canonical_profile_relabels_to_identity() {
        let mi: Vec<f64> = (0..8).map(|i| i as f64 / 8.0).collect();
        let p = MiProfile::from_values(1.0, mi, vec![0.5; 8]).unwrap();
        let r = reliability_order(&p);
        assert_eq!(r.order_real, vec![7, 6, 5, 4, 3, 2, 1, 0]);
        assert!(r.pi_rel.is_identity());
        assert_eq!(r.split.good(), vec![4, 5, 6, 7]);
    }

    #[test]
    fn sample_real_order() {
        let order1 = [16, 15, 14, 12, 8, 13, 11, 10, 7, 6, 4, 9, 5, 3, 2, 1];
        let r = RelabelMap::from_order(order1.iter().map(|i| i - 1).collect()).unwrap();
        assert_eq!(r.pi_rel.apply(12 - 1) + 1, 13);
        assert_eq!(r.pi_rel.apply(8 - 1) + 1, 12);
        // GA at I0 = 1/2 yields this order.
        let ga = reliability_order(&MiProfile::from_i0(4, 0.5).unwrap());
        assert_eq!(ga.order_real, r.order_real);
    }

    #[test]
    fn relabeled_automorphisms_are_conjugates() {
        let m = 3;
        let n = 8;
        let rel = reliability_order(&MiProfile::ga(m, 1.0).unwrap());
        let p_rel = permutation_matrix(&rel.pi_rel);
        let p_rel_inv = permutation_matrix(&rel.pi_rel.inverse());
        let t = build_transform(m).unwrap();
        let t_tilde = p_rel.mul(t.matrix()).unwrap().mul(&p_rel_inv).unwrap();

        let mut conj: Vec<Vec<usize>> = enumerate_aut(m)
            .unwrap()
            .iter()
            .map(|s| {
                conjugate_perm(&rel.pi_rel, &induced_index_perm(s))
                    .unwrap()
                    .as_slice()
                    .to_vec()
            })
            .collect();
        conj.sort();

        use itertools::Itertools;
        let mut direct: Vec<Vec<usize>> = (0..n)
            .permutations(n)
            .filter(|map| {
                let p = permutation_matrix(&IndexPermutation::new(map.clone()).unwrap());
                p.transpose().mul(&t_tilde).unwrap().mul(&p).unwrap() == t_tilde
            })
            .collect();
        direct.sort();
        assert_eq!(direct, conj);
    }

    #[test]
    fn from_values_validation() {
        assert!(MiProfile::from_values(1.0, vec![0.5; 3], vec![0.5; 3]).is_err());
        assert!(MiProfile::from_values(1.0, vec![1.5; 2], vec![0.5; 2]).is_err());
        assert!(MiProfile::ga(3, 0.0).is_err());
    }
}

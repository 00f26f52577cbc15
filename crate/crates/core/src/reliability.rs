//! Reliability certification: Clopper–Pearson upper limits, the Monte-Carlo
//! hash-input error harness and the Bhattacharyya prefix union bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::channel::{add_noise, llr_map, modulate, ChannelParams};
use crate::error::{Error, Result};
use crate::polar::polar_butterfly;
use crate::rng::SplitMix64;
use crate::scdec::{Combine, FrozenSpec, ScDecoder};

const CF_TOL: f64 = 1e-14;
const CF_MAX_ITER: usize = 10_000;
const TINY: f64 = 1e-300;

/// Continued fraction for `I_x(a, b)` (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_TOL {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` together with `1 − I_x(a, b)`,
/// each computed directly so that tiny tails keep full relative precision.
pub fn betainc(a: f64, b: f64, x: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0) || !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("betainc({a}, {b}, {x})")));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == 1.0 {
        return Ok((1.0, 0.0));
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (-x).ln_1p();
    if x < (a + 1.0) / (a + b + 2.0) {
        let i = (ln_front.exp() * beta_cf(a, b, x) / a).clamp(0.0, 1.0);
        Ok((i, 1.0 - i))
    } else {
        let j = (ln_front.exp() * beta_cf(b, a, 1.0 - x) / b).clamp(0.0, 1.0);
        Ok((1.0 - j, j))
    }
}

/// Binomial CDF `P(X ≤ k)` for `X ~ Bin(trials, p)`.
pub fn binomial_cdf(k: u64, trials: u64, p: f64) -> Result<f64> {
    if k >= trials {
        return Ok(1.0);
    }
    // P(X ≤ k) = I_{1−p}(trials − k, k + 1)
    Ok(betainc((trials - k) as f64, k as f64 + 1.0, 1.0 - p)?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpQuery {
    pub k: u64,
    pub trials: u64,
    pub delta: f64,
}

/// One-sided Clopper–Pearson upper limit: the `u` with `P(X ≤ k; u) = δ`.
pub fn cp_upper(q: &CpQuery) -> Result<f64> {
    if q.k > q.trials || q.trials == 0 {
        return Err(Error::Domain(format!(
            "need 0 ≤ k ≤ M with M ≥ 1, got k={}, M={}",
            q.k, q.trials
        )));
    }
    if !(q.delta > 0.0 && q.delta < 1.0) {
        return Err(Error::Domain(format!("delta {} outside (0,1)", q.delta)));
    }
    if q.k == q.trials {
        return Ok(1.0);
    }
    if q.k == 0 {
        // (1 − u)^M = δ
        return Ok(-(q.delta.ln() / q.trials as f64).exp_m1());
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binomial_cdf(q.k, q.trials, mid)? > q.delta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Hash-input set `S_b`, injected-random set `R_b` and the SC prefix they
/// induce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReliabilityQuery {
    pub hash_set: Vec<usize>,
    pub random_set: Vec<usize>,
}

impl ReliabilityQuery {
    pub fn i_star(&self) -> Option<usize> {
        self.hash_set.iter().copied().max()
    }

    /// `(S_b ∪ R_b) ∩ [0, i*]`, ascending.
    pub fn prefix_set(&self) -> Vec<usize> {
        let Some(i_star) = self.i_star() else {
            return Vec::new();
        };
        let mut v: Vec<usize> = self
            .hash_set
            .iter()
            .chain(&self.random_set)
            .copied()
            .filter(|&j| j <= i_star)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn unfrozen(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .hash_set
            .iter()
            .chain(&self.random_set)
            .copied()
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// `Σ_{j ∈ 𝒜_{≤i*}} Z_j`.
pub fn union_bound_prefix(rq: &ReliabilityQuery, z: &[f64]) -> f64 {
    rq.prefix_set().iter().map(|&j| z[j]).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McOutcome {
    pub trials: u64,
    /// Trials with at least one wrong hash-input bit.
    pub errors: u64,
    /// Wrong hash-input bits over all trials.
    pub bit_errors: u64,
    pub p_hat: f64,
    pub ber: f64,
    pub cp_upper: f64,
}

/// Monte-Carlo estimate of the hash-input block error under SC decoding.
///
/// Trial `t` draws from substream `(seed, t)`: first `n` uniform bits (kept on
/// `S_b ∪ R_b`, zero elsewhere), then the channel noise. Configurations that
/// differ only in their index sets therefore share random numbers.
pub fn mc_hash_input_error(
    m: usize,
    rq: &ReliabilityQuery,
    params: &ChannelParams,
    trials: u64,
    seed: u64,
    delta: f64,
) -> Result<McOutcome> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let n = 1usize << m;
    let unfrozen = rq.unfrozen();
    let spec = FrozenSpec::from_unfrozen(n, &unfrozen)?;
    let mut active = vec![false; n];
    for &i in &unfrozen {
        active[i] = true;
    }
    let (errors, bit_errors) = (0..trials)
        .into_par_iter()
        .map_init(
            || ScDecoder::new(m, Combine::Exact),
            |dec, t| {
                let mut rng = SplitMix64::substream(seed, t);
                let mut u = rng.bits(n);
                for (b, &a) in u.iter_mut().zip(&active) {
                    *b &= a as u8;
                }
                let mut x = u.clone();
                polar_butterfly(&mut x);
                let y = add_noise(&modulate(&x), params, &mut rng);
                let r = dec
                    .decode(&llr_map(&y, params), &spec)
                    .expect("shapes checked");
                let wrong = rq.hash_set.iter().filter(|&&i| r.u_hat[i] != u[i]).count() as u64;
                ((wrong > 0) as u64, wrong)
            },
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let bits_total = trials * rq.hash_set.len() as u64;
    Ok(McOutcome {
        trials,
        errors,
        bit_errors,
        p_hat: errors as f64 / trials as f64,
        ber: if bits_total == 0 {
            0.0
        } else {
            bit_errors as f64 / bits_total as f64
        },
        cp_upper: cp_upper(&CpQuery {
            k: errors,
            trials,
            delta,
        })?,
    })
}

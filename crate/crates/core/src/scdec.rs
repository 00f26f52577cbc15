//! Successive-cancellation decoding of `x = u·T` with arbitrary frozen sets,
//! and exact Gaussian codeword log-likelihoods.

use crate::channel::{modulate, ChannelParams};
use crate::error::{Error, Result};
use crate::polar::{gf2_encode, polar_butterfly, BitMatrix};

/// Channel LLRs are clipped to this magnitude before decoding.
pub const LLR_CLIP: f64 = 40.0;

/// Per-index class: `Some(v)` frozen to `v`, `None` decoded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrozenSpec {
    mask: Vec<Option<u8>>,
}

impl FrozenSpec {
    pub fn all_unfrozen(n: usize) -> Self {
        Self {
            mask: vec![None; n],
        }
    }

    pub fn all_frozen(values: &[u8]) -> Self {
        Self {
            mask: values.iter().map(|&v| Some(v & 1)).collect(),
        }
    }

    /// Everything frozen to zero except `unfrozen`.
    pub fn from_unfrozen(n: usize, unfrozen: &[usize]) -> Result<Self> {
        let mut mask = vec![Some(0); n];
        for &i in unfrozen {
            if i >= n {
                return Err(Error::Domain(format!("index {i} outside 0..{n}")));
            }
            mask[i] = None;
        }
        Ok(Self { mask })
    }

    pub fn n(&self) -> usize {
        self.mask.len()
    }

    pub fn frozen_value(&self, i: usize) -> Option<u8> {
        self.mask[i]
    }

    pub fn unfrozen(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.mask[i].is_none()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    pub u_hat: Vec<u8>,
    /// Decision LLR seen at each index (diagnostic).
    pub decision_llr: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Combine {
    /// Exact box-plus.
    #[default]
    Exact,
    MinSum,
}

/// SC decoder with preallocated per-level buffers.
#[derive(Clone, Debug)]
pub struct ScDecoder {
    m: usize,
    combine: Combine,
    levels: Vec<Vec<f64>>,
    x: Vec<u8>,
}

impl ScDecoder {
    pub fn new(m: usize, combine: Combine) -> Self {
        let levels = (0..=m).map(|k| vec![0.0; 1 << (m - k)]).collect();
        Self {
            m,
            combine,
            levels,
            x: vec![0; 1 << m],
        }
    }

    pub fn n(&self) -> usize {
        1 << self.m
    }

    pub fn decode(&mut self, llrs: &[f64], spec: &FrozenSpec) -> Result<DecodeResult> {
        let n = self.n();
        if llrs.len() != n || spec.n() != n {
            return Err(Error::Dimension {
                expected: n,
                got: if llrs.len() != n {
                    llrs.len()
                } else {
                    spec.n()
                },
            });
        }
        if llrs.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("NaN channel LLR".into()));
        }
        for (dst, &l) in self.levels[0].iter_mut().zip(llrs) {
            *dst = l.clamp(-LLR_CLIP, LLR_CLIP);
        }
        let mut out = DecodeResult {
            u_hat: vec![0; n],
            decision_llr: vec![0.0; n],
        };
        node(
            &mut self.levels,
            n,
            0,
            spec,
            self.combine,
            &mut out,
            &mut self.x,
        );
        Ok(out)
    }
}

/// Decodes the sub-code whose LLRs sit in `levels[0][..len]`, writing its
/// re-encoded codeword into `x`.
fn node(
    levels: &mut [Vec<f64>],
    len: usize,
    base: usize,
    spec: &FrozenSpec,
    combine: Combine,
    out: &mut DecodeResult,
    x: &mut [u8],
) {
    if len == 1 {
        let l = levels[0][0];
        let bit = spec.frozen_value(base).unwrap_or((l < 0.0) as u8);
        out.u_hat[base] = bit;
        out.decision_llr[base] = l;
        x[0] = bit;
        return;
    }
    let h = len / 2;
    let (cur, rest) = levels.split_first_mut().expect("level below leaf");
    for j in 0..h {
        rest[0][j] = boxplus(cur[j], cur[j + h], combine);
    }
    let (xl, xr) = x.split_at_mut(h);
    node(rest, h, base, spec, combine, out, xl);
    for j in 0..h {
        rest[0][j] = cur[j + h] + if xl[j] == 0 { cur[j] } else { -cur[j] };
    }
    node(rest, h, base + h, spec, combine, out, xr);
    for (a, b) in xl.iter_mut().zip(xr.iter()) {
        *a ^= *b;
    }
}

/// `2·atanh(tanh(a/2)·tanh(b/2))`, computed in the log domain.
#[inline]
pub fn boxplus(a: f64, b: f64, combine: Combine) -> f64 {
    let ms = a.signum() * b.signum() * a.abs().min(b.abs());
    match combine {
        Combine::MinSum => ms,
        Combine::Exact => ms + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p(),
    }
}

/// One-shot SC decode with exact combining.
pub fn sc_decode(llrs: &[f64], spec: &FrozenSpec) -> Result<DecodeResult> {
    let n = llrs.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    ScDecoder::new(n.trailing_zeros() as usize, Combine::Exact).decode(llrs, spec)
}

/// `log W^{⊗n}(y | modulate(u·G))` for noise variance `1/snr`.
pub fn codeword_loglik(y: &[f64], u: &[u8], g: &BitMatrix, params: &ChannelParams) -> Result<f64> {
    let x = gf2_encode(u, g)?;
    if y.len() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: y.len(),
        });
    }
    let snr = params.snr;
    let norm = 0.5 * (snr / (2.0 * std::f64::consts::PI)).ln();
    Ok(y.iter()
        .zip(modulate(&x))
        .map(|(&yi, s)| norm - 0.5 * snr * (yi - s) * (yi - s))
        .sum())
}

/// Re-encodes a decision through `T`; handy for checking decoder output.
pub fn reencode(u: &[u8]) -> Vec<u8> {
    let mut x = u.to_vec();
    polar_butterfly(&mut x);
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{add_noise, llr_map};
    use crate::polar::build_transform;
    use crate::rng::SplitMix64;

    #[test]
    fn noiseless_recovery() {
        let mut rng = SplitMix64::new(1);
        for m in 0..=8 {
            let n = 1 << m;
            let u = rng.bits(n);
            let llr: Vec<f64> = modulate(&reencode(&u))
                .iter()
                .map(|s| s * f64::INFINITY)
                .collect();
            let r = sc_decode(&llr, &FrozenSpec::all_unfrozen(n)).unwrap();
            assert_eq!(r.u_hat, u, "m={m}");
        }
    }

    #[test]
    fn frozen_values_are_forced() {
        let vals = vec![1, 0, 1, 1, 0, 0, 1, 0];
        let llr = vec![3.0, -2.0, 0.5, 7.0, -1.0, 0.0, 2.0, -9.0];
        assert_eq!(
            sc_decode(&llr, &FrozenSpec::all_frozen(&vals))
                .unwrap()
                .u_hat,
            vals
        );
    }

    #[test]
    fn zero_llr_decides_zero() {
        let r = sc_decode(&[0.0; 4], &FrozenSpec::all_unfrozen(4)).unwrap();
        assert_eq!(r.u_hat, vec![0; 4]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            sc_decode(&[0.0; 3], &FrozenSpec::all_unfrozen(3)),
            Err(Error::NotPowerOfTwo(3))
        ));
        assert!(sc_decode(&[0.0; 4], &FrozenSpec::all_unfrozen(8)).is_err());
        assert!(sc_decode(&[f64::NAN; 2], &FrozenSpec::all_unfrozen(2)).is_err());
    }

    #[test]
    fn boxplus_matches_tanh_rule() {
        for &(a, b) in &[(0.3, -1.2), (4.0, 5.0), (-0.01, -7.5), (12.0, -0.7)] {
            let direct = 2.0 * ((a / 2.0f64).tanh() * (b / 2.0f64).tanh()).atanh();
            assert!((boxplus(a, b, Combine::Exact) - direct).abs() < 1e-12);
        }
        assert_eq!(boxplus(3.0, -2.0, Combine::MinSum), -2.0);
    }

    #[test]
    fn sc_matches_ml_at_n4() {
        let t = build_transform(2).unwrap();
        let params = ChannelParams::linear(4.0, 0).unwrap();
        let all_u: Vec<Vec<u8>> = (0..16u8)
            .map(|v| (0..4).map(|k| (v >> k) & 1).collect())
            .collect();
        let mut agree = 0;
        let trials = 10_000;
        for trial in 0..trials {
            let mut rng = SplitMix64::substream(77, trial);
            let u = rng.bits(4);
            let y = add_noise(&modulate(&t.encode(&u).unwrap()), &params, &mut rng);
            let sc = sc_decode(&llr_map(&y, &params), &FrozenSpec::all_unfrozen(4)).unwrap();
            let ml = all_u
                .iter()
                .max_by(|a, b| {
                    let la = codeword_loglik(&y, a, t.matrix(), &params).unwrap();
                    let lb = codeword_loglik(&y, b, t.matrix(), &params).unwrap();
                    la.total_cmp(&lb)
                })
                .unwrap();
            agree += (&sc.u_hat == ml) as u32;
        }
        assert!(
            agree as f64 / trials as f64 >= 0.99,
            "agreement {agree}/{trials}"
        );
    }

    #[test]
    fn loglik_matches_density_product() {
        let g = build_transform(1).unwrap();
        let params = ChannelParams::linear(0.7, 0).unwrap();
        let y = [0.4, -1.3];
        let u = [1, 0];
        // u·T0 = (1, 0) → symbols (−1, +1)
        let var = 1.0 / 0.7;
        let dens = |v: f64, s: f64| {
            (-(v - s) * (v - s) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
        };
        let want = (dens(0.4, -1.0) * dens(-1.3, 1.0)).ln();
        let got = codeword_loglik(&y, &u, g.matrix(), &params).unwrap();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn transmitted_word_is_strict_maximum_at_high_snr() {
        let t = build_transform(2).unwrap();
        let params = ChannelParams::linear(1e6, 0).unwrap();
        let u = [1, 0, 1, 1];
        let y = modulate(&t.encode(&u).unwrap());
        let best = codeword_loglik(&y, &u, t.matrix(), &params).unwrap();
        for v in 0..16u8 {
            let w: Vec<u8> = (0..4).map(|k| (v >> k) & 1).collect();
            if w != u {
                assert!(codeword_loglik(&y, &w, t.matrix(), &params).unwrap() < best);
            }
        }
    }

    #[test]
    fn min_sum_decoder_runs() {
        let mut dec = ScDecoder::new(3, Combine::MinSum);
        let u = vec![0, 0, 0, 1, 0, 1, 1, 1];
        let llr: Vec<f64> = modulate(&reencode(&u)).iter().map(|s| s * 5.0).collect();
        assert_eq!(
            dec.decode(&llr, &FrozenSpec::all_unfrozen(8))
                .unwrap()
                .u_hat,
            u
        );
    }
}

//! GF(2) matrices, the polar transform `T = T0^{⊗m}` and encoding.

mod bitmatrix;

pub use bitmatrix::{decode_bits, encode_bits, BitMatrix};

use crate::aut::IndexPermutation;
use crate::error::{Error, Result};

/// Largest supported stage count (n = 65536).
pub const MAX_STAGES: usize = 16;

/// The Kronecker power `T0^{⊗m}` with `T0 = [[1,0],[1,1]]`, no bit reversal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarTransform {
    m: usize,
    matrix: BitMatrix,
}

impl PolarTransform {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        1 << self.m
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    /// `u · T`, computed with the O(n log n) butterfly.
    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>> {
        if u.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: u.len(),
            });
        }
        let mut x = u.to_vec();
        polar_butterfly(&mut x);
        Ok(x)
    }
}

pub fn build_transform(m: usize) -> Result<PolarTransform> {
    if m > MAX_STAGES {
        return Err(Error::Capacity { m, max: MAX_STAGES });
    }
    let n = 1usize << m;
    // Entry (x, y) is 1 iff y ⪯ x bit-wise, which is exactly T0^{⊗m}.
    let matrix = BitMatrix::from_fn(n, n, |x, y| order_indicator(x, y) == 1);
    Ok(PolarTransform { m, matrix })
}

/// In-place `x ← x · T0^{⊗m}`; `x.len()` must be a power of two.
pub fn polar_butterfly(x: &mut [u8]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in x.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        h *= 2;
    }
}

/// Row vector times matrix over GF(2).
pub fn gf2_encode(u: &[u8], f: &BitMatrix) -> Result<Vec<u8>> {
    f.left_mul_vec(u)
}

/// `1{y ⪯ x}`: 1 iff every set bit of `y` is also set in `x`.
pub fn order_indicator(x: usize, y: usize) -> u8 {
    (y & !x == 0) as u8
}

/// Moves input position `i` to output position `π(i)`.
///
/// With `A` the matrix of `π` (`A e_j = e_{π(j)}`), this is `v · Aᵀ`.
pub fn apply_index_perm<T: Clone>(v: &[T], pi: &IndexPermutation) -> Result<Vec<T>> {
    check_len(v.len(), pi.n())?;
    let mut out = v.to_vec();
    for (i, x) in v.iter().enumerate() {
        out[pi.apply(i)] = x.clone();
    }
    Ok(out)
}

/// Inverse of [`apply_index_perm`]: output position `i` takes input `π(i)`,
/// i.e. `v · A`.
pub fn apply_index_perm_inv<T: Clone>(v: &[T], pi: &IndexPermutation) -> Result<Vec<T>> {
    check_len(v.len(), pi.n())?;
    Ok((0..v.len()).map(|i| v[pi.apply(i)].clone()).collect())
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_transforms() {
        assert_eq!(
            build_transform(0).unwrap().matrix().to_rows(),
            vec![vec![1]]
        );
        assert_eq!(
            build_transform(1).unwrap().matrix().to_rows(),
            vec![vec![1, 0], vec![1, 1]]
        );
        let t0 = BitMatrix::from_rows(&[vec![1, 0], vec![1, 1]]).unwrap();
        let kron = t0.kron(&t0);
        let t2 = build_transform(2).unwrap();
        assert_eq!(t2.matrix(), &kron);
        assert_eq!(
            kron.to_rows(),
            vec![
                vec![1, 0, 0, 0],
                vec![1, 1, 0, 0],
                vec![1, 0, 1, 0],
                vec![1, 1, 1, 1]
            ]
        );
    }

    #[test]
    fn capacity_limit() {
        assert!(matches!(build_transform(17), Err(Error::Capacity { .. })));
    }

    #[test]
    fn kronecker_power_matches_closed_form() {
        let t0 = BitMatrix::from_rows(&[vec![1, 0], vec![1, 1]]).unwrap();
        let mut k = BitMatrix::identity(1);
        for m in 0..=6 {
            let t = build_transform(m).unwrap();
            assert_eq!(t.matrix(), &k, "m={m}");
            k = k.kron(&t0);
        }
    }

    #[test]
    fn involution() {
        for m in 0..=6 {
            let t = build_transform(m).unwrap();
            let sq = t.matrix().mul(t.matrix()).unwrap();
            assert_eq!(sq, BitMatrix::identity(t.n()), "m={m}");
        }
    }

    #[test]
    fn incidence_matches_bitwise_order() {
        for m in 0..=6 {
            let t = build_transform(m).unwrap();
            for x in 0..t.n() {
                for y in 0..t.n() {
                    assert_eq!(t.matrix().get(x, y) as u8, order_indicator(x, y));
                }
            }
        }
    }

    #[test]
    fn order_indicator_cases() {
        assert_eq!(order_indicator(0b1011, 0), 1);
        assert_eq!(order_indicator(0b0110, 0b0110), 1);
        // x = (1,0), y = (0,1)
        assert_eq!(order_indicator(0b10, 0b01), 0);
    }

    #[test]
    fn encode_examples() {
        let t0 = build_transform(1).unwrap();
        assert_eq!(gf2_encode(&[1, 1], t0.matrix()).unwrap(), vec![0, 1]);
        let t = build_transform(3).unwrap();
        assert_eq!(gf2_encode(&[0; 8], t.matrix()).unwrap(), vec![0; 8]);
        for i in 0..8 {
            let mut e = vec![0u8; 8];
            e[i] = 1;
            let row: Vec<u8> = (0..8).map(|c| t.matrix().get(i, c) as u8).collect();
            assert_eq!(gf2_encode(&e, t.matrix()).unwrap(), row);
        }
        assert!(gf2_encode(&[0; 4], t.matrix()).is_err());
    }

    #[test]
    fn index_perm_orientation() {
        let swap = IndexPermutation::new(vec![1, 0]).unwrap();
        assert_eq!(
            apply_index_perm(&['a', 'b'], &swap).unwrap(),
            vec!['b', 'a']
        );
        let id = IndexPermutation::identity(3);
        assert_eq!(apply_index_perm(&[7, 8, 9], &id).unwrap(), vec![7, 8, 9]);
        // 0 -> 2, 1 -> 0, 2 -> 1
        let p = IndexPermutation::new(vec![2, 0, 1]).unwrap();
        assert_eq!(
            apply_index_perm(&[10, 11, 12], &p).unwrap(),
            vec![11, 12, 10]
        );
        assert!(apply_index_perm(&[1, 2], &p).is_err());
    }

    #[test]
    fn index_perm_matches_matrix_product() {
        let p = IndexPermutation::new(vec![3, 0, 2, 1]).unwrap();
        let a = crate::aut::permutation_matrix(&p);
        let v = vec![1u8, 1, 0, 1];
        assert_eq!(
            apply_index_perm(&v, &p).unwrap(),
            gf2_encode(&v, &a.transpose()).unwrap()
        );
        assert_eq!(
            apply_index_perm_inv(&v, &p).unwrap(),
            gf2_encode(&v, &a).unwrap()
        );
    }

    fn bits(n: usize) -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..2, n)
    }

    proptest! {
        #[test]
        fn butterfly_equals_matrix_product(m in 0usize..8, seed in any::<u64>()) {
            let t = build_transform(m).unwrap();
            let u: Vec<u8> = (0..t.n()).map(|i| ((seed >> (i % 64)) & 1) as u8 ^ (i % 3 == 0) as u8).collect();
            prop_assert_eq!(t.encode(&u).unwrap(), gf2_encode(&u, t.matrix()).unwrap());
        }

        #[test]
        fn encoding_is_linear(u in bits(32), v in bits(32)) {
            let t = build_transform(5).unwrap();
            let uv: Vec<u8> = u.iter().zip(&v).map(|(a, b)| a ^ b).collect();
            let lhs = gf2_encode(&uv, t.matrix()).unwrap();
            let rhs: Vec<u8> = gf2_encode(&u, t.matrix()).unwrap().iter()
                .zip(gf2_encode(&v, t.matrix()).unwrap())
                .map(|(a, b)| a ^ b)
                .collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn perm_round_trip(v in proptest::collection::vec(any::<i32>(), 16), seed in any::<u64>()) {
            let p = IndexPermutation::random(16, seed);
            let moved = apply_index_perm(&v, &p).unwrap();
            prop_assert_eq!(apply_index_perm_inv(&moved, &p).unwrap(), v.clone());
            prop_assert_eq!(apply_index_perm(&apply_index_perm_inv(&v, &p).unwrap(), &p).unwrap(), v);
        }
    }
}

//! Dense GF(2) matrices packed into 64-bit words, row-major.
//!
//! Bit `(r, c)` lives in word `r * words_per_row + c / 64` at bit position
//! `c % 64`. Padding bits past `cols` in the last word of every row are
//! always zero, so word-level equality is matrix equality.

use std::fmt;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// Row `r` of the result is row `src(r)` of `self`.
    pub fn permute_rows(&self, mut src: impl FnMut(usize) -> usize) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        let w = self.words_per_row;
        for r in 0..self.rows {
            let s = src(r);
            out.data[r * w..(r + 1) * w].copy_from_slice(&self.data[s * w..(s + 1) * w]);
        }
        out
    }

    /// Builds a matrix from rows of 0/1 entries.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension {
                    expected: cols,
                    got: row.len(),
                });
            }
            for (c, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => m.set(r, c, true),
                    _ => return Err(Error::Domain(format!("entry ({r},{c}) = {b} is not a bit"))),
                }
            }
        }
        Ok(m)
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) as u8).collect())
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.words_per_row + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.words_per_row + c / 64];
        let mask = 1u64 << (c % 64);
        if v {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Row vector times matrix over GF(2): XOR of the rows selected by `v`.
    pub fn left_mul_vec(&self, v: &[u8]) -> Result<Vec<u8>> {
        if v.len() != self.rows {
            return Err(Error::Dimension {
                expected: self.rows,
                got: v.len(),
            });
        }
        let mut acc = vec![0u64; self.words_per_row];
        for (r, &bit) in v.iter().enumerate() {
            if bit & 1 == 1 {
                for (a, w) in acc.iter_mut().zip(self.row_words(r)) {
                    *a ^= w;
                }
            }
        }
        Ok((0..self.cols)
            .map(|c| ((acc[c / 64] >> (c % 64)) & 1) as u8)
            .collect())
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        let wpr = out.words_per_row;
        for r in 0..self.rows {
            let dst = &mut out.data[r * wpr..(r + 1) * wpr];
            for k in 0..self.cols {
                if self.get(r, k) {
                    for (d, w) in dst.iter_mut().zip(other.row_words(k)) {
                        *d ^= w;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &BitMatrix) -> BitMatrix {
        let (pr, pc) = (other.rows, other.cols);
        let mut out = BitMatrix::zeros(self.rows * pr, self.cols * pc);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if !self.get(r, c) {
                    continue;
                }
                for i in 0..pr {
                    for j in 0..pc {
                        if other.get(i, j) {
                            out.set(r * pr + i, c * pc + j, true);
                        }
                    }
                }
            }
        }
        out
    }

    /// If this is a permutation matrix, returns `p` with the single one of
    /// row `i` in column `p[i]`.
    pub fn as_row_permutation(&self) -> Option<Vec<usize>> {
        if !self.is_square() {
            return None;
        }
        let mut p = Vec::with_capacity(self.rows);
        let mut seen = vec![false; self.cols];
        for r in 0..self.rows {
            let words = self.row_words(r);
            if words.iter().map(|w| w.count_ones()).sum::<u32>() != 1 {
                return None;
            }
            let (wi, w) = words.iter().enumerate().find(|(_, w)| **w != 0)?;
            let c = wi * 64 + w.trailing_zeros() as usize;
            if std::mem::replace(&mut seen[c], true) {
                return None;
            }
            p.push(c);
        }
        Some(p)
    }

    /// Packs the entries row-major, eight per byte, most significant bit first,
    /// and encodes them as standard base64.
    pub fn to_base64(&self) -> String {
        encode_bits((0..self.rows).flat_map(|r| (0..self.cols).map(move |c| self.get(r, c))))
    }

    pub fn from_base64(rows: usize, cols: usize, s: &str) -> Result<Self> {
        let bits = decode_bits(s, rows * cols)?;
        let mut m = BitMatrix::zeros(rows, cols);
        for (idx, b) in bits.into_iter().enumerate() {
            if b == 1 {
                m.set(idx / cols, idx % cols, true);
            }
        }
        Ok(m)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        write!(f, "]")
    }
}

/// Packs bits MSB-first into bytes and base64-encodes them.
pub fn encode_bits(bits: impl IntoIterator<Item = bool>) -> String {
    let mut bytes = Vec::new();
    for (i, b) in bits.into_iter().enumerate() {
        if i % 8 == 0 {
            bytes.push(0u8);
        }
        if b {
            *bytes.last_mut().unwrap() |= 0x80 >> (i % 8);
        }
    }
    B64.encode(bytes)
}

/// Inverse of [`encode_bits`]; `len` is the number of meaningful bits.
pub fn decode_bits(s: &str, len: usize) -> Result<Vec<u8>> {
    let bytes = B64
        .decode(s)
        .map_err(|e| Error::Malformed(format!("base64: {e}")))?;
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::Malformed(format!(
            "expected {} bytes for {len} bits, got {}",
            len.div_ceil(8),
            bytes.len()
        )));
    }
    let bits: Vec<u8> = (0..len)
        .map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1)
        .collect();
    // Padding bits must be zero so that every bit string has one encoding.
    if len % 8 != 0 && bytes[len / 8] & (0xff >> (len % 8)) != 0 {
        return Err(Error::Malformed("nonzero padding bits".into()));
    }
    Ok(bits)
}

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cols: Option<usize>,
    bits: String,
}

impl Serialize for BitMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixWire {
            n: self.rows,
            cols: (!self.is_square()).then_some(self.cols),
            bits: self.to_base64(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = MatrixWire::deserialize(d)?;
        BitMatrix::from_base64(w.n, w.cols.unwrap_or(w.n), &w.bits)
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_is_neutral() {
        let a = BitMatrix::from_rows(&[vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 0]]).unwrap();
        let i = BitMatrix::identity(3);
        assert_eq!(a.mul(&i).unwrap(), a);
        assert_eq!(i.mul(&a).unwrap(), a);
    }

    #[test]
    fn product_matches_hand_computation() {
        // [[1,1],[0,1]] * [[1,0],[1,1]] = [[0,1],[1,1]] over GF(2)
        let a = BitMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
        let b = BitMatrix::from_rows(&[vec![1, 0], vec![1, 1]]).unwrap();
        assert_eq!(a.mul(&b).unwrap().to_rows(), vec![vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn rejects_non_bits_and_ragged_rows() {
        assert!(BitMatrix::from_rows(&[vec![0, 2]]).is_err());
        assert!(BitMatrix::from_rows(&[vec![0, 1], vec![1]]).is_err());
    }

    #[test]
    fn wide_rows_cross_word_boundaries() {
        let n = 130;
        let m = BitMatrix::from_fn(n, n, |r, c| (r * 7 + c * 3) % 5 == 0);
        let t = m.transpose();
        for r in 0..n {
            for c in 0..n {
                assert_eq!(m.get(r, c), t.get(c, r));
            }
        }
        assert_eq!(t.transpose(), m);
    }

    #[test]
    fn permutation_detection() {
        let p = BitMatrix::from_rows(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]).unwrap();
        assert_eq!(p.as_row_permutation(), Some(vec![1, 2, 0]));
        let not = BitMatrix::from_rows(&[vec![1, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]).unwrap();
        assert_eq!(not.as_row_permutation(), None);
        let dup = BitMatrix::from_rows(&[vec![1, 0], vec![1, 0]]).unwrap();
        assert_eq!(dup.as_row_permutation(), None);
    }

    #[test]
    fn bit_packing_is_msb_first() {
        assert_eq!(
            encode_bits([true, false, false, false, false, false, false, true]),
            "gQ=="
        );
        assert_eq!(
            decode_bits("gQ==", 8).unwrap(),
            vec![1, 0, 0, 0, 0, 0, 0, 1]
        );
        assert!(decode_bits("gQ==", 3).is_err());
    }

    #[test]
    fn json_header_carries_n() {
        let t = BitMatrix::from_rows(&[vec![1, 0], vec![1, 1]]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"n":2,"bits":"sA=="}"#);
        let back: BitMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }

    proptest! {
        #[test]
        fn base64_round_trip(rows in 1usize..20, cols in 1usize..80, seed in any::<u64>()) {
            let m = BitMatrix::from_fn(rows, cols, |r, c| {
                (seed.rotate_left((r * 31 + c) as u32 % 64) ^ (r * c) as u64) & 1 == 1
            });
            let back = BitMatrix::from_base64(rows, cols, &m.to_base64()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}

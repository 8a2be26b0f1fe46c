//! Boolean functions on up to 24 bits: packed truth tables, the F2
//! multilinear normal form, and degree accounting.

mod counting;
mod profile;
mod search;
mod smolensky;

pub use counting::{counting_check, CountingReport, CountingVerdict};
pub use profile::{
    convex_split, profile, smallest_thr_width, solves_coin, AmplifyKind, ConvexSplit,
    ProfileTable,
};
pub use search::{min_degree_search, SearchMode};
pub use smolensky::{ball_vanish_check, smolensky_check, SmolenskyReport};

use crate::bits::BitVec;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const MAX_ARITY: u32 = 24;

/// A Boolean function on n <= 24 bits as a packed 2^n-bit table; entry x is
/// the value on the assignment whose bit i is (x >> i) & 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthTable {
    n: u32,
    bits: BitVec,
}

const XFORM_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

/// In-place subset-XOR transform over F2 (self-inverse): maps a truth table
/// to its multilinear coefficient vector and back.
fn moebius_in_place(words: &mut [u64], n: u32) {
    for i in 0..n.min(6) {
        let shift = 1u32 << i;
        let mask = XFORM_MASKS[i as usize];
        for w in words.iter_mut() {
            *w ^= (*w & mask) << shift;
        }
    }
    for i in 6..n {
        let stride = 1usize << (i - 6);
        let mut base = 0;
        while base < words.len() {
            for k in 0..stride {
                words[base + stride + k] ^= words[base + k];
            }
            base += 2 * stride;
        }
    }
}

impl TruthTable {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > MAX_ARITY {
            return Err(Error::Parameter(format!(
                "arity must satisfy 1 <= n <= {MAX_ARITY}, got {n}"
            )));
        }
        Ok(TruthTable {
            n,
            bits: BitVec::zeros(1 << n),
        })
    }

    pub fn from_fn(n: u32, mut f: impl FnMut(u64) -> bool) -> Result<Self> {
        let mut t = Self::new(n)?;
        for x in 0..(1u64 << n) {
            if f(x) {
                t.bits.set(x, true);
            }
        }
        Ok(t)
    }

    /// From the low 2^n bits of a word (n <= 6).
    pub fn from_word(n: u32, word: u64) -> Result<Self> {
        if n > 6 {
            return Err(Error::Parameter("from_word requires n <= 6".into()));
        }
        Self::from_fn(n, |x| (word >> x) & 1 == 1)
    }

    pub fn constant(n: u32, value: bool) -> Self {
        Self::from_fn(n, |_| value).expect("constant arity checked by caller")
    }

    pub fn dictator(n: u32, i: u32) -> Self {
        Self::from_fn(n, |x| (x >> i) & 1 == 1).expect("dictator arity")
    }

    /// Strict majority: accepts |x| > n/2.
    pub fn majority(n: u32) -> Self {
        Self::from_fn(n, |x| 2 * x.count_ones() > n).expect("majority arity")
    }

    pub fn and_all(n: u32) -> Self {
        Self::from_fn(n, |x| x.count_ones() == n).expect("and arity")
    }

    pub fn xor_all(n: u32) -> Self {
        Self::from_fn(n, |x| x.count_ones() % 2 == 1).expect("xor arity")
    }

    pub fn arity(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn get(&self, x: u64) -> bool {
        self.bits.get(x)
    }

    pub fn set(&mut self, x: u64, v: bool) {
        self.bits.set(x, v);
    }

    pub fn complement(&mut self) {
        for w in self.bits.words_mut() {
            *w = !*w;
        }
        self.bits.mask_tail();
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.count_ones()
    }

    /// a_w = #{x : f(x) = 1, |x| = w} for w = 0..=n.
    pub fn weight_census(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.n as usize + 1];
        for x in 0..(1u64 << self.n) {
            if self.get(x) {
                counts[x.count_ones() as usize] += 1;
            }
        }
        counts
    }

    pub fn is_monotone_increasing(&self) -> bool {
        for x in 0..(1u64 << self.n) {
            if !self.get(x) {
                continue;
            }
            // f(x) = 1 must persist under raising any coordinate.
            for i in 0..self.n {
                if x >> i & 1 == 0 && !self.get(x | (1 << i)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_monotone_decreasing(&self) -> bool {
        for x in 0..(1u64 << self.n) {
            if self.get(x) {
                continue;
            }
            for i in 0..self.n {
                if x >> i & 1 == 0 && self.get(x | (1 << i)) {
                    return false;
                }
            }
        }
        true
    }

    /// All monotone increasing functions on n <= 4 bits, by filtering.
    pub fn all_monotone_increasing(n: u32) -> Vec<TruthTable> {
        assert!(n <= 4, "exhaustive monotone enumeration limited to n <= 4");
        let size = 1u64 << (1 << n);
        (0..size)
            .filter_map(|w| {
                let t = TruthTable::from_fn(n, |x| (w >> x) & 1 == 1).unwrap();
                t.is_monotone_increasing().then_some(t)
            })
            .collect()
    }

    /// F2 multilinear coefficient vector.
    pub fn anf(&self) -> Anf {
        let mut bits = self.bits.clone();
        moebius_in_place(bits.words_mut(), self.n);
        Anf { n: self.n, coeffs: bits }
    }
}

/// The multilinear F2 polynomial of a Boolean function: coefficient of the
/// monomial Π_{i in S} x_i sits at index S.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anf {
    n: u32,
    coeffs: BitVec,
}

impl Anf {
    pub fn arity(&self) -> u32 {
        self.n
    }

    pub fn coeff(&self, set: u64) -> bool {
        self.coeffs.get(set)
    }

    pub fn set_coeff(&mut self, set: u64, v: bool) {
        self.coeffs.set(set, v);
    }

    pub fn from_coeffs(n: u32, sets: &[u64]) -> Result<Self> {
        if n == 0 || n > MAX_ARITY {
            return Err(Error::Parameter(format!("bad arity {n}")));
        }
        let mut coeffs = BitVec::zeros(1 << n);
        for &s in sets {
            coeffs.set(s, true);
        }
        Ok(Anf { n, coeffs })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.count_ones() == 0
    }

    /// Max |S| over nonzero coefficients; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        let mut deg = 0;
        for (wi, &word) in self.coeffs.words().iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let b = w.trailing_zeros();
                let set = (wi as u64) * 64 + b as u64;
                deg = deg.max(set.count_ones());
                w &= w - 1;
            }
        }
        deg
    }

    /// Back to the truth table (the transform is an involution).
    pub fn truth_table(&self) -> TruthTable {
        let mut bits = self.coeffs.clone();
        moebius_in_place(bits.words_mut(), self.n);
        TruthTable { n: self.n, bits }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn xor_anf_is_linear() {
        let anf = TruthTable::xor_all(2).anf();
        assert!(anf.coeff(0b01) && anf.coeff(0b10));
        assert!(!anf.coeff(0b11) && !anf.coeff(0b00));
        assert_eq!(anf.degree(), 1);
    }

    #[test]
    fn and_anf_is_top_monomial() {
        for n in 1..=5 {
            let anf = TruthTable::and_all(n).anf();
            assert_eq!(anf.degree(), n);
            assert!(anf.coeff((1 << n) - 1));
            assert_eq!(anf.coeffs.count_ones(), 1);
        }
    }

    #[test]
    fn majority3_anf() {
        // x1x2 + x1x3 + x2x3, degree 2.
        let anf = TruthTable::majority(3).anf();
        assert!(anf.coeff(0b011) && anf.coeff(0b101) && anf.coeff(0b110));
        assert_eq!(anf.coeffs.count_ones(), 3);
        assert_eq!(anf.degree(), 2);
    }

    #[test]
    fn moebius_involution_exhaustive_small() {
        for n in 1..=4u32 {
            for w in 0..(1u64 << (1 << n)) {
                let t = TruthTable::from_fn(n, |x| (w >> x) & 1 == 1).unwrap();
                assert_eq!(t.anf().truth_table(), t);
            }
        }
    }

    #[test]
    fn moebius_involution_random_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..10_000 {
            let n = rng.random_range(1..=16u32);
            let mut t = TruthTable::new(n).unwrap();
            for w in t.bits.words_mut() {
                *w = rng.random::<u64>();
            }
            t.bits.mask_tail();
            assert_eq!(t.anf().truth_table(), t, "trial {trial} n {n}");
        }
    }

    #[test]
    fn product_degree_subadditive_exhaustive() {
        // deg(f*g as functions) <= deg f + deg g for all f, g on 3 bits.
        for fw in 0..256u64 {
            let f = TruthTable::from_word(3, fw).unwrap();
            let df = f.anf().degree();
            for gw in 0..256u64 {
                let g = TruthTable::from_word(3, gw).unwrap();
                let prod = TruthTable::from_fn(3, |x| f.get(x) && g.get(x)).unwrap();
                let dp = prod.anf().degree();
                let bound = (df + g.anf().degree()).min(3);
                if prod.count_ones() > 0 {
                    assert!(dp <= bound, "f={fw:8b} g={gw:08b}");
                }
            }
        }
    }

    #[test]
    fn monotonicity_predicates() {
        assert!(TruthTable::majority(3).is_monotone_increasing());
        assert!(!TruthTable::xor_all(3).is_monotone_increasing());
        let mut m = TruthTable::majority(3);
        m.complement();
        assert!(m.is_monotone_decreasing());
        assert_eq!(TruthTable::all_monotone_increasing(3).len(), 20);
    }

    #[test]
    fn census_counts_by_weight() {
        let t = TruthTable::majority(3);
        assert_eq!(t.weight_census(), vec![0, 0, 3, 1]);
    }
}

//! Arithmetic in GF(2^q) and Lagrange interpolation over it.
//!
//! Elements are bitmasks: bit i holds the coefficient of x^i, so addition is
//! XOR and multiplication is carryless shift-XOR followed by reduction modulo
//! an irreducible degree-q polynomial. Fields are constructed with the
//! lexicographically smallest irreducible modulus so that independent runs
//! agree element-for-element.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// An element of GF(2^q): an F2 polynomial of degree < q, as a bitmask.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub struct FieldElem(pub u64);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);
}

/// GF(2^q) fixed by an irreducible modulus of degree exactly q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FieldSpecRaw")]
pub struct FieldSpec {
    q: u32,
    modulus: u64,
}

#[derive(Deserialize)]
struct FieldSpecRaw {
    q: u32,
    modulus: u64,
}

impl TryFrom<FieldSpecRaw> for FieldSpec {
    type Error = Error;
    fn try_from(raw: FieldSpecRaw) -> Result<FieldSpec> {
        FieldSpec::new(raw.q, raw.modulus)
    }
}

fn poly_degree(p: u64) -> u32 {
    debug_assert!(p != 0);
    63 - p.leading_zeros()
}

fn poly_rem(mut a: u64, b: u64) -> u64 {
    let db = poly_degree(b);
    while a != 0 {
        let da = poly_degree(a);
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Carryless product of two F2 polynomials (degrees must sum below 64).
fn clmul(a: u64, b: u64) -> u64 {
    let mut acc = 0u64;
    let mut a = a;
    let mut i = 0;
    while a != 0 {
        if a & 1 == 1 {
            acc ^= b << i;
        }
        a >>= 1;
        i += 1;
    }
    acc
}

/// Trial division by every polynomial of degree 1..=q/2. A degree-q
/// polynomial with no factor of degree at most q/2 is irreducible.
fn is_irreducible(p: u64, q: u32) -> bool {
    for e in 1..=(q / 2) {
        for g in (1u64 << e)..(1u64 << (e + 1)) {
            if poly_rem(p, g) == 0 {
                return false;
            }
        }
    }
    true
}

impl FieldSpec {
    /// Validates degree and irreducibility of the given modulus.
    pub fn new(q: u32, modulus: u64) -> Result<FieldSpec> {
        if q == 0 || q > 32 {
            return Err(Error::Parameter(format!(
                "field degree q must satisfy 1 <= q <= 32, got {q}"
            )));
        }
        if modulus == 0 || poly_degree(modulus) != q {
            return Err(Error::Parameter(format!(
                "modulus {modulus:#b} does not have degree exactly {q}"
            )));
        }
        if !is_irreducible(modulus, q) {
            return Err(Error::Parameter(format!(
                "modulus {modulus:#b} is reducible"
            )));
        }
        Ok(FieldSpec { q, modulus })
    }

    /// The lexicographically smallest (by bitmask) irreducible monic
    /// polynomial of degree q, found by exhaustive trial division.
    pub fn find_irreducible(q: u32) -> Result<FieldSpec> {
        if q == 0 || q > 32 {
            return Err(Error::Parameter(format!(
                "field degree q must satisfy 1 <= q <= 32, got {q}"
            )));
        }
        for p in (1u64 << q)..(1u64 << (q + 1)) {
            if is_irreducible(p, q) {
                return Ok(FieldSpec { q, modulus: p });
            }
        }
        unreachable!("an irreducible polynomial of every degree exists");
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Field size Q = 2^q.
    pub fn size(&self) -> u64 {
        1u64 << self.q
    }

    /// Element from a bitmask; errors if out of range.
    pub fn elem(&self, bits: u64) -> Result<FieldElem> {
        if bits >= self.size() {
            return Err(Error::Parameter(format!(
                "element bits {bits} out of range for GF(2^{})",
                self.q
            )));
        }
        Ok(FieldElem(bits))
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(poly_rem(clmul(a.0, b.0), self.modulus))
    }

    pub fn pow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let mut base = a;
        let mut acc = FieldElem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via a^(2^q - 2); errors on zero.
    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero { q: self.q });
        }
        Ok(self.pow(a, self.size() - 2))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }
}

/// A polynomial over GF(2^q); coeffs[i] multiplies y^i. Leading zeros are
/// permitted so fixed-length storage round-trips.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldPoly {
    pub coeffs: Vec<FieldElem>,
}

impl FieldPoly {
    pub fn constant(c: FieldElem) -> Self {
        FieldPoly { coeffs: vec![c] }
    }

    /// Degree ignoring stored leading zeros; None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| c.0 != 0)
    }

    /// Horner evaluation.
    pub fn evaluate(&self, f: &FieldSpec, x: FieldElem) -> FieldElem {
        let mut acc = FieldElem::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = f.add(f.mul(acc, x), c);
        }
        acc
    }

    fn add_assign_scaled(&mut self, f: &FieldSpec, other: &[FieldElem], scale: FieldElem) {
        if self.coeffs.len() < other.len() {
            self.coeffs.resize(other.len(), FieldElem::ZERO);
        }
        for (i, &c) in other.iter().enumerate() {
            self.coeffs[i] = f.add(self.coeffs[i], f.mul(c, scale));
        }
    }
}

/// Lagrange interpolation: the unique polynomial of degree < |points| through
/// the given points. Abscissae must be pairwise distinct.
pub fn interpolate(f: &FieldSpec, points: &[(FieldElem, FieldElem)]) -> Result<FieldPoly> {
    if points.is_empty() {
        return Err(Error::Parameter("interpolation needs at least one point".into()));
    }
    for (i, (xi, _)) in points.iter().enumerate() {
        for (xj, _) in points.iter().skip(i + 1) {
            if xi == xj {
                return Err(Error::Parameter(format!(
                    "duplicated abscissa {} in interpolation",
                    xi.0
                )));
            }
        }
    }
    let k = points.len();
    let mut result = FieldPoly {
        coeffs: vec![FieldElem::ZERO; k],
    };
    let mut basis = Vec::with_capacity(k);
    for (i, &(xi, yi)) in points.iter().enumerate() {
        // Build numerator Π_{j≠i} (y + x_j) (char 2: subtraction is addition).
        basis.clear();
        basis.push(FieldElem::ONE);
        let mut denom = FieldElem::ONE;
        for (j, &(xj, _)) in points.iter().enumerate() {
            if j == i {
                continue;
            }
            basis.push(FieldElem::ZERO);
            for t in (0..basis.len() - 1).rev() {
                let keep = f.mul(basis[t], xj);
                basis[t + 1] = f.add(basis[t + 1], basis[t]);
                basis[t] = keep;
            }
            denom = f.mul(denom, f.add(xi, xj));
        }
        let scale = f.mul(yi, f.inv(denom)?);
        result.add_assign_scaled(f, &basis, scale);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn smallest_irreducible_low_degrees() {
        assert_eq!(FieldSpec::find_irreducible(1).unwrap().modulus(), 0b10);
        assert_eq!(FieldSpec::find_irreducible(2).unwrap().modulus(), 0b111);
        assert_eq!(FieldSpec::find_irreducible(3).unwrap().modulus(), 0b1011);
    }

    #[test]
    fn rejects_bad_degree() {
        assert!(FieldSpec::find_irreducible(0).is_err());
        assert!(FieldSpec::find_irreducible(33).is_err());
        assert!(FieldSpec::new(2, 0b101).is_err()); // x^2+1 = (x+1)^2
    }

    #[test]
    fn gf4_mul_inv() {
        let f = FieldSpec::find_irreducible(2).unwrap();
        let x = FieldElem(0b10);
        let x1 = FieldElem(0b11);
        // x * (x+1) = x^2 + x = 1 mod x^2+x+1
        assert_eq!(f.mul(x, x1), FieldElem::ONE);
        assert_eq!(f.inv(x).unwrap(), x1);
        assert!(f.inv(FieldElem::ZERO).is_err());
    }

    #[test]
    fn char_two_addition() {
        let f = FieldSpec::find_irreducible(5).unwrap();
        for a in 0..f.size() {
            let a = FieldElem(a);
            assert_eq!(f.add(a, a), FieldElem::ZERO);
        }
    }

    #[test]
    fn field_axioms_randomized() {
        // (ab)c = a(bc), a(b+c) = ab+ac over >= 1e4 triples per field.
        for q in 1..=8 {
            let f = FieldSpec::find_irreducible(q).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + q as u64);
            for _ in 0..10_000 {
                let a = FieldElem(rng.random_range(0..f.size()));
                let b = FieldElem(rng.random_range(0..f.size()));
                let c = FieldElem(rng.random_range(0..f.size()));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(
                    f.mul(a, f.add(b, c)),
                    f.add(f.mul(a, b), f.mul(a, c))
                );
            }
        }
    }

    #[test]
    fn fermat_exhaustive() {
        for q in 1..=8 {
            let f = FieldSpec::find_irreducible(q).unwrap();
            for a in 1..f.size() {
                assert_eq!(f.pow(FieldElem(a), f.size() - 1), FieldElem::ONE);
            }
        }
    }

    #[test]
    fn interpolate_identity_line() {
        let f = FieldSpec::find_irreducible(2).unwrap();
        let p = interpolate(
            &f,
            &[(FieldElem::ZERO, FieldElem::ZERO), (FieldElem::ONE, FieldElem::ONE)],
        )
        .unwrap();
        for v in 0..4 {
            assert_eq!(p.evaluate(&f, FieldElem(v)), FieldElem(v));
        }
    }

    #[test]
    fn interpolate_single_point_constant() {
        let f = FieldSpec::find_irreducible(3).unwrap();
        let p = interpolate(&f, &[(FieldElem(5), FieldElem(3))]).unwrap();
        assert_eq!(p.coeffs, vec![FieldElem(3)]);
        assert_eq!(p.evaluate(&f, FieldElem(7)), FieldElem(3));
    }

    #[test]
    fn interpolate_slope_x_over_gf4() {
        // Through (0,0) and (1,x): slope (x-0)/(1-0) = x, so P(y) = x*y.
        let f = FieldSpec::find_irreducible(2).unwrap();
        let x = FieldElem(0b10);
        let p = interpolate(&f, &[(FieldElem::ZERO, FieldElem::ZERO), (FieldElem::ONE, x)]).unwrap();
        for v in 0..4 {
            assert_eq!(p.evaluate(&f, FieldElem(v)), f.mul(x, FieldElem(v)));
        }
    }

    #[test]
    fn interpolate_rejects_duplicates() {
        let f = FieldSpec::find_irreducible(2).unwrap();
        let err = interpolate(
            &f,
            &[(FieldElem::ONE, FieldElem::ZERO), (FieldElem::ONE, FieldElem::ONE)],
        );
        assert!(err.is_err());
    }

    #[test]
    fn interpolation_roundtrip_exhaustive() {
        // Every point set of size <= 3 over GF(2^q), q <= 3, is reproduced.
        for q in 1..=3u32 {
            let f = FieldSpec::find_irreducible(q).unwrap();
            let n = f.size();
            let mut rng = ChaCha8Rng::seed_from_u64(7 + q as u64);
            for k in 1..=3usize.min(n as usize) {
                // All abscissa subsets; values sampled (exhaustive values for q<=2).
                let mut xs = vec![0u64; k];
                enumerate_subsets(n, k, &mut xs, 0, 0, &mut |xs| {
                    let trials = if q <= 2 { (n as usize).pow(k as u32) } else { 32 };
                    for t in 0..trials {
                        let points: Vec<_> = xs
                            .iter()
                            .enumerate()
                            .map(|(i, &x)| {
                                let y = if q <= 2 {
                                    (t / (n as usize).pow(i as u32)) as u64 % n
                                } else {
                                    rng.random_range(0..n)
                                };
                                (FieldElem(x), FieldElem(y))
                            })
                            .collect();
                        let p = interpolate(&f, &points).unwrap();
                        for &(x, y) in &points {
                            assert_eq!(p.evaluate(&f, x), y);
                        }
                        assert!(p.degree().map_or(0, |d| d) < k.max(1));
                    }
                });
            }
        }
    }

    fn enumerate_subsets(
        n: u64,
        k: usize,
        buf: &mut Vec<u64>,
        depth: usize,
        start: u64,
        f: &mut impl FnMut(&Vec<u64>),
    ) {
        if depth == k {
            f(buf);
            return;
        }
        for v in start..n {
            buf[depth] = v;
            enumerate_subsets(n, k, buf, depth + 1, v + 1, f);
        }
    }

    #[test]
    fn distinct_low_degree_polys_rarely_agree() {
        // Distinct polynomials of degree <= l-1 agree on at most l-1 abscissae.
        for q in 1..=3u32 {
            let f = FieldSpec::find_irreducible(q).unwrap();
            let n = f.size();
            for l in 1..=3u32 {
                let total = n.pow(l);
                for a in 0..total {
                    for b in (a + 1)..total {
                        let pa = decode_poly(a, n, l);
                        let pb = decode_poly(b, n, l);
                        let agree = (0..n)
                            .filter(|&v| {
                                pa.evaluate(&f, FieldElem(v)) == pb.evaluate(&f, FieldElem(v))
                            })
                            .count() as u32;
                        assert!(agree <= l - 1, "q={q} l={l} a={a} b={b} agree={agree}");
                    }
                }
            }
        }
    }

    fn decode_poly(mut idx: u64, n: u64, l: u32) -> FieldPoly {
        let mut coeffs = Vec::new();
        for _ in 0..l {
            coeffs.push(FieldElem(idx % n));
            idx /= n;
        }
        FieldPoly { coeffs }
    }
}

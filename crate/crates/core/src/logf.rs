//! Log-domain numerics: stable sums of huge/tiny positive quantities,
//! binomial coefficients and tails, and big-integer helpers.

use num_bigint::BigUint;

/// Snap x to a nearby integer (relative 1e-9) before applying ceil, so
/// mathematically-integer inputs survive float rounding.
pub fn ceil_snapped(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// ln(e^a + e^b), tolerating -inf on either side.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// ln(1 - e^l) for l <= 0 (probability complement in log domain).
pub fn ln_one_minus_exp(l: f64) -> f64 {
    if l == f64::NEG_INFINITY {
        return 0.0;
    }
    debug_assert!(l <= 0.0);
    if l > -f64::EPSILON {
        return f64::NEG_INFINITY;
    }
    // For small |l|, 1-e^l ~ -l; ln_1p on -e^l is accurate for l away from 0.
    if l < -0.693 {
        (-l.exp()).ln_1p()
    } else {
        (-l.exp_m1()).ln()
    }
}

/// ln(-ln(1-p)) given ln p. Used for (1-p)^f in log domain:
/// f * ln(1-p) = -exp(ln f + ln(-ln(1-p))).
pub fn ln_neg_ln_one_minus(ln_p: f64) -> f64 {
    if ln_p == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if ln_p >= 0.0 {
        return f64::INFINITY; // p = 1: -ln(0) = inf
    }
    if ln_p < -37.0 {
        // -ln(1-p) = p(1 + p/2 + p^2/3 + ...); the correction is below f64
        // resolution but ln_1p keeps it exact where representable.
        ln_p + (ln_p.exp() / 2.0).ln_1p()
    } else {
        let p = ln_p.exp();
        (-(-p).ln_1p()).ln()
    }
}

/// Neumaier-compensated accumulator for sums of f64 terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Cumulative table of ln(k!) for k = 0..=n.
pub struct LnFact {
    table: Vec<f64>,
}

impl LnFact {
    pub fn new(n: u64) -> Self {
        let mut table = Vec::with_capacity(n as usize + 1);
        table.push(0.0);
        let mut acc = CompensatedSum::new();
        for k in 1..=n {
            acc.add((k as f64).ln());
            table.push(acc.value());
        }
        LnFact { table }
    }

    #[inline]
    pub fn ln_factorial(&self, k: u64) -> f64 {
        self.table[k as usize]
    }

    /// ln C(n, k); -inf outside 0 <= k <= n.
    #[inline]
    pub fn ln_binom(&self, n: u64, k: u64) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.table[n as usize] - self.table[k as usize] - self.table[(n - k) as usize]
    }

    /// ln Σ_{j=0..=r} C(n, j).
    pub fn ln_binom_cumulative(&self, n: u64, r: u64) -> f64 {
        let r = r.min(n);
        let mut acc = f64::NEG_INFINITY;
        for j in 0..=r {
            acc = ln_add_exp(acc, self.ln_binom(n, j));
        }
        acc
    }

    /// ln of the Binomial(n, p) pmf at k, handling p in {0, 1} exactly.
    pub fn ln_binom_pmf(&self, n: u64, k: u64, p: f64) -> f64 {
        if p <= 0.0 {
            return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
        }
        if p >= 1.0 {
            return if k == n { 0.0 } else { f64::NEG_INFINITY };
        }
        self.ln_binom(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()
    }
}

/// Exact upper tail Pr[Binomial(n, p) >= k].
pub fn binomial_tail_geq(n: u64, k: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let lf = LnFact::new(n);
    // Sum the smaller side for accuracy.
    let mut acc = CompensatedSum::new();
    if (n - k + 1) <= k {
        for j in k..=n {
            acc.add(lf.ln_binom_pmf(n, j, p).exp());
        }
        acc.value().clamp(0.0, 1.0)
    } else {
        for j in 0..k {
            acc.add(lf.ln_binom_pmf(n, j, p).exp());
        }
        (1.0 - acc.value()).clamp(0.0, 1.0)
    }
}

/// Exact cumulative binomial coefficient Σ_{j=0..=r} C(n, j) as a big integer.
pub fn binom_cumulative_exact(n: u64, r: u64) -> BigUint {
    let r = r.min(n);
    let mut acc = BigUint::from(0u32);
    let mut c = BigUint::from(1u32); // C(n, 0)
    for j in 0..=r {
        acc += &c;
        if j < n {
            c = c * (n - j) / (j + 1);
        }
    }
    acc
}

/// Natural log of a positive big integer, accurate to ~1e-15 relative.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 53 {
        let v: u64 = x.try_into().map(|v: u64| v).unwrap_or(u64::MAX);
        return (v as f64).ln();
    }
    let shift = bits - 53;
    let top: u64 = (x >> shift).try_into().unwrap_or(u64::MAX);
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// ⌈c * 2^e⌉ as a big integer, for c in (0, 2) carrying f64 precision.
pub fn ceil_mul_pow2(c: f64, e: i64) -> BigUint {
    assert!(c > 0.0 && c.is_finite());
    // c = mant * 2^(exp2) with mant a 53-bit integer.
    let bits = c.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = if raw_exp == 0 {
        bits & ((1u64 << 52) - 1)
    } else {
        (bits & ((1u64 << 52) - 1)) | (1u64 << 52)
    };
    let exp2 = raw_exp - 1075 + i64::from(raw_exp == 0); // value = mant * 2^exp2
    let shift = e + exp2;
    let m = BigUint::from(mant);
    if shift >= 0 {
        m << (shift as u64)
    } else {
        let s = (-shift) as u64;
        let floor = &m >> s;
        let rem = &m - (&floor << s);
        if rem == BigUint::from(0u32) {
            floor
        } else {
            floor + 1u32
        }
    }
}

/// ⌈exp(x)⌉ for non-negative x, as a big integer (f64-precision mantissa,
/// exact binary exponent).
pub fn big_exp_ceil(x: f64) -> BigUint {
    assert!(x >= 0.0 && x.is_finite());
    let z = x / std::f64::consts::LN_2; // exp(x) = 2^z
    let k = z.floor();
    let frac = (z - k) * std::f64::consts::LN_2;
    ceil_mul_pow2(frac.exp(), k as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_add_exp_basic() {
        let v = ln_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY);
        assert!(v.is_infinite() && v < 0.0);
        assert!((ln_add_exp(0.0, 0.0) - 2.0_f64.ln()).abs() < 1e-15);
        let w = ln_add_exp(-1000.0, -1001.0);
        assert!((w - (-1000.0 + (1.0 + (-1.0f64).exp()).ln())).abs() < 1e-12);
    }

    #[test]
    fn one_minus_exp_roundtrip() {
        for &p in &[1e-12, 1e-6, 0.1, 0.5, 0.9, 0.999999] {
            let l = (p as f64).ln();
            let got = ln_one_minus_exp(l).exp();
            assert!((got - (1.0 - p)).abs() < 1e-14, "p={p}");
        }
    }

    #[test]
    fn neg_ln_one_minus_matches_direct() {
        for &p in &[1e-300, 1e-20, 1e-10, 1e-3, 0.1, 0.5, 0.99] {
            let got = ln_neg_ln_one_minus((p as f64).ln()).exp();
            let want = -(1.0 - p).ln();
            assert!(
                (got - want).abs() <= 1e-12 * want.max(p),
                "p={p} got={got} want={want}"
            );
        }
    }

    #[test]
    fn binom_tables_agree_with_exact() {
        let lf = LnFact::new(40);
        assert!((lf.ln_binom(10, 3).exp() - 120.0).abs() < 1e-9);
        let exact = binom_cumulative_exact(40, 17);
        let approx = lf.ln_binom_cumulative(40, 17);
        assert!((approx - ln_biguint(&exact)).abs() < 1e-12);
    }

    #[test]
    fn tail_matches_direct_sum() {
        let p = 0.3;
        let n = 25;
        for k in [0, 1, 7, 13, 25, 26] {
            let mut direct = 0.0;
            let lf = LnFact::new(n);
            for j in 0..=n {
                if j >= k {
                    direct += lf.ln_binom_pmf(n, j, p).exp();
                }
            }
            assert!((binomial_tail_geq(n, k, p) - direct).abs() < 1e-13);
        }
        assert_eq!(binomial_tail_geq(5, 0, 0.0), 1.0);
        assert_eq!(binomial_tail_geq(5, 1, 0.0), 0.0);
        assert_eq!(binomial_tail_geq(5, 5, 1.0), 1.0);
    }

    #[test]
    fn big_exp_ceil_small_values() {
        assert_eq!(big_exp_ceil(0.0), BigUint::from(1u32));
        assert_eq!(big_exp_ceil(1.0), BigUint::from(3u32)); // ceil(e)
        assert_eq!(big_exp_ceil(5.0), BigUint::from(149u32)); // ceil(148.41..)
        // Large: ln of the result returns the exponent.
        let x = 750.0;
        let v = big_exp_ceil(x);
        assert!((ln_biguint(&v) - x).abs() < 1e-9);
    }

    #[test]
    fn compensated_sum_tiny_plus_huge() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..10 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 10.0);
    }
}

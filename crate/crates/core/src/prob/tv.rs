//! Exact total-variation distance between the two coin distributions,
//! via the Hamming-weight marginal in log domain.

use crate::error::{Error, Result};
use crate::logf::{CompensatedSum, LnFact};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TvReport {
    pub delta_prime: f64,
    pub n_prime: u64,
    pub tv: f64,
    /// sqrt(N') * delta', for ratio reporting.
    pub bound: f64,
    /// tv / bound (0 when the bound is 0).
    pub ratio: f64,
}

/// TV(D_{(1-d')/2}^N, D_{(1+d')/2}^N)
///   = 1/2 Σ_w C(N,w) |p1^w q1^(N-w) - p2^w q2^(N-w)|.
pub fn tv_distance(delta_prime: f64, n_prime: u64) -> Result<TvReport> {
    if !(0.0..=1.0).contains(&delta_prime) {
        return Err(Error::Parameter(format!(
            "delta' must be in [0,1], got {delta_prime}"
        )));
    }
    if n_prime == 0 || n_prime > 1_000_000 {
        return Err(Error::Parameter(format!(
            "1 <= N' <= 1e6 required, got {n_prime}"
        )));
    }
    let p1 = (1.0 - delta_prime) / 2.0;
    let p2 = (1.0 + delta_prime) / 2.0;
    let lf = LnFact::new(n_prime);
    let mut acc = CompensatedSum::new();
    for w in 0..=n_prime {
        let a = lf.ln_binom_pmf(n_prime, w, p1);
        let b = lf.ln_binom_pmf(n_prime, w, p2);
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        if hi == f64::NEG_INFINITY {
            continue;
        }
        // |e^a - e^b| = e^hi * (1 - e^(lo-hi))
        acc.add(hi.exp() * (-(lo - hi).exp_m1()));
    }
    let tv = (acc.value() / 2.0).clamp(0.0, 1.0);
    let bound = (n_prime as f64).sqrt() * delta_prime;
    Ok(TvReport {
        delta_prime,
        n_prime,
        tv,
        bound,
        ratio: if bound > 0.0 { tv / bound } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bit() {
        let r = tv_distance(0.5, 1).unwrap();
        assert!((r.tv - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identical_distributions() {
        let r = tv_distance(0.0, 100).unwrap();
        assert_eq!(r.tv, 0.0);
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn disjoint_supports() {
        for n in [1, 2, 17] {
            let r = tv_distance(1.0, n).unwrap();
            assert!((r.tv - 1.0).abs() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn matches_direct_sum_small() {
        let (dp, n) = (0.3, 6u64);
        let p1 = (1.0 - dp) / 2.0;
        let p2 = (1.0 + dp) / 2.0;
        let mut direct = 0.0;
        for x in 0u64..(1 << n) {
            let w = x.count_ones() as i32;
            let a = p1.powi(w) * (1.0 - p1).powi(n as i32 - w);
            let b = p2.powi(w) * (1.0 - p2).powi(n as i32 - w);
            direct += (a - b).abs();
        }
        direct /= 2.0;
        let r = tv_distance(dp, n).unwrap();
        assert!((r.tv - direct).abs() < 1e-13);
    }

    #[test]
    fn monotone_in_n() {
        let a = tv_distance(0.1, 10).unwrap().tv;
        let b = tv_distance(0.1, 100).unwrap().tv;
        let c = tv_distance(0.1, 1000).unwrap().tv;
        assert!(a < b && b < c && c <= 1.0);
    }
}

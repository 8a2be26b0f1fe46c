//! Error reduction by majority vote over independent blocks.
//!
//! A distinguisher with error (1/2 - eta) wrapped in Maj_t over t
//! independent copies fails with probability at most exp(-2*t*eta^2)
//! (two-sided Hoeffding), so t = ceil(ln(1/eps)/(2*eta^2)) suffices;
//! t is rounded up to odd to avoid ties.

use crate::error::{Error, Result};
use crate::prob::sample::{bit_threshold, rng_for, sample_bit};
use rayon::prelude::*;

/// Smallest odd t with exp(-2*t*eta^2) <= eps.
pub fn error_reduction_t(epsilon: f64, eta_adv: f64) -> Result<u64> {
    if !(0.0..0.5).contains(&epsilon) || epsilon == 0.0 {
        return Err(Error::Parameter(format!(
            "epsilon must be in (0, 1/2), got {epsilon}"
        )));
    }
    if !(0.0..=0.5).contains(&eta_adv) || eta_adv == 0.0 {
        return Err(Error::Parameter(format!(
            "eta must be in (0, 1/2], got {eta_adv}"
        )));
    }
    let raw = (1.0 / epsilon).ln() / (2.0 * eta_adv * eta_adv);
    let mut t = raw.ceil() as u64;
    t = t.max(1);
    if t % 2 == 0 {
        t += 1;
    }
    Ok(t)
}

/// Fraction of seeded runs in which a majority of t Bernoulli(p_block)
/// draws fails to come up true.
pub fn simulate_majority_failure(t: u64, p_block: f64, runs: u64, seed: u64) -> f64 {
    let threshold = bit_threshold(p_block);
    let batch = 64u64;
    let batches = runs.div_ceil(batch);
    let failures: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_for(seed, b);
            let lo = b * batch;
            let hi = (lo + batch).min(runs);
            let mut fails = 0u64;
            for _ in lo..hi {
                let successes = (0..t).filter(|_| sample_bit(&mut rng, threshold)).count() as u64;
                if 2 * successes <= t {
                    fails += 1;
                }
            }
            fails
        })
        .sum();
    failures as f64 / runs as f64
}

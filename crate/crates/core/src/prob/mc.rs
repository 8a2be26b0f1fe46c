//! Seeded parallel Monte Carlo estimation of acceptance probabilities.
//!
//! Trials are grouped into fixed-size batches; batch i draws from stream i
//! of the master seed. Batch results merge by integer summation, so the
//! estimate is byte-identical regardless of worker count.

use crate::error::{Error, Result};
use crate::formula::{FormulaSpec, DEFAULT_GATE_CAP};
use crate::prob::sample::{bit_threshold, rng_for, sample_bit};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const BATCH: u64 = 64;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    /// Two-sided 99% Hoeffding half-width: sqrt(ln(2/0.01)/(2*trials)).
    pub ci99: f64,
    pub trials: u64,
    pub successes: u64,
}

/// Estimate Pr[F = 1] under the bit-bias-alpha product distribution.
///
/// Read-once formulas are evaluated against a lazy sample oracle (each leaf
/// draws a fresh bit, short-circuiting skips the rest); shared-variable
/// formulas materialize the n-bit assignment per trial.
pub fn mc_estimate(spec: &FormulaSpec, alpha: f64, trials: u64, seed: u64) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::Parameter("trials >= 1 required".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must be in [0,1], got {alpha}")));
    }
    if !spec.is_evaluable(DEFAULT_GATE_CAP) {
        return Err(Error::Infeasible(
            "formula exceeds the evaluation cap; only analytic paths apply".into(),
        ));
    }
    let threshold = bit_threshold(alpha);
    let successes: u64 = if spec.is_read_once() {
        let fanins: Vec<u64> = (1..=spec.d).map(|l| spec.fanin_u64(l)).collect::<Result<_>>()?;
        let batches = trials.div_ceil(BATCH);
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = rng_for(seed, b);
                let lo = b * BATCH;
                let hi = (lo + BATCH).min(trials);
                let mut hits = 0u64;
                for _ in lo..hi {
                    if eval_sampling(&fanins, spec.d, &mut rng, threshold) {
                        hits += 1;
                    }
                }
                hits
            })
            .sum()
    } else {
        let cf = spec.compile(DEFAULT_GATE_CAP)?;
        let n = spec.variable_count_u64()?;
        let batches = trials.div_ceil(BATCH);
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = rng_for(seed, b);
                let lo = b * BATCH;
                let hi = (lo + BATCH).min(trials);
                let mut hits = 0u64;
                for _ in lo..hi {
                    let mut bits = crate::bits::BitVec::zeros(n);
                    for i in 0..n {
                        if sample_bit(&mut rng, threshold) {
                            bits.set(i, true);
                        }
                    }
                    if cf.eval_bits(&bits) {
                        hits += 1;
                    }
                }
                hits
            })
            .sum()
    };
    let ci99 = ((2.0f64 / 0.01).ln() / (2.0 * trials as f64)).sqrt();
    Ok(McEstimate {
        p_hat: successes as f64 / trials as f64,
        ci99,
        trials,
        successes,
    })
}

/// Evaluate a read-once alternating formula by sampling leaf bits on demand.
/// Every leaf is visited at most once, so on-demand draws agree with a full
/// assignment draw in distribution.
fn eval_sampling(fanins: &[u64], level: u32, rng: &mut ChaCha8Rng, threshold: u64) -> bool {
    if level == 0 {
        return sample_bit(rng, threshold);
    }
    let is_and = level % 2 == 1;
    let f = fanins[(level - 1) as usize];
    let mut result = is_and;
    for _ in 0..f {
        let v = eval_sampling(fanins, level - 1, rng, threshold);
        if is_and && !v {
            result = false;
            break;
        }
        if !is_and && v {
            result = true;
            break;
        }
    }
    result
}

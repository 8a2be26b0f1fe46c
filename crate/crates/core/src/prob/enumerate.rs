//! Exact acceptance probability by full enumeration over all assignments.
//!
//! The enumeration counts accepted inputs per Hamming weight (exact integer
//! counts), then folds the weight classes against the product distribution.
//! This is the shared-variable oracle: it makes no independence assumptions.

use crate::error::{Error, Result};
use crate::formula::FormulaSpec;
use crate::logf::CompensatedSum;
use rayon::prelude::*;

/// Hard arity limit for the 2^n enumeration.
pub const ENUM_LIMIT: u32 = 24;

/// Count accepted assignments per Hamming weight: a_w for w = 0..=n.
pub fn acceptance_census(spec: &FormulaSpec) -> Result<Vec<u64>> {
    let n = spec.variable_count_u64()?;
    if n > ENUM_LIMIT as u64 {
        return Err(Error::Infeasible(format!(
            "exact enumeration requires n <= {ENUM_LIMIT}, got {n}"
        )));
    }
    let cf = spec.compile(1 << 30)?;
    let n = n as u32;
    let total: u64 = 1 << n;
    let chunk: u64 = 1 << 16;
    let chunks = total.div_ceil(chunk);
    let census = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; n as usize + 1];
            let start = c * chunk;
            let end = (start + chunk).min(total);
            for x in start..end {
                if cf.eval_mask(x) {
                    counts[x.count_ones() as usize] += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; n as usize + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(census)
}

/// Σ_w a_w alpha^w (1-alpha)^(n-w) with compensated summation.
pub fn census_prob(census: &[u64], alpha: f64) -> f64 {
    let n = census.len() - 1;
    let mut acc = CompensatedSum::new();
    for (w, &a) in census.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let term = a as f64 * alpha.powi(w as i32) * (1.0 - alpha).powi((n - w) as i32);
        acc.add(term);
    }
    acc.value().clamp(0.0, 1.0)
}

/// Exact Pr[F(x) = 1] under the product distribution with bit bias alpha.
pub fn enumerate_prob(spec: &FormulaSpec, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must be in [0,1], got {alpha}")));
    }
    Ok(census_prob(&acceptance_census(spec)?, alpha))
}

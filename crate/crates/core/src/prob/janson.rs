//! Two-sided product bounds for ORs of correlated monotone children, and
//! the pairwise correlation term Δ computed exactly.
//!
//! For monotone children C_1..C_M of an OR under a product distribution,
//!   Π Pr[C_i = 0]  <=  Pr[all reject]  <=  Π Pr[C_i = 0] * exp(2Δ),
//! where Δ sums Pr[C_i = 1 and C_j = 1] over variable-sharing pairs i < j.
//! The lower half needs only positive correlation; the upper half assumes
//! max_i Pr[C_i = 1] <= 1/2.

use crate::error::{Error, Result};
use crate::formula::{FormulaKind, FormulaSpec};
use crate::logf::CompensatedSum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JansonBound {
    pub product_lower: f64,
    pub product_lower_ln: f64,
    pub delta_term: f64,
    pub upper: f64,
    pub upper_ln: f64,
    /// max_i Pr[C_i = 1] <= 1/2 held for the supplied probabilities.
    pub hypothesis_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

/// The sandwich (Π q_i, Π q_i * e^{2Δ}) from child rejection probabilities.
/// If some child fires with probability above 1/2 the bounds are still
/// computed but a warning is attached.
pub fn janson_bounds(child_zero_probs: &[f64], delta: f64) -> Result<JansonBound> {
    if child_zero_probs.iter().any(|q| !(0.0..=1.0).contains(q)) {
        return Err(Error::Parameter("child probabilities must be in [0,1]".into()));
    }
    if delta < 0.0 {
        return Err(Error::Parameter(format!("Delta must be >= 0, got {delta}")));
    }
    let mut ln_prod = CompensatedSum::new();
    for &q in child_zero_probs {
        ln_prod.add(q.ln());
    }
    let product_lower_ln = ln_prod.value();
    let upper_ln = product_lower_ln + 2.0 * delta;
    let hypothesis_ok = child_zero_probs.iter().all(|&q| q >= 0.5);
    Ok(JansonBound {
        product_lower: product_lower_ln.exp(),
        product_lower_ln,
        delta_term: delta,
        upper: upper_ln.exp().min(1.0),
        upper_ln,
        hypothesis_ok,
        warning: (!hypothesis_ok)
            .then(|| "some child fires with probability > 1/2; upper bound unsupported".into()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaMode {
    ClosedForm,
    Enumerate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaReport {
    pub mode: DeltaMode,
    pub level: u32,
    pub alpha: f64,
    pub delta: f64,
    /// The schedule bound 4 * eta * p_1^2 * f^2 for comparison, when the
    /// level design records eta.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schedule_bound: Option<f64>,
    /// Intersection census used by the closed form.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub census: Option<Vec<u64>>,
}

/// Exact pairwise correlation term for the first depth-`level` subformula.
///
/// Closed form (level 2 only): the children are ANDs of m variables, a pair
/// sharing r variables fires jointly with probability alpha^(2m-r), so
/// Δ = Σ_r c_r * p_1^2 / alpha^r with c_r from the design census.
///
/// Enumerate: for each variable-sharing pair of children, sum the exact
/// joint probability by enumerating assignments of the union of their
/// variables (union size <= 24 required).
pub fn delta_compute(
    spec: &FormulaSpec,
    level: u32,
    alpha: f64,
    mode: DeltaMode,
) -> Result<DeltaReport> {
    if level < 2 || level > spec.d {
        return Err(Error::Parameter(format!(
            "level must be in [2, d]: got {level}, d = {}",
            spec.d
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must be in [0,1], got {alpha}")));
    }
    match mode {
        DeltaMode::ClosedForm => {
            if level != 2 {
                return Err(Error::Infeasible(
                    "closed form applies at level 2 (children are ANDs)".into(),
                ));
            }
            let f2 = spec.fanin_u64(2)?;
            let m = spec.m;
            let (census, eta) = match spec.kind {
                FormulaKind::Derand => {
                    let ld = &spec.designs[0];
                    (ld.design.intersection_census(f2)?, Some(ld.design.params.eta_int))
                }
                // Read-once children are variable-disjoint.
                _ => (vec![f2 * (f2 - 1) / 2], None),
            };
            let p1 = alpha.powi(m as i32);
            let mut acc = CompensatedSum::new();
            for (r, &c) in census.iter().enumerate().skip(1) {
                if c > 0 {
                    acc.add(c as f64 * alpha.powi(2 * m as i32 - r as i32));
                }
            }
            let delta = acc.value();
            Ok(DeltaReport {
                mode,
                level,
                alpha,
                delta,
                schedule_bound: eta.map(|e| 4.0 * e * p1 * p1 * (f2 as f64) * (f2 as f64)),
                census: Some(census),
            })
        }
        DeltaMode::Enumerate => {
            let cf = spec.compile(1 << 30)?;
            let f = spec.fanin_u64(level)?;
            // Children of the first depth-`level` node are the first f
            // depth-(level-1) siblings.
            let beta = level % 2;
            let target = beta == 0; // children take value 1 - beta
            let vars: Vec<Vec<u64>> = (0..f)
                .map(|j| cf.subformula_vars(level - 1, j))
                .collect();
            let mut acc = CompensatedSum::new();
            for j in 0..f as usize {
                for k in (j + 1)..f as usize {
                    let shared = intersects(&vars[j], &vars[k]);
                    if !shared {
                        continue;
                    }
                    let mut union = vars[j].clone();
                    union.extend_from_slice(&vars[k]);
                    union.sort_unstable();
                    union.dedup();
                    if union.len() > 24 {
                        return Err(Error::Infeasible(format!(
                            "pair union has {} variables; enumerate mode needs <= 24",
                            union.len()
                        )));
                    }
                    let u = union.len() as u32;
                    let mut pair = CompensatedSum::new();
                    for assign in 0u64..(1 << u) {
                        let lookup = |v: u64| {
                            let pos = union.binary_search(&v).expect("child var in union");
                            (assign >> pos) & 1 == 1
                        };
                        let vj = cf.eval_subformula_with(level - 1, j as u64, &lookup);
                        let vk = cf.eval_subformula_with(level - 1, k as u64, &lookup);
                        if vj == target && vk == target {
                            let ones = assign.count_ones();
                            pair.add(
                                alpha.powi(ones as i32) * (1.0 - alpha).powi((u - ones) as i32),
                            );
                        }
                    }
                    acc.add(pair.value());
                }
            }
            let schedule_bound = match spec.kind {
                FormulaKind::Derand if level == 2 => {
                    let eta = spec.designs[0].design.params.eta_int;
                    let p1 = alpha.powi(spec.m as i32);
                    Some(4.0 * eta * p1 * p1 * (f as f64) * (f as f64))
                }
                _ => None,
            };
            Ok(DeltaReport {
                mode,
                level,
                alpha,
                delta: acc.value(),
                schedule_bound,
                census: None,
            })
        }
    }
}

fn intersects(a: &[u64], b: &[u64]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

//! Exact acceptance/rejection ladders for read-once formulas, computed in
//! log domain so next-to-top levels with probabilities like exp(-C1*m) stay
//! representable, plus the per-level bracket checks.

use crate::error::{Error, Result};
use crate::formula::{FormulaKind, FormulaSpec};
use crate::logf::{ln_neg_ln_one_minus, ln_one_minus_exp};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// A probability carried as its natural log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogProb {
    pub ln: f64,
}

impl LogProb {
    pub fn from_p(p: f64) -> Self {
        LogProb { ln: p.ln() }
    }

    pub fn from_ln(ln: f64) -> Self {
        LogProb { ln }
    }

    /// Linear value; underflows to 0 below exp(-745).
    pub fn p(&self) -> f64 {
        self.ln.exp()
    }

    pub fn complement(&self) -> LogProb {
        LogProb {
            ln: ln_one_minus_exp(self.ln),
        }
    }
}

/// The per-level aligned probabilities p_i = Pr[F_i = i mod 2] of a
/// read-once formula under a single product distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecurrenceLadder {
    pub alpha: f64,
    pub d: u32,
    /// p_1 .. p_d.
    pub levels: Vec<LogProb>,
}

impl RecurrenceLadder {
    pub fn top_aligned(&self) -> LogProb {
        self.levels[self.d as usize - 1]
    }

    /// Exact Pr[F_d = 1].
    pub fn prob_one(&self) -> LogProb {
        if self.d % 2 == 1 {
            self.top_aligned()
        } else {
            self.top_aligned().complement()
        }
    }

    /// Exact Pr[F_d = 0].
    pub fn prob_zero(&self) -> LogProb {
        if self.d % 2 == 1 {
            self.top_aligned().complement()
        } else {
            self.top_aligned()
        }
    }
}

/// Exact ladder for a read-once spec at bit-probability `alpha`:
/// p_1 = alpha^m and p_i = (1 - p_{i-1})^{f_i}.
pub fn readonce_prob(spec: &FormulaSpec, alpha: f64) -> Result<RecurrenceLadder> {
    if !spec.is_read_once() {
        return Err(Error::Kind(
            "readonce_prob requires a read-once formula (AMANO or OW2, unsubstituted)".into(),
        ));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must be in [0,1], got {alpha}")));
    }
    let mut levels = Vec::with_capacity(spec.d as usize);
    let mut ln_p = spec.m as f64 * alpha.ln(); // AND of f_1 = m fresh bits
    levels.push(LogProb::from_ln(ln_p));
    for lvl in 2..=spec.d {
        let ln_f = spec.ln_fanin(lvl);
        let ln_g = ln_neg_ln_one_minus(ln_p); // ln(-ln(1 - p_{i-1}))
        ln_p = if ln_g == f64::NEG_INFINITY {
            0.0 // p_{i-1} = 0, so (1-0)^f = 1
        } else {
            -(ln_f + ln_g).exp()
        };
        levels.push(LogProb::from_ln(ln_p));
    }
    Ok(RecurrenceLadder {
        alpha,
        d: spec.d,
        levels,
    })
}

/// One row of the two-sided table: aligned-side brackets where defined.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecurrenceRow {
    pub level: u32,
    /// Pr[F_i = i mod 2] under the low-bias coin.
    pub p0: LogProb,
    /// Same under the high-bias coin.
    pub p1: LogProb,
    /// Bracket on the aligned side (distribution index b = i mod 2); for
    /// level d-1 these are the separation bounds exp(-C1*m ± C2) in ln form.
    pub lower_ln: Option<f64>,
    pub upper_ln: Option<f64>,
    pub pass: Option<bool>,
    /// Pr[F_i = i mod 2] <= 1/2 on both sides, i.e. the aligned value is
    /// the smaller of the accept/reject pair.
    pub aligned_is_min: bool,
    /// p_{i-1} * f_i <= 50m on both sides (levels >= 2).
    pub pifi_ok: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecurrenceTable {
    pub d: u32,
    pub m: u32,
    pub delta: f64,
    pub rows: Vec<RecurrenceRow>,
    /// Pr[F_d = 1 | low coin] and Pr[F_d = 0 | high coin].
    pub final_err0: f64,
    pub final_err1: f64,
    /// Both final errors <= 0.05.
    pub final_pass: bool,
    /// exp(-C0), the depth-2 union-bound threshold, when C0 is set. The
    /// nominal error target 0.05 and the fallback 0.1 are both reported so
    /// callers can compare against either.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ow2_union_bound: Option<f64>,
}

/// Run the ladder at both coin biases and attach the per-level brackets
/// (when amplified biases are available) and the final 0.05 check.
pub fn recurrence_table(spec: &FormulaSpec) -> Result<RecurrenceTable> {
    let low = readonce_prob(spec, (1.0 - spec.delta) / 2.0)?;
    let high = readonce_prob(spec, (1.0 + spec.delta) / 2.0)?;
    let m = spec.m as f64;
    let ln_half_m = -m * LN_2; // ln 2^-m
    let mut rows = Vec::with_capacity(spec.d as usize);
    for i in 1..=spec.d {
        let p0 = low.levels[(i - 1) as usize];
        let p1 = high.levels[(i - 1) as usize];
        let beta = i % 2;
        let (aligned, mis) = if beta == 1 { (p1, p0) } else { (p0, p1) };
        let mut lower_ln = None;
        let mut upper_ln = None;
        let mut pass = None;
        if let Some(dp) = &spec.delta_params {
            if i <= spec.d.saturating_sub(2) {
                let di = dp.deltas[(i - 1) as usize];
                let lo = ln_half_m + (di * (-3.0 * di).exp()).ln_1p();
                let hi = ln_half_m + (di * (3.0 * di).exp()).ln_1p();
                let mis_lo = 1.0 - di * (3.0 * di).exp(); // may be negative
                let mis_hi = 1.0 - di * (-3.0 * di).exp();
                let aligned_ok = aligned.ln >= lo && aligned.ln <= hi;
                let mis_ok = mis.p() >= mis_lo * (-m * LN_2).exp()
                    && mis.p() <= mis_hi * (-m * LN_2).exp();
                lower_ln = Some(lo);
                upper_ln = Some(hi);
                pass = Some(aligned_ok && mis_ok);
            } else if i == spec.d - 1 {
                let lo = -dp.c1 * m + dp.c2;
                let hi = -dp.c1 * m - dp.c2;
                lower_ln = Some(lo);
                upper_ln = Some(hi);
                pass = Some(aligned.ln >= lo && mis.ln <= hi);
            }
        }
        let pifi_ok = if i >= 2 {
            let bound = (50.0 * m).ln();
            let prev0 = low.levels[(i - 2) as usize].ln + spec.ln_fanin(i);
            let prev1 = high.levels[(i - 2) as usize].ln + spec.ln_fanin(i);
            Some(prev0 <= bound && prev1 <= bound)
        } else {
            None
        };
        rows.push(RecurrenceRow {
            level: i,
            p0,
            p1,
            lower_ln,
            upper_ln,
            pass,
            aligned_is_min: aligned.ln <= -LN_2 && mis.ln <= -LN_2,
            pifi_ok,
        });
    }
    let final_err0 = low.prob_one().p();
    let final_err1 = high.prob_zero().p();
    Ok(RecurrenceTable {
        d: spec.d,
        m: spec.m,
        delta: spec.delta,
        rows,
        final_err0,
        final_err1,
        final_pass: final_err0 <= 0.05 && final_err1 <= 0.05,
        ow2_union_bound: spec.c0.map(|c0| (-c0).exp()),
    })
}

/// CSV emission: columns (i, p_i_0, p_i_1, lower_bound, upper_bound, pass).
pub fn recurrence_csv(table: &RecurrenceTable) -> String {
    let mut out = String::from("i,p_i_0,p_i_1,lower_bound,upper_bound,pass\n");
    for row in &table.rows {
        let fmt_opt = |v: Option<f64>| v.map(|x| format!("{}", x.exp())).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.level,
            row.p0.p(),
            row.p1.p(),
            fmt_opt(row.lower_ln),
            fmt_opt(row.upper_ln),
            row.pass.map(|p| p.to_string()).unwrap_or_default(),
        ));
    }
    out
}

/// The bias whose depth-d width parameter comes out to exactly m:
/// delta = (1/(m ln 2))^(d-1).
pub fn delta_for_m(m: u32, d: u32) -> f64 {
    (1.0 / (m as f64 * LN_2)).powi(d as i32 - 1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub m: u32,
    pub delta: f64,
    /// delta_1 = m * delta; brackets are only promised for small values.
    pub delta1: f64,
    /// Levels i <= d-2 whose bracket check failed.
    pub violations: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketSweep {
    pub d: u32,
    pub entries: Vec<SweepEntry>,
}

/// Analytic bracket sweep over widths m (no formula is materialized).
pub fn bracket_sweep(d: u32, ms: &[u32]) -> Result<BracketSweep> {
    let mut entries = Vec::new();
    for &m in ms {
        let delta = delta_for_m(m, d);
        let spec = crate::formula::amano_spec(delta, d)?;
        debug_assert_eq!(spec.m, m);
        let table = recurrence_table(&spec)?;
        let violations = table
            .rows
            .iter()
            .filter(|r| r.level <= d - 2 && r.pass == Some(false))
            .map(|r| r.level)
            .collect();
        entries.push(SweepEntry {
            m,
            delta,
            delta1: m as f64 * delta,
            violations,
        });
    }
    Ok(BracketSweep { d, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{amano_spec, ow2_spec, read_once_spec};

    #[test]
    fn single_variable_formula_is_identity() {
        let spec = read_once_spec(&[1, 1], 0.2).unwrap();
        for alpha in [0.0, 0.3, 0.77, 1.0] {
            let ladder = readonce_prob(&spec, alpha).unwrap();
            assert!((ladder.prob_one().p() - alpha).abs() < 1e-15);
        }
    }

    #[test]
    fn depth2_rejection_closed_form() {
        let spec = read_once_spec(&[2, 4], 0.5).unwrap();
        let ladder = readonce_prob(&spec, 0.5).unwrap();
        assert!((ladder.prob_zero().p() - 0.31640625).abs() < 1e-14);
    }

    #[test]
    fn ow2_union_bound_value() {
        // f_2 * p_1^(0) = 2^20 * 0.25^20 = 2^-20.
        let spec = ow2_spec(0.5, 10.0).unwrap();
        assert_eq!(spec.m, 20);
        let ladder = readonce_prob(&spec, 0.25).unwrap();
        let ln_product = ladder.levels[0].ln + spec.ln_fanin(2);
        assert!((ln_product - (-20.0 * LN_2)).abs() < 1e-9);
    }

    #[test]
    fn ow2_final_errors_tiny() {
        let spec = ow2_spec(0.5, 10.0).unwrap();
        let t = recurrence_table(&spec).unwrap();
        assert!(t.final_pass, "errors {} {}", t.final_err0, t.final_err1);
        assert!(t.final_err0 < 1e-5);
        assert!(t.final_err1 < 1e-100);
    }

    #[test]
    fn rejects_non_read_once() {
        let spec = read_once_spec(&[2, 2], 0.1).unwrap();
        let sub = spec.random_substitute(2, 1).unwrap();
        assert!(matches!(
            readonce_prob(&sub, 0.5),
            Err(crate::error::Error::Kind(_))
        ));
    }

    #[test]
    fn amano_brackets_hold_for_small_delta() {
        let spec = amano_spec(1e-4, 3).unwrap();
        let t = recurrence_table(&spec).unwrap();
        for row in &t.rows {
            if row.level <= t.d - 2 {
                assert_eq!(row.pass, Some(true), "level {}", row.level);
            }
        }
        assert!(t.final_pass);
    }

    #[test]
    fn sweep_entries_cover_requested_widths() {
        let sweep = bracket_sweep(3, &[10, 12, 14]).unwrap();
        assert_eq!(sweep.entries.len(), 3);
        for e in &sweep.entries {
            assert!((e.delta1 - e.m as f64 * e.delta).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_shape() {
        let spec = ow2_spec(0.5, 10.0).unwrap();
        let t = recurrence_table(&spec).unwrap();
        let csv = recurrence_csv(&t);
        assert!(csv.starts_with("i,p_i_0,p_i_1,"));
        assert_eq!(csv.lines().count(), 1 + t.rows.len());
    }
}

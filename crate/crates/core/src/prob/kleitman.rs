//! Monotone conditioning check: for monotone F, G under a product
//! distribution, Pr[F=1 | G=0] <= Pr[F=1] <= Pr[F=1 | G=1].

use crate::anf::TruthTable;
use crate::error::{Error, Result};
use crate::logf::CompensatedSum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KleitmanReport {
    pub alpha: f64,
    pub p_f1: f64,
    /// None when the conditioning event has probability 0 (vacuous).
    pub p_f1_given_g0: Option<f64>,
    pub p_f1_given_g1: Option<f64>,
    pub chain_ok: bool,
}

/// Exact probabilities of the conditioning chain for two monotone truth
/// tables on the same variables. Both increasing or both decreasing is
/// accepted; mixed or non-monotone inputs are precondition errors.
pub fn kleitman_check(f: &TruthTable, g: &TruthTable, alpha: f64) -> Result<KleitmanReport> {
    if f.arity() != g.arity() {
        return Err(Error::Parameter(format!(
            "arity mismatch: {} vs {}",
            f.arity(),
            g.arity()
        )));
    }
    let n = f.arity();
    if n > 20 {
        return Err(Error::Infeasible(format!("n <= 20 required, got {n}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must be in [0,1], got {alpha}")));
    }
    let both_incr = f.is_monotone_increasing() && g.is_monotone_increasing();
    let both_decr = f.is_monotone_decreasing() && g.is_monotone_decreasing();
    if !both_incr && !both_decr {
        return Err(Error::Precondition(
            "F and G must both be monotone increasing or both decreasing".into(),
        ));
    }
    // Weight-factor table: Pr[x] = alpha^|x| (1-alpha)^(n-|x|).
    let wprob: Vec<f64> = (0..=n)
        .map(|w| alpha.powi(w as i32) * (1.0 - alpha).powi((n - w) as i32))
        .collect();
    let mut pf = CompensatedSum::new();
    let mut pg1 = CompensatedSum::new();
    let mut pf1g1 = CompensatedSum::new();
    let mut pf1g0 = CompensatedSum::new();
    for x in 0u64..(1 << n) {
        let p = wprob[x.count_ones() as usize];
        let fv = f.get(x);
        let gv = g.get(x);
        if fv {
            pf.add(p);
            if gv {
                pf1g1.add(p);
            } else {
                pf1g0.add(p);
            }
        }
        if gv {
            pg1.add(p);
        }
    }
    let p_f1 = pf.value();
    let p_g1 = pg1.value();
    let p_g0 = 1.0 - p_g1;
    let p_f1_given_g1 = (p_g1 > 0.0).then(|| pf1g1.value() / p_g1);
    let p_f1_given_g0 = (p_g0 > 0.0).then(|| pf1g0.value() / p_g0);
    let tol = 1e-12;
    let left_ok = p_f1_given_g0.map_or(true, |v| v <= p_f1 + tol);
    let right_ok = p_f1_given_g1.map_or(true, |v| v >= p_f1 - tol);
    Ok(KleitmanReport {
        alpha,
        p_f1,
        p_f1_given_g0,
        p_f1_given_g1,
        chain_ok: left_ok && right_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_dictators() {
        let f = TruthTable::dictator(3, 0);
        let r = kleitman_check(&f, &f, 0.3).unwrap();
        assert_eq!(r.p_f1_given_g1, Some(1.0));
        assert_eq!(r.p_f1_given_g0, Some(0.0));
        assert!(r.chain_ok);
    }

    #[test]
    fn independent_dictators() {
        let f = TruthTable::dictator(3, 0);
        let g = TruthTable::dictator(3, 1);
        let r = kleitman_check(&f, &g, 0.4).unwrap();
        assert!((r.p_f1 - 0.4).abs() < 1e-12);
        assert!((r.p_f1_given_g0.unwrap() - 0.4).abs() < 1e-12);
        assert!((r.p_f1_given_g1.unwrap() - 0.4).abs() < 1e-12);
        assert!(r.chain_ok);
    }

    #[test]
    fn vacuous_conditioning() {
        let f = TruthTable::dictator(2, 0);
        let g = TruthTable::constant(2, true);
        let r = kleitman_check(&f, &g, 0.5).unwrap();
        assert!(r.p_f1_given_g0.is_none());
        assert!(r.chain_ok);
    }

    #[test]
    fn decreasing_pair_accepted() {
        let mut f = TruthTable::dictator(2, 0);
        f.complement();
        let mut g = TruthTable::dictator(2, 1);
        g.complement();
        let r = kleitman_check(&f, &g, 0.3).unwrap();
        assert!(r.chain_ok);
    }

    #[test]
    fn mixed_monotonicity_rejected() {
        let f = TruthTable::dictator(2, 0);
        let mut g = TruthTable::dictator(2, 1);
        g.complement();
        assert!(kleitman_check(&f, &g, 0.3).is_err());
    }

    #[test]
    fn exhaustive_monotone_pairs_on_three_bits() {
        let monotones = TruthTable::all_monotone_increasing(3);
        assert_eq!(monotones.len(), 20);
        for alpha in [0.25, 0.5, 0.75] {
            for f in &monotones {
                for g in &monotones {
                    let r = kleitman_check(f, g, alpha).unwrap();
                    assert!(r.chain_ok, "alpha={alpha}");
                }
            }
        }
    }
}

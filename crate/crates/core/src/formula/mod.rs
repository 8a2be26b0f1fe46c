//! The three formula families solving the delta-coin problem, their
//! explicit leaf labeling, and evaluation.
//!
//! All formulas are alternating monotone AND/OR trees: level-1 gates (just
//! above the inputs) are ANDs and the gate type alternates upward, so the
//! level-i gates are ANDs for odd i and ORs for even i. A formula is
//! described by its fan-in schedule f_1..f_d plus, for the derandomized
//! family, one combinatorial design per level that assigns shared variable
//! sets to sibling subformulas.

mod compile;

pub use compile::CompiledFormula;

use crate::design::{derive_params, Design, DesignParams};
use crate::error::{Error, Result};
use crate::logf::{big_exp_ceil, ceil_mul_pow2, ceil_snapped, ln_biguint};
use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Fan-in constant for the next-to-top level of the depth-d family.
pub const C1: f64 = 50.0;
/// Separation constant at the next-to-top level: C2 = C1/10.
pub const C2: f64 = C1 / 10.0;

/// Default cap on leaf count for evaluation and substitution.
pub const DEFAULT_GATE_CAP: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulaKind {
    #[serde(rename = "AMANO")]
    Amano,
    #[serde(rename = "OW2")]
    Ow2,
    #[serde(rename = "DERAND")]
    Derand,
}

/// Amplified biases per level: delta_1 = m*delta, delta_i = delta_{i-1}*m*ln2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaParams {
    /// delta_1 .. delta_{d-2}.
    pub deltas: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
}

impl DeltaParams {
    pub fn new(delta: f64, m: u32, d: u32) -> Self {
        let mut deltas = Vec::new();
        if d >= 3 {
            let mut cur = m as f64 * delta;
            deltas.push(cur);
            for _ in 2..=(d - 2) {
                cur *= m as f64 * LN_2;
                deltas.push(cur);
            }
        }
        DeltaParams {
            deltas,
            c1: C1,
            c2: C2,
        }
    }
}

/// One shared-variable level of a derandomized formula: the design whose
/// first `fanin` sets carve the child variable sets out of the parent's.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelDesign {
    pub design: Design,
    pub fanin: u64,
}

/// A leaf-relabeling layered on top of a base formula: leaf ordinal t reads
/// variable map[t] among n fresh variables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubstitutionMap {
    pub n: u32,
    pub seed: u64,
    pub map: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormulaSpec {
    pub kind: FormulaKind,
    pub d: u32,
    pub m: u32,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c0: Option<f64>,
    /// f_1 .. f_d.
    #[serde(with = "biguint_vec_str")]
    pub fanins: Vec<BigUint>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta_params: Option<DeltaParams>,
    /// Derandomized levels 2..=d (index 0 holds level 2).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub designs: Vec<LevelDesign>,
    /// Derandomized per-level variable counts n_1 .. n_d.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub var_counts: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub substitution: Option<SubstitutionMap>,
    /// Number of distinct input variables (the sample complexity).
    #[serde(with = "biguint_str")]
    pub variable_count: BigUint,
}

mod biguint_str {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod biguint_vec_str {
    use num_bigint::BigUint;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_str_radix(10))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        strs.iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// The read-once depth-d family (d >= 3): m = ceil((1/delta)^(1/(d-1))/ln2),
/// fan-ins f_1 = m, f_2..f_{d-2} = ceil(m*2^m*ln2), f_{d-1} = C1*m*2^m,
/// f_d = ceil(exp(C1*m)). Leaves are labeled by distinct variables.
pub fn amano_spec(delta: f64, d: u32) -> Result<FormulaSpec> {
    if d < 3 {
        return Err(Error::Parameter(format!("depth d >= 3 required, got {d}")));
    }
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::Parameter(format!("delta must be in (0,1), got {delta}")));
    }
    let m = ceil_snapped((1.0 / delta).powf(1.0 / (d - 1) as f64) / LN_2);
    if m < 2 {
        return Err(Error::Parameter(format!(
            "delta = {delta} too large for d = {d}: m = {m} < 2"
        )));
    }
    let m_u32 = u32::try_from(m).map_err(|_| Error::Parameter("m overflows u32".into()))?;
    let mut fanins = vec![BigUint::from(m)];
    for _ in 2..=(d.saturating_sub(2)) {
        fanins.push(ceil_mul_pow2(m as f64 * LN_2, m as i64));
    }
    fanins.push(BigUint::from(50u64 * m) << m); // f_{d-1} = C1*m*2^m, exact
    fanins.push(big_exp_ceil(C1 * m as f64));
    let variable_count: BigUint = fanins.iter().product();
    Ok(FormulaSpec {
        kind: FormulaKind::Amano,
        d,
        m: m_u32,
        delta,
        c0: None,
        fanins,
        delta_params: Some(DeltaParams::new(delta, m_u32, d)),
        designs: Vec::new(),
        var_counts: Vec::new(),
        substitution: None,
        variable_count,
    })
}

/// The read-once depth-2 family: m = ceil(C0/delta), a single OR of 2^m ANDs
/// of m distinct variables each.
pub fn ow2_spec(delta: f64, c0: f64) -> Result<FormulaSpec> {
    if c0 < 10.0 {
        return Err(Error::Parameter(format!("C0 >= 10 required, got {c0}")));
    }
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::Parameter(format!("delta must be in (0,1), got {delta}")));
    }
    let m = ceil_snapped(c0 / delta);
    let m_u32 = u32::try_from(m).map_err(|_| Error::Parameter("m overflows u32".into()))?;
    if m_u32 > 10_000 {
        return Err(Error::Parameter(format!(
            "m = {m} too large to represent f_2 = 2^m meaningfully"
        )));
    }
    let fanins = vec![BigUint::from(m), BigUint::from(1u32) << m_u32];
    let variable_count: BigUint = fanins.iter().product();
    Ok(FormulaSpec {
        kind: FormulaKind::Ow2,
        d: 2,
        m: m_u32,
        delta,
        c0: Some(c0),
        fanins,
        delta_params: None,
        designs: Vec::new(),
        var_counts: Vec::new(),
        substitution: None,
        variable_count,
    })
}

/// A custom read-once alternating formula with explicit fan-ins (bottom
/// gates are ANDs of fanins[0] variables). Used for small exact studies.
pub fn read_once_spec(fanins: &[u64], delta: f64) -> Result<FormulaSpec> {
    if fanins.is_empty() || fanins.iter().any(|&f| f == 0) {
        return Err(Error::Parameter("fan-ins must be positive".into()));
    }
    let d = fanins.len() as u32;
    let big: Vec<BigUint> = fanins.iter().map(|&f| BigUint::from(f)).collect();
    let variable_count: BigUint = big.iter().product();
    Ok(FormulaSpec {
        kind: if d == 2 { FormulaKind::Ow2 } else { FormulaKind::Amano },
        d,
        m: u32::try_from(fanins[0]).map_err(|_| Error::Parameter("f_1 overflows u32".into()))?,
        delta,
        c0: None,
        fanins: big,
        delta_params: None,
        designs: Vec::new(),
        var_counts: Vec::new(),
        substitution: None,
        variable_count,
    })
}

/// The (gamma, eta) schedule of the derandomized family: (1, 1/(16(1+delta)^m))
/// at depth 2 and (1/m^3, 1/m^(10d)) at depth >= 3.
pub fn gamma_eta(delta: f64, d: u32, m: u32) -> (f64, f64) {
    if d == 2 {
        (1.0, 1.0 / (16.0 * (1.0 + delta).powi(m as i32)))
    } else {
        let mf = m as f64;
        (mf.powi(-3), mf.powf(-(10.0 * d as f64)))
    }
}

/// Derandomized formula with the same fan-in schedule as the read-once
/// families, sharing variables through per-level designs. At desk scale the
/// design hypotheses usually fail and the error names the inequality; use
/// [`gamma_spec_forced`] to build toy instances.
pub fn gamma_spec(delta: f64, d: u32, c0: Option<f64>) -> Result<FormulaSpec> {
    if d < 2 {
        return Err(Error::Parameter(format!("depth d >= 2 required, got {d}")));
    }
    let base = if d == 2 {
        ow2_spec(delta, c0.unwrap_or(10.0))?
    } else {
        amano_spec(delta, d)?
    };
    let (gamma, eta) = gamma_eta(delta, d, base.m);
    let mut designs = Vec::new();
    let mut var_counts = vec![base.m as u64];
    let mut n_prev = base.m as u64;
    for lvl in 2..=d {
        let fanin = &base.fanins[(lvl - 1) as usize];
        let fanin_u128: u128 = fanin.try_into().map_err(|_| {
            Error::Infeasible(format!("f_{lvl} too large to derive a design"))
        })?;
        let n2 = u32::try_from(n_prev)
            .map_err(|_| Error::Infeasible(format!("n_{} overflows u32", lvl - 1)))?;
        let params = derive_params(n2, fanin_u128, eta, gamma, false)?;
        let n_i = params.n1;
        designs.push(LevelDesign {
            design: Design::from_params(params)?,
            fanin: u64::try_from(fanin_u128)
                .map_err(|_| Error::Infeasible(format!("f_{lvl} overflows u64")))?,
        });
        var_counts.push(n_i);
        n_prev = n_i;
    }
    Ok(FormulaSpec {
        kind: FormulaKind::Derand,
        variable_count: BigUint::from(n_prev),
        designs,
        var_counts,
        ..base
    })
}

/// Forced desk-scale derandomized build with user-supplied structure.
#[derive(Debug, Clone)]
pub struct ToyGamma {
    pub m: u32,
    /// f_2 .. f_d.
    pub fanins: Vec<u64>,
    /// Pairwise intersection bound for every level design.
    pub ell: u32,
    pub delta: f64,
    /// Overrides for the recorded bookkeeping values.
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
}

/// Build a toy derandomized formula: each level i gets the full polynomial
/// graph family over the smallest field that accommodates f_i sets of size
/// n_{i-1}; gamma and eta default to the bookkeeping values Q1^(ell-1)/f_i
/// and n_{i-1}/Q1.
pub fn gamma_spec_forced(toy: &ToyGamma) -> Result<FormulaSpec> {
    if toy.m == 0 || toy.fanins.is_empty() {
        return Err(Error::Parameter("toy build needs m >= 1 and f_2..f_d".into()));
    }
    if toy.ell == 0 {
        return Err(Error::Parameter("ell >= 1 required".into()));
    }
    let d = toy.fanins.len() as u32 + 1;
    let mut designs = Vec::new();
    let mut var_counts = vec![toy.m as u64];
    let mut n_prev = toy.m as u64;
    for (idx, &f_i) in toy.fanins.iter().enumerate() {
        let lvl = idx as u32 + 2;
        if f_i == 0 {
            return Err(Error::Parameter(format!("f_{lvl} must be positive")));
        }
        let q1 = crate::design::minimal_base(f_i as u128, toy.ell);
        let q = q1.max(n_prev).next_power_of_two().max(2);
        let n2 = u32::try_from(n_prev)
            .map_err(|_| Error::Infeasible(format!("n_{} overflows u32", lvl - 1)))?;
        if (toy.ell) > n2 {
            return Err(Error::Parameter(format!(
                "ell <= n_{} fails at level {lvl}: ell = {}, n = {n2}",
                lvl - 1,
                toy.ell
            )));
        }
        let m_family = f_i as u128;
        let gamma = toy.gamma.unwrap_or_else(|| {
            (q1 as f64).powi(toy.ell as i32 - 1) / f_i as f64
        });
        let eta = toy.eta.unwrap_or((n2 as f64 / q1 as f64).min(1.0));
        let params = DesignParams {
            n1: q * n_prev,
            m_family,
            n2,
            ell: toy.ell,
            gamma_cov: gamma.min(1.0),
            eta_int: eta,
            q,
            q1,
        };
        let design = Design::from_params(params)?;
        if design.family_size() < m_family {
            return Err(Error::Parameter(format!(
                "design at level {lvl} has only {} sets, need {f_i}",
                design.family_size()
            )));
        }
        designs.push(LevelDesign { design, fanin: f_i });
        n_prev = q * var_counts[idx];
        var_counts.push(n_prev);
    }
    let mut fanins = vec![BigUint::from(toy.m)];
    fanins.extend(toy.fanins.iter().map(|&f| BigUint::from(f)));
    Ok(FormulaSpec {
        kind: FormulaKind::Derand,
        d,
        m: toy.m,
        delta: toy.delta,
        c0: None,
        fanins,
        delta_params: None,
        designs,
        var_counts,
        substitution: None,
        variable_count: BigUint::from(n_prev),
    })
}

impl FormulaSpec {
    /// True when every leaf reads a distinct variable.
    pub fn is_read_once(&self) -> bool {
        matches!(self.kind, FormulaKind::Amano | FormulaKind::Ow2) && self.substitution.is_none()
    }

    /// Number of leaves, Π f_i.
    pub fn leaf_count(&self) -> BigUint {
        self.fanins.iter().product()
    }

    /// Total gate count including input gates: leaves plus one gate per
    /// internal node, Σ_{i=1..d} Π_{t>i} f_t.
    pub fn gate_count(&self) -> BigUint {
        let mut total = self.leaf_count();
        let mut above = BigUint::from(1u32);
        for f in self.fanins.iter().rev() {
            total += &above;
            above *= f;
        }
        total
    }

    /// ln f_i (1-based level), accurate to ~1e-15 relative.
    pub fn ln_fanin(&self, level: u32) -> f64 {
        ln_biguint(&self.fanins[(level - 1) as usize])
    }

    pub fn fanin_u64(&self, level: u32) -> Result<u64> {
        u64::try_from(&self.fanins[(level - 1) as usize])
            .map_err(|_| Error::Infeasible(format!("f_{level} does not fit in u64")))
    }

    /// Sample complexity as u64 when representable.
    pub fn variable_count_u64(&self) -> Result<u64> {
        u64::try_from(&self.variable_count)
            .map_err(|_| Error::Infeasible("variable count does not fit in u64".into()))
    }

    pub fn is_evaluable(&self, cap: u64) -> bool {
        self.leaf_count() <= BigUint::from(cap)
    }

    /// The variable index read by the leaf at `path` = (j_d, ..., j_1),
    /// components zero-based. For read-once kinds this is the mixed-radix
    /// index with j_1 fastest; for the derandomized kind the depth-1 index
    /// is lifted through each level's design; a substitution map is applied
    /// last.
    pub fn leaf_var(&self, path: &[u64]) -> Result<u64> {
        if path.len() != self.d as usize {
            return Err(Error::Parameter(format!(
                "path length {} != depth {}",
                path.len(),
                self.d
            )));
        }
        for (t, &j) in path.iter().enumerate() {
            let level = self.d - t as u32; // path[0] is j_d
            if BigUint::from(j) >= self.fanins[(level - 1) as usize] {
                return Err(Error::Parameter(format!(
                    "path component j_{level} = {j} out of range"
                )));
            }
        }
        let base = match self.kind {
            FormulaKind::Amano | FormulaKind::Ow2 => {
                // Σ j_t * Π_{s<t} f_s, j_1 fastest. The top radix f_d is
                // never multiplied in, so huge top fan-ins stay addressable.
                let mut var: u64 = path[0];
                for (t, &j) in path.iter().enumerate().skip(1) {
                    let level = self.d - t as u32;
                    let f = self.fanin_u64(level)?;
                    var = var
                        .checked_mul(f)
                        .and_then(|v| v.checked_add(j))
                        .ok_or_else(|| Error::Infeasible("leaf index overflows u64".into()))?;
                }
                var
            }
            FormulaKind::Derand => {
                let mut x = path[self.d as usize - 1]; // j_1
                for lvl in 2..=self.d {
                    let ld = &self.designs[(lvl - 2) as usize];
                    let j_lvl = path[(self.d - lvl) as usize];
                    let k = ld.design.member(j_lvl as u128, x as u32)?;
                    x = k * self.var_counts[(lvl - 2) as usize] + x;
                }
                x
            }
        };
        match &self.substitution {
            Some(sub) => {
                let ordinal = self.leaf_ordinal(path)?;
                Ok(sub.map[ordinal as usize] as u64)
            }
            None => Ok(base),
        }
    }

    /// Mixed-radix ordinal of a leaf path (j_1 fastest).
    fn leaf_ordinal(&self, path: &[u64]) -> Result<u64> {
        let mut ord: u64 = path[0];
        for (t, &j) in path.iter().enumerate().skip(1) {
            let level = self.d - t as u32;
            let f = self.fanin_u64(level)?;
            ord = ord
                .checked_mul(f)
                .and_then(|v| v.checked_add(j))
                .ok_or_else(|| Error::Infeasible("leaf ordinal overflows u64".into()))?;
        }
        Ok(ord)
    }

    /// Evaluate on a full assignment; requires the formula to be evaluable
    /// under `cap` and the assignment length to match the sample complexity.
    pub fn evaluate(&self, assignment: &crate::bits::BitVec, cap: u64) -> Result<bool> {
        let n = self.variable_count_u64()?;
        if assignment.len() != n {
            return Err(Error::Parameter(format!(
                "assignment length {} != sample complexity {n}",
                assignment.len()
            )));
        }
        let cf = self.compile(cap)?;
        Ok(cf.eval_bits(assignment))
    }

    /// Relabel every leaf with an independent uniform variable index in
    /// [0, n), drawn from the seeded stream. Identical seeds produce
    /// identical maps.
    pub fn random_substitute(&self, n: u32, seed: u64) -> Result<FormulaSpec> {
        if n == 0 {
            return Err(Error::Parameter("n >= 1 required".into()));
        }
        let leaves = u64::try_from(self.leaf_count())
            .map_err(|_| Error::Infeasible("formula too large to substitute".into()))?;
        if leaves > DEFAULT_GATE_CAP {
            return Err(Error::Infeasible(format!(
                "leaf count {leaves} exceeds cap {DEFAULT_GATE_CAP}"
            )));
        }
        let old_n = self.variable_count_u64()?;
        let mut rng = crate::prob::rng_for(seed, 0);
        let varmap: Vec<u32> = (0..old_n).map(|_| rng.random_range(0..n)).collect();
        let cf = self.compile(DEFAULT_GATE_CAP)?;
        let map: Vec<u32> = (0..leaves)
            .map(|ord| varmap[cf.leaf_var_of(ord) as usize])
            .collect();
        let mut out = self.clone();
        out.substitution = Some(SubstitutionMap { n, seed, map });
        out.variable_count = BigUint::from(n);
        Ok(out)
    }

    /// Explicit nested gate tree as JSON; only for small formulas.
    pub fn gate_tree_json(&self) -> Result<serde_json::Value> {
        if self.gate_count() > BigUint::from(100_000u32) {
            return Err(Error::Infeasible(
                "gate tree dump limited to 1e5 gates".into(),
            ));
        }
        let cf = self.compile(DEFAULT_GATE_CAP)?;
        Ok(cf.tree_json(self.d, 0))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<FormulaSpec> {
        Ok(serde_json::from_str(s)?)
    }
}

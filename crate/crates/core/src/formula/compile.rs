//! Compiled evaluation form of a formula: flat fan-ins, a leaf->variable
//! map, and precomputed bottom-gate variable masks when the variable count
//! fits in a machine word.

use super::{FormulaKind, FormulaSpec};
use crate::bits::BitVec;
use crate::error::{Error, Result};
use serde_json::json;

#[derive(Debug, Clone)]
enum LeafMap {
    /// Read-once: leaf ordinal is the variable index.
    Identity,
    Table(Vec<u32>),
}

#[derive(Debug, Clone)]
pub struct CompiledFormula {
    d: u32,
    fanins: Vec<u64>,
    /// block[i] = leaves under one depth-i node (block[0] = 1).
    blocks: Vec<u64>,
    /// gates1[i] = depth-1 gates under one depth-i node (gates1[1] = 1).
    gates1: Vec<u64>,
    n_vars: u64,
    leaf_map: LeafMap,
    /// Variable mask per bottom AND gate, when n_vars <= 64.
    masks: Option<Vec<u64>>,
}

impl FormulaSpec {
    /// Flatten into an evaluable form; errors if the leaf count exceeds
    /// `cap` or any fan-in does not fit in a machine word.
    pub fn compile(&self, cap: u64) -> Result<CompiledFormula> {
        let d = self.d;
        let mut fanins = Vec::with_capacity(d as usize);
        for lvl in 1..=d {
            fanins.push(self.fanin_u64(lvl)?);
        }
        let mut blocks = vec![1u64; d as usize + 1];
        for i in 1..=d as usize {
            blocks[i] = blocks[i - 1]
                .checked_mul(fanins[i - 1])
                .ok_or_else(|| Error::Infeasible("leaf count overflows u64".into()))?;
        }
        let leaves = blocks[d as usize];
        if leaves > cap {
            return Err(Error::Infeasible(format!(
                "leaf count {leaves} exceeds evaluation cap {cap}"
            )));
        }
        let mut gates1 = vec![1u64; d as usize + 1];
        for i in 2..=d as usize {
            gates1[i] = gates1[i - 1] * fanins[i - 1];
        }
        let n_vars = self.variable_count_u64()?;

        let leaf_map = if let Some(sub) = &self.substitution {
            LeafMap::Table(sub.map.clone())
        } else {
            match self.kind {
                FormulaKind::Amano | FormulaKind::Ow2 => LeafMap::Identity,
                FormulaKind::Derand => {
                    // Lift tables: lift[lvl-2][j*n_prev + x] maps a child
                    // variable x through set j of the level design.
                    let mut lifts: Vec<Vec<u32>> = Vec::with_capacity(d as usize - 1);
                    for lvl in 2..=d {
                        let ld = &self.designs[(lvl - 2) as usize];
                        let n_prev = self.var_counts[(lvl - 2) as usize];
                        let mut table = Vec::with_capacity((ld.fanin * n_prev) as usize);
                        for j in 0..ld.fanin {
                            let blocks_of_set = ld.design.set_blocks(j as u128)?;
                            for x in 0..n_prev {
                                let k = blocks_of_set[x as usize];
                                table.push((k * n_prev + x) as u32);
                            }
                        }
                        lifts.push(table);
                    }
                    let mut map = Vec::with_capacity(leaves as usize);
                    for ord in 0..leaves {
                        let mut rest = ord;
                        let mut digits = Vec::with_capacity(d as usize);
                        for lvl in 1..=d as usize {
                            digits.push(rest % fanins[lvl - 1]);
                            rest /= fanins[lvl - 1];
                        }
                        let mut x = digits[0];
                        for lvl in 2..=d as usize {
                            let n_prev = self.var_counts[lvl - 2];
                            x = lifts[lvl - 2][(digits[lvl - 1] * n_prev + x) as usize] as u64;
                        }
                        map.push(x as u32);
                    }
                    LeafMap::Table(map)
                }
            }
        };

        let masks = if n_vars <= 64 {
            let f1 = fanins[0];
            let bottom_gates = leaves / f1;
            let mut masks = Vec::with_capacity(bottom_gates as usize);
            for g in 0..bottom_gates {
                let mut m = 0u64;
                for t in 0..f1 {
                    let var = match &leaf_map {
                        LeafMap::Identity => g * f1 + t,
                        LeafMap::Table(tab) => tab[(g * f1 + t) as usize] as u64,
                    };
                    m |= 1 << var;
                }
                masks.push(m);
            }
            Some(masks)
        } else {
            None
        };

        Ok(CompiledFormula {
            d,
            fanins,
            blocks,
            gates1,
            n_vars,
            leaf_map,
            masks,
        })
    }
}

impl CompiledFormula {
    pub fn depth(&self) -> u32 {
        self.d
    }

    pub fn n_vars(&self) -> u64 {
        self.n_vars
    }

    pub fn leaf_count(&self) -> u64 {
        self.blocks[self.d as usize]
    }

    pub fn fanins(&self) -> &[u64] {
        &self.fanins
    }

    #[inline]
    pub fn leaf_var_of(&self, ordinal: u64) -> u64 {
        match &self.leaf_map {
            LeafMap::Identity => ordinal,
            LeafMap::Table(t) => t[ordinal as usize] as u64,
        }
    }

    /// Bottom-gate variable masks (present when n_vars <= 64).
    pub fn bottom_masks(&self) -> Option<&[u64]> {
        self.masks.as_deref()
    }

    /// Variables read by the depth-`level` subformula at child index `idx`
    /// (in depth-first sibling order), sorted and deduplicated.
    pub fn subformula_vars(&self, level: u32, idx: u64) -> Vec<u64> {
        let block = self.blocks[level as usize];
        let start = idx * block;
        let mut vars: Vec<u64> = (start..start + block).map(|o| self.leaf_var_of(o)).collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// Evaluate with an arbitrary variable lookup, over the depth-`level`
    /// subformula at sibling index `idx`.
    pub fn eval_subformula_with<F: Fn(u64) -> bool>(&self, level: u32, idx: u64, lookup: &F) -> bool {
        self.eval_rec(level, idx * self.blocks[level as usize], lookup)
    }

    pub fn eval_bits(&self, bits: &BitVec) -> bool {
        self.eval_rec(self.d, 0, &|v| bits.get(v))
    }

    fn eval_rec<F: Fn(u64) -> bool>(&self, level: u32, leaf_start: u64, lookup: &F) -> bool {
        if level == 0 {
            return lookup(self.leaf_var_of(leaf_start));
        }
        let is_and = level % 2 == 1;
        let child_block = self.blocks[(level - 1) as usize];
        let f = self.fanins[(level - 1) as usize];
        for c in 0..f {
            let v = self.eval_rec(level - 1, leaf_start + c * child_block, lookup);
            if is_and && !v {
                return false;
            }
            if !is_and && v {
                return true;
            }
        }
        is_and
    }

    /// Mask-based evaluation on a packed assignment (requires n_vars <= 64).
    #[inline]
    pub fn eval_mask(&self, x: u64) -> bool {
        self.eval_mask_rec(self.d, 0, x)
    }

    fn eval_mask_rec(&self, level: u32, gate0: u64, x: u64) -> bool {
        if level == 1 {
            let m = self.masks.as_ref().expect("masks require n_vars <= 64")[gate0 as usize];
            return x & m == m;
        }
        let is_and = level % 2 == 1;
        let per_child = self.gates1[(level - 1) as usize];
        let f = self.fanins[(level - 1) as usize];
        for c in 0..f {
            let v = self.eval_mask_rec(level - 1, gate0 + c * per_child, x);
            if is_and && !v {
                return false;
            }
            if !is_and && v {
                return true;
            }
        }
        is_and
    }

    pub(super) fn tree_json(&self, level: u32, leaf_start: u64) -> serde_json::Value {
        if level == 0 {
            return json!({ "var": self.leaf_var_of(leaf_start) });
        }
        let child_block = self.blocks[(level - 1) as usize];
        let f = self.fanins[(level - 1) as usize];
        let children: Vec<_> = (0..f)
            .map(|c| self.tree_json(level - 1, leaf_start + c * child_block))
            .collect();
        json!({
            "op": if level % 2 == 1 { "AND" } else { "OR" },
            "children": children,
        })
    }
}

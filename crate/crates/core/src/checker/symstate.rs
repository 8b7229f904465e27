//! The checker's symbolic state: a register layout partitioned into tensor
//! blocks, each holding a joint state vector with amplitudes polynomial in
//! the symbolic parameters. Measurement links, consumed-qubit flags, and
//! residual facts ride along.
//!
//! Blocks are kept maximally split: after every operation the affected
//! blocks are re-factored by exact polynomial rank-1 tests, so separability
//! questions (frame checks, annotations) reduce to block alignment.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::config::COEFF_TOL;
use crate::error::LinalgError;
use crate::linalg::{Gate, SymVector};
use crate::props::{PropLayout, RegTag, VarKind};
use crate::surface::ast::{Name, PropAst};

pub type RegId = u32;

#[derive(Debug, Clone)]
pub struct RegInfo {
    pub id: RegId,
    pub name: Name,
    pub tag: RegTag,
}

#[derive(Debug, Clone)]
pub struct Block {
    /// Registers in qubit order of `vec` (position 0 = most significant).
    pub regs: Vec<RegId>,
    pub vec: SymVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateMode {
    State,
    Prop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitBinding {
    Literal(u8),
    Ghost(RegId),
}

#[derive(Debug, Clone)]
pub struct SymState {
    regs: Vec<RegInfo>,
    names: BTreeMap<Name, RegId>,
    blocks: Vec<Block>,
    pub bit_links: BTreeMap<Name, BitBinding>,
    pub consumed: BTreeSet<Name>,
    /// Residual facts: the proposition store in prop mode, plus inert
    /// classical facts carried over from call postconditions.
    pub facts: Vec<PropAst>,
    pub mode: StateMode,
    next_reg: RegId,
}

impl SymState {
    pub fn new() -> Self {
        SymState {
            regs: Vec::new(),
            names: BTreeMap::new(),
            blocks: Vec::new(),
            bit_links: BTreeMap::new(),
            consumed: BTreeSet::new(),
            facts: Vec::new(),
            mode: StateMode::State,
            next_reg: 0,
        }
    }

    pub fn n_registers(&self) -> usize {
        self.regs.len()
    }

    pub fn registers(&self) -> &[RegInfo] {
        &self.regs
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn resolve(&self, name: &str) -> Option<RegId> {
        self.names.get(name).copied()
    }

    pub fn info(&self, id: RegId) -> &RegInfo {
        self.regs.iter().find(|r| r.id == id).expect("live register")
    }

    fn info_mut(&mut self, id: RegId) -> &mut RegInfo {
        self.regs.iter_mut().find(|r| r.id == id).expect("live register")
    }

    /// Layout position of a register (registers are ordered by creation).
    pub fn position(&self, id: RegId) -> usize {
        self.regs.iter().position(|r| r.id == id).expect("live register")
    }

    /// Append registers holding a joint state as one new block.
    /// `names` are bound in the name table; the block vector's qubit `i`
    /// is `names[i]`.
    pub fn add_block(
        &mut self,
        names: &[(Name, RegTag)],
        vec: SymVector,
        cap: usize,
    ) -> Result<Vec<RegId>, LinalgError> {
        assert_eq!(1 << names.len(), vec.dim());
        if self.regs.len() + names.len() > cap {
            return Err(LinalgError::Capacity {
                requested: self.regs.len() + names.len(),
                cap,
            });
        }
        let mut ids = Vec::with_capacity(names.len());
        for (name, tag) in names {
            let id = self.next_reg;
            self.next_reg += 1;
            self.regs.push(RegInfo { id, name: name.clone(), tag: *tag });
            self.names.insert(name.clone(), id);
            ids.push(id);
        }
        self.blocks.push(Block { regs: ids.clone(), vec });
        self.split_block(self.blocks.len() - 1);
        Ok(ids)
    }

    /// Re-tag a measured program qubit as an entangled ghost carrying the
    /// measurement distribution. The old name stops resolving; the ghost
    /// name takes over the register. The block vector is untouched.
    pub fn retag_as_ghost(&mut self, id: RegId, ghost_name: Name) {
        let old = self.info(id).name.clone();
        self.names.remove(&old);
        self.names.insert(ghost_name.clone(), id);
        let info = self.info_mut(id);
        info.name = ghost_name;
        info.tag = RegTag::EntangledGhost;
    }

    /// Bind an additional name to an existing register (qubit results of
    /// calls alias their argument register).
    pub fn alias(&mut self, id: RegId, name: Name) {
        self.names.insert(name.clone(), id);
        self.info_mut(id).name = name;
    }

    pub fn block_index_of(&self, id: RegId) -> usize {
        self.blocks
            .iter()
            .position(|b| b.regs.contains(&id))
            .expect("register in some block")
    }

    /// Merge all blocks containing the given registers into one, ordered by
    /// layout position of each block's leading register. Returns the merged
    /// block index.
    pub fn merge_blocks(&mut self, ids: &[RegId]) -> usize {
        let mut idxs: Vec<usize> = ids.iter().map(|&id| self.block_index_of(id)).collect();
        idxs.sort_unstable();
        idxs.dedup();
        if idxs.len() == 1 {
            return idxs[0];
        }
        idxs.sort_by_key(|&i| self.position(self.blocks[i].regs[0]));
        let mut regs = Vec::new();
        let mut vec = SymVector::scalar_one();
        for &i in &idxs {
            regs.extend(self.blocks[i].regs.iter().copied());
            vec = vec.tensor(&self.blocks[i].vec);
        }
        let mut removed = idxs.clone();
        removed.sort_unstable_by(|a, b| b.cmp(a));
        for i in removed {
            self.blocks.remove(i);
        }
        self.blocks.push(Block { regs, vec });
        self.blocks.len() - 1
    }

    /// Apply a gate to target registers, optionally controlled on ghost
    /// registers, merging blocks as needed and re-splitting afterwards.
    pub fn apply_gate(
        &mut self,
        gate: Gate,
        targets: &[RegId],
        controls: &[(RegId, bool)],
    ) -> Result<(), LinalgError> {
        let mut involved: Vec<RegId> = targets.to_vec();
        involved.extend(controls.iter().map(|&(r, _)| r));
        let bi = self.merge_blocks(&involved);
        let block = &self.blocks[bi];
        let pos_in_block = |b: &Block, id: RegId| b.regs.iter().position(|&r| r == id).unwrap();
        let tpos: Vec<usize> = targets.iter().map(|&t| pos_in_block(block, t)).collect();
        let cpos: Vec<(usize, bool)> = controls
            .iter()
            .map(|&(c, v)| (pos_in_block(block, c), v))
            .collect();
        let new_vec = block.vec.apply_gate_controlled(gate, &tpos, &cpos)?;
        self.blocks[bi].vec = new_vec;
        self.split_block(bi);
        Ok(())
    }

    /// Apply an explicit matrix on target registers (basis-map call effects).
    pub fn apply_matrix(
        &mut self,
        m: &[Vec<Complex64>],
        targets: &[RegId],
    ) -> Result<(), LinalgError> {
        let bi = self.merge_blocks(targets);
        let block = &self.blocks[bi];
        let tpos: Vec<usize> = targets
            .iter()
            .map(|&t| block.regs.iter().position(|&r| r == t).unwrap())
            .collect();
        let new_vec = block.vec.apply_matrix(m, &tpos, &[])?;
        self.blocks[bi].vec = new_vec;
        self.split_block(bi);
        Ok(())
    }

    /// Greedy re-factorization: peel off single registers while an exact
    /// rank-1 split exists.
    fn split_block(&mut self, bi: usize) {
        loop {
            let block = &self.blocks[bi];
            if block.regs.len() < 2 {
                return;
            }
            let mut done = true;
            for (pos, &reg) in block.regs.iter().enumerate() {
                if let Some((rest, single)) = block.vec.try_split(&[pos], COEFF_TOL) {
                    let mut rest_regs = block.regs.clone();
                    rest_regs.remove(pos);
                    self.blocks[bi] = Block { regs: rest_regs, vec: rest };
                    self.blocks.push(Block { regs: vec![reg], vec: single });
                    done = false;
                    break;
                }
            }
            if done {
                return;
            }
        }
    }

    /// Do the given registers form a union of whole blocks?
    pub fn block_aligned(&self, regs: &[RegId]) -> bool {
        let set: BTreeSet<RegId> = regs.iter().copied().collect();
        for b in &self.blocks {
            let inside = b.regs.iter().filter(|r| set.contains(r)).count();
            if inside != 0 && inside != b.regs.len() {
                return false;
            }
        }
        true
    }

    /// Tensor together every block touching the given registers. Returns the
    /// assembled vector and its register order (blocks in layout order).
    pub fn assemble_covering(&self, regs: &[RegId]) -> (SymVector, Vec<RegId>) {
        let mut idxs: Vec<usize> = regs.iter().map(|&r| self.block_index_of(r)).collect();
        idxs.sort_unstable();
        idxs.dedup();
        idxs.sort_by_key(|&i| self.position(self.blocks[i].regs[0]));
        let mut vec = SymVector::scalar_one();
        let mut order = Vec::new();
        for &i in &idxs {
            vec = vec.tensor(&self.blocks[i].vec);
            order.extend(self.blocks[i].regs.iter().copied());
        }
        (vec, order)
    }

    /// The full joint state over all live registers, in layout order.
    pub fn assemble_all(&self) -> (SymVector, Vec<RegId>) {
        let mut idxs: Vec<usize> = (0..self.blocks.len()).collect();
        idxs.sort_by_key(|&i| self.position(self.blocks[i].regs[0]));
        let mut vec = SymVector::scalar_one();
        let mut order = Vec::new();
        for &i in &idxs {
            vec = vec.tensor(&self.blocks[i].vec);
            order.extend(self.blocks[i].regs.iter().copied());
        }
        // Permute to layout order.
        let layout: Vec<RegId> = self.regs.iter().map(|r| r.id).collect();
        if order == layout {
            return (vec, order);
        }
        let perm: Vec<usize> = layout
            .iter()
            .map(|id| order.iter().position(|o| o == id).unwrap())
            .collect();
        (vec.permute(&perm), layout)
    }

    /// Add a register to the layout without a block; the caller installs its
    /// block through [`SymState::replace_blocks`].
    pub fn add_register_detached(
        &mut self,
        name: Name,
        tag: RegTag,
        cap: usize,
    ) -> Result<RegId, LinalgError> {
        if self.regs.len() + 1 > cap {
            return Err(LinalgError::Capacity { requested: self.regs.len() + 1, cap });
        }
        let id = self.next_reg;
        self.next_reg += 1;
        self.regs.push(RegInfo { id, name: name.clone(), tag });
        self.names.insert(name, id);
        Ok(id)
    }

    /// Remove registers (and their single-register blocks). Registers left
    /// without a block by `replace_blocks` are simply dropped from the
    /// layout; multi-register blocks must have been replaced already.
    pub fn drop_registers(&mut self, ids: &[RegId]) {
        for &id in ids {
            if let Some(bi) = self.blocks.iter().position(|b| b.regs.contains(&id)) {
                debug_assert_eq!(self.blocks[bi].regs.len(), 1, "dropping entangled register");
                self.blocks.remove(bi);
            }
            let name = self.info(id).name.clone();
            self.names.remove(&name);
            self.names.retain(|_, v| *v != id);
            let _ = name;
            self.regs.retain(|r| r.id != id);
        }
    }

    /// Replace the blocks exactly covering `old_regs` with new blocks.
    pub fn replace_blocks(&mut self, old_regs: &[RegId], new_blocks: Vec<Block>) {
        let set: BTreeSet<RegId> = old_regs.iter().copied().collect();
        self.blocks.retain(|b| !b.regs.iter().any(|r| set.contains(r)));
        let n = self.blocks.len();
        self.blocks.extend(new_blocks);
        for bi in n..self.blocks.len() {
            self.split_block(bi);
        }
    }

    /// Build a proposition layout over the covering assembly of the given
    /// name→register resolution.
    pub fn prop_layout(
        &self,
        vars: &BTreeMap<Name, RegId>,
        order: &[RegId],
        kinds: &BTreeMap<Name, VarKind>,
    ) -> PropLayout {
        let mut lay = PropLayout {
            n: order.len(),
            ..Default::default()
        };
        for (name, id) in vars {
            if let Some(pos) = order.iter().position(|o| o == id) {
                lay.positions.insert(name.clone(), pos);
            }
        }
        for (name, kind) in kinds {
            lay.kinds.insert(name.clone(), *kind);
        }
        // Register primary names resolve as qubits too.
        for &id in order {
            let info = self.info(id);
            lay.kinds.entry(info.name.clone()).or_insert(VarKind::Qubit);
            if let Some(pos) = order.iter().position(|o| *o == id) {
                lay.positions.entry(info.name.clone()).or_insert(pos);
            }
        }
        lay
    }
}

impl Default for SymState {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::props::RegTag::ProgramQubit;

    const CAP: usize = 12;

    #[test]
    fn gates_merge_and_split_blocks() {
        let mut st = SymState::new();
        st.add_block(&[("a".into(), ProgramQubit)], SymVector::basis(1, 0), CAP)
            .unwrap();
        st.add_block(&[("b".into(), ProgramQubit)], SymVector::basis(1, 0), CAP)
            .unwrap();
        assert_eq!(st.blocks().len(), 2);
        let a = st.resolve("a").unwrap();
        let b = st.resolve("b").unwrap();
        st.apply_gate(Gate::H, &[a], &[]).unwrap();
        // still separable
        assert_eq!(st.blocks().len(), 2);
        st.apply_gate(Gate::CX, &[a, b], &[]).unwrap();
        // now entangled: one block of two registers
        assert_eq!(st.blocks().len(), 1);
        assert_eq!(st.blocks()[0].regs.len(), 2);
        // undo entanglement: splits again
        st.apply_gate(Gate::CX, &[a, b], &[]).unwrap();
        assert_eq!(st.blocks().len(), 2);
    }

    #[test]
    fn measurement_retag_keeps_vector() {
        let mut st = SymState::new();
        st.add_block(&[("q".into(), ProgramQubit)], SymVector::basis(1, 1), CAP)
            .unwrap();
        let q = st.resolve("q").unwrap();
        let before = st.blocks()[0].vec.clone();
        st.retag_as_ghost(q, "e_x".into());
        assert!(st.resolve("q").is_none());
        assert_eq!(st.resolve("e_x"), Some(q));
        assert!(st.blocks()[0].vec.approx_eq(&before, 0.0));
        assert_eq!(st.info(q).tag, RegTag::EntangledGhost);
    }

    #[test]
    fn assemble_all_orders_by_layout() {
        let mut st = SymState::new();
        st.add_block(&[("a".into(), ProgramQubit)], SymVector::basis(1, 0), CAP)
            .unwrap();
        st.add_block(&[("b".into(), ProgramQubit)], SymVector::basis(1, 1), CAP)
            .unwrap();
        let (vec, order) = st.assemble_all();
        // |0> tensor |1> = index 1
        assert_eq!(order.len(), 2);
        assert!((vec.instantiate(&[])[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn capacity_cap_enforced() {
        let mut st = SymState::new();
        for i in 0..3 {
            st.add_block(
                &[(format!("q{i}"), ProgramQubit)],
                SymVector::basis(1, 0),
                3,
            )
            .unwrap();
        }
        let err = st
            .add_block(&[("q3".into(), ProgramQubit)], SymVector::basis(1, 0), 3)
            .unwrap_err();
        assert!(matches!(err, LinalgError::Capacity { .. }));
    }
}

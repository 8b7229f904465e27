//! Register layouts for proposition evaluation, and the table of symbolic
//! parameter families backing ghost vectors.

use std::collections::BTreeMap;

use crate::linalg::amp::AtomId;
use crate::linalg::{Amp, SymVector};
use crate::surface::ast::Name;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegTag {
    ProgramQubit,
    EntangledGhost,
    UnentangledGhost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Qubit,
    Bit,
    Vector,
    Prop,
}

/// Name resolution for one proposition query: variable → qubit position in
/// the assembled vector, plus the variable kinds for the classical/quantum
/// distinction.
#[derive(Debug, Clone, Default)]
pub struct PropLayout {
    pub n: usize,
    pub positions: BTreeMap<Name, usize>,
    pub kinds: BTreeMap<Name, VarKind>,
}

impl PropLayout {
    pub fn position(&self, name: &str) -> Option<usize> {
        self.positions.get(name).copied()
    }

    pub fn kind(&self, name: &str) -> Option<VarKind> {
        self.kinds.get(name).copied()
    }

    /// Positions of a variable list, in list order.
    pub fn positions_of(&self, vars: &[Name]) -> Option<Vec<usize>> {
        vars.iter().map(|v| self.position(v)).collect()
    }
}

/// One symbolic state family: a ghost vector over `n_qubits` qubits whose
/// `2^n_qubits` components are fresh atoms.
#[derive(Debug, Clone)]
pub struct Family {
    pub name: Name,
    pub n_qubits: usize,
    pub atoms: Vec<AtomId>,
}

impl Family {
    /// The canonical vector of the family: entry `i` is atom `i`.
    pub fn vector(&self) -> SymVector {
        SymVector::from_entries(self.atoms.iter().map(|&a| Amp::atom(a)).collect())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParamTable {
    families: Vec<Family>,
    by_name: BTreeMap<Name, usize>,
    next_atom: AtomId,
}

impl ParamTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh_family(&mut self, name: impl Into<Name>, n_qubits: usize) -> &Family {
        let name = name.into();
        debug_assert!(!self.by_name.contains_key(&name), "duplicate family {name}");
        let dim = 1usize << n_qubits;
        let atoms: Vec<AtomId> = (0..dim).map(|i| self.next_atom + i as AtomId).collect();
        self.next_atom += dim as AtomId;
        self.by_name.insert(name.clone(), self.families.len());
        self.families.push(Family { name, n_qubits, atoms });
        self.families.last().unwrap()
    }

    pub fn family(&self, name: &str) -> Option<&Family> {
        self.by_name.get(name).map(|&i| &self.families[i])
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn atom_count(&self) -> usize {
        self.next_atom as usize
    }

    /// Display name of an atom: family name with the basis index appended
    /// when the family spans more than one component.
    pub fn atom_name(&self, atom: AtomId) -> String {
        for f in &self.families {
            if let Some(i) = f.atoms.iter().position(|&a| a == atom) {
                return if f.atoms.len() == 1 {
                    f.name.clone()
                } else {
                    format!("{}{}", f.name, i)
                };
            }
        }
        format!("p{atom}")
    }
}

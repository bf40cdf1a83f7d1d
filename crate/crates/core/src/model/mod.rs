//! Chemical reaction networks: complexes, irreversible reactions and the
//! structural predicates used throughout the crate.
//!
//! Species and reactions carry stable indices fixed by insertion order.
//! Reversible reactions are always stored as two irreversible reactions.

mod stoich;
mod text;

pub use stoich::{
    basis_factorization, in_span, integer_rank, left_null_space, stoich_matrices,
    BasisFactorization, StoichMatrices,
};
pub use text::{parse_crn, parse_many, print_crn, print_many};

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CrnError, Result};

/// A formal nonnegative integer combination of species.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Complex(Vec<u32>);

impl Complex {
    pub fn new(stoich: Vec<u32>) -> Self {
        Complex(stoich)
    }

    pub fn zero(n: usize) -> Self {
        Complex(vec![0; n])
    }

    /// The complex consisting of one molecule of species `i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Complex(v)
    }

    pub fn stoich(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// Total molecularity.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Index of the species if this complex is a single molecule.
    pub fn single_species(&self) -> Option<usize> {
        if self.order() == 1 {
            self.0.iter().position(|&a| a == 1)
        } else {
            None
        }
    }

    pub fn is_at_most_bimolecular(&self) -> bool {
        self.order() <= 2
    }

    /// Relabel species: species `i` of `self` becomes species `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut v = vec![0; self.0.len()];
        for (i, &a) in self.0.iter().enumerate() {
            v[perm[i]] = a;
        }
        Complex(v)
    }

    /// Restriction to a subset of species, in the order given.
    pub fn restricted(&self, species: &[usize]) -> Self {
        Complex(species.iter().map(|&i| self.0[i]).collect())
    }

    pub fn with_appended(&self, a: u32) -> Self {
        let mut v = self.0.clone();
        v.push(a);
        Complex(v)
    }
}

/// An irreversible reaction between two distinct complexes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Reaction {
    source: Complex,
    target: Complex,
}

impl Reaction {
    pub fn new(source: Complex, target: Complex) -> Result<Self> {
        if source.len() != target.len() {
            return Err(CrnError::LengthMismatch {
                expected: source.len(),
                got: target.len(),
            });
        }
        if source == target {
            return Err(CrnError::TrivialReaction);
        }
        Ok(Reaction { source, target })
    }

    pub fn from_stoich(source: &[u32], target: &[u32]) -> Result<Self> {
        Self::new(Complex::new(source.to_vec()), Complex::new(target.to_vec()))
    }

    pub fn inflow(n: usize, i: usize) -> Self {
        Reaction {
            source: Complex::zero(n),
            target: Complex::unit(n, i),
        }
    }

    pub fn outflow(n: usize, i: usize) -> Self {
        Reaction {
            source: Complex::unit(n, i),
            target: Complex::zero(n),
        }
    }

    pub fn source(&self) -> &Complex {
        &self.source
    }

    pub fn target(&self) -> &Complex {
        &self.target
    }

    pub fn n_species(&self) -> usize {
        self.source.len()
    }

    /// `0 -> X` or `X -> 0`. Reactions such as `2X -> 0` are non-flow.
    pub fn is_flow(&self) -> bool {
        (self.source.is_zero() && self.target.single_species().is_some())
            || (self.target.is_zero() && self.source.single_species().is_some())
    }

    pub fn is_at_most_bimolecular(&self) -> bool {
        self.source.is_at_most_bimolecular() && self.target.is_at_most_bimolecular()
    }

    /// Net stoichiometric change (the reaction vector).
    pub fn reaction_vector(&self) -> Vec<i64> {
        self.source
            .stoich()
            .iter()
            .zip(self.target.stoich())
            .map(|(&s, &t)| t as i64 - s as i64)
            .collect()
    }

    pub fn reversed(&self) -> Self {
        Reaction {
            source: self.target.clone(),
            target: self.source.clone(),
        }
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Reaction {
            source: self.source.permuted(perm),
            target: self.target.permuted(perm),
        }
    }
}

/// A chemical reaction network: a species count and an ordered list of
/// pairwise distinct irreversible reactions.
///
/// Species taking part in no reaction are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Crn {
    n_species: usize,
    reactions: Vec<Reaction>,
}

impl Crn {
    pub fn new(n_species: usize, reactions: Vec<Reaction>) -> Result<Self> {
        if n_species == 0 {
            return Err(CrnError::NoSpecies);
        }
        let mut seen = HashSet::with_capacity(reactions.len());
        for r in &reactions {
            if r.n_species() != n_species {
                return Err(CrnError::LengthMismatch {
                    expected: n_species,
                    got: r.n_species(),
                });
            }
            if !seen.insert(r) {
                return Err(CrnError::DuplicateReaction(
                    r.display_with(&default_names(n_species)),
                ));
            }
        }
        Ok(Crn {
            n_species,
            reactions,
        })
    }

    /// Build from `(source, target)` stoichiometry pairs.
    pub fn from_pairs(n_species: usize, pairs: &[(&[u32], &[u32])]) -> Result<Self> {
        let reactions = pairs
            .iter()
            .map(|(s, t)| Reaction::from_stoich(s, t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_species, reactions)
    }

    pub fn empty(n_species: usize) -> Result<Self> {
        Self::new(n_species, Vec::new())
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn contains(&self, r: &Reaction) -> bool {
        self.reactions.contains(r)
    }

    pub fn position(&self, r: &Reaction) -> Option<usize> {
        self.reactions.iter().position(|q| q == r)
    }

    /// Append a reaction; fails if it is already present.
    pub fn with_reaction(&self, r: Reaction) -> Result<Self> {
        let mut reactions = self.reactions.clone();
        reactions.push(r);
        Self::new(self.n_species, reactions)
    }

    pub fn is_fully_open(&self) -> bool {
        (0..self.n_species).all(|i| {
            self.contains(&Reaction::inflow(self.n_species, i))
                && self.contains(&Reaction::outflow(self.n_species, i))
        })
    }

    pub fn is_bimolecular(&self) -> bool {
        self.reactions.iter().all(Reaction::is_at_most_bimolecular)
    }

    /// The smallest fully open network containing every reaction of `self`.
    /// Missing flows are appended in species order, outflow before inflow.
    pub fn fully_open_extension(&self) -> Self {
        let n = self.n_species;
        let mut reactions = self.reactions.clone();
        for i in 0..n {
            for r in [Reaction::outflow(n, i), Reaction::inflow(n, i)] {
                if !reactions.contains(&r) {
                    reactions.push(r);
                }
            }
        }
        Crn {
            n_species: n,
            reactions,
        }
    }

    /// The non-flow reactions, in their original order.
    pub fn core(&self) -> Self {
        Crn {
            n_species: self.n_species,
            reactions: self
                .reactions
                .iter()
                .filter(|r| !r.is_flow())
                .cloned()
                .collect(),
        }
    }

    pub fn non_flow_count(&self) -> usize {
        self.reactions.iter().filter(|r| !r.is_flow()).count()
    }

    /// Relabel species by `species_perm` (old index -> new index) and reorder
    /// reactions so that new reaction `j` is old reaction `reaction_order[j]`.
    pub fn relabeled(&self, species_perm: &[usize], reaction_order: &[usize]) -> Self {
        Crn {
            n_species: self.n_species,
            reactions: reaction_order
                .iter()
                .map(|&j| self.reactions[j].permuted(species_perm))
                .collect(),
        }
    }

    /// Network with a new species appended, entering reaction `j` with
    /// stoichiometry `left[j]` on the source side and `right[j]` on the target side.
    pub fn with_new_species(&self, left: &[u32], right: &[u32]) -> Result<Self> {
        let m = self.reactions.len();
        if left.len() != m {
            return Err(CrnError::LengthMismatch {
                expected: m,
                got: left.len(),
            });
        }
        if right.len() != m {
            return Err(CrnError::LengthMismatch {
                expected: m,
                got: right.len(),
            });
        }
        let reactions = self
            .reactions
            .iter()
            .zip(left.iter().zip(right))
            .map(|(r, (&a, &b))| {
                Reaction::new(r.source.with_appended(a), r.target.with_appended(b))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.n_species + 1, reactions)
    }

    /// Source-side stoichiometry matrix entry (Γl)ᵢⱼ.
    pub fn left(&self, i: usize, j: usize) -> u32 {
        self.reactions[j].source.get(i)
    }

    /// Target-side stoichiometry matrix entry (Γr)ᵢⱼ.
    pub fn right(&self, i: usize, j: usize) -> u32 {
        self.reactions[j].target.get(i)
    }

    pub fn display_with(&self, names: &[String]) -> String {
        self.reactions
            .iter()
            .map(|r| r.display_with(names))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for Crn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&default_names(self.n_species)))
    }
}

/// Species names `X1..Xn` used by the text format.
pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("X{i}")).collect()
}

impl Complex {
    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, &a)| {
                if a == 1 {
                    names[i].clone()
                } else {
                    format!("{a} {}", names[i])
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl Reaction {
    pub fn display_with(&self, names: &[String]) -> String {
        format!(
            "{} -> {}",
            self.source.display_with(names),
            self.target.display_with(names)
        )
    }
}

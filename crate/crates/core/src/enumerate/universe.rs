use std::collections::HashMap;

use crate::model::{Complex, Crn, Reaction};

/// The at most bimolecular complexes and non-flow reactions on `k` species,
/// with the action of every species permutation on reaction indices.
///
/// Complexes are ordered lexicographically by stoichiometry vector and
/// reactions by (source index, target index).
#[derive(Clone, Debug)]
pub struct Universe {
    k: usize,
    complexes: Vec<Complex>,
    reactions: Vec<Reaction>,
    index: HashMap<Reaction, u16>,
    perms: Vec<Vec<usize>>,
    /// `actions[p][r]` is the image of reaction `r` under `perms[p]`;
    /// `actions[0]` is the identity.
    actions: Vec<Vec<u16>>,
}

impl Universe {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "at least one species");
        let mut complexes: Vec<Complex> = Vec::new();
        for i in 0..k {
            for j in i..k {
                let mut v = vec![0; k];
                v[i] += 1;
                v[j] += 1;
                complexes.push(Complex::new(v));
            }
            complexes.push(Complex::unit(k, i));
        }
        complexes.push(Complex::zero(k));
        complexes.sort();
        let mut reactions = Vec::new();
        for s in &complexes {
            for t in &complexes {
                if s != t {
                    let r = Reaction::new(s.clone(), t.clone()).expect("distinct complexes");
                    if !r.is_flow() {
                        reactions.push(r);
                    }
                }
            }
        }
        let index: HashMap<Reaction, u16> = reactions
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), i as u16))
            .collect();
        let perms = permutations(k);
        let actions = perms
            .iter()
            .map(|p| reactions.iter().map(|r| index[&r.permuted(p)]).collect())
            .collect();
        Universe {
            k,
            complexes,
            reactions,
            index,
            perms,
            actions,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn complexes(&self) -> &[Complex] {
        &self.complexes
    }

    pub fn reaction(&self, i: usize) -> &Reaction {
        &self.reactions[i]
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn index_of(&self, r: &Reaction) -> Option<u16> {
        self.index.get(r).copied()
    }

    pub fn permutations(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn actions(&self) -> &[Vec<u16>] {
        &self.actions
    }

    /// The core network with the given reactions, in the given order.
    pub fn core(&self, set: &[u16]) -> Crn {
        Crn::new(
            self.k,
            set.iter()
                .map(|&r| self.reactions[r as usize].clone())
                .collect(),
        )
        .expect("distinct reaction indices")
    }

    /// Reaction indices of the non-flow reactions of `crn`, sorted, or `None`
    /// if the species count differs or a reaction is not at most bimolecular.
    pub fn indices_of(&self, crn: &Crn) -> Option<Vec<u16>> {
        if crn.n_species() != self.k {
            return None;
        }
        let mut v = crn
            .reactions()
            .iter()
            .filter(|r| !r.is_flow())
            .map(|r| self.index_of(r))
            .collect::<Option<Vec<u16>>>()?;
        v.sort_unstable();
        Some(v)
    }

    /// Whether the sorted set is the least element of its orbit.
    pub fn is_orbit_min(&self, set: &[u16]) -> bool {
        let mut buf: Vec<u16> = Vec::with_capacity(set.len());
        for act in &self.actions[1..] {
            buf.clear();
            buf.extend(set.iter().map(|&r| act[r as usize]));
            buf.sort_unstable();
            if buf.as_slice() < set {
                return false;
            }
        }
        true
    }

    /// Least element of the orbit of a sorted set: a normal form for
    /// isomorphism classes of fully open networks on `k` species.
    pub fn normal_form(&self, set: &[u16]) -> Vec<u16> {
        let mut best = set.to_vec();
        let mut buf: Vec<u16> = Vec::with_capacity(set.len());
        for act in &self.actions[1..] {
            buf.clear();
            buf.extend(set.iter().map(|&r| act[r as usize]));
            buf.sort_unstable();
            if buf < best {
                best.clone_from(&buf);
            }
        }
        best
    }

    /// Size of the orbit of a sorted set.
    pub fn orbit_size(&self, set: &[u16]) -> usize {
        let mut images: Vec<Vec<u16>> = self
            .actions
            .iter()
            .map(|act| {
                let mut b: Vec<u16> = set.iter().map(|&r| act[r as usize]).collect();
                b.sort_unstable();
                b
            })
            .collect();
        images.sort();
        images.dedup();
        images.len()
    }

    /// Whether some species permutation maps every reaction of `small` into `big`.
    /// For equal species counts this is induced containment of fully open networks.
    pub fn contains_permuted(&self, big: &[u16], small: &[u16]) -> bool {
        self.actions.iter().any(|act| {
            small
                .iter()
                .all(|&r| big.binary_search(&act[r as usize]).is_ok())
        })
    }
}

/// All permutations of `0..k`, identity first.
fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::with_capacity(k);
    let mut used = vec![false; k];
    fn rec(k: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(k, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(k, &mut cur, &mut used, &mut out);
    out
}

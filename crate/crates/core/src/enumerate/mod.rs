//! Nonisomorphic fully open, at most bimolecular (k,l) networks.
//!
//! Two fully open networks are isomorphic exactly when their non-flow cores
//! are, and for cores built from the full list of bimolecular non-flow
//! reactions on `k` species an isomorphism is a species permutation. The
//! isomorphism classes are therefore the orbits of `S_k` acting on
//! `l`-subsets of reaction indices. Each orbit is emitted once, as its
//! lexicographically least sorted index tuple (orderly generation: every
//! prefix of an orbit-least tuple is itself orbit-least, so non-least
//! prefixes are pruned).

mod universe;

pub use universe::Universe;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::{canonical_key, CanonicalKey, KeyStore};
use crate::error::{CrnError, Result};
use crate::model::Crn;

/// Largest species count accepted by [`EnumSpec`].
pub const MAX_SPECIES: usize = 6;

/// Default refusal threshold on the labeled count C(n_R(k), l).
pub const DEFAULT_CEILING: u128 = 1_000_000_000;

pub fn n_complexes(k: usize) -> usize {
    (k + 2) * (k + 1) / 2
}

pub fn n_nonflow_reactions(k: usize) -> usize {
    let c = n_complexes(k);
    c * (c - 1) - 2 * k
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnumSpec {
    pub k: usize,
    pub l: usize,
}

impl EnumSpec {
    pub fn new(k: usize, l: usize) -> Result<Self> {
        if k == 0 || k > MAX_SPECIES {
            return Err(CrnError::InvalidSpec(format!(
                "species count {k} outside 1..={MAX_SPECIES}"
            )));
        }
        let n_r = n_nonflow_reactions(k);
        if l > n_r {
            return Err(CrnError::InvalidSpec(format!(
                "{l} reactions exceeds n_R({k}) = {n_r}"
            )));
        }
        Ok(EnumSpec { k, l })
    }

    /// Number of labeled-species cores, C(n_R(k), l).
    pub fn labeled_count(&self) -> BigUint {
        binomial(n_nonflow_reactions(self.k), self.l)
    }

    fn check_ceiling(&self, ceiling: u128) -> Result<()> {
        let labeled = self.labeled_count().to_u128().unwrap_or(u128::MAX);
        if labeled > ceiling {
            return Err(CrnError::ResourceGuard { labeled, ceiling });
        }
        Ok(())
    }
}

/// Orbit representatives, stored flat: `l` reaction indices per network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cores {
    pub spec: EnumSpec,
    flat: Vec<u16>,
}

impl Cores {
    pub fn len(&self) -> usize {
        if self.spec.l == 0 {
            self.flat.len()
        } else {
            self.flat.len() / self.spec.l
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> &[u16] {
        let l = self.spec.l;
        assert!(i < self.len(), "core index {i} out of range");
        &self.flat[i * l..(i + 1) * l]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u16]> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }
}

/// All orbit representatives for `spec`, in increasing lexicographic order.
pub fn enumerate_cores(spec: EnumSpec, ceiling: u128) -> Result<Cores> {
    spec.check_ceiling(ceiling)?;
    let u = Universe::new(spec.k);
    let l = spec.l;
    if l == 0 {
        // One network, the empty core, recorded by a single placeholder entry.
        return Ok(Cores {
            spec,
            flat: vec![0],
        });
    }
    let n_r = u.n_reactions();
    let chunks: Vec<Vec<u16>> = (0..n_r)
        .into_par_iter()
        .map(|r0| {
            let mut out = Vec::new();
            let mut prefix = vec![r0 as u16];
            if u.is_orbit_min(&prefix) {
                extend(&u, &mut prefix, l, &mut out);
            }
            out
        })
        .collect();
    Ok(Cores {
        spec,
        flat: chunks.concat(),
    })
}

fn extend(u: &Universe, prefix: &mut Vec<u16>, l: usize, out: &mut Vec<u16>) {
    if prefix.len() == l {
        out.extend_from_slice(prefix);
        return;
    }
    let n_r = u.n_reactions();
    let start = *prefix.last().expect("non-empty prefix") as usize + 1;
    let need = l - prefix.len();
    for r in start..n_r {
        if n_r - r < need {
            break;
        }
        prefix.push(r as u16);
        if u.is_orbit_min(prefix) {
            extend(u, prefix, l, out);
        }
        prefix.pop();
    }
}

/// Every class as (core network, canonical key of the core).
pub fn enumerate_crns(spec: EnumSpec, ceiling: u128) -> Result<Vec<(Crn, CanonicalKey)>> {
    let cores = enumerate_cores(spec, ceiling)?;
    let u = Universe::new(spec.k);
    let idx: Vec<usize> = (0..cores.len()).collect();
    Ok(idx
        .into_par_iter()
        .map(|i| {
            let crn = u.core(cores.get(i));
            let key = canonical_key(&crn);
            (crn, key)
        })
        .collect())
}

pub fn count_crns(spec: EnumSpec, ceiling: u128) -> Result<u64> {
    spec.check_ceiling(ceiling)?;
    if spec.l == 0 {
        return Ok(1);
    }
    let u = Universe::new(spec.k);
    let l = spec.l;
    Ok((0..u.n_reactions())
        .into_par_iter()
        .map(|r0| {
            let mut prefix = vec![r0 as u16];
            if u.is_orbit_min(&prefix) {
                count_extensions(&u, &mut prefix, l)
            } else {
                0
            }
        })
        .sum())
}

fn count_extensions(u: &Universe, prefix: &mut Vec<u16>, l: usize) -> u64 {
    if prefix.len() == l {
        return 1;
    }
    let n_r = u.n_reactions();
    let start = *prefix.last().expect("non-empty prefix") as usize + 1;
    let need = l - prefix.len();
    let mut total = 0;
    for r in start..n_r {
        if n_r - r < need {
            break;
        }
        prefix.push(r as u16);
        if u.is_orbit_min(prefix) {
            total += count_extensions(u, prefix, l);
        }
        prefix.pop();
    }
    total
}

/// Independent check: build every labeled core, canonicalize its Petri-net
/// graph and count distinct keys. Exponential in `l`; for small specs.
pub fn count_by_key_dedup(spec: EnumSpec, ceiling: u128) -> Result<usize> {
    spec.check_ceiling(ceiling)?;
    let u = Universe::new(spec.k);
    let store = KeyStore::new();
    let n_r = u.n_reactions();
    (0..n_r.max(1)).into_par_iter().for_each(|r0| {
        if spec.l == 0 {
            if r0 == 0 {
                store.insert(canonical_key(&u.core(&[])));
            }
            return;
        }
        let mut set = vec![r0 as u16];
        for_each_superset(n_r, &mut set, spec.l, &mut |s| {
            store.insert(canonical_key(&u.core(s)));
        });
    });
    Ok(store.len())
}

fn for_each_superset(n_r: usize, set: &mut Vec<u16>, l: usize, f: &mut impl FnMut(&[u16])) {
    if set.len() == l {
        f(set);
        return;
    }
    let start = *set.last().unwrap() as usize + 1;
    for r in start..n_r {
        set.push(r as u16);
        for_each_superset(n_r, set, l, f);
        set.pop();
    }
}

/// Number of `S_k`-orbits on `l`-subsets of the non-flow reactions, for
/// every `l = 0..=n_R(k)`, by Burnside's lemma: average over permutations of
/// the number of fixed subsets, read off ∏ over reaction cycles of (1 + t^len).
pub fn burnside_counts(k: usize) -> Vec<BigUint> {
    let u = Universe::new(k);
    let n_r = u.n_reactions();
    let mut total = vec![BigUint::zero(); n_r + 1];
    for action in u.actions() {
        let mut seen = vec![false; n_r];
        let mut poly = vec![BigUint::zero(); n_r + 1];
        poly[0] = BigUint::one();
        let mut degree = 0;
        for start in 0..n_r {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut r = start;
            while !seen[r] {
                seen[r] = true;
                r = action[r] as usize;
                len += 1;
            }
            for d in (0..=degree).rev() {
                if !poly[d].is_zero() {
                    let v = poly[d].clone();
                    poly[d + len] += v;
                }
            }
            degree += len;
        }
        for (t, p) in total.iter_mut().zip(poly) {
            *t += p;
        }
    }
    let order = BigUint::from(u.actions().len());
    total.into_iter().map(|t| t / &order).collect()
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Two-species census: per `l`, the Burnside count and the count of
/// orbit-least reaction masks found by scanning all 2^26 labeled cores.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoSpeciesCensus {
    pub burnside: Vec<u64>,
    pub exhaustive: Vec<u64>,
    /// Classes satisfying the scan predicate, per `l`.
    pub matching: Vec<u64>,
}

impl TwoSpeciesCensus {
    /// Total over `l = 1..=26`.
    pub fn total(&self) -> u64 {
        self.exhaustive[1..].iter().sum()
    }

    pub fn total_matching(&self) -> u64 {
        self.matching[1..].iter().sum()
    }

    pub fn agrees(&self) -> bool {
        self.burnside == self.exhaustive
    }
}

/// Scan every labeled two-species core once. A mask is a class
/// representative when it is not larger than its image under the species
/// swap; `predicate` is evaluated on representatives only.
pub fn two_species_census<P>(predicate: P) -> TwoSpeciesCensus
where
    P: Fn(u32) -> bool + Sync,
{
    let u = Universe::new(2);
    let n_r = u.n_reactions();
    let swap = &u.actions()[1];
    // Byte lookup tables for the swap image of a mask.
    let tables: Vec<[u32; 256]> = (0..n_r.div_ceil(8))
        .map(|b| {
            let mut t = [0u32; 256];
            for (byte, slot) in t.iter_mut().enumerate() {
                for bit in 0..8 {
                    let r = 8 * b + bit;
                    if r < n_r && byte & (1 << bit) != 0 {
                        *slot |= 1 << swap[r];
                    }
                }
            }
            t
        })
        .collect();
    let swapped = |m: u32| -> u32 {
        tables
            .iter()
            .enumerate()
            .fold(0, |acc, (b, t)| acc | t[((m >> (8 * b)) & 0xff) as usize])
    };
    const CHUNK: u32 = 1 << 16;
    let limit: u64 = 1 << n_r;
    let n_chunks = (limit / CHUNK as u64) as u32;
    let (exhaustive, matching) = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut ex = vec![0u64; n_r + 1];
            let mut mt = vec![0u64; n_r + 1];
            for m in c * CHUNK..(c + 1) * CHUNK {
                if m <= swapped(m) {
                    let l = m.count_ones() as usize;
                    ex[l] += 1;
                    if predicate(m) {
                        mt[l] += 1;
                    }
                }
            }
            (ex, mt)
        })
        .reduce(
            || (vec![0; n_r + 1], vec![0; n_r + 1]),
            |(mut a, mut b), (c, d)| {
                for i in 0..=n_r {
                    a[i] += c[i];
                    b[i] += d[i];
                }
                (a, b)
            },
        );
    let burnside = burnside_counts(2)
        .iter()
        .map(|b| b.to_u64().expect("fits"))
        .collect();
    TwoSpeciesCensus {
        burnside,
        exhaustive,
        matching,
    }
}

/// Total nonisomorphic (2,l) networks over `l = 1..=26`, checked against
/// the Burnside oracle.
pub fn count_all_2species() -> Result<u64> {
    let census = two_species_census(|_| false);
    if !census.agrees() {
        return Err(CrnError::Invalid(
            "Burnside and exhaustive two-species counts differ".into(),
        ));
    }
    Ok(census.total())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas() {
        assert_eq!(n_complexes(1), 3);
        assert_eq!(n_complexes(2), 6);
        assert_eq!(n_complexes(3), 10);
        assert_eq!(n_nonflow_reactions(2), 26);
        assert_eq!(n_nonflow_reactions(3), 84);
        assert_eq!(n_nonflow_reactions(4), 202);
    }

    #[test]
    fn spec_validation() {
        assert!(EnumSpec::new(0, 1).is_err());
        assert!(EnumSpec::new(7, 1).is_err());
        assert!(EnumSpec::new(2, 27).is_err());
        assert!(EnumSpec::new(2, 26).is_ok());
    }

    #[test]
    fn resource_guard() {
        let spec = EnumSpec::new(4, 4).unwrap();
        assert!(matches!(
            count_crns(spec, 1000),
            Err(CrnError::ResourceGuard { .. })
        ));
    }

    #[test]
    fn small_counts() {
        for (k, l, want) in [(2, 1, 14), (3, 1, 19), (4, 1, 20), (2, 2, 169), (1, 1, 4)] {
            let spec = EnumSpec::new(k, l).unwrap();
            assert_eq!(
                count_crns(spec, DEFAULT_CEILING).unwrap(),
                want,
                "({k},{l})"
            );
            assert_eq!(
                enumerate_cores(spec, DEFAULT_CEILING).unwrap().len() as u64,
                want
            );
        }
    }

    #[test]
    fn zero_reactions() {
        let spec = EnumSpec::new(3, 0).unwrap();
        assert_eq!(count_crns(spec, DEFAULT_CEILING).unwrap(), 1);
        let crns = enumerate_crns(spec, DEFAULT_CEILING).unwrap();
        assert_eq!(crns.len(), 1);
        assert_eq!(crns[0].0.n_reactions(), 0);
    }

    #[test]
    fn burnside_small() {
        let b = burnside_counts(2);
        assert_eq!(b[0], BigUint::one());
        assert_eq!(b[1], BigUint::from(14u32));
        assert_eq!(b[26], BigUint::one());
        assert_eq!(burnside_counts(3)[2], BigUint::from(622u32));
    }

    #[test]
    fn keys_are_distinct() {
        let spec = EnumSpec::new(2, 2).unwrap();
        let crns = enumerate_crns(spec, DEFAULT_CEILING).unwrap();
        let mut keys: Vec<_> = crns.iter().map(|(_, k)| k.clone()).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 169);
        assert!(crns
            .iter()
            .all(|(c, _)| c.is_bimolecular() && c.non_flow_count() == c.n_reactions()));
    }

    #[test]
    fn key_dedup_agrees_with_orbits() {
        for (k, l) in [(2, 1), (2, 2), (3, 1), (1, 2)] {
            let spec = EnumSpec::new(k, l).unwrap();
            assert_eq!(
                count_by_key_dedup(spec, DEFAULT_CEILING).unwrap() as u64,
                count_crns(spec, DEFAULT_CEILING).unwrap()
            );
        }
    }
}

//! Network transformations that carry oscillation over to larger networks,
//! the closure procedure over enumerated cores, atoms and motif counts.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canon::{contains_fully_open, contains_induced, core_key, CanonicalKey};
use crate::dynamics::{
    analyze_orbit, integrate, sample_orbit, IntegratorConfig, OrbitConfig, OrbitRecord,
    PeriodicOrbit, TrajectoryStatus,
};
use crate::enumerate::{enumerate_cores, two_species_census, EnumSpec, Universe, DEFAULT_CEILING};
use crate::error::{CrnError, Result};
use crate::kinetics::{KineticsClass, KineticsSpec, VectorField};
use crate::model::{in_span, stoich_matrices, Crn, Reaction};

pub const CLOSURE_SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Transformation {
    /// A reaction whose vector lies in the span of the existing ones, with
    /// rate constant ε and exponents equal to its source stoichiometry.
    AddDependentReaction { reaction: Reaction, epsilon: f64 },
    /// 0 ⇌ Xᵢ for every species, inflow ε·x0ᵢ and outflow ε·xᵢ. Existing
    /// mass action flows have these constants added to theirs.
    AddAllFlows { epsilon: f64, anchor: Vec<f64> },
    /// A new species with stoichiometry `stoich[j]` on both sides of reaction j.
    AddTrivialSpecies { stoich: Vec<u32> },
    /// A new species Y entering reaction j as `left[j]` / `right[j]`, plus
    /// 0 ⇌ Y with both constants 1/ε.
    AddSpeciesWithFlow {
        left: Vec<u32>,
        right: Vec<u32>,
        epsilon: f64,
    },
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(CrnError::NonPositive(eps))
    }
}

fn check_len(v: usize, m: usize) -> Result<()> {
    if v == m {
        Ok(())
    } else {
        Err(CrnError::LengthMismatch {
            expected: m,
            got: v,
        })
    }
}

/// Apply a transformation to a network with kinetics. New species are
/// appended after the existing ones; new reactions after the existing ones.
pub fn apply(t: &Transformation, crn: &Crn, spec: &KineticsSpec) -> Result<(Crn, KineticsSpec)> {
    spec.validate(crn)?;
    let n = crn.n_species();
    let m = crn.n_reactions();
    let mut k = spec.k.clone();
    let mut mm = spec.m.clone();
    let out = match t {
        Transformation::AddDependentReaction { reaction, epsilon } => {
            check_eps(*epsilon)?;
            check_len(reaction.n_species(), n)?;
            if !in_span(&stoich_matrices(crn), &reaction.reaction_vector())? {
                return Err(CrnError::NotInSpan);
            }
            let big = crn.with_reaction(reaction.clone())?;
            k.push(*epsilon);
            mm.push(
                reaction
                    .source()
                    .stoich()
                    .iter()
                    .map(|&a| a as f64)
                    .collect(),
            );
            big
        }
        Transformation::AddAllFlows { epsilon, anchor } => {
            check_eps(*epsilon)?;
            check_len(anchor.len(), n)?;
            if let Some(&bad) = anchor.iter().find(|&&a| !(a > 0.0 && a.is_finite())) {
                return Err(CrnError::NonPositive(bad));
            }
            let mut big = crn.clone();
            for i in 0..n {
                let out_r = Reaction::outflow(n, i);
                match big.position(&out_r) {
                    Some(j) if spec.is_mass_action_row(crn, j) => k[j] += epsilon,
                    Some(_) => {
                        return Err(CrnError::FlowConflict(format!(
                            "outflow of species {} is not mass action",
                            i + 1
                        )))
                    }
                    None => {
                        big = big.with_reaction(out_r)?;
                        k.push(*epsilon);
                        let mut row = vec![0.0; n];
                        row[i] = 1.0;
                        mm.push(row);
                    }
                }
                let in_r = Reaction::inflow(n, i);
                match big.position(&in_r) {
                    Some(j) => k[j] += epsilon * anchor[i],
                    None => {
                        big = big.with_reaction(in_r)?;
                        k.push(epsilon * anchor[i]);
                        mm.push(vec![0.0; n]);
                    }
                }
            }
            big
        }
        Transformation::AddTrivialSpecies { stoich } => {
            check_len(stoich.len(), m)?;
            let big = crn.with_new_species(stoich, stoich)?;
            for (row, &s) in mm.iter_mut().zip(stoich) {
                row.push(s as f64);
            }
            big
        }
        Transformation::AddSpeciesWithFlow {
            left,
            right,
            epsilon,
        } => {
            check_eps(*epsilon)?;
            check_len(left.len(), m)?;
            check_len(right.len(), m)?;
            let mut big = crn.with_new_species(left, right)?;
            for (row, &s) in mm.iter_mut().zip(left) {
                row.push(s as f64);
            }
            big = big.with_reaction(Reaction::outflow(n + 1, n))?;
            big = big.with_reaction(Reaction::inflow(n + 1, n))?;
            k.push(1.0 / epsilon);
            k.push(1.0 / epsilon);
            let mut row = vec![0.0; n + 1];
            row[n] = 1.0;
            mm.push(row);
            mm.push(vec![0.0; n + 1]);
            big
        }
    };
    let new_spec = KineticsSpec {
        class: spec.class,
        k,
        m: mm,
        seed: spec.seed,
    };
    new_spec.validate(&out)?;
    Ok((out, new_spec))
}

/// Image of a state of the original network in the extended one: added
/// species start at concentration 1.
pub fn lift_point(t: &Transformation, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    if matches!(
        t,
        Transformation::AddTrivialSpecies { .. } | Transformation::AddSpeciesWithFlow { .. }
    ) {
        y.push(1.0);
    }
    y
}

pub const DEFAULT_EPS_GRID: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonStep {
    pub epsilon: f64,
    pub record: OrbitRecord,
    /// Hausdorff distance between the extended orbit, projected onto the
    /// original species, and the original orbit.
    pub distance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSearch {
    pub steps: Vec<EpsilonStep>,
    /// Smallest grid value whose orbit was certified.
    pub epsilon_star: Option<f64>,
}

impl EpsilonSearch {
    pub fn best(&self) -> Option<&EpsilonStep> {
        let e = self.epsilon_star?;
        self.steps.iter().find(|s| s.epsilon == e)
    }
}

pub const ORBIT_SAMPLES: usize = 2000;

fn orbit_samples(
    vf: &VectorField,
    point: &[f64],
    period: f64,
    cfg: &OrbitConfig,
    dims: usize,
) -> Result<Vec<Vec<f64>>> {
    Ok(sample_orbit(vf, point, period, ORBIT_SAMPLES, &cfg.integ)?
        .into_iter()
        .map(|mut x| {
            x.truncate(dims);
            x
        })
        .collect())
}

pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let d = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let one_way = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        a.par_iter()
            .map(|x| b.iter().map(|y| d(x, y)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Walk the ε grid in the given order, locating and certifying an orbit of
/// each extended network. The first seed is the lifted original orbit
/// point; later ones warm-start from the last certified orbit.
/// Transient integrated from the lifted seed before shooting, in base periods.
pub const SETTLE_PERIODS: f64 = 100.0;

// The lifted point can sit far from the perturbed cycle when the new
// variables relax slowly; shooting from the end of a transient is more robust.
fn settle(vf: &VectorField, seed: Vec<f64>, time: f64) -> Vec<f64> {
    let traj = integrate(
        vf,
        &seed,
        &IntegratorConfig::screening().with_max_time(time),
    );
    match (traj.status, traj.last_state()) {
        (TrajectoryStatus::Completed | TrajectoryStatus::SteadyState, Some(x)) => x.to_vec(),
        _ => seed,
    }
}

pub fn epsilon_search(
    base: &VectorField,
    orbit: &PeriodicOrbit,
    family: impl Fn(f64) -> Result<Transformation>,
    grid: &[f64],
    cfg: &OrbitConfig,
) -> Result<EpsilonSearch> {
    let dims = base.n_species();
    let reference = orbit_samples(base, &orbit.point, orbit.period, cfg, dims)?;
    let mut steps = Vec::new();
    let mut warm: Option<Vec<f64>> = None;
    let mut epsilon_star = None;
    for &eps in grid {
        let t = family(eps)?;
        let (crn, spec) = apply(&t, base.crn(), base.spec())?;
        let vf = VectorField::new(&crn, &spec)?;
        let seed = warm.clone().unwrap_or_else(|| lift_point(&t, &orbit.point));
        let seed = settle(&vf, seed, SETTLE_PERIODS * orbit.period);
        let record = analyze_orbit(&vf, &seed, cfg)?;
        let distance = if record.is_certified() {
            warm = Some(record.point.clone());
            epsilon_star = Some(epsilon_star.map_or(eps, |e: f64| e.min(eps)));
            Some(hausdorff(
                &orbit_samples(&vf, &record.point, record.period, cfg, dims)?,
                &reference,
            ))
        } else {
            None
        };
        steps.push(EpsilonStep {
            epsilon: eps,
            record,
            distance,
        });
    }
    Ok(EpsilonSearch {
        steps,
        epsilon_star,
    })
}

/// Inheritors at one (k, l) cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub schema: u32,
    pub target: (usize, usize),
    /// Canonical keys of the inheritor cores, sorted.
    pub inheritors: Vec<String>,
    /// Inheritor key → least seed key that produced it.
    pub provenance: BTreeMap<String, String>,
}

impl ClosureReport {
    /// The inheritor cores, decoded from their keys.
    pub fn networks(&self) -> Result<Vec<Crn>> {
        self.inheritors
            .iter()
            .map(|k| CanonicalKey::from_hex(k)?.to_crn())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.inheritors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inheritors.is_empty()
    }
}

fn seed_indices(u: &Universe, seed: &Crn, l: usize) -> Result<Vec<u16>> {
    let core = seed.core();
    if core.n_reactions() != l {
        return Err(CrnError::InvalidSpec(format!(
            "seed has {} non-flow reactions, expected {l}",
            core.n_reactions()
        )));
    }
    u.indices_of(&core).ok_or_else(|| {
        CrnError::InvalidSpec(format!(
            "seed `{core}` is not an at most bimolecular network on {} species",
            u.k()
        ))
    })
}

/// Every way of inserting a new last species into the reactions of a core
/// while keeping both sides at most bimolecular, including inserting nothing.
fn species_insertions(core: &Crn) -> Result<Vec<Crn>> {
    let opts: Vec<(u32, u32)> = core
        .reactions()
        .iter()
        .map(|r| (2 - r.source().order(), 2 - r.target().order()))
        .collect();
    let mut out = Vec::new();
    let mut left = vec![0u32; opts.len()];
    let mut right = vec![0u32; opts.len()];
    fn rec(
        j: usize,
        opts: &[(u32, u32)],
        left: &mut [u32],
        right: &mut [u32],
        core: &Crn,
        out: &mut Vec<Crn>,
    ) -> Result<()> {
        if j == opts.len() {
            out.push(core.with_new_species(left, right)?);
            return Ok(());
        }
        for a in 0..=opts[j].0 {
            for b in 0..=opts[j].1 {
                left[j] = a;
                right[j] = b;
                rec(j + 1, opts, left, right, core, out)?;
            }
        }
        Ok(())
    }
    rec(0, &opts, &mut left, &mut right, core, &mut out)?;
    Ok(out)
}

/// One closure step towards `(k, l)`: every new non-flow reaction added to
/// each `(k, l−1)` seed, and the new species inserted in every bimolecular
/// way into each `(k−1, l)` seed. Seeds and inheritors are cores of fully
/// open networks; flows are implicit.
pub fn closure_step(
    add_seeds: &[Crn],
    insert_seeds: &[Crn],
    target: (usize, usize),
) -> Result<ClosureReport> {
    let (k, l) = target;
    EnumSpec::new(k, l)?;
    let u = Universe::new(k);
    let mut found: Vec<(Vec<u16>, String)> = Vec::new();
    if l >= 1 {
        let parts: Vec<Vec<(Vec<u16>, String)>> = add_seeds
            .par_iter()
            .map(|seed| -> Result<Vec<(Vec<u16>, String)>> {
                if seed.n_species() != k {
                    return Err(CrnError::InvalidSpec(format!(
                        "seed has {} species, expected {k}",
                        seed.n_species()
                    )));
                }
                let idx = seed_indices(&u, seed, l - 1)?;
                let key = core_key(seed).to_hex();
                Ok((0..u.n_reactions() as u16)
                    .filter(|r| idx.binary_search(r).is_err())
                    .map(|r| {
                        let mut set = idx.clone();
                        set.push(r);
                        set.sort_unstable();
                        (u.normal_form(&set), key.clone())
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        found.extend(parts.into_iter().flatten());
    }
    if k >= 2 {
        let parts: Vec<Vec<(Vec<u16>, String)>> = insert_seeds
            .par_iter()
            .map(|seed| -> Result<Vec<(Vec<u16>, String)>> {
                if seed.n_species() != k - 1 {
                    return Err(CrnError::InvalidSpec(format!(
                        "seed has {} species, expected {}",
                        seed.n_species(),
                        k - 1
                    )));
                }
                let core = seed.core();
                seed_indices(&Universe::new(k - 1), &core, l)?;
                let key = core_key(seed).to_hex();
                species_insertions(&core)?
                    .iter()
                    .map(|big| {
                        let set = u.indices_of(big).ok_or_else(|| {
                            CrnError::Invalid("insertion left the universe".into())
                        })?;
                        Ok((u.normal_form(&set), key.clone()))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        found.extend(parts.into_iter().flatten());
    }
    let mut witness: BTreeMap<Vec<u16>, String> = BTreeMap::new();
    for (nf, key) in found {
        witness
            .entry(nf)
            .and_modify(|w| {
                if key < *w {
                    *w = key.clone();
                }
            })
            .or_insert(key);
    }
    let provenance: BTreeMap<String, String> = witness
        .into_par_iter()
        .map(|(nf, seed)| (core_key(&u.core(&nf)).to_hex(), seed))
        .collect();
    Ok(ClosureReport {
        schema: CLOSURE_SCHEMA,
        target,
        inheritors: provenance.keys().cloned().collect(),
        provenance,
    })
}

/// Members of an oscillatory catalog that contain no other member as an
/// induced subnetwork (compared as fully open networks).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomSet {
    pub class: KineticsClass,
    pub keys: Vec<String>,
}

pub fn minimal_atoms(class: KineticsClass, catalog: &[Crn]) -> AtomSet {
    let mut seen = HashSet::new();
    let members: Vec<(String, Crn)> = catalog
        .iter()
        .map(|c| (core_key(c).to_hex(), c.fully_open_extension()))
        .filter(|(k, _)| seen.insert(k.clone()))
        .collect();
    let mut keys: Vec<String> = members
        .par_iter()
        .enumerate()
        .filter(|(i, (_, big))| {
            !members.iter().enumerate().any(|(j, (_, small))| {
                j != *i
                    && small.n_species() <= big.n_species()
                    && small.n_reactions() <= big.n_reactions()
                    && contains_induced(big, small)
            })
        })
        .map(|(_, (k, _))| k.clone())
        .collect();
    keys.sort();
    AtomSet { class, keys }
}

/// Whether the fully open extension of `big` contains that of some motif.
pub fn contains_any_motif(big: &Crn, motifs: &[Crn]) -> bool {
    motifs.iter().any(|m| contains_fully_open(big, m))
}

/// Fraction of `population` (cores or fully open networks) containing some motif.
pub fn motif_frequency(motifs: &[Crn], population: &[Crn]) -> f64 {
    if population.is_empty() {
        return 0.0;
    }
    let hits = population
        .par_iter()
        .filter(|p| contains_any_motif(p, motifs))
        .count();
    hits as f64 / population.len() as f64
}

/// Motif containment over the reaction universe on `k` species. For every
/// motif, injective species map φ and motif reaction, the universe reactions
/// whose restriction to φ's image is that reaction are kept as a bit set; a
/// core contains the motif iff for some φ each of those sets meets it.
pub struct MotifMatcher {
    words: usize,
    /// Per (motif, φ): one bit set per motif reaction.
    patterns: Vec<Vec<Vec<u64>>>,
}

impl MotifMatcher {
    pub fn new(u: &Universe, motifs: &[Crn]) -> Self {
        let k = u.k();
        let words = u.n_reactions().div_ceil(64);
        let mut patterns = Vec::new();
        for m in motifs {
            let core = m.core();
            if core.n_species() > k {
                continue;
            }
            for phi in injections(core.n_species(), k) {
                let sets = core
                    .reactions()
                    .iter()
                    .map(|r| {
                        let mut bits = vec![0u64; words];
                        for (j, b) in u.reactions().iter().enumerate() {
                            let hit = phi.iter().enumerate().all(|(i, &p)| {
                                b.source().get(p) == r.source().get(i)
                                    && b.target().get(p) == r.target().get(i)
                            });
                            if hit {
                                bits[j / 64] |= 1 << (j % 64);
                            }
                        }
                        bits
                    })
                    .collect();
                patterns.push(sets);
            }
        }
        MotifMatcher { words, patterns }
    }

    /// Whether the core with these universe reaction indices contains a motif.
    pub fn matches(&self, set: &[u16]) -> bool {
        let mut mask = [0u64; 8];
        for &r in set {
            mask[r as usize / 64] |= 1 << (r % 64);
        }
        let mask = &mask[..self.words];
        self.patterns.iter().any(|sets| {
            sets.iter()
                .all(|bits| bits.iter().zip(mask).any(|(a, b)| a & b != 0))
        })
    }
}

fn injections(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for p in 0..n {
            if !cur.contains(&p) {
                cur.push(p);
                rec(k, n, cur, out);
                cur.pop();
            }
        }
    }
    rec(k, n, &mut cur, &mut out);
    out
}

/// (matching, total) over all nonisomorphic fully open networks at (k, l).
pub fn motif_count_enumerated(motifs: &[Crn], k: usize, l: usize) -> Result<(u64, u64)> {
    let spec = EnumSpec::new(k, l)?;
    let cores = enumerate_cores(spec, DEFAULT_CEILING)?;
    let u = Universe::new(k);
    let matcher = MotifMatcher::new(&u, motifs);
    let hits = (0..cores.len())
        .into_par_iter()
        .filter(|&i| matcher.matches(cores.get(i)))
        .count();
    Ok((hits as u64, cores.len() as u64))
}

/// (matching, total) over all nonisomorphic fully open two-species networks
/// with 1..=26 non-flow reactions. Motifs must have exactly two species; for
/// equal species counts, containment of fully open networks is inclusion of
/// the non-flow reaction sets up to a species permutation.
pub fn motif_count_two_species(motifs: &[Crn]) -> Result<(u64, u64)> {
    let u = Universe::new(2);
    let mut images: Vec<u32> = Vec::new();
    for m in motifs {
        let set = u.indices_of(&m.core()).ok_or_else(|| {
            CrnError::InvalidSpec("motif is not an at most bimolecular two-species network".into())
        })?;
        for act in u.actions() {
            images.push(set.iter().fold(0u32, |acc, &r| acc | 1 << act[r as usize]));
        }
    }
    let census = two_species_census(|mask| images.iter().any(|&im| mask & im == im));
    if !census.agrees() {
        return Err(CrnError::Invalid(
            "Burnside and exhaustive two-species counts differ".into(),
        ));
    }
    Ok((census.total_matching(), census.total()))
}

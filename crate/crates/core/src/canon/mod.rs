//! Petri-net graphs of networks, canonical keys and the induced-subnetwork order.

mod induced;
mod label;

pub use induced::{contains_fully_open, contains_induced, contains_induced_by_deletion};
pub use label::canonical_certificate;

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{CrnError, Result};
use crate::model::Crn;

/// Arc of a Petri-net graph. Species vertices are `0..n_species`, reaction
/// vertices `n_species..n_species + n_reactions`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub weight: u32,
}

/// Edge-weighted bipartite digraph with species and reaction vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PnGraph {
    pub n_species: usize,
    pub n_reactions: usize,
    pub arcs: Vec<Arc>,
}

impl PnGraph {
    pub fn n_vertices(&self) -> usize {
        self.n_species + self.n_reactions
    }

    pub fn reaction_vertex(&self, j: usize) -> usize {
        self.n_species + j
    }

    /// Graph of `n_species` species and reactions given as (source, target)
    /// stoichiometry rows. Rows need not form valid reactions, which lets
    /// vertex-deleted subgraphs be represented directly.
    pub fn from_rows(n_species: usize, rows: &[(Vec<u32>, Vec<u32>)]) -> Self {
        let mut arcs = Vec::new();
        for (j, (src, tgt)) in rows.iter().enumerate() {
            let rv = n_species + j;
            for i in 0..n_species {
                if src[i] > 0 {
                    arcs.push(Arc {
                        from: i,
                        to: rv,
                        weight: src[i],
                    });
                }
                if tgt[i] > 0 {
                    arcs.push(Arc {
                        from: rv,
                        to: i,
                        weight: tgt[i],
                    });
                }
            }
        }
        arcs.sort();
        PnGraph {
            n_species,
            n_reactions: rows.len(),
            arcs,
        }
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<u32> {
        self.arcs
            .iter()
            .find(|a| a.from == from && a.to == to)
            .map(|a| a.weight)
    }
}

pub fn pn_graph(crn: &Crn) -> PnGraph {
    let rows: Vec<(Vec<u32>, Vec<u32>)> = crn
        .reactions()
        .iter()
        .map(|r| (r.source().stoich().to_vec(), r.target().stoich().to_vec()))
        .collect();
    PnGraph::from_rows(crn.n_species(), &rows)
}

/// Byte string identifying a network's isomorphism class (bipartition and
/// arc weights respected). Displayed as lowercase hex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    const VERSION: u8 = 1;

    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes =
            hex::decode(s.trim()).map_err(|e| CrnError::Invalid(format!("bad key `{s}`: {e}")))?;
        if bytes.first() != Some(&Self::VERSION) {
            return Err(CrnError::Invalid(format!(
                "unsupported key version in `{s}`"
            )));
        }
        Ok(CanonicalKey(bytes))
    }

    fn from_certificate(cert: &[u32]) -> Self {
        let mut bytes = Vec::with_capacity(1 + 2 * cert.len());
        bytes.push(Self::VERSION);
        for &x in cert {
            let x = u16::try_from(x).expect("certificate entries fit in u16");
            bytes.extend_from_slice(&x.to_be_bytes());
        }
        CanonicalKey(bytes)
    }

    /// Decode the key back into a network (one representative of the class).
    pub fn to_crn(&self) -> Result<Crn> {
        let bad = || CrnError::Invalid(format!("malformed key {}", self.to_hex()));
        if self.0.len() % 2 != 1 {
            return Err(bad());
        }
        let vals: Vec<usize> = self.0[1..]
            .chunks(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as usize)
            .collect();
        let (&ns, rest) = vals.split_first().ok_or_else(bad)?;
        let (&nr, rest) = rest.split_first().ok_or_else(bad)?;
        let (&na, rest) = rest.split_first().ok_or_else(bad)?;
        if rest.len() != 3 * na {
            return Err(bad());
        }
        let mut rows = vec![(vec![0u32; ns], vec![0u32; ns]); nr];
        for a in rest.chunks(3) {
            let (from, to, w) = (a[0], a[1], a[2] as u32);
            if from < ns && to >= ns && to < ns + nr {
                rows[to - ns].0[from] = w;
            } else if from >= ns && from < ns + nr && to < ns {
                rows[from - ns].1[to] = w;
            } else {
                return Err(bad());
            }
        }
        let pairs: Vec<(&[u32], &[u32])> = rows
            .iter()
            .map(|(s, t)| (s.as_slice(), t.as_slice()))
            .collect();
        Crn::from_pairs(ns, &pairs)
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for CanonicalKey {
    type Err = CrnError;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_hex(s)
    }
}

impl From<CanonicalKey> for String {
    fn from(k: CanonicalKey) -> String {
        k.to_hex()
    }
}

impl TryFrom<String> for CanonicalKey {
    type Error = CrnError;
    fn try_from(s: String) -> Result<Self> {
        Self::from_hex(&s)
    }
}

pub fn canonical_key(crn: &Crn) -> CanonicalKey {
    CanonicalKey::from_certificate(&canonical_certificate(&pn_graph(crn)))
}

pub fn graph_key(g: &PnGraph) -> CanonicalKey {
    CanonicalKey::from_certificate(&canonical_certificate(g))
}

/// Key of the non-flow core. Two fully open networks are isomorphic exactly
/// when their cores are, so this is the stored normal form for fully open families.
pub fn core_key(crn: &Crn) -> CanonicalKey {
    canonical_key(&crn.core())
}

/// Concurrent insert-if-absent set of keys.
pub struct KeyStore {
    shards: Vec<Mutex<HashSet<CanonicalKey>>>,
}

impl Default for KeyStore {
    fn default() -> Self {
        Self::new()
    }
}

impl KeyStore {
    const SHARDS: usize = 32;

    pub fn new() -> Self {
        KeyStore {
            shards: (0..Self::SHARDS)
                .map(|_| Mutex::new(HashSet::new()))
                .collect(),
        }
    }

    /// Returns `true` if the key was not present.
    pub fn insert(&self, key: CanonicalKey) -> bool {
        let mut h = DefaultHasher::new();
        key.hash(&mut h);
        let shard = (h.finish() as usize) % Self::SHARDS;
        self.shards[shard]
            .lock()
            .expect("key store poisoned")
            .insert(key)
    }

    pub fn len(&self) -> usize {
        self.shards
            .iter()
            .map(|s| s.lock().expect("key store poisoned").len())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn into_sorted(self) -> Vec<CanonicalKey> {
        let mut all: Vec<CanonicalKey> = self
            .shards
            .into_iter()
            .flat_map(|s| s.into_inner().expect("key store poisoned"))
            .collect();
        all.sort();
        all
    }
}

/// Sorted, deduplicated, newline-delimited lowercase hex.
pub fn write_key_file(path: &Path, keys: &[CanonicalKey]) -> std::io::Result<()> {
    let mut sorted: Vec<&CanonicalKey> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for k in sorted {
        writeln!(f, "{}", k.to_hex())?;
    }
    f.flush()
}

pub fn read_key_file(path: &Path) -> Result<Vec<CanonicalKey>> {
    let f = std::fs::File::open(path)
        .map_err(|e| CrnError::Invalid(format!("{}: {e}", path.display())))?;
    let mut keys = Vec::new();
    for line in std::io::BufReader::new(f).lines() {
        let line = line.map_err(|e| CrnError::Invalid(e.to_string()))?;
        if !line.trim().is_empty() {
            keys.push(CanonicalKey::from_hex(&line)?);
        }
    }
    Ok(keys)
}

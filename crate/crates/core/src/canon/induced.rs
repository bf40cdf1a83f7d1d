//! Induced-subnetwork containment.
//!
//! `small` is an induced subnetwork of `big` when some species subset α and
//! reaction subset β of `big` induce a Petri-net subgraph isomorphic to the
//! graph of `small`. Equivalently: there is an injective species map α and an
//! injective reaction map β such that every small reaction equals the
//! restriction of its image to α.

use std::collections::HashMap;

use super::{graph_key, pn_graph, PnGraph};
use crate::model::Crn;

type Row = (Vec<u32>, Vec<u32>);

fn rows(crn: &Crn) -> Vec<Row> {
    crn.reactions()
        .iter()
        .map(|r| (r.source().stoich().to_vec(), r.target().stoich().to_vec()))
        .collect()
}

/// Backtracking over species maps with per-reaction candidate filtering,
/// finished by a bipartite matching of reactions.
pub fn contains_induced(big: &Crn, small: &Crn) -> bool {
    let (ns, nb) = (small.n_species(), big.n_species());
    let (ms, mb) = (small.n_reactions(), big.n_reactions());
    if ns > nb || ms > mb {
        return false;
    }
    let srows = rows(small);
    let brows = rows(big);

    // Species profile: multiset of (source, target) stoichiometry pairs over reactions.
    let profile = |rs: &[Row], i: usize| -> HashMap<(u32, u32), usize> {
        let mut h = HashMap::new();
        for (s, t) in rs {
            if s[i] > 0 || t[i] > 0 {
                *h.entry((s[i], t[i])).or_insert(0) += 1;
            }
        }
        h
    };
    let sprof: Vec<_> = (0..ns).map(|i| profile(&srows, i)).collect();
    let bprof: Vec<_> = (0..nb).map(|i| profile(&brows, i)).collect();
    let compatible: Vec<Vec<usize>> = (0..ns)
        .map(|i| {
            (0..nb)
                .filter(|&b| {
                    sprof[i]
                        .iter()
                        .all(|(k, &c)| bprof[b].get(k).copied().unwrap_or(0) >= c)
                })
                .collect()
        })
        .collect();
    if compatible.iter().any(Vec::is_empty) {
        return false;
    }

    // Most constrained small species first.
    let mut order: Vec<usize> = (0..ns).collect();
    order.sort_by_key(|&i| {
        (
            compatible[i].len(),
            std::cmp::Reverse(sprof[i].values().sum::<usize>()),
        )
    });

    let candidates: Vec<Vec<usize>> = vec![(0..mb).collect(); ms];
    let mut alpha = vec![usize::MAX; ns];
    let mut used = vec![false; nb];
    assign(
        0,
        &order,
        &compatible,
        &srows,
        &brows,
        &mut alpha,
        &mut used,
        &candidates,
    )
}

#[allow(clippy::too_many_arguments)]
fn assign(
    depth: usize,
    order: &[usize],
    compatible: &[Vec<usize>],
    srows: &[Row],
    brows: &[Row],
    alpha: &mut [usize],
    used: &mut [bool],
    candidates: &[Vec<usize>],
) -> bool {
    if depth == order.len() {
        return has_matching(candidates, brows.len());
    }
    let i = order[depth];
    for &b in &compatible[i] {
        if used[b] {
            continue;
        }
        let next: Vec<Vec<usize>> = candidates
            .iter()
            .enumerate()
            .map(|(j, cs)| {
                let (s, t) = &srows[j];
                cs.iter()
                    .copied()
                    .filter(|&c| brows[c].0[b] == s[i] && brows[c].1[b] == t[i])
                    .collect()
            })
            .collect();
        if next.iter().any(Vec::is_empty) {
            continue;
        }
        alpha[i] = b;
        used[b] = true;
        if assign(
            depth + 1,
            order,
            compatible,
            srows,
            brows,
            alpha,
            used,
            &next,
        ) {
            return true;
        }
        used[b] = false;
        alpha[i] = usize::MAX;
    }
    false
}

/// Whether every left vertex can be matched to a distinct right vertex.
fn has_matching(adj: &[Vec<usize>], n_right: usize) -> bool {
    let mut owner = vec![usize::MAX; n_right];
    fn augment(u: usize, adj: &[Vec<usize>], owner: &mut [usize], seen: &mut [bool]) -> bool {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                if owner[v] == usize::MAX || augment(owner[v], adj, owner, seen) {
                    owner[v] = u;
                    return true;
                }
            }
        }
        false
    }
    (0..adj.len()).all(|u| {
        let mut seen = vec![false; n_right];
        augment(u, adj, &mut owner, &mut seen)
    })
}

/// Containment between the fully open extensions of two networks, decided
/// from their non-flow reactions alone: some injective species map φ sends
/// every non-flow reaction of `small` onto the restriction to φ's image of a
/// non-flow reaction of `big`. Flow reactions of either input are ignored.
pub fn contains_fully_open(big: &Crn, small: &Crn) -> bool {
    let (n, k) = (big.n_species(), small.n_species());
    if k > n {
        return false;
    }
    let b: Vec<Row> = rows(&big.core());
    let s: Vec<Row> = rows(&small.core());
    if s.len() > b.len() {
        return false;
    }
    let mut phi = Vec::with_capacity(k);
    let mut used = vec![false; n];
    fn rec(phi: &mut Vec<usize>, used: &mut [bool], k: usize, b: &[Row], s: &[Row]) -> bool {
        if phi.len() == k {
            return s.iter().all(|(ss, st)| {
                b.iter().any(|(bs, bt)| {
                    phi.iter()
                        .enumerate()
                        .all(|(i, &p)| bs[p] == ss[i] && bt[p] == st[i])
                })
            });
        }
        for p in 0..used.len() {
            if !used[p] {
                used[p] = true;
                phi.push(p);
                if rec(phi, used, k, b, s) {
                    return true;
                }
                phi.pop();
                used[p] = false;
            }
        }
        false
    }
    rec(&mut phi, &mut used, k, &b, &s)
}

/// Reference implementation: delete vertices of `big`'s graph in every way
/// that leaves the right number of species and reactions and compare
/// canonical keys. Exponential; meant for small networks and testing.
pub fn contains_induced_by_deletion(big: &Crn, small: &Crn) -> bool {
    let (ns, nb) = (small.n_species(), big.n_species());
    let (ms, mb) = (small.n_reactions(), big.n_reactions());
    if ns > nb || ms > mb {
        return false;
    }
    let target = graph_key(&pn_graph(small));
    let brows = rows(big);
    let order_profile = |rs: &[Row]| {
        let mut p: Vec<(u32, u32)> = rs
            .iter()
            .map(|(s, t)| (s.iter().sum::<u32>(), t.iter().sum::<u32>()))
            .collect();
        p.sort_unstable();
        p
    };
    let want = order_profile(&rows(small));
    for species in combinations(nb, ns) {
        let restricted: Vec<Row> = brows
            .iter()
            .map(|(s, t)| {
                (
                    species.iter().map(|&i| s[i]).collect(),
                    species.iter().map(|&i| t[i]).collect(),
                )
            })
            .collect();
        for reactions in combinations(mb, ms) {
            let sub: Vec<Row> = reactions.iter().map(|&j| restricted[j].clone()).collect();
            if order_profile(&sub) != want {
                continue;
            }
            if graph_key(&PnGraph::from_rows(ns, &sub)) == target {
                return true;
            }
        }
    }
    false
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_crn;

    #[test]
    fn fully_open_shortcut_agrees() {
        use crate::enumerate::{enumerate_cores, EnumSpec, Universe, DEFAULT_CEILING};
        let cores = |k: usize, l: usize| -> Vec<Crn> {
            let u = Universe::new(k);
            let c = enumerate_cores(EnumSpec::new(k, l).unwrap(), DEFAULT_CEILING).unwrap();
            c.iter().map(|s| u.core(s)).collect()
        };
        let bigs = cores(3, 2);
        let smalls: Vec<Crn> = [cores(1, 1), cores(2, 1), cores(3, 1), cores(2, 2)].concat();
        for b in &bigs {
            let fb = b.fully_open_extension();
            for s in &smalls {
                assert_eq!(
                    contains_fully_open(b, s),
                    contains_induced(&fb, &s.fully_open_extension()),
                    "{b} / {s}"
                );
            }
        }
    }

    fn example_r() -> Crn {
        // X=X1, Y=X2, Z=X3, W=X4
        parse_crn("X1 + X2 -> 2 X2\nX2 + X3 -> X1\nX1 -> X4 + X3\nX4 -> X1").unwrap()
    }

    #[test]
    fn example_subnetwork_is_induced() {
        let r1 = parse_crn("X1 + X2 -> 2 X2\nX2 + X3 -> X1").unwrap();
        assert!(contains_induced(&example_r(), &r1));
        assert!(contains_induced_by_deletion(&example_r(), &r1));
    }

    #[test]
    fn restriction_drops_deleted_species() {
        // Deleting W and Z from X -> W + Z leaves X -> 0.
        let small = parse_crn("#! species 2\nX1 + X2 -> 2 X2\nX1 -> 0").unwrap();
        assert!(contains_induced(&example_r(), &small));
        assert!(contains_induced_by_deletion(&example_r(), &small));
    }

    #[test]
    fn non_induced_rejected() {
        let small = parse_crn("X1 + X2 -> 2 X1").unwrap();
        let big = parse_crn("X1 + X2 -> 2 X1 + X3").unwrap();
        // Restriction to {X1, X2} of the big reaction is exactly the small one.
        assert!(contains_induced(&big, &small));
        let other = parse_crn("X1 -> X2\nX2 -> X1").unwrap();
        assert!(!contains_induced(&big, &other));
        assert!(!contains_induced_by_deletion(&big, &other));
    }

    #[test]
    fn reflexive_and_size_bounds() {
        let r = example_r();
        assert!(contains_induced(&r, &r));
        let bigger = r.fully_open_extension();
        assert!(!contains_induced(&r, &bigger));
    }

    #[test]
    fn matching_needs_distinct_images() {
        // Two small reactions X1 -> 0 need two distinct big reactions restricting to it.
        let small = parse_crn("X1 -> 0\nX1 -> X2").unwrap();
        let big = parse_crn("X1 -> X3\nX1 -> X2").unwrap();
        assert!(contains_induced(&big, &small));
        let big2 = parse_crn("X1 -> X2 + X3").unwrap();
        assert!(!contains_induced(&big2, &small));
    }
}

//! Canonical labeling of Petri-net graphs by colour refinement and
//! individualization. Graphs here have at most a few dozen vertices, so the
//! search tree is explored fully, with twin vertices visited once.

use super::PnGraph;

struct Adjacency {
    out: Vec<Vec<(usize, u32)>>,
    inc: Vec<Vec<(usize, u32)>>,
}

impl Adjacency {
    fn new(g: &PnGraph) -> Self {
        let n = g.n_vertices();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for a in &g.arcs {
            out[a.from].push((a.to, a.weight));
            inc[a.to].push((a.from, a.weight));
        }
        for l in out.iter_mut().chain(inc.iter_mut()) {
            l.sort_unstable();
        }
        Adjacency { out, inc }
    }

    /// Vertices `u`, `v` with identical neighbourhoods are exchanged by an
    /// automorphism, so individualizing either gives the same certificates.
    fn twins(&self, u: usize, v: usize) -> bool {
        self.out[u] == self.out[v] && self.inc[u] == self.inc[v]
    }
}

/// Canonical certificate: `[n_species, n_reactions, n_arcs, (from, to, w)*]`
/// under the lexicographically least labeling found by the search.
pub fn canonical_certificate(g: &PnGraph) -> Vec<u32> {
    let adj = Adjacency::new(g);
    let n = g.n_vertices();
    let mut colors: Vec<u32> = (0..n).map(|v| u32::from(v >= g.n_species)).collect();
    let mut best: Option<Vec<u32>> = None;
    search(g, &adj, &mut colors, &mut best);
    best.expect("search reaches at least one leaf")
}

fn search(g: &PnGraph, adj: &Adjacency, colors: &mut Vec<u32>, best: &mut Option<Vec<u32>>) {
    let n_cells = refine(adj, colors);
    let n = colors.len();
    if n_cells == n {
        let cert = certificate(g, colors);
        if best.as_ref().is_none_or(|b| cert < *b) {
            *best = Some(cert);
        }
        return;
    }
    // First non-singleton cell in colour order.
    let mut sizes = vec![0usize; n];
    for &c in colors.iter() {
        sizes[c as usize] += 1;
    }
    let cell = sizes
        .iter()
        .position(|&s| s > 1)
        .expect("non-discrete partition") as u32;
    let members: Vec<usize> = (0..n).filter(|&v| colors[v] == cell).collect();
    let mut reps: Vec<usize> = Vec::new();
    for &v in &members {
        if !reps.iter().any(|&r| adj.twins(r, v)) {
            reps.push(v);
        }
    }
    for v in reps {
        let mut next: Vec<u32> = colors
            .iter()
            .enumerate()
            .map(|(u, &c)| 2 * c + u32::from(c == cell && u != v))
            .collect();
        search(g, adj, &mut next, best);
    }
}

/// Refine to the coarsest equitable partition finer than `colors`. Colours
/// are renumbered `0..cells` in an order determined by the old colours and
/// the neighbourhood signatures only. Returns the number of cells.
fn refine(adj: &Adjacency, colors: &mut [u32]) -> usize {
    let n = colors.len();
    let mut n_cells = usize::MAX;
    loop {
        type Sig = (u32, Vec<(u32, u32)>, Vec<(u32, u32)>);
        let sigs: Vec<Sig> = (0..n)
            .map(|v| {
                let mut o: Vec<(u32, u32)> =
                    adj.out[v].iter().map(|&(t, w)| (colors[t], w)).collect();
                let mut i: Vec<(u32, u32)> =
                    adj.inc[v].iter().map(|&(s, w)| (colors[s], w)).collect();
                o.sort_unstable();
                i.sort_unstable();
                (colors[v], o, i)
            })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]));
        let mut cell = 0u32;
        for (k, &v) in order.iter().enumerate() {
            if k > 0 && sigs[v] != sigs[order[k - 1]] {
                cell += 1;
            }
            colors[v] = cell;
        }
        let cells = if n == 0 { 0 } else { cell as usize + 1 };
        if cells == n_cells {
            return cells;
        }
        n_cells = cells;
    }
}

fn certificate(g: &PnGraph, colors: &[u32]) -> Vec<u32> {
    let mut arcs: Vec<(u32, u32, u32)> = g
        .arcs
        .iter()
        .map(|a| (colors[a.from], colors[a.to], a.weight))
        .collect();
    arcs.sort_unstable();
    let mut cert = Vec::with_capacity(3 + 3 * arcs.len());
    cert.extend([g.n_species as u32, g.n_reactions as u32, arcs.len() as u32]);
    for (f, t, w) in arcs {
        cert.extend([f, t, w]);
    }
    cert
}

use alloc::vec::Vec;

use super::partition::Partition;
use crate::{Error, Result};

/// Largest vertex count accepted by the exact colouring search.
pub const EXACT_COLOURING_LIMIT: usize = 24;

/// Undirected simple graph on vertex ids `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { adjacency: alloc::vec![Vec::new(); n] }
    }

    /// Graph from 1-based edge pairs. Loops and repeated edges are ignored.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for a in 1..=n {
            for b in a + 1..=n {
                g.add_edge(a, b);
            }
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        let n = self.adjacency.len();
        assert!((1..=n).contains(&a) && (1..=n).contains(&b), "vertex id out of range");
        if a == b || self.has_edge(a, b) {
            return;
        }
        self.adjacency[a - 1].push(b);
        self.adjacency[b - 1].push(a);
        self.adjacency[a - 1].sort_unstable();
        self.adjacency[b - 1].sort_unstable();
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a - 1].binary_search(&b).is_ok()
    }

    pub fn neighbours(&self, a: usize) -> &[usize] {
        &self.adjacency[a - 1]
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, adj) in self.adjacency.iter().enumerate() {
            for &b in adj {
                if i + 1 < b {
                    out.push((i + 1, b));
                }
            }
        }
        out
    }

    /// Relabels vertex `v` as `perm[v − 1]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        let edges: Vec<_> = self.edges().into_iter().map(|(a, b)| (perm[a - 1], perm[b - 1])).collect();
        Graph::from_edges(self.vertex_count(), &edges)
    }

    fn masks(&self) -> Vec<u32> {
        self.adjacency.iter().map(|adj| adj.iter().fold(0u32, |m, &b| m | 1 << (b - 1))).collect()
    }
}

/// Neighbour graph: an edge wherever two subdomains share an interface of
/// positive length.
pub fn adjacency_graph(p: &Partition) -> Graph {
    let mut g = Graph::new(p.subdomain_count());
    for iface in p.interfaces() {
        if iface.length > 0.0 {
            g.add_edge(iface.k, iface.l);
        }
    }
    g
}

/// A proper colouring with the minimal number of colours.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Colouring {
    pub chi: usize,
    /// `phi[k − 1]` is the colour of subdomain `k`, in `0..chi`.
    pub phi: Vec<usize>,
}

impl Colouring {
    pub fn colour(&self, k: usize) -> usize {
        self.phi[k - 1]
    }

    pub fn is_proper_for(&self, g: &Graph) -> bool {
        self.phi.len() == g.vertex_count()
            && self.phi.iter().all(|&c| c < self.chi)
            && g.edges().iter().all(|&(a, b)| self.phi[a - 1] != self.phi[b - 1])
    }
}

/// Exact chromatic number with the lexicographically smallest optimal
/// colouring.
pub fn chromatic_colouring(g: &Graph) -> Result<Colouring> {
    chromatic_colouring_with_limit(g, EXACT_COLOURING_LIMIT)
}

pub fn chromatic_colouring_with_limit(g: &Graph, limit: usize) -> Result<Colouring> {
    let n = g.vertex_count();
    let limit = limit.min(32);
    if n > limit {
        return Err(Error::TooManyVertices { vertices: n, limit });
    }
    if n == 0 {
        return Ok(Colouring { chi: 0, phi: Vec::new() });
    }
    let masks = g.masks();
    let lower = max_clique(&masks).max(1);
    let upper = dsatur_colours(&masks);
    for m in lower..=upper {
        // either m equals the clique bound or the search at m − 1 failed
        // exhaustively, so the first success is minimal
        if let Some(phi) = colour_with(&masks, m) {
            return Ok(Colouring { chi: m, phi });
        }
    }
    unreachable!("greedy colouring gives an upper bound")
}

/// Whether a proper colouring with `m` colours exists, by exhaustive search.
pub fn is_colourable(g: &Graph, m: usize) -> bool {
    g.vertex_count() <= 32 && colour_with(&g.masks(), m).is_some()
}

/// Vertex-order backtracking with forward checking. Colours are tried in
/// increasing order and a vertex may open at most one new colour, so the
/// first hit is the lexicographically smallest colouring.
fn colour_with(masks: &[u32], m: usize) -> Option<Vec<usize>> {
    let n = masks.len();
    if m == 0 {
        return if n == 0 { Some(Vec::new()) } else { None };
    }
    let mut phi = alloc::vec![usize::MAX; n];
    fn rec(v: usize, used: usize, m: usize, masks: &[u32], phi: &mut [usize]) -> bool {
        let n = masks.len();
        if v == n {
            return true;
        }
        let top = (used + 1).min(m);
        for c in 0..top {
            if (0..n).any(|u| masks[v] >> u & 1 == 1 && phi[u] == c) {
                continue;
            }
            phi[v] = c;
            // forward check: every later vertex still has a free colour
            let dead = (v + 1..n).any(|w| {
                let mut blocked = 0u64;
                for u in 0..=v {
                    if masks[w] >> u & 1 == 1 {
                        blocked |= 1 << phi[u];
                    }
                }
                blocked.count_ones() as usize >= m
            });
            if !dead && rec(v + 1, used.max(c + 1), m, masks, phi) {
                return true;
            }
            phi[v] = usize::MAX;
        }
        false
    }
    rec(0, 0, m, masks, &mut phi).then_some(phi)
}

fn max_clique(masks: &[u32]) -> usize {
    fn rec(cand: u32, size: usize, best: &mut usize, masks: &[u32]) {
        if cand == 0 {
            *best = (*best).max(size);
            return;
        }
        if size + cand.count_ones() as usize <= *best {
            return;
        }
        let mut rest = cand;
        while rest != 0 {
            if size + rest.count_ones() as usize <= *best {
                return;
            }
            let v = rest.trailing_zeros() as usize;
            rest &= !(1 << v);
            rec(rest & masks[v], size + 1, best, masks);
        }
    }
    let n = masks.len();
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut best = 0;
    rec(all, 0, &mut best, masks);
    best
}

fn dsatur_colours(masks: &[u32]) -> usize {
    let n = masks.len();
    let mut colour = alloc::vec![usize::MAX; n];
    let mut count = 0;
    for _ in 0..n {
        let sat = |v: usize, colour: &[usize]| -> (u32, u32) {
            let mut seen = 0u64;
            for (u, &c) in colour.iter().enumerate() {
                if masks[v] >> u & 1 == 1 && c != usize::MAX {
                    seen |= 1 << c;
                }
            }
            (seen.count_ones(), masks[v].count_ones())
        };
        let v = (0..n)
            .filter(|&v| colour[v] == usize::MAX)
            .max_by(|&a, &b| sat(a, &colour).cmp(&sat(b, &colour)).then(b.cmp(&a)))
            .expect("an uncoloured vertex remains");
        let c = (0..)
            .find(|&c| (0..n).all(|u| masks[v] >> u & 1 == 0 || colour[u] != c))
            .expect("a free colour exists");
        colour[v] = c;
        count = count.max(c + 1);
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wheel(rim: usize) -> Graph {
        let mut g = Graph::new(rim + 1);
        for i in 1..=rim {
            g.add_edge(i, i % rim + 1);
            g.add_edge(i, rim + 1);
        }
        g
    }

    #[test]
    fn small_graphs() {
        assert_eq!(chromatic_colouring(&Graph::complete(2)).unwrap().chi, 2);
        let k3 = chromatic_colouring(&Graph::complete(3)).unwrap();
        assert_eq!(k3.chi, 3);
        assert_eq!(k3.phi, [0, 1, 2]);
        assert_eq!(chromatic_colouring(&Graph::complete(4)).unwrap().chi, 4);
        assert_eq!(chromatic_colouring(&wheel(5)).unwrap().chi, 4);
        assert_eq!(chromatic_colouring(&wheel(4)).unwrap().chi, 3);
        assert_eq!(chromatic_colouring(&Graph::new(3)).unwrap().chi, 1);
    }

    #[test]
    fn cycle_lexicographic() {
        let c4 = Graph::from_edges(4, &[(1, 2), (2, 4), (4, 3), (3, 1)]);
        let col = chromatic_colouring(&c4).unwrap();
        assert_eq!(col.chi, 2);
        assert_eq!(col.phi, [0, 1, 1, 0]);
        let c5 = Graph::from_edges(5, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)]);
        let col = chromatic_colouring(&c5).unwrap();
        assert_eq!(col.chi, 3);
        assert_eq!(col.phi, [0, 1, 0, 1, 2]);
    }

    #[test]
    fn limit_enforced() {
        let g = Graph::new(25);
        assert!(matches!(chromatic_colouring(&g), Err(Error::TooManyVertices { .. })));
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (1usize..=10).prop_flat_map(|n| {
            proptest::collection::vec((1..=n, 1..=n), 0..(n * 3)).prop_map(move |e| Graph::from_edges(n, &e))
        })
    }

    proptest! {
        #[test]
        fn colouring_is_optimal_and_stable(g in arb_graph(), seed in any::<u64>()) {
            let col = chromatic_colouring(&g).unwrap();
            prop_assert!(col.is_proper_for(&g));
            prop_assert!(col.chi == 0 || !is_colourable(&g, col.chi - 1));
            let n = g.vertex_count();
            let mut perm: Vec<usize> = (1..=n).collect();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(chromatic_colouring(&g.permuted(&perm)).unwrap().chi, col.chi);
        }
    }
}

//! Deterministic graph constructors used in tests, benchmarks, and examples.
//!
//! All random constructors take an explicit seed and are reproducible.

use crate::graph::{DedupePolicy, WeightedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Path 0 - 1 - ... - (n-1) with unit weights.
pub fn path(n: usize) -> WeightedGraph {
    assert!(n >= 1, "path needs at least one vertex");
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v, 1.0)).collect();
    WeightedGraph::with_node_count(n, &edges, DedupePolicy::Error).unwrap()
}

/// Cycle on n >= 3 vertices with unit weights.
pub fn cycle(n: usize) -> WeightedGraph {
    assert!(n >= 3, "cycle needs at least three vertices");
    let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v, 1.0)).collect();
    edges.push((n - 1, 0, 1.0));
    WeightedGraph::with_node_count(n, &edges, DedupePolicy::Error).unwrap()
}

/// Complete graph K_n with unit weights.
pub fn complete(n: usize) -> WeightedGraph {
    assert!(n >= 1, "complete graph needs at least one vertex");
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v, 1.0));
        }
    }
    WeightedGraph::with_node_count(n, &edges, DedupePolicy::Error).unwrap()
}

/// Star with center 0 and n-1 leaves, unit weights.
pub fn star(n: usize) -> WeightedGraph {
    assert!(n >= 2, "star needs at least two vertices");
    let edges: Vec<_> = (1..n).map(|v| (0, v, 1.0)).collect();
    WeightedGraph::with_node_count(n, &edges, DedupePolicy::Error).unwrap()
}

/// Barbell: two unit-weight q-cliques {0..q} and {q..2q} joined by the
/// single bridge edge (q-1, q). Has 2q vertices and q(q-1)+1 edges.
pub fn barbell(q: usize) -> WeightedGraph {
    assert!(q >= 2, "barbell needs cliques of at least two vertices");
    let mut edges = Vec::with_capacity(q * (q - 1) + 1);
    for u in 0..q {
        for v in (u + 1)..q {
            edges.push((u, v, 1.0));
            edges.push((q + u, q + v, 1.0));
        }
    }
    edges.push((q - 1, q, 1.0));
    WeightedGraph::with_node_count(2 * q, &edges, DedupePolicy::Error).unwrap()
}

/// Complete graph on vertices 0..n-2 with two pendant vertices attached to
/// distinct anchors: n-2 is adjacent to 0 and n-1 is adjacent to 1.
pub fn pendant_complete(n: usize) -> WeightedGraph {
    assert!(n >= 4, "pendant-complete graph needs at least four vertices");
    let core = n - 2;
    let mut edges = Vec::new();
    for u in 0..core {
        for v in (u + 1)..core {
            edges.push((u, v, 1.0));
        }
    }
    edges.push((core, 0, 1.0));
    edges.push((core + 1, 1, 1.0));
    WeightedGraph::with_node_count(n, &edges, DedupePolicy::Error).unwrap()
}

/// Random connected graph: a random recursive tree (each vertex attaches to
/// a uniformly chosen earlier vertex) plus each remaining pair independently
/// with probability `extra_edge_prob`. Unit weights.
pub fn random_connected(n: usize, extra_edge_prob: f64, seed: u64) -> WeightedGraph {
    random_connected_weighted(n, extra_edge_prob, 1.0, 1.0, seed)
}

/// As [`random_connected`], with weights drawn uniformly from
/// `[w_lo, w_hi]` (set `w_lo == w_hi` for constant weights).
pub fn random_connected_weighted(
    n: usize,
    extra_edge_prob: f64,
    w_lo: f64,
    w_hi: f64,
    seed: u64,
) -> WeightedGraph {
    assert!(n >= 1);
    assert!((0.0..=1.0).contains(&extra_edge_prob));
    assert!(w_lo > 0.0 && w_hi >= w_lo);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_w = |rng: &mut ChaCha8Rng| {
        if w_lo == w_hi {
            w_lo
        } else {
            rng.gen_range(w_lo..=w_hi)
        }
    };
    let mut in_tree = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        in_tree.insert((u, v));
        let w = draw_w(&mut rng);
        edges.push((u, v, w));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if in_tree.contains(&(u, v)) {
                continue;
            }
            if rng.gen::<f64>() < extra_edge_prob {
                let w = draw_w(&mut rng);
                edges.push((u, v, w));
            }
        }
    }
    WeightedGraph::with_node_count(n, &edges, DedupePolicy::Error).unwrap()
}

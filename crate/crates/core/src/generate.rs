//! Standard and random median graphs.

use rand::Rng;

use crate::graph::{Graph, MedianGraph};
use crate::pocset::{realize_median_graph, verify_pocset, Pocset};

pub fn path(n: usize) -> MedianGraph {
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    MedianGraph::new_unchecked(Graph::unlabeled(n, &edges).expect("path"))
}

/// `Q_k`; vertex `i` is the bit vector of `i`.
pub fn hypercube(k: usize) -> MedianGraph {
    let n = 1usize << k;
    let mut edges = Vec::new();
    for i in 0..n {
        for b in 0..k {
            let j = i ^ (1 << b);
            if i < j {
                edges.push((i, j));
            }
        }
    }
    let labels = (0..n).map(|i| format!("{i:0k$b}", k = k.max(1))).collect();
    MedianGraph::new_unchecked(Graph::new(labels, &edges).expect("hypercube"))
}

/// `rows × cols` grid; vertex `(i, j)` has index `i·cols + j`.
pub fn grid(rows: usize, cols: usize) -> MedianGraph {
    let mut edges = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let v = i * cols + j;
            if j + 1 < cols {
                edges.push((v, v + 1));
            }
            if i + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    let labels = (0..rows * cols).map(|v| format!("{},{}", v / cols, v % cols)).collect();
    MedianGraph::new_unchecked(Graph::new(labels, &edges).expect("grid"))
}

/// Star with `leaves` leaves around vertex 0.
pub fn star(leaves: usize) -> MedianGraph {
    let edges: Vec<(usize, usize)> = (1..=leaves).map(|i| (0, i)).collect();
    MedianGraph::new_unchecked(Graph::unlabeled(leaves + 1, &edges).expect("star"))
}

/// Uniform random recursive tree on `n` vertices.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> MedianGraph {
    let edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    MedianGraph::new_unchecked(Graph::unlabeled(n, &edges).expect("tree"))
}

/// Random pocset on `pairs` star-pairs: each earlier pair is related to the new
/// one with probability `1 - p_transverse`, keeping only relations that leave the
/// axioms intact.
pub fn random_pocset<R: Rng>(rng: &mut R, pairs: usize, p_transverse: f64) -> Pocset {
    let names: Vec<(String, String)> = (0..pairs).map(|i| (format!("h{i}"), format!("h{i}*"))).collect();
    let side = |i: usize, starred: bool| if starred { names[i].1.clone() } else { names[i].0.clone() };
    let mut order: Vec<(String, String)> = Vec::new();
    for i in 1..pairs {
        for j in 0..i {
            if rng.gen_bool(p_transverse) {
                continue;
            }
            let rel = if rng.gen_bool(0.5) {
                (side(i, rng.gen()), side(j, rng.gen()))
            } else {
                (side(j, rng.gen()), side(i, rng.gen()))
            };
            order.push(rel);
            let ok = Pocset::from_pairs(&names, &order).map(|p| verify_pocset(&p).is_empty()).unwrap_or(false);
            if !ok {
                order.pop();
            }
        }
    }
    Pocset::from_pairs(&names, &order).expect("consistent by construction")
}

/// Median graph dual to a random pocset with at most `max_pairs` pairs and
/// `max_vertices` vertices.
pub fn random_median_graph<R: Rng>(rng: &mut R, max_pairs: usize, max_vertices: usize) -> (Pocset, MedianGraph) {
    loop {
        let pairs = rng.gen_range(1..=max_pairs);
        let pt = rng.gen_range(0.0..0.35);
        let p = random_pocset(rng, pairs, pt);
        if let Ok(ufs) = p.enumerate_ultrafilters() {
            if ufs.len() <= max_vertices {
                let g = realize_median_graph(&p).expect("valid pocset");
                return (p, g);
            }
        }
    }
}

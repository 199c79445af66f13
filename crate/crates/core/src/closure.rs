//! Median subalgebra closure over any median algebra.

use std::collections::HashSet;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::graph::MedianGraph;

pub const CLOSURE_CAP: usize = 100_000;

pub trait MedianAlgebra {
    type Point: Clone + Eq + Hash + Ord;
    fn median(&self, a: &Self::Point, b: &Self::Point, c: &Self::Point) -> Self::Point;
}

impl MedianAlgebra for MedianGraph {
    type Point = usize;
    fn median(&self, a: &usize, b: &usize, c: &usize) -> usize {
        MedianGraph::median(self, *a, *b, *c)
    }
}

/// Smallest median-closed set containing `s`, sorted.
pub fn subalgebra_closure<A: MedianAlgebra>(alg: &A, s: &[A::Point]) -> Result<Vec<A::Point>> {
    subalgebra_closure_capped(alg, s, CLOSURE_CAP)
}

pub fn subalgebra_closure_capped<A: MedianAlgebra>(alg: &A, s: &[A::Point], cap: usize) -> Result<Vec<A::Point>> {
    let mut pts: Vec<A::Point> = Vec::new();
    let mut seen: HashSet<A::Point> = HashSet::new();
    for p in s {
        if seen.insert(p.clone()) {
            pts.push(p.clone());
        }
    }
    // each triple i < j < k is visited once, when k is reached
    let mut k = 0;
    while k < pts.len() {
        for j in 0..k {
            for i in 0..j {
                let m = alg.median(&pts[i], &pts[j], &pts[k]);
                if seen.insert(m.clone()) {
                    pts.push(m);
                    if pts.len() > cap {
                        return Err(Error::ClosureBudgetExceeded { cap });
                    }
                }
            }
        }
        k += 1;
    }
    pts.sort();
    Ok(pts)
}

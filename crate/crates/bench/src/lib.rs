//! Inputs shared by the benchmarks.

use mediankit::generate::random_median_graph;
use mediankit::{Automorphism, Factor, FactorMap, GroupAction, MedianGraph, Pocset, ProductInstance, TreeMap, Word};
use rand::rngs::StdRng;
use rand::SeedableRng;

pub fn pocsets(seed: u64, n: usize, max_pairs: usize) -> Vec<(Pocset, MedianGraph)> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|_| random_median_graph(&mut rng, max_pairs, 64)).collect()
}

/// Left multiplication by the given words on the rank-`rank` tree.
pub fn tree_action(rank: usize, words: &[&str]) -> GroupAction {
    let inst = ProductInstance::new(vec![Factor::FreeTree { rank }]);
    let gens = words
        .iter()
        .map(|w| Automorphism::diagonal(vec![FactorMap::Tree(TreeMap::left_mult(Word::parse(w, rank).unwrap(), rank))]))
        .collect();
    GroupAction::new(inst, gens, vec![]).unwrap()
}

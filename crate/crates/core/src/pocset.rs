//! Finite pocsets, ultrafilters, chain covers and the dual median graph.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, MedianGraph};

/// Default cap on star-pairs for ultrafilter enumeration.
pub const ULTRAFILTER_PAIR_CAP: usize = 20;

/// A finite poset with an order-reversing involution.
///
/// The strict order is stored transitively closed: `less[a]` holds every `b`
/// with `a < b`.
#[derive(Clone, Debug)]
pub struct Pocset {
    names: Vec<String>,
    star: Vec<usize>,
    less: Vec<FixedBitSet>,
}

/// A broken pocset axiom, naming the offending elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PocsetViolation {
    StarFixedPoint { a: String },
    StarNotInvolution { a: String },
    NotOrderReversing { a: String, b: String },
    BelowOwnComplement { a: String },
    OrderCycle { a: String },
}

impl fmt::Display for PocsetViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PocsetViolation::StarFixedPoint { a } => write!(f, "fixed point of star: {a}"),
            PocsetViolation::StarNotInvolution { a } => write!(f, "star is not an involution at {a}"),
            PocsetViolation::NotOrderReversing { a, b } => {
                write!(f, "{a} < {b} but star({b}) < star({a}) fails")
            }
            PocsetViolation::BelowOwnComplement { a } => write!(f, "{a} lies below its complement"),
            PocsetViolation::OrderCycle { a } => write!(f, "order cycle through {a}"),
        }
    }
}

/// Choice of one element from every star-pair, pairwise intersecting.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ultrafilter {
    pub chosen: Vec<usize>,
}

/// Result of a bounded-width chain cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainPartition {
    Chains(Vec<Vec<usize>>),
    WidthExceeded { width: usize },
}

impl Pocset {
    /// Raw constructor: closes `order` transitively but not under `star`.
    pub fn new(names: Vec<String>, star: Vec<usize>, order: &[(usize, usize)]) -> Result<Self> {
        let n = names.len();
        if star.len() != n {
            return Err(invalid("star has wrong length"));
        }
        if let Some(&s) = star.iter().find(|&&s| s >= n) {
            return Err(invalid(format!("star image {s} out of range")));
        }
        let mut less = vec![FixedBitSet::with_capacity(n); n];
        for &(a, b) in order {
            if a >= n || b >= n {
                return Err(invalid(format!("order pair ({a},{b}) out of range")));
            }
            less[a].insert(b);
        }
        close_transitively(&mut less);
        Ok(Pocset { names, star, less })
    }

    /// Builds a pocset from named star-pairs and `(smaller, larger)` relations,
    /// closing the order under star and transitivity. Pair `i` gets ids `2i`, `2i+1`.
    pub fn from_pairs(pairs: &[(String, String)], order: &[(String, String)]) -> Result<Self> {
        let mut names = Vec::with_capacity(2 * pairs.len());
        let mut index = HashMap::new();
        for (a, b) in pairs {
            for name in [a, b] {
                if index.insert(name.clone(), names.len()).is_some() {
                    return Err(invalid(format!("duplicate halfspace name '{name}'")));
                }
                names.push(name.clone());
            }
        }
        let star: Vec<usize> = (0..names.len()).map(|i| i ^ 1).collect();
        let lookup = |s: &String| {
            index.get(s).copied().ok_or_else(|| invalid(format!("unknown halfspace '{s}'")))
        };
        let mut rel = Vec::with_capacity(2 * order.len());
        for (a, b) in order {
            let (a, b) = (lookup(a)?, lookup(b)?);
            rel.push((a, b));
            rel.push((b ^ 1, a ^ 1));
        }
        Pocset::new(names, star, &rel)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn star(&self, a: usize) -> usize {
        self.star[a]
    }

    /// Strict order `a < b`.
    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.less[a].contains(b)
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        a == b || self.lt(a, b)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.le(a, b) || self.lt(b, a)
    }

    /// Neither `a` nor `a*` is comparable with `b` (or `b*`).
    pub fn transverse(&self, a: usize, b: usize) -> bool {
        let (sa, sb) = (self.star[a], self.star[b]);
        !(self.comparable(a, b) || self.comparable(a, sb) || self.comparable(sa, b) || self.comparable(sa, sb))
    }

    /// One representative per star-pair (the smaller id).
    pub fn pair_representatives(&self) -> Vec<usize> {
        (0..self.len()).filter(|&a| a < self.star[a]).collect()
    }

    /// All ultrafilters, in lexicographic order of choices (representative first).
    pub fn enumerate_ultrafilters(&self) -> Result<Vec<Ultrafilter>> {
        self.enumerate_ultrafilters_capped(ULTRAFILTER_PAIR_CAP)
    }

    pub fn enumerate_ultrafilters_capped(&self, cap: usize) -> Result<Vec<Ultrafilter>> {
        let reps = self.pair_representatives();
        if reps.len() > cap {
            return Err(Error::InstanceTooLarge(format!("{} star-pairs exceed the cap of {cap}", reps.len())));
        }
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(reps.len());
        self.extend_ultrafilter(&reps, &mut chosen, &mut out);
        Ok(out)
    }

    fn extend_ultrafilter(&self, reps: &[usize], chosen: &mut Vec<usize>, out: &mut Vec<Ultrafilter>) {
        if chosen.len() == reps.len() {
            let mut c = chosen.clone();
            c.sort_unstable();
            out.push(Ultrafilter { chosen: c });
            return;
        }
        let r = reps[chosen.len()];
        for a in [r, self.star[r]] {
            if chosen.iter().all(|&b| !self.le(a, self.star[b]) && !self.le(b, self.star[a])) {
                chosen.push(a);
                self.extend_ultrafilter(reps, chosen, out);
                chosen.pop();
            }
        }
    }

    /// Minimum chain cover of `elems`, or `WidthExceeded` when wider than `max_width`.
    pub fn chain_partition(&self, elems: &[usize], max_width: usize) -> ChainPartition {
        chain_partition_by(elems, max_width, |a, b| self.lt(a, b))
    }
}

fn close_transitively(less: &mut [FixedBitSet]) {
    let n = less.len();
    for k in 0..n {
        for i in 0..n {
            if less[i].contains(k) {
                let row = less[k].clone();
                less[i].union_with(&row);
            }
        }
    }
}

/// Checks the pocset axioms; an empty result means `p` is a pocset.
pub fn verify_pocset(p: &Pocset) -> Vec<PocsetViolation> {
    let mut out = Vec::new();
    let name = |a: usize| p.names[a].clone();
    for a in 0..p.len() {
        let s = p.star[a];
        if s == a {
            out.push(PocsetViolation::StarFixedPoint { a: name(a) });
        } else if p.star[s] != a {
            out.push(PocsetViolation::StarNotInvolution { a: name(a) });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for a in 0..p.len() {
        if p.lt(a, a) {
            out.push(PocsetViolation::OrderCycle { a: name(a) });
        }
    }
    for a in 0..p.len() {
        for b in p.less[a].ones() {
            if a != b && !p.lt(p.star[b], p.star[a]) {
                out.push(PocsetViolation::NotOrderReversing { a: name(a), b: name(b) });
            }
        }
        if p.lt(a, p.star[a]) {
            out.push(PocsetViolation::BelowOwnComplement { a: name(a) });
        }
    }
    out
}

/// Minimum chain cover under the strict order `lt` (assumed transitive),
/// via maximum bipartite matching. Chains run from smallest to largest.
pub fn chain_partition_by(elems: &[usize], max_width: usize, lt: impl Fn(usize, usize) -> bool) -> ChainPartition {
    let n = elems.len();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| i != j && lt(elems[i], elems[j])).collect())
        .collect();
    let mut match_right: Vec<Option<usize>> = vec![None; n];
    let mut match_left: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let mut seen = vec![false; n];
        augment(i, &succ, &mut seen, &mut match_left, &mut match_right);
    }
    let matched = match_left.iter().filter(|m| m.is_some()).count();
    let width = n - matched;
    if width > max_width {
        return ChainPartition::WidthExceeded { width };
    }
    let mut chains = Vec::with_capacity(width);
    for start in 0..n {
        if match_right[start].is_some() {
            continue;
        }
        let mut chain = vec![elems[start]];
        let mut cur = start;
        while let Some(next) = match_left[cur] {
            chain.push(elems[next]);
            cur = next;
        }
        chains.push(chain);
    }
    chains.sort();
    ChainPartition::Chains(chains)
}

fn augment(
    i: usize,
    succ: &[Vec<usize>],
    seen: &mut [bool],
    match_left: &mut [Option<usize>],
    match_right: &mut [Option<usize>],
) -> bool {
    for &j in &succ[i] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        if match_right[j].is_none() || augment(match_right[j].unwrap(), succ, seen, match_left, match_right) {
            match_left[i] = Some(j);
            match_right[j] = Some(i);
            return true;
        }
    }
    false
}

/// Vertices are ultrafilters, edges join ultrafilters differing in one pair.
pub fn realize_median_graph(p: &Pocset) -> Result<MedianGraph> {
    let ufs = p.enumerate_ultrafilters()?;
    let reps = p.pair_representatives();
    let key = |u: &Ultrafilter| -> Vec<bool> { reps.iter().map(|r| u.chosen.binary_search(r).is_ok()).collect() };
    let index: HashMap<Vec<bool>, usize> = ufs.iter().enumerate().map(|(i, u)| (key(u), i)).collect();
    let mut edges = Vec::new();
    for (i, u) in ufs.iter().enumerate() {
        let k = key(u);
        for bit in 0..k.len() {
            let mut f = k.clone();
            f[bit] = !f[bit];
            if let Some(&j) = index.get(&f) {
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    let labels = ufs
        .iter()
        .map(|u| format!("{{{}}}", u.chosen.iter().map(|&a| p.name(a)).collect::<Vec<_>>().join(",")))
        .collect();
    Ok(MedianGraph::new_unchecked(Graph::new(labels, &edges)?))
}

/// The pocset of halfspaces of a median graph: wall `i` gives ids `2i` (side A) and `2i+1`.
pub fn halfspace_pocset(g: &MedianGraph) -> Pocset {
    let n = 2 * g.walls().len();
    let names = (0..n)
        .map(|h| if h % 2 == 0 { format!("h{}", h / 2) } else { format!("h{}*", h / 2) })
        .collect();
    let star = (0..n).map(|h| h ^ 1).collect();
    let mut order = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let (sa, sb) = (g.halfspace(a), g.halfspace(b));
            if a != b && sa.is_subset(sb) && sa != sb {
                order.push((a, b));
            }
        }
    }
    Pocset::new(names, star, &order).expect("halfspace pocset is well formed")
}

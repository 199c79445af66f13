//! Finite median graphs: walls, medians, convexity, rank, products and quotients.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{invalid, Error, Result};

/// Quadruple count above which axiom (3) is sampled instead of exhausted.
pub const AXIOM3_FULL_LIMIT: usize = 12;
pub const AXIOM3_SAMPLES: usize = 20_000;
/// Walls above which exact rank search is refused.
pub const RANK_WALL_CAP: usize = 40;
const UNREACHABLE: u32 = u32::MAX;

/// Simple undirected graph with labels and an all-pairs distance table.
#[derive(Clone, Debug)]
pub struct Graph {
    labels: Vec<String>,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    dist: Vec<u32>,
}

impl Graph {
    pub fn new(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        let mut adj = vec![Vec::new(); n];
        let mut list = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(invalid(format!("self-loop at {u}")));
            }
            let e = (u.min(v), u.max(v));
            if !adj[u].contains(&v) {
                adj[u].push(v);
                adj[v].push(u);
                list.push(e);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        list.sort_unstable();
        let mut dist = vec![UNREACHABLE; n * n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            dist[s * n + s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                let d = dist[s * n + u];
                for &v in &adj[u] {
                    if dist[s * n + v] == UNREACHABLE {
                        dist[s * n + v] = d + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        Ok(Graph { labels, adj, edges: list, dist })
    }

    /// Graph with vertices labelled by their index.
    pub fn unlabeled(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Graph::new((0..n).map(|i| i.to_string()).collect(), edges)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Graph distance, `u32::MAX` when disconnected.
    pub fn dist(&self, u: usize, v: usize) -> u32 {
        self.dist[u * self.len() + v]
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || (0..self.len()).all(|v| self.dist(0, v) != UNREACHABLE)
    }

    pub fn interval(&self, x: usize, y: usize) -> FixedBitSet {
        let n = self.len();
        let dxy = self.dist(x, y);
        let mut s = FixedBitSet::with_capacity(n);
        for z in 0..n {
            if self.dist(x, z) as u64 + self.dist(z, y) as u64 == dxy as u64 {
                s.insert(z);
            }
        }
        s
    }

    /// Median from the distance equation; `NotMedian` unless exactly one vertex qualifies.
    pub fn metric_median(&self, x: usize, y: usize, z: usize) -> Result<usize> {
        let mut s = self.interval(x, y);
        s.intersect_with(&self.interval(y, z));
        s.intersect_with(&self.interval(x, z));
        let mut it = s.ones();
        match (it.next(), it.next()) {
            (Some(m), None) => Ok(m),
            (None, _) => Err(Error::NotMedian(format!("no median for ({x},{y},{z})"))),
            (Some(_), Some(_)) => Err(Error::NotMedian(format!("several medians for ({x},{y},{z})"))),
        }
    }

    fn all_intervals(&self) -> Vec<FixedBitSet> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                out.push(self.interval(x, y));
            }
        }
        out
    }
}

/// A failed median-graph condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MedianViolation {
    Disconnected { vertex: usize },
    NoMedian { x: usize, y: usize, z: usize },
    SeveralMedians { x: usize, y: usize, z: usize, count: usize },
    Axiom3 { x: usize, y: usize, z: usize, w: usize },
}

impl fmt::Display for MedianViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MedianViolation::Disconnected { vertex } => write!(f, "vertex {vertex} unreachable from 0"),
            MedianViolation::NoMedian { x, y, z } => write!(f, "no median for ({x},{y},{z})"),
            MedianViolation::SeveralMedians { x, y, z, count } => {
                write!(f, "{count} medians for ({x},{y},{z})")
            }
            MedianViolation::Axiom3 { x, y, z, w } => write!(f, "axiom (3) fails on ({x},{y},{z},{w})"),
        }
    }
}

/// Maximum number of triple violations collected before stopping.
const VIOLATION_CAP: usize = 64;

/// Empty iff `g` is a median graph. Axiom (3) is sampled above 12 vertices.
pub fn verify_median_graph(g: &Graph) -> Vec<MedianViolation> {
    let n = g.len();
    if let Some(v) = (0..n).find(|&v| g.dist(0, v) == UNREACHABLE) {
        return vec![MedianViolation::Disconnected { vertex: v }];
    }
    let iv = g.all_intervals();
    let at = |x: usize, y: usize| &iv[x * n + y];
    let mut out = Vec::new();
    let mut med = vec![usize::MAX; n * n * n];
    'outer: for x in 0..n {
        for y in x + 1..n {
            let mut xy = at(x, y).clone();
            let xy_base = xy.clone();
            for z in y + 1..n {
                xy.clone_from(&xy_base);
                xy.intersect_with(at(y, z));
                xy.intersect_with(at(x, z));
                let count = xy.count_ones(..);
                if count == 1 {
                    let m = xy.ones().next().unwrap();
                    for (a, b, c) in [(x, y, z), (x, z, y), (y, x, z), (y, z, x), (z, x, y), (z, y, x)] {
                        med[(a * n + b) * n + c] = m;
                    }
                } else {
                    out.push(if count == 0 {
                        MedianViolation::NoMedian { x, y, z }
                    } else {
                        MedianViolation::SeveralMedians { x, y, z, count }
                    });
                    if out.len() >= VIOLATION_CAP {
                        break 'outer;
                    }
                }
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    let m = |a: usize, b: usize, c: usize| -> usize {
        if a == b || a == c {
            a
        } else if b == c {
            b
        } else {
            med[(a * n + b) * n + c]
        }
    };
    let mut check = |x: usize, y: usize, z: usize, w: usize| {
        if m(m(x, y, z), y, w) != m(x, y, m(z, y, w)) {
            out.push(MedianViolation::Axiom3 { x, y, z, w });
        }
    };
    if n <= AXIOM3_FULL_LIMIT {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for w in 0..n {
                        check(x, y, z, w);
                    }
                }
            }
        }
    } else {
        let mut rng = StdRng::seed_from_u64(0x6d65_6469_616e);
        for _ in 0..AXIOM3_SAMPLES {
            check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        }
    }
    out.truncate(VIOLATION_CAP);
    out
}

/// A wall: two complementary convex halfspaces. Side A contains vertex 0.
#[derive(Clone, Debug)]
pub struct Wall {
    pub id: usize,
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
    /// The Θ-class: edges crossing the wall, as `(u, v)` with `u` in side A.
    pub edges: Vec<(usize, usize)>,
}

/// A validated median graph with its wall system.
///
/// Halfspace `2i` is side A of wall `i`, `2i+1` is side B.
#[derive(Clone, Debug)]
pub struct MedianGraph {
    g: Graph,
    walls: Vec<Wall>,
    halfspaces: Vec<FixedBitSet>,
    sig: Vec<FixedBitSet>,
    sig_index: HashMap<FixedBitSet, usize>,
    edge_wall: HashMap<(usize, usize), usize>,
}

impl MedianGraph {
    /// Validates `g` and computes its walls.
    pub fn new(g: Graph) -> Result<Self> {
        if g.is_empty() {
            return Err(invalid("empty graph"));
        }
        let v = verify_median_graph(&g);
        if let Some(first) = v.first() {
            return Err(Error::NotMedian(format!("{first} ({} violations)", v.len())));
        }
        Ok(Self::new_unchecked(g))
    }

    /// Skips validation; only for graphs known to be median (generators, duality).
    pub fn new_unchecked(g: Graph) -> Self {
        let n = g.len();
        let mut by_side: HashMap<FixedBitSet, usize> = HashMap::new();
        let mut raw: Vec<(FixedBitSet, Vec<(usize, usize)>)> = Vec::new();
        for &(u, v) in g.edges() {
            let mut wu = FixedBitSet::with_capacity(n);
            for w in 0..n {
                if g.dist(w, u) < g.dist(w, v) {
                    wu.insert(w);
                }
            }
            let (side_a, e) = if wu.contains(0) {
                (wu, (u, v))
            } else {
                let mut c = wu;
                c.toggle_range(..);
                (c, (v, u))
            };
            match by_side.get(&side_a) {
                Some(&i) => raw[i].1.push(e),
                None => {
                    by_side.insert(side_a.clone(), raw.len());
                    raw.push((side_a, vec![e]));
                }
            }
        }
        for r in &mut raw {
            r.1.sort_unstable_by_key(|&(a, b)| (a.min(b), a.max(b)));
        }
        raw.sort_by_key(|r| {
            let (a, b) = r.1[0];
            (a.min(b), a.max(b))
        });
        let mut walls = Vec::with_capacity(raw.len());
        let mut halfspaces = Vec::with_capacity(2 * raw.len());
        let mut edge_wall = HashMap::new();
        for (id, (side_a, edges)) in raw.into_iter().enumerate() {
            let mut side_b = side_a.clone();
            side_b.toggle_range(..);
            for &(u, v) in &edges {
                edge_wall.insert((u, v), id);
                edge_wall.insert((v, u), id);
            }
            walls.push(Wall { id, side_a: side_a.ones().collect(), side_b: side_b.ones().collect(), edges });
            halfspaces.push(side_a);
            halfspaces.push(side_b);
        }
        let k = walls.len();
        let mut sig = vec![FixedBitSet::with_capacity(k); n];
        for (i, w) in walls.iter().enumerate() {
            for &v in &w.side_b {
                sig[v].insert(i);
            }
        }
        let sig_index = sig.iter().enumerate().map(|(v, s)| (s.clone(), v)).collect();
        MedianGraph { g, walls, halfspaces, sig, sig_index, edge_wall }
    }

    pub fn from_edges(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        MedianGraph::new(Graph::new(labels, edges)?)
    }

    pub fn graph(&self) -> &Graph {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.g.edge_count()
    }

    pub fn label(&self, v: usize) -> &str {
        self.g.label(v)
    }

    pub fn dist(&self, u: usize, v: usize) -> usize {
        self.g.dist(u, v) as usize
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn halfspace_count(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn halfspace(&self, h: usize) -> &FixedBitSet {
        &self.halfspaces[h]
    }

    /// The halfspace of wall `w` containing `v`.
    pub fn halfspace_containing(&self, w: usize, v: usize) -> usize {
        2 * w + usize::from(self.sig[v].contains(w))
    }

    /// Wall crossed by the edge `{u, v}`.
    pub fn wall_of_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_wall.get(&(u, v)).copied()
    }

    /// Median via majority vote on wall sides.
    pub fn median(&self, x: usize, y: usize, z: usize) -> usize {
        let (a, b, c) = (&self.sig[x], &self.sig[y], &self.sig[z]);
        let mut ab = a.clone();
        ab.intersect_with(b);
        let mut bc = b.clone();
        bc.intersect_with(c);
        let mut ac = a.clone();
        ac.intersect_with(c);
        ab.union_with(&bc);
        ab.union_with(&ac);
        *self.sig_index.get(&ab).expect("median graph has a median for every triple")
    }

    /// Walls separating `x` and `y`, sorted.
    pub fn separators(&self, x: usize, y: usize) -> Vec<usize> {
        let mut s = self.sig[x].clone();
        s.symmetric_difference_with(&self.sig[y]);
        s.ones().collect()
    }

    pub fn interval(&self, x: usize, y: usize) -> FixedBitSet {
        self.g.interval(x, y)
    }

    /// All four quarter intersections of the two walls are nonempty.
    pub fn transverse(&self, w1: usize, w2: usize) -> bool {
        if w1 == w2 {
            return false;
        }
        [2 * w1, 2 * w1 + 1]
            .iter()
            .all(|&a| [2 * w2, 2 * w2 + 1].iter().all(|&b| !self.halfspaces[a].is_disjoint(&self.halfspaces[b])))
    }

    pub fn is_convex(&self, set: &FixedBitSet) -> bool {
        let members: Vec<usize> = set.ones().collect();
        members
            .iter()
            .all(|&x| members.iter().all(|&y| self.interval(x, y).is_subset(set)))
    }

    /// Smallest convex superset of `s`, by interval closure to fixpoint.
    pub fn convex_hull(&self, s: &[usize]) -> ConvexSet {
        let n = self.len();
        let mut members = FixedBitSet::with_capacity(n);
        let mut queue: Vec<usize> = Vec::new();
        for &x in s {
            if !members.put(x) {
                queue.push(x);
            }
        }
        let mut done: Vec<usize> = Vec::new();
        while let Some(x) = queue.pop() {
            for &y in &done {
                for z in self.interval(x, y).ones() {
                    if !members.put(z) {
                        queue.push(z);
                    }
                }
            }
            done.push(x);
        }
        ConvexSet::new(self, members)
    }

    /// Nearest member of `c` to `x`.
    pub fn gate(&self, c: &ConvexSet, x: usize) -> usize {
        c.gate[x]
    }

    /// Maximum number of pairwise-transverse walls.
    pub fn rank(&self) -> Result<usize> {
        let k = self.walls.len();
        if k > RANK_WALL_CAP {
            return Err(Error::InstanceTooLarge(format!("{k} walls exceed the rank cap of {RANK_WALL_CAP}")));
        }
        let mut nbr = vec![0u64; k];
        for i in 0..k {
            for j in i + 1..k {
                if self.transverse(i, j) {
                    nbr[i] |= 1 << j;
                    nbr[j] |= 1 << i;
                }
            }
        }
        let all = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        let mut best = 0;
        bron_kerbosch(0, all, 0, &nbr, &mut best);
        Ok(best)
    }

    /// Collapses every wall outside `u`.
    pub fn restriction_quotient(&self, u: &[usize]) -> RestrictionQuotient {
        let mut key_of: HashMap<Vec<bool>, usize> = HashMap::new();
        let mut projection = Vec::with_capacity(self.len());
        let mut reps = Vec::new();
        for v in 0..self.len() {
            let key: Vec<bool> = u.iter().map(|&w| self.sig[v].contains(w)).collect();
            let next = key_of.len();
            let c = *key_of.entry(key).or_insert_with(|| {
                reps.push(v);
                next
            });
            projection.push(c);
        }
        let mut edges = Vec::new();
        for &(a, b) in self.g.edges() {
            let (pa, pb) = (projection[a], projection[b]);
            if pa != pb {
                edges.push((pa, pb));
            }
        }
        let labels = reps.iter().map(|&v| self.label(v).to_string()).collect();
        let graph = MedianGraph::new_unchecked(Graph::new(labels, &edges).expect("quotient edges in range"));
        RestrictionQuotient { graph, projection, walls: u.to_vec() }
    }

    /// Splits into irreducible factors: components of the non-transversality graph.
    pub fn decompose_product(&self) -> ProductDecomposition {
        let k = self.walls.len();
        let mut comp: Vec<usize> = (0..k).collect();
        fn find(c: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while c[r] != r {
                r = c[r];
            }
            c[x] = r;
            r
        }
        for i in 0..k {
            for j in i + 1..k {
                if !self.transverse(i, j) {
                    let (a, b) = (find(&mut comp, i), find(&mut comp, j));
                    comp[a.max(b)] = a.min(b);
                }
            }
        }
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for w in 0..k {
            let r = find(&mut comp, w);
            let next = classes.len();
            let i = *slot.entry(r).or_insert(next);
            if i == classes.len() {
                classes.push(Vec::new());
            }
            classes[i].push(w);
        }
        let factors = classes.iter().map(|c| self.restriction_quotient(c)).collect();
        ProductDecomposition { classes, factors }
    }

    /// Cartesian product; vertex order is lexicographic with the first factor most significant.
    pub fn product(factors: &[&MedianGraph]) -> MedianGraph {
        let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
        for f in factors {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    (0..f.len()).map(move |v| {
                        let mut t = t.clone();
                        t.push(v);
                        t
                    })
                })
                .collect();
        }
        let index: HashMap<&Vec<usize>, usize> = tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let mut edges = Vec::new();
        for (i, t) in tuples.iter().enumerate() {
            for (k, f) in factors.iter().enumerate() {
                for &v in f.graph().neighbors(t[k]) {
                    if v > t[k] {
                        let mut s = t.clone();
                        s[k] = v;
                        edges.push((i, index[&s]));
                    }
                }
            }
        }
        let labels = tuples
            .iter()
            .map(|t| {
                let parts: Vec<&str> = t.iter().zip(factors).map(|(&v, f)| f.label(v)).collect();
                format!("({})", parts.join(","))
            })
            .collect();
        MedianGraph::new_unchecked(Graph::new(labels, &edges).expect("product edges in range"))
    }

    /// `perm` is a graph automorphism (hence a median automorphism).
    pub fn is_automorphism(&self, perm: &[usize]) -> bool {
        is_graph_isomorphism(&self.g, &self.g, perm)
    }

    /// Image in `dst` of halfspace `h` under the isomorphism `perm: self → dst`.
    pub fn map_halfspace(&self, perm: &[usize], h: usize, dst: &MedianGraph) -> usize {
        let (u, v) = self.walls[h / 2].edges[0];
        let (inside, _) = if self.halfspaces[h].contains(u) { (u, v) } else { (v, u) };
        let w = dst.wall_of_edge(perm[u], perm[v]).expect("isomorphism maps edges to edges");
        dst.halfspace_containing(w, perm[inside])
    }

    /// Vertex signature over walls (bit set = side B).
    pub fn signature(&self, v: usize) -> &FixedBitSet {
        &self.sig[v]
    }
}

fn bron_kerbosch(r: u32, mut p: u64, mut x: u64, nbr: &[u64], best: &mut usize) {
    if p == 0 {
        if x == 0 {
            *best = (*best).max(r as usize);
        }
        return;
    }
    if r as usize + p.count_ones() as usize <= *best {
        return;
    }
    let pivot = (p | x).trailing_zeros() as usize;
    let mut cand = p & !nbr[pivot];
    while cand != 0 {
        let v = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        bron_kerbosch(r + 1, p & nbr[v], x & nbr[v], nbr, best);
        p &= !(1 << v);
        x |= 1 << v;
    }
}

/// A convex vertex set with its gate (nearest-point) table.
#[derive(Clone, Debug)]
pub struct ConvexSet {
    pub members: FixedBitSet,
    pub gate: Vec<usize>,
}

impl ConvexSet {
    fn new(g: &MedianGraph, members: FixedBitSet) -> Self {
        let gate = (0..g.len())
            .map(|x| members.ones().min_by_key(|&c| (g.dist(x, c), c)).expect("nonempty convex set"))
            .collect();
        ConvexSet { members, gate }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(v)
    }

    pub fn vertices(&self) -> Vec<usize> {
        self.members.ones().collect()
    }
}

/// Quotient graph and the projection from the original vertices.
#[derive(Clone, Debug)]
pub struct RestrictionQuotient {
    pub graph: MedianGraph,
    pub projection: Vec<usize>,
    pub walls: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ProductDecomposition {
    pub classes: Vec<Vec<usize>>,
    pub factors: Vec<RestrictionQuotient>,
}

impl ProductDecomposition {
    pub fn factor_graphs(&self) -> Vec<&MedianGraph> {
        self.factors.iter().map(|f| &f.graph).collect()
    }

    /// Product of the factors.
    pub fn recombine(&self) -> MedianGraph {
        MedianGraph::product(&self.factor_graphs())
    }

    /// The map `v ↦ (projections)` is a bijection onto the product carrying edges to edges.
    pub fn is_reconstruction_of(&self, g: &MedianGraph) -> bool {
        let sizes: Vec<usize> = self.factors.iter().map(|f| f.graph.len()).collect();
        if sizes.iter().product::<usize>() != g.len() {
            return false;
        }
        let tuple = |v: usize| -> Vec<usize> { self.factors.iter().map(|f| f.projection[v]).collect() };
        let mut seen = std::collections::HashSet::new();
        if !(0..g.len()).all(|v| seen.insert(tuple(v))) {
            return false;
        }
        let edges_in_product: usize = (0..self.factors.len())
            .map(|k| {
                let others: usize = sizes.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, s)| s).product();
                self.factors[k].graph.edge_count() * others
            })
            .sum();
        edges_in_product == g.edge_count()
            && g.graph().edges().iter().all(|&(u, v)| {
                let (a, b) = (tuple(u), tuple(v));
                let diff: Vec<usize> = (0..a.len()).filter(|&k| a[k] != b[k]).collect();
                diff.len() == 1 && self.factors[diff[0]].graph.graph().has_edge(a[diff[0]], b[diff[0]])
            })
    }
}

fn is_graph_isomorphism(a: &Graph, b: &Graph, perm: &[usize]) -> bool {
    if perm.len() != a.len() || a.len() != b.len() || a.edge_count() != b.edge_count() {
        return false;
    }
    let mut seen = vec![false; b.len()];
    for &p in perm {
        if p >= b.len() || std::mem::replace(&mut seen[p], true) {
            return false;
        }
    }
    a.edges().iter().all(|&(u, v)| b.has_edge(perm[u], perm[v]))
}

fn profile(g: &Graph, v: usize) -> Vec<u32> {
    let mut p: Vec<u32> = (0..g.len()).map(|u| g.dist(v, u)).collect();
    p.sort_unstable();
    p
}

/// Search for isomorphisms `a → b` preserving distances; stops after `cap` results.
pub fn isomorphisms(a: &Graph, b: &Graph, cap: usize) -> Vec<Vec<usize>> {
    let n = a.len();
    if n != b.len() || a.edge_count() != b.edge_count() {
        return Vec::new();
    }
    let pa: Vec<Vec<u32>> = (0..n).map(|v| profile(a, v)).collect();
    let pb: Vec<Vec<u32>> = (0..n).map(|v| profile(b, v)).collect();
    let mut ms = pa.clone();
    ms.sort();
    let mut mt = pb.clone();
    mt.sort();
    if ms != mt {
        return Vec::new();
    }
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![usize::MAX; n];
    let mut placed = vec![false; n];
    for s in 0..n {
        if placed[s] {
            continue;
        }
        placed[s] = true;
        let start = order.len();
        order.push(s);
        let mut i = start;
        while i < order.len() {
            let u = order[i];
            for &v in a.neighbors(u) {
                if !placed[v] {
                    placed[v] = true;
                    parent[v] = u;
                    order.push(v);
                }
            }
            i += 1;
        }
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut out = Vec::new();
    iso_extend(a, b, &pa, &pb, &order, &parent, 0, &mut map, &mut used, &mut out, cap);
    out
}

#[allow(clippy::too_many_arguments)]
fn iso_extend(
    a: &Graph,
    b: &Graph,
    pa: &[Vec<u32>],
    pb: &[Vec<u32>],
    order: &[usize],
    parent: &[usize],
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) {
    if out.len() >= cap {
        return;
    }
    if depth == order.len() {
        out.push(map.to_vec());
        return;
    }
    let v = order[depth];
    let cands: Vec<usize> = if parent[v] == usize::MAX {
        (0..b.len()).collect()
    } else {
        b.neighbors(map[parent[v]]).to_vec()
    };
    for c in cands {
        if used[c] || pa[v] != pb[c] {
            continue;
        }
        if order[..depth].iter().all(|&u| a.dist(u, v) == b.dist(map[u], c)) {
            map[v] = c;
            used[c] = true;
            iso_extend(a, b, pa, pb, order, parent, depth + 1, map, used, out, cap);
            used[c] = false;
            map[v] = usize::MAX;
            if out.len() >= cap {
                return;
            }
        }
    }
}

pub fn find_isomorphism(a: &Graph, b: &Graph) -> Option<Vec<usize>> {
    isomorphisms(a, b, 1).pop()
}

pub fn is_isomorphic(a: &Graph, b: &Graph) -> bool {
    find_isomorphism(a, b).is_some()
}

/// Automorphisms of `g` (at most `cap`), identity first.
pub fn automorphisms(g: &Graph, cap: usize) -> Vec<Vec<usize>> {
    isomorphisms(g, g, cap)
}

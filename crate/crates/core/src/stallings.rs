//! Stallings foldings for subgroups of free groups.
//!
//! Every edge carries a label in the free group on the input generators, so a
//! closed path at the base records which product of generators it spells.
//! Folding keeps these values correct by gauge transformations at the vertex
//! being merged away.

use std::collections::{HashMap, VecDeque};

use crate::word::{Letter, Word};

#[derive(Clone, Debug)]
struct Edge {
    src: usize,
    letter: Letter,
    dst: usize,
    label: Word,
}

/// Folded graph of `⟨words⟩ ≤ F(rank)` with its core.
#[derive(Clone, Debug)]
pub struct Stallings {
    rank: usize,
    edges: Vec<Edge>,
    base: usize,
    delta: Word,
    out: HashMap<(usize, Letter), (usize, usize)>,
    core: Vec<bool>,
    core_edges: usize,
    hair: Vec<Letter>,
    vertex_count: usize,
}

impl Stallings {
    /// Folds the bouquet of `words`; generator `k` is recorded as label letter `k + 1`.
    pub fn new(rank: usize, words: &[Word]) -> Stallings {
        let mut edges = Vec::new();
        let mut next = 1;
        for (k, w) in words.iter().enumerate() {
            if w.is_empty() {
                continue;
            }
            let n = w.len();
            let mut prev = 0;
            for (t, &l) in w.letters().iter().enumerate() {
                let dst = if t + 1 == n {
                    0
                } else {
                    next += 1;
                    next - 1
                };
                let label = if t == 0 { Word::letter(k as Letter + 1) } else { Word::identity() };
                let (src, dst, letter, label) =
                    if l > 0 { (prev, dst, l, label) } else { (dst, prev, -l, label.inverse()) };
                edges.push(Edge { src, letter, dst, label });
                prev = if l > 0 { dst } else { src };
            }
        }
        let mut s = Stallings {
            rank,
            edges,
            base: 0,
            delta: Word::identity(),
            out: HashMap::new(),
            core: Vec::new(),
            core_edges: 0,
            hair: Vec::new(),
            vertex_count: 0,
        };
        s.fold();
        s.compact();
        s.trim();
        s
    }

    fn gauge(&mut self, x: usize, d: &Word) {
        let di = d.inverse();
        for e in &mut self.edges {
            match (e.src == x, e.dst == x) {
                (true, true) => e.label = d.mul(&e.label).mul(&di),
                (true, false) => e.label = d.mul(&e.label),
                (false, true) => e.label = e.label.mul(&di),
                _ => {}
            }
        }
        if x == self.base {
            self.delta = d.mul(&self.delta);
        }
    }

    fn find_fold(&self) -> Option<(usize, usize, bool)> {
        let mut seen: HashMap<(usize, Letter), usize> = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            if let Some(&j) = seen.get(&(e.src, e.letter)) {
                return Some((j, i, true));
            }
            seen.insert((e.src, e.letter), i);
            if let Some(&j) = seen.get(&(e.dst, -e.letter)) {
                return Some((j, i, false));
            }
            seen.insert((e.dst, -e.letter), i);
        }
        None
    }

    fn fold(&mut self) {
        while let Some((a, b, forward)) = self.find_fold() {
            let step = |e: &Edge| if forward { (e.dst, e.label.clone()) } else { (e.src, e.label.inverse()) };
            let (far_a, mu_a) = step(&self.edges[a]);
            let (far_b, mu_b) = step(&self.edges[b]);
            let u = if forward { self.edges[a].src } else { self.edges[a].dst };
            if far_a == far_b {
                self.edges.remove(b);
                continue;
            }
            let (keep, gone, mu_keep, mu_gone, drop) =
                if far_b != u { (far_a, far_b, mu_a, mu_b, b) } else { (far_b, far_a, mu_b, mu_a, a) };
            let d = mu_keep.inverse().mul(&mu_gone);
            self.gauge(gone, &d);
            self.edges.remove(drop);
            for e in &mut self.edges {
                if e.src == gone {
                    e.src = keep;
                }
                if e.dst == gone {
                    e.dst = keep;
                }
            }
            if self.base == gone {
                self.base = keep;
            }
        }
    }

    fn compact(&mut self) {
        let mut ids: HashMap<usize, usize> = HashMap::new();
        ids.insert(self.base, 0);
        for e in &self.edges {
            for v in [e.src, e.dst] {
                let n = ids.len();
                ids.entry(v).or_insert(n);
            }
        }
        for e in &mut self.edges {
            e.src = ids[&e.src];
            e.dst = ids[&e.dst];
        }
        self.base = 0;
        self.vertex_count = ids.len();
        self.out.clear();
        for (i, e) in self.edges.iter().enumerate() {
            self.out.insert((e.src, e.letter), (e.dst, i));
            self.out.insert((e.dst, -e.letter), (e.src, i));
        }
    }

    fn trim(&mut self) {
        let n = self.vertex_count;
        let mut alive = vec![true; n];
        let mut edge_alive = vec![true; self.edges.len()];
        let mut degree = vec![0usize; n];
        for e in &self.edges {
            degree[e.src] += 1;
            degree[e.dst] += 1;
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
        while let Some(v) = queue.pop_front() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for (i, e) in self.edges.iter().enumerate() {
                if edge_alive[i] && (e.src == v || e.dst == v) {
                    edge_alive[i] = false;
                    for w in [e.src, e.dst] {
                        if w != v {
                            degree[w] -= 1;
                            if degree[w] <= 1 && alive[w] {
                                queue.push_back(w);
                            }
                        }
                    }
                }
            }
        }
        self.core = alive;
        self.core_edges = edge_alive.iter().filter(|&&a| a).count();
        self.hair = if self.is_trivial() { Vec::new() } else { self.path_to_core() };
    }

    fn path_to_core(&self) -> Vec<Letter> {
        let mut prev: HashMap<usize, (usize, Letter)> = HashMap::new();
        let mut queue = VecDeque::from([self.base]);
        prev.insert(self.base, (self.base, 0));
        while let Some(v) = queue.pop_front() {
            if self.core[v] {
                let mut path = Vec::new();
                let mut cur = v;
                while cur != self.base {
                    let (p, l) = prev[&cur];
                    path.push(l);
                    cur = p;
                }
                path.reverse();
                return path;
            }
            for l in self.letters() {
                if let Some(&(w, _)) = self.out.get(&(v, l)) {
                    if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(w) {
                        e.insert((v, l));
                        queue.push_back(w);
                    }
                }
            }
        }
        Vec::new()
    }

    fn letters(&self) -> impl Iterator<Item = Letter> {
        crate::word::letters_of_rank(self.rank)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The subgroup is trivial.
    pub fn is_trivial(&self) -> bool {
        self.core_edges == 0
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn core_vertex_count(&self) -> usize {
        self.core.iter().filter(|&&c| c).count()
    }

    pub fn core_edge_count(&self) -> usize {
        self.core_edges
    }

    /// Core edges as `(src, letter, dst)` with positive letters.
    pub fn core_graph(&self) -> Vec<(usize, Letter, usize)> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .filter(|e| self.core[e.src] && self.core[e.dst])
            .map(|e| (e.src, e.letter, e.dst))
            .collect();
        out.sort();
        out
    }

    /// Rank of the subgroup, as the Euler characteristic of the core.
    pub fn subgroup_rank(&self) -> usize {
        if self.is_trivial() {
            0
        } else {
            self.core_edges + 1 - self.core_vertex_count()
        }
    }

    /// The minimal subtree is the whole tree.
    pub fn is_finite_index(&self) -> bool {
        !self.is_trivial()
            && self.core.iter().all(|&c| c)
            && (0..self.vertex_count).all(|v| self.letters().all(|l| self.out.contains_key(&(v, l))))
    }

    /// The minimal subtree is a single axis.
    pub fn is_cyclic(&self) -> bool {
        self.subgroup_rank() == 1
    }

    fn read_from(&self, start: usize, w: &Word) -> Option<(usize, Word)> {
        let mut v = start;
        let mut val = Word::identity();
        for &l in w.letters() {
            let &(next, e) = self.out.get(&(v, l))?;
            let lab = &self.edges[e].label;
            val = if l == self.edges[e].letter { val.mul(lab) } else { val.mul(&lab.inverse()) };
            v = next;
        }
        Some((v, val))
    }

    fn true_value(&self, closed: &Word) -> Word {
        self.delta.inverse().mul(closed).mul(&self.delta)
    }

    /// Product of generators equal to `u`, if `u` lies in the subgroup.
    pub fn member(&self, u: &Word) -> Option<Word> {
        match self.read_from(self.base, u) {
            Some((v, val)) if v == self.base => Some(self.true_value(&val)),
            _ => None,
        }
    }

    pub fn contains_vertex(&self, v: &Word) -> bool {
        matches!(self.read_from(self.base, v), Some((p, _)) if self.core[p])
    }

    /// Whether the tree edge `{v, vx}` lies in the minimal subtree.
    pub fn contains_edge(&self, v: &Word, x: Letter) -> bool {
        match self.read_from(self.base, v) {
            Some((p, _)) if self.core[p] => matches!(self.out.get(&(p, x)), Some(&(q, _)) if self.core[q]),
            _ => false,
        }
    }

    /// Nearest point of the minimal subtree to the identity.
    pub fn hair_word(&self) -> Word {
        Word::new(self.hair.iter().copied())
    }

    /// Nearest point of the minimal subtree to `v`.
    pub fn project(&self, v: &Word) -> Option<Word> {
        if self.is_trivial() {
            return None;
        }
        let mut p = self.base;
        let mut last = None;
        if self.core[p] {
            last = Some(0);
        }
        for (t, &l) in v.letters().iter().enumerate() {
            match self.out.get(&(p, l)) {
                Some(&(q, _)) => {
                    p = q;
                    if self.core[p] {
                        last = Some(t + 1);
                    }
                }
                None => break,
            }
        }
        Some(match last {
            Some(n) => v.prefix(n),
            None => self.hair_word(),
        })
    }

    /// An element `u = v c v⁻¹` of the subgroup whose axis crosses `{v, vx}` in the
    /// direction of `x`, with the product of generators spelling it.
    pub fn axis_through(&self, v: &Word, x: Letter) -> Option<(Word, Word)> {
        let (p, pval) = self.read_from(self.base, v)?;
        let &(q, e0) = self.out.get(&(p, x))?;
        if !self.core[p] || !self.core[q] {
            return None;
        }
        let lab0 = &self.edges[e0].label;
        let step0 = if x == self.edges[e0].letter { lab0.clone() } else { lab0.inverse() };
        // non-backtracking search from q back to p, states keyed by (vertex, last step)
        type State = (usize, usize, bool);
        let start: State = (q, e0, x == self.edges[e0].letter);
        let mut prev: HashMap<State, Option<(State, Letter)>> = HashMap::new();
        prev.insert(start, None);
        let mut queue = VecDeque::from([start]);
        let mut goal = None;
        if q == p {
            goal = Some(start);
        }
        while goal.is_none() {
            let Some(st) = queue.pop_front() else { break };
            let (w, le, lfwd) = st;
            for l in self.letters() {
                let Some(&(nw, ne)) = self.out.get(&(w, l)) else { continue };
                let fwd = l == self.edges[ne].letter;
                if ne == le && fwd != lfwd {
                    continue;
                }
                if !self.core[nw] {
                    continue;
                }
                let ns = (nw, ne, fwd);
                if prev.contains_key(&ns) {
                    continue;
                }
                prev.insert(ns, Some((st, l)));
                if nw == p && !(ne == e0 && fwd != start.2) {
                    goal = Some(ns);
                    break;
                }
                queue.push_back(ns);
            }
        }
        let mut letters = Vec::new();
        let mut cur = goal?;
        while let Some(Some((ps, l))) = prev.get(&cur) {
            letters.push(*l);
            cur = *ps;
        }
        letters.reverse();
        let tail = Word::new(letters.iter().copied());
        let (end, tval) = self.read_from(q, &tail)?;
        debug_assert_eq!(end, p);
        let c = Word::letter(x).mul(&tail);
        let u = v.mul(&c).mul(&v.inverse());
        let closed = pval.mul(&step0).mul(&tval).mul(&pval.inverse());
        Some((u, self.true_value(&closed)))
    }
}

/// Minimal invariant subtree of `⟨words⟩` acting on the Cayley tree by left multiplication.
pub fn minimal_subtree(rank: usize, words: &[Word]) -> Stallings {
    Stallings::new(rank, words)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 3).unwrap()
    }

    fn sub(words: &[&str]) -> Stallings {
        Stallings::new(2, &words.iter().map(|s| w(s)).collect::<Vec<_>>())
    }

    #[test]
    fn single_axis() {
        let s = sub(&["a"]);
        assert!(s.contains_edge(&w(""), 1));
        assert!(!s.contains_edge(&w(""), 2));
        assert!(s.contains_edge(&w("AAA"), -1));
        assert!(s.is_cyclic());
    }

    #[test]
    fn squares_core() {
        let s = sub(&["aa", "bb"]);
        assert_eq!((s.core_vertex_count(), s.core_edge_count()), (3, 4));
        assert!(s.contains_edge(&w("a"), 1));
        assert!(!s.contains_edge(&w("a"), 2));
        assert!(s.contains_edge(&w("aabb"), -1));
        assert!(!s.is_finite_index());
    }

    #[test]
    fn trivial_subgroup() {
        let s = sub(&[""]);
        assert!(s.is_trivial());
        assert!(!s.contains_edge(&w(""), 1));
        assert_eq!(s.project(&w("ab")), None);
    }

    #[test]
    fn folding_records_products() {
        let s = sub(&["ab", "aB"]);
        assert_eq!(s.subgroup_rank(), 2);
        let u = w("abbA");
        let spell = s.member(&u).unwrap();
        let gens = [w("ab"), w("aB")];
        let eval = spell.letters().iter().fold(Word::identity(), |acc, &l| {
            let g = &gens[(l.unsigned_abs() - 1) as usize];
            acc.mul(&if l > 0 { g.clone() } else { g.inverse() })
        });
        assert_eq!(eval, u);
        assert!(s.member(&w("a")).is_none());
    }

    #[test]
    fn finite_index() {
        let s = sub(&["a", "b"]);
        assert!(s.is_finite_index());
        let s = sub(&["aa", "b", "aba"]);
        assert!(s.is_finite_index());
    }

    #[test]
    fn hair_and_projection() {
        let s = sub(&["baB"]);
        assert_eq!(s.hair_word(), w("b"));
        assert_eq!(s.project(&w("")), Some(w("b")));
        assert_eq!(s.project(&w("baaB")), Some(w("baa")));
        assert_eq!(s.project(&w("A")), Some(w("b")));
    }

    #[test]
    fn axis_witness_is_hyperbolic_through_edge() {
        let s = sub(&["aa", "bb"]);
        let gens = [w("aa"), w("bb")];
        for (v, x) in [("", 1), ("a", 1), ("aab", 2), ("", -2)] {
            let v = w(v);
            let (u, spell) = s.axis_through(&v, x).unwrap();
            let eval = spell.letters().iter().fold(Word::identity(), |acc, &l| {
                let g = &gens[(l.unsigned_abs() - 1) as usize];
                acc.mul(&if l > 0 { g.clone() } else { g.inverse() })
            });
            assert_eq!(eval, u);
            let vx = v.push(x);
            // u moves both endpoints forward along its axis
            assert_eq!(u.mul(&v).tree_distance(&vx) + 1, u.mul(&v).tree_distance(&v));
        }
    }
}

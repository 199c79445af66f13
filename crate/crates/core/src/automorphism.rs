//! Automorphisms of product instances: a factor permutation plus per-factor maps.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::instance::{Coord, Factor, HalfspaceDesc, LineHalf, Point, ProductInstance, SymHalfspace, TreeHalf};
use crate::word::{SignedPerm, Word};

/// `x ↦ eps·x + shift` with `eps = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LineMap {
    pub eps: i64,
    pub shift: i64,
}

impl LineMap {
    pub fn translation(b: i64) -> Self {
        LineMap { eps: 1, shift: b }
    }

    /// `x ↦ c - x`.
    pub fn reflection(c: i64) -> Self {
        LineMap { eps: -1, shift: c }
    }

    pub fn apply(&self, x: i64) -> i64 {
        self.eps * x + self.shift
    }

    pub fn compose(&self, o: &LineMap) -> LineMap {
        LineMap { eps: self.eps * o.eps, shift: self.eps * o.shift + self.shift }
    }

    pub fn inverse(&self) -> LineMap {
        LineMap { eps: self.eps, shift: -self.eps * self.shift }
    }

    pub fn apply_half(&self, h: LineHalf) -> LineHalf {
        match (h, self.eps > 0) {
            (LineHalf::Ge(k), true) => LineHalf::Ge(k + self.shift),
            (LineHalf::Le(k), true) => LineHalf::Le(k + self.shift),
            (LineHalf::Ge(k), false) => LineHalf::Le(self.shift - k),
            (LineHalf::Le(k), false) => LineHalf::Ge(self.shift - k),
        }
    }
}

/// `v ↦ left · subst(v)` on the Cayley tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeMap {
    pub left: Word,
    pub subst: SignedPerm,
}

impl TreeMap {
    pub fn left_mult(left: Word, rank: usize) -> Self {
        TreeMap { left, subst: SignedPerm::identity(rank) }
    }

    pub fn apply(&self, v: &Word) -> Word {
        self.left.mul(&self.subst.apply(v))
    }

    pub fn compose(&self, o: &TreeMap) -> TreeMap {
        TreeMap { left: self.left.mul(&self.subst.apply(&o.left)), subst: self.subst.compose(&o.subst) }
    }

    pub fn inverse(&self) -> TreeMap {
        let inv = self.subst.inverse();
        TreeMap { left: inv.apply(&self.left.inverse()), subst: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.left.is_empty() && self.subst.is_identity()
    }

    /// Image of a halfspace: the side of the image edge containing the image of its inner endpoint.
    pub fn apply_half(&self, h: &TreeHalf) -> TreeHalf {
        let (v, cone) = match h {
            TreeHalf::Cone(v) => (v, true),
            TreeHalf::CoCone(v) => (v, false),
        };
        let p = v.parent().expect("cone words are nonempty");
        let (gv, gp) = (self.apply(v), self.apply(&p));
        let (inner, outer) = if cone { (gv, gp) } else { (gp, gv) };
        if inner.len() > outer.len() {
            TreeHalf::Cone(inner)
        } else {
            TreeHalf::CoCone(outer)
        }
    }
}

/// Vertex bijection between finite factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteMap {
    pub perm: Vec<usize>,
}

impl FiniteMap {
    pub fn compose(&self, o: &FiniteMap) -> FiniteMap {
        FiniteMap { perm: o.perm.iter().map(|&v| self.perm[v]).collect() }
    }

    pub fn inverse(&self) -> FiniteMap {
        let mut perm = vec![0; self.perm.len()];
        for (i, &v) in self.perm.iter().enumerate() {
            perm[v] = i;
        }
        FiniteMap { perm }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &v)| i == v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FactorMap {
    Line(LineMap),
    Tree(TreeMap),
    Finite(FiniteMap),
}

impl FactorMap {
    pub fn identity(f: &Factor) -> FactorMap {
        match f {
            Factor::Line => FactorMap::Line(LineMap::translation(0)),
            Factor::FreeTree { rank } => FactorMap::Tree(TreeMap::left_mult(Word::identity(), *rank)),
            Factor::Finite(g) => FactorMap::Finite(FiniteMap { perm: (0..g.len()).collect() }),
        }
    }

    pub fn compose(&self, o: &FactorMap) -> FactorMap {
        match (self, o) {
            (FactorMap::Line(a), FactorMap::Line(b)) => FactorMap::Line(a.compose(b)),
            (FactorMap::Tree(a), FactorMap::Tree(b)) => FactorMap::Tree(a.compose(b)),
            (FactorMap::Finite(a), FactorMap::Finite(b)) => FactorMap::Finite(a.compose(b)),
            _ => panic!("composing maps of different kinds"),
        }
    }

    pub fn inverse(&self) -> FactorMap {
        match self {
            FactorMap::Line(a) => FactorMap::Line(a.inverse()),
            FactorMap::Tree(a) => FactorMap::Tree(a.inverse()),
            FactorMap::Finite(a) => FactorMap::Finite(a.inverse()),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            FactorMap::Line(a) => a.eps == 1 && a.shift == 0,
            FactorMap::Tree(a) => a.is_identity(),
            FactorMap::Finite(a) => a.is_identity(),
        }
    }

    pub fn apply(&self, c: &Coord) -> Coord {
        match self {
            FactorMap::Line(m) => Coord::Int(m.apply(c.as_int())),
            FactorMap::Tree(m) => Coord::Word(m.apply(c.as_word())),
            FactorMap::Finite(m) => Coord::Vertex(m.perm[c.as_vertex()]),
        }
    }

    pub fn as_line(&self) -> &LineMap {
        match self {
            FactorMap::Line(m) => m,
            _ => panic!("expected a line map"),
        }
    }

    pub fn as_tree(&self) -> &TreeMap {
        match self {
            FactorMap::Tree(m) => m,
            _ => panic!("expected a tree map"),
        }
    }

    pub fn as_finite(&self) -> &FiniteMap {
        match self {
            FactorMap::Finite(m) => m,
            _ => panic!("expected a finite map"),
        }
    }
}

impl fmt::Display for FactorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorMap::Line(m) => {
                let lin = if m.eps > 0 { "x" } else { "-x" };
                match m.shift {
                    0 => write!(f, "x->{lin}"),
                    b if b > 0 => write!(f, "x->{lin}+{b}"),
                    b => write!(f, "x->{lin}{b}"),
                }
            }
            FactorMap::Tree(m) => write!(f, "v->{}*[{}](v)", m.left, m.subst),
            FactorMap::Finite(m) => write!(f, "{:?}", m.perm),
        }
    }
}

/// `(g·p)[perm[i]] = maps[i](p[i])`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Automorphism {
    pub perm: Vec<usize>,
    pub maps: Vec<FactorMap>,
}

impl Automorphism {
    pub fn identity(inst: &ProductInstance) -> Self {
        Automorphism { perm: (0..inst.len()).collect(), maps: inst.factors.iter().map(FactorMap::identity).collect() }
    }

    /// Factor-preserving automorphism from per-factor maps.
    pub fn diagonal(maps: Vec<FactorMap>) -> Self {
        Automorphism { perm: (0..maps.len()).collect(), maps }
    }

    pub fn is_factor_preserving(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn is_identity(&self) -> bool {
        self.is_factor_preserving() && self.maps.iter().all(FactorMap::is_identity)
    }

    /// `self ∘ o`.
    pub fn compose(&self, o: &Automorphism) -> Automorphism {
        let n = self.perm.len();
        let perm = (0..n).map(|i| self.perm[o.perm[i]]).collect();
        let maps = (0..n).map(|i| self.maps[o.perm[i]].compose(&o.maps[i])).collect();
        Automorphism { perm, maps }
    }

    pub fn inverse(&self) -> Automorphism {
        let n = self.perm.len();
        let mut perm = vec![0; n];
        let mut maps: Vec<Option<FactorMap>> = vec![None; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            maps[self.perm[i]] = Some(self.maps[i].inverse());
        }
        Automorphism { perm, maps: maps.into_iter().map(|m| m.expect("perm is a bijection")).collect() }
    }

    pub fn pow(&self, n: i64) -> Automorphism {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = Automorphism {
            perm: (0..self.perm.len()).collect(),
            maps: self.maps.iter().map(|m| m.compose(&m.inverse())).collect(),
        };
        for _ in 0..n.unsigned_abs() {
            acc = base.compose(&acc);
        }
        acc
    }

    /// Order of the factor permutation.
    pub fn perm_order(&self) -> usize {
        let n = self.perm.len();
        let mut cur: Vec<usize> = (0..n).collect();
        let mut k = 1;
        loop {
            cur = cur.iter().map(|&i| self.perm[i]).collect();
            if cur.iter().enumerate().all(|(i, &j)| i == j) {
                return k;
            }
            k += 1;
        }
    }
}

impl fmt::Display for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let maps: Vec<String> = self
            .maps
            .iter()
            .enumerate()
            .map(|(i, m)| format!("{i}->{}: {m}", self.perm[i]))
            .collect();
        write!(f, "[{}]", maps.join("; "))
    }
}

impl ProductInstance {
    pub fn validate_automorphism(&self, g: &Automorphism) -> Result<()> {
        let n = self.len();
        if g.perm.len() != n || g.maps.len() != n {
            return Err(invalid(format!("automorphism has {} factors, instance has {n}", g.perm.len())));
        }
        let mut seen = vec![false; n];
        for &j in &g.perm {
            if j >= n || std::mem::replace(&mut seen[j], true) {
                return Err(invalid(format!("factor permutation {:?} is not a bijection", g.perm)));
            }
        }
        for i in 0..n {
            let (src, dst) = (&self.factors[i], &self.factors[g.perm[i]]);
            if !src.same_kind(dst) {
                return Err(Error::KindMismatch(format!(
                    "factor {i} ({}) sent to factor {} ({})",
                    src.kind_name(),
                    g.perm[i],
                    dst.kind_name()
                )));
            }
            match (&g.maps[i], src, dst) {
                (FactorMap::Line(m), Factor::Line, _) => {
                    if m.eps.abs() != 1 {
                        return Err(invalid(format!("line map on factor {i} has eps {}", m.eps)));
                    }
                }
                (FactorMap::Tree(m), Factor::FreeTree { rank }, _) => {
                    if m.subst.rank() != *rank || m.left.max_generator() > *rank {
                        return Err(invalid(format!("tree map on factor {i} uses letters outside rank {rank}")));
                    }
                }
                (FactorMap::Finite(m), Factor::Finite(a), Factor::Finite(b)) => {
                    let ok = m.perm.len() == a.len()
                        && a.graph().edges().iter().all(|&(u, v)| {
                            m.perm.get(u).zip(m.perm.get(v)).is_some_and(|(&x, &y)| b.graph().has_edge(x, y))
                        })
                        && {
                            let mut s = m.perm.clone();
                            s.sort_unstable();
                            s.iter().enumerate().all(|(i, &v)| i == v)
                        };
                    if !ok {
                        return Err(invalid(format!("finite map on factor {i} is not a graph isomorphism")));
                    }
                }
                _ => {
                    return Err(Error::KindMismatch(format!("map for factor {i} does not fit a {}", src.kind_name())));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, g: &Automorphism, p: &Point) -> Point {
        let mut out = p.0.clone();
        for i in 0..self.len() {
            out[g.perm[i]] = g.maps[i].apply(&p.0[i]);
        }
        Point(out)
    }

    pub fn try_apply_h(&self, g: &Automorphism, h: &SymHalfspace) -> Result<SymHalfspace> {
        let (i, j) = (h.factor, g.perm[h.factor]);
        Ok(SymHalfspace { factor: j, desc: self.map_desc(i, j, &g.maps[i], &h.desc)? })
    }

    /// Image under a factor map from factor `i` to factor `j`.
    pub fn map_desc(&self, i: usize, j: usize, m: &FactorMap, d: &HalfspaceDesc) -> Result<HalfspaceDesc> {
        Ok(match (m, d) {
            (FactorMap::Line(m), HalfspaceDesc::Line(l)) => HalfspaceDesc::Line(m.apply_half(*l)),
            (FactorMap::Tree(m), HalfspaceDesc::Tree(t)) => HalfspaceDesc::Tree(m.apply_half(t)),
            (FactorMap::Finite(m), HalfspaceDesc::Finite(x)) => match (&self.factors[i], &self.factors[j]) {
                (Factor::Finite(a), Factor::Finite(b)) => HalfspaceDesc::Finite(a.map_halfspace(&m.perm, *x, b)),
                _ => return Err(Error::KindMismatch(format!("finite halfspace moved from factor {i} to {j}"))),
            },
            _ => return Err(Error::KindMismatch(format!("halfspace {d:?} does not fit the map on factor {i}"))),
        })
    }

    /// Image of a halfspace under a validated automorphism.
    pub fn apply_h(&self, g: &Automorphism, h: &SymHalfspace) -> SymHalfspace {
        self.try_apply_h(g, h).expect("validated automorphism")
    }
}

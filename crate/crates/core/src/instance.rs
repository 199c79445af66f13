//! Symbolic product instances: lines, free-group Cayley trees and finite factors.

use std::fmt;
use std::sync::Arc;

use crate::closure::MedianAlgebra;
use crate::error::{invalid, Result};
use crate::graph::MedianGraph;
use crate::word::{letters_of_rank, Letter, Word};

#[derive(Clone, Debug)]
pub enum Factor {
    Line,
    FreeTree { rank: usize },
    Finite(Arc<MedianGraph>),
}

impl Factor {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Factor::Line => "line",
            Factor::FreeTree { .. } => "free_tree",
            Factor::Finite(_) => "finite",
        }
    }

    pub fn rank(&self) -> Result<usize> {
        match self {
            Factor::Line | Factor::FreeTree { .. } => Ok(1),
            Factor::Finite(g) => g.rank(),
        }
    }

    /// Cheap structural check; finite factors additionally need an isomorphism.
    pub fn same_kind(&self, other: &Factor) -> bool {
        match (self, other) {
            (Factor::Line, Factor::Line) => true,
            (Factor::FreeTree { rank: a }, Factor::FreeTree { rank: b }) => a == b,
            (Factor::Finite(a), Factor::Finite(b)) => a.len() == b.len() && a.edge_count() == b.edge_count(),
            _ => false,
        }
    }
}

/// One coordinate of a point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    Int(i64),
    Word(Word),
    Vertex(usize),
}

impl Coord {
    pub fn as_int(&self) -> i64 {
        match self {
            Coord::Int(x) => *x,
            _ => panic!("expected a line coordinate"),
        }
    }

    pub fn as_word(&self) -> &Word {
        match self {
            Coord::Word(w) => w,
            _ => panic!("expected a tree coordinate"),
        }
    }

    pub fn as_vertex(&self) -> usize {
        match self {
            Coord::Vertex(v) => *v,
            _ => panic!("expected a finite coordinate"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(pub Vec<Coord>);

impl Point {
    pub fn coords(&self) -> &[Coord] {
        &self.0
    }

    pub fn with(&self, i: usize, c: Coord) -> Point {
        let mut p = self.clone();
        p.0[i] = c;
        p
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|c| match c {
                Coord::Int(x) => x.to_string(),
                Coord::Word(w) => w.to_string(),
                Coord::Vertex(v) => format!("v{v}"),
            })
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LineHalf {
    /// `{x ≥ k}`
    Ge(i64),
    /// `{x ≤ k}`
    Le(i64),
}

/// Halfspaces of the Cayley tree, indexed by the far endpoint `v ≠ 1` of the
/// edge `{parent(v), v}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeHalf {
    /// Words with prefix `v`.
    Cone(Word),
    /// Words without prefix `v`.
    CoCone(Word),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HalfspaceDesc {
    Line(LineHalf),
    Tree(TreeHalf),
    Finite(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymHalfspace {
    pub factor: usize,
    pub desc: HalfspaceDesc,
}

/// The seven possible relative positions of two halfspaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelPos {
    Equal,
    Complement,
    NestedIn,
    NestedOver,
    Facing,
    CoFacing,
    Transverse,
}

impl RelPos {
    pub fn flip(self) -> RelPos {
        match self {
            RelPos::NestedIn => RelPos::NestedOver,
            RelPos::NestedOver => RelPos::NestedIn,
            other => other,
        }
    }
}

impl SymHalfspace {
    pub fn line(factor: usize, h: LineHalf) -> Self {
        SymHalfspace { factor, desc: HalfspaceDesc::Line(h) }
    }

    pub fn tree(factor: usize, h: TreeHalf) -> Self {
        SymHalfspace { factor, desc: HalfspaceDesc::Tree(h) }
    }

    pub fn finite(factor: usize, h: usize) -> Self {
        SymHalfspace { factor, desc: HalfspaceDesc::Finite(h) }
    }

    /// Side of the tree edge `{w, wx}` containing `wx`.
    pub fn tree_side(factor: usize, w: &Word, x: Letter) -> Self {
        let wx = w.push(x);
        if wx.len() > w.len() {
            SymHalfspace::tree(factor, TreeHalf::Cone(wx))
        } else {
            SymHalfspace::tree(factor, TreeHalf::CoCone(w.clone()))
        }
    }

    pub fn star(&self) -> Self {
        let desc = match &self.desc {
            HalfspaceDesc::Line(LineHalf::Ge(k)) => HalfspaceDesc::Line(LineHalf::Le(k - 1)),
            HalfspaceDesc::Line(LineHalf::Le(k)) => HalfspaceDesc::Line(LineHalf::Ge(k + 1)),
            HalfspaceDesc::Tree(TreeHalf::Cone(v)) => HalfspaceDesc::Tree(TreeHalf::CoCone(v.clone())),
            HalfspaceDesc::Tree(TreeHalf::CoCone(v)) => HalfspaceDesc::Tree(TreeHalf::Cone(v.clone())),
            HalfspaceDesc::Finite(h) => HalfspaceDesc::Finite(h ^ 1),
        };
        SymHalfspace { factor: self.factor, desc }
    }

    /// Canonical side of the wall: `{x ≥ k}`, `Cone(v)`, or the even finite id.
    pub fn is_canonical(&self) -> bool {
        matches!(
            self.desc,
            HalfspaceDesc::Line(LineHalf::Ge(_)) | HalfspaceDesc::Tree(TreeHalf::Cone(_))
        ) || matches!(self.desc, HalfspaceDesc::Finite(h) if h % 2 == 0)
    }

    pub fn wall(&self) -> SymHalfspace {
        if self.is_canonical() {
            self.clone()
        } else {
            self.star()
        }
    }

    pub fn contains(&self, inst: &ProductInstance, p: &Point) -> bool {
        let c = &p.0[self.factor];
        match &self.desc {
            HalfspaceDesc::Line(LineHalf::Ge(k)) => c.as_int() >= *k,
            HalfspaceDesc::Line(LineHalf::Le(k)) => c.as_int() <= *k,
            HalfspaceDesc::Tree(TreeHalf::Cone(v)) => v.is_prefix_of(c.as_word()),
            HalfspaceDesc::Tree(TreeHalf::CoCone(v)) => !v.is_prefix_of(c.as_word()),
            HalfspaceDesc::Finite(h) => inst.finite(self.factor).halfspace(*h).contains(c.as_vertex()),
        }
    }

    /// `self ⊆ other` as sets.
    pub fn subset(&self, inst: &ProductInstance, other: &SymHalfspace) -> bool {
        if self.factor != other.factor {
            return false;
        }
        use HalfspaceDesc as D;
        use LineHalf::*;
        use TreeHalf::*;
        match (&self.desc, &other.desc) {
            (D::Line(Ge(a)), D::Line(Ge(b))) => a >= b,
            (D::Line(Le(a)), D::Line(Le(b))) => a <= b,
            (D::Line(_), D::Line(_)) => false,
            (D::Tree(Cone(v)), D::Tree(Cone(u))) => u.is_prefix_of(v),
            (D::Tree(Cone(v)), D::Tree(CoCone(u))) => !u.is_prefix_of(v) && !v.is_prefix_of(u),
            (D::Tree(CoCone(_)), D::Tree(Cone(_))) => false,
            (D::Tree(CoCone(v)), D::Tree(CoCone(u))) => v.is_prefix_of(u),
            (D::Finite(a), D::Finite(b)) => {
                let g = inst.finite(self.factor);
                g.halfspace(*a).is_subset(g.halfspace(*b))
            }
            _ => false,
        }
    }

    pub fn relative_position(&self, inst: &ProductInstance, k: &SymHalfspace) -> RelPos {
        if self.factor != k.factor {
            return RelPos::Transverse;
        }
        if self == k {
            return RelPos::Equal;
        }
        let ks = k.star();
        if *self == ks {
            return RelPos::Complement;
        }
        if self.subset(inst, k) {
            RelPos::NestedIn
        } else if k.subset(inst, self) {
            RelPos::NestedOver
        } else if self.subset(inst, &ks) {
            RelPos::CoFacing
        } else if ks.subset(inst, self) {
            RelPos::Facing
        } else {
            RelPos::Transverse
        }
    }

    /// Parses `0:x>=3`, `0:x<=2`, `1:cone(ab)`, `1:~cone(ab)`, `2:h5`.
    pub fn parse(s: &str, inst: &ProductInstance) -> Result<Self> {
        let (f, rest) = s.split_once(':').ok_or_else(|| invalid(format!("bad halfspace '{s}'")))?;
        let factor: usize = f.trim().parse().map_err(|_| invalid(format!("bad factor index in '{s}'")))?;
        let kind = inst.factors.get(factor).ok_or_else(|| invalid(format!("no factor {factor}")))?;
        let rest = rest.trim();
        let desc = match kind {
            Factor::Line => {
                let num = |t: &str| t.trim().parse::<i64>().map_err(|_| invalid(format!("bad threshold in '{s}'")));
                if let Some(t) = rest.strip_prefix("x>=") {
                    HalfspaceDesc::Line(LineHalf::Ge(num(t)?))
                } else if let Some(t) = rest.strip_prefix("x<=") {
                    HalfspaceDesc::Line(LineHalf::Le(num(t)?))
                } else {
                    return Err(invalid(format!("bad line halfspace '{s}'")));
                }
            }
            Factor::FreeTree { rank } => {
                let (co, body) = match rest.strip_prefix('~') {
                    Some(b) => (true, b),
                    None => (false, rest),
                };
                let inner = body
                    .strip_prefix("cone(")
                    .and_then(|b| b.strip_suffix(')'))
                    .ok_or_else(|| invalid(format!("bad tree halfspace '{s}'")))?;
                let v = Word::parse(inner, *rank)?;
                if v.is_empty() {
                    return Err(invalid(format!("cone of the identity in '{s}'")));
                }
                HalfspaceDesc::Tree(if co { TreeHalf::CoCone(v) } else { TreeHalf::Cone(v) })
            }
            Factor::Finite(g) => {
                let h: usize = rest
                    .strip_prefix('h')
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| invalid(format!("bad finite halfspace '{s}'")))?;
                if h >= g.halfspace_count() {
                    return Err(invalid(format!("halfspace {h} out of range")));
                }
                HalfspaceDesc::Finite(h)
            }
        };
        Ok(SymHalfspace { factor, desc })
    }
}

impl fmt::Display for SymHalfspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.desc {
            HalfspaceDesc::Line(LineHalf::Ge(k)) => write!(f, "{}:x>={k}", self.factor),
            HalfspaceDesc::Line(LineHalf::Le(k)) => write!(f, "{}:x<={k}", self.factor),
            HalfspaceDesc::Tree(TreeHalf::Cone(v)) => write!(f, "{}:cone({v})", self.factor),
            HalfspaceDesc::Tree(TreeHalf::CoCone(v)) => write!(f, "{}:~cone({v})", self.factor),
            HalfspaceDesc::Finite(h) => write!(f, "{}:h{h}", self.factor),
        }
    }
}

/// A product of factors.
#[derive(Clone, Debug)]
pub struct ProductInstance {
    pub factors: Vec<Factor>,
}

impl ProductInstance {
    pub fn new(factors: Vec<Factor>) -> Self {
        ProductInstance { factors }
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn finite(&self, i: usize) -> &MedianGraph {
        match &self.factors[i] {
            Factor::Finite(g) => g,
            _ => panic!("factor {i} is not finite"),
        }
    }

    pub fn tree_rank(&self, i: usize) -> usize {
        match &self.factors[i] {
            Factor::FreeTree { rank } => *rank,
            _ => panic!("factor {i} is not a tree"),
        }
    }

    pub fn is_finite_only(&self) -> bool {
        self.factors.iter().all(|f| matches!(f, Factor::Finite(_)))
    }

    /// Sum of factor ranks.
    pub fn rank(&self) -> Result<usize> {
        self.factors.iter().map(Factor::rank).sum()
    }

    /// Point with every coordinate at the factor's origin (`0`, `1`, vertex 0).
    pub fn origin(&self) -> Point {
        Point(
            self.factors
                .iter()
                .map(|f| match f {
                    Factor::Line => Coord::Int(0),
                    Factor::FreeTree { .. } => Coord::Word(Word::identity()),
                    Factor::Finite(_) => Coord::Vertex(0),
                })
                .collect(),
        )
    }

    pub fn validate_point(&self, p: &Point) -> Result<()> {
        if p.0.len() != self.len() {
            return Err(invalid(format!("point has {} coordinates, instance has {} factors", p.0.len(), self.len())));
        }
        for (i, (c, f)) in p.0.iter().zip(&self.factors).enumerate() {
            let ok = match (c, f) {
                (Coord::Int(_), Factor::Line) => true,
                (Coord::Word(w), Factor::FreeTree { rank }) => w.max_generator() <= *rank,
                (Coord::Vertex(v), Factor::Finite(g)) => *v < g.len(),
                _ => false,
            };
            if !ok {
                return Err(invalid(format!("coordinate {i} does not fit a {} factor", f.kind_name())));
            }
        }
        Ok(())
    }

    pub fn coord_median(&self, i: usize, a: &Coord, b: &Coord, c: &Coord) -> Coord {
        match &self.factors[i] {
            Factor::Line => {
                let (x, y, z) = (a.as_int(), b.as_int(), c.as_int());
                Coord::Int(x.max(y).min(x.min(y).max(z)))
            }
            Factor::FreeTree { .. } => Coord::Word(Word::tree_median(a.as_word(), b.as_word(), c.as_word())),
            Factor::Finite(g) => Coord::Vertex(g.median(a.as_vertex(), b.as_vertex(), c.as_vertex())),
        }
    }

    pub fn median(&self, x: &Point, y: &Point, z: &Point) -> Point {
        Point((0..self.len()).map(|i| self.coord_median(i, &x.0[i], &y.0[i], &z.0[i])).collect())
    }

    pub fn coord_distance(&self, i: usize, a: &Coord, b: &Coord) -> usize {
        match &self.factors[i] {
            Factor::Line => a.as_int().abs_diff(b.as_int()) as usize,
            Factor::FreeTree { .. } => a.as_word().tree_distance(b.as_word()),
            Factor::Finite(g) => g.dist(a.as_vertex(), b.as_vertex()),
        }
    }

    /// Number of separating walls.
    pub fn distance(&self, x: &Point, y: &Point) -> usize {
        (0..self.len()).map(|i| self.coord_distance(i, &x.0[i], &y.0[i])).sum()
    }

    /// Walls of factor `i` separating `a` from `b`, as the sides containing `b`, in travel order.
    pub fn coord_separating(&self, i: usize, a: &Coord, b: &Coord) -> Vec<SymHalfspace> {
        match &self.factors[i] {
            Factor::Line => {
                let (a, b) = (a.as_int(), b.as_int());
                if a <= b {
                    (a + 1..=b).map(|k| SymHalfspace::line(i, LineHalf::Ge(k))).collect()
                } else {
                    (b..a).rev().map(|k| SymHalfspace::line(i, LineHalf::Le(k))).collect()
                }
            }
            Factor::FreeTree { .. } => {
                let (x, y) = (a.as_word(), b.as_word());
                let p = x.common_prefix_len(y);
                let mut out = Vec::new();
                for k in (p + 1..=x.len()).rev() {
                    out.push(SymHalfspace::tree(i, TreeHalf::CoCone(x.prefix(k))));
                }
                for k in p + 1..=y.len() {
                    out.push(SymHalfspace::tree(i, TreeHalf::Cone(y.prefix(k))));
                }
                out
            }
            Factor::Finite(g) => {
                let (u, v) = (a.as_vertex(), b.as_vertex());
                g.separators(u, v)
                    .into_iter()
                    .map(|w| SymHalfspace::finite(i, g.halfspace_containing(w, v)))
                    .collect()
            }
        }
    }

    pub fn separating_walls(&self, x: &Point, y: &Point) -> Vec<SymHalfspace> {
        (0..self.len()).flat_map(|i| self.coord_separating(i, &x.0[i], &y.0[i])).collect()
    }

    /// Neighbours of a coordinate in its factor graph.
    pub fn coord_neighbors(&self, i: usize, c: &Coord) -> Vec<Coord> {
        match &self.factors[i] {
            Factor::Line => vec![Coord::Int(c.as_int() - 1), Coord::Int(c.as_int() + 1)],
            Factor::FreeTree { rank } => {
                letters_of_rank(*rank).map(|l| Coord::Word(c.as_word().push(l))).collect()
            }
            Factor::Finite(g) => g.graph().neighbors(c.as_vertex()).iter().map(|&v| Coord::Vertex(v)).collect(),
        }
    }

    /// Points at distance one.
    pub fn neighbors(&self, p: &Point) -> Vec<Point> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for c in self.coord_neighbors(i, &p.0[i]) {
                out.push(p.with(i, c));
            }
        }
        out
    }
}

impl MedianAlgebra for ProductInstance {
    type Point = Point;
    fn median(&self, a: &Point, b: &Point, c: &Point) -> Point {
        ProductInstance::median(self, a, b, c)
    }
}

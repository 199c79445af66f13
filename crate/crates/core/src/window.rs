//! Finite windows around a basepoint, and the walls meeting them.

use std::collections::{BTreeSet, HashMap};

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, MedianGraph};
use crate::instance::{Coord, Factor, LineHalf, Point, ProductInstance, SymHalfspace, TreeHalf};
use crate::word::Word;

pub const WINDOW_POINT_CAP: usize = 1_000_000;
pub const TREE_RADIUS_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowKind {
    /// Points within wall-distance `R` of the basepoint.
    Ball,
    /// Product of the per-factor balls of radius `R` (the convex hull of the ball).
    Box,
}

impl WindowKind {
    /// Balls are median-closed when there are at most two factors, each of rank one;
    /// otherwise the hull of the ball is used.
    pub fn auto(inst: &ProductInstance) -> WindowKind {
        let rank_one = inst.factors.iter().all(|f| f.rank().map(|r| r <= 1).unwrap_or(false));
        if inst.len() <= 2 && rank_one {
            WindowKind::Ball
        } else {
            WindowKind::Box
        }
    }
}

#[derive(Clone, Debug)]
pub struct Window {
    pub basepoint: Point,
    pub radius: usize,
    pub kind: WindowKind,
    pub points: Vec<Point>,
}

/// Coordinates of factor `i` within distance `r` of `center`, with their distances.
pub fn factor_ball(inst: &ProductInstance, i: usize, center: &Coord, r: usize) -> Vec<(Coord, usize)> {
    match &inst.factors[i] {
        Factor::Line => {
            let c = center.as_int();
            let r = r as i64;
            (c - r..=c + r).map(|x| (Coord::Int(x), x.abs_diff(c) as usize)).collect()
        }
        Factor::FreeTree { rank } => {
            let c = center.as_word();
            Word::ball(*rank, r).into_iter().map(|u| (Coord::Word(c.mul(&u)), u.len())).collect()
        }
        Factor::Finite(g) => {
            let c = center.as_vertex();
            (0..g.len()).filter(|&v| g.dist(c, v) <= r).map(|v| (Coord::Vertex(v), g.dist(c, v))).collect()
        }
    }
}

impl Window {
    pub fn new(inst: &ProductInstance, basepoint: &Point, radius: usize) -> Result<Window> {
        Window::with_kind(inst, basepoint, radius, WindowKind::auto(inst))
    }

    pub fn with_kind(inst: &ProductInstance, basepoint: &Point, radius: usize, kind: WindowKind) -> Result<Window> {
        inst.validate_point(basepoint)?;
        if inst.factors.iter().any(|f| matches!(f, Factor::FreeTree { .. })) && radius > TREE_RADIUS_CAP {
            return Err(invalid(format!("tree windows are capped at radius {TREE_RADIUS_CAP}")));
        }
        let balls: Vec<Vec<(Coord, usize)>> =
            (0..inst.len()).map(|i| factor_ball(inst, i, &basepoint.0[i], radius)).collect();
        let count = match kind {
            WindowKind::Box => balls.iter().try_fold(1usize, |acc, b| acc.checked_mul(b.len())),
            WindowKind::Ball => Some(ball_count(&balls, radius)),
        };
        if count.filter(|&c| c <= WINDOW_POINT_CAP).is_none() {
            return Err(Error::WindowBudgetExceeded { cap: WINDOW_POINT_CAP });
        }
        let mut points = Vec::with_capacity(count.unwrap_or(0));
        let mut cur = Vec::with_capacity(inst.len());
        let budget = if kind == WindowKind::Ball { radius } else { usize::MAX };
        collect(&balls, 0, budget, &mut cur, &mut points);
        points.sort();
        Ok(Window { basepoint: basepoint.clone(), radius, kind, points })
    }

    pub fn contains(&self, inst: &ProductInstance, p: &Point) -> bool {
        match self.kind {
            WindowKind::Ball => inst.distance(&self.basepoint, p) <= self.radius,
            WindowKind::Box => {
                (0..inst.len()).all(|i| inst.coord_distance(i, &self.basepoint.0[i], &p.0[i]) <= self.radius)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every wall with both sides meeting the window, as canonical sides, sorted.
    pub fn walls_meeting(&self, inst: &ProductInstance) -> Vec<SymHalfspace> {
        let mut out = BTreeSet::new();
        for i in 0..inst.len() {
            let center = &self.basepoint.0[i];
            match &inst.factors[i] {
                Factor::Line => {
                    let c = center.as_int();
                    let r = self.radius as i64;
                    for k in c - r + 1..=c + r {
                        out.insert(SymHalfspace::line(i, LineHalf::Ge(k)));
                    }
                }
                Factor::FreeTree { .. } => {
                    let c = center.as_word();
                    for (coord, d) in factor_ball(inst, i, center, self.radius) {
                        if d == 0 {
                            continue;
                        }
                        let v = coord.as_word();
                        let toward = c.geodesic(v)[d - 1].clone();
                        let far = if v.len() > toward.len() { v.clone() } else { toward };
                        out.insert(SymHalfspace::tree(i, TreeHalf::Cone(far)));
                    }
                }
                Factor::Finite(g) => {
                    let ball: Vec<usize> =
                        factor_ball(inst, i, center, self.radius).iter().map(|(c, _)| c.as_vertex()).collect();
                    for w in 0..g.walls().len() {
                        let a = ball.iter().any(|&v| g.halfspace(2 * w).contains(v));
                        let b = ball.iter().any(|&v| g.halfspace(2 * w + 1).contains(v));
                        if a && b {
                            out.insert(SymHalfspace::finite(i, 2 * w));
                        }
                    }
                }
            }
        }
        out.into_iter().collect()
    }
}

fn ball_count(balls: &[Vec<(Coord, usize)>], radius: usize) -> usize {
    // histogram convolution truncated at the radius
    let mut acc = vec![0usize; radius + 1];
    acc[0] = 1;
    for b in balls {
        let mut hist = vec![0usize; radius + 1];
        for (_, d) in b {
            hist[*d] += 1;
        }
        let mut next = vec![0usize; radius + 1];
        for (i, &a) in acc.iter().enumerate() {
            for (j, &h) in hist.iter().enumerate().take(radius + 1 - i) {
                next[i + j] = next[i + j].saturating_add(a.saturating_mul(h));
            }
        }
        acc = next;
    }
    acc.iter().fold(0usize, |s, &x| s.saturating_add(x))
}

fn collect(balls: &[Vec<(Coord, usize)>], i: usize, budget: usize, cur: &mut Vec<Coord>, out: &mut Vec<Point>) {
    if i == balls.len() {
        out.push(Point(cur.clone()));
        return;
    }
    for (c, d) in &balls[i] {
        if *d <= budget {
            cur.push(c.clone());
            collect(balls, i + 1, budget.saturating_sub(*d), cur, out);
            cur.pop();
        }
    }
}

/// Graph on `points` joining points at distance one, validated as a median graph.
/// Vertex `k` is `points[k]` after sorting.
pub fn induced_median_graph(inst: &ProductInstance, points: &[Point]) -> Result<(MedianGraph, Vec<Point>)> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    let index: HashMap<&Point, usize> = pts.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut edges = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        for q in inst.neighbors(p) {
            if let Some(&j) = index.get(&q) {
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    let labels = pts.iter().map(|p| p.to_string()).collect();
    let g = MedianGraph::new(Graph::new(labels, &edges)?)?;
    Ok((g, pts))
}

//! Fixed points and invariant cubes for actions on finite instances.

use std::collections::{BTreeSet, HashSet};

use fixedbitset::FixedBitSet;

use crate::action::GroupAction;
use crate::closure::subalgebra_closure;
use crate::error::{Error, Result};
use crate::instance::{Coord, Point, ProductInstance};

pub const PRODUCT_POINT_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixedOrCube {
    FixedVertex(Point),
    /// A median subalgebra isomorphic to `{0,1}^dimension`, invariant under the group.
    InvariantCube { vertices: Vec<Point>, dimension: usize },
}

/// All points of a finite-only instance, in lexicographic order.
pub fn all_points(inst: &ProductInstance) -> Result<Vec<Point>> {
    if !inst.is_finite_only() {
        return Err(Error::PreconditionFailed("every factor must be finite".into()));
    }
    let total = (0..inst.len()).try_fold(1usize, |acc, i| acc.checked_mul(inst.finite(i).len()));
    if total.filter(|&t| t <= PRODUCT_POINT_CAP).is_none() {
        return Err(Error::InstanceTooLarge(format!("more than {PRODUCT_POINT_CAP} points")));
    }
    let mut pts = vec![Point(Vec::new())];
    for i in 0..inst.len() {
        let n = inst.finite(i).len();
        pts = pts
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |v| {
                    let mut c = p.0.clone();
                    c.push(Coord::Vertex(v));
                    Point(c)
                })
            })
            .collect();
    }
    Ok(pts)
}

pub fn orbit(a: &GroupAction, p: &Point) -> Vec<Point> {
    let inst = a.instance();
    let mut seen: HashSet<Point> = HashSet::from([p.clone()]);
    let mut stack = vec![p.clone()];
    while let Some(q) = stack.pop() {
        for g in a.generators() {
            let r = inst.apply(g, &q);
            if seen.insert(r.clone()) {
                stack.push(r);
            }
        }
    }
    let mut out: Vec<Point> = seen.into_iter().collect();
    out.sort();
    out
}

/// Dimension of `s` as a cube, if it is one: the distinct bipartitions cut by walls number `k` and `|s| = 2^k`.
pub fn cube_dimension(inst: &ProductInstance, s: &[Point]) -> Option<usize> {
    let mut cuts: BTreeSet<Vec<usize>> = BTreeSet::new();
    for i in 0..inst.len() {
        let g = inst.finite(i);
        for w in 0..g.walls().len() {
            let side: &FixedBitSet = g.halfspace(2 * w);
            let first = side.contains(s[0].0[i].as_vertex());
            let cut: Vec<usize> = (0..s.len()).filter(|&k| side.contains(s[k].0[i].as_vertex()) != first).collect();
            if !cut.is_empty() {
                cuts.insert(cut);
            }
        }
    }
    let k = cuts.len();
    (k < usize::BITS as usize && s.len() == 1usize << k).then_some(k)
}

/// A fixed vertex (lowest in lexicographic order) or, when the group inverts walls, an invariant cube.
pub fn fixed_point_or_cube(a: &GroupAction) -> Result<FixedOrCube> {
    let inst = a.instance();
    let pts = all_points(inst)?;
    if let Some(p) = pts.iter().find(|p| a.generators().iter().all(|g| &inst.apply(g, p) == *p)) {
        return Ok(FixedOrCube::FixedVertex(p.clone()));
    }
    let mut best: Option<(usize, Vec<Point>)> = None;
    let mut tried: HashSet<Point> = HashSet::new();
    for p in &pts {
        if tried.contains(p) {
            continue;
        }
        let o = orbit(a, p);
        tried.extend(o.iter().cloned());
        let s = subalgebra_closure(inst, &o)?;
        if let Some(k) = cube_dimension(inst, &s) {
            if best.as_ref().filter(|(d, _)| *d <= k).is_none() {
                best = Some((k, s));
            }
        }
    }
    best.map(|(dimension, vertices)| FixedOrCube::InvariantCube { vertices, dimension })
        .ok_or_else(|| Error::PreconditionFailed("no orbit closure is a cube".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::{Automorphism, FactorMap, FiniteMap};
    use crate::generate::{grid, hypercube, path};
    use crate::instance::Factor;
    use std::sync::Arc;

    fn act(g: crate::graph::MedianGraph, perms: &[Vec<usize>]) -> GroupAction {
        let inst = ProductInstance::new(vec![Factor::Finite(Arc::new(g))]);
        let gens = perms.iter().map(|p| Automorphism::diagonal(vec![FactorMap::Finite(FiniteMap { perm: p.clone() })])).collect();
        GroupAction::new(inst, gens, vec![]).unwrap()
    }

    #[test]
    fn identity_on_cube_fixes_lowest() {
        let a = act(hypercube(3), &[(0..8).collect()]);
        assert_eq!(fixed_point_or_cube(&a).unwrap(), FixedOrCube::FixedVertex(Point(vec![Coord::Vertex(0)])));
    }

    #[test]
    fn grid_swap_fixes_diagonal() {
        let a = act(grid(2, 2), &[vec![0, 2, 1, 3]]);
        let FixedOrCube::FixedVertex(p) = fixed_point_or_cube(&a).unwrap() else { panic!() };
        assert_eq!(p, Point(vec![Coord::Vertex(0)]));
    }

    #[test]
    fn flips_give_cubes() {
        let a = act(path(2), &[vec![1, 0]]);
        assert_eq!(
            fixed_point_or_cube(&a).unwrap(),
            FixedOrCube::InvariantCube { vertices: vec![Point(vec![Coord::Vertex(0)]), Point(vec![Coord::Vertex(1)])], dimension: 1 }
        );
        let a = act(path(4), &[vec![3, 2, 1, 0]]);
        let FixedOrCube::InvariantCube { dimension, vertices } = fixed_point_or_cube(&a).unwrap() else { panic!() };
        assert_eq!((dimension, vertices.len()), (1, 2));
        // antipodal map of the square
        let a = act(grid(2, 2), &[vec![3, 2, 1, 0]]);
        let FixedOrCube::InvariantCube { dimension, .. } = fixed_point_or_cube(&a).unwrap() else { panic!() };
        assert_eq!(dimension, 1);
    }
}

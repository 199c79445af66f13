//! Brute-force oracles that re-derive library results independently.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::action::{BarClass, GroupAction, HClass};
use crate::automorphism::{Automorphism, FactorMap};
use crate::error::{Error, Result};
use crate::graph::MedianGraph;
use crate::instance::{Coord, Factor, Point, ProductInstance, RelPos, SymHalfspace};
use crate::metric::WallWeighting;
use crate::minset::{minset_membership, range_check, translation_length};
use crate::stallings::minimal_subtree;
use crate::window::{factor_ball, Window};
use crate::word::Word;

pub const ORACLE_ORBIT_CAP: usize = 50_000;
pub const ORACLE_ELEMENT_CAP: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub item: String,
    pub expected: String,
    pub found: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleOutcome {
    pub oracle: &'static str,
    pub checked: usize,
    pub mismatch: Option<Mismatch>,
    pub notes: Vec<String>,
}

impl OracleOutcome {
    fn new(oracle: &'static str) -> Self {
        OracleOutcome { oracle, checked: 0, mismatch: None, notes: Vec::new() }
    }

    pub fn is_match(&self) -> bool {
        self.mismatch.is_none()
    }

    fn check(&mut self, item: impl FnOnce() -> String, expected: impl fmt::Debug, found: impl fmt::Debug) -> bool {
        self.checked += 1;
        let (e, f) = (format!("{expected:?}"), format!("{found:?}"));
        if e != f && self.mismatch.is_none() {
            self.mismatch = Some(Mismatch { item: item(), expected: e, found: f });
        }
        self.mismatch.is_none()
    }
}

impl fmt::Display for OracleOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.mismatch {
            None => write!(f, "{}: MATCH ({} checks)", self.oracle, self.checked),
            Some(m) => write!(f, "{}: MISMATCH at {} (expected {}, found {})", self.oracle, m.item, m.expected, m.found),
        }
    }
}

/// Median, hull and gate of a finite median graph against distance-only computations.
pub fn finite_graph_oracle(g: &MedianGraph, fault: bool) -> Result<OracleOutcome> {
    let mut out = OracleOutcome::new("finite-median");
    let graph = g.graph();
    let n = g.len();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let mut lib = g.median(x, y, z);
                if fault && (x, y, z) == (0, 0, n - 1) {
                    lib = n - 1;
                }
                let brute = graph.metric_median(x, y, z)?;
                if !out.check(|| format!("median({x},{y},{z})"), brute, lib) {
                    return Ok(out);
                }
            }
        }
    }
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for x in 0..n {
        for y in x..n {
            sets.push(vec![x, y]);
        }
    }
    if n <= 16 {
        for x in 0..n {
            for y in x + 1..n {
                for z in y + 1..n {
                    sets.push(vec![x, y, z]);
                }
            }
        }
    }
    for s in sets {
        let hull = g.convex_hull(&s);
        let mut brute = FixedBitSet::with_capacity(n);
        brute.insert_range(..);
        for h in 0..g.halfspace_count() {
            if s.iter().all(|&v| g.halfspace(h).contains(v)) {
                brute.intersect_with(g.halfspace(h));
            }
        }
        let members: Vec<usize> = brute.ones().collect();
        if !out.check(|| format!("hull{s:?}"), &members, hull.vertices()) {
            return Ok(out);
        }
        for x in 0..n {
            let gates: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&c| members.iter().all(|&y| graph.metric_median(x, c, y).is_ok_and(|m| m == c)))
                .collect();
            if !out.check(|| format!("gate({x}, hull{s:?})"), gates, vec![g.gate(&hull, x)]) {
                return Ok(out);
            }
        }
    }
    Ok(out)
}

/// Classes of `h` derived from its orbit, explored breadth-first to `depth` generator steps.
pub fn simulate_classes(a: &GroupAction, h: &SymHalfspace, depth: usize) -> Result<(Option<HClass>, BarClass)> {
    let inst = a.instance();
    let moves: Vec<Automorphism> =
        a.generators().iter().flat_map(|g| [g.clone(), g.inverse()]).collect();
    let mut seen: HashSet<SymHalfspace> = HashSet::from([h.clone()]);
    let mut layer = vec![h.clone()];
    let mut closed = false;
    for _ in 0..depth {
        let mut next = Vec::new();
        for k in &layer {
            for g in &moves {
                let gk = inst.apply_h(g, k);
                if seen.insert(gk.clone()) {
                    next.push(gk);
                }
            }
        }
        if seen.len() > ORACLE_ORBIT_CAP {
            return Err(Error::OracleBudgetExceeded(format!("orbit of {h}")));
        }
        if next.is_empty() {
            closed = true;
            break;
        }
        layer = next;
    }
    let rel: Vec<RelPos> = seen.iter().map(|k| k.relative_position(inst, h)).collect();
    let nested = rel.contains(&RelPos::NestedIn);
    let facing = rel.contains(&RelPos::Facing);
    let cofacing = rel.contains(&RelPos::CoFacing);
    let class = if nested {
        Some(HClass::H1)
    } else if closed {
        Some(HClass::H0)
    } else if facing {
        Some(HClass::Hhalf)
    } else if cofacing {
        Some(HClass::HhalfStar)
    } else {
        None
    };
    let barred = if nested {
        BarClass::H1
    } else if facing {
        BarClass::HhalfBar
    } else if cofacing {
        BarClass::HhalfBarStar
    } else {
        BarClass::H0Bar
    };
    Ok((class, barred))
}

/// Halfspace classes and both cores on a window, against bounded orbit simulation.
/// The basepoint must lie in the reduced core, so every blocking wall meets the window.
pub fn window_core_oracle(a: &GroupAction, w: &Window, depth: usize, fault: bool) -> Result<OracleOutcome> {
    let inst = a.instance();
    let m = a.core_membership(&w.basepoint)?;
    if !m.in_reduced_core {
        return Err(Error::PreconditionFailed(format!("basepoint {} is not in the reduced core", w.basepoint)));
    }
    let mut out = OracleOutcome::new("window-core");
    let mut hhalf = Vec::new();
    let mut hhalf_bar = Vec::new();
    let mut first = true;
    for wall in w.walls_meeting(inst) {
        for h in [wall.clone(), wall.star()] {
            let (class, barred) = simulate_classes(a, &h, depth)?;
            let Some(class) = class else {
                return Err(Error::UndecidedAtBound { bound: depth, what: format!("simulated class of {h}") });
            };
            let lib = a.classify_halfspace(&h)?;
            let mut found = (lib.class, lib.barred);
            if fault && first {
                found.0 = if found.0 == HClass::H1 { HClass::H0 } else { HClass::H1 };
            }
            first = false;
            if !out.check(|| h.to_string(), (class, barred), found) {
                return Ok(out);
            }
            if class == HClass::Hhalf {
                hhalf.push(h.clone());
            }
            if barred == BarClass::HhalfBar {
                hhalf_bar.push(h);
            }
        }
    }
    let (lib_c, lib_cb) = a.core_window(w)?;
    for (name, halves, lib) in [("core", &hhalf, lib_c), ("reduced-core", &hhalf_bar, lib_cb)] {
        let brute: Vec<Point> = w.points.iter().filter(|p| halves.iter().all(|h| h.contains(inst, p))).cloned().collect();
        if !out.check(|| format!("{name} window"), &brute, &lib) {
            return Ok(out);
        }
        out.notes.push(format!("{name}: {} window points", brute.len()));
    }
    Ok(out)
}

/// Vertices of the axis of `v ↦ u·v` among `words`.
fn axis_vertices<'a>(u: &Word, words: &'a [Word]) -> HashSet<&'a Word> {
    let ell = u.cyclic_reduction().1.len();
    words.iter().filter(|v| v.inverse().mul(u).mul(v).len() == ell).collect()
}

/// Reduced-core edges of a left-multiplication action on a tree factor, against the
/// folded subgroup graph and against a union of axes of short group elements.
pub fn stallings_oracle(a: &GroupAction, i: usize, w: &Window, len: usize, fault: bool) -> Result<OracleOutcome> {
    let inst = a.instance();
    let Factor::FreeTree { rank } = inst.factors[i] else {
        return Err(Error::PreconditionFailed(format!("factor {i} is not a tree")));
    };
    let mut lefts = Vec::new();
    for g in a.generators() {
        match &g.maps[i] {
            FactorMap::Tree(m) if g.perm[i] == i && m.subst.is_identity() => lefts.push(m.left.clone()),
            _ => return Err(Error::PreconditionFailed("generators must act by left multiplication".into())),
        }
    }
    if lefts.iter().all(Word::is_empty) {
        return Err(Error::PreconditionFailed("the subgroup is trivial".into()));
    }
    let s = minimal_subtree(rank, &lefts);
    let cbar = a.reduced_core()?;
    let part = &cbar.parts[i];
    let words: Vec<Word> = factor_ball(inst, i, &w.basepoint.0[i], w.radius)
        .into_iter()
        .map(|(c, _)| c.as_word().clone())
        .collect();
    let inball: HashSet<&Word> = words.iter().collect();
    let mut edges: Vec<(Word, Word)> = Vec::new();
    for v in &words {
        if let Some(p) = v.parent() {
            if inball.contains(&p) {
                edges.push((p, v.clone()));
            }
        }
    }
    edges.sort();
    let lib: BTreeSet<(Word, Word)> = edges
        .iter()
        .filter(|(p, v)| part.contains(&Coord::Word(p.clone())) && part.contains(&Coord::Word(v.clone())))
        .cloned()
        .collect();
    let folded: BTreeSet<(Word, Word)> =
        edges.iter().filter(|(p, v)| s.contains_edge(p, v.last().expect("nonempty"))).cloned().collect();
    let mut axes: BTreeSet<(Word, Word)> = BTreeSet::new();
    for (word, _) in a.elements_up_to(len, ORACLE_ELEMENT_CAP)? {
        let u = word.letters().iter().fold(Word::identity(), |acc, &l| {
            let x = &lefts[l.unsigned_abs() as usize - 1];
            acc.mul(&if l > 0 { x.clone() } else { x.inverse() })
        });
        if u.is_empty() {
            continue;
        }
        let ax = axis_vertices(&u, &words);
        for (p, v) in &edges {
            if ax.contains(p) && ax.contains(v) {
                axes.insert((p.clone(), v.clone()));
            }
        }
    }
    let mut out = OracleOutcome::new("stallings");
    let mut lib_list: Vec<&(Word, Word)> = lib.iter().collect();
    if fault && !lib_list.is_empty() {
        lib_list.remove(0);
    }
    let lib_set: BTreeSet<(Word, Word)> = lib_list.into_iter().cloned().collect();
    for e in edges.iter() {
        let item = || format!("edge {{{}, {}}}", e.0, e.1);
        if !out.check(item, folded.contains(e), lib_set.contains(e)) {
            return Ok(out);
        }
        if axes.contains(e) && !out.check(item, true, lib_set.contains(e)) {
            return Ok(out);
        }
    }
    out.notes.push(format!(
        "{} window edges, {} in the minimal subtree, {} covered by axes of elements of length <= {len}",
        edges.len(),
        folded.len(),
        axes.len()
    ));
    Ok(out)
}

/// `Min(g)` on a window three ways: displacement equal to the translation length (strict metrics only),
/// the library's membership test, and the range check over `n ∈ [-N, N]`.
pub fn minset_oracle(
    inst: &ProductInstance,
    g: &Automorphism,
    wt: &WallWeighting,
    w: &Window,
    range: usize,
    fault: bool,
) -> Result<OracleOutcome> {
    let mut out = OracleOutcome::new("minset-exhaustive");
    let ell = translation_length(inst, g, wt)?;
    for (k, y) in w.points.iter().enumerate() {
        let by_range = range_check(inst, g, y, range).is_none();
        let mut lib = minset_membership(inst, g, y, range)?.is_member();
        if fault && k == 0 {
            lib = !lib;
        }
        if !out.check(|| format!("point {y}"), by_range, lib) {
            return Ok(out);
        }
        if !wt.is_pseudo() {
            let by_length = wt.distance(inst, y, &inst.apply(g, y)) == ell;
            if !out.check(|| format!("displacement at {y}"), by_range, by_length) {
                return Ok(out);
            }
        }
    }
    out.notes.push(format!("translation length {ell}"));
    Ok(out)
}

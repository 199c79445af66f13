//! Translation lengths, Min-sets, semisimplicity and endpoints of single automorphisms.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::action::{tree_center, FactorSubset, GroupAction, SubInstance, TreeCenter};
use crate::automorphism::{Automorphism, FactorMap, TreeMap};
use crate::error::{Error, Result};
use crate::instance::{Coord, Factor, HalfspaceDesc, LineHalf, Point, ProductInstance, SymHalfspace, TreeHalf};
use crate::metric::{rat, Rational, WallWeighting};
use crate::stallings::Stallings;
use crate::window::Window;
use crate::word::Word;

/// A point of `Min(g)`; `certified` when decided by factor structure rather than a finite range check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinWitness {
    pub point: Point,
    pub checked_range: usize,
    pub certified: bool,
}

/// A wall lying in both `W(gⁿx | gⁿ⁺¹x)` and `W(gᵐx | gᵐ⁺¹x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refutation {
    pub wall: SymHalfspace,
    pub n: i64,
    pub m: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Member(MinWitness),
    NonMember(Refutation),
    /// Not in `Min(g)` by the factor structure, but no repeated wall within the range.
    NonMemberUnwitnessed { checked_range: usize },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }
}

#[derive(Clone, Debug)]
pub enum FactorMin {
    Set(FactorSubset),
    /// Empty; some power of `g` inverts this wall.
    Empty(SymHalfspace),
}

#[derive(Clone, Debug)]
pub enum MinSet {
    Set(SubInstance),
    Empty(SymHalfspace),
    /// `g` permutes factors: membership is only range-checked.
    RangeChecked,
}

pub fn default_range(inst: &ProductInstance) -> usize {
    inst.rank().unwrap_or(4).max(4)
}

fn tree_power(m: &TreeMap, q: usize) -> TreeMap {
    let mut acc = TreeMap::left_mult(Word::identity(), m.subst.rank());
    for _ in 0..q {
        acc = m.compose(&acc);
    }
    acc
}

/// Left word `u` with `g^q = (v ↦ u·v)`, `q` the order of the substitution.
pub fn tree_translation_part(m: &TreeMap) -> (usize, Word) {
    let q = m.subst.order();
    (q, tree_power(m, q).left)
}

/// `Min` of a factor-preserving `g` restricted to factor `i`.
pub fn factor_min(inst: &ProductInstance, g: &Automorphism, i: usize) -> Result<FactorMin> {
    Ok(match &g.maps[i] {
        FactorMap::Line(m) => {
            if m.eps > 0 {
                FactorMin::Set(FactorSubset::Whole)
            } else if m.shift.rem_euclid(2) == 0 {
                FactorMin::Set(FactorSubset::Point(Coord::Int(m.shift / 2)))
            } else {
                FactorMin::Empty(SymHalfspace::line(i, LineHalf::Ge((m.shift + 1) / 2)))
            }
        }
        FactorMap::Tree(m) => {
            let (_, u) = tree_translation_part(m);
            if !u.is_empty() {
                FactorMin::Set(FactorSubset::Subtree(Arc::new(Stallings::new(inst.tree_rank(i), &[u]))))
            } else {
                match tree_center(std::slice::from_ref(m))? {
                    TreeCenter::Vertex(c) => FactorMin::Set(FactorSubset::Fixed { maps: vec![m.clone()], center: c }),
                    TreeCenter::Inverted(a, b) => {
                        let far = if a.len() > b.len() { a } else { b };
                        FactorMin::Empty(SymHalfspace::tree(i, TreeHalf::Cone(far)))
                    }
                }
            }
        }
        FactorMap::Finite(m) => {
            let fixed: Vec<usize> = (0..m.perm.len()).filter(|&v| m.perm[v] == v).collect();
            if fixed.is_empty() {
                let a = GroupAction::cyclic(inst, g)?;
                let (h, _) = a
                    .factor_inversion(i)?
                    .ok_or_else(|| Error::PreconditionFailed(format!("factor {i}: no fixed vertex and no inversion")))?;
                FactorMin::Empty(h)
            } else {
                FactorMin::Set(FactorSubset::Vertices(fixed))
            }
        }
    })
}

pub fn minset(inst: &ProductInstance, g: &Automorphism) -> Result<MinSet> {
    if !g.is_factor_preserving() {
        return Ok(MinSet::RangeChecked);
    }
    let mut parts = Vec::with_capacity(inst.len());
    for i in 0..inst.len() {
        match factor_min(inst, g, i)? {
            FactorMin::Set(s) => parts.push(s),
            FactorMin::Empty(h) => return Ok(MinSet::Empty(h)),
        }
    }
    Ok(MinSet::Set(SubInstance { parts }))
}

/// First wall repeated among `W(gⁿx | gⁿ⁺¹x)`, `n ∈ [-N, N]`.
pub fn range_check(inst: &ProductInstance, g: &Automorphism, x: &Point, n: usize) -> Option<Refutation> {
    let n = n as i64;
    let ginv = g.inverse();
    let mut p = x.clone();
    for _ in 0..n {
        p = inst.apply(&ginv, &p);
    }
    let mut seen: HashMap<SymHalfspace, i64> = HashMap::new();
    for k in -n..=n {
        let q = inst.apply(g, &p);
        for h in inst.separating_walls(&p, &q) {
            let w = h.wall();
            if let Some(&m) = seen.get(&w) {
                return Some(Refutation { wall: w, n: m, m: k });
            }
            seen.insert(w, k);
        }
        p = q;
    }
    None
}

pub fn minset_membership(inst: &ProductInstance, g: &Automorphism, x: &Point, n: usize) -> Result<Membership> {
    inst.validate_point(x)?;
    let exact = match minset(inst, g)? {
        MinSet::Set(s) => Some(s.contains(x)),
        MinSet::Empty(_) => Some(false),
        MinSet::RangeChecked => None,
    };
    match exact {
        Some(true) => Ok(Membership::Member(MinWitness { point: x.clone(), checked_range: n, certified: true })),
        Some(false) => Ok(match range_check(inst, g, x, n.max(2)) {
            Some(r) => Membership::NonMember(r),
            None => Membership::NonMemberUnwitnessed { checked_range: n.max(2) },
        }),
        None => Ok(match range_check(inst, g, x, n.max(2)) {
            Some(r) => Membership::NonMember(r),
            None => Membership::Member(MinWitness { point: x.clone(), checked_range: n.max(2), certified: false }),
        }),
    }
}

/// `inf_x d(x, gx)` for the weighted metric.
pub fn translation_length(inst: &ProductInstance, g: &Automorphism, w: &WallWeighting) -> Result<Rational> {
    if !g.is_factor_preserving() {
        let k = g.perm_order();
        return Ok(translation_length(inst, &g.pow(k as i64), w)? / rat(k as i64));
    }
    let mut total = rat(0);
    for i in 0..inst.len() {
        let base = inst.origin().0[i].clone();
        total += match factor_min(inst, g, i)? {
            FactorMin::Set(s) => {
                let x = s.gate(inst, i, &base);
                w.coord_distance(inst, i, &x, &g.maps[i].apply(&x))
            }
            FactorMin::Empty(h) => match &inst.factors[i] {
                Factor::Finite(fg) => (0..fg.len())
                    .map(|v| w.coord_distance(inst, i, &Coord::Vertex(v), &g.maps[i].apply(&Coord::Vertex(v))))
                    .min()
                    .expect("nonempty graph"),
                _ => w.weight(&h),
            },
        };
    }
    Ok(total)
}

/// `Some((h, g·h))` with the two walls transverse, or `None` when `g` is non-transverse.
pub fn transverse_witness(inst: &ProductInstance, g: &Automorphism) -> Option<(SymHalfspace, SymHalfspace)> {
    if let Some(i) = (0..inst.len()).find(|&i| g.perm[i] != i) {
        let h = match &inst.factors[i] {
            Factor::Line => SymHalfspace::line(i, LineHalf::Ge(1)),
            Factor::FreeTree { .. } => SymHalfspace::tree(i, TreeHalf::Cone(Word::letter(1))),
            Factor::Finite(_) => SymHalfspace::finite(i, 0),
        };
        let gh = inst.apply_h(g, &h);
        return Some((h, gh));
    }
    for i in 0..inst.len() {
        if let Factor::Finite(fg) = &inst.factors[i] {
            for w in 0..fg.walls().len() {
                let h = SymHalfspace::finite(i, 2 * w);
                let gh = inst.apply_h(g, &h);
                if let HalfspaceDesc::Finite(x) = gh.desc {
                    if fg.transverse(w, x / 2) {
                        return Some((h, gh));
                    }
                }
            }
        }
    }
    None
}

pub fn is_non_transverse(inst: &ProductInstance, g: &Automorphism) -> bool {
    transverse_witness(inst, g).is_none()
}

/// A wall inverted by some power of `g`, and that power.
pub fn stable_inversion(inst: &ProductInstance, g: &Automorphism) -> Result<Option<(SymHalfspace, i64)>> {
    let a = GroupAction::cyclic(inst, g)?;
    Ok(a.inversion()?.map(|(h, w)| (h, w.letters().iter().map(|&l| l.signum() as i64).sum())))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Semisimplicity {
    Witness(MinWitness),
    Inversion {
        wall: SymHalfspace,
        /// `g^power` inverts `wall`.
        power: i64,
        /// Least `i ≤ 2^rank` with `g^i` semisimple, and its witness.
        power_witness: Option<(usize, MinWitness)>,
    },
    NotFoundAtRadius(usize),
}

fn min_witness(inst: &ProductInstance, g: &Automorphism, base: &Point, radius: usize) -> Result<Option<MinWitness>> {
    match minset(inst, g)? {
        MinSet::Set(s) => {
            Ok(Some(MinWitness { point: s.gate(inst, base), checked_range: default_range(inst), certified: true }))
        }
        MinSet::Empty(_) => Ok(None),
        MinSet::RangeChecked => {
            let n = default_range(inst);
            let w = Window::new(inst, base, radius)?;
            let mut pts: Vec<(usize, usize, &Point)> =
                w.points.iter().map(|p| (inst.distance(p, &inst.apply(g, p)), inst.distance(base, p), p)).collect();
            pts.sort();
            for (_, _, p) in pts {
                if range_check(inst, g, p, n).is_none() {
                    return Ok(Some(MinWitness { point: p.clone(), checked_range: n, certified: false }));
                }
            }
            Ok(None)
        }
    }
}

pub fn is_semisimple(inst: &ProductInstance, g: &Automorphism, base: &Point, radius: usize) -> Result<Semisimplicity> {
    match stable_inversion(inst, g)? {
        None => Ok(match min_witness(inst, g, base, radius)? {
            Some(w) => Semisimplicity::Witness(w),
            None => Semisimplicity::NotFoundAtRadius(radius),
        }),
        Some((wall, power)) => {
            let cap = 1usize << inst.rank()?.min(16);
            let mut power_witness = None;
            for i in 2..=cap {
                let gi = g.pow(i as i64);
                if stable_inversion(inst, &gi)?.is_none() {
                    if let Some(w) = min_witness(inst, &gi, base, radius)? {
                        power_witness = Some((i, w));
                        break;
                    }
                }
            }
            Ok(Semisimplicity::Inversion { wall, power, power_witness })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreGate {
    pub gate: Point,
    pub distance: Rational,
    pub translation_length: Rational,
    pub displacement: Rational,
    /// `d(y, gy) = ℓ(g) + 2·d(y, C̄(g))`.
    pub identity_holds: bool,
}

pub fn reduced_core_gate(inst: &ProductInstance, g: &Automorphism, w: &WallWeighting, y: &Point) -> Result<CoreGate> {
    inst.validate_point(y)?;
    if let Some((h, gh)) = transverse_witness(inst, g) {
        return Err(Error::PreconditionFailed(format!("{h} is transverse to its image {gh}")));
    }
    if let Some((h, k)) = stable_inversion(inst, g)? {
        return Err(Error::PreconditionFailed(format!("g^{k} inverts {h}")));
    }
    let cbar = GroupAction::cyclic(inst, g)?.reduced_core()?;
    let gate = cbar.gate(inst, y);
    let distance = w.distance(inst, y, &gate);
    let ell = translation_length(inst, g, w)?;
    let displacement = w.distance(inst, y, &inst.apply(g, y));
    let identity_holds = displacement == &ell + &distance * rat(2);
    Ok(CoreGate { gate, distance, translation_length: ell, displacement, identity_holds })
}

/// A point at infinity, factor by factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundaryCoord {
    PlusInfinity,
    MinusInfinity,
    /// The ray `prefix · period^∞`.
    Ray { prefix: Word, period: Word },
    /// A factor where the point is an ordinary coordinate.
    Point(Coord),
}

impl fmt::Display for BoundaryCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCoord::PlusInfinity => f.write_str("+inf"),
            BoundaryCoord::MinusInfinity => f.write_str("-inf"),
            BoundaryCoord::Ray { prefix, period } if prefix.is_empty() => write!(f, "({period})^inf"),
            BoundaryCoord::Ray { prefix, period } => write!(f, "{prefix}({period})^inf"),
            BoundaryCoord::Point(c) => write!(f, "{}", Point(vec![c.clone()])),
        }
    }
}

impl BoundaryCoord {
    /// Canonical ray: the prefix does not end with the last letter of the period.
    pub fn ray(prefix: Word, period: Word) -> BoundaryCoord {
        let (mut p, mut c) = (prefix, period);
        while !p.is_empty() && p.last() == c.last() {
            let l = c.last().expect("nonempty period");
            p = p.parent().expect("nonempty");
            let mut ls = vec![l];
            ls.extend_from_slice(&c.letters()[..c.len() - 1]);
            c = Word::new(ls);
        }
        BoundaryCoord::Ray { prefix: p, period: c }
    }

    /// First `n` letters of a ray.
    fn ray_prefix(prefix: &Word, period: &Word, n: usize) -> Word {
        let mut ls: Vec<i32> = prefix.letters().to_vec();
        while ls.len() < n {
            ls.extend_from_slice(period.letters());
        }
        ls.truncate(n);
        Word::new(ls)
    }

    /// Does the halfspace contain this point at infinity? `None` for walls of other kinds.
    pub fn in_half(&self, h: &HalfspaceDesc) -> Option<bool> {
        match (self, h) {
            (BoundaryCoord::PlusInfinity, HalfspaceDesc::Line(l)) => Some(matches!(l, LineHalf::Ge(_))),
            (BoundaryCoord::MinusInfinity, HalfspaceDesc::Line(l)) => Some(matches!(l, LineHalf::Le(_))),
            (BoundaryCoord::Ray { prefix, period }, HalfspaceDesc::Tree(t)) => {
                let (v, cone) = match t {
                    TreeHalf::Cone(v) => (v, true),
                    TreeHalf::CoCone(v) => (v, false),
                };
                let inside = BoundaryCoord::ray_prefix(prefix, period, v.len()) == *v;
                Some(inside == cone)
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Endpoints {
    pub minus: Vec<BoundaryCoord>,
    pub plus: Vec<BoundaryCoord>,
    pub core: SubInstance,
    pub essential_factors: Vec<usize>,
}

impl Endpoints {
    /// Sides toward `ξ⁺` of the window walls in essential factors.
    pub fn orient(&self, inst: &ProductInstance, w: &Window) -> Vec<SymHalfspace> {
        w.walls_meeting(inst)
            .into_iter()
            .filter(|h| self.essential_factors.contains(&h.factor))
            .filter_map(|h| match self.plus[h.factor].in_half(&h.desc)? {
                true => Some(h),
                false => Some(h.star()),
            })
            .collect()
    }
}

pub fn endpoints(inst: &ProductInstance, g: &Automorphism, base: &Point) -> Result<Endpoints> {
    let a = GroupAction::cyclic(inst, g)?;
    let e = a.essential_core(base).map_err(|err| Error::PreconditionFailed(format!("no essential core: {err}")))?;
    let h = g.pow(g.perm_order() as i64);
    let (mut minus, mut plus) = (Vec::new(), Vec::new());
    for i in 0..inst.len() {
        if !e.essential_factors.contains(&i) {
            let c = match &e.core.parts[i] {
                FactorSubset::Point(c) => c.clone(),
                other => other.gate(inst, i, &base.0[i]),
            };
            minus.push(BoundaryCoord::Point(c.clone()));
            plus.push(BoundaryCoord::Point(c));
            continue;
        }
        match &h.maps[i] {
            FactorMap::Line(m) if m.eps > 0 && m.shift != 0 => {
                let (lo, hi) = (BoundaryCoord::MinusInfinity, BoundaryCoord::PlusInfinity);
                let (mi, pl) = if m.shift > 0 { (lo, hi) } else { (hi, lo) };
                minus.push(mi);
                plus.push(pl);
            }
            FactorMap::Tree(m) => {
                let (_, u) = tree_translation_part(m);
                if u.is_empty() {
                    return Err(Error::PreconditionFailed(format!("g acts elliptically on factor {i}")));
                }
                let (p, c) = u.cyclic_reduction();
                plus.push(BoundaryCoord::ray(p.clone(), c.clone()));
                minus.push(BoundaryCoord::ray(p, c.inverse()));
            }
            _ => return Err(Error::PreconditionFailed(format!("factor {i} has a wall that is not H1"))),
        }
    }
    Ok(Endpoints { minus, plus, core: e.core, essential_factors: e.essential_factors })
}

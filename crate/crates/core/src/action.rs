//! Finitely generated group actions on product instances.
//!
//! Everything about a halfspace of factor `i` only involves the stabiliser of
//! that factor, restricted to it. Those restricted groups are analysed exactly:
//! lines through their translation subgroup and reflections, trees through the
//! kernel of the letter-substitution part (a free group handled by folding),
//! finite factors by orbit enumeration.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::sync::{Arc, OnceLock};

use crate::automorphism::{Automorphism, FactorMap, TreeMap};
use crate::error::{invalid, Error, Result};
use crate::graph::MedianGraph;
use crate::instance::{Coord, Factor, HalfspaceDesc, LineHalf, Point, ProductInstance, RelPos, SymHalfspace, TreeHalf};
use crate::stallings::Stallings;
use crate::window::Window;
use crate::word::{SignedPerm, Word};

/// A word in the generators of an action: letter `k` is generator `k - 1`, `-k` its inverse.
pub type GWord = Word;

pub const ORBIT_CAP: usize = 200_000;

/// Orbit points with transversal words, and generators of the stabiliser.
pub type Schreier<P> = (Vec<(P, GWord)>, Vec<GWord>);

/// Transversal and stabiliser generators for an action of `⟨gens⟩` on the orbit of `start`.
/// `act(p, k)` must be the image of `p` under `gens[k]`.
pub fn schreier<P: Clone + Eq + Hash>(
    gens: &[GWord],
    start: P,
    cap: usize,
    act: impl Fn(&P, usize) -> P,
) -> Result<Schreier<P>> {
    let mut index: HashMap<P, usize> = HashMap::new();
    let mut orbit: Vec<(P, GWord)> = vec![(start.clone(), Word::identity())];
    index.insert(start, 0);
    let mut k = 0;
    while k < orbit.len() {
        for (s, g) in gens.iter().enumerate() {
            let q = act(&orbit[k].0, s);
            if !index.contains_key(&q) {
                if orbit.len() >= cap {
                    return Err(Error::UndecidedAtBound { bound: cap, what: "orbit enumeration".into() });
                }
                index.insert(q.clone(), orbit.len());
                let w = g.mul(&orbit[k].1);
                orbit.push((q, w));
            }
        }
        k += 1;
    }
    let mut seen = HashSet::new();
    let mut stab = Vec::new();
    for (p, tp) in &orbit {
        for (s, g) in gens.iter().enumerate() {
            let q = act(p, s);
            let tq = &orbit[index[&q]].1;
            let w = tq.inverse().mul(g).mul(tp);
            if !w.is_empty() && seen.insert(w.clone()) {
                stab.push(w);
            }
        }
    }
    Ok((orbit, stab))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HClass {
    H1,
    H0,
    Hhalf,
    HhalfStar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BarClass {
    H1,
    H0Bar,
    HhalfBar,
    HhalfBarStar,
}

impl fmt::Display for HClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HClass::H1 => "H1",
            HClass::H0 => "H0",
            HClass::Hhalf => "Hhalf",
            HClass::HhalfStar => "Hhalf*",
        })
    }
}

impl fmt::Display for BarClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BarClass::H1 => "H1",
            BarClass::H0Bar => "H0bar",
            BarClass::HhalfBar => "HhalfBar",
            BarClass::HhalfBarStar => "HhalfBar*",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Confidence {
    Exact,
    Bounded { bound: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfspaceClassification {
    pub halfspace: SymHalfspace,
    pub class: HClass,
    pub barred: BarClass,
    /// `g` with `g𝔥 ⊊ 𝔥` for H1, `g𝔥` facing (or cofacing) `𝔥` for the half classes.
    pub witness: Option<GWord>,
    pub barred_witness: Option<GWord>,
    /// Orbit size, when finite.
    pub orbit: Option<usize>,
    pub confidence: Confidence,
}

impl HalfspaceClassification {
    pub fn h1(&self) -> bool {
        self.class == HClass::H1
    }
    pub fn h0(&self) -> bool {
        self.class == HClass::H0
    }
    pub fn hhalf(&self) -> bool {
        self.class == HClass::Hhalf
    }
    pub fn hhalf_star(&self) -> bool {
        self.class == HClass::HhalfStar
    }
    pub fn h0_bar(&self) -> bool {
        self.barred == BarClass::H0Bar
    }
    pub fn hhalf_bar(&self) -> bool {
        self.barred == BarClass::HhalfBar
    }
    pub fn hhalf_bar_star(&self) -> bool {
        self.barred == BarClass::HhalfBarStar
    }
}

/// A subset of one factor.
#[derive(Clone, Debug)]
pub enum FactorSubset {
    Whole,
    Point(Coord),
    /// Closed integer interval of a line.
    Interval(i64, i64),
    /// Minimal subtree of a free subgroup.
    Subtree(Arc<Stallings>),
    /// Common fixed set of tree maps, with one of its vertices.
    Fixed { maps: Vec<TreeMap>, center: Word },
    /// The two endpoints of a tree edge.
    Pair(Word, Word),
    /// A convex set of vertices of a finite factor.
    Vertices(Vec<usize>),
}

impl FactorSubset {
    pub fn contains(&self, c: &Coord) -> bool {
        match self {
            FactorSubset::Whole => true,
            FactorSubset::Point(p) => p == c,
            FactorSubset::Interval(a, b) => (*a..=*b).contains(&c.as_int()),
            FactorSubset::Subtree(s) => s.contains_vertex(c.as_word()),
            FactorSubset::Fixed { maps, .. } => maps.iter().all(|m| &m.apply(c.as_word()) == c.as_word()),
            FactorSubset::Pair(a, b) => c.as_word() == a || c.as_word() == b,
            FactorSubset::Vertices(vs) => vs.binary_search(&c.as_vertex()).is_ok(),
        }
    }

    /// Nearest point of the subset.
    pub fn gate(&self, inst: &ProductInstance, i: usize, c: &Coord) -> Coord {
        match self {
            FactorSubset::Whole => c.clone(),
            FactorSubset::Point(p) => p.clone(),
            FactorSubset::Interval(a, b) => Coord::Int(c.as_int().clamp(*a, *b)),
            FactorSubset::Subtree(s) => Coord::Word(s.project(c.as_word()).unwrap_or_else(|| c.as_word().clone())),
            FactorSubset::Fixed { center, .. } => {
                let geo = c.as_word().geodesic(center);
                let v = geo.into_iter().find(|v| self.contains(&Coord::Word(v.clone()))).unwrap_or(center.clone());
                Coord::Word(v)
            }
            FactorSubset::Pair(a, b) => {
                let w = c.as_word();
                Coord::Word(if w.tree_distance(a) <= w.tree_distance(b) { a.clone() } else { b.clone() })
            }
            FactorSubset::Vertices(vs) => {
                let g = inst.finite(i);
                let hull = g.convex_hull(vs);
                Coord::Vertex(g.gate(&hull, c.as_vertex()))
            }
        }
    }

    pub fn is_whole(&self, inst: &ProductInstance, i: usize) -> bool {
        match self {
            FactorSubset::Whole => true,
            FactorSubset::Subtree(s) => s.is_finite_index(),
            FactorSubset::Fixed { maps, .. } => maps.iter().all(TreeMap::is_identity),
            FactorSubset::Vertices(vs) => vs.len() == inst.finite(i).len(),
            _ => false,
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, FactorSubset::Point(_)) || matches!(self, FactorSubset::Interval(a, b) if a == b)
    }

    pub fn describe(&self, inst: &ProductInstance, i: usize) -> String {
        match self {
            FactorSubset::Whole => "whole".into(),
            FactorSubset::Point(c) => format!("point {}", Point(vec![c.clone()])),
            FactorSubset::Interval(a, b) => format!("interval [{a}, {b}]"),
            FactorSubset::Subtree(s) if s.is_finite_index() => "whole".into(),
            FactorSubset::Subtree(s) => format!(
                "minimal subtree (core graph {} vertices, {} edges, nearest point {})",
                s.core_vertex_count(),
                s.core_edge_count(),
                s.hair_word()
            ),
            FactorSubset::Fixed { maps, center } => {
                if self.is_whole(inst, i) {
                    "whole".into()
                } else {
                    format!("fixed subtree through {center} ({} generators)", maps.len())
                }
            }
            FactorSubset::Pair(a, b) => format!("edge {{{a}, {b}}}"),
            FactorSubset::Vertices(vs) => {
                let s: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                format!("vertices {{{}}}", s.join(","))
            }
        }
    }
}

/// A product of per-factor subsets.
#[derive(Clone, Debug)]
pub struct SubInstance {
    pub parts: Vec<FactorSubset>,
}

impl SubInstance {
    pub fn contains(&self, p: &Point) -> bool {
        self.parts.iter().zip(&p.0).all(|(s, c)| s.contains(c))
    }

    pub fn gate(&self, inst: &ProductInstance, p: &Point) -> Point {
        Point(self.parts.iter().enumerate().map(|(i, s)| s.gate(inst, i, &p.0[i])).collect())
    }

    pub fn is_whole(&self, inst: &ProductInstance) -> bool {
        self.parts.iter().enumerate().all(|(i, s)| s.is_whole(inst, i))
    }

    pub fn describe(&self, inst: &ProductInstance) -> Vec<String> {
        self.parts.iter().enumerate().map(|(i, s)| format!("{i}: {}", s.describe(inst, i))).collect()
    }

    pub fn restrict(&self, w: &Window) -> Vec<Point> {
        w.points.iter().filter(|p| self.contains(p)).cloned().collect()
    }
}

#[derive(Clone, Debug)]
struct LineDyn {
    t: i64,
    t_word: Option<GWord>,
    reflection: Option<(i64, GWord)>,
}

#[derive(Clone, Debug)]
pub(crate) enum TreeCenter {
    Vertex(Word),
    Inverted(Word, Word),
}

#[derive(Clone, Debug)]
struct TreeDyn {
    cosets: Vec<(TreeMap, GWord)>,
    kernel: Option<Arc<Stallings>>,
    kernel_words: Vec<GWord>,
    center: Option<TreeCenter>,
}

#[derive(Clone, Debug)]
struct FiniteDyn {
    classes: Vec<(BarClass, Option<GWord>, usize)>,
    inverters: Vec<Option<GWord>>,
    cbar: Vec<usize>,
}

#[derive(Clone, Debug)]
enum Dyn {
    Line(LineDyn),
    Tree(TreeDyn),
    Finite(FiniteDyn),
}

#[derive(Clone, Debug)]
struct FactorDynamics {
    /// Generators of the factor stabiliser, restricted to the factor.
    gens: Vec<(GWord, FactorMap)>,
    dyn_: Dyn,
}

/// Result of `core_membership`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreMembership {
    pub in_core: bool,
    pub in_reduced_core: bool,
    pub blocking: Option<SymHalfspace>,
}

#[derive(Clone, Debug)]
pub struct EssentialCore {
    pub core: SubInstance,
    /// Factors on which every wall is H1; the rest are collapsed to a point.
    pub essential_factors: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct EssentialCheck {
    pub essential: bool,
    pub walls_checked: usize,
    pub counterexample: Option<HalfspaceClassification>,
}

#[derive(Clone, Debug)]
pub struct InvariantConvex {
    pub kind: &'static str,
    pub subset: SubInstance,
    pub window_points: Vec<Point>,
}

/// `G = ⟨gens⟩` acting on `inst`.
pub struct GroupAction {
    inst: ProductInstance,
    gens: Vec<Automorphism>,
    inverses: Vec<Automorphism>,
    names: Vec<String>,
    dynamics: Vec<OnceLock<Result<Arc<FactorDynamics>>>>,
}

impl fmt::Debug for GroupAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupAction").field("names", &self.names).field("gens", &self.gens).finish()
    }
}

impl Clone for GroupAction {
    fn clone(&self) -> Self {
        GroupAction::new(self.inst.clone(), self.gens.clone(), self.names.clone()).expect("already validated")
    }
}

impl GroupAction {
    pub fn new(inst: ProductInstance, gens: Vec<Automorphism>, names: Vec<String>) -> Result<Self> {
        for g in &gens {
            inst.validate_automorphism(g)?;
        }
        let names = if names.len() == gens.len() {
            names
        } else if names.is_empty() {
            (1..=gens.len()).map(|i| format!("g{i}")).collect()
        } else {
            return Err(invalid(format!("{} names for {} generators", names.len(), gens.len())));
        };
        let inverses = gens.iter().map(Automorphism::inverse).collect();
        let dynamics = (0..inst.len()).map(|_| OnceLock::new()).collect();
        Ok(GroupAction { inst, gens, inverses, names, dynamics })
    }

    pub fn cyclic(inst: &ProductInstance, g: &Automorphism) -> Result<Self> {
        GroupAction::new(inst.clone(), vec![g.clone()], vec!["g".into()])
    }

    pub fn instance(&self) -> &ProductInstance {
        &self.inst
    }

    pub fn generators(&self) -> &[Automorphism] {
        &self.gens
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn show(&self, w: &GWord) -> String {
        w.display_with(&self.names)
    }

    pub fn eval(&self, w: &GWord) -> Automorphism {
        let mut acc = Automorphism::identity(&self.inst);
        for &l in w.letters() {
            let k = l.unsigned_abs() as usize - 1;
            acc = acc.compose(if l > 0 { &self.gens[k] } else { &self.inverses[k] });
        }
        acc
    }

    fn gen_letters(&self) -> Vec<GWord> {
        (1..=self.gens.len()).map(|k| Word::letter(k as i32)).collect()
    }

    /// Distinct group elements given by words of length at most `len`.
    pub fn elements_up_to(&self, len: usize, cap: usize) -> Result<Vec<(GWord, Automorphism)>> {
        let mut seen: HashSet<Automorphism> = HashSet::new();
        let id = Automorphism::identity(&self.inst);
        seen.insert(id.clone());
        let mut out = vec![(Word::identity(), id)];
        let mut frontier = 0;
        for _ in 0..len {
            let end = out.len();
            for k in frontier..end {
                for l in crate::word::letters_of_rank(self.gens.len()) {
                    let idx = l.unsigned_abs() as usize - 1;
                    let g = if l > 0 { &self.gens[idx] } else { &self.inverses[idx] };
                    let h = g.compose(&out[k].1);
                    if seen.insert(h.clone()) {
                        out.push((Word::letter(l).mul(&out[k].0), h));
                        if out.len() > cap {
                            return Err(Error::OracleBudgetExceeded(format!("more than {cap} group elements")));
                        }
                    }
                }
            }
            frontier = end;
        }
        Ok(out)
    }

    fn factor_dynamics(&self, i: usize) -> Result<Arc<FactorDynamics>> {
        self.dynamics[i].get_or_init(|| self.compute_dynamics(i).map(Arc::new)).clone()
    }

    /// Generators of the stabiliser of factor `i`, as words, with their maps on factor `i`.
    pub fn stabilizer(&self, i: usize) -> Result<Vec<(GWord, FactorMap)>> {
        Ok(self.factor_dynamics(i)?.gens.clone())
    }

    /// Factors in the orbit of factor `i`, each with a word carrying `i` onto it.
    pub fn factor_orbit(&self, i: usize) -> Result<Vec<(usize, GWord)>> {
        let letters = self.gen_letters();
        let (orbit, _) = schreier(&letters, i, ORBIT_CAP, |&j, k| self.gens[k].perm[j])?;
        Ok(orbit)
    }

    fn compute_dynamics(&self, i: usize) -> Result<FactorDynamics> {
        let letters = self.gen_letters();
        let (_, stab) = schreier(&letters, i, ORBIT_CAP, |&j, k| self.gens[k].perm[j])?;
        let gens: Vec<(GWord, FactorMap)> = stab.into_iter().map(|w| {
            let m = self.eval(&w).maps[i].clone();
            (w, m)
        }).collect();
        let words: Vec<GWord> = gens.iter().map(|(w, _)| w.clone()).collect();
        let dyn_ = match &self.inst.factors[i] {
            Factor::Line => {
                let eps: Vec<i64> = gens.iter().map(|(_, m)| m.as_line().eps).collect();
                let (_, kernel) = schreier(&words, 1i64, ORBIT_CAP, |&s, k| s * eps[k])?;
                let mut acc: Option<(i64, GWord)> = None;
                for w in kernel {
                    let b = self.eval(&w).maps[i].as_line().shift;
                    acc = Some(match acc {
                        None => (b, w),
                        Some(a) => gcd_words(a, (b, w)),
                    });
                }
                let (t, t_word) = match acc {
                    Some((t, w)) if t != 0 => {
                        if t > 0 {
                            (t, Some(w))
                        } else {
                            (-t, Some(w.inverse()))
                        }
                    }
                    _ => (0, None),
                };
                let reflection = gens.iter().find(|(_, m)| m.as_line().eps < 0).map(|(w, m)| (m.as_line().shift, w.clone()));
                Dyn::Line(LineDyn { t, t_word, reflection })
            }
            Factor::FreeTree { rank } => {
                let substs: Vec<SignedPerm> = gens.iter().map(|(_, m)| m.as_tree().subst.clone()).collect();
                let (cosets, kernel) =
                    schreier(&words, SignedPerm::identity(*rank), ORBIT_CAP, |s, k| substs[k].compose(s))?;
                let cosets: Vec<(TreeMap, GWord)> =
                    cosets.into_iter().map(|(_, w)| (self.eval(&w).maps[i].as_tree().clone(), w)).collect();
                let mut kernel_words = Vec::new();
                let mut lefts = Vec::new();
                for w in kernel {
                    let m = self.eval(&w).maps[i].as_tree().clone();
                    debug_assert!(m.subst.is_identity());
                    if !m.left.is_empty() {
                        lefts.push(m.left);
                        kernel_words.push(w);
                    }
                }
                if lefts.is_empty() {
                    let maps: Vec<TreeMap> = gens.iter().map(|(_, m)| m.as_tree().clone()).collect();
                    let center = tree_center(&maps)?;
                    Dyn::Tree(TreeDyn { cosets, kernel: None, kernel_words, center: Some(center) })
                } else {
                    let s = Stallings::new(*rank, &lefts);
                    Dyn::Tree(TreeDyn { cosets, kernel: Some(Arc::new(s)), kernel_words, center: None })
                }
            }
            Factor::Finite(g) => Dyn::Finite(self.finite_dynamics(i, g, &gens)?),
        };
        Ok(FactorDynamics { gens, dyn_ })
    }

    fn finite_dynamics(&self, i: usize, g: &MedianGraph, gens: &[(GWord, FactorMap)]) -> Result<FiniteDyn> {
        let n = g.halfspace_count();
        let mut classes = Vec::with_capacity(n);
        let mut inverters = vec![None; n / 2];
        for h in 0..n {
            let sh = SymHalfspace::finite(i, h);
            let (bar, w, size, inv) = self.orbit_barred(i, &sh, gens)?;
            if h % 2 == 0 {
                inverters[h / 2] = inv;
            }
            classes.push((bar, w, size));
        }
        let mut cbar: Vec<usize> = (0..g.len()).collect();
        for (h, (bar, _, _)) in classes.iter().enumerate() {
            if *bar == BarClass::HhalfBar {
                cbar.retain(|&v| g.halfspace(h).contains(v));
            }
        }
        Ok(FiniteDyn { classes, inverters, cbar })
    }

    /// Barred class of a finite-orbit halfspace, by enumerating its orbit; also any inverting word.
    fn orbit_barred(
        &self,
        i: usize,
        h: &SymHalfspace,
        gens: &[(GWord, FactorMap)],
    ) -> Result<(BarClass, Option<GWord>, usize, Option<GWord>)> {
        let mut seen: HashMap<HalfspaceDesc, GWord> = HashMap::new();
        seen.insert(h.desc.clone(), Word::identity());
        let mut queue = VecDeque::from([h.desc.clone()]);
        let mut facing = None;
        let mut cofacing = None;
        let mut inverter = None;
        while let Some(d) = queue.pop_front() {
            let w = seen[&d].clone();
            let k = SymHalfspace { factor: i, desc: d.clone() };
            match h.relative_position(&self.inst, &k) {
                RelPos::Facing if facing.is_none() => facing = Some(w.clone()),
                RelPos::CoFacing if cofacing.is_none() => cofacing = Some(w.clone()),
                RelPos::Complement if inverter.is_none() => inverter = Some(w.clone()),
                _ => {}
            }
            for (gw, m) in gens {
                let e = self.inst.map_desc(i, i, m, &d)?;
                if !seen.contains_key(&e) {
                    if seen.len() >= ORBIT_CAP {
                        return Err(Error::UndecidedAtBound { bound: ORBIT_CAP, what: format!("orbit of {h}") });
                    }
                    seen.insert(e.clone(), gw.mul(&w));
                    queue.push_back(e);
                }
            }
        }
        let size = seen.len();
        Ok(match (facing, cofacing) {
            (Some(w), _) => (BarClass::HhalfBar, Some(w), size, inverter),
            (None, Some(w)) => (BarClass::HhalfBarStar, Some(w), size, inverter),
            (None, None) => (BarClass::H0Bar, None, size, inverter),
        })
    }

    fn spell(&self, td: &TreeDyn, labels: &Word) -> GWord {
        labels.letters().iter().fold(Word::identity(), |acc, &l| {
            let w = &td.kernel_words[l.unsigned_abs() as usize - 1];
            acc.mul(&if l > 0 { w.clone() } else { w.inverse() })
        })
    }

    pub fn classify_halfspace(&self, h: &SymHalfspace) -> Result<HalfspaceClassification> {
        let i = h.factor;
        if i >= self.inst.len() {
            return Err(invalid(format!("no factor {i}")));
        }
        let fd = self.factor_dynamics(i)?;
        let exact = |class, barred, witness: Option<GWord>, orbit| HalfspaceClassification {
            halfspace: h.clone(),
            class,
            barred,
            barred_witness: if class == HClass::H0 { None } else { witness.clone() },
            witness,
            orbit,
            confidence: Confidence::Exact,
        };
        let finite_orbit = |fd: &FactorDynamics| -> Result<HalfspaceClassification> {
            let (bar, w, size, _) = self.orbit_barred(i, h, &fd.gens)?;
            let mut c = exact(HClass::H0, bar, None, Some(size));
            c.barred_witness = w;
            Ok(c)
        };
        match (&fd.dyn_, &h.desc) {
            (Dyn::Line(ld), HalfspaceDesc::Line(lh)) => {
                if ld.t != 0 {
                    let w = ld.t_word.clone().expect("translation word");
                    let w = if matches!(lh, LineHalf::Ge(_)) { w } else { w.inverse() };
                    Ok(exact(HClass::H1, BarClass::H1, Some(w), None))
                } else {
                    finite_orbit(&fd)
                }
            }
            (Dyn::Tree(td), HalfspaceDesc::Tree(th)) => match &td.kernel {
                Some(s) => {
                    let (v, cone) = match th {
                        TreeHalf::Cone(v) => (v, true),
                        TreeHalf::CoCone(v) => (v, false),
                    };
                    let p = v.parent().ok_or_else(|| invalid("cone of the identity"))?;
                    let x = v.last().expect("nonempty");
                    if s.contains_edge(&p, x) {
                        let w = s.axis_through(&p, x).map(|(_, lab)| self.spell(td, &lab));
                        let w = if cone { w } else { w.map(|w| w.inverse()) };
                        Ok(exact(HClass::H1, BarClass::H1, w, None))
                    } else {
                        let core_side_is_cone = v.is_prefix_of(&s.hair_word());
                        let w = td.kernel_words.first().cloned();
                        if core_side_is_cone == cone {
                            Ok(exact(HClass::Hhalf, BarClass::HhalfBar, w, None))
                        } else {
                            Ok(exact(HClass::HhalfStar, BarClass::HhalfBarStar, w, None))
                        }
                    }
                }
                None => finite_orbit(&fd),
            },
            (Dyn::Finite(fdyn), HalfspaceDesc::Finite(x)) => {
                let (bar, w, size) = fdyn.classes.get(*x).cloned().ok_or_else(|| invalid(format!("no halfspace {h}")))?;
                let mut c = exact(HClass::H0, bar, None, Some(size));
                c.barred_witness = w;
                Ok(c)
            }
            _ => Err(Error::KindMismatch(format!("halfspace {h} does not fit factor {i}"))),
        }
    }

    /// A group word inverting the wall of `h`, if one exists.
    pub fn inverter(&self, h: &SymHalfspace) -> Result<Option<GWord>> {
        let i = h.factor;
        let fd = self.factor_dynamics(i)?;
        let h = h.wall();
        Ok(match (&fd.dyn_, &h.desc) {
            (Dyn::Line(ld), HalfspaceDesc::Line(LineHalf::Ge(k))) => {
                let Some((c0, rw)) = &ld.reflection else { return Ok(None) };
                let diff = c0 - (2 * k - 1);
                if ld.t == 0 {
                    (diff == 0).then(|| rw.clone())
                } else if diff % ld.t == 0 {
                    Some(rw.mul(&ld.t_word.as_ref().expect("translation word").pow(diff / ld.t)))
                } else {
                    None
                }
            }
            (Dyn::Tree(td), HalfspaceDesc::Tree(TreeHalf::Cone(v))) => {
                let p = v.parent().expect("nonempty");
                let mut found = None;
                for (tm, tw) in &td.cosets {
                    let u = v.mul(&tm.apply(&p).inverse());
                    if u.mul(&tm.apply(v)) != p {
                        continue;
                    }
                    if u.is_empty() {
                        found = Some(tw.clone());
                        break;
                    }
                    if let Some(s) = &td.kernel {
                        if let Some(lab) = s.member(&u) {
                            found = Some(self.spell(td, &lab).mul(tw));
                            break;
                        }
                    }
                }
                found
            }
            (Dyn::Finite(fdyn), HalfspaceDesc::Finite(x)) => fdyn.inverters[x / 2].clone(),
            _ => return Err(Error::KindMismatch(format!("halfspace {h} does not fit factor {i}"))),
        })
    }

    /// Walls meeting the window that some group element inverts, with such an element.
    pub fn check_wall_inversions(&self, w: &Window) -> Result<Vec<(SymHalfspace, GWord)>> {
        let mut out = Vec::new();
        for h in w.walls_meeting(&self.inst) {
            if let Some(g) = self.inverter(&h)? {
                out.push((h, g));
            }
        }
        Ok(out)
    }

    fn factor_core(&self, i: usize, reduced: bool) -> Result<FactorSubset> {
        let fd = self.factor_dynamics(i)?;
        Ok(match &fd.dyn_ {
            Dyn::Line(ld) => match (&ld.reflection, ld.t, reduced) {
                (Some((c, _)), 0, true) => {
                    if c.rem_euclid(2) == 0 {
                        FactorSubset::Point(Coord::Int(c / 2))
                    } else {
                        FactorSubset::Interval((c - 1) / 2, (c + 1) / 2)
                    }
                }
                _ => FactorSubset::Whole,
            },
            Dyn::Tree(td) => match (&td.kernel, &td.center, reduced) {
                (Some(s), _, _) => FactorSubset::Subtree(s.clone()),
                (None, _, false) => FactorSubset::Whole,
                (None, Some(TreeCenter::Vertex(c)), true) => FactorSubset::Fixed {
                    maps: fd.gens.iter().map(|(_, m)| m.as_tree().clone()).collect(),
                    center: c.clone(),
                },
                (None, Some(TreeCenter::Inverted(a, b)), true) => FactorSubset::Pair(a.clone(), b.clone()),
                (None, None, true) => unreachable!("finite tree actions have a center"),
            },
            Dyn::Finite(fdyn) => {
                if reduced {
                    FactorSubset::Vertices(fdyn.cbar.clone())
                } else {
                    FactorSubset::Whole
                }
            }
        })
    }

    /// `C(G)`, the intersection of the H½ halfspaces.
    pub fn core(&self) -> Result<SubInstance> {
        Ok(SubInstance { parts: (0..self.inst.len()).map(|i| self.factor_core(i, false)).collect::<Result<_>>()? })
    }

    /// `C̄(G)`, the intersection of the barred H½ halfspaces.
    pub fn reduced_core(&self) -> Result<SubInstance> {
        Ok(SubInstance { parts: (0..self.inst.len()).map(|i| self.factor_core(i, true)).collect::<Result<_>>()? })
    }

    fn blocking(&self, sub: &SubInstance, p: &Point, reduced: bool) -> Result<Option<SymHalfspace>> {
        for (i, s) in sub.parts.iter().enumerate() {
            let c = &p.0[i];
            if s.contains(c) {
                continue;
            }
            if let (FactorSubset::Vertices(_), Dyn::Finite(fdyn)) = (s, &self.factor_dynamics(i)?.dyn_) {
                let g = self.inst.finite(i);
                let wanted = if reduced { BarClass::HhalfBar } else { BarClass::H1 };
                for (h, (bar, _, _)) in fdyn.classes.iter().enumerate() {
                    if *bar == wanted && !g.halfspace(h).contains(c.as_vertex()) {
                        return Ok(Some(SymHalfspace::finite(i, h)));
                    }
                }
                continue;
            }
            let gate = s.gate(&self.inst, i, c);
            return Ok(self.inst.coord_separating(i, c, &gate).pop());
        }
        Ok(None)
    }

    pub fn core_membership(&self, p: &Point) -> Result<CoreMembership> {
        self.inst.validate_point(p)?;
        let c = self.core()?;
        let cb = self.reduced_core()?;
        let in_core = c.contains(p);
        let in_reduced_core = cb.contains(p);
        let blocking = if !in_core {
            self.blocking(&c, p, false)?
        } else if !in_reduced_core {
            self.blocking(&cb, p, true)?
        } else {
            None
        };
        Ok(CoreMembership { in_core, in_reduced_core, blocking })
    }

    /// Window points in `C(G)` and in `C̄(G)`.
    pub fn core_window(&self, w: &Window) -> Result<(Vec<Point>, Vec<Point>)> {
        Ok((self.core()?.restrict(w), self.reduced_core()?.restrict(w)))
    }

    pub fn is_essential(&self, w: &Window) -> Result<EssentialCheck> {
        let walls = w.walls_meeting(&self.inst);
        for h in &walls {
            let c = self.classify_halfspace(h)?;
            if !c.h1() {
                return Ok(EssentialCheck { essential: false, walls_checked: walls.len(), counterexample: Some(c) });
            }
        }
        Ok(EssentialCheck { essential: true, walls_checked: walls.len(), counterexample: None })
    }

    /// Some wall of factor `i` inverted by a group element, with that element.
    pub fn factor_inversion(&self, i: usize) -> Result<Option<(SymHalfspace, GWord)>> {
        let fd = self.factor_dynamics(i)?;
        let wall = match &fd.dyn_ {
            Dyn::Line(ld) => match &ld.reflection {
                Some((c, _)) if c.rem_euclid(2) == 1 => Some(SymHalfspace::line(i, LineHalf::Ge((c + 1) / 2))),
                Some((c, _)) if ld.t % 2 == 1 => Some(SymHalfspace::line(i, LineHalf::Ge((c + ld.t + 1) / 2))),
                _ => None,
            },
            Dyn::Tree(td) => match (&td.kernel, &td.center) {
                (None, Some(TreeCenter::Inverted(a, b))) => {
                    let far = if a.len() > b.len() { a } else { b };
                    Some(SymHalfspace::tree(i, TreeHalf::Cone(far.clone())))
                }
                (None, _) => None,
                (Some(_), _) if td.cosets.len() == 1 || fd.gens.len() == 1 => None,
                (Some(_), _) => {
                    let rank = self.inst.tree_rank(i);
                    let sub = ProductInstance::new(vec![Factor::FreeTree { rank }]);
                    let w = Window::new(&sub, &sub.origin(), 6)?;
                    for h in w.walls_meeting(&sub) {
                        let h = SymHalfspace { factor: i, desc: h.desc };
                        if let Some(g) = self.inverter(&h)? {
                            return Ok(Some((h, g)));
                        }
                    }
                    return Err(Error::UndecidedAtBound { bound: 6, what: format!("inversions on tree factor {i}") });
                }
            },
            Dyn::Finite(fdyn) => fdyn.inverters.iter().position(Option::is_some).map(|w| SymHalfspace::finite(i, 2 * w)),
        };
        match wall {
            Some(h) => {
                let g = self.inverter(&h)?.ok_or_else(|| invalid(format!("no inverter found for {h}")))?;
                Ok(Some((h, g)))
            }
            None => Ok(None),
        }
    }

    /// No element of the group inverts any wall.
    pub fn inversion(&self) -> Result<Option<(SymHalfspace, GWord)>> {
        for i in 0..self.inst.len() {
            if let Some(x) = self.factor_inversion(i)? {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }

    /// Every wall of factor `i` is H1.
    pub fn factor_is_essential(&self, i: usize) -> Result<bool> {
        Ok(match &self.factor_dynamics(i)?.dyn_ {
            Dyn::Line(ld) => ld.t != 0,
            Dyn::Tree(td) => td.kernel.is_some(),
            Dyn::Finite(_) => false,
        })
    }

    /// A point of factor `i` fixed by its stabiliser, nearest to `near`.
    fn factor_fixed_point(&self, i: usize, near: &Coord) -> Result<Coord> {
        let fd = self.factor_dynamics(i)?;
        match &fd.dyn_ {
            Dyn::Line(ld) => match &ld.reflection {
                None => Ok(near.clone()),
                Some((c, w)) if c.rem_euclid(2) == 0 => {
                    let _ = w;
                    Ok(Coord::Int(c / 2))
                }
                Some((c, w)) => Err(Error::InversionPresent(format!(
                    "{} inverts the wall {}",
                    self.show(w),
                    SymHalfspace::line(i, LineHalf::Ge((c + 1) / 2))
                ))),
            },
            Dyn::Tree(td) => match &td.center {
                Some(TreeCenter::Vertex(_)) => Ok(self.factor_core(i, true)?.gate(&self.inst, i, near)),
                Some(TreeCenter::Inverted(a, b)) => Err(Error::InversionPresent(format!(
                    "the tree edge {{{a}, {b}}} of factor {i} is inverted"
                ))),
                None => Err(Error::PreconditionFailed(format!("factor {i} has an infinite orbit"))),
            },
            Dyn::Finite(_) => {
                let g = self.inst.finite(i);
                let near = near.as_vertex();
                let fixed = (0..g.len())
                    .filter(|&v| fd.gens.iter().all(|(_, m)| m.as_finite().perm[v] == v))
                    .min_by_key(|&v| (g.dist(near, v), v));
                fixed.map(Coord::Vertex).ok_or_else(|| {
                    Error::InversionPresent(format!("the action on factor {i} fixes no vertex"))
                })
            }
        }
    }

    /// A G-invariant convex sub-instance on which every wall is H1.
    pub fn essential_core(&self, base: &Point) -> Result<EssentialCore> {
        self.inst.validate_point(base)?;
        let n = self.inst.len();
        let mut parts: Vec<Option<FactorSubset>> = vec![None; n];
        let mut essential_factors = Vec::new();
        for i in 0..n {
            if parts[i].is_some() {
                continue;
            }
            if self.factor_is_essential(i)? {
                parts[i] = Some(self.factor_core(i, false)?);
                essential_factors.push(i);
                continue;
            }
            let x = self.factor_fixed_point(i, &base.0[i])?;
            for (j, w) in self.factor_orbit(i)? {
                let g = self.eval(&w);
                parts[j] = Some(FactorSubset::Point(g.maps[i].apply(&x)));
            }
        }
        essential_factors.sort_unstable();
        Ok(EssentialCore { core: SubInstance { parts: parts.into_iter().map(|p| p.expect("filled")).collect() }, essential_factors })
    }

    /// A proper G-invariant convex subset seen through the window, if one is found.
    pub fn find_invariant_convex(&self, w: &Window) -> Result<Option<InvariantConvex>> {
        let mut candidates: Vec<(&'static str, SubInstance)> = Vec::new();
        if let Ok(e) = self.essential_core(&w.basepoint) {
            candidates.push(("essential-core", e.core));
        }
        candidates.push(("core", self.core()?));
        candidates.push(("reduced-core", self.reduced_core()?));
        for (kind, sub) in candidates {
            if sub.is_whole(&self.inst) {
                continue;
            }
            let pts = sub.restrict(w);
            if !pts.is_empty() {
                return Ok(Some(InvariantConvex { kind, subset: sub, window_points: pts }));
            }
        }
        Ok(None)
    }
}

fn gcd_words(a: (i64, GWord), b: (i64, GWord)) -> (i64, GWord) {
    let (mut a, mut b) = (a, b);
    while b.0 != 0 {
        let q = a.0.div_euclid(b.0);
        let r = (a.0 - q * b.0, a.1.mul(&b.1.pow(-q)));
        a = b;
        b = r;
    }
    a
}

/// Center of a finite tree action: orbit of the identity, then the midpoint of a diameter.
pub(crate) fn tree_center(maps: &[TreeMap]) -> Result<TreeCenter> {
    let mut seen: HashSet<Word> = HashSet::new();
    let mut queue = VecDeque::from([Word::identity()]);
    seen.insert(Word::identity());
    let mut orbit = Vec::new();
    while let Some(v) = queue.pop_front() {
        for m in maps {
            let w = m.apply(&v);
            if seen.insert(w.clone()) {
                if seen.len() > ORBIT_CAP {
                    return Err(Error::UndecidedAtBound { bound: ORBIT_CAP, what: "tree orbit".into() });
                }
                queue.push_back(w);
            }
        }
        orbit.push(v);
    }
    let far = |x: &Word| orbit.iter().max_by_key(|y| (x.tree_distance(y), (*y).clone())).expect("nonempty").clone();
    let x1 = far(&orbit[0]);
    let x2 = far(&x1);
    let geo = x1.geodesic(&x2);
    let d = geo.len() - 1;
    if d % 2 == 0 {
        return Ok(TreeCenter::Vertex(geo[d / 2].clone()));
    }
    let (a, b) = (geo[d / 2].clone(), geo[d / 2 + 1].clone());
    if maps.iter().all(|m| m.apply(&a) == a) {
        Ok(TreeCenter::Vertex(a))
    } else {
        Ok(TreeCenter::Inverted(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::LineMap;
    use crate::generate::grid;

    fn line_action(maps: &[LineMap]) -> GroupAction {
        let inst = ProductInstance::new(vec![Factor::Line]);
        let gens = maps.iter().map(|m| Automorphism::diagonal(vec![FactorMap::Line(*m)])).collect();
        GroupAction::new(inst, gens, vec![]).unwrap()
    }

    fn tree_action(words: &[&str]) -> GroupAction {
        let inst = ProductInstance::new(vec![Factor::FreeTree { rank: 2 }]);
        let gens = words
            .iter()
            .map(|w| Automorphism::diagonal(vec![FactorMap::Tree(TreeMap::left_mult(Word::parse(w, 2).unwrap(), 2))]))
            .collect();
        GroupAction::new(inst, gens, vec![]).unwrap()
    }

    fn check_witness(a: &GroupAction, c: &HalfspaceClassification) {
        let inst = a.instance();
        let h = &c.halfspace;
        if let Some(w) = &c.witness {
            let gh = inst.apply_h(&a.eval(w), h);
            let rp = gh.relative_position(inst, h);
            match c.class {
                HClass::H1 => assert_eq!(rp, RelPos::NestedIn, "{h} {gh}"),
                HClass::Hhalf => assert_eq!(rp, RelPos::Facing, "{h} {gh}"),
                HClass::HhalfStar => assert_eq!(rp, RelPos::CoFacing, "{h} {gh}"),
                HClass::H0 => {}
            }
        }
        if let Some(w) = &c.barred_witness {
            let gh = inst.apply_h(&a.eval(w), h);
            let rp = gh.relative_position(inst, h);
            match c.barred {
                BarClass::HhalfBar => assert_eq!(rp, RelPos::Facing),
                BarClass::HhalfBarStar => assert_eq!(rp, RelPos::CoFacing),
                _ => {}
            }
        }
    }

    #[test]
    fn schreier_for_factor_swap() {
        let letters = vec![Word::letter(1)];
        let (orbit, stab) = schreier(&letters, 0usize, 10, |&j, _| 1 - j).unwrap();
        assert_eq!(orbit.len(), 2);
        assert_eq!(stab, vec![Word::new([1, 1])]);
    }

    #[test]
    fn line_translation_is_h1() {
        let a = line_action(&[LineMap::translation(1)]);
        let h = SymHalfspace::line(0, LineHalf::Ge(0));
        let c = a.classify_halfspace(&h).unwrap();
        assert!(c.h1());
        assert_eq!(a.show(c.witness.as_ref().unwrap()), "g1");
        check_witness(&a, &c);
        let c = a.classify_halfspace(&h.star()).unwrap();
        assert!(c.h1());
        check_witness(&a, &c);
    }

    #[test]
    fn line_reflection_classes() {
        let a = line_action(&[LineMap::reflection(0)]);
        let c = a.classify_halfspace(&SymHalfspace::line(0, LineHalf::Ge(1))).unwrap();
        assert_eq!((c.class, c.barred, c.orbit), (HClass::H0, BarClass::HhalfBarStar, Some(2)));
        let c = a.classify_halfspace(&SymHalfspace::line(0, LineHalf::Le(0))).unwrap();
        assert_eq!(c.barred, BarClass::HhalfBar);

        let a = line_action(&[LineMap::reflection(1)]);
        let w = Window::new(a.instance(), &a.instance().origin(), 6).unwrap();
        let (c, cb) = a.core_window(&w).unwrap();
        assert_eq!(c.len(), 13);
        let xs: Vec<i64> = cb.iter().map(|p| p.0[0].as_int()).collect();
        assert_eq!(xs, vec![0, 1]);
        let inv = a.check_wall_inversions(&w).unwrap();
        assert_eq!(inv.len(), 1);
        assert_eq!(inv[0].0.to_string(), "0:x>=1");
        for h in w.walls_meeting(a.instance()) {
            for s in [h.clone(), h.star()] {
                let c = a.classify_halfspace(&s).unwrap();
                check_witness(&a, &c);
                let k = match s.desc {
                    HalfspaceDesc::Line(LineHalf::Ge(k)) => Some(k),
                    _ => None,
                };
                if let Some(k) = k {
                    let expect = if k <= 0 {
                        BarClass::HhalfBar
                    } else if k == 1 {
                        BarClass::H0Bar
                    } else {
                        BarClass::HhalfBarStar
                    };
                    assert_eq!(c.barred, expect, "{s}");
                }
            }
        }
    }

    #[test]
    fn reflections_generate_translations() {
        let a = line_action(&[LineMap::reflection(0), LineMap::reflection(3)]);
        let c = a.classify_halfspace(&SymHalfspace::line(0, LineHalf::Ge(5))).unwrap();
        assert!(c.h1());
        check_witness(&a, &c);
        // reflections x ↦ 3k - x; the wall 2|1 needs c = 3 (odd)
        assert!(a.inverter(&SymHalfspace::line(0, LineHalf::Ge(2))).unwrap().is_some());
        assert!(a.inverter(&SymHalfspace::line(0, LineHalf::Ge(3))).unwrap().is_none());
        let g = a.inverter(&SymHalfspace::line(0, LineHalf::Ge(5))).unwrap().unwrap();
        let h = SymHalfspace::line(0, LineHalf::Ge(5));
        assert_eq!(a.instance().apply_h(&a.eval(&g), &h), h.star());
    }

    #[test]
    fn tree_axis_of_a() {
        let a = tree_action(&["a"]);
        let inst = a.instance().clone();
        let w = Window::new(&inst, &inst.origin(), 3).unwrap();
        for h in w.walls_meeting(&inst) {
            for s in [h.clone(), h.star()] {
                let c = a.classify_halfspace(&s).unwrap();
                check_witness(&a, &c);
                let on_axis = match &h.desc {
                    HalfspaceDesc::Tree(TreeHalf::Cone(v)) => v.letters().iter().all(|&l| l.abs() == 1),
                    _ => unreachable!(),
                };
                assert_eq!(c.h1(), on_axis, "{s}");
            }
        }
        let b = SymHalfspace::parse("0:~cone(b)", &inst).unwrap();
        assert!(a.classify_halfspace(&b).unwrap().hhalf());
        let (core, _) = a.core_window(&w).unwrap();
        assert_eq!(core.len(), 7);
        assert!(!a.is_essential(&w).unwrap().essential);
        let ic = a.find_invariant_convex(&w).unwrap().unwrap();
        assert_eq!(ic.window_points.len(), 7);
    }

    #[test]
    fn tree_squares_witnesses() {
        let a = tree_action(&["aa", "bb"]);
        let inst = a.instance().clone();
        let w = Window::new(&inst, &inst.origin(), 4).unwrap();
        for h in w.walls_meeting(&inst) {
            for s in [h.clone(), h.star()] {
                let c = a.classify_halfspace(&s).unwrap();
                assert!(c.witness.is_some());
                check_witness(&a, &c);
            }
        }
        let m = a.core_membership(&Point(vec![Coord::Word(Word::parse("ab", 2).unwrap())])).unwrap();
        assert!(!m.in_core);
        let blk = m.blocking.unwrap();
        assert_eq!(blk.to_string(), "0:~cone(ab)");
        assert!(a.classify_halfspace(&blk).unwrap().hhalf());
    }

    #[test]
    fn substitution_inversion_detected() {
        // g0: v ↦ a·π(v) with π(a) = A swaps e and a
        let inst = ProductInstance::new(vec![Factor::FreeTree { rank: 2 }]);
        let g0 = TreeMap { left: Word::parse("a", 2).unwrap(), subst: SignedPerm::parse("a->A,b->b", 2).unwrap() };
        let a = GroupAction::new(inst.clone(), vec![Automorphism::diagonal(vec![FactorMap::Tree(g0)])], vec![]).unwrap();
        let h = SymHalfspace::parse("0:cone(a)", &inst).unwrap();
        let w = a.inverter(&h).unwrap().unwrap();
        assert_eq!(inst.apply_h(&a.eval(&w), &h), h.star());
        let cb = a.reduced_core().unwrap();
        assert!(matches!(cb.parts[0], FactorSubset::Pair(_, _)));
        assert!(matches!(a.essential_core(&inst.origin()), Err(Error::InversionPresent(_))));
    }

    #[test]
    fn factor_swap_stabiliser() {
        let inst = ProductInstance::new(vec![Factor::Line, Factor::Line]);
        let g = Automorphism { perm: vec![1, 0], maps: vec![FactorMap::Line(LineMap::translation(1)), FactorMap::Line(LineMap::translation(0))] };
        let a = GroupAction::new(inst.clone(), vec![g], vec![]).unwrap();
        let c = a.classify_halfspace(&SymHalfspace::line(0, LineHalf::Ge(3))).unwrap();
        assert!(c.h1());
        check_witness(&a, &c);
        assert_eq!(a.show(c.witness.as_ref().unwrap()), "g1 g1");
    }

    #[test]
    fn finite_factor_degenerates() {
        let inst = ProductInstance::new(vec![Factor::Finite(Arc::new(grid(2, 2)))]);
        let swap = FactorMap::Finite(crate::automorphism::FiniteMap { perm: vec![0, 2, 1, 3] });
        let a = GroupAction::new(inst.clone(), vec![Automorphism::diagonal(vec![swap])], vec![]).unwrap();
        for h in 0..4 {
            let c = a.classify_halfspace(&SymHalfspace::finite(0, h)).unwrap();
            assert!(c.h0());
            assert_eq!(c.barred, BarClass::H0Bar);
        }
        let e = a.essential_core(&inst.origin()).unwrap();
        assert!(e.core.parts[0].is_point());
    }

    #[test]
    fn essential_core_of_horizontal_translation() {
        let inst = ProductInstance::new(vec![Factor::Line, Factor::Line]);
        let g = Automorphism::diagonal(vec![FactorMap::Line(LineMap::translation(1)), FactorMap::Line(LineMap::translation(0))]);
        let a = GroupAction::new(inst.clone(), vec![g], vec![]).unwrap();
        let base = Point(vec![Coord::Int(0), Coord::Int(4)]);
        let e = a.essential_core(&base).unwrap();
        assert_eq!(e.essential_factors, vec![0]);
        assert!(e.core.contains(&Point(vec![Coord::Int(-7), Coord::Int(4)])));
        assert!(!e.core.contains(&Point(vec![Coord::Int(0), Coord::Int(3)])));
    }
}

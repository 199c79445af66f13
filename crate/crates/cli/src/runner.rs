//! Request dispatch. Each request yields one JSON record.

use std::time::Instant;

use mediankit::action::Confidence;
use mediankit::finite_action::{fixed_point_or_cube, FixedOrCube};
use mediankit::minset::{
    endpoints, is_non_transverse, is_semisimple, minset, minset_membership, reduced_core_gate, stable_inversion,
    transverse_witness, translation_length, Membership, MinSet, MinWitness, Semisimplicity,
};
use mediankit::oracle::{finite_graph_oracle, minset_oracle, stallings_oracle, window_core_oracle, OracleOutcome};
use mediankit::window::{induced_median_graph, WindowKind};
use mediankit::{Automorphism, Error, Factor, GroupAction, HalfspaceClassification, Point, SymHalfspace, WallWeighting, Window};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::schema::{parse_element, parse_point, Loaded, Request};

pub const OPS: &[&str] = &[
    "validate",
    "walls",
    "rank",
    "decompose",
    "quotient",
    "classify",
    "core",
    "essential-core",
    "fixed-point",
    "minset",
    "translation-length",
    "non-transverse",
    "endpoints",
    "oracle-compare",
    "semisimple",
    "gate",
];

pub const ORACLES: &[&str] = &["finite-graph", "window-core", "stallings", "minset"];

pub const DEFAULT_WINDOW: usize = 6;

/// Global settings from the command line; they take precedence over per-request values.
#[derive(Clone, Copy, Debug, Default)]
pub struct Settings {
    pub window: Option<usize>,
    pub bound: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    Undecided,
    Mismatch,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Undecided => "undecided",
            Status::Mismatch => "mismatch",
            Status::Error => "error",
        }
    }
}

pub struct Outcome {
    pub index: usize,
    pub op: String,
    pub status: Status,
    pub record: Value,
    pub millis: f64,
}

pub fn check_requests(reqs: &[Request]) -> Result<(), CliError> {
    for (k, r) in reqs.iter().enumerate() {
        if !OPS.contains(&r.op.as_str()) {
            return Err(CliError::UnknownRequest(format!("request {k}: {:?}", r.op)));
        }
        if r.op == "oracle-compare" {
            match &r.oracle {
                Some(o) if ORACLES.contains(&o.as_str()) => {}
                Some(o) => return Err(CliError::UnknownRequest(format!("request {k}: oracle {o:?}"))),
                None => return Err(CliError::Schema(format!("request {k}: oracle-compare needs `oracle`"))),
            }
        }
    }
    Ok(())
}

pub fn run_all(l: &Loaded, s: Settings) -> Result<Vec<Outcome>, CliError> {
    check_requests(&l.requests)?;
    Ok(l.requests.iter().enumerate().map(|(k, r)| run_one(l, s, k, r)).collect())
}

pub fn run_one(l: &Loaded, s: Settings, index: usize, r: &Request) -> Outcome {
    let start = Instant::now();
    let ctx = Ctx { l, s, r };
    let (status, record) = match ctx.dispatch() {
        Ok((status, v)) => (status, v),
        Err(CliError::Lib(Error::UndecidedAtBound { bound, what })) => {
            (Status::Undecided, json!({ "undecided": what, "bound": bound }))
        }
        Err(e) => (Status::Error, json!({ "error": e.to_string() })),
    };
    Outcome { index, op: r.op.clone(), status, record, millis: start.elapsed().as_secs_f64() * 1e3 }
}

struct Ctx<'a> {
    l: &'a Loaded,
    s: Settings,
    r: &'a Request,
}

type Rec = Result<(Status, Value), CliError>;

fn ok(v: Value) -> Rec {
    Ok((Status::Ok, v))
}

fn confidence(c: Confidence) -> Value {
    match c {
        Confidence::Exact => json!("exact"),
        Confidence::Bounded { bound } => json!({ "bounded": bound }),
    }
}

fn strings<T: ToString>(xs: impl IntoIterator<Item = T>) -> Vec<String> {
    xs.into_iter().map(|x| x.to_string()).collect()
}

fn witness(w: &MinWitness) -> Value {
    json!({ "point": w.point.to_string(), "checked_range": w.checked_range, "certified": w.certified })
}

fn oracle_record(o: &OracleOutcome) -> (Status, Value) {
    let status = if o.is_match() { Status::Ok } else { Status::Mismatch };
    let v = json!({
        "oracle": o.oracle,
        "verdict": if o.is_match() { "MATCH" } else { "MISMATCH" },
        "checked": o.checked,
        "mismatch": o.mismatch.as_ref().map(|m| json!({ "item": m.item, "expected": m.expected, "found": m.found })),
        "notes": o.notes,
    });
    (status, v)
}

impl<'a> Ctx<'a> {
    fn inst(&self) -> &'a mediankit::ProductInstance {
        &self.l.instance
    }

    fn need(&self, what: &str) -> CliError {
        CliError::Schema(format!("{} needs `{what}`", self.r.op))
    }

    fn action(&self) -> Result<&'a GroupAction, CliError> {
        let name = self.r.action.as_ref().ok_or_else(|| self.need("action"))?;
        Ok(&self.l.actions[name])
    }

    /// The requested element, defaulting to the sole generator.
    fn element(&self) -> Result<(String, Automorphism), CliError> {
        let a = self.action()?;
        match &self.r.element {
            Some(e) => Ok((e.clone(), parse_element(a, e)?.1)),
            None if a.generators().len() == 1 => Ok((a.names()[0].clone(), a.generators()[0].clone())),
            None => Err(self.need("element")),
        }
    }

    fn weighting(&self) -> WallWeighting {
        self.r.weighting.as_ref().map(|w| self.l.weightings[w].clone()).unwrap_or_default()
    }

    fn point(&self) -> Result<Point, CliError> {
        match &self.r.point {
            Some(p) => {
                let p = parse_point(self.inst(), p)?;
                self.inst().validate_point(&p)?;
                Ok(p)
            }
            None => Ok(self.inst().origin()),
        }
    }

    fn radius(&self) -> usize {
        self.s.window.or(self.r.window).unwrap_or(DEFAULT_WINDOW)
    }

    fn bound(&self) -> Result<usize, CliError> {
        match self.s.bound.or(self.r.bound) {
            Some(b) => Ok(b),
            None => Ok(2 * self.inst().rank()?.max(1)),
        }
    }

    fn window(&self, base: &Point) -> Result<Window, CliError> {
        Ok(Window::new(self.inst(), base, self.radius())?)
    }

    fn finite_factor(&self) -> Result<(usize, &'a mediankit::MedianGraph), CliError> {
        let i = self.r.factor.ok_or_else(|| self.need("factor"))?;
        match self.inst().factors.get(i) {
            Some(Factor::Finite(g)) => Ok((i, g)),
            _ => Err(CliError::Schema(format!("factor {i} is not a finite factor"))),
        }
    }

    fn dispatch(&self) -> Rec {
        match self.r.op.as_str() {
            "validate" => self.validate(),
            "walls" => self.walls(),
            "rank" => self.rank(),
            "decompose" => self.decompose(),
            "quotient" => self.quotient(),
            "classify" => self.classify(),
            "core" => self.core(),
            "essential-core" => self.essential_core(),
            "fixed-point" => self.fixed_point(),
            "minset" => self.minset(),
            "translation-length" => self.translation_length(),
            "non-transverse" => self.non_transverse(),
            "endpoints" => self.endpoints(),
            "oracle-compare" => self.oracle(),
            "semisimple" => self.semisimple(),
            "gate" => self.gate(),
            op => Err(CliError::UnknownRequest(op.into())),
        }
    }

    fn validate(&self) -> Rec {
        let inst = self.inst();
        let actions: serde_json::Map<String, Value> = self
            .l
            .actions
            .iter()
            .map(|(n, a)| (n.clone(), json!({ "generators": a.names() })))
            .collect();
        ok(json!({
            "factors": inst.factors.iter().map(Factor::kind_name).collect::<Vec<_>>(),
            "rank": inst.rank()?,
            "actions": actions,
            "weightings": self.l.weightings.keys().collect::<Vec<_>>(),
        }))
    }

    fn walls(&self) -> Rec {
        if self.r.factor.is_some() {
            let (i, g) = self.finite_factor()?;
            let walls: Vec<Value> = (0..g.walls().len())
                .map(|w| {
                    let side = |h: usize| g.halfspace(h).ones().map(|v| g.label(v).to_string()).collect::<Vec<_>>();
                    json!({ "wall": w, "h": format!("{i}:h{}", 2 * w), "side": side(2 * w), "other": side(2 * w + 1) })
                })
                .collect();
            return ok(json!({ "factor": i, "count": walls.len(), "walls": walls }));
        }
        let base = self.point()?;
        let w = self.window(&base)?;
        let walls = strings(w.walls_meeting(self.inst()));
        ok(json!({ "basepoint": base.to_string(), "radius": w.radius, "count": walls.len(), "walls": walls }))
    }

    fn rank(&self) -> Rec {
        let inst = self.inst();
        let per: Vec<usize> = inst.factors.iter().map(Factor::rank).collect::<Result<_, _>>()?;
        ok(json!({ "rank": inst.rank()?, "factor_ranks": per }))
    }

    fn decompose(&self) -> Rec {
        let (g, source) = if self.r.action.is_some() {
            let a = self.action()?;
            let base = a.core()?.gate(self.inst(), &self.point()?);
            let w = Window::with_kind(self.inst(), &base, self.radius(), WindowKind::Box)?;
            let (core, _) = a.core_window(&w)?;
            (induced_median_graph(self.inst(), &core)?.0, format!("core window, {} points", core.len()))
        } else {
            let (i, g) = self.finite_factor()?;
            (g.clone(), format!("factor {i}"))
        };
        let d = g.decompose_product();
        let mut sizes: Vec<(usize, usize)> = d.factor_graphs().iter().map(|f| (f.len(), f.edge_count())).collect();
        sizes.sort_unstable();
        ok(json!({
            "source": source,
            "vertices": g.len(),
            "rank": g.rank()?,
            "factors": sizes.iter().map(|(v, e)| json!({ "vertices": v, "edges": e })).collect::<Vec<_>>(),
            "reconstructs": d.is_reconstruction_of(&g),
        }))
    }

    fn quotient(&self) -> Rec {
        let (i, g) = self.finite_factor()?;
        let walls = self.r.walls.clone().ok_or_else(|| self.need("walls"))?;
        if let Some(w) = walls.iter().find(|&&w| w >= g.walls().len()) {
            return Err(CliError::Schema(format!("wall {w} out of range")));
        }
        let q = g.restriction_quotient(&walls);
        ok(json!({
            "factor": i,
            "kept_walls": walls,
            "vertices": q.graph.len(),
            "edges": q.graph.edge_count(),
            "projection": q.projection,
        }))
    }

    fn class_record(&self, a: &GroupAction, c: &HalfspaceClassification) -> Value {
        json!({
            "halfspace": c.halfspace.to_string(),
            "class": c.class.to_string(),
            "barred": c.barred.to_string(),
            "witness": c.witness.as_ref().map(|w| a.show(w)),
            "barred_witness": c.barred_witness.as_ref().map(|w| a.show(w)),
            "orbit": c.orbit,
            "confidence": confidence(c.confidence),
        })
    }

    fn classify(&self) -> Rec {
        let a = self.action()?;
        let inst = self.inst();
        let hs: Vec<SymHalfspace> = match &self.r.halfspaces {
            Some(hs) => hs.iter().map(|h| SymHalfspace::parse(h, inst)).collect::<Result<_, _>>()?,
            None => self.window(&self.point()?)?.walls_meeting(inst).into_iter().flat_map(|h| [h.star(), h]).collect(),
        };
        let mut counts = std::collections::BTreeMap::<String, usize>::new();
        let mut recs = Vec::new();
        for h in &hs {
            let c = a.classify_halfspace(h)?;
            *counts.entry(c.class.to_string()).or_default() += 1;
            *counts.entry(c.barred.to_string() + " (barred)").or_default() += 1;
            recs.push(self.class_record(a, &c));
        }
        ok(json!({ "count": recs.len(), "counts": counts, "halfspaces": recs }))
    }

    fn core(&self) -> Rec {
        let a = self.action()?;
        let inst = self.inst();
        let core = a.core()?;
        let reduced = a.reduced_core()?;
        let p = self.point()?;
        let base = reduced.gate(inst, &p);
        let w = self.window(&base)?;
        let (c, cbar) = a.core_window(&w)?;
        let membership = match &self.r.point {
            Some(_) => {
                let m = a.core_membership(&p)?;
                Some(json!({
                    "point": p.to_string(),
                    "in_core": m.in_core,
                    "in_reduced_core": m.in_reduced_core,
                    "blocking": m.blocking.map(|h| h.to_string()),
                }))
            }
            None => None,
        };
        ok(json!({
            "core": core.describe(inst),
            "reduced_core": reduced.describe(inst),
            "window": { "basepoint": base.to_string(), "radius": w.radius, "points": w.len() },
            "core_window_points": c.len(),
            "reduced_core_window_points": cbar.len(),
            "reduced_core_window": if cbar.len() <= 64 { Some(strings(&cbar)) } else { None },
            "membership": membership,
        }))
    }

    fn essential_core(&self) -> Rec {
        let a = self.action()?;
        let inst = self.inst();
        let base = self.point()?;
        let e = a.essential_core(&base)?;
        let w = self.window(&e.core.gate(inst, &base))?;
        let check = a.is_essential(&w)?;
        let inv = a.find_invariant_convex(&w)?;
        ok(json!({
            "essential_core": e.core.describe(inst),
            "essential_factors": e.essential_factors,
            "essential": check.essential,
            "walls_checked": check.walls_checked,
            "counterexample": check.counterexample.as_ref().map(|c| self.class_record(a, c)),
            "proper_invariant_convex": inv.map(|i| json!({
                "kind": i.kind,
                "subset": i.subset.describe(inst),
                "window_points": i.window_points.len(),
            })),
        }))
    }

    fn fixed_point(&self) -> Rec {
        let a = self.action()?;
        ok(match fixed_point_or_cube(a)? {
            FixedOrCube::FixedVertex(p) => json!({ "fixed_vertex": p.to_string() }),
            FixedOrCube::InvariantCube { vertices, dimension } => {
                json!({ "invariant_cube": { "dimension": dimension, "vertices": strings(&vertices) } })
            }
        })
    }

    fn minset(&self) -> Rec {
        let (name, g) = self.element()?;
        let inst = self.inst();
        let set = match minset(inst, &g)? {
            MinSet::Set(s) => json!({ "set": s.describe(inst) }),
            MinSet::Empty(h) => json!({ "empty": { "inverted_wall": h.to_string() } }),
            MinSet::RangeChecked => json!("range-checked"),
        };
        let membership = match &self.r.point {
            Some(_) => {
                let p = self.point()?;
                Some(match minset_membership(inst, &g, &p, self.bound()?)? {
                    Membership::Member(w) => json!({ "member": witness(&w) }),
                    Membership::NonMember(r) => {
                        json!({ "non_member": { "wall": r.wall.to_string(), "n": r.n, "m": r.m } })
                    }
                    Membership::NonMemberUnwitnessed { checked_range } => {
                        json!({ "non_member_unwitnessed": { "checked_range": checked_range } })
                    }
                })
            }
            None => None,
        };
        ok(json!({ "element": name, "min": set, "membership": membership }))
    }

    fn translation_length(&self) -> Rec {
        let (name, g) = self.element()?;
        let inst = self.inst();
        let wt = self.weighting();
        let ell = translation_length(inst, &g, &wt)?;
        let certified = matches!(minset(inst, &g)?, MinSet::Set(_));
        ok(json!({
            "element": name,
            "translation_length": ell.to_string(),
            "min_certified": certified,
            "pseudo_metric": wt.is_pseudo(),
            "inversion": stable_inversion(inst, &g)?.map(|(h, k)| json!({ "wall": h.to_string(), "power": k })),
        }))
    }

    fn non_transverse(&self) -> Rec {
        let (name, g) = self.element()?;
        let inst = self.inst();
        ok(json!({
            "element": name,
            "non_transverse": is_non_transverse(inst, &g),
            "witness": transverse_witness(inst, &g).map(|(h, gh)| json!({ "wall": h.to_string(), "image": gh.to_string() })),
        }))
    }

    fn endpoints(&self) -> Rec {
        let (name, g) = self.element()?;
        let inst = self.inst();
        let e = endpoints(inst, &g, &self.point()?)?;
        ok(json!({
            "element": name,
            "minus": strings(&e.minus),
            "plus": strings(&e.plus),
            "essential_factors": e.essential_factors,
            "essential_core": e.core.describe(inst),
        }))
    }

    fn semisimple(&self) -> Rec {
        let (name, g) = self.element()?;
        let r = self.radius();
        Ok(match is_semisimple(self.inst(), &g, &self.point()?, r)? {
            Semisimplicity::Witness(w) => (Status::Ok, json!({ "element": name, "semisimple": true, "witness": witness(&w) })),
            Semisimplicity::Inversion { wall, power, power_witness } => (
                Status::Ok,
                json!({
                    "element": name,
                    "semisimple": false,
                    "inversion": { "wall": wall.to_string(), "power": power },
                    "power_witness": power_witness.map(|(i, w)| json!({ "power": i, "witness": witness(&w) })),
                }),
            ),
            Semisimplicity::NotFoundAtRadius(r) => {
                (Status::Undecided, json!({ "element": name, "undecided": "no Min witness found", "bound": r }))
            }
        })
    }

    fn gate(&self) -> Rec {
        let (name, g) = self.element()?;
        let y = self.point()?;
        let c = reduced_core_gate(self.inst(), &g, &self.weighting(), &y)?;
        ok(json!({
            "element": name,
            "point": y.to_string(),
            "gate": c.gate.to_string(),
            "distance": c.distance.to_string(),
            "translation_length": c.translation_length.to_string(),
            "displacement": c.displacement.to_string(),
            "identity_holds": c.identity_holds,
        }))
    }

    fn oracle(&self) -> Rec {
        let name = self.r.oracle.as_deref().ok_or_else(|| self.need("oracle"))?;
        let fault = self.r.fault;
        let out = match name {
            "finite-graph" => finite_graph_oracle(self.finite_factor()?.1, fault)?,
            "window-core" => {
                let a = self.action()?;
                let base = a.reduced_core()?.gate(self.inst(), &self.point()?);
                window_core_oracle(a, &self.window(&base)?, self.bound()?, fault)?
            }
            "stallings" => {
                let a = self.action()?;
                let i = self.r.factor.ok_or_else(|| self.need("factor"))?;
                stallings_oracle(a, i, &self.window(&self.point()?)?, self.bound()?, fault)?
            }
            "minset" => {
                let (_, g) = self.element()?;
                let w = self.window(&self.point()?)?;
                minset_oracle(self.inst(), &g, &self.weighting(), &w, self.bound()?, fault)?
            }
            o => return Err(CliError::UnknownRequest(format!("oracle {o:?}"))),
        };
        let (status, mut v) = oracle_record(&out);
        v["fault_injected"] = json!(fault);
        Ok((status, v))
    }
}

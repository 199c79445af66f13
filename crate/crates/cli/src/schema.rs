//! Instance files: a product instance, named actions and weightings, and a list of requests.

use std::collections::BTreeMap;
use std::sync::Arc;

use mediankit::automorphism::FiniteMap;
use mediankit::generate::{grid, hypercube, path, star};
use mediankit::metric::{parse_rational, WallKey};
use mediankit::pocset::realize_median_graph;
use mediankit::{
    Automorphism, Coord, Factor, FactorMap, GroupAction, LineMap, MedianGraph, Point, Pocset, ProductInstance,
    SignedPerm, TreeMap, WallWeighting, Word,
};
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

pub const FORMAT_VERSION: &str = "mediankit/1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: String,
    pub instance: InstanceSpec,
    #[serde(default)]
    pub actions: BTreeMap<String, ActionSpec>,
    #[serde(default)]
    pub weightings: BTreeMap<String, WeightingSpec>,
    #[serde(default)]
    pub requests: Vec<Request>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub factors: Vec<FactorSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FactorSpec {
    Line,
    FreeTree {
        rank: usize,
    },
    Finite {
        #[serde(default)]
        vertices: Option<Vec<String>>,
        #[serde(default)]
        size: Option<usize>,
        edges: Vec<(usize, usize)>,
    },
    Path {
        n: usize,
    },
    Hypercube {
        dim: usize,
    },
    Grid {
        rows: usize,
        cols: usize,
    },
    Star {
        leaves: usize,
    },
    Pocset {
        pairs: Vec<(String, String)>,
        #[serde(default)]
        order: Vec<(String, String)>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub generators: Vec<GeneratorSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    #[serde(default)]
    pub perm: Option<Vec<usize>>,
    pub maps: Vec<MapSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Id,
    Line {
        #[serde(default = "one")]
        eps: i64,
        #[serde(default)]
        shift: i64,
    },
    Tree {
        #[serde(default)]
        left: String,
        #[serde(default)]
        subst: String,
    },
    Finite {
        perm: Vec<usize>,
    },
}

fn one() -> i64 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightingSpec {
    #[serde(default = "unit_weight")]
    pub default: String,
    #[serde(default)]
    pub rules: Vec<WeightRule>,
}

fn unit_weight() -> String {
    "1".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightRule {
    pub key: String,
    pub weight: String,
}

/// One analysis request. Fields not used by `op` are ignored.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub op: String,
    #[serde(default)]
    pub action: Option<String>,
    /// A word in the action's generators, such as `"g h^-1"` or `"a^2"`.
    #[serde(default)]
    pub element: Option<String>,
    #[serde(default)]
    pub weighting: Option<String>,
    #[serde(default)]
    pub halfspaces: Option<Vec<String>>,
    #[serde(default)]
    pub point: Option<Vec<Value>>,
    #[serde(default)]
    pub factor: Option<usize>,
    #[serde(default)]
    pub walls: Option<Vec<usize>>,
    #[serde(default)]
    pub oracle: Option<String>,
    #[serde(default)]
    pub fault: bool,
    #[serde(default)]
    pub window: Option<usize>,
    #[serde(default)]
    pub bound: Option<usize>,
}

/// A loaded file with every name resolved.
pub struct Loaded {
    pub instance: ProductInstance,
    pub actions: BTreeMap<String, GroupAction>,
    pub weightings: BTreeMap<String, WallWeighting>,
    pub requests: Vec<Request>,
}

pub fn parse(text: &str) -> Result<InstanceFile, CliError> {
    serde_json::from_str(text).map_err(|e| {
        let kind = if e.is_data() { "SchemaError" } else { "ParseError" };
        CliError::Input { kind, line: e.line(), column: e.column(), message: e.to_string() }
    })
}

pub fn load(text: &str) -> Result<Loaded, CliError> {
    parse(text)?.resolve()
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

impl InstanceFile {
    pub fn resolve(self) -> Result<Loaded, CliError> {
        if self.version != FORMAT_VERSION {
            return Err(schema(format!("unsupported version {:?}, expected {FORMAT_VERSION:?}", self.version)));
        }
        let factors = self
            .instance
            .factors
            .iter()
            .enumerate()
            .map(|(i, f)| build_factor(f).map_err(|e| schema(format!("factor {i}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if factors.is_empty() {
            return Err(schema("instance has no factors"));
        }
        let instance = ProductInstance::new(factors);
        let mut actions = BTreeMap::new();
        for (name, spec) in &self.actions {
            let a = build_action(&instance, spec).map_err(|e| schema(format!("action {name:?}: {e}")))?;
            actions.insert(name.clone(), a);
        }
        let mut weightings = BTreeMap::new();
        for (name, spec) in &self.weightings {
            let w = build_weighting(spec).map_err(|e| schema(format!("weighting {name:?}: {e}")))?;
            weightings.insert(name.clone(), w);
        }
        for (k, r) in self.requests.iter().enumerate() {
            if let Some(a) = &r.action {
                if !actions.contains_key(a) {
                    return Err(schema(format!("request {k}: unknown action {a:?}")));
                }
            }
            if let Some(w) = &r.weighting {
                if !weightings.contains_key(w) {
                    return Err(schema(format!("request {k}: unknown weighting {w:?}")));
                }
            }
        }
        Ok(Loaded { instance, actions, weightings, requests: self.requests })
    }
}

fn build_factor(f: &FactorSpec) -> Result<Factor, String> {
    let finite = |g: MedianGraph| Factor::Finite(Arc::new(g));
    Ok(match f {
        FactorSpec::Line => Factor::Line,
        FactorSpec::FreeTree { rank } => {
            if !(1..=26).contains(rank) {
                return Err(format!("tree rank {rank} outside 1..=26"));
            }
            Factor::FreeTree { rank: *rank }
        }
        FactorSpec::Finite { vertices, size, edges } => {
            let labels = match (vertices, size) {
                (Some(v), None) => v.clone(),
                (None, Some(n)) => (0..*n).map(|i| i.to_string()).collect(),
                _ => return Err("give exactly one of `vertices` and `size`".into()),
            };
            finite(MedianGraph::from_edges(labels, edges).map_err(|e| e.to_string())?)
        }
        FactorSpec::Path { n } if *n > 0 => finite(path(*n)),
        FactorSpec::Hypercube { dim } => finite(hypercube(*dim)),
        FactorSpec::Grid { rows, cols } if *rows > 0 && *cols > 0 => finite(grid(*rows, *cols)),
        FactorSpec::Star { leaves } => finite(star(*leaves)),
        FactorSpec::Pocset { pairs, order } => {
            let p = Pocset::from_pairs(pairs, order).map_err(|e| e.to_string())?;
            finite(realize_median_graph(&p).map_err(|e| e.to_string())?)
        }
        _ => return Err("empty graph".into()),
    })
}

fn build_map(inst: &ProductInstance, dst: usize, m: &MapSpec) -> Result<FactorMap, String> {
    let f = &inst.factors[dst];
    Ok(match (m, f) {
        (MapSpec::Id, f) => FactorMap::identity(f),
        (MapSpec::Line { eps, shift }, Factor::Line) => {
            if eps.abs() != 1 {
                return Err(format!("line map needs eps = ±1, got {eps}"));
            }
            FactorMap::Line(LineMap { eps: *eps, shift: *shift })
        }
        (MapSpec::Tree { left, subst }, Factor::FreeTree { rank }) => FactorMap::Tree(TreeMap {
            left: Word::parse(left, *rank).map_err(|e| e.to_string())?,
            subst: SignedPerm::parse(subst, *rank).map_err(|e| e.to_string())?,
        }),
        (MapSpec::Finite { perm }, Factor::Finite(_)) => FactorMap::Finite(FiniteMap { perm: perm.clone() }),
        (_, f) => return Err(format!("map does not fit {} factor {dst}", f.kind_name())),
    })
}

fn build_action(inst: &ProductInstance, spec: &ActionSpec) -> Result<GroupAction, String> {
    let mut gens = Vec::new();
    let mut names = Vec::new();
    for g in &spec.generators {
        if g.name.is_empty() || !g.name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(format!("bad generator name {:?}", g.name));
        }
        if names.contains(&g.name) {
            return Err(format!("duplicate generator {:?}", g.name));
        }
        let perm = g.perm.clone().unwrap_or_else(|| (0..inst.len()).collect());
        if perm.len() != inst.len() || g.maps.len() != inst.len() {
            return Err(format!("generator {:?} needs {} factor entries", g.name, inst.len()));
        }
        if perm.iter().any(|&j| j >= inst.len()) {
            return Err(format!("generator {:?}: factor permutation out of range", g.name));
        }
        let maps = g.maps.iter().enumerate().map(|(i, m)| build_map(inst, perm[i], m)).collect::<Result<_, _>>()?;
        let a = Automorphism { perm, maps };
        inst.validate_automorphism(&a).map_err(|e| format!("generator {:?}: {e}", g.name))?;
        gens.push(a);
        names.push(g.name.clone());
    }
    if gens.is_empty() {
        return Err("no generators".into());
    }
    GroupAction::new(inst.clone(), gens, names).map_err(|e| e.to_string())
}

fn build_weighting(spec: &WeightingSpec) -> Result<WallWeighting, String> {
    let default = parse_rational(&spec.default).map_err(|e| e.to_string())?;
    let rules = spec
        .rules
        .iter()
        .map(|r| {
            let key: WallKey = r.key.parse().map_err(|e: mediankit::Error| e.to_string())?;
            Ok((key, parse_rational(&r.weight).map_err(|e| e.to_string())?))
        })
        .collect::<Result<Vec<_>, String>>()?;
    WallWeighting::new(default, rules).map_err(|e| e.to_string())
}

/// Parses `"g h^-1 g^2"` into the group word and its automorphism.
pub fn parse_element(a: &GroupAction, text: &str) -> Result<(Word, Automorphism), CliError> {
    let mut letters = Vec::new();
    for tok in text.split_whitespace() {
        let (name, pow) = match tok.split_once('^') {
            Some((n, p)) => (n, p.parse::<i64>().map_err(|_| schema(format!("bad exponent in {tok:?}")))?),
            None => (tok, 1),
        };
        let k = a.names().iter().position(|n| n == name).ok_or_else(|| schema(format!("unknown generator {name:?}")))?;
        let l = k as i32 + 1;
        for _ in 0..pow.unsigned_abs() {
            letters.push(if pow > 0 { l } else { -l });
        }
    }
    let w = Word::new(letters);
    let g = a.eval(&w);
    Ok((w, g))
}

/// Points are JSON arrays: integers for lines, word strings for trees, vertex indices or labels for finite factors.
pub fn parse_point(inst: &ProductInstance, vals: &[Value]) -> Result<Point, CliError> {
    if vals.len() != inst.len() {
        return Err(schema(format!("point has {} coordinates, instance has {} factors", vals.len(), inst.len())));
    }
    let coords = vals
        .iter()
        .zip(&inst.factors)
        .enumerate()
        .map(|(i, (v, f))| match (f, v) {
            (Factor::Line, Value::Number(n)) => n.as_i64().map(Coord::Int),
            (Factor::FreeTree { rank }, Value::String(s)) => Word::parse(s, *rank).ok().map(Coord::Word),
            (Factor::Finite(g), Value::Number(n)) => n.as_u64().map(|x| Coord::Vertex(x as usize)).filter(|_| n.as_u64() < Some(g.len() as u64)),
            (Factor::Finite(g), Value::String(s)) => (0..g.len()).find(|&k| g.label(k) == s).map(Coord::Vertex),
            _ => None,
        }
        .ok_or_else(|| schema(format!("coordinate {i} ({v}) does not fit a {} factor", f.kind_name()))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Point(coords))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "version": "mediankit/1",
        "instance": {"factors": [{"kind": "line"}, {"kind": "free_tree", "rank": 2}, {"kind": "path", "n": 3}]},
        "actions": {"G": {"generators": [
            {"name": "g", "maps": [{"line": {"shift": 1}}, {"tree": {"left": "ab"}}, {"finite": {"perm": [2, 1, 0]}}]}
        ]}},
        "weightings": {"w": {"default": "1", "rules": [{"key": "factor:0", "weight": "3/2"}]}},
        "requests": [{"op": "rank"}]
    }"#;

    #[test]
    fn loads_small_file() {
        let l = load(SMALL).unwrap();
        assert_eq!(l.instance.len(), 3);
        let a = &l.actions["G"];
        let (w, g) = parse_element(a, "g^2 g^-1").unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(g, a.generators()[0]);
        let p = parse_point(&l.instance, &[Value::from(3), Value::from("aB"), Value::from("2")]).unwrap();
        assert_eq!(p.to_string(), "(3,aB,v2)");
    }

    #[test]
    fn errors_carry_kinds() {
        assert!(matches!(load("{ not json"), Err(CliError::Input { kind: "ParseError", .. })));
        let bad = SMALL.replace("\"line\"}, {\"kind\"", "\"lines\"}, {\"kind\"");
        assert!(matches!(load(&bad), Err(CliError::Input { kind: "SchemaError", .. })));
        let bad = SMALL.replace("\"shift\": 1", "\"shift\": 1, \"eps\": 2");
        assert!(matches!(load(&bad), Err(CliError::Schema(_))));
        let bad = SMALL.replace("[2, 1, 0]", "[1, 0, 2]");
        assert!(matches!(load(&bad), Err(CliError::Schema(_))));
    }
}

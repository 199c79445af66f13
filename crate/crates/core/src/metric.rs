//! Weighted wall metrics with exact rational weights.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::action::GroupAction;
use crate::error::{invalid, Error, Result};
use crate::instance::{Coord, HalfspaceDesc, LineHalf, Point, ProductInstance, SymHalfspace, TreeHalf};
use crate::window::Window;
use crate::word::letter_char;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| invalid(format!("bad rational {s:?}")))?;
    let d = BigInt::from_str(d).map_err(|_| invalid(format!("bad rational {s:?}")))?;
    if d.is_zero() {
        return Err(invalid(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

/// Which walls a weight rule applies to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WallKey {
    Factor(usize),
    /// Line walls `{x ≥ k}` with `k ≡ residue (mod modulus)`.
    LineResidue { factor: usize, modulus: i64, residue: i64 },
    /// Tree edges labelled by a generator (either orientation).
    TreeLetter { factor: usize, letter: i32 },
    FiniteWall { factor: usize, wall: usize },
}

impl WallKey {
    pub fn matches(&self, h: &SymHalfspace) -> bool {
        match (self, &h.desc) {
            (WallKey::Factor(f), _) => *f == h.factor,
            (WallKey::LineResidue { factor, modulus, residue }, HalfspaceDesc::Line(l)) => {
                let k = match l {
                    LineHalf::Ge(k) => *k,
                    LineHalf::Le(k) => k + 1,
                };
                *factor == h.factor && k.rem_euclid(*modulus) == residue.rem_euclid(*modulus)
            }
            (WallKey::TreeLetter { factor, letter }, HalfspaceDesc::Tree(TreeHalf::Cone(v) | TreeHalf::CoCone(v))) => {
                *factor == h.factor && v.last().map(|l| l.abs()) == Some(letter.abs())
            }
            (WallKey::FiniteWall { factor, wall }, HalfspaceDesc::Finite(x)) => *factor == h.factor && x / 2 == *wall,
            _ => false,
        }
    }
}

impl fmt::Display for WallKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WallKey::Factor(i) => write!(f, "factor:{i}"),
            WallKey::LineResidue { factor, modulus, residue } => write!(f, "line:{factor}:mod{modulus}:{residue}"),
            WallKey::TreeLetter { factor, letter } => write!(f, "tree:{factor}:{}", letter_char(letter.abs())),
            WallKey::FiniteWall { factor, wall } => write!(f, "finite:{factor}:w{wall}"),
        }
    }
}

impl FromStr for WallKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<usize>().map_err(|_| invalid(format!("bad weight key {s:?}")));
        match parts.as_slice() {
            ["factor", i] => Ok(WallKey::Factor(num(i)?)),
            ["line", i, m, r] => {
                let modulus: i64 = m
                    .strip_prefix("mod")
                    .and_then(|m| m.parse().ok())
                    .filter(|&m: &i64| m > 0)
                    .ok_or_else(|| invalid(format!("bad modulus in {s:?}")))?;
                let residue: i64 = r.parse().map_err(|_| invalid(format!("bad residue in {s:?}")))?;
                Ok(WallKey::LineResidue { factor: num(i)?, modulus, residue })
            }
            ["tree", i, l] => {
                let mut cs = l.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) if c.is_ascii_alphabetic() => {
                        Ok(WallKey::TreeLetter { factor: num(i)?, letter: (c.to_ascii_lowercase() as u8 - b'a') as i32 + 1 })
                    }
                    _ => Err(invalid(format!("bad letter in {s:?}"))),
                }
            }
            ["finite", i, w] => {
                let wall = w.strip_prefix('w').ok_or_else(|| invalid(format!("bad wall in {s:?}")))?;
                Ok(WallKey::FiniteWall { factor: num(i)?, wall: num(wall)? })
            }
            _ => Err(invalid(format!("unknown weight key {s:?}"))),
        }
    }
}

/// Weights on walls: a default plus rules, the last matching rule winning.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallWeighting {
    pub default: Rational,
    pub rules: Vec<(WallKey, Rational)>,
}

impl Default for WallWeighting {
    fn default() -> Self {
        WallWeighting::unit()
    }
}

impl WallWeighting {
    pub fn unit() -> Self {
        WallWeighting { default: rat(1), rules: Vec::new() }
    }

    pub fn new(default: Rational, rules: Vec<(WallKey, Rational)>) -> Result<Self> {
        let w = WallWeighting { default, rules };
        if w.weights().any(|x| x.is_negative()) {
            return Err(invalid("wall weights must be nonnegative"));
        }
        Ok(w)
    }

    fn weights(&self) -> impl Iterator<Item = &Rational> {
        std::iter::once(&self.default).chain(self.rules.iter().map(|(_, w)| w))
    }

    /// Some weight is zero, so this is only a pseudo-metric.
    pub fn is_pseudo(&self) -> bool {
        self.weights().any(Zero::is_zero)
    }

    pub fn weight(&self, h: &SymHalfspace) -> Rational {
        self.rules.iter().rev().find(|(k, _)| k.matches(h)).map_or_else(|| self.default.clone(), |(_, w)| w.clone())
    }

    pub fn coord_distance(&self, inst: &ProductInstance, i: usize, a: &Coord, b: &Coord) -> Rational {
        inst.coord_separating(i, a, b).iter().map(|h| self.weight(h)).sum()
    }

    pub fn distance(&self, inst: &ProductInstance, x: &Point, y: &Point) -> Rational {
        inst.separating_walls(x, y).iter().map(|h| self.weight(h)).sum()
    }

    /// A window wall whose weight differs from that of its image under a generator.
    pub fn invariance_violation(&self, a: &GroupAction, w: &Window) -> Option<(SymHalfspace, SymHalfspace)> {
        let inst = a.instance();
        for h in w.walls_meeting(inst) {
            for g in a.generators() {
                let gh = inst.apply_h(g, &h);
                if self.weight(&gh) != self.weight(&h) {
                    return Some((h, gh));
                }
            }
        }
        None
    }
}

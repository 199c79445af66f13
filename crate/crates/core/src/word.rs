//! Freely reduced words and letter substitutions.
//!
//! A letter is a nonzero `i32`: `k > 0` is the k-th generator, `-k` its
//! inverse. Words print with `a, b, c, ...` for generators and capitals for
//! inverses; the identity prints as `1`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{invalid, Result};

pub type Letter = i32;

fn letter_key(l: Letter) -> (u32, bool) {
    (l.unsigned_abs(), l < 0)
}

/// Freely reduced word in a free group.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Builds the free reduction of `letters`.
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            assert!(l != 0, "zero is not a letter");
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letter(l: Letter) -> Self {
        Word::new([l])
    }

    /// Parses `aBc`-style text; `""` and `"1"` are the identity.
    pub fn parse(s: &str, rank: usize) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let l = parse_letter(c)?;
            if l.unsigned_abs() as usize > rank {
                return Err(invalid(format!("letter '{c}' outside alphabet of rank {rank}")));
            }
            letters.push(l);
        }
        Ok(Word::new(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Largest letter index used.
    pub fn max_generator(&self) -> usize {
        self.0.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn mul(&self, other: &Word) -> Self {
        let k = self
            .0
            .iter()
            .rev()
            .zip(other.0.iter())
            .take_while(|(a, b)| **a == -**b)
            .count();
        let mut v = Vec::with_capacity(self.len() + other.len() - 2 * k);
        v.extend_from_slice(&self.0[..self.len() - k]);
        v.extend_from_slice(&other.0[k..]);
        Word(v)
    }

    pub fn push(&self, l: Letter) -> Self {
        self.mul(&Word::letter(l))
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = Word::identity();
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    pub fn prefix(&self, n: usize) -> Self {
        Word(self.0[..n].to_vec())
    }

    /// Word with the last letter removed (the parent vertex in the Cayley tree).
    pub fn parent(&self) -> Option<Self> {
        if self.is_empty() {
            None
        } else {
            Some(self.prefix(self.len() - 1))
        }
    }

    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0.iter().zip(other.0.iter()).take_while(|(a, b)| a == b).count()
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Splits `self = p c p⁻¹` with `c` cyclically reduced.
    pub fn cyclic_reduction(&self) -> (Word, Word) {
        let n = self.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.0[k] == -self.0[n - 1 - k] {
            k += 1;
        }
        (self.prefix(k), Word(self.0[k..n - k].to_vec()))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.len() <= 1 || self.0[0] != -self.0[self.len() - 1]
    }

    /// Distance between two vertices of the Cayley tree.
    pub fn tree_distance(&self, other: &Word) -> usize {
        let p = self.common_prefix_len(other);
        self.len() + other.len() - 2 * p
    }

    /// Median of three vertices of the Cayley tree.
    pub fn tree_median(a: &Word, b: &Word, c: &Word) -> Word {
        let ab = a.common_prefix_len(b);
        let bc = b.common_prefix_len(c);
        let ac = a.common_prefix_len(c);
        if ab >= bc && ab >= ac {
            a.prefix(ab)
        } else if bc >= ac {
            b.prefix(bc)
        } else {
            a.prefix(ac)
        }
    }

    /// Vertices on the geodesic from `self` to `other`, endpoints included.
    pub fn geodesic(&self, other: &Word) -> Vec<Word> {
        let p = self.common_prefix_len(other);
        let mut out = Vec::with_capacity(self.len() + other.len() - 2 * p + 1);
        for i in (p..=self.len()).rev() {
            out.push(self.prefix(i));
        }
        for i in p + 1..=other.len() {
            out.push(other.prefix(i));
        }
        out
    }

    /// Every reduced word of length at most `radius` over `rank` generators, shortlex order.
    pub fn ball(rank: usize, radius: usize) -> Vec<Word> {
        let mut out = vec![Word::identity()];
        let mut layer = vec![Word::identity()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for w in &layer {
                for l in letters_of_rank(rank) {
                    if w.last() != Some(-l) {
                        let mut v = w.0.clone();
                        v.push(l);
                        next.push(Word(v));
                    }
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    /// Formats the word with custom names for generators.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_empty() {
            return "1".to_string();
        }
        self.0
            .iter()
            .map(|&l| {
                let i = l.unsigned_abs() as usize - 1;
                let name = names.get(i).cloned().unwrap_or_else(|| format!("g{}", i + 1));
                if l > 0 {
                    name
                } else {
                    format!("{name}^-1")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// The `2·rank` letters in output order `a, A, b, B, ...`.
pub fn letters_of_rank(rank: usize) -> impl Iterator<Item = Letter> {
    (1..=rank as i32).flat_map(|k| [k, -k])
}

fn parse_letter(c: char) -> Result<Letter> {
    if c.is_ascii_lowercase() {
        Ok(c as i32 - 'a' as i32 + 1)
    } else if c.is_ascii_uppercase() {
        Ok(-(c as i32 - 'A' as i32 + 1))
    } else {
        Err(invalid(format!("bad letter '{c}'")))
    }
}

pub fn letter_char(l: Letter) -> char {
    let k = l.unsigned_abs() as u8 - 1;
    if l > 0 {
        (b'a' + k) as char
    } else {
        (b'A' + k) as char
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            self.0
                .iter()
                .map(|&l| letter_key(l))
                .cmp(other.0.iter().map(|&l| letter_key(l)))
        })
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        for &l in &self.0 {
            write!(f, "{}", letter_char(l))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// Bijective substitution of letters by letters or inverse letters.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SignedPerm {
    img: Vec<Letter>,
}

impl SignedPerm {
    pub fn identity(rank: usize) -> Self {
        SignedPerm { img: (1..=rank as i32).collect() }
    }

    pub fn new(img: Vec<Letter>) -> Result<Self> {
        let m = img.len();
        let mut seen = vec![false; m];
        for &l in &img {
            let k = l.unsigned_abs() as usize;
            if k == 0 || k > m || seen[k - 1] {
                return Err(invalid(format!("substitution {img:?} is not a signed permutation")));
            }
            seen[k - 1] = true;
        }
        Ok(SignedPerm { img })
    }

    /// Parses `a->a,b->B`; unlisted letters are fixed.
    pub fn parse(s: &str, rank: usize) -> Result<Self> {
        let mut img: Vec<Letter> = (1..=rank as i32).collect();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (lhs, rhs) = part
                .split_once("->")
                .ok_or_else(|| invalid(format!("bad substitution entry '{part}'")))?;
            let src = Word::parse(lhs, rank)?;
            let dst = Word::parse(rhs, rank)?;
            if src.len() != 1 || dst.len() != 1 {
                return Err(invalid(format!("substitution entry '{part}' must map a letter to a letter")));
            }
            let (s, d) = (src.0[0], dst.0[0]);
            img[s.unsigned_abs() as usize - 1] = if s > 0 { d } else { -d };
        }
        SignedPerm::new(img)
    }

    pub fn rank(&self) -> usize {
        self.img.len()
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &l)| l == i as i32 + 1)
    }

    pub fn apply_letter(&self, l: Letter) -> Letter {
        let v = self.img[l.unsigned_abs() as usize - 1];
        if l > 0 {
            v
        } else {
            -v
        }
    }

    pub fn apply(&self, w: &Word) -> Word {
        Word(w.0.iter().map(|&l| self.apply_letter(l)).collect())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SignedPerm) -> SignedPerm {
        SignedPerm { img: other.img.iter().map(|&l| self.apply_letter(l)).collect() }
    }

    pub fn inverse(&self) -> SignedPerm {
        let mut img = vec![0; self.img.len()];
        for (i, &l) in self.img.iter().enumerate() {
            let k = l.unsigned_abs() as usize - 1;
            img[k] = if l > 0 { i as i32 + 1 } else { -(i as i32 + 1) };
        }
        SignedPerm { img }
    }

    pub fn order(&self) -> usize {
        let mut p = self.clone();
        let mut n = 1;
        while !p.is_identity() {
            p = self.compose(&p);
            n += 1;
        }
        n
    }
}

impl fmt::Display for SignedPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .img
            .iter()
            .enumerate()
            .map(|(i, &l)| format!("{}->{}", letter_char(i as i32 + 1), letter_char(l)))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 3).unwrap()
    }

    #[test]
    fn reduction_and_display() {
        assert_eq!(w("abBA"), Word::identity());
        assert_eq!(w("aBbc").to_string(), "ac");
        assert_eq!(Word::identity().to_string(), "1");
        assert_eq!(w("ab").mul(&w("Ba")), w("aa"));
    }

    #[test]
    fn cyclic_reduction_splits() {
        let (p, c) = w("abcBA").cyclic_reduction();
        assert_eq!((p.to_string(), c.to_string()), ("ab".into(), "c".into()));
        assert_eq!(p.mul(&c).mul(&p.inverse()), w("abcBA"));
        let (p, c) = w("aA").cyclic_reduction();
        assert!(p.is_empty() && c.is_empty());
    }

    #[test]
    fn tree_median_examples() {
        assert_eq!(Word::tree_median(&w("ab"), &w("aB"), &w("A")), w("a"));
        assert_eq!(Word::ball(2, 2).len(), 17);
    }

    #[test]
    fn shortlex_letter_order() {
        let mut v = [w("b"), w("A"), w("a"), w("B"), w("aa")];
        v.sort();
        let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["a", "A", "b", "B", "aa"]);
    }

    #[test]
    fn signed_perm_roundtrip() {
        let p = SignedPerm::parse("a->b,b->A", 2).unwrap();
        assert_eq!(p.apply(&w("ab")), w("bA"));
        assert!(p.compose(&p.inverse()).is_identity());
        assert_eq!(p.order(), 4);
        assert_eq!(SignedPerm::parse(&p.to_string(), 2).unwrap(), p);
        assert!(SignedPerm::parse("a->b", 2).is_err());
    }

    #[test]
    fn geodesic_walks_through_meet() {
        let g = w("ab").geodesic(&w("aC"));
        let s: Vec<String> = g.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["ab", "a", "aC"]);
    }
}

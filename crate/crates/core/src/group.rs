//! Finite abelian groups presented by their invariant-factor chain, with
//! exact componentwise arithmetic and element enumeration.

use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// A finite abelian group `C_{n_1} ⊕ … ⊕ C_{n_r}` with `1 < n_1 | … | n_r`.
///
/// Only invariant-factor form is accepted; callers presenting a group as an
/// arbitrary direct sum must normalize it first. The trivial group is not a
/// `Group`; operations that can collapse to it return `Option<Group>` with
/// `None` as the trivial marker.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Group {
    factors: Vec<u64>,
}

/// An element of a [`Group`]: one residue per invariant factor, each reduced
/// into `[0, n_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    coords: Vec<u64>,
}

impl Group {
    /// Validates an invariant-factor chain.
    pub fn new(factors: Vec<u64>) -> Result<Group> {
        if factors.is_empty() {
            return Err(Error::Parse("empty factor list".into()));
        }
        for &f in &factors {
            if f < 2 {
                return Err(Error::FactorTooSmall { factor: f });
            }
        }
        for w in factors.windows(2) {
            if w[1] % w[0] != 0 {
                return Err(Error::DivisibilityChainViolation { prev: w[0], next: w[1] });
            }
        }
        Ok(Group { factors })
    }

    /// Parses the comma-separated text form, e.g. `"2,2,4"`.
    pub fn parse(s: &str) -> Result<Group> {
        let factors = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Parse(format!("bad factor {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Group::new(factors)
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> u128 {
        self.factors.iter().map(|&f| f as u128).product()
    }

    pub fn exponent(&self) -> u64 {
        *self.factors.last().expect("nonempty by construction")
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { coords: vec![0; self.factors.len()] }
    }

    /// Builds an element from raw coordinates, reducing each modulo its factor.
    pub fn element(&self, coords: Vec<u64>) -> Result<GroupElement> {
        if coords.len() != self.factors.len() {
            return Err(Error::GroupMismatch { left: self.factors.len(), right: coords.len() });
        }
        let coords = coords.iter().zip(&self.factors).map(|(&c, &n)| c % n).collect();
        Ok(GroupElement { coords })
    }

    /// True when the element has the right arity and every coordinate is reduced.
    pub fn contains(&self, a: &GroupElement) -> bool {
        a.coords.len() == self.factors.len()
            && a.coords.iter().zip(&self.factors).all(|(&c, &n)| c < n)
    }

    fn check(&self, a: &GroupElement) -> Result<()> {
        if !self.contains(a) {
            return Err(Error::GroupMismatch {
                left: self.factors.len(),
                right: a.coords.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(self.neg_unchecked(a))
    }

    /// Integer scaling `m·a`; `m` may be negative or exceed element order.
    pub fn scale(&self, m: i64, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        let coords = a
            .coords
            .iter()
            .zip(&self.factors)
            .map(|(&c, &n)| {
                let m_red = m.rem_euclid(n as i64) as u128;
                ((c as u128 * m_red) % n as u128) as u64
            })
            .collect();
        Ok(GroupElement { coords })
    }

    pub(crate) fn add_unchecked(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .zip(&self.factors)
            .map(|((&x, &y), &n)| {
                let s = x + y;
                if s >= n { s - n } else { s }
            })
            .collect();
        GroupElement { coords }
    }

    pub(crate) fn neg_unchecked(&self, a: &GroupElement) -> GroupElement {
        let coords = a
            .coords
            .iter()
            .zip(&self.factors)
            .map(|(&x, &n)| if x == 0 { 0 } else { n - x })
            .collect();
        GroupElement { coords }
    }

    /// Least `m ≥ 1` with `m·a = 0`: the lcm over coordinates of `n_i / gcd(n_i, c_i)`.
    pub fn element_order(&self, a: &GroupElement) -> Result<u64> {
        self.check(a)?;
        let mut ord: u64 = 1;
        for (&c, &n) in a.coords.iter().zip(&self.factors) {
            let k = n / gcd(n, c);
            ord = num_integer::lcm(ord, k);
        }
        Ok(ord)
    }

    /// All `|G|` elements in lexicographic coordinate order, identity first.
    pub fn enumerate_elements(&self, cap: usize) -> Result<Vec<GroupElement>> {
        let order = self.order();
        if order > cap as u128 {
            return Err(Error::GroupTooLarge { order, cap: cap as u128 });
        }
        let idx = Indexer::new(self);
        Ok((0..order as usize).map(|i| idx.element_at(i)).collect())
    }

    /// Invariant factors of the subgroup `mG = { m·g : g ∈ G }`.
    ///
    /// `None` marks the trivial group.
    pub fn multiple_subgroup(&self, m: u64) -> Option<Group> {
        assert!(m >= 1, "scaling factor must be positive");
        let factors: Vec<u64> = self
            .factors
            .iter()
            .map(|&n| n / gcd(n, m))
            .filter(|&f| f > 1)
            .collect();
        if factors.is_empty() {
            None
        } else {
            Some(Group { factors })
        }
    }
}

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// Mixed-radix indexing of group elements: the bijection between
/// lexicographic coordinate order and `0..|G|`.
#[derive(Debug, Clone)]
pub(crate) struct Indexer {
    factors: Vec<u64>,
    strides: Vec<usize>,
    order: usize,
}

impl Indexer {
    /// Callers must have checked the order against a cap; this asserts it fits.
    pub(crate) fn new(group: &Group) -> Indexer {
        let order = group.order();
        assert!(order <= usize::MAX as u128, "group too large to index");
        let mut strides = vec![1usize; group.rank()];
        for i in (0..group.rank().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * group.factors[i + 1] as usize;
        }
        Indexer { factors: group.factors.clone(), strides, order: order as usize }
    }

    pub(crate) fn order(&self) -> usize {
        self.order
    }

    pub(crate) fn index_of(&self, a: &GroupElement) -> usize {
        a.coords
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c as usize * s)
            .sum()
    }

    pub(crate) fn element_at(&self, mut i: usize) -> GroupElement {
        let coords = self
            .strides
            .iter()
            .zip(&self.factors)
            .map(|(&s, &_n)| {
                let c = i / s;
                i %= s;
                c as u64
            })
            .collect();
        GroupElement { coords }
    }

    /// Index-space translation table for one fixed summand `g`:
    /// `perm[i] = index(element_at(i) + g)`.
    pub(crate) fn translation(&self, group: &Group, g: &GroupElement) -> Vec<u32> {
        debug_assert!(self.order <= u32::MAX as usize);
        (0..self.order)
            .map(|i| self.index_of(&group.add_unchecked(&self.element_at(i), g)) as u32)
            .collect()
    }

    pub(crate) fn neg_table(&self, group: &Group) -> Vec<u32> {
        (0..self.order)
            .map(|i| self.index_of(&group.neg_unchecked(&self.element_at(i))) as u32)
            .collect()
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Group> {
        Group::parse(s)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for Group {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Group {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Group, D::Error> {
        let text = String::deserialize(d)?;
        Group::parse(&text).map_err(serde::de::Error::custom)
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<GroupElement, D::Error> {
        Ok(GroupElement { coords: Vec::<u64>::deserialize(d)? })
    }
}

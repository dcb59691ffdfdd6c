//! Finite abelian groups in invariant-factor form.
//!
//! A group `C_{n_1} ⊕ … ⊕ C_{n_r}` with `n_1 | … | n_r` is stored together
//! with precomputed addition, negation and order tables. Elements are
//! identified with their index in the lexicographic order of coordinate
//! tuples (first coordinate most significant), so the zero element is index
//! 0 and every enumeration in the crate shares one canonical order.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the group order. Element sets are stored as `u64` bitmasks,
/// so 64 is also the hard maximum.
pub const DEFAULT_MAX_ORDER: usize = 64;

/// An element, addressed by its position in the canonical element order.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Element(u8);

impl Element {
    pub const ZERO: Element = Element(0);

    pub fn from_index(index: usize) -> Element {
        debug_assert!(index < DEFAULT_MAX_ORDER);
        Element(index as u8)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn bit(self) -> u64 {
        1u64 << self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Clone, Debug)]
pub struct Group {
    factors: Vec<u32>,
    order: usize,
    add: Vec<u8>,
    neg: Vec<u8>,
    ord: Vec<u32>,
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.factors == other.factors
    }
}

impl Eq for Group {}

impl Group {
    /// Canonicalizes arbitrary cyclic factors with the default order cap.
    pub fn new(raw_factors: &[u64]) -> Result<Group> {
        Group::with_max_order(raw_factors, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(raw_factors: &[u64], cap: usize) -> Result<Group> {
        let cap = cap.min(DEFAULT_MAX_ORDER);
        let factors = canonicalize(raw_factors)?;
        let mut order: u64 = 1;
        for &n in &factors {
            order = order.saturating_mul(n as u64);
        }
        if order > cap as u64 {
            return Err(Error::GroupTooLarge { order, cap });
        }
        Ok(Group::from_canonical(factors))
    }

    pub fn cyclic(n: u64) -> Result<Group> {
        if n == 1 {
            return Ok(Group::trivial());
        }
        Group::new(&[n])
    }

    pub fn trivial() -> Group {
        Group::from_canonical(Vec::new())
    }

    /// Parses the text syntax `3,3`. `1` and `trivial` denote the trivial group.
    pub fn parse(text: &str) -> Result<Group> {
        Group::parse_with_max_order(text, DEFAULT_MAX_ORDER)
    }

    pub fn parse_with_max_order(text: &str, cap: usize) -> Result<Group> {
        let text = text.trim();
        if text.is_empty() || text == "1" || text == "trivial" {
            return Ok(Group::trivial());
        }
        let raw = text
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<u64>().map_err(|_| Error::Parse {
                    token: tok.to_string(),
                    reason: "expected a positive integer factor".into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Group::with_max_order(&raw, cap)
    }

    fn from_canonical(factors: Vec<u32>) -> Group {
        let order: usize = factors.iter().map(|&n| n as usize).product();
        let coords: Vec<Vec<u32>> = (0..order).map(|i| index_to_coords(&factors, i)).collect();
        let mut add = vec![0u8; order * order];
        let mut neg = vec![0u8; order];
        let mut ord = vec![1u32; order];
        for a in 0..order {
            for b in 0..order {
                let c: Vec<u32> = coords[a]
                    .iter()
                    .zip(&coords[b])
                    .zip(&factors)
                    .map(|((x, y), n)| (x + y) % n)
                    .collect();
                add[a * order + b] = coords_to_index(&factors, &c) as u8;
            }
            let n: Vec<u32> = coords[a]
                .iter()
                .zip(&factors)
                .map(|(x, n)| (n - x) % n)
                .collect();
            neg[a] = coords_to_index(&factors, &n) as u8;
            ord[a] = coords[a]
                .iter()
                .zip(&factors)
                .map(|(&x, &n)| n / gcd(x, n))
                .fold(1, lcm);
        }
        Group {
            factors,
            order,
            add,
            neg,
            ord,
        }
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn exponent(&self) -> u32 {
        self.factors.last().copied().unwrap_or(1)
    }

    pub fn is_cyclic(&self) -> bool {
        self.rank() <= 1
    }

    pub fn zero(&self) -> Element {
        Element::ZERO
    }

    #[inline]
    pub fn add(&self, a: Element, b: Element) -> Element {
        Element(self.add[a.index() * self.order + b.index()])
    }

    #[inline]
    pub fn neg(&self, a: Element) -> Element {
        Element(self.neg[a.index()])
    }

    /// `k·g`.
    pub fn mul(&self, k: u64, g: Element) -> Element {
        let k = k % self.order_of(g) as u64;
        (0..k).fold(self.zero(), |acc, _| self.add(acc, g))
    }

    #[inline]
    pub fn order_of(&self, g: Element) -> u32 {
        self.ord[g.index()]
    }

    /// `M(G) = 1 + Σ (n_i − 1)`.
    pub fn m_of(&self) -> u64 {
        1 + self.factors.iter().map(|&n| n as u64 - 1).sum::<u64>()
    }

    /// `1 + Σ_{g∈G} (ord(g) − 1)`, the right end of the Vol interval.
    pub fn total_budget(&self) -> u64 {
        1 + self.ord.iter().map(|&o| o as u64 - 1).sum::<u64>()
    }

    pub fn elements(&self) -> impl DoubleEndedIterator<Item = Element> + ExactSizeIterator {
        (0..self.order).map(|i| Element(i as u8))
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Element> {
        (1..self.order).map(|i| Element(i as u8))
    }

    /// Bitmask with one bit per element.
    pub fn full_mask(&self) -> u64 {
        if self.order == 64 {
            u64::MAX
        } else {
            (1u64 << self.order) - 1
        }
    }

    pub fn coords(&self, g: Element) -> Vec<u32> {
        index_to_coords(&self.factors, g.index())
    }

    pub fn element(&self, coords: &[u64]) -> Result<Element> {
        if coords.len() != self.rank() {
            return Err(Error::Parse {
                token: format!("{coords:?}"),
                reason: format!("expected {} coordinates", self.rank()),
            });
        }
        let mut reduced = Vec::with_capacity(coords.len());
        for (&c, &n) in coords.iter().zip(&self.factors) {
            if c >= n as u64 {
                return Err(Error::CoordinateOutOfRange {
                    value: c,
                    factor: n,
                });
            }
            reduced.push(c as u32);
        }
        Ok(Element(coords_to_index(&self.factors, &reduced) as u8))
    }

    /// Translates a set of elements (as a bitmask) by `g`.
    #[inline]
    pub fn translate_mask(&self, mut mask: u64, g: Element) -> u64 {
        if g.is_zero() {
            return mask;
        }
        let row = &self.add[g.index() * self.order..(g.index() + 1) * self.order];
        let mut out = 0u64;
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            out |= 1u64 << row[i];
        }
        out
    }

    pub fn format_element(&self, g: Element) -> String {
        match self.rank() {
            0 => "0".to_string(),
            1 => g.index().to_string(),
            _ => {
                let c: Vec<String> = self.coords(g).iter().map(u32::to_string).collect();
                format!("({})", c.join(","))
            }
        }
    }

    pub fn parse_element(&self, token: &str) -> Result<Element> {
        let bad = |reason: &str| Error::Parse {
            token: token.to_string(),
            reason: reason.to_string(),
        };
        let token = token.trim();
        if let Some(inner) = token.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            if inner.trim().is_empty() {
                return if self.rank() == 0 {
                    Ok(self.zero())
                } else {
                    Err(bad("empty tuple"))
                };
            }
            let coords = inner
                .split(',')
                .map(|c| c.trim().parse::<u64>().map_err(|_| bad("expected integer coordinates")))
                .collect::<Result<Vec<_>>>()?;
            if self.rank() < 2 && coords.len() == 1 {
                return self.element_from_residue(coords[0]);
            }
            if coords.len() != self.rank() {
                return Err(bad(&format!("expected {} coordinates", self.rank())));
            }
            return self.element(&coords);
        }
        let value: u64 = token.parse().map_err(|_| bad("expected an element"))?;
        if self.rank() >= 2 {
            return Err(bad("rank ≥ 2 elements must be written as (a,b,…)"));
        }
        self.element_from_residue(value)
    }

    fn element_from_residue(&self, value: u64) -> Result<Element> {
        match self.factors.first() {
            None if value == 0 => Ok(self.zero()),
            None => Err(Error::CoordinateOutOfRange { value, factor: 1 }),
            Some(&n) => self.element(&[value]).map_err(|_| Error::CoordinateOutOfRange {
                value,
                factor: n,
            }),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().map(u32::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Regroups arbitrary cyclic factors into invariant factors `n_1 | … | n_r`.
pub fn canonicalize(raw_factors: &[u64]) -> Result<Vec<u32>> {
    let mut by_prime: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for &n in raw_factors {
        if n < 2 {
            return Err(Error::InvalidFactor(n));
        }
        if n > u32::MAX as u64 {
            return Err(Error::GroupTooLarge {
                order: n,
                cap: DEFAULT_MAX_ORDER,
            });
        }
        for (p, e) in factorize(n) {
            by_prime.entry(p).or_default().push(e);
        }
    }
    let rank = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut factors = vec![1u64; rank];
    for (&p, exps) in by_prime.iter_mut() {
        exps.sort_unstable_by(|a, b| b.cmp(a));
        // Largest prime powers go to the largest invariant factor.
        for (i, &e) in exps.iter().enumerate() {
            factors[rank - 1 - i] *= p.pow(e);
        }
    }
    Ok(factors.into_iter().map(|n| n as u32).collect())
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn index_to_coords(factors: &[u32], mut index: usize) -> Vec<u32> {
    let mut coords = vec![0u32; factors.len()];
    for (c, &n) in coords.iter_mut().zip(factors).rev() {
        *c = (index % n as usize) as u32;
        index /= n as usize;
    }
    coords
}

fn coords_to_index(factors: &[u32], coords: &[u32]) -> usize {
    coords
        .iter()
        .zip(factors)
        .fold(0usize, |acc, (&c, &n)| acc * n as usize + c as usize)
}

pub(crate) fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Multiset of element orders of the direct sum of `raw`, by brute force
    /// over coordinate tuples of the raw presentation.
    fn raw_order_multiset(raw: &[u64]) -> Vec<u64> {
        let total: u64 = raw.iter().product();
        let mut orders = Vec::new();
        for mut idx in 0..total {
            let mut coords = Vec::new();
            for &n in raw.iter().rev() {
                coords.push(idx % n);
                idx /= n;
            }
            let mut k = 1;
            while !coords.iter().zip(raw.iter().rev()).all(|(&c, &n)| (k * c) % n == 0) {
                k += 1;
            }
            orders.push(k);
        }
        orders.sort_unstable();
        orders
    }

    fn order_multiset(g: &Group) -> Vec<u64> {
        let mut v: Vec<u64> = g.elements().map(|e| g.order_of(e) as u64).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(canonicalize(&[2, 3]).unwrap(), vec![6]);
        assert_eq!(canonicalize(&[6, 2]).unwrap(), vec![2, 6]);
        assert_eq!(canonicalize(&[4, 6]).unwrap(), vec![2, 12]);
        assert_eq!(canonicalize(&[]).unwrap(), Vec::<u32>::new());
        assert_eq!(canonicalize(&[1]), Err(Error::InvalidFactor(1)));
        assert_eq!(canonicalize(&[3, 0]), Err(Error::InvalidFactor(0)));
    }

    #[test]
    fn canonicalize_is_isomorphism_sound() {
        let cases: &[&[u64]] = &[
            &[4, 6],
            &[2, 3],
            &[6, 2],
            &[2, 2, 2],
            &[2, 4, 3],
            &[3, 3, 2],
            &[12, 4],
            &[5, 7],
            &[8, 2, 2],
            &[9, 3],
        ];
        for raw in cases {
            let g = Group::new(raw).unwrap();
            assert_eq!(order_multiset(&g), raw_order_multiset(raw), "{raw:?}");
            for w in g.factors().windows(2) {
                assert_eq!(w[1] % w[0], 0);
            }
            let again: Vec<u64> = g.factors().iter().map(|&n| n as u64).collect();
            assert_eq!(canonicalize(&again).unwrap(), g.factors());
        }
    }

    #[test]
    fn arithmetic_examples() {
        let c6 = Group::cyclic(6).unwrap();
        let e = Element::from_index;
        assert_eq!(c6.add(e(4), e(5)), e(3));
        let h = Group::new(&[2, 6]).unwrap();
        let g = h.element(&[1, 2]).unwrap();
        assert_eq!(h.coords(h.neg(g)), vec![1, 4]);
        for x in h.elements() {
            assert_eq!(h.add(x, h.zero()), x);
        }
    }

    #[test]
    fn order_examples() {
        let c6 = Group::cyclic(6).unwrap();
        assert_eq!(c6.order_of(Element::from_index(2)), 3);
        let h = Group::new(&[2, 6]).unwrap();
        let g = h.element(&[1, 3]).unwrap();
        assert_ne!(h.mul(1, g), h.zero());
        assert_eq!(h.mul(2, g), h.zero());
        assert_eq!(h.order_of(g), 2);
        assert_eq!(h.order_of(h.zero()), 1);
        for x in h.elements() {
            assert_eq!(h.exponent() % h.order_of(x), 0);
        }
    }

    #[test]
    fn m_and_total_budget() {
        assert_eq!(Group::new(&[2, 6]).unwrap().m_of(), 7);
        assert_eq!(Group::trivial().m_of(), 1);
        assert_eq!(Group::new(&[3, 3]).unwrap().m_of(), 5);
        assert_eq!(Group::cyclic(3).unwrap().total_budget(), 5);
        assert_eq!(Group::cyclic(2).unwrap().total_budget(), 2);
        assert_eq!(Group::new(&[2, 2]).unwrap().total_budget(), 4);
        for raw in [&[2u64][..], &[4], &[2, 2], &[3, 3], &[2, 4], &[7]] {
            let g = Group::new(raw).unwrap();
            assert!(g.m_of() <= g.total_budget());
        }
    }

    #[test]
    fn element_enumeration_order() {
        let c3 = Group::cyclic(3).unwrap();
        let v: Vec<String> = c3.elements().map(|e| c3.format_element(e)).collect();
        assert_eq!(v, vec!["0", "1", "2"]);
        let k = Group::new(&[2, 2]).unwrap();
        let v: Vec<Vec<u32>> = k.elements().map(|e| k.coords(e)).collect();
        assert_eq!(v, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let t = Group::trivial();
        let v: Vec<Vec<u32>> = t.elements().map(|e| t.coords(e)).collect();
        assert_eq!(v, vec![Vec::<u32>::new()]);
    }

    #[test]
    fn order_cap_and_parse() {
        assert!(matches!(
            Group::new(&[5, 13]),
            Err(Error::GroupTooLarge { order: 65, .. })
        ));
        assert!(Group::with_max_order(&[3, 3], 8).is_err());
        assert_eq!(Group::parse("3,3").unwrap().to_string(), "3,3");
        assert_eq!(Group::parse("6, 2").unwrap().to_string(), "2,6");
        assert_eq!(Group::parse("1").unwrap(), Group::trivial());
        assert!(Group::parse("3,x").is_err());
    }

    #[test]
    fn translate_mask_matches_addition() {
        let h = Group::new(&[2, 4]).unwrap();
        for g in h.elements() {
            for a in h.elements() {
                assert_eq!(h.translate_mask(a.bit(), g), h.add(a, g).bit());
            }
        }
    }
}

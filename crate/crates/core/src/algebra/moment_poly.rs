use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use super::{format_rational, parse_rational, Rational, Ring};
use crate::error::{Error, Result};

/// Monomial `∏ θ_p^{a[p-1]} ∏ θ̄_q^{b[q-1]}` with exponent vectors trimmed
/// of trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    a: Vec<u32>,
    b: Vec<u32>,
}

fn trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn weight(v: &[u32]) -> u64 {
    v.iter().enumerate().map(|(i, &e)| (i as u64 + 1) * e as u64).sum()
}

impl Monomial {
    pub fn new(a: Vec<u32>, b: Vec<u32>) -> Self {
        Monomial { a: trim(a), b: trim(b) }
    }

    pub fn one() -> Self {
        Monomial::default()
    }

    /// `θ_p` (p ≥ 1).
    pub fn theta(p: usize) -> Self {
        let mut a = vec![0; p];
        a[p - 1] = 1;
        Monomial::new(a, vec![])
    }

    /// `θ̄_q` (q ≥ 1).
    pub fn theta_bar(q: usize) -> Self {
        let mut b = vec![0; q];
        b[q - 1] = 1;
        Monomial::new(vec![], b)
    }

    pub fn a_exponents(&self) -> &[u32] {
        &self.a
    }

    pub fn b_exponents(&self) -> &[u32] {
        &self.b
    }

    /// Exponent of `θ_p`.
    pub fn a_exp(&self, p: usize) -> u32 {
        self.a.get(p - 1).copied().unwrap_or(0)
    }

    /// Exponent of `θ̄_q`.
    pub fn b_exp(&self, q: usize) -> u32 {
        self.b.get(q - 1).copied().unwrap_or(0)
    }

    pub fn a_weight(&self) -> u64 {
        weight(&self.a)
    }

    pub fn b_weight(&self) -> u64 {
        weight(&self.b)
    }

    /// Total number of trace factors.
    pub fn degree(&self) -> u64 {
        self.a.iter().chain(&self.b).map(|&e| e as u64).sum()
    }

    pub fn is_graded(&self) -> bool {
        self.a_weight() == self.b_weight()
    }

    pub fn mul(&self, rhs: &Monomial) -> Monomial {
        let zip = |x: &[u32], y: &[u32]| {
            (0..x.len().max(y.len()))
                .map(|i| x.get(i).unwrap_or(&0) + y.get(i).unwrap_or(&0))
                .collect()
        };
        Monomial { a: zip(&self.a, &rhs.a), b: zip(&self.b, &rhs.b) }
    }

    /// Exchange the two alphabets.
    pub fn swapped(&self) -> Monomial {
        Monomial { a: self.b.clone(), b: self.a.clone() }
    }

    /// Canonical key, e.g. `t2^1*t3^2|tb1^1`.
    pub fn key(&self) -> String {
        let part = |v: &[u32], name: &str| {
            v.iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, e)| format!("{name}{}^{e}", i + 1))
                .collect::<Vec<_>>()
                .join("*")
        };
        format!("{}|{}", part(&self.a, "t"), part(&self.b, "tb"))
    }

    pub fn parse_key(key: &str) -> Result<Monomial> {
        let bad = || Error::domain(format!("malformed monomial key {key:?}"));
        let (ta, tb) = key.split_once('|').ok_or_else(bad)?;
        let parse = |s: &str, prefix: &str| -> Result<Vec<u32>> {
            let mut v: Vec<u32> = Vec::new();
            if s.is_empty() {
                return Ok(v);
            }
            for factor in s.split('*') {
                let rest = factor.strip_prefix(prefix).ok_or_else(bad)?;
                let (idx, exp) = rest.split_once('^').ok_or_else(bad)?;
                let idx: usize = idx.parse().map_err(|_| bad())?;
                let exp: u32 = exp.parse().map_err(|_| bad())?;
                if idx == 0 || exp == 0 {
                    return Err(bad());
                }
                if v.len() < idx {
                    v.resize(idx, 0);
                }
                if v[idx - 1] != 0 {
                    return Err(bad());
                }
                v[idx - 1] = exp;
            }
            Ok(v)
        };
        let m = Monomial::new(parse(ta, "t")?, parse(tb, "tb")?);
        if m.key() != key {
            return Err(bad());
        }
        Ok(m)
    }
}

impl Ord for Monomial {
    /// Graded-lexicographic: by a-weight, then b-weight, then exponents.
    fn cmp(&self, other: &Self) -> Ordering {
        self.a_weight()
            .cmp(&other.a_weight())
            .then_with(|| self.b_weight().cmp(&other.b_weight()))
            .then_with(|| self.a.cmp(&other.a))
            .then_with(|| self.b.cmp(&other.b))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

/// Polynomial in the moments `θ_p`, `θ̄_q` with coefficients in `C`.
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct MomentPoly<C> {
    terms: BTreeMap<Monomial, C>,
}

/// Moment polynomial with exact rational coefficients.
pub type GradedPolynomial = MomentPoly<Rational>;

impl<C: Ring> Default for MomentPoly<C> {
    fn default() -> Self {
        MomentPoly { terms: BTreeMap::new() }
    }
}

impl<C: Ring> MomentPoly<C> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::new();
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        Self::from_terms([(m, c)])
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(Monomial::one(), c)
    }

    pub fn theta(p: usize) -> Self {
        Self::monomial(Monomial::theta(p), C::one())
    }

    pub fn theta_bar(q: usize) -> Self {
        Self::monomial(Monomial::theta_bar(q), C::one())
    }

    pub fn add_term(&mut self, m: Monomial, c: &C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// Terms in canonical (graded-lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every monomial has a-weight equal to b-weight.
    pub fn is_graded(&self) -> bool {
        self.terms.keys().all(Monomial::is_graded)
    }

    pub fn map_coeffs<D: Ring>(&self, f: impl Fn(&C) -> D) -> MomentPoly<D> {
        MomentPoly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Self {
        MomentPoly {
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Keep only monomials of total weight (a-weight + b-weight) at most `w`.
    pub fn truncate_weight(&self, w: u64) -> Self {
        self.filter(|m| m.a_weight() + m.b_weight() <= w)
    }

    pub fn swapped(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.swapped(), c.clone())))
    }

    /// Product truncated to total weight at most `w`.
    pub fn mul_truncated(&self, rhs: &Self, w: u64) -> Self {
        let mut out = Self::new();
        for (ma, ca) in &self.terms {
            let wa = ma.a_weight() + ma.b_weight();
            if wa > w {
                continue;
            }
            for (mb, cb) in &rhs.terms {
                if wa + mb.a_weight() + mb.b_weight() > w {
                    continue;
                }
                out.add_term(ma.mul(mb), &ca.mul(cb));
            }
        }
        out
    }

    /// Partial derivative in `θ_p`.
    pub fn d_theta(&self, p: usize) -> Self {
        self.derivative(p, true)
    }

    /// Partial derivative in `θ̄_q`.
    pub fn d_theta_bar(&self, q: usize) -> Self {
        self.derivative(q, false)
    }

    fn derivative(&self, p: usize, a_side: bool) -> Self {
        let mut out = Self::new();
        for (m, c) in &self.terms {
            let e = if a_side { m.a_exp(p) } else { m.b_exp(p) };
            if e == 0 {
                continue;
            }
            let (mut a, mut b) = (m.a.clone(), m.b.clone());
            if a_side {
                a[p - 1] -= 1;
            } else {
                b[p - 1] -= 1;
            }
            out.add_term(Monomial::new(a, b), &c.scale(&super::int(e as i64)));
        }
        out
    }

    /// Substitute every variable by a polynomial: `θ_p -> a_sub(p)`, `θ̄_q -> b_sub(q)`.
    pub fn substitute(&self, a_sub: impl Fn(usize) -> Self, b_sub: impl Fn(usize) -> Self) -> Self {
        let mut a_powers: BTreeMap<(usize, u32), Self> = BTreeMap::new();
        let mut b_powers: BTreeMap<(usize, u32), Self> = BTreeMap::new();
        let mut out = Self::new();
        for (m, c) in &self.terms {
            let mut acc = Self::constant(c.clone());
            for (i, &e) in m.a.iter().enumerate().filter(|(_, &e)| e > 0) {
                let factor = a_powers.entry((i + 1, e)).or_insert_with(|| a_sub(i + 1).pow(e));
                acc = acc.mul(factor);
            }
            for (i, &e) in m.b.iter().enumerate().filter(|(_, &e)| e > 0) {
                let factor = b_powers.entry((i + 1, e)).or_insert_with(|| b_sub(i + 1).pow(e));
                acc = acc.mul(factor);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Evaluate at numeric moments (`theta[p-1]`, `theta_bar[q-1]`, missing entries zero).
    pub fn evaluate(&self, theta: &[C], theta_bar: &[C]) -> C {
        let get = |v: &[C], i: usize| v.get(i).cloned().unwrap_or_else(C::zero);
        let mut out = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.a.iter().enumerate().filter(|(_, &e)| e > 0) {
                t = t.mul(&get(theta, i).pow(e));
            }
            for (i, &e) in m.b.iter().enumerate().filter(|(_, &e)| e > 0) {
                t = t.mul(&get(theta_bar, i).pow(e));
            }
            out = out.add(&t);
        }
        out
    }
}

impl MomentPoly<Rational> {
    /// Evaluate at floating-point moments.
    pub fn evaluate_f64(&self, theta: &[f64], theta_bar: &[f64]) -> f64 {
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = super::rational_to_f64(c);
                for (i, &e) in m.a.iter().enumerate() {
                    t *= get(theta, i).powi(e as i32);
                }
                for (i, &e) in m.b.iter().enumerate() {
                    t *= get(theta_bar, i).powi(e as i32);
                }
                t
            })
            .sum()
    }

    /// Canonical textual terms `(key, p/q)` in canonical order.
    pub fn to_text_terms(&self) -> Vec<(String, String)> {
        self.terms.iter().map(|(m, c)| (m.key(), format_rational(c))).collect()
    }

    pub fn from_text_terms<'a>(terms: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut p = Self::new();
        for (k, v) in terms {
            let m = Monomial::parse_key(k)?;
            if p.terms.contains_key(&m) {
                return Err(Error::domain(format!("duplicate monomial {k:?}")));
            }
            let c = parse_rational(v)?;
            if c == num::Zero::zero() {
                return Err(Error::domain(format!("zero coefficient stored for {k:?}")));
            }
            p.terms.insert(m, c);
        }
        Ok(p)
    }
}

impl<C: Ring> Ring for MomentPoly<C> {
    fn zero() -> Self {
        Self::new()
    }

    fn one() -> Self {
        Self::constant(C::one())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(&self, rhs: &Self) -> Self {
        let (mut big, small) = if self.len() >= rhs.len() { (self.clone(), rhs) } else { (rhs.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c);
        }
        big
    }

    fn neg(&self) -> Self {
        self.map_coeffs(C::neg)
    }

    fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), &ca.mul(cb));
            }
        }
        out
    }

    fn scale(&self, c: &Rational) -> Self {
        self.map_coeffs(|x| x.scale(c))
    }
}

impl<C: Ring + fmt::Display> fmt::Display for MomentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("({c})·[{}]", m.key())).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<C: Ring> fmt::Debug for MomentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().map(|(m, c)| (m.key(), c))).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, rat};

    #[test]
    fn key_round_trip() {
        let m = Monomial::new(vec![0, 1, 2], vec![1]);
        assert_eq!(m.key(), "t2^1*t3^2|tb1^1");
        assert_eq!(Monomial::parse_key("t2^1*t3^2|tb1^1").unwrap(), m);
        assert_eq!(Monomial::one().key(), "|");
        assert!(Monomial::parse_key("t3^2*t2^1|").is_err());
        assert!(Monomial::parse_key("t2^0|").is_err());
        assert!(Monomial::parse_key("t2").is_err());
    }

    #[test]
    fn graded_lex_order() {
        let lo = Monomial::new(vec![1], vec![1]);
        let hi = Monomial::new(vec![0, 1], vec![0, 1]);
        assert!(lo < hi);
        let x = Monomial::new(vec![2], vec![0, 1]);
        let y = Monomial::new(vec![0, 1], vec![2]);
        assert!(x > y);
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut p = GradedPolynomial::theta(1);
        p.add_term(Monomial::theta(1), &int(-1));
        assert!(p.is_empty());
    }

    #[test]
    fn derivative_and_evaluate() {
        // p = 3 θ1^2 θ̄2 + θ2
        let p = GradedPolynomial::from_terms([
            (Monomial::new(vec![2], vec![0, 1]), int(3)),
            (Monomial::theta(2), int(1)),
        ]);
        let dp = p.d_theta(1);
        assert_eq!(dp.coeff(&Monomial::new(vec![1], vec![0, 1])), int(6));
        assert_eq!(p.evaluate(&[rat(1, 2), int(5)], &[int(0), int(2)]), rat(3, 2) + int(5));
    }
}

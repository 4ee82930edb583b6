//! Exact arithmetic: rationals, rational functions of a formal size `N`,
//! polynomials in the moment alphabet and truncated power series.
//!
//! Every carrier implements [`Ring`], so series and determinants can be
//! written once and reused over any of them.

mod moment_poly;
mod ratn;
mod series;

pub use moment_poly::{GradedPolynomial, Monomial, MomentPoly};
pub use ratn::{RatN, UPoly};
pub use series::{series_log, SeriesVar, TruncatedSeries};

use std::fmt::Debug;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Commutative ring with a Q-algebra structure.
///
/// Methods take references and return fresh values; every carrier is an
/// immutable value type.
pub trait Ring: Clone + PartialEq + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// Multiply by a rational scalar.
    fn scale(&self, c: &Rational) -> Self;

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    fn from_rational(c: &Rational) -> Self {
        Self::one().scale(c)
    }

    /// Zero with the same shape as `self` (matters for truncated series).
    fn zero_like(&self) -> Self {
        Self::zero()
    }

    /// One with the same shape as `self`.
    fn one_like(&self) -> Self {
        Self::one()
    }

    fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

impl Ring for Rational {
    fn zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn one() -> Self {
        <Rational as One>::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scale(&self, c: &Rational) -> Self {
        self * c
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn from_rational(c: &Rational) -> Self {
        c.clone()
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Canonical text form: `p/q`, or `p` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::domain(format!("not a rational number: {s:?}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse_int(q)?;
            if q.is_zero() {
                return Err(Error::domain(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(parse_int(p)?, q))
        }
        None => Ok(Rational::from_integer(parse_int(s)?)),
    }
}

/// Exact conversion of a finite float.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::domain(format!("non-finite value {x}")))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// Division-free determinant by expansion over column subsets.
///
/// Exact over any commutative ring, including truncated series where
/// pivoting division would lose orders. Cost is `O(2^n n)` ring products.
pub fn determinant<R: Ring>(m: &[Vec<R>]) -> R {
    let n = m.len();
    if n == 0 {
        return R::one();
    }
    let (zero, one) = (m[0][0].zero_like(), m[0][0].one_like());
    assert!(n <= 20, "determinant: matrix too large for subset expansion");
    debug_assert!(m.iter().all(|row| row.len() == n));
    // minors[mask] = det of rows n-|mask|.. against the columns in mask
    let mut minors: Vec<Option<R>> = vec![None; 1 << n];
    minors[0] = Some(one);
    let mut masks: Vec<usize> = (1..(1usize << n)).collect();
    masks.sort_by_key(|mask| mask.count_ones());
    for mask in masks {
        let row = n - mask.count_ones() as usize;
        let mut acc = zero.clone();
        let mut sign_pos = true;
        for (col, entry) in m[row].iter().enumerate() {
            if mask & (1 << col) == 0 {
                continue;
            }
            let rest = minors[mask & !(1 << col)].as_ref().expect("smaller minor computed");
            if !entry.is_zero() && !rest.is_zero() {
                let term = entry.mul(rest);
                acc = if sign_pos { acc.add(&term) } else { acc.sub(&term) };
            }
            sign_pos = !sign_pos;
        }
        minors[mask] = Some(acc);
    }
    minors[(1 << n) - 1].take().expect("full determinant")
}

/// Submatrix with the listed rows and columns removed.
pub fn minor<R: Ring>(m: &[Vec<R>], drop_rows: &[usize], drop_cols: &[usize]) -> Vec<Vec<R>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| !drop_rows.contains(i))
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(j, _)| !drop_cols.contains(j))
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

/// `θ_p -> Σ_{q=0}^{p} C(p,q) θ_q (-c)^{p-q}` with `θ_0 = 1`, as a polynomial.
fn shifted_moment(p: usize, c: &GradedPolynomial, bar: bool) -> GradedPolynomial {
    let var = |q: usize| if bar { GradedPolynomial::theta_bar(q) } else { GradedPolynomial::theta(q) };
    let minus_c = c.neg();
    (0..=p).fold(GradedPolynomial::zero(), |acc, q| {
        let base = if q == 0 { GradedPolynomial::one() } else { var(q) };
        let term = base.mul(&minus_c.pow((p - q) as u32));
        acc.add(&term.scale(&Rational::from_integer(binomial(p as u64, q as u64))))
    })
}

/// Moments of the shifted spectra `a - θ₁`, `b - θ̄₁`: every `θ_p` becomes
/// `Σ_q C(p,q) θ_q (-θ₁)^{p-q}` and likewise for `θ̄`.
pub fn shift_moments(p: &GradedPolynomial, theta1: &Rational, theta_bar1: &Rational) -> GradedPolynomial {
    shift_moments_by(p, &GradedPolynomial::constant(theta1.clone()), &GradedPolynomial::constant(theta_bar1.clone()))
}

/// [`shift_moments`] with polynomial shifts, e.g. the formal `θ₁` and `θ̄₁`
/// themselves (which makes the result traceless).
pub fn shift_moments_by(p: &GradedPolynomial, c: &GradedPolynomial, c_bar: &GradedPolynomial) -> GradedPolynomial {
    p.substitute(|q| shifted_moment(q, c, false), |q| shifted_moment(q, c_bar, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_text_form() {
        assert_eq!(format_rational(&rat(3, 6)), "1/2");
        assert_eq!(format_rational(&rat(-4, 2)), "-2");
        assert_eq!(parse_rational("-10/4").unwrap(), rat(-5, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn determinant_small_cases() {
        let m = vec![vec![int(1), int(2)], vec![int(3), int(4)]];
        assert_eq!(determinant(&m), int(-2));
        let m3 = vec![
            vec![int(2), int(0), int(1)],
            vec![int(1), int(3), int(2)],
            vec![int(1), int(1), int(1)],
        ];
        // 2(3-2) - 0 + 1(1-3)
        assert_eq!(determinant(&m3), int(0));
        assert_eq!(determinant::<Rational>(&[]), int(1));
    }

    #[test]
    fn binomials_and_factorials() {
        assert_eq!(factorial(6), BigInt::from(720));
        assert_eq!(binomial(6, 2), BigInt::from(15));
        assert_eq!(binomial(2, 3), BigInt::zero());
    }

    #[test]
    fn shift_examples() {
        let t2 = GradedPolynomial::theta(2);
        let formal = shift_moments_by(&t2, &GradedPolynomial::theta(1), &GradedPolynomial::theta_bar(1));
        let expected = t2.sub(&GradedPolynomial::theta(1).pow(2));
        assert_eq!(formal, expected);
        let p = GradedPolynomial::theta(3).mul(&GradedPolynomial::theta_bar(2));
        assert_eq!(shift_moments(&p, &int(0), &int(0)), p);
        // θ₁ shifted by 1/2 is θ₁ - 1/2
        let t1 = shift_moments(&GradedPolynomial::theta(1), &rat(1, 2), &int(0));
        assert_eq!(t1, GradedPolynomial::theta(1).sub(&GradedPolynomial::constant(rat(1, 2))));
    }
}

use std::fmt;

use num::{One, Signed};

use super::{format_rational, Rational, Ring};

fn unit() -> Rational {
    <Rational as One>::one()
}

/// Dense univariate polynomial in the formal size `N`, lowest degree first.
/// Trailing zero coefficients are never stored; the zero polynomial is empty.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct UPoly(Vec<Rational>);

impl UPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly(coeffs)
    }

    pub fn constant(c: Rational) -> Self {
        UPoly::new(vec![c])
    }

    /// The monomial `N`.
    pub fn var() -> Self {
        UPoly(vec![<Rational as Ring>::zero(), unit()])
    }

    /// `N + c`.
    pub fn linear(c: Rational) -> Self {
        UPoly::new(vec![c, unit()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.0.last()
    }

    pub fn add(&self, rhs: &UPoly) -> UPoly {
        let n = self.0.len().max(rhs.0.len());
        let zero = <Rational as Ring>::zero();
        UPoly::new(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&zero) + rhs.0.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn neg(&self) -> UPoly {
        UPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, rhs: &UPoly) -> UPoly {
        if self.is_zero() || rhs.is_zero() {
            return UPoly::default();
        }
        let mut out = vec![<Rational as Ring>::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly::new(out)
    }

    pub fn scale(&self, c: &Rational) -> UPoly {
        if c.is_zero() {
            return UPoly::default();
        }
        UPoly(self.0.iter().map(|x| x * c).collect())
    }

    /// Scale so the leading coefficient is 1.
    pub fn monic(&self) -> UPoly {
        match self.leading() {
            Some(lc) if !lc.is_one() => self.scale(&lc.recip()),
            _ => self.clone(),
        }
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lc_inv = d.0[dd].recip();
        let mut rem = self.0.clone();
        if rem.len() <= dd {
            return (UPoly::default(), self.clone());
        }
        let mut quot = vec![<Rational as Ring>::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] * &lc_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dj) in d.0.iter().enumerate() {
                rem[k + j] -= &c * dj;
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (UPoly::new(quot), UPoly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, rhs: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.monic(), rhs.monic());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0.iter().rev().fold(<Rational as Ring>::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.0
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + super::rational_to_f64(c))
    }

    fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0[0].is_one()
    }
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            match k {
                0 => write!(f, "{}", format_rational(&mag))?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{}*", format_rational(&mag))?;
                    }
                    if k == 1 {
                        write!(f, "N")?
                    } else {
                        write!(f, "N^{k}")?
                    }
                }
            }
        }
        Ok(())
    }
}

/// Exact rational function of the formal size `N`.
///
/// Always reduced: numerator and denominator are coprime and the denominator
/// is monic, so structural equality is equality of functions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatN {
    num: UPoly,
    den: UPoly,
}

impl RatN {
    pub fn new(num: UPoly, den: UPoly) -> Self {
        assert!(!den.is_zero(), "RatN with zero denominator");
        if num.is_zero() {
            return RatN::zero();
        }
        let g = num.gcd(&den);
        let (num, den) = if g.degree() == Some(0) {
            (num, den)
        } else {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        };
        let lc = den.leading().expect("nonzero").clone();
        if lc.is_one() {
            RatN { num, den }
        } else {
            let inv = lc.recip();
            RatN { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn from_poly(p: UPoly) -> Self {
        RatN { num: p, den: UPoly::constant(unit()) }
    }

    pub fn constant(c: Rational) -> Self {
        RatN::from_poly(UPoly::constant(c))
    }

    /// `N^k`.
    pub fn n_pow(k: usize) -> Self {
        let mut c = vec![<Rational as Ring>::zero(); k + 1];
        c[k] = unit();
        RatN::from_poly(UPoly::new(c))
    }

    pub fn numer(&self) -> &UPoly {
        &self.num
    }

    pub fn denom(&self) -> &UPoly {
        &self.den
    }

    /// Degree at infinity: `deg num - deg den`; `None` for zero.
    pub fn degree(&self) -> Option<i64> {
        Some(self.num.degree()? as i64 - self.den.degree().unwrap_or(0) as i64)
    }

    pub fn recip(&self) -> RatN {
        assert!(!self.num.is_zero(), "reciprocal of zero");
        RatN::new(self.den.clone(), self.num.clone())
    }

    /// Value at a rational point, `None` at a pole.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }

    /// Expansion at `N -> infinity`: returns `(top, c)` with
    /// `self = c[0] N^top + c[1] N^(top-1) + ...`, first `terms` coefficients.
    pub fn laurent_at_infinity(&self, terms: usize) -> Option<(i64, Vec<Rational>)> {
        let top = self.degree()?;
        let p = self.num.coeffs();
        let q = self.den.coeffs();
        let (dp, dq) = (p.len() - 1, q.len() - 1);
        // Reverse both: P(N) = N^dp p~(1/N), Q(N) = N^dq q~(1/N) with q~(0) = 1.
        let pr = |k: usize| if k <= dp { p[dp - k].clone() } else { <Rational as Ring>::zero() };
        let qr = |k: usize| if k <= dq { q[dq - k].clone() } else { <Rational as Ring>::zero() };
        let mut out: Vec<Rational> = Vec::with_capacity(terms);
        for k in 0..terms {
            let mut c = pr(k);
            for j in 1..=k {
                c -= qr(j) * &out[k - j];
            }
            out.push(c);
        }
        Some((top, out))
    }

    /// Coefficient of `N^power` in the expansion at infinity.
    pub fn coefficient_at_infinity(&self, power: i64) -> Rational {
        match self.degree() {
            None => <Rational as Ring>::zero(),
            Some(top) if power > top => <Rational as Ring>::zero(),
            Some(top) => {
                let k = (top - power) as usize;
                self.laurent_at_infinity(k + 1).expect("nonzero").1[k].clone()
            }
        }
    }
}

impl Ring for RatN {
    fn zero() -> Self {
        RatN { num: UPoly::default(), den: UPoly::constant(unit()) }
    }

    fn one() -> Self {
        RatN::constant(unit())
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn add(&self, rhs: &Self) -> Self {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            if self.den.is_one() {
                return RatN::from_poly(self.num.add(&rhs.num));
            }
            return RatN::new(self.num.add(&rhs.num), self.den.clone());
        }
        let g = self.den.gcd(&rhs.den);
        let lhs_cof = rhs.den.div_rem(&g).0;
        let rhs_cof = self.den.div_rem(&g).0;
        let num = self.num.mul(&lhs_cof).add(&rhs.num.mul(&rhs_cof));
        RatN::new(num, self.den.mul(&lhs_cof))
    }

    fn neg(&self) -> Self {
        RatN { num: self.num.neg(), den: self.den.clone() }
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return RatN::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatN::from_poly(self.num.mul(&rhs.num));
        }
        // cross-cancel before multiplying
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let (a, d) = (self.num.div_rem(&g1).0, rhs.den.div_rem(&g1).0);
        let (b, c) = (rhs.num.div_rem(&g2).0, self.den.div_rem(&g2).0);
        let num = a.mul(&b);
        let den = c.mul(&d);
        let lc = den.leading().expect("nonzero").recip();
        RatN { num: num.scale(&lc), den: den.scale(&lc) }
    }

    fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return RatN::zero();
        }
        RatN { num: self.num.scale(c), den: self.den.clone() }
    }
}

impl fmt::Debug for RatN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, rat};

    fn poly(c: &[i64]) -> UPoly {
        UPoly::new(c.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn reduction_is_canonical() {
        // (N^2 - 1)/(2N + 2) == (N - 1)/2
        let a = RatN::new(poly(&[-1, 0, 1]), poly(&[2, 2]));
        let b = RatN::new(poly(&[-1, 1]), poly(&[2]));
        assert_eq!(a, b);
        assert_eq!(a.denom(), &poly(&[1]));
        // sum route: 1/(N-1) - 1/(N+1) == 2/(N^2-1)
        let s = RatN::new(poly(&[1]), poly(&[-1, 1])).sub(&RatN::new(poly(&[1]), poly(&[1, 1])));
        assert_eq!(s, RatN::new(poly(&[2]), poly(&[-1, 0, 1])));
    }

    #[test]
    fn laurent_expansion() {
        // N^4 / (2(N^2 - 1)) = N^2/2 + 1/2 + N^-2/2 + ...
        let r = RatN::new(poly(&[0, 0, 0, 0, 1]), poly(&[-2, 0, 2]));
        let (top, c) = r.laurent_at_infinity(5).unwrap();
        assert_eq!(top, 2);
        assert_eq!(c, vec![rat(1, 2), int(0), rat(1, 2), int(0), rat(1, 2)]);
        assert_eq!(r.coefficient_at_infinity(0), rat(1, 2));
        assert_eq!(r.coefficient_at_infinity(3), int(0));
    }

    #[test]
    fn eval_and_poles() {
        let r = RatN::new(poly(&[0, 1]), poly(&[-1, 1]));
        assert_eq!(r.eval(&int(3)), Some(rat(3, 2)));
        assert_eq!(r.eval(&int(1)), None);
    }
}

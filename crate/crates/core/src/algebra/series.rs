use super::{int, Rational, Ring};
use crate::error::{Error, Result};

/// Expansion variable of a truncated series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeriesVar {
    /// `1/s`
    InvS,
    /// `1/ħ`
    InvHbar,
}

/// Power series `Σ_{k=0}^{order} c_k x^k` truncated at a fixed order.
///
/// Arithmetic never reads beyond the truncation; binary operations between
/// series of different orders truncate to the smaller one.
#[derive(Clone, PartialEq, Debug)]
pub struct TruncatedSeries<C> {
    var: SeriesVar,
    coeffs: Vec<C>,
}

impl<C: Ring> TruncatedSeries<C> {
    /// Series from coefficients; missing high orders are zero, extra ones dropped.
    pub fn new(var: SeriesVar, order: usize, mut coeffs: Vec<C>) -> Self {
        coeffs.resize(order + 1, C::zero());
        TruncatedSeries { var, coeffs }
    }

    pub fn zero(var: SeriesVar, order: usize) -> Self {
        Self::new(var, order, vec![])
    }

    pub fn constant(var: SeriesVar, order: usize, c: C) -> Self {
        Self::new(var, order, vec![c])
    }

    /// The monomial `x^k` (zero when `k` exceeds the order).
    pub fn monomial(var: SeriesVar, order: usize, k: usize, c: C) -> Self {
        let mut s = Self::zero(var, order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn var(&self) -> SeriesVar {
        self.var
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &C {
        &self.coeffs[k]
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.var, order, self.coeffs.iter().take(order + 1).cloned().collect())
    }

    pub fn map<D: Ring>(&self, f: impl Fn(&C) -> D) -> TruncatedSeries<D> {
        TruncatedSeries { var: self.var, coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// Multiply by `x^k`, dropping what falls past the order.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut c = vec![C::zero(); k.min(self.coeffs.len())];
        c.extend(self.coeffs.iter().take(self.coeffs.len().saturating_sub(k)).cloned());
        Self::new(self.var, self.order(), c)
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn check_var(&self, rhs: &Self) {
        assert_eq!(self.var, rhs.var, "mixing series in different variables");
    }

    /// `log(self)`; the constant term must be 1.
    ///
    /// Uses `n L_n = n c_n - Σ_{k=1}^{n-1} k L_k c_{n-k}`, which only divides
    /// by integers.
    pub fn log(&self) -> Result<Self> {
        if self.coeffs[0] != C::one() {
            return Err(Error::domain("series_log: constant term is not 1"));
        }
        let order = self.order();
        let mut out: Vec<C> = vec![C::zero(); order + 1];
        for n in 1..=order {
            let mut acc = self.coeffs[n].scale(&int(n as i64));
            for k in 1..n {
                if out[k].is_zero() || self.coeffs[n - k].is_zero() {
                    continue;
                }
                acc = acc.sub(&out[k].mul(&self.coeffs[n - k]).scale(&int(k as i64)));
            }
            out[n] = acc.scale(&Rational::new(1.into(), (n as i64).into()));
        }
        Ok(TruncatedSeries { var: self.var, coeffs: out })
    }

    /// `exp(self)`; the constant term must be 0.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::domain("series_exp: constant term is not 0"));
        }
        let order = self.order();
        let mut out: Vec<C> = vec![C::zero(); order + 1];
        out[0] = C::one();
        for n in 1..=order {
            let mut acc = C::zero();
            for k in 1..=n {
                if self.coeffs[k].is_zero() || out[n - k].is_zero() {
                    continue;
                }
                acc = acc.add(&self.coeffs[k].mul(&out[n - k]).scale(&int(k as i64)));
            }
            out[n] = acc.scale(&Rational::new(1.into(), (n as i64).into()));
        }
        Ok(TruncatedSeries { var: self.var, coeffs: out })
    }
}

/// Logarithm of a truncated series with unit constant term.
pub fn series_log<C: Ring>(x: &TruncatedSeries<C>) -> Result<TruncatedSeries<C>> {
    x.log()
}

impl<C: Ring> Ring for TruncatedSeries<C> {
    /// Ring constants are order-0 placeholders; arithmetic with a longer series
    /// truncates to order 0, so build constants with [`TruncatedSeries::constant`]
    /// when the order matters.
    fn zero() -> Self {
        TruncatedSeries { var: SeriesVar::InvHbar, coeffs: vec![C::zero()] }
    }

    fn one() -> Self {
        TruncatedSeries { var: SeriesVar::InvHbar, coeffs: vec![C::one()] }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(C::is_zero)
    }

    fn zero_like(&self) -> Self {
        Self::zero(self.var, self.order())
    }

    fn one_like(&self) -> Self {
        Self::constant(self.var, self.order(), C::one())
    }

    fn add(&self, rhs: &Self) -> Self {
        self.check_var(rhs);
        let n = self.coeffs.len().min(rhs.coeffs.len());
        TruncatedSeries { var: self.var, coeffs: (0..n).map(|k| self.coeffs[k].add(&rhs.coeffs[k])).collect() }
    }

    fn neg(&self) -> Self {
        self.map(C::neg)
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.check_var(rhs);
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut out = vec![C::zero(); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(n - i).enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        TruncatedSeries { var: self.var, coeffs: out }
    }

    fn scale(&self, c: &Rational) -> Self {
        self.map(|x| x.scale(c))
    }
}

//! Tau functions as moment-matrix determinants in truncated `1/ħ` series,
//! and order-by-order checks of the Toda lattice equation.
//!
//! With `x = 1/ħ` and `exp(x Σ_q t_q u^q) = Σ_k P_k u^k`,
//! `M_ij = Σ_m x^m/m! P_{m-j} P̄_{m-i}` and `τ_N = det (M_ij)_{0≤i,j<N}`.
//! Since `∂M_ij/∂t_1 = x M_{i,j+1}` and `∂M_ij/∂t̄_1 = x M_{i+1,j}`, derivatives
//! never leave the family of entries and are carried in a dual-number ring.

use crate::algebra::{determinant, int, minor, parse_rational, Rational, Ring, SeriesVar, TruncatedSeries};
use crate::error::{Error, Result};

pub type HbarSeries = TruncatedSeries<Rational>;

/// How the times scale with `ħ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeScaling {
    /// `t_q` are fixed numbers; the exponent is `x Σ t_q u^q`.
    Plain,
    /// `t_q = ħ c_q` with the stored numbers being `c_q`, so the exponent is
    /// `Σ c_q u^q`. This is the spectral case `t_q = ħ Σ a^q / q`.
    PerHbar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TodaTimes {
    /// `t[q-1] = t_q`
    pub t: Vec<Rational>,
    pub t_bar: Vec<Rational>,
    pub scaling: TimeScaling,
}

impl TodaTimes {
    pub fn zero() -> Self {
        TodaTimes { t: vec![], t_bar: vec![], scaling: TimeScaling::Plain }
    }

    pub fn plain(t: Vec<Rational>, t_bar: Vec<Rational>) -> Self {
        TodaTimes { t, t_bar, scaling: TimeScaling::Plain }
    }

    /// Times of eigenvalue data: `t_q = ħ Σ_i a_i^q / q`, likewise for `b`.
    pub fn from_spectra(a: &[Rational], b: &[Rational], q_max: usize) -> Self {
        let sums = |v: &[Rational]| -> Vec<Rational> {
            (1..=q_max)
                .map(|q| v.iter().map(|x| x.pow(q as i32)).sum::<Rational>() / int(q as i64))
                .collect()
        };
        TodaTimes { t: sums(a), t_bar: sums(b), scaling: TimeScaling::PerHbar }
    }

    /// Parse `t1=1/3,tb1=1/5,t2=-2`; unnamed times are zero.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut times = TodaTimes::zero();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Error::domain(format!("expected name=value, got {item:?}")))?;
            let value = parse_rational(value)?;
            let (target, index) = if let Some(q) = name.trim().strip_prefix("tb") {
                (&mut times.t_bar, q)
            } else if let Some(q) = name.trim().strip_prefix('t') {
                (&mut times.t, q)
            } else {
                return Err(Error::domain(format!("unknown time {name:?}")));
            };
            let q: usize = index
                .parse()
                .ok()
                .filter(|&q| q >= 1)
                .ok_or_else(|| Error::domain(format!("bad time index in {name:?}")))?;
            if target.len() < q {
                target.resize(q, int(0));
            }
            target[q - 1] = value;
        }
        Ok(times)
    }
}

/// `P_0..P_{count-1}` as series in `x`.
fn schur_p(times: &[Rational], scaling: TimeScaling, count: usize, order: usize) -> Vec<HbarSeries> {
    let var = SeriesVar::InvHbar;
    let mut p: Vec<HbarSeries> = vec![HbarSeries::constant(var, order, int(1))];
    for k in 1..count {
        let mut acc = HbarSeries::zero(var, order);
        for (qi, tq) in times.iter().enumerate().take(k) {
            let q = qi + 1;
            if tq.is_zero() {
                continue;
            }
            let mut term = p[k - q].scale(&(tq * int(q as i64)));
            if scaling == TimeScaling::Plain {
                term = term.shift_up(1);
            }
            acc = acc.add(&term);
        }
        p.push(acc.scale(&Rational::new(1.into(), (k as i64).into())));
    }
    p
}

/// Entries `M_ij` for `i, j < size`, computed from shared `P` tables.
struct MomentTable {
    entries: Vec<Vec<HbarSeries>>,
}

impl MomentTable {
    fn new(times: &TodaTimes, size: usize, order: usize) -> Self {
        let p = schur_p(&times.t, times.scaling, order + 1, order);
        let pb = schur_p(&times.t_bar, times.scaling, order + 1, order);
        let var = SeriesVar::InvHbar;
        let mut entries = vec![vec![HbarSeries::zero(var, order); size]; size];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let mut acc = HbarSeries::zero(var, order);
                let mut inv_fact = int(1);
                for m in 0..=order {
                    if m > 0 {
                        inv_fact /= int(m as i64);
                    }
                    if m < i.max(j) {
                        continue;
                    }
                    let term = p[m - j].mul(&pb[m - i]).shift_up(m).scale(&inv_fact);
                    acc = acc.add(&term);
                }
                *entry = acc;
            }
        }
        MomentTable { entries }
    }

    fn get(&self, i: usize, j: usize) -> &HbarSeries {
        &self.entries[i][j]
    }
}

/// `M_ij` through `x^order`.
pub fn moment_entry(i: usize, j: usize, times: &TodaTimes, order: usize) -> HbarSeries {
    MomentTable::new(times, i.max(j) + 1, order).get(i, j).clone()
}

/// `τ_N`; `τ_0 = 1`.
pub fn tau(n: usize, times: &TodaTimes, order: usize) -> HbarSeries {
    if n == 0 {
        return HbarSeries::constant(SeriesVar::InvHbar, order, int(1));
    }
    let table = MomentTable::new(times, n, order);
    let m: Vec<Vec<HbarSeries>> = (0..n).map(|i| (0..n).map(|j| table.get(i, j).clone()).collect()).collect();
    determinant(&m)
}

/// `c + d δ + e ε + f δε` with `δ² = ε² = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<R> {
    pub c: R,
    pub d: R,
    pub e: R,
    pub de: R,
}

impl<R: Ring> Ring for Jet<R> {
    fn zero() -> Self {
        Jet { c: R::zero(), d: R::zero(), e: R::zero(), de: R::zero() }
    }
    fn one() -> Self {
        Jet { c: R::one(), d: R::zero(), e: R::zero(), de: R::zero() }
    }
    fn is_zero(&self) -> bool {
        self.c.is_zero() && self.d.is_zero() && self.e.is_zero() && self.de.is_zero()
    }
    fn zero_like(&self) -> Self {
        let z = self.c.zero_like();
        Jet { c: z.clone(), d: z.clone(), e: z.clone(), de: z }
    }
    fn one_like(&self) -> Self {
        let z = self.c.zero_like();
        Jet { c: self.c.one_like(), d: z.clone(), e: z.clone(), de: z }
    }
    fn add(&self, r: &Self) -> Self {
        Jet { c: self.c.add(&r.c), d: self.d.add(&r.d), e: self.e.add(&r.e), de: self.de.add(&r.de) }
    }
    fn neg(&self) -> Self {
        Jet { c: self.c.neg(), d: self.d.neg(), e: self.e.neg(), de: self.de.neg() }
    }
    fn mul(&self, r: &Self) -> Self {
        Jet {
            c: self.c.mul(&r.c),
            d: self.c.mul(&r.d).add(&self.d.mul(&r.c)),
            e: self.c.mul(&r.e).add(&self.e.mul(&r.c)),
            de: self
                .c
                .mul(&r.de)
                .add(&self.d.mul(&r.e))
                .add(&self.e.mul(&r.d))
                .add(&self.de.mul(&r.c)),
        }
    }
    fn scale(&self, k: &Rational) -> Self {
        Jet { c: self.c.scale(k), d: self.d.scale(k), e: self.e.scale(k), de: self.de.scale(k) }
    }
}

/// `τ_n` with its first derivatives in `t_1`, `t̄_1` and the mixed second derivative.
pub fn tau_jet(n: usize, times: &TodaTimes, order: usize) -> Jet<HbarSeries> {
    let table = MomentTable::new(times, n + 1, order);
    let m: Vec<Vec<Jet<HbarSeries>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet {
                    c: table.get(i, j).clone(),
                    d: table.get(i, j + 1).shift_up(1),
                    e: table.get(i + 1, j).shift_up(1),
                    de: table.get(i + 1, j + 1).shift_up(2),
                })
                .collect()
        })
        .collect();
    determinant(&m)
}

/// `ħ^{-2} τ_{n+1} τ_{n-1} - (τ_n ∂∂̄τ_n - ∂τ_n ∂̄τ_n)` through `x^order`;
/// at `ħ = 1` this is the usual Toda equation.
pub fn toda_check(n: usize, times: &TodaTimes, order: usize) -> Result<HbarSeries> {
    if n == 0 {
        return Err(Error::domain("toda_check needs n >= 1"));
    }
    let jet = tau_jet(n, times, order);
    let lhs = tau(n + 1, times, order).mul(&tau(n - 1, times, order)).shift_up(2);
    let rhs = jet.c.mul(&jet.de).sub(&jet.d.mul(&jet.e));
    Ok(lhs.sub(&rhs))
}

/// `det M · det(core) = det M_{11} det M_{nn} - det M_{1n} det M_{n1}`, exactly.
pub fn desnanot_jacobi_check<R: Ring>(m: &[Vec<R>]) -> Result<bool> {
    let n = m.len();
    if n < 2 || m.iter().any(|r| r.len() != n) {
        return Err(Error::domain("Desnanot-Jacobi check needs a square matrix of size >= 2"));
    }
    let last = n - 1;
    let core = minor(m, &[0, last], &[0, last]);
    let lhs = determinant(m).mul(&determinant(&core));
    let d = |r: usize, c: usize| determinant(&minor(m, &[r], &[c]));
    let rhs = d(0, 0).mul(&d(last, last)).sub(&d(0, last).mul(&d(last, 0)));
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{factorial, rat};

    fn series(coeffs: &[Rational], order: usize) -> HbarSeries {
        HbarSeries::new(SeriesVar::InvHbar, order, coeffs.to_vec())
    }

    fn x_pow(k: usize, c: Rational, order: usize) -> HbarSeries {
        HbarSeries::monomial(SeriesVar::InvHbar, order, k, c)
    }

    #[test]
    fn entries_at_zero_times() {
        let z = TodaTimes::zero();
        for i in 0..4 {
            for j in 0..4 {
                let e = moment_entry(i, j, &z, 6);
                let expected = if i == j {
                    x_pow(i, Rational::new(1.into(), factorial(i as u64)), 6)
                } else {
                    HbarSeries::zero(SeriesVar::InvHbar, 6)
                };
                assert_eq!(e, expected, "({i},{j})");
            }
        }
    }

    #[test]
    fn t1_only_entry() {
        let t = TodaTimes::plain(vec![rat(1, 3)], vec![]);
        assert_eq!(moment_entry(1, 0, &t, 5), x_pow(2, rat(1, 3), 5));
        // M_20 = x²/2 · P_2 = x²/2 · x² t₁²/2
        assert_eq!(moment_entry(2, 0, &t, 5), x_pow(4, rat(1, 36), 5));
    }

    #[test]
    fn tau_at_zero_times() {
        let z = TodaTimes::zero();
        assert_eq!(tau(0, &z, 4), series(&[int(1)], 4));
        assert_eq!(tau(2, &z, 4), x_pow(1, int(1), 4));
        // ∏_{i<3} x^i/i! = x³/2
        assert_eq!(tau(3, &z, 6), x_pow(3, rat(1, 2), 6));
        assert_eq!(*tau(1, &TodaTimes::plain(vec![rat(2, 3)], vec![rat(1, 5)]), 4).coeff(0), int(1));
    }

    #[test]
    fn toda_identity_examples() {
        let t = TodaTimes::plain(vec![rat(1, 3)], vec![rat(-2, 7)]);
        assert!(toda_check(1, &t, 6).unwrap().is_zero());
        assert!(toda_check(2, &TodaTimes::zero(), 6).unwrap().is_zero());
        let t = TodaTimes::plain(vec![int(0), rat(3, 4)], vec![rat(1, 2)]);
        assert!(toda_check(2, &t, 5).unwrap().is_zero());
        assert!(toda_check(0, &t, 5).is_err());
    }

    #[test]
    fn toda_without_hbar_factor_fails() {
        // guards the ħ^{-2}: at zero times τ_2 τ_0 = x but τ_1∂∂̄τ_1 = x³
        let z = TodaTimes::zero();
        let jet = tau_jet(1, &z, 4);
        let bare = tau(2, &z, 4).sub(&jet.c.mul(&jet.de).sub(&jet.d.mul(&jet.e)));
        assert!(!bare.is_zero());
    }

    #[test]
    fn derivative_shift_matches_finite_differences() {
        let order = 5;
        let base = [rat(1, 4), rat(-1, 3)];
        let at = |h: i64| TodaTimes::plain(vec![&base[0] + int(h), base[1].clone()], vec![rat(2, 5), rat(1, 7)]);
        let degree = 2 * order + 2;
        for (i, j) in [(0, 0), (1, 0), (0, 2), (2, 1)] {
            let samples: Vec<HbarSeries> = (0..=degree as i64).map(|h| moment_entry(i, j, &at(h), order)).collect();
            // f'(0) = Σ_k (-1)^{k+1} Δ^k f(0) / k for a polynomial of degree ≤ `degree`
            let mut diffs = samples.clone();
            let mut derivative = HbarSeries::zero(SeriesVar::InvHbar, order);
            for k in 1..=degree {
                diffs = diffs.windows(2).map(|w| w[1].sub(&w[0])).collect();
                let sign = if k % 2 == 1 { int(1) } else { int(-1) };
                derivative = derivative.add(&diffs[0].scale(&(sign / int(k as i64))));
            }
            let shifted = moment_entry(i, j + 1, &at(0), order).shift_up(1);
            assert_eq!(derivative, shifted, "({i},{j})");
        }
    }

    #[test]
    fn spectral_times_reproduce_determinant() {
        let order = 6;
        let a = [rat(1, 2), rat(-1, 3)];
        let b = [rat(2, 5), rat(3, 4)];
        let times = TodaTimes::from_spectra(&a, &b, order + 2);
        // det(e^{x a_i b_j}) / (Δ(a)Δ(b)) expanded in x
        let exp_series = |y: &Rational| -> HbarSeries {
            let mut c = vec![int(1)];
            for k in 1..=order {
                let prev: Rational = c[k - 1].clone();
                c.push(prev * y / int(k as i64));
            }
            series(&c, order)
        };
        let m: Vec<Vec<HbarSeries>> = a.iter().map(|ai| b.iter().map(|bj| exp_series(&(ai * bj))).collect()).collect();
        let delta = (&a[1] - &a[0]) * (&b[1] - &b[0]);
        let expected = determinant(&m).scale(&(int(1) / delta));
        assert_eq!(tau(2, &times, order), expected);
    }

    #[test]
    fn jet_product_rule() {
        let a = Jet { c: int(2), d: int(3), e: int(5), de: int(7) };
        let b = Jet { c: int(11), d: int(13), e: int(17), de: int(19) };
        let p = a.mul(&b);
        assert_eq!(p, Jet { c: int(22), d: int(59), e: int(89), de: int(2 * 19 + 3 * 17 + 5 * 13 + 7 * 11) });
    }

    #[test]
    fn desnanot_jacobi_examples() {
        let m2 = vec![vec![int(3), int(1)], vec![int(4), int(2)]];
        assert!(desnanot_jacobi_check(&m2).unwrap());
        let m3: Vec<Vec<Rational>> =
            vec![vec![int(2), int(-1), int(4)], vec![int(0), int(3), int(5)], vec![int(7), int(1), int(-2)]];
        assert!(desnanot_jacobi_check(&m3).unwrap());
        let m4: Vec<Vec<Rational>> = (0..4)
            .map(|i| (0..4).map(|j| rat((i * 7 + j * 3) % 11 - 5, i + 2 * j + 1)).collect())
            .collect();
        assert!(desnanot_jacobi_check(&m4).unwrap());
        assert!(desnanot_jacobi_check(&[vec![int(1)]]).is_err());
    }

    #[test]
    fn parse_times() {
        let t = TodaTimes::parse("t1=1/3, tb1=1/5,t3=-2").unwrap();
        assert_eq!(t.t, vec![rat(1, 3), int(0), int(-2)]);
        assert_eq!(t.t_bar, vec![rat(1, 5)]);
        assert!(TodaTimes::parse("x1=2").is_err());
        assert!(TodaTimes::parse("t0=2").is_err());
        assert!(TodaTimes::parse("t1").is_err());
    }
}

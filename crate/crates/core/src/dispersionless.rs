//! Closed-form planar results: the `ψ` fixed point, its Lagrange-inversion
//! series, the diagonal case and the one-sided rational curve.
//!
//! One-sided means `θ̄_1 = 1` and `θ̄_q = 0` for `q ≥ 2`; series results keep
//! `θ̄_1` explicit so they stay graded.

use crate::algebra::{binomial, factorial, int, rational_to_f64, GradedPolynomial, Monomial, Rational};
use crate::error::{Error, Result};

/// Moments `θ_1..θ_n` of the general side.
#[derive(Clone, Debug, PartialEq)]
pub struct OneSidedData {
    pub theta: Vec<Rational>,
}

impl OneSidedData {
    pub fn new(theta: Vec<Rational>) -> Self {
        OneSidedData { theta }
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    fn theta_f64(&self) -> Vec<f64> {
        self.theta.iter().map(rational_to_f64).collect()
    }
}

/// `(-1)^{q+1} (2q)!/(q!)²`
fn g(q: usize) -> Rational {
    let c = Rational::from_integer(binomial(2 * q as u64, q as u64));
    if q % 2 == 1 {
        c
    } else {
        -c
    }
}

/// All `α` with `α_q ≥ 0`, `q ≤ n`, `Σ q α_q ≤ order`.
fn multi_indices(n: usize, order: usize) -> Vec<Vec<u32>> {
    fn rec(q: usize, n: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if q > n {
            out.push(cur.clone());
            return;
        }
        for a in 0..=left / q {
            cur.push(a as u32);
            rec(q + 1, n, left - a * q, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, order, &mut Vec::new(), &mut out);
    out
}

/// Sum over `α` of `num!/den! ∏ g_q^{α_q}/α_q! · θ^α θ̄_1^{Σqα}` where
/// `(num, den)` is given by `shape`; terms with `None` are skipped.
fn lagrange_sum(n: usize, order: usize, shape: impl Fn(u64, u64) -> Option<(u64, u64)>) -> GradedPolynomial {
    let mut out = GradedPolynomial::new();
    for alpha in multi_indices(n, order) {
        let odd: u64 = alpha.iter().enumerate().map(|(i, &a)| (2 * i as u64 + 3) * a as u64).sum();
        let even: u64 = alpha.iter().enumerate().map(|(i, &a)| (2 * i as u64 + 2) * a as u64).sum();
        let Some((num, den)) = shape(odd, even) else { continue };
        let mut c = Rational::new(factorial(num), factorial(den));
        for (i, &a) in alpha.iter().enumerate() {
            c *= g(i + 1).pow(a as i32) / Rational::from_integer(factorial(a as u64));
        }
        let weight: u32 = alpha.iter().enumerate().map(|(i, &a)| (i as u32 + 1) * a).sum();
        let mut a_exp = alpha.clone();
        while a_exp.last() == Some(&0) {
            a_exp.pop();
        }
        let b_exp = if weight == 0 { vec![] } else { vec![weight] };
        out.add_term(Monomial::new(a_exp, b_exp), &c);
    }
    out
}

/// `ψ` through total weight `order`, as a polynomial in `θ_1..θ_n` and `θ̄_1`.
pub fn psi_series(n: usize, order: usize) -> GradedPolynomial {
    lagrange_sum(n, order, |odd, even| Some((odd, even + 1)))
}

/// One-sided planar free energy through total weight `order`.
pub fn free_energy_one_sided(n: usize, order: usize) -> GradedPolynomial {
    lagrange_sum(n, order, |odd, even| (odd >= 3).then(|| (odd - 3, even)))
}

/// Residual of `ψ = 1 + Σ g_q θ_q ψ^{2q+1}`.
pub fn psi_residual(theta: &[f64], psi: f64) -> f64 {
    let rhs: f64 = 1.0
        + theta
            .iter()
            .enumerate()
            .map(|(i, &t)| rational_to_f64(&g(i + 1)) * t * psi.powi(2 * i as i32 + 3))
            .sum::<f64>();
    psi - rhs
}

fn psi_derivative(theta: &[f64], psi: f64) -> f64 {
    1.0 - theta
        .iter()
        .enumerate()
        .map(|(i, &t)| rational_to_f64(&g(i + 1)) * t * (2 * i + 3) as f64 * psi.powi(2 * i as i32 + 2))
        .sum::<f64>()
}

/// Damped Newton from `start`.
fn newton(theta: &[f64], start: f64, tol: f64) -> Option<f64> {
    const MAX_ITER: usize = 100;
    let mut psi = start;
    let mut r = psi_residual(theta, psi);
    for _ in 0..MAX_ITER {
        if r.abs() <= tol * psi.abs().max(1.0) {
            return Some(psi);
        }
        let dr = psi_derivative(theta, psi);
        if dr == 0.0 || !dr.is_finite() {
            return None;
        }
        let step = r / dr;
        let mut lambda = 1.0;
        loop {
            let cand = psi - lambda * step;
            let rc = psi_residual(theta, cand);
            if rc.abs() < r.abs() || lambda < 1e-6 {
                psi = cand;
                r = rc;
                break;
            }
            lambda *= 0.5;
        }
        if !psi.is_finite() {
            return None;
        }
    }
    None
}

/// Root of the fixed-point equation on the branch through `ψ = 1`.
///
/// Damped Newton from 1 at the full coupling; if that fails or lands on a
/// root where the branch has folded (`g'(ψ) ≤ 0`), the couplings are scaled
/// up from zero in steps, each solve starting at the previous root.
pub fn psi_numeric(d: &OneSidedData, tol: f64) -> Result<f64> {
    let theta = d.theta_f64();
    let scaled = |lambda: f64| -> Vec<f64> { theta.iter().map(|t| t * lambda).collect() };
    let accept = |th: &[f64], prev: f64, root: Option<f64>| -> Option<f64> {
        root.filter(|&r| psi_derivative(th, r) > 0.0 && (r - prev).abs() <= 0.5 * prev.abs().max(1.0))
    };
    let (mut lambda, mut psi, mut step) = (0.0f64, 1.0f64, 1.0f64);
    while lambda < 1.0 {
        let next = (lambda + step).min(1.0);
        let th = scaled(next);
        match accept(&th, psi, newton(&th, psi, tol)) {
            Some(r) => {
                lambda = next;
                psi = r;
                step *= 2.0;
            }
            None => {
                step *= 0.5;
                if step < 1e-6 {
                    return Err(Error::Convergence(format!(
                        "ψ branch through 1 cannot be continued past coupling fraction {lambda:.6}"
                    )));
                }
            }
        }
    }
    Ok(psi)
}

/// `ψ` and `F` coefficients of `x^k`, `k = 0..=order`, for `θ_q = δ_{qn} θ_n`,
/// `θ̄_q = δ_{qn} θ̄_n` and `x = θ_n θ̄_n`.
pub fn diagonal_series(n: usize, order: usize) -> Result<(Vec<Rational>, Vec<Rational>)> {
    if n == 0 {
        return Err(Error::domain("diagonal series needs n >= 1"));
    }
    let n = n as u64;
    let mut psi = Vec::with_capacity(order + 1);
    let mut f = Vec::with_capacity(order + 1);
    for k in 0..=order as u64 {
        let pow = Rational::from_integer((n + 1).into()).pow(k as i32);
        psi.push(&pow * Rational::new(factorial((n + 2) * k), factorial((n + 1) * k + 1) * factorial(k)));
        if k == 0 {
            f.push(int(0));
        } else {
            f.push(pow * Rational::new(factorial((n + 2) * k - 3), factorial((n + 1) * k) * factorial(k)));
        }
    }
    Ok((psi, f))
}

/// `C(r, k)` for half-integer `r`.
fn binom_half(r: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (r - i as f64) / (i + 1) as f64)
}

/// One-sided curve `b(ℓ) = ½(ℓ T(ℓ) + √(ℓ(1+ℓ/4ψ²)) Q(ℓ))`, `T = 1 + θ_1 ℓ + … + θ_n ℓ^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveData {
    pub psi: f64,
    /// `T_0..T_n` with `T_0 = 1`
    pub t: Vec<f64>,
    /// `Q_0..Q_n`
    pub q: Vec<f64>,
}

/// Tolerance on `Q(0) = 2` in [`build_curve`].
pub const CURVE_TOLERANCE: f64 = 1e-9;

pub fn build_curve(d: &OneSidedData, psi: f64) -> Result<CurveData> {
    let mut t = vec![1.0];
    t.extend(d.theta_f64());
    let n = d.n();
    let w = 4.0 * psi * psi;
    // polynomial part of 2ψ T(ℓ) Σ_k C(-1/2,k) (4ψ²/ℓ)^k
    let q: Vec<f64> = (0..=n)
        .map(|m| 2.0 * psi * (m..=n).map(|j| t[j] * binom_half(-0.5, j - m) * w.powi((j - m) as i32)).sum::<f64>())
        .collect();
    if !((q[0] - 2.0).abs() <= CURVE_TOLERANCE) {
        return Err(Error::domain(format!("inconsistent ψ = {psi}: Q(0) = {} instead of 2", q[0])));
    }
    Ok(CurveData { psi, t, q })
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl CurveData {
    pub fn n(&self) -> usize {
        self.t.len() - 1
    }

    /// `b(ℓ)` for `ℓ ≥ 0`.
    pub fn b(&self, l: f64) -> f64 {
        let root = (l * (1.0 + l / (4.0 * self.psi * self.psi))).sqrt();
        0.5 * (l * poly_eval(&self.t, l) + root * poly_eval(&self.q, l))
    }

    /// Coefficients of `ℓ^{-1}..ℓ^{-count}` in the large-`ℓ` expansion of `m = b/ℓ`.
    pub fn m_coefficients(&self, count: usize) -> Vec<f64> {
        let w = 4.0 * self.psi * self.psi;
        (1..=count)
            .map(|k| {
                let s: f64 = self
                    .q
                    .iter()
                    .enumerate()
                    .map(|(j, qj)| qj * binom_half(0.5, j + k) * w.powi((j + k) as i32))
                    .sum();
                s / (4.0 * self.psi)
            })
            .collect()
    }

    /// `P` in `b² - b ℓT(ℓ) - ℓP(ℓ) = 0`, from the discriminant
    /// `ℓ(1+ℓ/4ψ²)Q²`: `P = (ℓ(1+ℓ/4ψ²)Q² - ℓ²T²)/(4ℓ)`.
    pub fn p_poly(&self) -> Vec<f64> {
        let q2 = poly_mul(&self.q, &self.q);
        let t2 = poly_mul(&self.t, &self.t);
        let w = 4.0 * self.psi * self.psi;
        // (disc - ℓ²T²)/ℓ = (1 + ℓ/w) Q² - ℓ T²
        let len = q2.len() + 1;
        let mut out = vec![0.0; len];
        for (k, c) in q2.iter().enumerate() {
            out[k] += c;
            out[k + 1] += c / w;
        }
        for (k, c) in t2.iter().enumerate() {
            out[k + 1] -= c;
        }
        out.iter().map(|c| c / 4.0).collect()
    }

    /// Largest deviation from the genus-zero structure: `P(0) = 1`, `deg P ≤ n`
    /// and the quadratic satisfied by `b` at sample points, each relative to
    /// the size of the terms involved.
    pub fn discriminant_residual(&self) -> f64 {
        let p = self.p_poly();
        let scale = p.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let mut worst = (p[0] - 1.0).abs();
        for c in &p[self.n() + 1..] {
            worst = worst.max(c.abs() / scale);
        }
        for &l in &[0.05, 0.3, 1.0, 2.5, 7.0] {
            let b = self.b(l);
            let lt = l * poly_eval(&self.t, l);
            let lp = l * poly_eval(&p, l);
            let size = (b * b).abs() + (b * lt).abs() + lp.abs();
            worst = worst.max((b * b - b * lt - lp).abs() / size.max(1e-300));
        }
        worst
    }
}

/// `max_q |[ℓ^{-q}] m - q ∂F/∂θ_q|` for `q = 1..=q_max` at `θ̄_1 = 1`, with `F`
/// the one-sided series through weight `order`.
pub fn m_expansion_deviation(d: &OneSidedData, q_max: usize, order: usize, tol: f64) -> Result<f64> {
    let psi = psi_numeric(d, tol)?;
    let curve = build_curve(d, psi)?;
    let m = curve.m_coefficients(q_max);
    let f = free_energy_one_sided(d.n().max(q_max), order);
    let theta = d.theta_f64();
    let mut worst = 0.0f64;
    for (qi, mq) in m.iter().enumerate() {
        let q = qi + 1;
        let deriv = f.d_theta(q).evaluate_f64(&theta, &[1.0]) * q as f64;
        worst = worst.max((mq - deriv).abs());
    }
    Ok(worst)
}

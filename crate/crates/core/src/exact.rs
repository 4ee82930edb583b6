//! Finite-`N` evaluation of the determinant formulas in arbitrary precision.
//!
//! All three integrals share one shape: for a kernel
//! `f(y) = Σ_n c_n y^n` with `c_n = x^n / ∏_k (n + m_k)!`,
//! `I = det f(a_i b_j) / (Δ(a) Δ(b) ∏_{ℓ<N} c_ℓ)`, with `Δ(a) = ∏_{i<j}(a_j - a_i)`.
//! The unitary case is `x = N/s`, `m = [0]` (so `f = exp`); the rectangular
//! one `x = (N/s)²`, `m = [0, ν]`; the `K`-chain `x = (N/s)^K`, `m_k = N_k - N`.
//!
//! Near coalescing eigenvalues the divided-difference form
//! `M_ij = Σ_k c_k h_{k-i}(a_0..a_i) h_{k-j}(b_0..b_j)` replaces the ratio,
//! where `h_m` is the complete homogeneous symmetric polynomial.

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

/// Eigenvalues of `A` and `B` (both of length `N`) and the coupling `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub s: f64,
}

impl SpectralData {
    pub fn new(a: Vec<f64>, b: Vec<f64>, s: f64) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::domain(format!(
                "eigenvalue lists must be nonempty and equally long (got {} and {})",
                a.len(),
                b.len()
            )));
        }
        check_finite(&a, &b, s)?;
        Ok(SpectralData { a, b, s })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }
}

/// Rectangular data: `a`, `b` are the `N₂` eigenvalues of `A†A` and `BB†`, with `N₁ ≥ N₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct RectangularData {
    pub n1: usize,
    pub n2: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub s: f64,
}

impl RectangularData {
    pub fn new(n1: usize, n2: usize, a: Vec<f64>, b: Vec<f64>, s: f64) -> Result<Self> {
        if n2 == 0 || n1 < n2 {
            return Err(Error::domain(format!("need N1 >= N2 >= 1, got N1={n1}, N2={n2}")));
        }
        if a.len() != n2 || b.len() != n2 {
            return Err(Error::domain(format!("expected {n2} values for a and b")));
        }
        check_finite(&a, &b, s)?;
        if a.iter().chain(&b).any(|&x| x < 0.0) {
            return Err(Error::domain("rectangular eigenvalues must be nonnegative"));
        }
        Ok(RectangularData { n1, n2, a, b, s })
    }

    pub fn nu(&self) -> usize {
        self.n1 - self.n2
    }
}

fn check_finite(a: &[f64], b: &[f64], s: f64) -> Result<()> {
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::domain("eigenvalues must be finite"));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::domain(format!("coupling s must be positive and finite, got {s}")));
    }
    Ok(())
}

/// Working precision and the relative error the caller needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecisionPolicy {
    pub bits: usize,
    pub target_rel_error: f64,
    /// Precision is doubled until the target is met or this is exceeded.
    pub max_bits: usize,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { bits: 128, target_rel_error: 1e-15, max_bits: 4096 }
    }
}

impl PrecisionPolicy {
    pub fn with_bits(bits: usize) -> Result<Self> {
        let p = PrecisionPolicy { bits, ..Default::default() };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.bits < 53 {
            return Err(Error::domain(format!("precision must be at least 53 bits, got {}", self.bits)));
        }
        if !(self.target_rel_error > 0.0) {
            return Err(Error::domain("target relative error must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Generic,
    Confluent,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: f64,
    /// Estimated absolute error, from the spread between two precisions.
    pub error_bound: f64,
    /// The value in decimal at the final working precision.
    pub decimal: String,
    pub bits: usize,
    pub branch: Branch,
}

struct Ctx {
    p: usize,
    cc: Consts,
}

impl Ctx {
    fn new(p: usize) -> Result<Self> {
        let cc = Consts::new().map_err(|e| Error::Internal(format!("constants cache: {e:?}")))?;
        Ok(Ctx { p, cc })
    }
    fn num(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }
    fn int(&self, n: u64) -> BigFloat {
        BigFloat::from_u64(n, self.p)
    }
    fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }
    fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }
    fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }
    fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }
    fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, RM, &mut self.cc)
    }
    fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.p, RM)
    }
    fn ldexp(&self, e: i64) -> BigFloat {
        // 2^e
        let two = self.int(2);
        if e >= 0 {
            two.powi(e as usize, self.p, RM)
        } else {
            self.int(1).div(&two.powi((-e) as usize, self.p, RM), self.p, RM)
        }
    }
}

fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    x.to_string().parse().unwrap_or(f64::NAN)
}

/// `c_n = x^n / ∏_k (n + m_k)!`.
#[derive(Clone, Debug)]
struct Kernel {
    x: f64,
    shifts: Vec<u64>,
    /// `x` is `(N/s)^power`; kept symbolic so it can be formed in high precision.
    n_over_s: (usize, f64, u32),
}

impl Kernel {
    fn new(n: usize, s: f64, power: u32, shifts: Vec<u64>) -> Self {
        Kernel { x: (n as f64 / s).powi(power as i32), shifts, n_over_s: (n, s, power) }
    }

    fn scale(&self, ctx: &Ctx) -> BigFloat {
        let (n, s, power) = self.n_over_s;
        let base = ctx.div(&ctx.int(n as u64), &ctx.num(s));
        base.powi(power as usize, ctx.p, RM)
    }

    /// `c_0 .. c_{count-1}` in high precision.
    fn coefficients(&self, ctx: &Ctx, count: usize) -> Vec<BigFloat> {
        let x = self.scale(ctx);
        let mut c = ctx.int(1);
        for &m in &self.shifts {
            for k in 1..=m {
                c = ctx.div(&c, &ctx.int(k));
            }
        }
        let mut out = Vec::with_capacity(count);
        for n in 0..count as u64 {
            out.push(c.clone());
            c = ctx.mul(&c, &x);
            for &m in &self.shifts {
                c = ctx.div(&c, &ctx.int(n + 1 + m));
            }
        }
        out
    }

    /// `ln |c_{n+1}/c_n|` in double precision.
    fn log_ratio(&self, n: u64) -> f64 {
        self.x.ln() - self.shifts.iter().map(|&m| ((n + 1 + m) as f64).ln()).sum::<f64>()
    }

    /// `f(y)` by its power series, stopped once the geometric tail is below the working precision.
    fn eval_series(&self, ctx: &Ctx, c0: &BigFloat, xy: &BigFloat) -> BigFloat {
        let xy_abs = to_f64(xy).abs();
        let eps = ctx.ldexp(-(ctx.p as i64) - 8);
        let mut term = c0.clone();
        let mut sum = c0.clone();
        let mut abs_sum = c0.abs();
        let mut n = 0u64;
        loop {
            let ratio = xy_abs / self.shifts.iter().map(|&m| (n + 1 + m) as f64).product::<f64>();
            term = ctx.mul(&term, xy);
            for &m in &self.shifts {
                term = ctx.div(&term, &ctx.int(n + 1 + m));
            }
            sum = ctx.add(&sum, &term);
            abs_sum = ctx.add(&abs_sum, &term.abs());
            n += 1;
            if ratio <= 0.5 && term.abs().cmp(&ctx.mul(&abs_sum, &eps)).is_some_and(|o| o <= 0) {
                return sum;
            }
            if n > 100_000 {
                return sum;
            }
        }
    }
}

fn determinant(ctx: &Ctx, mut m: Vec<Vec<BigFloat>>) -> BigFloat {
    let n = m.len();
    let mut det = ctx.int(1);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[i][col].abs().cmp(&m[j][col].abs()).unwrap_or(0).cmp(&0)
            })
            .expect("nonempty");
        if m[pivot][col].is_zero() {
            return BigFloat::from_u64(0, ctx.p);
        }
        if pivot != col {
            m.swap(pivot, col);
            det.inv_sign();
        }
        det = ctx.mul(&det, &m[col][col]);
        for row in col + 1..n {
            let factor = ctx.div(&m[row][col], &m[col][col]);
            if factor.is_zero() {
                continue;
            }
            for k in col..n {
                let t = ctx.mul(&factor, &m[col][k]);
                m[row][k] = ctx.sub(&m[row][k], &t);
            }
        }
    }
    det
}

fn vandermonde(ctx: &Ctx, v: &[BigFloat]) -> BigFloat {
    let mut acc = ctx.int(1);
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            acc = ctx.mul(&acc, &ctx.sub(&v[j], &v[i]));
        }
    }
    acc
}

fn min_gap_relative(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = if scale == 0.0 { 1.0 } else { scale };
    let mut gap = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            gap = gap.min((v[i] - v[j]).abs());
        }
    }
    gap / scale
}

fn coalescing(a: &[f64], b: &[f64], bits: usize) -> bool {
    let threshold = 2f64.powf(-(bits as f64) / 4.0);
    min_gap_relative(a) < threshold || min_gap_relative(b) < threshold
}

/// `h_m(v_0..v_i)` for `m ≤ max_m`, all `i`: `h[i][m]`.
fn complete_homogeneous(ctx: &Ctx, v: &[BigFloat], max_m: usize) -> Vec<Vec<BigFloat>> {
    let mut out: Vec<Vec<BigFloat>> = Vec::with_capacity(v.len());
    for (i, vi) in v.iter().enumerate() {
        let mut row = Vec::with_capacity(max_m + 1);
        row.push(ctx.int(1));
        for m in 1..=max_m {
            let prev_vars = if i == 0 { ctx.int(0) } else { out[i - 1][m].clone() };
            let t = ctx.mul(vi, &row[m - 1]);
            row.push(ctx.add(&prev_vars, &t));
        }
        out.push(row);
    }
    out
}

/// Number of series terms for the divided-difference matrix.
fn confluent_terms(kernel: &Kernel, n: usize, a_max: f64, b_max: f64, bits: usize) -> usize {
    // |c_k h_{k-i}(a) h_{k-j}(b)| ≤ |c_k| 4^k max(A,1)^k max(B,1)^k
    let growth = (4.0 * a_max.max(1.0) * b_max.max(1.0)).ln();
    let target = -((bits + 16) as f64) * std::f64::consts::LN_2;
    let mut log_c = 0.0f64;
    let mut best = f64::NEG_INFINITY;
    let mut k = 0u64;
    loop {
        let log_bound = log_c + k as f64 * growth;
        best = best.max(log_bound);
        let next_ratio = kernel.log_ratio(k) + growth;
        if k as usize >= n && next_ratio <= -std::f64::consts::LN_2 && log_bound - best <= target {
            return k as usize + 1;
        }
        log_c += kernel.log_ratio(k);
        k += 1;
        if k > 1_000_000 {
            return k as usize;
        }
    }
}

fn eval_confluent(ctx: &Ctx, kernel: &Kernel, a: &[f64], b: &[f64]) -> BigFloat {
    let n = a.len();
    let a_max = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let b_max = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let terms = confluent_terms(kernel, n, a_max, b_max, ctx.p);
    let c = kernel.coefficients(ctx, terms);
    let av: Vec<BigFloat> = a.iter().map(|&x| ctx.num(x)).collect();
    let bv: Vec<BigFloat> = b.iter().map(|&x| ctx.num(x)).collect();
    let ha = complete_homogeneous(ctx, &av, terms);
    let hb = complete_homogeneous(ctx, &bv, terms);
    let mut m = vec![vec![ctx.int(0); n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let mut acc = ctx.int(0);
            for (k, ck) in c.iter().enumerate().skip(i.max(j)) {
                let t = ctx.mul(&ctx.mul(ck, &ha[i][k - i]), &hb[j][k - j]);
                acc = ctx.add(&acc, &t);
            }
            *entry = acc;
        }
    }
    let det = determinant(ctx, m);
    let norm = c.iter().take(n).fold(ctx.int(1), |acc, x| ctx.mul(&acc, x));
    ctx.div(&det, &norm)
}

fn ratio_form(ctx: &Ctx, kernel: &Kernel, entries: Vec<Vec<BigFloat>>, a: &[f64], b: &[f64]) -> BigFloat {
    let n = a.len();
    let det = determinant(ctx, entries);
    let av: Vec<BigFloat> = a.iter().map(|&x| ctx.num(x)).collect();
    let bv: Vec<BigFloat> = b.iter().map(|&x| ctx.num(x)).collect();
    let norm = kernel.coefficients(ctx, n).iter().fold(ctx.int(1), |acc, x| ctx.mul(&acc, x));
    let denom = ctx.mul(&ctx.mul(&vandermonde(ctx, &av), &vandermonde(ctx, &bv)), &norm);
    ctx.div(&det, &denom)
}

/// Evaluate at two precisions until they agree to the target.
fn refine(
    policy: &PrecisionPolicy,
    branch: Branch,
    mut eval: impl FnMut(&mut Ctx) -> BigFloat,
) -> Result<Evaluation> {
    policy.validate()?;
    let mut bits = policy.bits;
    loop {
        let mut lo = Ctx::new(bits)?;
        let v1 = eval(&mut lo);
        let hi_bits = bits * 2;
        let mut hi = Ctx::new(hi_bits)?;
        let v2 = eval(&mut hi);
        let value = to_f64(&v2);
        if !value.is_finite() {
            return Err(Error::Precision { achieved: f64::INFINITY, target: policy.target_rel_error, bits: hi_bits });
        }
        let diff = to_f64(&v2.sub(&v1, hi_bits, RM)).abs();
        let error_bound = diff + value.abs() * 2f64.powi(-(bits as i32));
        let rel = if value == 0.0 { error_bound } else { error_bound / value.abs() };
        if rel <= policy.target_rel_error {
            return Ok(Evaluation { value, error_bound, decimal: v2.to_string(), bits: hi_bits, branch });
        }
        if hi_bits > policy.max_bits {
            return Err(Error::Precision { achieved: rel, target: policy.target_rel_error, bits: hi_bits });
        }
        bits = hi_bits;
    }
}

/// `∫ DU exp((N/s) Tr A U B U†)` over `U(N)`.
pub fn eval_unitary_integral(d: &SpectralData, policy: &PrecisionPolicy) -> Result<Evaluation> {
    let n = d.n();
    let kernel = Kernel::new(n, d.s, 1, vec![0]);
    let branch = if coalescing(&d.a, &d.b, policy.bits) { Branch::Confluent } else { Branch::Generic };
    refine(policy, branch, |ctx| match branch {
        Branch::Confluent => eval_confluent(ctx, &kernel, &d.a, &d.b),
        Branch::Generic => {
            let x = kernel.scale(ctx);
            let mut entries = Vec::with_capacity(n);
            for &ai in &d.a {
                let mut row = Vec::with_capacity(n);
                for &bj in &d.b {
                    let arg = ctx.mul(&x, &ctx.mul(&ctx.num(ai), &ctx.num(bj)));
                    row.push(ctx.exp(&arg));
                }
                entries.push(row);
            }
            ratio_form(ctx, &kernel, entries, &d.a, &d.b)
        }
    })
}

/// `I_ν(z) / (z/2)^ν = Σ_n (z/2)^{2n} / (n! (n+ν)!)` evaluated at `(z/2)² = y`.
fn bessel_reduced(ctx: &Ctx, nu: u64, y: &BigFloat) -> BigFloat {
    let kernel = Kernel { x: 1.0, shifts: vec![0, nu], n_over_s: (1, 1.0, 1) };
    let c0 = kernel.coefficients(ctx, 1).remove(0);
    kernel.eval_series(ctx, &c0, y)
}

/// Modified Bessel function `I_ν(z)` for `z ≥ 0` by its power series.
pub fn bessel_i(nu: u32, z: f64, policy: &PrecisionPolicy) -> Result<Evaluation> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::domain(format!("bessel_i needs finite z >= 0, got {z}")));
    }
    refine(policy, Branch::Generic, |ctx| {
        let half = ctx.div(&ctx.num(z), &ctx.int(2));
        let y = ctx.mul(&half, &half);
        ctx.mul(&bessel_reduced(ctx, nu as u64, &y), &half.powi(nu as usize, ctx.p, RM))
    })
}

/// Two-group rectangular integral over `U(N₂) × U(N₁)` with
/// `exp((N/s) Tr(A U B V† + h.c.))`, `N = N₂`.
pub fn eval_rectangular(d: &RectangularData, policy: &PrecisionPolicy) -> Result<Evaluation> {
    let (n1, n2, nu) = (d.n1, d.n2, d.nu());
    let kernel = Kernel::new(n2, d.s, 2, vec![0, nu as u64]);
    let has_zero = nu > 0 && d.a.iter().chain(&d.b).any(|&x| x == 0.0);
    let branch = if has_zero || coalescing(&d.a, &d.b, policy.bits) { Branch::Confluent } else { Branch::Generic };
    refine(policy, branch, |ctx| match branch {
        Branch::Confluent => eval_confluent(ctx, &kernel, &d.a, &d.b),
        Branch::Generic => {
            // Literal Bessel form with its factorial prefactor.
            let n_over_s = ctx.div(&ctx.int(n2 as u64), &ctx.num(d.s));
            let mut entries = Vec::with_capacity(n2);
            for &ai in &d.a {
                let mut row = Vec::with_capacity(n2);
                for &bj in &d.b {
                    let ab = ctx.mul(&ctx.num(ai), &ctx.num(bj));
                    let half_z = ctx.mul(&n_over_s, &ctx.sqrt(&ab));
                    let y = ctx.mul(&half_z, &half_z);
                    let iv = ctx.mul(&bessel_reduced(ctx, nu as u64, &y), &half_z.powi(nu, ctx.p, RM));
                    row.push(iv);
                }
                entries.push(row);
            }
            let det = determinant(ctx, entries);
            let av: Vec<BigFloat> = d.a.iter().map(|&x| ctx.num(x)).collect();
            let bv: Vec<BigFloat> = d.b.iter().map(|&x| ctx.num(x)).collect();
            let mut denom = ctx.mul(&vandermonde(ctx, &av), &vandermonde(ctx, &bv));
            if nu > 0 {
                for (ai, bi) in av.iter().zip(&bv) {
                    let ab = ctx.sqrt(&ctx.mul(ai, bi));
                    denom = ctx.mul(&denom, &ab.powi(nu, ctx.p, RM));
                }
            }
            let fact = |k: usize| (1..=k as u64).fold(ctx.int(1), |acc, j| ctx.mul(&acc, &ctx.int(j)));
            let mut pref = ctx.int(1);
            for p in 1..n2 {
                pref = ctx.mul(&pref, &fact(p));
            }
            for q in 1..n1 {
                pref = ctx.mul(&pref, &fact(q));
            }
            for r in 1..nu {
                pref = ctx.div(&pref, &fact(r));
            }
            let s_over_n = ctx.div(&ctx.num(d.s), &ctx.int(n2 as u64));
            pref = ctx.mul(&pref, &s_over_n.powi(n2 * (n1 - 1), ctx.p, RM));
            ctx.div(&ctx.mul(&pref, &det), &denom)
        }
    })
}

/// `K`-chain integral with group sizes `sizes`; `a`, `b` hold the `N = min N_k`
/// eigenvalues of the chain products. The overall constant is fixed by `I = 1` at `a = 0`.
pub fn eval_chain(sizes: &[usize], a: &[f64], b: &[f64], s: f64, policy: &PrecisionPolicy) -> Result<Evaluation> {
    if sizes.is_empty() {
        return Err(Error::domain("chain length K must be at least 1"));
    }
    let n = *sizes.iter().min().expect("nonempty");
    if n == 0 {
        return Err(Error::domain("chain sizes must be positive"));
    }
    if a.len() != n || b.len() != n {
        return Err(Error::domain(format!("expected N = {n} eigenvalues for a and b")));
    }
    check_finite(a, b, s)?;
    let kernel = Kernel::new(n, s, sizes.len() as u32, sizes.iter().map(|&k| (k - n) as u64).collect());
    let branch = if coalescing(a, b, policy.bits) { Branch::Confluent } else { Branch::Generic };
    refine(policy, branch, |ctx| match branch {
        Branch::Confluent => eval_confluent(ctx, &kernel, a, b),
        Branch::Generic => {
            let x = kernel.scale(ctx);
            let c0 = kernel.coefficients(ctx, 1).remove(0);
            let entries = a
                .iter()
                .map(|&ai| {
                    b.iter()
                        .map(|&bj| {
                            let y = ctx.mul(&x, &ctx.mul(&ctx.num(ai), &ctx.num(bj)));
                            let unit = Kernel { x: 1.0, ..kernel.clone() };
                            unit.eval_series(ctx, &c0, &y)
                        })
                        .collect()
                })
                .collect();
            ratio_form(ctx, &kernel, entries, a, b)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy() -> PrecisionPolicy {
        PrecisionPolicy::default()
    }

    fn unitary(a: &[f64], b: &[f64], s: f64) -> Evaluation {
        eval_unitary_integral(&SpectralData::new(a.to_vec(), b.to_vec(), s).unwrap(), &policy()).unwrap()
    }

    fn close(x: f64, y: f64, rel: f64) -> bool {
        (x - y).abs() <= rel * y.abs().max(1e-300)
    }

    #[test]
    fn two_by_two_example() {
        let v = unitary(&[0.0, 1.0], &[0.0, 1.0], 2.0);
        assert!(close(v.value, std::f64::consts::E - 1.0, 1e-15), "{}", v.value);
        assert_eq!(v.branch, Branch::Generic);
        assert!(v.decimal.starts_with("1.71828182845904523536"), "{}", v.decimal);
    }

    #[test]
    fn degenerate_b_gives_pure_exponential() {
        let a = [0.3, -0.7, 1.1];
        let v = unitary(&a, &[0.5; 3], 1.5);
        let expected = (3.0 / 1.5 * 0.5 * a.iter().sum::<f64>()).exp();
        assert_eq!(v.branch, Branch::Confluent);
        assert!(close(v.value, expected, 1e-14), "{} vs {expected}", v.value);
    }

    #[test]
    fn zero_a_gives_one() {
        let v = unitary(&[0.0; 3], &[0.1, 0.4, 2.0], 1.0);
        assert!(close(v.value, 1.0, 1e-15));
    }

    #[test]
    fn one_by_one_is_exponential() {
        let v = unitary(&[0.8], &[-1.5], 0.6);
        assert!(close(v.value, (0.8f64 * -1.5 / 0.6).exp(), 1e-15));
    }

    #[test]
    fn swap_and_permutation_symmetry() {
        let (a, b) = ([0.2, 1.3, -0.4], [0.9, -0.1, 0.5]);
        let v = unitary(&a, &b, 1.7).value;
        assert!(close(unitary(&b, &a, 1.7).value, v, 1e-14));
        assert!(close(unitary(&[1.3, -0.4, 0.2], &b, 1.7).value, v, 1e-14));
        assert!(close(unitary(&a, &[-0.1, 0.5, 0.9], 1.7).value, v, 1e-14));
    }

    #[test]
    fn scaling_invariance() {
        let (a, b) = ([0.2, 1.3, -0.4], [0.9, -0.1, 0.5]);
        let v = unitary(&a, &b, 1.7).value;
        let a3: Vec<f64> = a.iter().map(|x| x * 3.0).collect();
        assert!(close(unitary(&a3, &b, 5.1).value, v, 1e-13));
    }

    #[test]
    fn confluent_matches_generic_as_gap_closes() {
        let b = [0.3, 0.8, -0.6];
        let limit = unitary(&[0.5, 0.5, 1.2], &b, 1.3);
        assert_eq!(limit.branch, Branch::Confluent);
        for k in 2..=8 {
            let eps = 10f64.powi(-k);
            let v = unitary(&[0.5, 0.5 + eps, 1.2], &b, 1.3);
            // value is smooth in eps, so the difference is O(eps)
            assert!((v.value - limit.value).abs() < 10.0 * eps * limit.value, "eps={eps}: {} vs {}", v.value, limit.value);
            assert_eq!(v.branch, Branch::Generic);
            let kernel = Kernel::new(3, 1.3, 1, vec![0]);
            let ctx = Ctx::new(256).unwrap();
            let conf = to_f64(&eval_confluent(&ctx, &kernel, &[0.5, 0.5 + eps, 1.2], &b));
            assert!(close(conf, v.value, 1e-14), "eps={eps}: {conf} vs {}", v.value);
        }
    }

    #[test]
    fn confluent_branch_agrees_with_generic_on_distinct_data() {
        let (a, b) = ([0.2, 1.3, -0.4], [0.9, -0.1, 0.5]);
        let kernel = Kernel::new(3, 1.7, 1, vec![0]);
        let ctx = Ctx::new(256).unwrap();
        let conf = to_f64(&eval_confluent(&ctx, &kernel, &a, &b));
        assert!(close(conf, unitary(&a, &b, 1.7).value, 1e-15));
    }

    #[test]
    fn rectangular_scalar_case_is_bessel() {
        let d = RectangularData::new(1, 1, vec![1.0], vec![1.0], 1.0).unwrap();
        let v = eval_rectangular(&d, &policy()).unwrap();
        // I_0(2)
        assert!(close(v.value, 2.279585302336067, 1e-15), "{}", v.value);
        let zero_b = RectangularData::new(3, 2, vec![0.4, 1.0], vec![0.0, 0.0], 1.0).unwrap();
        assert!(close(eval_rectangular(&zero_b, &policy()).unwrap().value, 1.0, 1e-15));
    }

    #[test]
    fn rectangular_literal_form_matches_normalized_kernel() {
        for (n1, n2) in [(2, 1), (3, 2), (4, 2), (2, 2)] {
            let a: Vec<f64> = (0..n2).map(|i| 0.3 + 0.5 * i as f64).collect();
            let b: Vec<f64> = (0..n2).map(|i| 0.7 + 0.35 * i as f64).collect();
            let d = RectangularData::new(n1, n2, a.clone(), b.clone(), 1.3).unwrap();
            let lit = eval_rectangular(&d, &policy()).unwrap();
            assert_eq!(lit.branch, Branch::Generic);
            let kernel = Kernel::new(n2, 1.3, 2, vec![0, (n1 - n2) as u64]);
            let ctx = Ctx::new(256).unwrap();
            let conf = to_f64(&eval_confluent(&ctx, &kernel, &a, &b));
            assert!(close(lit.value, conf, 1e-14), "({n1},{n2}): {} vs {conf}", lit.value);
        }
    }

    #[test]
    fn rectangular_rejects_negative() {
        assert!(RectangularData::new(2, 1, vec![-1.0], vec![1.0], 1.0).is_err());
        assert!(RectangularData::new(1, 2, vec![1.0], vec![1.0], 1.0).is_err());
    }

    #[test]
    fn chain_reductions() {
        let (a, b) = ([0.2, 1.3, -0.4], [0.9, -0.1, 0.5]);
        let c = eval_chain(&[3], &a, &b, 1.7, &policy()).unwrap();
        assert!(close(c.value, unitary(&a, &b, 1.7).value, 1e-14));

        let (ra, rb) = ([0.3, 0.8], [0.7, 1.05]);
        for sizes in [[2usize, 2], [2, 4], [3, 2]] {
            let chain = eval_chain(&sizes, &ra, &rb, 1.3, &policy()).unwrap();
            let n1 = *sizes.iter().max().unwrap();
            let rect = eval_rectangular(&RectangularData::new(n1, 2, ra.to_vec(), rb.to_vec(), 1.3).unwrap(), &policy())
                .unwrap();
            assert!(close(chain.value, rect.value, 1e-14), "{sizes:?}: {} vs {}", chain.value, rect.value);
        }
        let zero = eval_chain(&[2, 3, 4], &[0.0, 0.0], &[0.5, 1.0], 1.0, &policy()).unwrap();
        assert!(close(zero.value, 1.0, 1e-15));
        assert!(eval_chain(&[], &[], &[], 1.0, &policy()).is_err());
    }

    #[test]
    fn bessel_values() {
        let p = policy();
        assert!(close(bessel_i(0, 2.0, &p).unwrap().value, 2.279585302336067, 1e-15));
        assert!(close(bessel_i(1, 1.0, &p).unwrap().value, 0.5651591039924851, 1e-15));
        assert!(close(bessel_i(3, 10.0, &p).unwrap().value, 1758.380716610853, 1e-14));
    }

    #[test]
    fn input_validation() {
        assert!(SpectralData::new(vec![1.0], vec![1.0, 2.0], 1.0).is_err());
        assert!(SpectralData::new(vec![f64::NAN], vec![1.0], 1.0).is_err());
        assert!(SpectralData::new(vec![1.0], vec![1.0], 0.0).is_err());
        assert!(PrecisionPolicy::with_bits(32).is_err());
    }

    #[test]
    fn unattainable_target_is_a_precision_error() {
        let d = SpectralData::new(vec![0.0, 1.0], vec![0.0, 1.0], 2.0).unwrap();
        let p = PrecisionPolicy { bits: 64, target_rel_error: 1e-300, max_bits: 128 };
        assert!(matches!(eval_unitary_integral(&d, &p), Err(Error::Precision { .. })));
    }
}

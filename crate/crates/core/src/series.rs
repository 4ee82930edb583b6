//! Character expansion of the unitary integral with formal `N`, and the
//! exact extraction of the planar free energy from its logarithm.
//!
//! The `s^{-n}` coefficient of `I` is
//! `Σ_{α,β ⊢ n} N^{n+ℓ(α)+ℓ(β)}/(z_α z_β) Σ_λ χ̂_λ(α) χ̂_λ(β) / ∏_{□∈λ}(N + c(□)) · θ^α θ̄^β`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num::{BigInt, One, Signed, ToPrimitive};
use rayon::prelude::*;

use crate::algebra::{
    int, rational_from_f64, rational_to_f64, GradedPolynomial, Monomial, MomentPoly, RatN, Rational, Ring, SeriesVar,
    TruncatedSeries, UPoly,
};
use crate::error::{Error, Result};
use crate::symfun::{partitions, CharacterTable, ClassVector, Partition};

/// `I` as a series in `1/s` with coefficients polynomial in the moments over rational functions of `N`.
pub type CharacterSeries = TruncatedSeries<MomentPoly<RatN>>;

fn content_product(lambda: &Partition) -> UPoly {
    lambda
        .contents()
        .into_iter()
        .fold(UPoly::constant(int(1)), |acc, c| acc.mul(&UPoly::linear(int(c))))
}

fn order_coefficient_uncached(n: u32) -> MomentPoly<RatN> {
    if n == 0 {
        return MomentPoly::constant(RatN::one());
    }
    let table = CharacterTable::new(n);
    let parts = table.partitions();

    // Common denominator D = ∏_c (N+c)^{max_λ mult_λ(c)}, so every 1/∏(N+c)
    // becomes cofactor_λ / D and each (α,β) sum needs one reduction only.
    let mut max_mult: BTreeMap<i64, usize> = BTreeMap::new();
    let mut mults: Vec<BTreeMap<i64, usize>> = Vec::new();
    for lambda in parts {
        let mut m = BTreeMap::new();
        for c in lambda.contents() {
            *m.entry(c).or_insert(0) += 1;
        }
        for (&c, &k) in &m {
            let e = max_mult.entry(c).or_insert(0);
            *e = (*e).max(k);
        }
        mults.push(m);
    }
    let linear_pow = |c: i64, k: usize| (0..k).fold(UPoly::constant(int(1)), |acc, _| acc.mul(&UPoly::linear(int(c))));
    let denominator = max_mult.iter().fold(UPoly::constant(int(1)), |acc, (&c, &k)| acc.mul(&linear_pow(c, k)));
    let cofactors: Vec<UPoly> = mults
        .iter()
        .map(|m| {
            max_mult
                .iter()
                .fold(UPoly::constant(int(1)), |acc, (&c, &k)| acc.mul(&linear_pow(c, k - m.get(&c).copied().unwrap_or(0))))
        })
        .collect();

    let classes: Vec<ClassVector> = parts.iter().map(ClassVector::from_partition).collect();
    let terms: Vec<(Monomial, RatN)> = (0..parts.len())
        .into_par_iter()
        .flat_map_iter(|ia| {
            let classes = &classes;
            let cofactors = &cofactors;
            let table = &table;
            let denominator = &denominator;
            (0..parts.len()).filter_map(move |ib| {
                let mut num = UPoly::default();
                for (il, cof) in cofactors.iter().enumerate() {
                    let w = table.value(il, ia) * table.value(il, ib);
                    if w != 0 {
                        num = num.add(&cof.scale(&int(w)));
                    }
                }
                if num.is_zero() {
                    return None;
                }
                let (a, b) = (&classes[ia], &classes[ib]);
                let power = (n + a.num_cycles() + b.num_cycles()) as usize;
                let z = Rational::new(BigInt::one(), a.z() * b.z());
                let value = RatN::new(num.scale(&z), denominator.clone()).mul(&RatN::n_pow(power));
                Some((Monomial::new(a.mult().to_vec(), b.mult().to_vec()), value))
            })
        })
        .collect();
    MomentPoly::from_terms(terms)
}

fn coefficient_cache() -> &'static Mutex<HashMap<u32, Arc<MomentPoly<RatN>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<MomentPoly<RatN>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The `s^{-n}` coefficient of the character series, memoized per process.
pub fn order_coefficient(n: u32) -> Arc<MomentPoly<RatN>> {
    if let Some(c) = coefficient_cache().lock().expect("cache lock").get(&n) {
        return c.clone();
    }
    let c = Arc::new(order_coefficient_uncached(n));
    coefficient_cache().lock().expect("cache lock").insert(n, c.clone());
    c
}

/// `I` through `s^{-order}`.
pub fn character_series(order: usize) -> CharacterSeries {
    let coeffs: Vec<MomentPoly<RatN>> = (0..=order as u32)
        .into_par_iter()
        .map(|n| order_coefficient(n).as_ref().clone())
        .collect();
    TruncatedSeries::new(SeriesVar::InvS, order, coeffs)
}

/// `log I` through `s^{-order}`.
pub fn log_character_series(order: usize) -> Result<CharacterSeries> {
    character_series(order).log()
}

/// Planar free energies `F_1..F_order`: the exact `N²` coefficient of each
/// `s^{-n}` coefficient of `log I`.
///
/// Fails with [`Error::Internal`] if some coefficient grows faster than `N²`
/// or if no coefficient reaches `N²`.
pub fn free_energy_oracle(order: usize) -> Result<Vec<GradedPolynomial>> {
    if order == 0 {
        return Err(Error::domain("free energy order must be at least 1"));
    }
    let log = log_character_series(order)?;
    (1..=order).map(|n| leading_part(log.coeff(n), n)).collect()
}

fn leading_part(poly: &MomentPoly<RatN>, n: usize) -> Result<GradedPolynomial> {
    let mut out = GradedPolynomial::new();
    let mut top_seen = false;
    for (m, c) in poly.terms() {
        match c.degree() {
            Some(d) if d > 2 => {
                return Err(Error::Internal(format!(
                    "log coefficient of s^-{n} at {} grows like N^{d}",
                    m.key()
                )))
            }
            Some(2) => top_seen = true,
            _ => {}
        }
        out.add_term(m.clone(), &c.coefficient_at_infinity(2));
    }
    if !top_seen {
        return Err(Error::Internal(format!("log coefficient of s^-{n} has no N^2 term")));
    }
    Ok(out)
}

/// Numeric truncated character series at finite integer `N`.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    /// Exact sum of the retained terms (inputs converted exactly from `f64`).
    pub exact: Rational,
    pub value: f64,
    /// Upper bound on the neglected tail.
    pub remainder_bound: f64,
    pub order: usize,
}

/// `Σ_{n ≤ order} (N/s)^n Σ_{λ ⊢ n, ℓ(λ) ≤ N} χ_λ(a) χ_λ(b) / ∏_{□∈λ}(N + c(□))`.
///
/// The tail is bounded by `Σ_{n > order} x^n/n!` with `x = N² max|a| max|b| / s`,
/// since `|Tr AUBU†| ≤ N max|a| max|b|`.
pub fn character_series_numeric(a: &[f64], b: &[f64], s: f64, order: usize) -> Result<SeriesValue> {
    let n_size = a.len();
    if n_size == 0 || b.len() != n_size {
        return Err(Error::domain("eigenvalue lists must be nonempty and of equal length"));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::domain(format!("coupling s must be positive, got {s}")));
    }
    let ra: Vec<Rational> = a.iter().map(|&x| rational_from_f64(x)).collect::<Result<_>>()?;
    let rb: Vec<Rational> = b.iter().map(|&x| rational_from_f64(x)).collect::<Result<_>>()?;
    let rs = rational_from_f64(s)?;
    let big_n = int(n_size as i64);
    let power_sums = |v: &[Rational], p: usize| -> Rational { v.iter().map(|x| x.pow(p as i32)).sum() };
    let pa: Vec<Rational> = (1..=order).map(|p| power_sums(&ra, p)).collect();
    let pb: Vec<Rational> = (1..=order).map(|p| power_sums(&rb, p)).collect();
    let p_alpha = |ps: &[Rational], alpha: &ClassVector| -> Rational {
        alpha
            .mult()
            .iter()
            .enumerate()
            .fold(int(1), |acc, (i, &m)| acc * ps[i].pow(m as i32))
    };

    let mut total = int(1);
    for n in 1..=order as u32 {
        let table = CharacterTable::new(n);
        let classes: Vec<ClassVector> = partitions(n).iter().map(ClassVector::from_partition).collect();
        let z: Vec<Rational> = classes.iter().map(|c| Rational::from_integer(c.z())).collect();
        let tr_a: Vec<Rational> = classes.iter().zip(&z).map(|(c, z)| p_alpha(&pa, c) / z).collect();
        let tr_b: Vec<Rational> = classes.iter().zip(&z).map(|(c, z)| p_alpha(&pb, c) / z).collect();
        let mut term = int(0);
        for (il, lambda) in table.partitions().iter().enumerate() {
            if lambda.len() > n_size {
                continue;
            }
            let chi = |tr: &[Rational]| -> Rational {
                tr.iter().enumerate().map(|(j, t)| t * int(table.value(il, j))).sum()
            };
            let denom = content_product(lambda).eval(&big_n);
            term += chi(&tr_a) * chi(&tr_b) / denom;
        }
        total += term * (&big_n / &rs).pow(n as i32);
    }

    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let x = (n_size * n_size) as f64 * max_abs(a) * max_abs(b) / s;
    Ok(SeriesValue { value: rational_to_f64(&total), exact: total, remainder_bound: exp_tail(x, order), order })
}

/// `Σ_{n > order} x^n/n!` bounded by a geometric majorant; infinite when it diverges.
pub fn exp_tail(x: f64, order: usize) -> f64 {
    let m = order as f64 + 1.0;
    if x == 0.0 {
        return 0.0;
    }
    if x >= m + 1.0 {
        return f64::INFINITY;
    }
    let mut first = 1.0;
    for k in 1..=order + 1 {
        first *= x / k as f64;
    }
    first / (1.0 - x / (m + 1.0))
}

/// Laurent coefficients at `N = ∞` of every monomial of a log coefficient,
/// from `N^2` downwards (`terms` entries each).
pub fn genus_expansion(poly: &MomentPoly<RatN>, terms: usize) -> Vec<(Monomial, Vec<Rational>)> {
    poly.terms()
        .map(|(m, c)| {
            let coeffs = (0..terms).map(|k| c.coefficient_at_infinity(2 - k as i64)).collect();
            (m.clone(), coeffs)
        })
        .collect()
}

/// True when every coefficient of `n·F_n` is an integer; otherwise the offending monomials.
pub fn integrality_violations(f_n: &GradedPolynomial, n: usize) -> Vec<(String, Rational)> {
    f_n.terms()
        .map(|(m, c)| (m.key(), c * int(n as i64)))
        .filter(|(_, c)| !c.denom().is_one())
        .collect()
}

/// Sum of absolute values of coefficients, handy for growth diagnostics.
pub fn l1_norm(p: &GradedPolynomial) -> f64 {
    p.terms().map(|(_, c)| c.abs().to_f64().unwrap_or(f64::INFINITY)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, shift_moments, shift_moments_by};
    use crate::symfun::moments_to_free_cumulants;

    fn mono(a: &[u32], b: &[u32]) -> Monomial {
        Monomial::new(a.to_vec(), b.to_vec())
    }

    #[test]
    fn low_order_coefficients() {
        let s = character_series(2);
        assert_eq!(*s.coeff(0), MomentPoly::constant(RatN::one()));
        assert_eq!(*s.coeff(1), MomentPoly::monomial(mono(&[1], &[1]), RatN::n_pow(2)));
        // N^4 / (2(N^2 - 1))
        let expected = RatN::new(
            UPoly::new(vec![int(0), int(0), int(0), int(0), rat(1, 2)]),
            UPoly::new(vec![int(-1), int(0), int(1)]),
        );
        assert_eq!(s.coeff(2).coeff(&mono(&[0, 1], &[0, 1])), expected);
    }

    #[test]
    fn oracle_low_orders() {
        let f = free_energy_oracle(3).unwrap();
        assert_eq!(f[0], GradedPolynomial::monomial(mono(&[1], &[1]), int(1)));
        // F_2 = (θ2 - θ1²)(θ̄2 - θ̄1²)/2
        let t = GradedPolynomial::theta(2).sub(&GradedPolynomial::theta(1).pow(2));
        let tb = GradedPolynomial::theta_bar(2).sub(&GradedPolynomial::theta_bar(1).pow(2));
        assert_eq!(f[1], t.mul(&tb).scale(&rat(1, 2)));
        assert_eq!(f[2].coeff(&mono(&[0, 0, 1], &[0, 0, 1])), rat(1, 3));
    }

    #[test]
    fn graded_and_symmetric() {
        for (i, f) in free_energy_oracle(5).unwrap().iter().enumerate() {
            assert!(f.is_graded());
            assert!(f.terms().all(|(m, _)| m.a_weight() == i as u64 + 1));
            assert_eq!(f.swapped(), *f);
        }
    }

    #[test]
    fn genus_expansion_has_even_powers_only() {
        let log = log_character_series(5).unwrap();
        for n in 1..=5 {
            for (m, c) in genus_expansion(log.coeff(n), 8) {
                for (k, v) in c.iter().enumerate() {
                    if k % 2 == 1 {
                        assert_eq!(*v, int(0), "odd power N^{} in {} at order {n}", 2 - k as i64, m.key());
                    }
                }
            }
        }
    }

    #[test]
    fn shift_identity_symbolic() {
        let f = free_energy_oracle(5).unwrap();
        let (t1, tb1) = (GradedPolynomial::theta(1), GradedPolynomial::theta_bar(1));
        for (i, fn_) in f.iter().enumerate() {
            let mut shifted = shift_moments_by(fn_, &t1, &tb1);
            if i == 0 {
                shifted = shifted.add(&t1.mul(&tb1));
            }
            assert_eq!(shifted, *fn_, "order {}", i + 1);
        }
    }

    #[test]
    fn shift_identity_numeric() {
        let f = free_energy_oracle(4).unwrap();
        let theta = [rat(1, 3), rat(-2, 5), rat(1, 7), rat(3, 2)];
        let theta_bar = [rat(2, 9), rat(1, 4), rat(-1, 6), rat(5, 8)];
        let (c, cb) = (rat(1, 5), rat(-3, 7));
        for (i, fn_) in f.iter().enumerate().skip(1) {
            let shifted = shift_moments(fn_, &c, &cb);
            assert_eq!(shifted.evaluate(&theta, &theta_bar), fn_.evaluate(&theta, &theta_bar), "order {}", i + 1);
        }
    }

    #[test]
    fn linear_response_is_free_cumulant() {
        let q_max = 5;
        let f = free_energy_oracle(q_max).unwrap();
        let moments: Vec<GradedPolynomial> = (1..=q_max).map(GradedPolynomial::theta_bar).collect();
        let phi = moments_to_free_cumulants(&moments, q_max).unwrap();
        for q in 1..=q_max {
            let linear = f[q - 1].filter(|m| m.a_exponents() == Monomial::theta(q).a_exponents());
            let derivative = linear.d_theta(q);
            assert_eq!(derivative, phi[q - 1].scale(&rat(1, q as i64)), "q = {q}");
        }
    }

    #[test]
    fn numeric_series_small_coupling() {
        // N = 1: I = exp(a b / s)
        let v = character_series_numeric(&[0.5], &[0.25], 4.0, 10).unwrap();
        assert!((v.value - (0.5f64 * 0.25 / 4.0).exp()).abs() < 1e-14);
        assert!(v.remainder_bound < 1e-20);
    }

    #[test]
    fn exp_tail_bound() {
        let exact: f64 = (7..40).map(|k| 0.5f64.powi(k) / (1..=k).map(f64::from).product::<f64>()).sum();
        let bound = exp_tail(0.5, 6);
        assert!(bound >= exact && bound < 1.1 * exact);
        assert!(exp_tail(100.0, 3).is_infinite());
    }
}

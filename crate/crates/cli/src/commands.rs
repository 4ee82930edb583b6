use std::path::Path;

use serde_json::{json, Value};

use hciz::algebra::{format_rational, int, parse_rational, rational_to_f64, GradedPolynomial, Rational};
use hciz::cache::{compute_and_cache, Method};
use hciz::dispersionless::{
    build_curve, diagonal_series, free_energy_one_sided, m_expansion_deviation, psi_numeric, psi_series, OneSidedData,
};
use hciz::exact::{self, eval_rectangular, eval_unitary_integral, Evaluation, PrecisionPolicy, RectangularData, SpectralData};
use hciz::mc::{mc_estimate, McTarget};
use hciz::planar::EnumOptions;
use hciz::symfun::moments_to_free_cumulants;
use hciz::toda::{tau, toda_check as toda_residual, TodaTimes};
use hciz::{Error, Result};

use crate::output::Report;

/// A report, plus an error to exit with after printing it.
pub type Outcome = Result<(Report, Option<Error>)>;

fn parse_list<T>(s: &str, what: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::domain(format!("{what} must be a non-empty comma-separated list")));
    }
    items.into_iter().map(f).collect()
}

fn parse_reals(s: &str, what: &str) -> Result<Vec<f64>> {
    parse_list(s, what, |t| match t.parse::<f64>() {
        Ok(x) => Ok(x),
        Err(_) => parse_rational(t).map(|r| rational_to_f64(&r)),
    })
}

fn parse_rationals(s: &str, what: &str) -> Result<Vec<Rational>> {
    parse_list(s, what, parse_rational)
}

/// `(bits, target relative error, max bits)`
pub type PrecisionArgs = (usize, f64, usize);

fn policy((bits, target, max_bits): PrecisionArgs) -> Result<PrecisionPolicy> {
    let mut p = PrecisionPolicy::with_bits(bits)?;
    if !(target > 0.0) {
        return Err(Error::domain(format!("target relative error must be positive, got {target}")));
    }
    if max_bits < bits {
        return Err(Error::domain(format!("--max-bits {max_bits} is below --prec-bits {bits}")));
    }
    p.target_rel_error = target;
    p.max_bits = max_bits;
    Ok(p)
}

fn evaluation_report(e: &Evaluation) -> Report {
    let branch = format!("{:?}", e.branch).to_lowercase();
    let json = json!({
        "value": e.value,
        "error_bound": e.error_bound,
        "decimal": e.decimal,
        "bits": e.bits,
        "branch": branch,
    });
    let rows = vec![vec![
        e.decimal.clone(),
        format!("{:e}", e.error_bound),
        e.bits.to_string(),
        branch,
    ]];
    Report::new(json, vec!["value", "error_bound", "bits", "branch"], rows)
}

pub fn eval(a: &str, b: &str, s: f64, prec: PrecisionArgs) -> Outcome {
    let d = SpectralData::new(parse_reals(a, "--a")?, parse_reals(b, "--b")?, s)?;
    let e = eval_unitary_integral(&d, &policy(prec)?)?;
    Ok((evaluation_report(&e), None))
}

pub fn eval_rect(n1: usize, n2: usize, a: &str, b: &str, s: f64, prec: PrecisionArgs) -> Outcome {
    let d = RectangularData::new(n1, n2, parse_reals(a, "--a")?, parse_reals(b, "--b")?, s)?;
    let e = eval_rectangular(&d, &policy(prec)?)?;
    Ok((evaluation_report(&e), None))
}

pub fn eval_chain(sizes: &str, a: &str, b: &str, s: f64, prec: PrecisionArgs) -> Outcome {
    let sizes = parse_list(sizes, "--sizes", |t| {
        t.parse::<usize>().map_err(|_| Error::domain(format!("bad size {t:?}")))
    })?;
    let e = exact::eval_chain(&sizes, &parse_reals(a, "--a")?, &parse_reals(b, "--b")?, s, &policy(prec)?)?;
    Ok((evaluation_report(&e), None))
}

fn poly_json(p: &GradedPolynomial) -> Value {
    let map: serde_json::Map<String, Value> = p.to_text_terms().into_iter().map(|(k, v)| (k, Value::String(v))).collect();
    Value::Object(map)
}

fn poly_rows(label: &str, p: &GradedPolynomial, rows: &mut Vec<Vec<String>>) {
    for (k, v) in p.to_text_terms() {
        rows.push(vec![label.to_string(), k, v]);
    }
}

pub fn free_energy(order: usize, method: Method, cache: Option<&Path>, threads: Option<usize>) -> Outcome {
    if order == 0 {
        return Err(Error::domain("free energy order must be at least 1"));
    }
    let opts = EnumOptions { threads, ..EnumOptions::default() };
    let mut polys = Vec::with_capacity(order);
    let mut cached = Vec::with_capacity(order);
    match cache {
        Some(path) => {
            for n in 1..=order {
                let out = compute_and_cache(n, method, path, &opts)?;
                polys.push(out.record.polynomial()?);
                cached.push(out.from_cache);
            }
        }
        None => {
            let all = match method {
                Method::Enum => hciz::planar::free_energy_enum_with(order, &opts)?,
                Method::Oracle => hciz::series::free_energy_oracle(order)?,
            };
            cached = vec![false; all.len()];
            polys = all;
        }
    }
    let mut rows = Vec::new();
    let mut orders = Vec::new();
    for (i, p) in polys.iter().enumerate() {
        poly_rows(&(i + 1).to_string(), p, &mut rows);
        orders.push(json!({
            "order": i + 1,
            "cached": cached[i],
            "coefficients": poly_json(p),
            "integrality_violations": hciz::series::integrality_violations(p, i + 1)
                .into_iter()
                .map(|(k, v)| json!({"monomial": k, "n_times_coefficient": format_rational(&v)}))
                .collect::<Vec<_>>(),
        }));
    }
    let json = json!({"method": method.name(), "orders": orders});
    Ok((Report::new(json, vec!["order", "monomial", "coefficient"], rows), None))
}

pub fn toda_check(n: usize, order: usize, times: &str) -> Outcome {
    let times = TodaTimes::parse(times)?;
    let residual = toda_residual(n, &times, order)?;
    let tau_n = tau(n, &times, order);
    let fmt = |c: &[Rational]| c.iter().map(format_rational).collect::<Vec<_>>();
    let zero = residual.coeffs().iter().all(|c| *c == int(0));
    let rows: Vec<Vec<String>> = (0..=order)
        .map(|k| vec![k.to_string(), format_rational(tau_n.coeff(k)), format_rational(residual.coeff(k))])
        .collect();
    let json = json!({
        "n": n,
        "order": order,
        "tau": fmt(tau_n.coeffs()),
        "residual": fmt(residual.coeffs()),
        "satisfied": zero,
    });
    let failure = (!zero).then(|| Error::Mismatch(format!("Toda residual for n={n} is nonzero")));
    Ok((Report::new(json, vec!["power_of_inv_hbar", "tau", "residual"], rows), failure))
}

pub fn one_sided(n: usize, order: usize, theta: Option<&str>) -> Outcome {
    if n == 0 || order == 0 {
        return Err(Error::domain("need n >= 1 and order >= 1"));
    }
    let psi = psi_series(n, order);
    let f = free_energy_one_sided(n, order);
    let mut rows = Vec::new();
    poly_rows("psi", &psi, &mut rows);
    poly_rows("F", &f, &mut rows);
    let mut json = json!({"case": "one-sided", "n": n, "order": order, "psi": poly_json(&psi), "F": poly_json(&f)});
    if let Some(theta) = theta {
        let theta = parse_rationals(theta, "--theta")?;
        if theta.len() > n {
            return Err(Error::domain(format!("--theta has {} entries but n = {n}", theta.len())));
        }
        let d = OneSidedData::new(theta);
        let psi_value = psi_numeric(&d, 1e-15)?;
        let curve = build_curve(&d, psi_value)?;
        let deviation = m_expansion_deviation(&d, n, order.max(24), 1e-15)?;
        let disc = curve.discriminant_residual();
        rows.push(vec!["psi_numeric".into(), String::new(), format!("{psi_value:.17e}")]);
        for (k, q) in curve.q.iter().enumerate() {
            rows.push(vec!["Q".into(), format!("l^{k}"), format!("{q:.17e}")]);
        }
        rows.push(vec!["m_expansion_deviation".into(), String::new(), format!("{deviation:e}")]);
        rows.push(vec!["discriminant_residual".into(), String::new(), format!("{disc:e}")]);
        json["curve"] = json!({
            "psi": psi_value,
            "Q": curve.q,
            "m_coefficients": curve.m_coefficients(n),
            "m_expansion_deviation": deviation,
            "discriminant_residual": disc,
        });
    }
    Ok((Report::new(json, vec!["series", "monomial", "coefficient"], rows), None))
}

pub fn diagonal(n: usize, order: usize) -> Outcome {
    let (psi, f) = diagonal_series(n, order)?;
    let rows = (0..=order).map(|k| vec![k.to_string(), format_rational(&psi[k]), format_rational(&f[k])]).collect();
    let json = json!({
        "case": "diagonal",
        "n": n,
        "psi": psi.iter().map(format_rational).collect::<Vec<_>>(),
        "F": f.iter().map(format_rational).collect::<Vec<_>>(),
    });
    Ok((Report::new(json, vec!["k", "psi", "F"], rows), None))
}

pub fn mc(n: usize, n1: Option<usize>, a: &str, b: &str, s: f64, samples: usize, seed: u64) -> Outcome {
    let (a, b) = (parse_reals(a, "--a")?, parse_reals(b, "--b")?);
    if a.len() != n || b.len() != n {
        return Err(Error::domain(format!("--a and --b need {n} values each")));
    }
    let est = match n1 {
        None => mc_estimate(McTarget::Unitary(&SpectralData::new(a, b, s)?), samples, seed)?,
        Some(n1) => mc_estimate(McTarget::Rectangular(&RectangularData::new(n1, n, a, b, s)?), samples, seed)?,
    };
    let json = serde_json::to_value(est).expect("estimate serializes");
    let rows = vec![vec![
        format!("{:.12e}", est.mean),
        format!("{:.6e}", est.std_error),
        est.samples.to_string(),
        est.seed.to_string(),
    ]];
    Ok((Report::new(json, vec!["mean", "std_error", "samples", "seed"], rows), None))
}

pub fn cumulants(moments: &str, q: usize) -> Outcome {
    if q == 0 {
        return Err(Error::domain("--q must be at least 1"));
    }
    let mut m = parse_rationals(moments, "--moments")?;
    m.resize(m.len().max(q), int(0));
    let phi = moments_to_free_cumulants(&m, q)?;
    let rows = phi.iter().enumerate().map(|(i, c)| vec![(i + 1).to_string(), format_rational(c)]).collect();
    let json = json!({"cumulants": phi.iter().map(format_rational).collect::<Vec<_>>()});
    Ok((Report::new(json, vec!["q", "cumulant"], rows), None))
}

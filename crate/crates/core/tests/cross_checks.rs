//! Monte Carlo against the exact evaluators away from the trivial sizes.

use hciz::exact::{eval_rectangular, eval_unitary_integral, PrecisionPolicy, RectangularData, SpectralData};
use hciz::mc::{mc_estimate, McTarget};

const SAMPLES: usize = 40_000;
const SIGMAS: f64 = 4.0;

#[test]
fn rectangular_three_by_two() {
    let d = RectangularData::new(3, 2, vec![0.3, 1.1], vec![0.5, 0.8], 1.5).unwrap();
    let exact = eval_rectangular(&d, &PrecisionPolicy::default()).unwrap().value;
    let est = mc_estimate(McTarget::Rectangular(&d), SAMPLES, 11).unwrap();
    assert!((est.mean - exact).abs() < SIGMAS * est.std_error, "{} ± {} vs {exact}", est.mean, est.std_error);
}

#[test]
fn unitary_three() {
    let d = SpectralData::new(vec![-0.4, 0.2, 0.9], vec![0.1, 0.6, -0.7], 2.0).unwrap();
    let exact = eval_unitary_integral(&d, &PrecisionPolicy::default()).unwrap().value;
    let est = mc_estimate(McTarget::Unitary(&d), SAMPLES, 5).unwrap();
    assert!((est.mean - exact).abs() < SIGMAS * est.std_error, "{} ± {} vs {exact}", est.mean, est.std_error);
}

#[test]
fn swapped_and_permuted_spectra_agree() {
    let a = vec![0.0, 0.5, 1.0];
    let b = vec![0.2, -0.3, 0.7];
    let base = SpectralData::new(a.clone(), b.clone(), 1.5).unwrap();
    let swapped = SpectralData::new(b.clone(), a.clone(), 1.5).unwrap();
    let permuted = SpectralData::new(vec![a[2], a[0], a[1]], b, 1.5).unwrap();
    let x = mc_estimate(McTarget::Unitary(&base), SAMPLES, 1).unwrap();
    for other in [&swapped, &permuted] {
        let y = mc_estimate(McTarget::Unitary(other), SAMPLES, 2).unwrap();
        let se = x.std_error.hypot(y.std_error);
        assert!((x.mean - y.mean).abs() < SIGMAS * se, "{} vs {}", x.mean, y.mean);
    }
}

//! Haar Monte Carlo for the square and rectangular integrals.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{RectangularData, SpectralData};

/// Samples per independent random stream.
pub const SHARD_SIZE: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// sample standard deviation over `√samples`
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Haar unitary: QR of a complex Ginibre matrix, with the columns of `Q`
/// rephased so that `R` has a positive real diagonal.
pub fn sample_haar<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    assert!(n >= 1, "unitary size must be positive");
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Integrand of either integral.
#[derive(Clone, Copy, Debug)]
pub enum McTarget<'a> {
    /// `exp((N/s) Tr A U B U†)`
    Unitary(&'a SpectralData),
    /// `exp((N₂/s) Tr(A U B V† + h.c.))` with `U ∈ U(N₂)`, `V ∈ U(N₁)`
    Rectangular(&'a RectangularData),
}

impl McTarget<'_> {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            McTarget::Unitary(d) => {
                let n = d.n();
                let u = sample_haar(n, rng);
                let mut tr = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        tr += d.a[i] * d.b[j] * u[(i, j)].norm_sqr();
                    }
                }
                (n as f64 / d.s * tr).exp()
            }
            McTarget::Rectangular(d) => {
                let u = sample_haar(d.n2, rng);
                let v = sample_haar(d.n1, rng);
                let mut tr = 0.0;
                for i in 0..d.n2 {
                    for j in 0..d.n2 {
                        tr += (d.a[i] * d.b[j]).sqrt() * (u[(i, j)] * v[(i, j)].conj()).re;
                    }
                }
                (d.n2 as f64 / d.s * 2.0 * tr).exp()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * self.count as f64 * other.count as f64 / count as f64;
        Moments { count, mean, m2 }
    }
}

/// Stream for shard `index` of a run seeded with `seed`.
pub fn shard_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mean and standard error of the integrand over `samples` Haar draws.
/// The result depends only on the inputs, `samples` and `seed`.
pub fn mc_estimate(target: McTarget<'_>, samples: usize, seed: u64) -> Result<McEstimate> {
    if samples < 100 {
        return Err(Error::domain(format!("need at least 100 samples, got {samples}")));
    }
    let shards = samples.div_ceil(SHARD_SIZE);
    let parts: Vec<Moments> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = shard_rng(seed, k as u64);
            let len = SHARD_SIZE.min(samples - k * SHARD_SIZE);
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(target.sample(&mut rng));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = total.m2 / (total.count - 1) as f64;
    Ok(McEstimate { mean: total.mean, std_error: (var / total.count as f64).sqrt(), samples, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
        let n = u.nrows();
        let p = u.adjoint() * u;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    #[test]
    fn samples_are_unitary() {
        let mut rng = shard_rng(7, 0);
        for n in 1..6 {
            for _ in 0..50 {
                assert!(max_unitarity_defect(&sample_haar(n, &mut rng)) < 1e-12);
            }
        }
    }

    #[test]
    fn u1_phase_is_uniform() {
        let mut rng = shard_rng(3, 0);
        let count = 20000;
        let mut bins = [0usize; 4];
        let (mut c, mut s) = (0.0, 0.0);
        for _ in 0..count {
            let z = sample_haar(1, &mut rng)[(0, 0)];
            assert!((z.norm() - 1.0).abs() < 1e-14);
            let arg = z.arg() + std::f64::consts::PI;
            bins[((arg / std::f64::consts::FRAC_PI_2) as usize).min(3)] += 1;
            c += z.re;
            s += z.im;
        }
        for b in bins {
            assert!((b as f64 - count as f64 / 4.0).abs() < 4.0 * (count as f64 * 0.1875).sqrt());
        }
        assert!((c / count as f64).abs() < 4.0 / (2.0 * count as f64).sqrt());
        assert!((s / count as f64).abs() < 4.0 / (2.0 * count as f64).sqrt());
    }

    #[test]
    fn first_entry_second_moment() {
        let n = 3;
        let count = 100_000;
        let mut rng = shard_rng(11, 0);
        let mut m = Moments::default();
        for _ in 0..count {
            m.push(sample_haar(n, &mut rng)[(0, 0)].norm_sqr());
        }
        let se = (m.m2 / (count - 1) as f64 / count as f64).sqrt();
        assert!((m.mean - 1.0 / n as f64).abs() < 4.0 * se, "{} ± {se}", m.mean);
    }

    #[test]
    fn constant_integrand() {
        let d = SpectralData::new(vec![0.3, -1.0], vec![0.0, 0.0], 1.0).unwrap();
        let e = mc_estimate(McTarget::Unitary(&d), 500, 1).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let d = SpectralData::new(vec![0.0, 1.0], vec![0.0, 1.0], 2.0).unwrap();
        let a = mc_estimate(McTarget::Unitary(&d), 10_000, 42).unwrap();
        let b = mc_estimate(McTarget::Unitary(&d), 10_000, 42).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = mc_estimate(McTarget::Unitary(&d), 10_000, 43).unwrap();
        assert_ne!(a.mean.to_bits(), c.mean.to_bits());
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut parts = Moments::default();
        for chunk in xs.chunks(77) {
            let mut m = Moments::default();
            chunk.iter().for_each(|&x| m.push(x));
            parts = parts.merge(m);
        }
        assert_eq!(parts.count, whole.count);
        assert!((parts.mean - whole.mean).abs() < 1e-12);
        assert!((parts.m2 - whole.m2).abs() < 1e-8 * whole.m2);
    }

    #[test]
    fn rejects_few_samples() {
        let d = SpectralData::new(vec![1.0], vec![1.0], 1.0).unwrap();
        assert!(mc_estimate(McTarget::Unitary(&d), 99, 0).is_err());
    }
}

//! Gaussian transition kernel for a single vacuum-fluctuation step and the
//! position/momentum uncertainty product it implies.
//!
//! Draws use ChaCha8 seeded with `seed` and stream-selected by block index,
//! mapped through `rand_distr::StandardNormal` (ziggurat). Both are
//! platform-independent, so a `(seed, block)` pair always yields the same
//! displacements.

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// Minimum sample count for [`uncertainty_product`].
pub const MIN_UNCERTAINTY_SAMPLES: usize = 1000;

/// Fluctuation kernel of one particle over one step `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    mass: f64,
    hbar: f64,
    dt: f64,
}

impl KernelSpec {
    pub fn new(mass: f64, hbar: f64, dt: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("hbar", hbar), ("dt", dt)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self { mass, hbar, dt })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `hbar dt / 2m`.
    pub fn variance(&self) -> f64 {
        self.hbar * self.dt / (2.0 * self.mass)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// `exp(-m w^2 / (hbar dt)) / sqrt(pi hbar dt / m)`.
pub fn kernel_pdf(spec: &KernelSpec, w: f64) -> f64 {
    let a = spec.hbar * spec.dt / spec.mass;
    (-w * w / a).exp() / (PI * a).sqrt()
}

pub fn kernel_cdf(spec: &KernelSpec, w: f64) -> f64 {
    0.5 * (1.0 + erf(w / (spec.std_dev() * SQRT_2)))
}

/// Joint kernel of two independent particles; it factorizes by construction.
pub fn joint_kernel_pdf(a: &KernelSpec, b: &KernelSpec, wa: f64, wb: f64) -> f64 {
    kernel_pdf(a, wa) * kernel_pdf(b, wb)
}

/// Generator for block `block` of the stream rooted at `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// `count` i.i.d. displacements from block 0.
pub fn sample(spec: &KernelSpec, count: usize, seed: u64) -> Vec<f64> {
    sample_block(spec, count, seed, 0)
}

pub fn sample_block(spec: &KernelSpec, count: usize, seed: u64, block: u64) -> Vec<f64> {
    let mut rng = block_rng(seed, block);
    let s = spec.std_dev();
    (0..count)
        .map(|_| s * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Sample mean and population variance about that mean.
pub fn mean_and_variance(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// `dx * dp` with `dx = std(w)` and `dp = m std(w) / dt`.
pub fn uncertainty_product(spec: &KernelSpec, samples: &[f64]) -> Result<f64> {
    if samples.len() < MIN_UNCERTAINTY_SAMPLES {
        return Err(Error::TooFewSamples {
            need: MIN_UNCERTAINTY_SAMPLES,
            got: samples.len(),
        });
    }
    let (_, var) = mean_and_variance(samples);
    Ok(product_from_std(spec, var.sqrt()))
}

/// The product evaluated at the kernel's exact standard deviation.
pub fn uncertainty_product_exact(spec: &KernelSpec) -> f64 {
    product_from_std(spec, spec.std_dev())
}

fn product_from_std(spec: &KernelSpec, sd: f64) -> f64 {
    let dp = spec.mass * sd / spec.dt;
    sd * dp
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and
/// the kernel CDF.
pub fn ks_statistic(spec: &KernelSpec, samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let f = kernel_cdf(spec, w);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Summary row reported alongside a sample dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub product: f64,
}

pub fn summarize(spec: &KernelSpec, samples: &[f64]) -> Result<SampleSummary> {
    let (mean, variance) = mean_and_variance(samples);
    Ok(SampleSummary {
        n: samples.len(),
        mean,
        variance,
        product: uncertainty_product(spec, samples)?,
    })
}

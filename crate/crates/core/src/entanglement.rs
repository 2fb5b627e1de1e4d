//! Reduced density matrices, purity and Schmidt analysis of two-axis wave
//! fields, plus separability verdicts for wave fields and joint densities.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{expect_axes, DensityField, WaveField};
use crate::grid::{Axis, SpatialGrid};

/// Largest grid (points per axis) accepted by [`brute_force_purity`].
pub const BRUTE_FORCE_MAX_POINTS: usize = 64;

/// Number of Schmidt coefficients written per CSV row.
pub const REPORTED_COEFFICIENTS: usize = 8;

/// `sigma(x, x') = sum_{x_other} Psi(x, .) Psi*(x', .) dx_other` on the kept
/// axis. Quadrature weight of the traced axis is folded in; traces and
/// products over the kept axis take one factor `dx` per index sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensity {
    pub grid: SpatialGrid,
    pub matrix: DMatrix<Complex64>,
}

/// Consistency figures of a [`ReducedDensity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDiagnostics {
    pub hermitian_error: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl ReducedDensity {
    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|v| v.re).sum::<f64>() * self.grid.spacing()
    }

    /// Eigenvalues of the operator (matrix times `dx`), descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let dx = self.grid.spacing();
        let n = self.matrix.nrows();
        let op = faer::Mat::from_fn(n, n, |i, j| self.matrix[(i, j)] * dx);
        let mut ev = op
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|_| Error::NoConvergence("hermitian eigendecomposition"))?;
        ev.sort_by(|a, b| b.total_cmp(a));
        Ok(ev)
    }

    pub fn diagnostics(&self) -> Result<ReducedDiagnostics> {
        let adj = self.matrix.adjoint();
        let hermitian_error = (&self.matrix - adj)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        let min_eigenvalue = self.eigenvalues()?.last().copied().unwrap_or(0.0);
        Ok(ReducedDiagnostics {
            hermitian_error,
            trace: self.trace(),
            min_eigenvalue,
        })
    }
}

fn amplitude_matrix(psi: &WaveField) -> Result<DMatrix<Complex64>> {
    expect_axes(psi.grid(), 2)?;
    let n = psi.grid().points();
    Ok(DMatrix::from_row_slice(n, n, psi.values()))
}

/// Reduced density of subsystem A.
pub fn reduced_density(psi: &WaveField) -> Result<ReducedDensity> {
    reduced_density_of(psi, Axis::A)
}

pub fn reduced_density_of(psi: &WaveField, keep: Axis) -> Result<ReducedDensity> {
    let m = amplitude_matrix(psi)?;
    let m = match keep {
        Axis::A => m,
        Axis::B => m.transpose(),
    };
    let dx = psi.grid().spacing();
    let matrix = (&m * m.adjoint()).scale(dx);
    Ok(ReducedDensity {
        grid: psi.grid().axis_grid(),
        matrix,
    })
}

/// `Tr(sigma^2) = sum |sigma(x, x')|^2 dx^2`.
pub fn purity(sigma: &ReducedDensity) -> f64 {
    let dx = sigma.grid.spacing();
    sigma.matrix.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx * dx
}

/// Direct four-fold sum
/// `sum Psi(a,b) Psi*(a',b) Psi(a',b') Psi*(a,b') dx^4`.
pub fn brute_force_purity(psi: &WaveField) -> Result<f64> {
    expect_axes(psi.grid(), 2)?;
    let n = psi.grid().points();
    if n > BRUTE_FORCE_MAX_POINTS {
        return Err(Error::GridTooLarge { points: n });
    }
    let v = psi.values();
    let at = |a: usize, b: usize| v[a * n + b];
    let mut total = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for ap in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..n {
                let left = at(a, b) * at(ap, b).conj();
                for bp in 0..n {
                    acc += left * at(ap, bp) * at(a, bp).conj();
                }
            }
            total += acc;
        }
    }
    Ok(total.re * psi.grid().spacing().powi(4))
}

/// Singular values of `dx Psi` (the weighted amplitude matrix), descending.
pub fn schmidt_spectrum(psi: &WaveField) -> Result<Vec<f64>> {
    expect_axes(psi.grid(), 2)?;
    let n = psi.grid().points();
    let dx = psi.grid().spacing();
    let v = psi.values();
    let m = faer::Mat::from_fn(n, n, |i, j| v[i * n + j] * dx);
    let mut s = m
        .singular_values()
        .map_err(|_| Error::NoConvergence("singular value decomposition"))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Schmidt coefficients at or below this count as zero.
    pub rank: f64,
    /// L1 distance below which a joint density counts as a product.
    pub distance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            rank: 1e-6,
            distance: 1e-6,
        }
    }
}

/// Input to [`separability_test`].
#[derive(Debug, Clone, Copy)]
pub enum Joint<'a> {
    Wave(&'a WaveField),
    Density(&'a DensityField),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparabilityMethod {
    /// Second Schmidt coefficient against the rank threshold.
    SchmidtRank,
    /// L1 distance between the density and the product of its marginals.
    MarginalProduct,
}

/// Attached to every density-level verdict.
pub const DENSITY_CAVEAT: &str = "density-level test: a product density is necessary for a \
separable pure state, but an inseparable density does not witness entanglement \
(classical mixtures are inseparable too)";

#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityVerdict {
    pub separable: bool,
    pub method: SeparabilityMethod,
    /// `lambda_2` or the L1 distance, depending on the method.
    pub statistic: f64,
    pub threshold: f64,
    pub caveat: Option<&'static str>,
}

impl SeparabilityVerdict {
    pub fn label(&self) -> &'static str {
        if self.separable {
            "separable"
        } else {
            "inseparable"
        }
    }
}

pub fn separability_test(joint: Joint<'_>, thresholds: Thresholds) -> Result<SeparabilityVerdict> {
    match joint {
        Joint::Wave(psi) => {
            let s = schmidt_spectrum(psi)?;
            let lambda2 = s.get(1).copied().unwrap_or(0.0);
            Ok(SeparabilityVerdict {
                separable: lambda2 < thresholds.rank,
                method: SeparabilityMethod::SchmidtRank,
                statistic: lambda2,
                threshold: thresholds.rank,
                caveat: None,
            })
        }
        Joint::Density(rho) => {
            let d = marginal_product_distance(rho)?;
            Ok(SeparabilityVerdict {
                separable: d < thresholds.distance,
                method: SeparabilityMethod::MarginalProduct,
                statistic: d,
                threshold: thresholds.distance,
                caveat: Some(DENSITY_CAVEAT),
            })
        }
    }
}

/// `|| rho - rho_a (x) rho_b ||_1` with marginals taken from `rho` itself.
pub fn marginal_product_distance(rho: &DensityField) -> Result<f64> {
    let a = rho.marginal(Axis::A)?;
    let b = rho.marginal(Axis::B)?;
    rho.l1_distance(&DensityField::outer(&a, &b)?)
}

/// Per-snapshot entanglement figures.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementReport {
    pub time: f64,
    pub purity: f64,
    pub measure: f64,
    pub schmidt: Vec<f64>,
    pub rank: usize,
    pub verdict: SeparabilityVerdict,
}

impl EntanglementReport {
    pub fn new(psi: &WaveField, time: f64, thresholds: Thresholds) -> Result<Self> {
        let p = purity(&reduced_density(psi)?);
        let schmidt = schmidt_spectrum(psi)?;
        let rank = schmidt.iter().filter(|&&l| l > thresholds.rank).count();
        let lambda2 = schmidt.get(1).copied().unwrap_or(0.0);
        let verdict = SeparabilityVerdict {
            separable: lambda2 < thresholds.rank,
            method: SeparabilityMethod::SchmidtRank,
            statistic: lambda2,
            threshold: thresholds.rank,
            caveat: None,
        };
        Ok(Self {
            time,
            purity: p,
            measure: 1.0 - p,
            schmidt,
            rank,
            verdict,
        })
    }

    /// `sum lambda^4`, which must agree with `purity`.
    pub fn spectral_purity(&self) -> f64 {
        self.schmidt.iter().map(|l| l.powi(4)).sum()
    }

    pub fn csv_header() -> String {
        let mut h = String::from("t,purity,measure");
        for k in 1..=REPORTED_COEFFICIENTS {
            h.push_str(&format!(",lambda{k}"));
        }
        h.push_str(",rank,verdict");
        h
    }

    pub fn csv_row(&self) -> String {
        let mut r = format!("{:e},{:e},{:e}", self.time, self.purity, self.measure);
        for k in 0..REPORTED_COEFFICIENTS {
            r.push_str(&format!(
                ",{:e}",
                self.schmidt.get(k).copied().unwrap_or(0.0)
            ));
        }
        r.push_str(&format!(",{},{}", self.rank, self.verdict.label()));
        r
    }
}

/// Classical ensemble of pure two-axis states with weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, WaveField)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, WaveField)>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty ensemble".into()))?;
        let grid = *first.1.grid();
        expect_axes(&grid, 2)?;
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 || members.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ensemble weights must be nonnegative and sum to 1, got {total}"
            )));
        }
        if members.iter().any(|(_, f)| *f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, WaveField)] {
        &self.members
    }

    /// `sum_i w_i |psi_i|^2`.
    pub fn density(&self) -> Result<DensityField> {
        let grid = *self.members[0].1.grid();
        let mut acc = vec![0.0; grid.len()];
        for (w, f) in &self.members {
            for (a, v) in acc.iter_mut().zip(f.values()) {
                *a += w * v.norm_sqr();
            }
        }
        DensityField::new(grid, acc)
    }

    /// `sum_i w_i sigma_i`.
    pub fn reduced_density(&self) -> Result<ReducedDensity> {
        let mut acc: Option<ReducedDensity> = None;
        for (w, f) in &self.members {
            let s = reduced_density(f)?;
            acc = Some(match acc {
                None => ReducedDensity {
                    grid: s.grid,
                    matrix: s.matrix.scale(*w),
                },
                Some(mut a) => {
                    a.matrix += s.matrix.scale(*w);
                    a
                }
            });
        }
        Ok(acc.expect("ensemble is never empty"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{
        entangled_field, figure_pair, gaussian_packet, BipartiteScenario, PacketParams,
    };
    use std::f64::consts::PI;

    fn packet(grid: SpatialGrid, beta: f64, p0: f64, x0: f64) -> WaveField {
        let p = PacketParams::with_width(1.0, 1.0, beta, p0).unwrap();
        WaveField::from_fn_1d(grid, |x| gaussian_packet(&p, x - x0, 0.0))
            .unwrap()
            .normalize()
            .unwrap()
    }

    /// Grid-orthonormal Fourier mode `e^{i k_j x} / sqrt(2L)`.
    fn mode(grid: SpatialGrid, j: i32) -> WaveField {
        let k = j as f64 * PI / grid.half_width();
        WaveField::from_fn_1d(grid, |x| Complex64::from_polar(1.0, k * x))
            .unwrap()
            .normalize()
            .unwrap()
    }

    fn two_branch(n: usize) -> WaveField {
        let g = SpatialGrid::one_d(PI, n).unwrap();
        let a = WaveField::outer(&mode(g, 1), &mode(g, 2)).unwrap();
        let b = WaveField::outer(&mode(g, -3), &mode(g, 0)).unwrap();
        a.add(&b).unwrap().scale(Complex64::new(0.5f64.sqrt(), 0.0))
    }

    fn product(n: usize) -> WaveField {
        let g = SpatialGrid::one_d(6.0, n).unwrap();
        WaveField::outer(&packet(g, 0.7, 1.0, 0.5), &packet(g, 1.1, -2.0, -1.0)).unwrap()
    }

    fn figure_state(n: usize) -> WaveField {
        let (a, b) = figure_pair(1.0, 1.0).unwrap();
        let g = SpatialGrid::two_d(3.0, n).unwrap();
        entangled_field(&BipartiteScenario::entangled(a, b, g).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn product_state_is_rank_one() {
        let psi = product(32);
        let sigma = reduced_density(&psi).unwrap();
        let d = sigma.diagnostics().unwrap();
        assert!(d.hermitian_error < 1e-12);
        assert!((d.trace - 1.0).abs() < 1e-10);
        assert!(d.min_eigenvalue > -1e-10);
        assert!((purity(&sigma) - 1.0).abs() < 1e-10);
        assert!((brute_force_purity(&psi).unwrap() - 1.0).abs() < 1e-8);
        let s = schmidt_spectrum(&psi).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-10 && s[1] < 1e-10);
    }

    #[test]
    fn two_branch_state_has_two_equal_coefficients() {
        let psi = two_branch(16);
        let sigma = reduced_density(&psi).unwrap();
        let ev = sigma.eigenvalues().unwrap();
        assert!((ev[0] - 0.5).abs() < 1e-12 && (ev[1] - 0.5).abs() < 1e-12);
        assert!(ev[2].abs() < 1e-12);
        assert!((purity(&sigma) - 0.5).abs() < 1e-12);
        assert!((brute_force_purity(&psi).unwrap() - 0.5).abs() < 1e-8);
        let s = schmidt_spectrum(&psi).unwrap();
        let r = 0.5f64.sqrt();
        assert!((s[0] - r).abs() < 1e-12 && (s[1] - r).abs() < 1e-12 && s[2] < 1e-12);
    }

    #[test]
    fn flat_spectrum_over_d_modes() {
        let g = SpatialGrid::one_d(PI, 16).unwrap();
        let d = 5;
        let mut acc = WaveField::zeros(g.square_grid());
        for j in 0..d {
            acc = acc
                .add(&WaveField::outer(&mode(g, j), &mode(g, -j)).unwrap())
                .unwrap();
        }
        let psi = acc.normalize().unwrap();
        assert!((purity(&reduced_density(&psi).unwrap()) - 1.0 / d as f64).abs() < 1e-12);
    }

    #[test]
    fn figure_state_oracles_agree() {
        let psi = figure_state(64);
        let sigma = reduced_density(&psi).unwrap();
        let d = sigma.diagnostics().unwrap();
        assert!((d.trace - 1.0).abs() < 1e-10);
        assert!(d.min_eigenvalue > -1e-10);
        let p = purity(&sigma);
        assert!((p - brute_force_purity(&psi).unwrap()).abs() < 1e-8);
        let r = EntanglementReport::new(&psi, 0.0, Thresholds::default()).unwrap();
        assert!((r.spectral_purity() - p).abs() < 1e-10);
        let norm: f64 = r.schmidt.iter().map(|l| l * l).sum();
        assert!((norm - 1.0).abs() < 1e-10);
        assert!(!r.verdict.separable);
        assert!(r.measure > 0.01);
    }

    #[test]
    fn reduced_density_of_b_has_same_purity() {
        let psi = figure_state(32);
        let pa = purity(&reduced_density_of(&psi, Axis::A).unwrap());
        let pb = purity(&reduced_density_of(&psi, Axis::B).unwrap());
        assert!((pa - pb).abs() < 1e-12);
    }

    #[test]
    fn brute_force_refuses_large_grids() {
        let psi = product(66);
        assert_eq!(
            brute_force_purity(&psi),
            Err(Error::GridTooLarge { points: 66 })
        );
        let g = SpatialGrid::one_d(1.0, 8).unwrap();
        assert!(reduced_density(&WaveField::zeros(g)).is_err());
    }

    #[test]
    fn density_verdicts() {
        let psi = product(32);
        let v = separability_test(Joint::Density(&psi.modulus_square()), Thresholds::default())
            .unwrap();
        assert!(v.separable && v.statistic < 1e-10);
        assert!(v.caveat.is_some());
        let ent = figure_state(64).modulus_square();
        let v = separability_test(Joint::Density(&ent), Thresholds::default()).unwrap();
        assert!(!v.separable && v.statistic > 1e-2);
        let w = separability_test(Joint::Wave(&psi), Thresholds::default()).unwrap();
        assert!(w.separable && w.caveat.is_none());
    }

    #[test]
    fn mixture_is_density_inseparable_but_a_classical_ensemble() {
        let g = SpatialGrid::one_d(PI, 16).unwrap();
        let u = mode(g, 0);
        let a = WaveField::outer(&packet(g, 0.4, 0.0, -1.0), &u).unwrap();
        let b = WaveField::outer(&u, &packet(g, 0.4, 0.0, 1.0)).unwrap();
        let ens = Ensemble::new(vec![(0.5, a.clone()), (0.5, b.clone())]).unwrap();
        let v = separability_test(
            Joint::Density(&ens.density().unwrap()),
            Thresholds::default(),
        )
        .unwrap();
        assert!(!v.separable);
        assert_eq!(v.caveat, Some(DENSITY_CAVEAT));
        // every member is a product state
        for f in [&a, &b] {
            assert!(
                separability_test(Joint::Wave(f), Thresholds::default())
                    .unwrap()
                    .separable
            );
        }
        let s = ens.reduced_density().unwrap();
        assert!((s.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn csv_row_layout() {
        let r = EntanglementReport::new(&two_branch(16), 0.25, Thresholds::default()).unwrap();
        assert_eq!(
            EntanglementReport::csv_header(),
            "t,purity,measure,lambda1,lambda2,lambda3,lambda4,lambda5,lambda6,lambda7,lambda8,rank,verdict"
        );
        let row = r.csv_row();
        assert!(row.starts_with("2.5e-1,"));
        assert!(row.ends_with(",2,inseparable"));
        assert_eq!(row.split(',').count(), 13);
    }
}

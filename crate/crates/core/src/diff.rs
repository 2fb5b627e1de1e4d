//! Periodic finite-difference stencils along one axis of a grid.

use std::ops::{Add, Mul, Sub};

use crate::grid::SpatialGrid;

/// Row-major neighbour offsets for `axis`: returns `(minus, plus)` indices.
#[inline]
fn neighbours(grid: &SpatialGrid, axis: usize, idx: usize) -> (usize, usize) {
    let n = grid.points();
    if grid.axes() == 1 || axis == 1 {
        let row = idx - idx % n;
        let j = idx % n;
        (row + (j + n - 1) % n, row + (j + 1) % n)
    } else {
        let i = idx / n;
        let j = idx % n;
        (((i + n - 1) % n) * n + j, ((i + 1) % n) * n + j)
    }
}

/// Centred first difference `(f[k+1] - f[k-1]) / 2dx` along `axis`.
pub fn centered<T>(grid: &SpatialGrid, axis: usize, f: &[T]) -> Vec<T>
where
    T: Copy + Sub<Output = T> + Mul<f64, Output = T>,
{
    let h = 0.5 / grid.spacing();
    (0..f.len())
        .map(|k| {
            let (m, p) = neighbours(grid, axis, k);
            (f[p] - f[m]) * h
        })
        .collect()
}

/// Compact second difference `(f[k+1] - 2 f[k] + f[k-1]) / dx^2` along `axis`.
pub fn second<T>(grid: &SpatialGrid, axis: usize, f: &[T]) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let h2 = 1.0 / (grid.spacing() * grid.spacing());
    (0..f.len())
        .map(|k| {
            let (m, p) = neighbours(grid, axis, k);
            (f[p] + f[m] - f[k] * 2.0) * h2
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sine_derivatives_second_order() {
        let mut errs = Vec::new();
        for n in [32, 64] {
            let g = SpatialGrid::one_d(PI, n).unwrap();
            let f: Vec<f64> = g.nodes().iter().map(|x| x.sin()).collect();
            let d = centered(&g, 0, &f);
            let d2 = second(&g, 0, &f);
            let e = g
                .nodes()
                .iter()
                .enumerate()
                .map(|(k, x)| (d[k] - x.cos()).abs().max((d2[k] + x.sin()).abs()))
                .fold(0.0, f64::max);
            errs.push(e);
        }
        assert!((errs[0] / errs[1] - 4.0).abs() < 0.1);
    }

    #[test]
    fn two_axis_stencils_act_on_the_named_axis() {
        let g = SpatialGrid::two_d(PI, 16).unwrap();
        let nodes = g.nodes();
        let mut f = Vec::new();
        for &a in &nodes {
            for &b in &nodes {
                f.push((2.0 * a).sin() + b.cos());
            }
        }
        let da = centered(&g, 0, &f);
        let db = centered(&g, 1, &f);
        let h = g.spacing();
        let n = g.points();
        for (i, &a) in nodes.iter().enumerate() {
            for (j, &b) in nodes.iter().enumerate() {
                let exact_a = (2.0 * a).cos() * (2.0 * h).sin() / h;
                let exact_b = -b.sin() * h.sin() / h;
                assert!((da[i * n + j] - exact_a).abs() < 1e-12);
                assert!((db[i * n + j] - exact_b).abs() < 1e-12);
            }
        }
    }
}

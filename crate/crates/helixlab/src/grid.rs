//! Calculus on uniformly spaced sample grids: fourth-order differentiation,
//! fourth-order cumulative integration, and small statistics helpers.

use crate::error::{HelixError, Result};
use crate::scalar::{real, Real};

/// Uniform grid of `m` points placed at cell midpoints of `[a, b]`, so that
/// both endpoints stay clear of the sampled values. Returns the points and the
/// spacing.
pub fn midpoint_grid<T: Real>(a: T, b: T, m: usize) -> (Vec<T>, T) {
    let h = (b - a) / real::<T>(m as f64);
    let half = real::<T>(0.5);
    let grid = (0..m)
        .map(|j| a + h * (real::<T>(j as f64) + half))
        .collect();
    (grid, h)
}

/// Fourth-order finite-difference derivative on a uniform grid
/// (five-point central stencil, one-sided stencils at the two points nearest
/// each boundary). Needs at least five points.
pub fn derivative<T: Real>(values: &[T], h: T) -> Result<Vec<T>> {
    let m = values.len();
    if m < 5 {
        return Err(HelixError::InvalidArgument(format!(
            "grid derivative needs at least 5 points, got {m}"
        )));
    }
    let f = values;
    let d12h = real::<T>(12.0) * h;
    let c = |v: f64| real::<T>(v);
    let mut out = vec![T::zero(); m];
    out[0] = (c(-25.0) * f[0] + c(48.0) * f[1] + c(-36.0) * f[2] + c(16.0) * f[3] + c(-3.0) * f[4])
        / d12h;
    out[1] = (c(-3.0) * f[0] + c(-10.0) * f[1] + c(18.0) * f[2] + c(-6.0) * f[3] + f[4]) / d12h;
    for j in 2..m - 2 {
        out[j] = (f[j - 2] - f[j + 2] + c(8.0) * (f[j + 1] - f[j - 1])) / d12h;
    }
    out[m - 2] = (c(3.0) * f[m - 1] + c(10.0) * f[m - 2] + c(-18.0) * f[m - 3] + c(6.0) * f[m - 4]
        - f[m - 5])
        / d12h;
    out[m - 1] = (c(25.0) * f[m - 1]
        + c(-48.0) * f[m - 2]
        + c(36.0) * f[m - 3]
        + c(-16.0) * f[m - 4]
        + c(3.0) * f[m - 5])
        / d12h;
    Ok(out)
}

/// Cumulative integral on a uniform grid, fourth order, starting at zero on
/// the first point. Panel integrals come from the cubic through the four
/// nearest samples.
pub fn cumulative_integral<T: Real>(values: &[T], h: T) -> Result<Vec<T>> {
    let m = values.len();
    if m < 4 {
        return Err(HelixError::InvalidArgument(format!(
            "cumulative integral needs at least 4 points, got {m}"
        )));
    }
    let f = values;
    let c = |v: f64| real::<T>(v);
    let w = h / c(24.0);
    let mut out = vec![T::zero(); m];
    for j in 0..m - 1 {
        let panel = if j == 0 {
            c(9.0) * f[0] + c(19.0) * f[1] + c(-5.0) * f[2] + f[3]
        } else if j == m - 2 {
            c(9.0) * f[m - 1] + c(19.0) * f[m - 2] + c(-5.0) * f[m - 3] + f[m - 4]
        } else {
            c(13.0) * (f[j] + f[j + 1]) - f[j - 1] - f[j + 2]
        };
        out[j + 1] = out[j] + panel * w;
    }
    Ok(out)
}

pub fn mean<T: Real>(values: &[T]) -> T {
    let mut acc = T::zero();
    for &v in values {
        acc += v;
    }
    acc / real::<T>(values.len() as f64)
}

/// Population standard deviation.
pub fn std_dev<T: Real>(values: &[T]) -> T {
    let mu = mean(values);
    let mut acc = T::zero();
    for &v in values {
        let d = v - mu;
        acc += d * d;
    }
    (acc / real::<T>(values.len() as f64)).sqrt()
}

pub fn max_abs<T: Real>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derivative_exact_on_quartic() {
        let h = 0.1;
        let xs: Vec<f64> = (0..12).map(|j| j as f64 * h).collect();
        let f: Vec<f64> = xs.iter().map(|&x| x.powi(4) - 2.0 * x.powi(3)).collect();
        let d = derivative(&f, h).unwrap();
        for (j, &x) in xs.iter().enumerate() {
            assert_relative_eq!(d[j], 4.0 * x.powi(3) - 6.0 * x * x, epsilon = 1e-10);
        }
    }

    #[test]
    fn derivative_fourth_order_convergence() {
        let err = |m: usize| {
            let h = 1.0 / m as f64;
            let f: Vec<f64> = (0..m).map(|j| (3.0 * j as f64 * h).sin()).collect();
            let d = derivative(&f, h).unwrap();
            (0..m)
                .map(|j| (d[j] - 3.0 * (3.0 * j as f64 * h).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(64) / err(128);
        assert!((8.0..32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn cumulative_exact_on_cubic() {
        let h = 0.25;
        let f: Vec<f64> = (0..9).map(|j| (j as f64 * h).powi(3)).collect();
        let ci = cumulative_integral(&f, h).unwrap();
        for j in 0..9 {
            let x = j as f64 * h;
            assert_relative_eq!(ci[j], x.powi(4) / 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cumulative_fourth_order_convergence() {
        let err = |m: usize| {
            let h = 2.0 / (m - 1) as f64;
            let f: Vec<f64> = (0..m).map(|j| (2.0 * j as f64 * h).exp()).collect();
            let ci = cumulative_integral(&f, h).unwrap();
            (0..m)
                .map(|j| {
                    let x = j as f64 * h;
                    (ci[j] - ((2.0 * x).exp() - 1.0) / 2.0).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(65) / err(129);
        assert!((8.0..40.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn midpoint_grid_stays_interior() {
        let (g, h) = midpoint_grid(0.0_f64, 1.0, 10);
        assert_eq!(g.len(), 10);
        assert_relative_eq!(h, 0.1);
        assert_relative_eq!(g[0], 0.05);
        assert_relative_eq!(g[9], 0.95);
    }
}

//! Penalized B-spline fitting for sampled curves.
//!
//! Sampled data gets a smoothing spline per coordinate on a shared clamped
//! uniform knot vector. The roughness penalty is a squared second difference
//! of the control coefficients, and the smoothing weight is chosen by
//! generalized cross-validation unless the caller pins it. Derivatives come
//! from exact coefficient differencing of the fitted spline, so a degree-d
//! fit delivers d meaningful derivative orders.

use nalgebra::DMatrix;

use crate::error::{HelixError, Result};
use crate::scalar::{approx_f64, real, Real};
use crate::series::Series;

#[derive(Debug, Clone)]
struct SplineLevel<T> {
    degree: usize,
    knots: Vec<T>,
    /// One coefficient vector per coordinate.
    coefs: Vec<Vec<T>>,
}

impl<T: Real> SplineLevel<T> {
    fn control_count(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    fn span(&self, t: T) -> usize {
        let k = &self.knots;
        let d = self.degree;
        let n = self.control_count();
        if t >= k[n] {
            return n - 1;
        }
        if t <= k[d] {
            return d;
        }
        let mut lo = d;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if t < k[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Nonzero basis values `N_{span-d..=span}` at `t` (Cox-de Boor).
    fn basis(&self, span: usize, t: T) -> Vec<T> {
        let d = self.degree;
        let k = &self.knots;
        let mut values = vec![T::zero(); d + 1];
        let mut left = vec![T::zero(); d + 1];
        let mut right = vec![T::zero(); d + 1];
        values[0] = T::one();
        for j in 1..=d {
            left[j] = t - k[span + 1 - j];
            right[j] = k[span + j] - t;
            let mut saved = T::zero();
            for r in 0..j {
                let tmp = values[r] / (right[r + 1] + left[j - r]);
                values[r] = saved + right[r + 1] * tmp;
                saved = left[j - r] * tmp;
            }
            values[j] = saved;
        }
        values
    }

    fn eval(&self, t: T) -> Vec<T> {
        if self.degree == 0 && self.knots.len() < 2 {
            // fully differentiated away
            return vec![T::zero(); self.coefs.len()];
        }
        let span = self.span(t);
        let basis = self.basis(span, t);
        self.coefs
            .iter()
            .map(|c| {
                let mut acc = T::zero();
                for (j, &b) in basis.iter().enumerate() {
                    acc += b * c[span - self.degree + j];
                }
                acc
            })
            .collect()
    }

    /// Differentiated spline: degree drops by one, coefficients become scaled
    /// forward differences.
    fn derivative(&self) -> SplineLevel<T> {
        let d = self.degree;
        let k = &self.knots;
        let n = self.control_count();
        let df = real::<T>(d as f64);
        let coefs = self
            .coefs
            .iter()
            .map(|c| {
                (0..n - 1)
                    .map(|i| {
                        let den = k[i + d + 1] - k[i + 1];
                        df * (c[i + 1] - c[i]) / den
                    })
                    .collect()
            })
            .collect();
        SplineLevel {
            degree: d - 1,
            knots: k[1..k.len() - 1].to_vec(),
            coefs,
        }
    }
}

/// A fitted vector-valued spline with its derivative stack.
#[derive(Debug, Clone)]
pub struct VectorSpline<T> {
    dim: usize,
    degree: usize,
    domain: (T, T),
    levels: Vec<SplineLevel<T>>,
}

impl<T: Real> VectorSpline<T> {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn domain(&self) -> (T, T) {
        self.domain
    }

    pub fn eval(&self, t: T) -> Vec<T> {
        self.levels[0].eval(t)
    }

    /// Taylor coefficients of every coordinate at `t0`, truncated at `order`.
    /// Orders beyond the polynomial degree are exactly zero.
    pub fn taylor(&self, t0: T, order: usize) -> Vec<Series<T>> {
        let mut out: Vec<Series<T>> = (0..self.dim)
            .map(|_| Series::constant(T::zero(), order + 1))
            .collect();
        let mut factorial = T::one();
        for r in 0..=order {
            if r > 0 {
                factorial *= real::<T>(r as f64);
            }
            if r < self.levels.len() {
                let vals = self.levels[r].eval(t0);
                for (i, v) in vals.into_iter().enumerate() {
                    out[i].c[r] = v / factorial;
                }
            }
        }
        out
    }
}

/// Configuration for [`fit_spline`].
#[derive(Debug, Clone)]
pub struct SplineFitConfig {
    /// Polynomial degree of the fit.
    pub degree: usize,
    /// Number of basis functions; `None` picks `min(m - 4, 384)`.
    pub basis_count: Option<usize>,
    /// Fixed smoothing weight; `None` selects one by GCV.
    pub lambda: Option<f64>,
}

impl SplineFitConfig {
    pub fn for_degree(degree: usize) -> Self {
        SplineFitConfig {
            degree,
            basis_count: None,
            lambda: None,
        }
    }
}

/// Result metadata of a spline fit.
#[derive(Debug, Clone)]
pub struct SplineFitReport {
    pub lambda: f64,
    pub residual_rms: f64,
}

/// Fits one smoothing spline per data column. `params` must be strictly
/// increasing; `data[j]` is the j-th sample point (one value per coordinate).
pub fn fit_spline<T: Real>(
    params: &[T],
    data: &[Vec<T>],
    config: &SplineFitConfig,
) -> Result<(VectorSpline<T>, SplineFitReport)> {
    let m = params.len();
    let dim = data.first().map(|p| p.len()).unwrap_or(0);
    if m != data.len() || m < 2 || dim == 0 {
        return Err(HelixError::InvalidArgument(
            "spline fit needs matching, nonempty parameter and data lists".into(),
        ));
    }
    let degree = config.degree;
    let k_max = m.saturating_sub(4).min(384);
    let basis_count = config
        .basis_count
        .unwrap_or(k_max)
        .clamp(degree + 1, m.max(degree + 1));

    let t0 = params[0];
    let t1 = params[m - 1];
    let knots = clamped_uniform_knots(t0, t1, degree, basis_count);
    let level = SplineLevel {
        degree,
        knots,
        coefs: Vec::new(),
    };

    // design matrix rows have degree+1 nonzeros, assembled densely for the
    // normal equations
    let k = basis_count;
    let mut normal = DMatrix::<T>::zeros(k, k);
    let mut rhs = DMatrix::<T>::zeros(k, dim);
    let mut rows: Vec<(usize, Vec<T>)> = Vec::with_capacity(m);
    for (j, &t) in params.iter().enumerate() {
        let span = level.span(t);
        let basis = level.basis(span, t);
        let first = span - degree;
        for a in 0..=degree {
            for b in 0..=degree {
                normal[(first + a, first + b)] += basis[a] * basis[b];
            }
            for c in 0..dim {
                rhs[(first + a, c)] += basis[a] * data[j][c];
            }
        }
        rows.push((first, basis));
    }

    // second-difference roughness penalty on the coefficients
    let mut penalty = DMatrix::<T>::zeros(k, k);
    if k >= 3 {
        let two = real::<T>(2.0);
        for i in 0..k - 2 {
            let idx = [i, i + 1, i + 2];
            let w = [T::one(), -two, T::one()];
            for a in 0..3 {
                for b in 0..3 {
                    penalty[(idx[a], idx[b])] += w[a] * w[b];
                }
            }
        }
    }
    let scale = {
        let tn = normal.trace();
        let tp = penalty.trace();
        if tp > T::zero() {
            tn / tp
        } else {
            T::one()
        }
    };

    let solve_for = |lambda: T| -> Option<(DMatrix<T>, T)> {
        let lhs = &normal + &penalty * (lambda * scale);
        let chol = nalgebra::Cholesky::new(lhs)?;
        let coefs = chol.solve(&rhs);
        let trace_h = chol.solve(&normal).trace();
        Some((coefs, trace_h))
    };

    let rss_of = |coefs: &DMatrix<T>| -> T {
        let mut rss = T::zero();
        for (j, (first, basis)) in rows.iter().enumerate() {
            for c in 0..dim {
                let mut fit = T::zero();
                for (a, &b) in basis.iter().enumerate() {
                    fit += b * coefs[(first + a, c)];
                }
                let r = fit - data[j][c];
                rss += r * r;
            }
        }
        rss
    };

    let mf = real::<T>(m as f64);
    let (lambda, coefs, rss) = if let Some(l) = config.lambda {
        let l = real::<T>(l);
        let (coefs, _) = solve_for(l).ok_or_else(|| {
            HelixError::InvalidArgument("spline normal equations not positive definite".into())
        })?;
        let rss = rss_of(&coefs);
        (l, coefs, rss)
    } else {
        let mut best: Option<(T, DMatrix<T>, T, T)> = None;
        for e in -12..=2 {
            let l = real::<T>(10f64.powi(e));
            let Some((coefs, trace_h)) = solve_for(l) else {
                continue;
            };
            let denom = T::one() - trace_h / mf;
            if denom <= real(1e-4) {
                continue;
            }
            let rss = rss_of(&coefs);
            let gcv = rss / (mf * denom * denom);
            if best.as_ref().map(|(g, ..)| gcv < *g).unwrap_or(true) {
                best = Some((gcv, coefs, l, rss));
            }
        }
        let (_, coefs, l, rss) = best.ok_or_else(|| {
            HelixError::InvalidArgument("spline smoothing selection failed for all weights".into())
        })?;
        (l, coefs, rss)
    };

    let coef_cols: Vec<Vec<T>> = (0..dim)
        .map(|c| (0..k).map(|i| coefs[(i, c)]).collect())
        .collect();
    let mut base = level;
    base.coefs = coef_cols;
    let mut levels = vec![base];
    for _ in 0..degree {
        let next = levels.last().unwrap().derivative();
        levels.push(next);
    }
    let spline = VectorSpline {
        dim,
        degree,
        domain: (t0, t1),
        levels,
    };
    let report = SplineFitReport {
        lambda: approx_f64(lambda),
        residual_rms: approx_f64((rss / (mf * real::<T>(dim as f64))).sqrt()),
    };
    Ok((spline, report))
}

fn clamped_uniform_knots<T: Real>(t0: T, t1: T, degree: usize, basis_count: usize) -> Vec<T> {
    let interior = basis_count - degree - 1;
    let mut knots = Vec::with_capacity(basis_count + degree + 1);
    for _ in 0..=degree {
        knots.push(t0);
    }
    let step = (t1 - t0) / real::<T>((interior + 1) as f64);
    for i in 1..=interior {
        knots.push(t0 + step * real::<T>(i as f64));
    }
    for _ in 0..=degree {
        knots.push(t1);
    }
    knots
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sine_samples(m: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let params: Vec<f64> = (0..m).map(|j| j as f64 * 6.0 / (m - 1) as f64).collect();
        let data = params
            .iter()
            .map(|&t| vec![t.sin(), (0.5 * t).cos()])
            .collect();
        (params, data)
    }

    #[test]
    fn clean_data_recovers_derivatives() {
        let (params, data) = sine_samples(400);
        let (spline, _) = fit_spline(&params, &data, &SplineFitConfig::for_degree(6)).unwrap();
        for &t in &[1.0, 2.5, 4.8] {
            let tay = spline.taylor(t, 4);
            assert_relative_eq!(tay[0].value(), t.sin(), epsilon = 1e-8);
            assert_relative_eq!(tay[0].derivative(1), t.cos(), epsilon = 1e-6);
            assert_relative_eq!(tay[0].derivative(2), -t.sin(), epsilon = 1e-4);
            assert_relative_eq!(tay[0].derivative(3), -t.cos(), epsilon = 1e-2);
            assert_relative_eq!(tay[1].derivative(1), -0.5 * (0.5 * t).sin(), epsilon = 1e-6);
        }
    }

    #[test]
    fn noisy_data_selects_heavier_smoothing() {
        let (params, mut data) = sine_samples(300);
        // deterministic pseudo-noise
        let mut state = 0x9e3779b97f4a7c15u64;
        for p in data.iter_mut() {
            for v in p.iter_mut() {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                let u = (state >> 11) as f64 / (1u64 << 53) as f64;
                *v += 2e-3 * (u - 0.5);
            }
        }
        let (_, clean_report) = fit_spline(
            &params,
            &sine_samples(300).1,
            &SplineFitConfig::for_degree(5),
        )
        .unwrap();
        let (spline, noisy_report) =
            fit_spline(&params, &data, &SplineFitConfig::for_degree(5)).unwrap();
        assert!(noisy_report.lambda >= clean_report.lambda);
        // fitted values should stay close to the underlying signal
        for &t in &[1.2, 3.3, 5.1] {
            assert_relative_eq!(spline.eval(t)[0], t.sin(), epsilon = 2e-3);
        }
    }

    #[test]
    fn beyond_degree_derivatives_are_zero() {
        let (params, data) = sine_samples(60);
        let (spline, _) = fit_spline(&params, &data, &SplineFitConfig::for_degree(4)).unwrap();
        let tay = spline.taylor(2.0, 6);
        assert_eq!(tay[0].c.len(), 7);
        assert_eq!(tay[0].c[5], 0.0);
        assert_eq!(tay[0].c[6], 0.0);
    }
}

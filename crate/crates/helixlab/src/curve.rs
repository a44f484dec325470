//! Curve representations and arc-length reparameterization.
//!
//! Three forms of a curve appear in the pipeline:
//!
//! * [`AnalyticCurve`] - closed-form coordinates as expression trees;
//! * [`SampledCurve`] - an ordered list of points, optionally with parameter
//!   values, backed by a smoothing-spline fit;
//! * [`UnitSpeedCurve`] - the arc-length reparameterization of either, and
//!   the only form the frame machinery consumes.
//!
//! A [`UnitSpeedCurve`] answers derivative queries through truncated Taylor
//! series: the inverse parameter map `t(s)` is expanded order by order from
//! `dt/ds = 1/|alpha'(t)|`, then composed with the coordinate series. That
//! makes the returned jets exact for analytic sources (up to rounding and the
//! arc-length table tolerance), with no finite-difference noise.

use nalgebra::{DMatrix, DVector};

use crate::error::{HelixError, Result};
use crate::expr::Expr;
use crate::quad;
use crate::scalar::{approx_f64, real, Real};
use crate::series::Series;
use crate::spline::{fit_spline, SplineFitConfig, VectorSpline};
use crate::tol;

/// Curve given by closed-form coordinate expressions over an interval.
#[derive(Debug, Clone)]
pub struct AnalyticCurve<T> {
    coords: Vec<Expr>,
    interval: (T, T),
}

impl<T: Real> AnalyticCurve<T> {
    pub fn new(coords: Vec<Expr>, interval: (T, T)) -> Result<Self> {
        if coords.len() < 2 {
            return Err(HelixError::InvalidArgument(format!(
                "curve dimension must be at least 2, got {}",
                coords.len()
            )));
        }
        if !(interval.0 < interval.1) || !interval.0.is_finite() || !interval.1.is_finite() {
            return Err(HelixError::InvalidArgument(format!(
                "invalid parameter interval [{}, {}]",
                approx_f64(interval.0),
                approx_f64(interval.1)
            )));
        }
        Ok(AnalyticCurve { coords, interval })
    }

    pub fn from_exprs(sources: &[&str], interval: (T, T)) -> Result<Self> {
        let coords = sources
            .iter()
            .map(|s| Expr::parse(s))
            .collect::<Result<Vec<_>>>()?;
        AnalyticCurve::new(coords, interval)
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn interval(&self) -> (T, T) {
        self.interval
    }

    pub fn coords(&self) -> &[Expr] {
        &self.coords
    }

    pub fn eval(&self, t: T) -> DVector<T> {
        DVector::from_iterator(self.coords.len(), self.coords.iter().map(|c| c.eval(t)))
    }

    /// Applies `x -> R x + b`. The rotation must be orthogonal with
    /// determinant +1.
    pub fn apply_rigid_motion(
        &self,
        rotation: &DMatrix<T>,
        translation: &DVector<T>,
    ) -> Result<Self> {
        validate_rotation(rotation, self.dimension())?;
        if translation.len() != self.dimension() {
            return Err(HelixError::InvalidArgument(
                "translation dimension mismatch".into(),
            ));
        }
        let coords = (0..self.dimension())
            .map(|i| {
                let mut acc = Expr::constant(approx_f64(translation[i]));
                for (j, coord) in self.coords.iter().enumerate() {
                    let w = approx_f64(rotation[(i, j)]);
                    if w != 0.0 {
                        acc = acc + Expr::constant(w) * coord.clone();
                    }
                }
                acc
            })
            .collect();
        Ok(AnalyticCurve {
            coords,
            interval: self.interval,
        })
    }

    /// Uniform scaling about the origin (not a rigid motion; used to test
    /// scale covariance of downstream quantities).
    pub fn scaled(&self, factor: f64) -> Self {
        AnalyticCurve {
            coords: self
                .coords
                .iter()
                .map(|c| Expr::constant(factor) * c.clone())
                .collect(),
            interval: self.interval,
        }
    }

    pub fn arc_length_reparameterize(&self, resolution: usize) -> Result<UnitSpeedCurve<T>> {
        build_unit_speed(
            JetSource::Analytic(self.coords.clone()),
            self.coords.len(),
            self.interval,
            resolution,
        )
    }
}

/// Ordered point samples of a curve, optionally with parameter values.
#[derive(Debug, Clone)]
pub struct SampledCurve<T> {
    points: Vec<DVector<T>>,
    params: Option<Vec<T>>,
}

impl<T: Real> SampledCurve<T> {
    pub fn new(points: Vec<DVector<T>>) -> Result<Self> {
        Self::with_params_opt(points, None)
    }

    pub fn with_params(points: Vec<DVector<T>>, params: Vec<T>) -> Result<Self> {
        Self::with_params_opt(points, Some(params))
    }

    fn with_params_opt(points: Vec<DVector<T>>, params: Option<Vec<T>>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        if dim < 2 {
            return Err(HelixError::InvalidArgument(
                "sampled curve needs points of dimension at least 2".into(),
            ));
        }
        let required = 2 * dim + 5;
        if points.len() < required {
            return Err(HelixError::InsufficientSamples {
                got: points.len(),
                required,
                dimension: dim,
            });
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(HelixError::InvalidArgument(
                "sampled curve points have inconsistent dimensions".into(),
            ));
        }
        for w in points.windows(2) {
            if (&w[1] - &w[0]).norm() == T::zero() {
                return Err(HelixError::InvalidArgument(
                    "consecutive sample points must be distinct".into(),
                ));
            }
        }
        if let Some(p) = &params {
            if p.len() != points.len() {
                return Err(HelixError::InvalidArgument(
                    "parameter list length must match point count".into(),
                ));
            }
            if p.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(HelixError::InvalidArgument(
                    "parameter values must be strictly increasing".into(),
                ));
            }
        }
        Ok(SampledCurve { points, params })
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DVector<T>] {
        &self.points
    }

    pub fn params(&self) -> Option<&[T]> {
        self.params.as_deref()
    }

    pub fn apply_rigid_motion(
        &self,
        rotation: &DMatrix<T>,
        translation: &DVector<T>,
    ) -> Result<Self> {
        validate_rotation(rotation, self.dimension())?;
        Ok(SampledCurve {
            points: self
                .points
                .iter()
                .map(|p| rotation * p + translation)
                .collect(),
            params: self.params.clone(),
        })
    }

    /// Chord-length parameter values, used when none were supplied.
    fn chord_params(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut acc = T::zero();
        out.push(acc);
        for w in self.points.windows(2) {
            acc += (&w[1] - &w[0]).norm();
            out.push(acc);
        }
        out
    }

    pub fn arc_length_reparameterize(&self, resolution: usize) -> Result<UnitSpeedCurve<T>> {
        let degree = self.dimension() + 1;
        self.arc_length_reparameterize_with(resolution, &SplineFitConfig::for_degree(degree))
    }

    pub fn arc_length_reparameterize_with(
        &self,
        resolution: usize,
        fit: &SplineFitConfig,
    ) -> Result<UnitSpeedCurve<T>> {
        let dim = self.dimension();
        if fit.degree < dim + 1 {
            return Err(HelixError::InvalidArgument(format!(
                "spline degree {} too low for dimension {dim}; need at least {}",
                fit.degree,
                dim + 1
            )));
        }
        let params = match &self.params {
            Some(p) => p.clone(),
            None => self.chord_params(),
        };
        let data: Vec<Vec<T>> = self
            .points
            .iter()
            .map(|p| p.iter().copied().collect())
            .collect();
        let (spline, _) = fit_spline(&params, &data, fit)?;
        let domain = spline.domain();
        build_unit_speed(JetSource::Spline(spline), dim, domain, resolution)
    }
}

/// Differentiable position source behind a unit-speed curve.
#[derive(Debug, Clone)]
enum JetSource<T> {
    Analytic(Vec<Expr>),
    Spline(VectorSpline<T>),
    Moved {
        inner: Box<JetSource<T>>,
        rotation: DMatrix<T>,
        translation: DVector<T>,
    },
    /// A unit-speed curve treated as a parametric source again.
    Reparam(Box<UnitSpeedCurve<T>>),
}

impl<T: Real> JetSource<T> {
    fn taylor(&self, t0: T, order: usize) -> Vec<Series<T>> {
        match self {
            JetSource::Analytic(coords) => coords.iter().map(|c| c.taylor(t0, order)).collect(),
            JetSource::Spline(s) => s.taylor(t0, order),
            JetSource::Moved {
                inner,
                rotation,
                translation,
            } => {
                let base = inner.taylor(t0, order);
                let n = base.len();
                (0..n)
                    .map(|i| {
                        let mut acc = Series::constant(translation[i], order + 1);
                        for (j, b) in base.iter().enumerate() {
                            acc = acc.add(&b.scale(rotation[(i, j)]));
                        }
                        acc
                    })
                    .collect()
            }
            JetSource::Reparam(c) => {
                let order_capped = order.min(c.dimension());
                let jets = c
                    .jet_closed(t0, order_capped)
                    .expect("reparameterized source evaluated inside its domain");
                let pos = c.position_closed(t0);
                (0..c.dimension())
                    .map(|i| {
                        let mut s = Series::constant(pos[i], order + 1);
                        let mut fact = T::one();
                        for (k, jet) in jets.iter().enumerate() {
                            fact *= real::<T>((k + 1) as f64);
                            s.c[k + 1] = jet[i] / fact;
                        }
                        s
                    })
                    .collect()
            }
        }
    }
}

/// Arc-length lookup table: cumulative length at uniformly spaced parameter
/// knots, refined locally on inversion.
#[derive(Debug, Clone)]
struct ArcTable<T> {
    t_knots: Vec<T>,
    s_knots: Vec<T>,
}

/// A curve parameterized by arc length on `[0, L]`.
#[derive(Debug, Clone)]
pub struct UnitSpeedCurve<T> {
    dim: usize,
    length: T,
    source: JetSource<T>,
    table: ArcTable<T>,
}

fn speed_at<T: Real>(source: &JetSource<T>, t: T) -> T {
    let taylor = source.taylor(t, 1);
    let mut acc = T::zero();
    for s in &taylor {
        let d = s.c[1];
        acc += d * d;
    }
    acc.sqrt()
}

fn build_unit_speed<T: Real>(
    source: JetSource<T>,
    dim: usize,
    interval: (T, T),
    resolution: usize,
) -> Result<UnitSpeedCurve<T>> {
    let resolution = resolution.max(tol::MIN_RESOLUTION);
    let (t0, t1) = interval;

    // regularity scan on a grid finer than the table
    let probes = 4 * resolution;
    let eps_reg = real::<T>(tol::EPS_REGULARITY);
    for j in 0..=probes {
        let t = t0 + (t1 - t0) * real::<T>(j as f64) / real::<T>(probes as f64);
        let sp = speed_at(&source, t);
        if !(sp > eps_reg) || !sp.is_finite() {
            return Err(HelixError::NonRegularCurve {
                t: approx_f64(t),
                speed: approx_f64(sp),
                threshold: tol::EPS_REGULARITY,
            });
        }
    }

    let quad_tol = real::<T>(tol::QUAD_REL_TOL);
    let mut t_knots = Vec::with_capacity(resolution + 1);
    let mut s_knots = Vec::with_capacity(resolution + 1);
    let mut acc = T::zero();
    t_knots.push(t0);
    s_knots.push(acc);
    for j in 1..=resolution {
        let ta = t0 + (t1 - t0) * real::<T>((j - 1) as f64) / real::<T>(resolution as f64);
        let tb = t0 + (t1 - t0) * real::<T>(j as f64) / real::<T>(resolution as f64);
        acc += quad::integrate(|t| speed_at(&source, t), ta, tb, quad_tol);
        t_knots.push(tb);
        s_knots.push(acc);
    }
    if !acc.is_finite() || acc <= T::zero() {
        return Err(HelixError::InvalidArgument(format!(
            "arc length came out nonpositive or non-finite: {}",
            approx_f64(acc)
        )));
    }
    Ok(UnitSpeedCurve {
        dim,
        length: acc,
        source,
        table: ArcTable { t_knots, s_knots },
    })
}

impl<T: Real> UnitSpeedCurve<T> {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// Inverts the arc-length map: bracketed Newton on the cumulative table.
    fn invert(&self, s: T) -> T {
        let knots = &self.table.s_knots;
        let ts = &self.table.t_knots;
        let n = knots.len();
        if s <= knots[0] {
            return ts[0];
        }
        if s >= knots[n - 1] {
            return ts[n - 1];
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if knots[mid] <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (mut tl, mut th) = (ts[lo], ts[hi]);
        let frac = (s - knots[lo]) / (knots[hi] - knots[lo]);
        let mut t = tl + (th - tl) * frac;
        let quad_tol = real::<T>(tol::QUAD_REL_TOL);
        let tol_s = self.length * real::<T>(1e-14) + T::default_epsilon() * real::<T>(4.0);
        for _ in 0..60 {
            let f =
                knots[lo] + quad::integrate(|u| speed_at(&self.source, u), ts[lo], t, quad_tol) - s;
            if f.abs() <= tol_s {
                return t;
            }
            if f > T::zero() {
                th = t;
            } else {
                tl = t;
            }
            let sp = speed_at(&self.source, t);
            let step = f / sp;
            let next = t - step;
            t = if next > tl && next < th {
                next
            } else {
                (tl + th) * real::<T>(0.5)
            };
        }
        t
    }

    fn taylor_in_s(&self, s: T, order: usize) -> Vec<Series<T>> {
        let t0 = self.invert(s);
        let len = order + 1;
        let xs = self.source.taylor(t0, order);
        let dx: Vec<Series<T>> = xs.iter().map(|x| x.differentiate()).collect();

        // expand t(s) order by order from dt/ds = 1 / |alpha'(t)|
        let mut t_coeff = vec![T::zero(); len];
        t_coeff[0] = t0;
        for m in 1..=order {
            let mut delta = Series { c: t_coeff.clone() };
            delta.c[0] = T::zero();
            let mut speed_sq = Series::constant(T::zero(), len);
            for d in &dx {
                let composed = d.compose(&delta);
                speed_sq = speed_sq.add(&composed.mul(&composed));
            }
            let g = speed_sq.sqrt().recip();
            t_coeff[m] = g.c[m - 1] / real::<T>(m as f64);
        }
        let mut delta = Series { c: t_coeff };
        delta.c[0] = T::zero();
        xs.iter().map(|x| x.compose(&delta)).collect()
    }

    fn jet_closed(&self, s: T, order: usize) -> Result<Vec<DVector<T>>> {
        let pos = self.taylor_in_s(s, order);
        let mut out = Vec::with_capacity(order);
        let mut fact = T::one();
        for k in 1..=order {
            fact *= real::<T>(k as f64);
            out.push(DVector::from_iterator(
                self.dim,
                pos.iter().map(|p| p.c[k] * fact),
            ));
        }
        Ok(out)
    }

    fn position_closed(&self, s: T) -> DVector<T> {
        let t0 = self.invert(s);
        let xs = self.source.taylor(t0, 0);
        DVector::from_iterator(self.dim, xs.iter().map(|x| x.value()))
    }

    /// Derivative vectors `alpha'(s), ..., alpha^(order)(s)`.
    ///
    /// The order may not exceed the ambient dimension, and `s` must lie in
    /// `[0, L]`.
    pub fn derivative_jet(&self, s: T, order: usize) -> Result<Vec<DVector<T>>> {
        if order == 0 || order > self.dim {
            return Err(HelixError::OrderTooHigh {
                order,
                max: self.dim,
            });
        }
        self.check_domain(s)?;
        self.jet_closed(s, order)
    }

    pub fn position(&self, s: T) -> Result<DVector<T>> {
        self.check_domain(s)?;
        Ok(self.position_closed(s))
    }

    fn check_domain(&self, s: T) -> Result<()> {
        let slack = self.length * real::<T>(1e-12);
        if s < -slack || s > self.length + slack {
            return Err(HelixError::OutOfDomain {
                s: approx_f64(s),
                length: approx_f64(self.length),
            });
        }
        Ok(())
    }

    pub fn apply_rigid_motion(
        &self,
        rotation: &DMatrix<T>,
        translation: &DVector<T>,
    ) -> Result<Self> {
        validate_rotation(rotation, self.dim)?;
        if translation.len() != self.dim {
            return Err(HelixError::InvalidArgument(
                "translation dimension mismatch".into(),
            ));
        }
        Ok(UnitSpeedCurve {
            dim: self.dim,
            length: self.length,
            source: JetSource::Moved {
                inner: Box::new(self.source.clone()),
                rotation: rotation.clone(),
                translation: translation.clone(),
            },
            table: self.table.clone(),
        })
    }

    /// Re-derives the arc-length parameterization from this curve. Since the
    /// curve is already unit speed the result should match it closely; the
    /// operation exists to make that a testable property.
    pub fn arc_length_reparameterize(&self, resolution: usize) -> Result<UnitSpeedCurve<T>> {
        build_unit_speed(
            JetSource::Reparam(Box::new(self.clone())),
            self.dim,
            (T::zero(), self.length),
            resolution,
        )
    }

    /// The sub-arc from `a` to `b` as its own unit-speed curve on
    /// `[0, b - a]`.
    ///
    /// High-order derivatives of a curve fitted to a point cloud are least
    /// reliable in a boundary layer near the ends of the data; consumers
    /// that need deep jets can cut that layer off instead of ingesting it.
    pub fn restrict(&self, a: T, b: T, resolution: usize) -> Result<UnitSpeedCurve<T>> {
        let slack = self.length * real::<T>(1e-12);
        if !(a < b) || !(a >= -slack) || !(b <= self.length + slack) {
            return Err(HelixError::InvalidArgument(format!(
                "restriction [{}, {}] must sit inside [0, {}] with a < b",
                approx_f64(a),
                approx_f64(b),
                approx_f64(self.length)
            )));
        }
        build_unit_speed(
            JetSource::Reparam(Box::new(self.clone())),
            self.dim,
            (a, b),
            resolution,
        )
    }

    /// Largest deviation of the realized speed from 1 over `probes` interior
    /// points.
    pub fn unit_speed_defect(&self, probes: usize) -> T {
        let mut worst = T::zero();
        for j in 0..probes {
            let s = self.length * (real::<T>(j as f64) + real(0.5)) / real::<T>(probes as f64);
            let jet = self.jet_closed(s, 1).expect("interior point");
            worst = worst.max((jet[0].norm() - T::one()).abs());
        }
        worst
    }
}

/// Checks orthogonality and positive unit determinant.
pub fn validate_rotation<T: Real>(rotation: &DMatrix<T>, dim: usize) -> Result<()> {
    if rotation.nrows() != dim || rotation.ncols() != dim {
        return Err(HelixError::InvalidArgument(format!(
            "rotation must be {dim}x{dim}, got {}x{}",
            rotation.nrows(),
            rotation.ncols()
        )));
    }
    let gram = rotation.transpose() * rotation;
    let mut defect = T::zero();
    for i in 0..dim {
        for j in 0..dim {
            let expect = if i == j { T::one() } else { T::zero() };
            defect = defect.max((gram[(i, j)] - expect).abs());
        }
    }
    let det = rotation.clone().determinant();
    let tol_t = real::<T>(tol::ROTATION_ORTHO_TOL);
    if defect > tol_t || (det - T::one()).abs() > real::<T>(1e-8) {
        return Err(HelixError::NotOrthogonal {
            defect: approx_f64(defect),
            det: approx_f64(det),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn circle() -> AnalyticCurve<f64> {
        AnalyticCurve::from_exprs(&["cos(2*t)", "sin(2*t)"], (0.0, PI)).unwrap()
    }

    fn helix345() -> AnalyticCurve<f64> {
        AnalyticCurve::from_exprs(&["3*cos(t)", "3*sin(t)", "4*t"], (0.0, 2.0 * PI)).unwrap()
    }

    #[test]
    fn circle_length_is_two_pi() {
        let c = circle().arc_length_reparameterize(64).unwrap();
        assert_relative_eq!(c.length(), 2.0 * PI, epsilon = 1e-10);
    }

    #[test]
    fn line_length_is_five() {
        let line = AnalyticCurve::from_exprs(&["3*t", "4*t"], (0.0, 1.0)).unwrap();
        let c = line.arc_length_reparameterize(64).unwrap();
        assert_relative_eq!(c.length(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn helix_length_is_ten_pi() {
        let c = helix345().arc_length_reparameterize(128).unwrap();
        assert_relative_eq!(c.length(), 10.0 * PI, epsilon = 1e-9);
    }

    #[test]
    fn circle_jet_at_origin() {
        let c = circle().arc_length_reparameterize(64).unwrap();
        let jet = c.derivative_jet(0.0, 2).unwrap();
        assert_relative_eq!(jet[0][0], 0.0, epsilon = 1e-9);
        assert_relative_eq!(jet[0][1], 1.0, epsilon = 1e-9);
        assert_relative_eq!(jet[1][0], -1.0, epsilon = 1e-8);
        assert_relative_eq!(jet[1][1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn restriction_is_the_shifted_sub_arc() {
        let c = circle().arc_length_reparameterize(128).unwrap();
        let half = c.restrict(PI / 2.0, 3.0 * PI / 2.0, 128).unwrap();
        assert_relative_eq!(half.length(), PI, epsilon = 1e-9);
        for j in 0..5 {
            let s = PI * j as f64 / 4.0;
            let a = half.position(s).unwrap();
            let b = c.position(PI / 2.0 + s).unwrap();
            assert_relative_eq!((a - b).norm(), 0.0, epsilon = 1e-8);
        }
        let jet_half = half.restrict(0.0, PI / 2.0, 64).unwrap();
        let jet = jet_half.derivative_jet(0.1, 2).unwrap();
        let reference = c.derivative_jet(PI / 2.0 + 0.1, 2).unwrap();
        assert_relative_eq!((&jet[0] - &reference[0]).norm(), 0.0, epsilon = 1e-8);
        assert_relative_eq!((&jet[1] - &reference[1]).norm(), 0.0, epsilon = 1e-7);
        assert!(c.restrict(-0.1, 1.0, 64).is_err());
        assert!(c.restrict(1.0, 1.0, 64).is_err());
        assert!(c.restrict(0.0, c.length() + 0.1, 64).is_err());
    }

    #[test]
    fn line_second_derivative_vanishes() {
        let line = AnalyticCurve::from_exprs(&["3*t", "4*t"], (0.0, 1.0)).unwrap();
        let c = line.arc_length_reparameterize(64).unwrap();
        let jet = c.derivative_jet(2.5, 2).unwrap();
        assert_relative_eq!(jet[0].norm(), 1.0, epsilon = 1e-12);
        assert!(jet[1].norm() < 1e-10);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let a = 1.0 / 2.0_f64.sqrt();
        let hel = AnalyticCurve::from_exprs(
            &[
                &format!("{a}*cos(t)"),
                &format!("{a}*sin(t)"),
                &format!("{a}*t"),
            ],
            (0.0, 4.0 * PI),
        )
        .unwrap();
        let c = hel.arc_length_reparameterize(128).unwrap();
        let s = 2.0;
        let h = 1e-4;
        let jet = c.derivative_jet(s, 3).unwrap();
        let jp = c.derivative_jet(s + h, 2).unwrap();
        let jm = c.derivative_jet(s - h, 2).unwrap();
        // central difference of alpha'' approximates alpha'''
        let fd = (&jp[1] - &jm[1]) / (2.0 * h);
        assert!((&fd - &jet[2]).norm() < 1e-6);
    }

    #[test]
    fn finite_difference_consistency_is_second_order() {
        let c = helix345().arc_length_reparameterize(128).unwrap();
        let s = 7.0;
        let exact = c.derivative_jet(s, 2).unwrap()[1].clone();
        let err_at = |h: f64| {
            let p = c.derivative_jet(s + h, 1).unwrap()[0].clone();
            let m = c.derivative_jet(s - h, 1).unwrap()[0].clone();
            ((p - m) / (2.0 * h) - &exact).norm()
        };
        let ratio = err_at(1e-2) / err_at(5e-3);
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn unit_speed_everywhere() {
        let c = helix345().arc_length_reparameterize(128).unwrap();
        assert!(c.unit_speed_defect(100) < 1e-8);
    }

    #[test]
    fn reparameterizing_unit_speed_is_stable() {
        let c = circle().arc_length_reparameterize(64).unwrap();
        let again = c.arc_length_reparameterize(64).unwrap();
        assert_relative_eq!(again.length(), c.length(), epsilon = 1e-10);
        let mut worst: f64 = 0.0;
        for j in 0..50 {
            let s = c.length() * (j as f64 + 0.5) / 50.0;
            let d = (c.position(s).unwrap() - again.position(s).unwrap()).norm();
            worst = worst.max(d);
        }
        assert!(worst < 1e-9, "worst {worst}");
    }

    #[test]
    fn cusp_is_rejected() {
        let cusp = AnalyticCurve::from_exprs(&["t^2", "t^3"], (-1.0, 1.0)).unwrap();
        let err = cusp.arc_length_reparameterize(64).unwrap_err();
        assert!(matches!(err, HelixError::NonRegularCurve { .. }));
    }

    #[test]
    fn out_of_domain_and_order_checks() {
        let c = circle().arc_length_reparameterize(64).unwrap();
        assert!(matches!(
            c.derivative_jet(100.0, 1),
            Err(HelixError::OutOfDomain { .. })
        ));
        assert!(matches!(
            c.derivative_jet(1.0, 3),
            Err(HelixError::OrderTooHigh { .. })
        ));
    }

    #[test]
    fn rigid_motion_preserves_geometry() {
        let c = helix345().arc_length_reparameterize(96).unwrap();
        let theta: f64 = 0.7;
        let rot = DMatrix::from_row_slice(
            3,
            3,
            &[
                theta.cos(),
                -theta.sin(),
                0.0,
                theta.sin(),
                theta.cos(),
                0.0,
                0.0,
                0.0,
                1.0,
            ],
        );
        let trans = DVector::from_row_slice(&[1.0, -2.0, 0.5]);
        let moved = c.apply_rigid_motion(&rot, &trans).unwrap();
        assert_relative_eq!(moved.length(), c.length(), epsilon = 1e-12);
        let s = 4.0;
        let p = c.position(s).unwrap();
        let q = moved.position(s).unwrap();
        assert!((&rot * p + &trans - q).norm() < 1e-12);
        // tangent transforms without the translation
        let jc = c.derivative_jet(s, 1).unwrap();
        let jm = moved.derivative_jet(s, 1).unwrap();
        assert!((&rot * &jc[0] - &jm[0]).norm() < 1e-12);
    }

    #[test]
    fn non_rotation_is_rejected() {
        let c = circle().arc_length_reparameterize(64).unwrap();
        let reflect = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let shear = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        let zero = DVector::zeros(2);
        assert!(matches!(
            c.apply_rigid_motion(&reflect, &zero),
            Err(HelixError::NotOrthogonal { .. })
        ));
        assert!(matches!(
            c.apply_rigid_motion(&shear, &zero),
            Err(HelixError::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn sampled_curve_round_trip() {
        // sample the 3-4-5 helix finely and rebuild via the spline path
        let analytic = helix345().arc_length_reparameterize(128).unwrap();
        let m = 400;
        let mut pts = Vec::new();
        let mut params = Vec::new();
        for j in 0..m {
            let s = analytic.length() * (j as f64 + 0.5) / m as f64;
            pts.push(analytic.position(s).unwrap());
            params.push(s);
        }
        let sampled = SampledCurve::with_params(pts, params).unwrap();
        let rebuilt = sampled.arc_length_reparameterize(128).unwrap();
        // the fit only covers the sampled range: (m-1)/m of the full length
        let covered = analytic.length() * (m - 1) as f64 / m as f64;
        assert_relative_eq!(rebuilt.length(), covered, max_relative = 1e-6);
        let probe = rebuilt.length() * 0.5;
        let p_direct = analytic
            .position(probe + analytic.length() * 0.5 / m as f64)
            .unwrap();
        // positions agree up to the sampling offset of half a cell
        let p_spline = rebuilt.position(probe).unwrap();
        assert!((p_direct - p_spline).norm() < 1e-4);
    }

    #[test]
    fn too_few_samples_rejected() {
        let pts: Vec<DVector<f64>> = (0..8)
            .map(|j| DVector::from_row_slice(&[j as f64, (j as f64).sin(), 0.1 * j as f64]))
            .collect();
        assert!(matches!(
            SampledCurve::new(pts),
            Err(HelixError::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn scaling_scales_length() {
        let c = circle().scaled(2.0).arc_length_reparameterize(64).unwrap();
        assert_relative_eq!(c.length(), 4.0 * PI, epsilon = 1e-9);
    }
}

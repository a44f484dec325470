//! Curve generators: realize curvature profiles as actual curves.
//!
//! The frame equations form a linear ODE on the orthogonal group,
//!
//! ```text
//! V_i' = -kappa_{i-1} V_{i-1} + kappa_i V_{i+1},      alpha' = V_1,
//! ```
//!
//! and integrating them for prescribed curvature profiles produces a curve
//! whose moving frame and curvatures are known exactly — the ground truth the
//! rest of the crate is tested against. On top of the raw integrator sit the
//! named families: constant-curvature curves (guaranteed non-examples of the
//! constant-angle property), constant-precession curves (the classical
//! three-dimensional positive control), inverse-designed curves admitting a
//! constant-angle direction in any dimension, and seeded random-curvature
//! negative controls.

use crate::curve::{validate_rotation, SampledCurve};
use crate::error::{HelixError, Result};
use crate::expr::Expr;
use crate::frenet::FrenetApparatus;
use crate::grid;
use crate::ode::{self, OdeOptions};
use crate::quad;
use crate::scalar::{approx_f64, real, Real};
use crate::tol;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Prescribed curvature functions `kappa_1 .. kappa_{n-1}` on an interval.
///
/// The intermediate curvatures (all but the last) must be strictly positive
/// on the interval — they arise as orthonormalization pivots — while the last
/// one is signed and may cross zero at isolated points, but must not vanish
/// identically. Both conditions are checked pointwise on a dense probe grid
/// when the profile is integrated.
#[derive(Debug, Clone)]
pub struct CurvatureProfile<T> {
    dimension: usize,
    kappas: Vec<Expr>,
    interval: (T, T),
}

impl<T: Real> CurvatureProfile<T> {
    pub fn new(kappas: Vec<Expr>, interval: (T, T)) -> Result<Self> {
        if kappas.is_empty() {
            return Err(HelixError::InvalidArgument(
                "a curvature profile needs at least one function (dimension >= 2)".into(),
            ));
        }
        let (a, b) = interval;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(HelixError::InvalidArgument(
                "profile interval must be finite with a < b".into(),
            ));
        }
        Ok(CurvatureProfile {
            dimension: kappas.len() + 1,
            kappas,
            interval,
        })
    }

    pub fn from_exprs(sources: &[&str], interval: (T, T)) -> Result<Self> {
        let kappas = sources
            .iter()
            .map(|s| Expr::parse(s))
            .collect::<Result<Vec<_>>>()?;
        CurvatureProfile::new(kappas, interval)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn interval(&self) -> (T, T) {
        self.interval
    }

    pub fn kappas(&self) -> &[Expr] {
        &self.kappas
    }
}

/// Which generator produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Custom,
    WCurve,
    ConstantPrecession,
    SlantHelix,
    Random,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Custom => "custom",
            Family::WCurve => "w_curve",
            Family::ConstantPrecession => "constant_precession",
            Family::SlantHelix => "slant_helix",
            Family::Random => "random",
        }
    }
}

/// A generated curve together with its realized frame data and whatever
/// ground truth the generating family knows about itself.
#[derive(Debug, Clone)]
pub struct SynthesisRecord<T: Real> {
    pub family: Family,
    pub curve: SampledCurve<T>,
    pub apparatus: FrenetApparatus<T>,
    /// Fixed direction making a constant angle with the second frame vector,
    /// for families that have one.
    pub axis_true: Option<DVector<T>>,
    /// The constant angle, when applicable.
    pub theta_true: Option<T>,
    /// The constant value of the squared coefficient sum, when applicable.
    pub c_true: Option<T>,
    /// Integration constant in the analyzer's convention: the value of the
    /// first coefficient function at the first grid point.
    pub c0_true: Option<T>,
    /// Largest pre-reprojection orthonormality defect per unit arc length
    /// seen during integration.
    pub drift_rate: T,
}

/// Integrates the frame system for an explicit curvature profile, starting
/// from the given orthonormal frame (rows are the frame vectors; identity
/// when omitted). The grid is the usual midpoint grid over the profile's
/// interval with at least [`tol::MIN_FRAME_GRID`] points.
pub fn integrate_frenet_system<T: Real>(
    profile: &CurvatureProfile<T>,
    initial_frame: Option<&DMatrix<T>>,
    grid_size: usize,
) -> Result<SynthesisRecord<T>> {
    validate_profile_grid(profile, 4 * grid_size.max(tol::MIN_FRAME_GRID) + 17)?;
    let kappas = profile.kappas.clone();
    let run = integrate_frames(
        profile.dimension,
        profile.interval,
        grid_size,
        initial_frame,
        None,
        move |i, s, _| Ok(kappas[i - 1].eval(s)),
    )?;
    record_from_run(
        Family::Custom,
        profile.interval,
        run,
        None,
        None,
        None,
        None,
    )
}

/// Constant-curvature curve: the canonical family admitting *no* direction at
/// a constant angle to the second frame vector. The first `n - 2` constants
/// must be positive, the last nonzero.
pub fn w_curve<T: Real>(
    n: usize,
    deltas: &[f64],
    length: T,
    grid_size: usize,
) -> Result<SynthesisRecord<T>> {
    if n < 2 || deltas.len() != n - 1 {
        return Err(HelixError::InvalidArgument(format!(
            "dimension {n} needs {} constant curvatures, got {}",
            n.max(2) - 1,
            deltas.len()
        )));
    }
    let profile = CurvatureProfile::new(
        deltas.iter().map(|&d| Expr::constant(d)).collect(),
        (T::zero(), length),
    )?;
    let mut rec = integrate_frenet_system(&profile, None, grid_size)?;
    rec.family = Family::WCurve;
    Ok(rec)
}

/// Constant-precession curve: `kappa_1 = omega sin(mu s)`, `kappa_2 =
/// omega cos(mu s)` in dimension 3. Admits a constant-angle direction with
/// `C = 1 + omega^2/mu^2`; the interval must keep `kappa_1` away from its
/// zeros by a margin of `0.05/|mu|`.
pub fn constant_precession_curve<T: Real>(
    omega: f64,
    mu: f64,
    interval: (T, T),
    grid_size: usize,
) -> Result<SynthesisRecord<T>> {
    if omega == 0.0 || mu == 0.0 {
        return Err(HelixError::InvalidArgument(
            "constant-precession parameters omega and mu must be nonzero".into(),
        ));
    }
    let (a, b) = (approx_f64(interval.0), approx_f64(interval.1));
    let margin = 0.05 / mu.abs();
    let period = std::f64::consts::PI / mu.abs();
    // zeros of sin(mu s) sit at integer multiples of pi/|mu|
    let k_lo = ((a - margin) / period).floor() as i64 - 1;
    let k_hi = ((b + margin) / period).ceil() as i64 + 1;
    for k in k_lo..=k_hi {
        let z = k as f64 * period;
        if z > a - margin && z < b + margin {
            return Err(HelixError::IntervalContainsCurvatureZero { s: z, margin });
        }
    }
    let mid = 0.5 * (a + b);
    if omega * (mu * mid).sin() < 0.0 {
        return Err(HelixError::InvalidArgument(format!(
            "first curvature omega*sin(mu*s) is negative on the interval (midpoint s = {mid:.6}); \
             flip the sign of omega or shift the interval by one half-period"
        )));
    }

    let kappa1 = Expr::constant(omega) * Expr::Sin(Box::new(Expr::constant(mu) * Expr::Var));
    let kappa2 = Expr::constant(omega) * Expr::Cos(Box::new(Expr::constant(mu) * Expr::Var));
    let profile = CurvatureProfile::new(vec![kappa1, kappa2], interval)?;
    validate_profile_grid(&profile, 4 * grid_size.max(tol::MIN_FRAME_GRID) + 17)?;
    let kappas = profile.kappas.clone();
    let run = integrate_frames(3, interval, grid_size, None, None, move |i, s, _| {
        Ok(kappas[i - 1].eval(s))
    })?;

    // closed-form coefficient functions: G_1 = -(omega/mu) cos(mu s),
    // G_2 = 1, G_3 = -(omega/mu) sin(mu s); their squares sum to the constant
    let ratio = real::<T>(omega / mu);
    let c_true = T::one() + ratio * ratio;
    let theta = (T::one() / c_true.sqrt()).acos();
    let s0 = run.s[0];
    let mu_t = real::<T>(mu);
    let g = [
        -ratio * (mu_t * s0).cos(),
        T::one(),
        -ratio * (mu_t * s0).sin(),
    ];
    let mut axis = DVector::<T>::zeros(3);
    for (i, gi) in g.iter().enumerate() {
        axis += run.frames[0].row(i).transpose() * (*gi * theta.cos());
    }
    let c0 = g[0];
    record_from_run(
        Family::ConstantPrecession,
        interval,
        run,
        Some(axis),
        Some(theta),
        Some(c_true),
        Some(c0),
    )
}

/// Inverse design: prescribe `kappa_1 .. kappa_{n-2}`, a constant `C > 1`,
/// and an integration constant, and construct the last curvature so the
/// resulting curve admits a direction at angle `arccos(1/sqrt(C))` to its
/// second frame vector.
///
/// The coefficient functions are built symbolically: each `G_i` is affine in
/// the running integral `phi = ∫ kappa_1` (taken from the interval midpoint,
/// shifted by `c0`), with expression-tree coefficients closed under the
/// recursion. The last coefficient is `G_n = sqrt(C - sum G_i^2)` and the
/// last curvature follows from the recursion's final step; `phi` rides along
/// the frame integration as one extra state component.
pub fn synthesize_slant_helix<T: Real>(
    n: usize,
    kappas: &[Expr],
    c: f64,
    c0: f64,
    interval: (T, T),
    grid_size: usize,
) -> Result<SynthesisRecord<T>> {
    if n < 3 || kappas.len() != n - 2 {
        return Err(HelixError::InvalidArgument(format!(
            "dimension {n} needs {} prescribed curvatures, got {} (and n >= 3)",
            n.max(3) - 2,
            kappas.len()
        )));
    }
    let margin = tol::DOMAIN_MARGIN_FACTOR * c;
    if !(c > 1.0 + margin) {
        return Err(HelixError::DomainViolation {
            reason: format!(
                "squared-sum constant C = {c} must exceed 1 (the constant-angle \
                 construction divides by sqrt(C - sum G_i^2), and sum G_i^2 >= 1)"
            ),
        });
    }
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(HelixError::InvalidArgument(
            "interval must be finite with a < b".into(),
        ));
    }

    // probe the prescribed intermediates before any construction
    let probe_profile = CurvatureProfile::new(kappas.to_vec(), interval)?;
    validate_prescribed_positive(&probe_profile, 4 * grid_size.max(tol::MIN_FRAME_GRID) + 17)?;

    // expression-tree coefficients: G_i = f_i * (phi + c0) + g_i
    let (f, g) = coefficient_trees(n, kappas);
    let df_last = f[n - 2].differentiate();
    let dg_last = g[n - 2].differentiate();

    let mid = (a + b) * real::<T>(0.5);
    let kappa1 = kappas[0].clone();
    let c0_t = real::<T>(c0);
    let c_t = real::<T>(c);
    let margin_t = real::<T>(margin);

    let eval_last = {
        let kappas = kappas.to_vec();
        let (f, g) = (f.clone(), g.clone());
        let (df_last, dg_last) = (df_last.clone(), dg_last.clone());
        move |s: T, phi: T| -> Result<(T, Vec<T>)> {
            let u = phi + c0_t;
            let gv: Vec<T> = (0..n - 1)
                .map(|i| f[i].eval(s) * u + g[i].eval(s))
                .collect();
            let sumsq = gv.iter().fold(T::zero(), |acc, &x| acc + x * x);
            let rad = c_t - sumsq;
            if !(rad > margin_t) {
                return Err(HelixError::DomainViolation {
                    reason: format!(
                        "C - sum G_i^2 = {:.6e} at s = {:.6}, below margin {:.3e}; \
                         shorten the interval or raise C",
                        approx_f64(rad),
                        approx_f64(s),
                        approx_f64(margin_t)
                    ),
                });
            }
            let gn = rad.sqrt();
            let dg_nm1 =
                df_last.eval(s) * u + f[n - 2].eval(s) * kappas[0].eval(s) + dg_last.eval(s);
            let k_last = (kappas[n - 3].eval(s) * gv[n - 3] + dg_nm1) / gn;
            let mut all = gv;
            all.push(gn);
            Ok((k_last, all))
        }
    };

    // phase value at the interval start, then at the first grid points for a
    // cheap feasibility sweep before the actual integration
    let qtol = real::<T>(tol::QUAD_REL_TOL);
    let phi_a = -quad::integrate(|t| kappa1.eval(t), a, mid, qtol);
    let m = grid_size.max(tol::MIN_FRAME_GRID);
    {
        let (s_probe, h_probe) = grid::midpoint_grid(a, b, m);
        let k1_grid: Vec<T> = s_probe.iter().map(|&sj| kappa1.eval(sj)).collect();
        let cumulative = grid::cumulative_integral(&k1_grid, h_probe)?;
        let phi_first = phi_a + quad::integrate(|t| kappa1.eval(t), a, s_probe[0], qtol);
        let eps = real::<T>(tol::EPS_CURVATURE);
        for (j, &sj) in s_probe.iter().enumerate() {
            let (k_last, _) = eval_last(sj, phi_first + cumulative[j])?;
            if k_last.abs() <= eps {
                return Err(HelixError::CurvatureVanishes {
                    index: n - 1,
                    s: approx_f64(sj),
                    value: approx_f64(k_last),
                });
            }
        }
    }

    let kappas_owned = kappas.to_vec();
    let eval_in_ode = eval_last.clone();
    let run = integrate_frames(
        n,
        interval,
        grid_size,
        None,
        Some(phi_a),
        move |i, s, phi| {
            if i <= n - 2 {
                Ok(kappas_owned[i - 1].eval(s))
            } else {
                Ok(eval_in_ode(s, phi)?.0)
            }
        },
    )?;

    let theta = (T::one() / c_t.sqrt()).acos();
    let s0 = run.s[0];
    let (_, g0) = eval_last(s0, run.phases[0])?;
    let mut axis = DVector::<T>::zeros(n);
    for (i, gi) in g0.iter().enumerate() {
        axis += run.frames[0].row(i).transpose() * (*gi * theta.cos());
    }
    let c0_analyzer = run.phases[0] + c0_t;
    record_from_run(
        Family::SlantHelix,
        interval,
        run,
        Some(axis),
        Some(theta),
        Some(c_t),
        Some(c0_analyzer),
    )
}

/// Seeded band-limited positive random profiles: exponentials of short
/// trigonometric sums with fundamental period `period`. Deterministic per
/// seed; successive calls with the same arguments yield identical trees.
pub fn random_positive_profiles(
    count: usize,
    seed: u64,
    smoothness: f64,
    period: f64,
) -> Vec<Expr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = 2.0 * std::f64::consts::PI / period;
    (0..count)
        .map(|_| {
            let mut u = Expr::constant(rng.gen_range(-0.3..0.3));
            for k in 1..=3u32 {
                let w = base * k as f64;
                let amp = smoothness / k as f64;
                let ak = rng.gen_range(-amp..amp);
                let bk = rng.gen_range(-amp..amp);
                u = u + Expr::constant(ak) * Expr::Cos(Box::new(Expr::constant(w) * Expr::Var));
                u = u + Expr::constant(bk) * Expr::Sin(Box::new(Expr::constant(w) * Expr::Var));
            }
            Expr::Exp(Box::new(u))
        })
        .collect()
}

/// Generic negative control: all `n - 1` curvatures drawn as positive smooth
/// random functions of the given seed, integrated over `[0, length]`.
pub fn random_curvature_curve<T: Real>(
    n: usize,
    seed: u64,
    smoothness: f64,
    length: T,
    grid_size: usize,
) -> Result<SynthesisRecord<T>> {
    if n < 3 {
        return Err(HelixError::InvalidArgument(format!(
            "random curvature curves need dimension >= 3, got {n}"
        )));
    }
    let kappas = random_positive_profiles(n - 1, seed, smoothness, approx_f64(length));
    let profile = CurvatureProfile::new(kappas, (T::zero(), length))?;
    let mut rec = integrate_frenet_system(&profile, None, grid_size)?;
    rec.family = Family::Random;
    Ok(rec)
}

/// Builds the expression trees `f_i`, `g_i` with `G_i = f_i (phi + c0) + g_i`
/// for `i = 1 .. n-1`, where `phi` is the running integral of `kappa_1`.
/// Differentiating the ansatz and matching the recursion gives
/// `f_i = (kappa_{i-2} f_{i-2} + f_{i-1}') / kappa_{i-1}` and
/// `g_i = (kappa_{i-2} g_{i-2} + g_{i-1}' + f_{i-1} kappa_1) / kappa_{i-1}`.
fn coefficient_trees(n: usize, kappas: &[Expr]) -> (Vec<Expr>, Vec<Expr>) {
    let one = || Expr::constant(1.0);
    let zero = || Expr::constant(0.0);
    let mut f = vec![one(), zero()];
    let mut g = vec![zero(), one()];
    if n >= 4 {
        f.push(ediv(kappas[0].clone(), kappas[1].clone()));
        g.push(zero());
    }
    for i in 4..n {
        // building G_i for i <= n-1; kappas[i-2] = kappa_{i-1} exists since
        // i - 1 <= n - 2
        let fi = ediv(
            eadd(
                emul(kappas[i - 3].clone(), f[i - 3].clone()),
                f[i - 2].differentiate(),
            ),
            kappas[i - 2].clone(),
        );
        let gi = ediv(
            eadd(
                eadd(
                    emul(kappas[i - 3].clone(), g[i - 3].clone()),
                    g[i - 2].differentiate(),
                ),
                emul(f[i - 2].clone(), kappas[0].clone()),
            ),
            kappas[i - 2].clone(),
        );
        f.push(fi);
        g.push(gi);
    }
    (f, g)
}

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(c) if *c == v)
}

fn eadd(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) {
        b
    } else if is_const(&b, 0.0) {
        a
    } else {
        a + b
    }
}

fn emul(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) || is_const(&b, 0.0) {
        Expr::constant(0.0)
    } else if is_const(&a, 1.0) {
        b
    } else if is_const(&b, 1.0) {
        a
    } else {
        a * b
    }
}

fn ediv(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) {
        Expr::constant(0.0)
    } else if is_const(&b, 1.0) {
        a
    } else {
        Expr::Div(Box::new(a), Box::new(b))
    }
}

struct FrameRun<T> {
    s: Vec<T>,
    h: T,
    positions: Vec<DVector<T>>,
    frames: Vec<DMatrix<T>>,
    phases: Vec<T>,
    kappa_grids: Vec<Vec<T>>,
    drift_rate: T,
}

/// Integrates frames, positions, and (optionally) the running curvature
/// integral through the midpoint grid, reprojecting the frame block onto the
/// orthogonal group after every accepted step.
fn integrate_frames<T, K>(
    n: usize,
    interval: (T, T),
    grid_size: usize,
    initial_frame: Option<&DMatrix<T>>,
    phase_start: Option<T>,
    kappa: K,
) -> Result<FrameRun<T>>
where
    T: Real,
    K: Fn(usize, T, T) -> Result<T>,
{
    let (a, b) = interval;
    let m = grid_size.max(tol::MIN_FRAME_GRID);
    let (s_grid, h) = grid::midpoint_grid(a, b, m);
    let has_phase = phase_start.is_some();
    let len = n * n + n + usize::from(has_phase);

    let frame0 = match initial_frame {
        Some(fm) => {
            validate_rotation(fm, n)?;
            fm.clone()
        }
        None => DMatrix::identity(n, n),
    };
    let mut y0 = DVector::<T>::zeros(len);
    for r in 0..n {
        for col in 0..n {
            y0[r * n + col] = frame0[(r, col)];
        }
    }
    if let Some(p) = phase_start {
        y0[n * n + n] = p;
    }

    let deriv = |t: T, y: &DVector<T>| -> Result<DVector<T>> {
        let phi = if has_phase { y[n * n + n] } else { T::zero() };
        let mut kv = vec![T::zero(); n + 1];
        for (i, slot) in kv.iter_mut().enumerate().take(n).skip(1) {
            *slot = kappa(i, t, phi)?;
        }
        let mut dy = DVector::zeros(len);
        for r in 0..n {
            for col in 0..n {
                let mut d = T::zero();
                if r > 0 {
                    d -= kv[r] * y[(r - 1) * n + col];
                }
                if r + 1 < n {
                    d += kv[r + 1] * y[(r + 1) * n + col];
                }
                dy[r * n + col] = d;
            }
        }
        for col in 0..n {
            dy[n * n + col] = y[col];
        }
        if has_phase {
            dy[n * n + n] = kv[1];
        }
        Ok(dy)
    };

    let mut drift_rate = T::zero();
    let states = ode::integrate(
        deriv,
        a,
        y0,
        &s_grid,
        &OdeOptions::default(),
        |_t, h_step, y: &mut DVector<T>| {
            let defect = frame_defect(y.as_slice(), n);
            if h_step > T::zero() {
                drift_rate = drift_rate.max(defect / h_step);
            }
            reproject_frame(y.as_mut_slice(), n);
        },
    )?;

    let mut positions = Vec::with_capacity(m);
    let mut frames = Vec::with_capacity(m);
    let mut phases = Vec::with_capacity(m);
    for y in &states {
        let mut fm = DMatrix::<T>::zeros(n, n);
        for r in 0..n {
            for col in 0..n {
                fm[(r, col)] = y[r * n + col];
            }
        }
        frames.push(fm);
        positions.push(DVector::from_fn(n, |col, _| y[n * n + col]));
        phases.push(if has_phase { y[n * n + n] } else { T::zero() });
    }
    let mut kappa_grids = Vec::with_capacity(n - 1);
    for i in 1..n {
        let mut col = Vec::with_capacity(m);
        for (j, &sj) in s_grid.iter().enumerate() {
            col.push(kappa(i, sj, phases[j])?);
        }
        kappa_grids.push(col);
    }
    Ok(FrameRun {
        s: s_grid,
        h,
        positions,
        frames,
        phases,
        kappa_grids,
        drift_rate,
    })
}

fn record_from_run<T: Real>(
    family: Family,
    interval: (T, T),
    run: FrameRun<T>,
    axis_true: Option<DVector<T>>,
    theta_true: Option<T>,
    c_true: Option<T>,
    c0_true: Option<T>,
) -> Result<SynthesisRecord<T>> {
    let apparatus = FrenetApparatus::from_tabulated(
        interval.1 - interval.0,
        run.s.clone(),
        run.h,
        run.frames,
        run.kappa_grids,
    )?;
    let curve = SampledCurve::with_params(run.positions, run.s)?;
    Ok(SynthesisRecord {
        family,
        curve,
        apparatus,
        axis_true,
        theta_true,
        c_true,
        c0_true,
        drift_rate: run.drift_rate,
    })
}

/// Largest deviation of the frame block's Gram matrix from the identity.
fn frame_defect<T: Real>(y: &[T], n: usize) -> T {
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            let mut dot = T::zero();
            for c in 0..n {
                dot += y[i * n + c] * y[j * n + c];
            }
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// Two-pass modified Gram–Schmidt on the frame rows, in place. For the tiny
/// perturbations an accepted step leaves, this preserves orientation.
fn reproject_frame<T: Real>(y: &mut [T], n: usize) {
    for _ in 0..2 {
        for i in 0..n {
            for j in 0..i {
                let mut c = T::zero();
                for k in 0..n {
                    c += y[i * n + k] * y[j * n + k];
                }
                for k in 0..n {
                    let adj = c * y[j * n + k];
                    y[i * n + k] -= adj;
                }
            }
            let mut norm = T::zero();
            for k in 0..n {
                norm += y[i * n + k] * y[i * n + k];
            }
            let norm = norm.sqrt();
            for k in 0..n {
                y[i * n + k] /= norm;
            }
        }
    }
}

/// Pointwise profile admissibility on a dense probe grid: strict positivity
/// for the intermediates, not-identically-zero for the last.
fn validate_profile_grid<T: Real>(profile: &CurvatureProfile<T>, probes: usize) -> Result<()> {
    validate_prescribed_positive(profile, probes)?;
    let n = profile.dimension;
    let (a, b) = profile.interval;
    let (ps, _) = grid::midpoint_grid(a, b, probes);
    let eps = real::<T>(tol::EPS_CURVATURE);
    let last = &profile.kappas[n - 2];
    let mut max_abs = T::zero();
    for &sj in &ps {
        max_abs = max_abs.max(last.eval(sj).abs());
    }
    if !(max_abs > eps) {
        return Err(HelixError::CurvatureVanishes {
            index: n - 1,
            s: approx_f64(ps[0]),
            value: approx_f64(max_abs),
        });
    }
    Ok(())
}

/// Strict positivity of every *intermediate* curvature in the profile (all
/// functions up to index `dimension - 2`).
fn validate_prescribed_positive<T: Real>(
    profile: &CurvatureProfile<T>,
    probes: usize,
) -> Result<()> {
    let n = profile.dimension;
    let (a, b) = profile.interval;
    let (ps, _) = grid::midpoint_grid(a, b, probes);
    let eps = real::<T>(tol::EPS_CURVATURE);
    for i in 1..=n.saturating_sub(2) {
        let e = &profile.kappas[i - 1];
        for &sj in &ps {
            let k = e.eval(sj);
            if !(k > eps) {
                return Err(HelixError::CurvatureVanishes {
                    index: i,
                    s: approx_f64(sj),
                    value: approx_f64(k),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slant;

    #[test]
    fn plane_circle_matches_closed_form() {
        let profile =
            CurvatureProfile::<f64>::from_exprs(&["1"], (0.0, 2.0 * std::f64::consts::PI)).unwrap();
        let rec = integrate_frenet_system(&profile, None, 128).unwrap();
        for (j, &s) in rec.apparatus.grid().iter().enumerate() {
            let p = &rec.curve.points()[j];
            assert!((p[0] - s.sin()).abs() < 1e-8, "x at s={s}");
            assert!((p[1] - (1.0 - s.cos())).abs() < 1e-8, "y at s={s}");
        }
        assert!(rec.drift_rate < 1e-8, "drift {:.3e}", rec.drift_rate);
    }

    #[test]
    fn helix_point_cloud_recovers_radius_and_pitch() {
        let rec = w_curve::<f64>(3, &[0.12, 0.16], 10.0 * std::f64::consts::PI, 512).unwrap();
        let nu = (0.12f64 * 0.12 + 0.16 * 0.16).sqrt();
        // for a circular helix the combination below is the (constant)
        // cylinder axis
        let axis = (rec.apparatus.frame_vector(0, 1) * (0.16 / nu))
            + (rec.apparatus.frame_vector(0, 3) * (0.12 / nu));
        let pts = rec.curve.points();
        let s = rec.apparatus.grid();
        let m = pts.len();

        let slope = (pts[m - 1].dot(&axis) - pts[0].dot(&axis)) / (s[m - 1] - s[0]);
        assert!((slope - 0.8).abs() < 1e-6, "pitch slope {slope}");

        // orthonormal basis of the cross-sectional plane
        let mut w1 = DVector::<f64>::zeros(3);
        w1[if axis[0].abs() < 0.9 { 0 } else { 1 }] = 1.0;
        let w1 = (&w1 - &axis * axis.dot(&w1)).normalize();
        let w2 = DVector::from_column_slice(&[
            axis[1] * w1[2] - axis[2] * w1[1],
            axis[2] * w1[0] - axis[0] * w1[2],
            axis[0] * w1[1] - axis[1] * w1[0],
        ]);

        // algebraic circle fit: 2 c.x + (r^2 - |c|^2) = |x|^2 is linear in
        // the unknowns, and exact for points on a circle
        let mut design = DMatrix::<f64>::zeros(m, 3);
        let mut rhs = DVector::<f64>::zeros(m);
        for j in 0..m {
            let x = pts[j].dot(&w1);
            let y = pts[j].dot(&w2);
            design[(j, 0)] = 2.0 * x;
            design[(j, 1)] = 2.0 * y;
            design[(j, 2)] = 1.0;
            rhs[j] = x * x + y * y;
        }
        let sol = design.svd(true, true).solve(&rhs, 1e-14).unwrap();
        let radius = (sol[2] + sol[0] * sol[0] + sol[1] * sol[1]).sqrt();
        assert!((radius - 3.0).abs() < 1e-5, "radius {radius}");

        let pitch = slope * radius / (1.0 - slope * slope).sqrt();
        assert!((pitch - 4.0).abs() < 1e-5, "pitch {pitch}");
    }

    #[test]
    fn zero_intermediate_curvature_is_rejected() {
        let profile = CurvatureProfile::<f64>::from_exprs(&["1", "0"], (0.0, 1.0)).unwrap();
        let err = integrate_frenet_system(&profile, None, 64).unwrap_err();
        assert!(
            matches!(err, HelixError::CurvatureVanishes { index: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn constant_precession_ground_truth_is_self_consistent() {
        let rec = constant_precession_curve::<f64>(2.0, 1.0, (0.3, 2.8), 512).unwrap();
        assert!((rec.c_true.unwrap() - 5.0).abs() < 1e-12);
        let axis = rec.axis_true.as_ref().unwrap();
        assert!(
            (axis.norm() - 1.0).abs() < 1e-10,
            "axis norm {}",
            axis.norm()
        );
        let cos_theta = rec.theta_true.unwrap().cos();
        for j in 0..rec.apparatus.len() {
            let d = rec.apparatus.frame_vector(j, 2).dot(axis);
            assert!(
                (d - cos_theta).abs() < 1e-8,
                "angle drift at j={j}: {d} vs {cos_theta}"
            );
        }
        assert!(rec.drift_rate < 1e-8, "drift {:.3e}", rec.drift_rate);
    }

    #[test]
    fn constant_precession_interval_must_avoid_curvature_zeros() {
        let err = constant_precession_curve::<f64>(2.0, 1.0, (0.3, 3.3), 128).unwrap_err();
        assert!(
            matches!(err, HelixError::IntervalContainsCurvatureZero { .. }),
            "{err:?}"
        );
        let err = constant_precession_curve::<f64>(2.0, 1.0, (3.3, 6.0), 128).unwrap_err();
        assert!(matches!(err, HelixError::InvalidArgument(_)), "{err:?}");
    }

    #[test]
    fn synthesized_three_dimensional_curve_matches_the_closed_form() {
        let kappas = vec![Expr::constant(1.0)];
        let rec = synthesize_slant_helix::<f64>(3, &kappas, 2.0, 0.0, (-0.9, 0.9), 512).unwrap();
        for (j, &s) in rec.apparatus.grid().iter().enumerate() {
            let expected = s / (1.0 - s * s).sqrt();
            let got = rec.apparatus.curvature(2)[j];
            assert!(
                (got - expected).abs() < 1e-8,
                "kappa_2 at s={s}: {got} vs {expected}"
            );
        }
        let axis = rec.axis_true.as_ref().unwrap();
        let cos_theta = rec.theta_true.unwrap().cos();
        assert!((cos_theta - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
        for j in 0..rec.apparatus.len() {
            let d = rec.apparatus.frame_vector(j, 2).dot(axis);
            assert!((d - cos_theta).abs() < 1e-8, "angle drift at j={j}");
        }
        let s0 = rec.apparatus.grid()[0];
        assert!((rec.c0_true.unwrap() - s0).abs() < 1e-10);
    }

    #[test]
    fn excluded_constant_and_domain_overflow_are_rejected() {
        let kappas = vec![Expr::constant(1.0)];
        let err =
            synthesize_slant_helix::<f64>(3, &kappas, 1.0, 0.0, (-0.5, 0.5), 128).unwrap_err();
        assert!(matches!(err, HelixError::DomainViolation { .. }), "{err:?}");

        let err =
            synthesize_slant_helix::<f64>(3, &kappas, 2.0, 0.0, (-1.2, 1.2), 128).unwrap_err();
        match err {
            HelixError::DomainViolation { reason } => {
                assert!(reason.contains("s = "), "{reason}")
            }
            other => panic!("expected domain violation, got {other:?}"),
        }
    }

    #[test]
    fn four_dimensional_synthesis_passes_its_own_detector() {
        let kappas = vec![Expr::constant(1.0), Expr::constant(1.0)];
        let rec = synthesize_slant_helix::<f64>(4, &kappas, 30.0, 0.0, (0.0, 1.2), 512).unwrap();
        let report = slant::detect_slant_helix(&rec.apparatus, None).unwrap();
        assert_eq!(report.verdict, slant::Verdict::SlantHelix);
        assert!(
            (report.c - 30.0).abs() / 30.0 < 1e-2,
            "recovered C = {}",
            report.c
        );
        let axis = report.axis.as_ref().unwrap();
        let dot = axis.dot(rec.axis_true.as_ref().unwrap()).abs().min(1.0);
        assert!(dot.acos() < 1e-3, "axis angle {:.3e}", dot.acos());
    }

    #[test]
    fn random_curves_are_deterministic_per_seed() {
        let one = random_curvature_curve::<f64>(4, 9, 0.4, 5.0, 128).unwrap();
        let two = random_curvature_curve::<f64>(4, 9, 0.4, 5.0, 128).unwrap();
        for i in 1..4 {
            assert_eq!(one.apparatus.curvature(i), two.apparatus.curvature(i));
        }
        assert_eq!(one.curve.points(), two.curve.points());
        let other = random_curvature_curve::<f64>(4, 10, 0.4, 5.0, 128).unwrap();
        assert_ne!(one.apparatus.curvature(1), other.apparatus.curvature(1));
    }
}

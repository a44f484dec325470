//! Adaptive Runge–Kutta integration.
//!
//! One integrator serves the whole crate: the Dormand–Prince 5(4) embedded
//! pair with a proportional step controller on the weighted RMS error norm.
//! It advances through a strictly increasing list of target abscissae,
//! landing on each exactly, and lets the caller post-process the state after
//! every accepted step — which is how frame integration keeps its state on
//! the orthogonal group without the controller ever seeing the projection.

use crate::error::{HelixError, Result};
use crate::scalar::{approx_f64, real, Real};
use crate::tol;
use nalgebra::DVector;

#[derive(Debug, Clone)]
pub struct OdeOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Step-collapse threshold as a fraction of the total span.
    pub min_step_factor: T,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        OdeOptions {
            rel_tol: real(tol::ODE_REL_TOL),
            abs_tol: real(tol::ODE_ABS_TOL),
            min_step_factor: real(tol::MIN_STEP_FACTOR),
        }
    }
}

struct Tableau<T> {
    a: [[T; 6]; 6],
    c: [T; 6],
    e: [T; 7],
}

fn tableau<T: Real>() -> Tableau<T> {
    let z = T::zero;
    Tableau {
        a: [
            [real(1.0 / 5.0), z(), z(), z(), z(), z()],
            [real(3.0 / 40.0), real(9.0 / 40.0), z(), z(), z(), z()],
            [
                real(44.0 / 45.0),
                real(-56.0 / 15.0),
                real(32.0 / 9.0),
                z(),
                z(),
                z(),
            ],
            [
                real(19372.0 / 6561.0),
                real(-25360.0 / 2187.0),
                real(64448.0 / 6561.0),
                real(-212.0 / 729.0),
                z(),
                z(),
            ],
            [
                real(9017.0 / 3168.0),
                real(-355.0 / 33.0),
                real(46732.0 / 5247.0),
                real(49.0 / 176.0),
                real(-5103.0 / 18656.0),
                z(),
            ],
            [
                real(35.0 / 384.0),
                z(),
                real(500.0 / 1113.0),
                real(125.0 / 192.0),
                real(-2187.0 / 6784.0),
                real(11.0 / 84.0),
            ],
        ],
        c: [
            real(1.0 / 5.0),
            real(3.0 / 10.0),
            real(4.0 / 5.0),
            real(8.0 / 9.0),
            T::one(),
            T::one(),
        ],
        e: [
            real(71.0 / 57600.0),
            z(),
            real(-71.0 / 16695.0),
            real(71.0 / 1920.0),
            real(-17253.0 / 339200.0),
            real(22.0 / 525.0),
            real(-1.0 / 40.0),
        ],
    }
}

/// Integrates `y' = f(t, y)` from `t0`, returning the state at each of the
/// strictly increasing `targets` (all at or after `t0`, which may itself be
/// the first target). `post_step` runs after every accepted step with
/// `(t, step, &mut state)` and may adjust the state in place; the derivative
/// is re-evaluated afterwards, so adjustments propagate exactly.
pub fn integrate<T, F, H>(
    mut f: F,
    t0: T,
    y0: DVector<T>,
    targets: &[T],
    opts: &OdeOptions<T>,
    mut post_step: H,
) -> Result<Vec<DVector<T>>>
where
    T: Real,
    F: FnMut(T, &DVector<T>) -> Result<DVector<T>>,
    H: FnMut(T, T, &mut DVector<T>),
{
    let last = match targets.last() {
        Some(&v) => v,
        None => return Ok(Vec::new()),
    };
    if targets[0] < t0 || targets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HelixError::InvalidArgument(
            "integration targets must be strictly increasing and start at or after t0".into(),
        ));
    }
    let span = last - t0;
    if !(span > T::zero()) {
        // a single target equal to t0: the initial state is the answer
        return Ok(vec![y0]);
    }
    let min_step = span * opts.min_step_factor;
    let snap = span * real::<T>(1e-14);
    let tb = tableau::<T>();
    let dim = y0.len();

    let mut t = t0;
    let mut y = y0;
    let mut h = span * real::<T>(1e-2);
    let mut k1 = f(t, &y)?;
    let mut out = Vec::with_capacity(targets.len());

    for &target in targets {
        while target - t > snap {
            let clamped = h >= target - t;
            let h_try = if clamped { target - t } else { h };

            // the last tableau row carries the fifth-order weights, so the
            // final stage state is the candidate new y and its derivative is
            // the first-same-as-last stage
            let mut k: Vec<DVector<T>> = Vec::with_capacity(7);
            k.push(k1.clone());
            let mut y_new = y.clone();
            for stage in 0..6 {
                let mut ys = y.clone();
                for (i, ki) in k.iter().enumerate() {
                    if tb.a[stage][i] != T::zero() {
                        ys.axpy(h_try * tb.a[stage][i], ki, T::one());
                    }
                }
                let d = f(t + tb.c[stage] * h_try, &ys)?;
                k.push(d);
                if stage == 5 {
                    y_new = ys;
                }
            }

            let mut err_sq = T::zero();
            for c in 0..dim {
                let mut e = T::zero();
                for (i, ki) in k.iter().enumerate() {
                    e += tb.e[i] * ki[c];
                }
                e *= h_try;
                let sc = opts.abs_tol + opts.rel_tol * y[c].abs().max(y_new[c].abs());
                let r = e / sc;
                err_sq += r * r;
            }
            let err = (err_sq / real::<T>(dim as f64)).sqrt();

            if err <= T::one() {
                t = if clamped { target } else { t + h_try };
                y = y_new;
                post_step(t, h_try, &mut y);
                k1 = f(t, &y)?;
                let factor = if err > T::zero() {
                    (real::<T>(0.9) * err.powf(real(-0.2)))
                        .max(real(0.2))
                        .min(real(5.0))
                } else {
                    real(5.0)
                };
                if !clamped || factor < T::one() {
                    h = h_try * factor;
                }
            } else {
                let factor = if err.is_finite() {
                    (real::<T>(0.9) * err.powf(real(-0.2)))
                        .max(real(0.1))
                        .min(real(0.9))
                } else {
                    real(0.1)
                };
                h = h_try * factor;
                if h < min_step {
                    return Err(HelixError::StepFailure {
                        s: approx_f64(t),
                        step: approx_f64(h),
                        min_step: approx_f64(min_step),
                    });
                }
            }
        }
        t = target;
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_hook<T: Real>(_: T, _: T, _: &mut DVector<T>) {}

    #[test]
    fn exponential_decay_matches_closed_form() {
        let targets: Vec<f64> = (1..=8).map(|j| 0.25 * j as f64).collect();
        let states = integrate(
            |_, y: &DVector<f64>| Ok(-y),
            0.0,
            DVector::from_element(1, 1.0),
            &targets,
            &OdeOptions::default(),
            no_hook,
        )
        .unwrap();
        for (t, y) in targets.iter().zip(&states) {
            assert!((y[0] - (-t).exp()).abs() < 1e-10, "t={t} y={}", y[0]);
        }
    }

    #[test]
    fn rotation_returns_to_start_and_hook_pins_the_norm() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let targets: Vec<f64> = (1..=6).map(|j| j as f64 * two_pi).collect();
        let states = integrate(
            |_, y: &DVector<f64>| Ok(DVector::from_column_slice(&[-y[1], y[0]])),
            0.0,
            DVector::from_column_slice(&[1.0, 0.0]),
            &targets,
            &OdeOptions::default(),
            |_, _, y: &mut DVector<f64>| {
                let n = y.norm();
                *y /= n;
            },
        )
        .unwrap();
        for y in &states {
            assert!((y.norm() - 1.0).abs() < 1e-14);
        }
        let last = &states[states.len() - 1];
        assert!(
            (last[0] - 1.0).abs() < 1e-8 && last[1].abs() < 1e-8,
            "{last}"
        );
    }

    #[test]
    fn blow_up_collapses_the_step() {
        let result = integrate(
            |_, y: &DVector<f64>| Ok(DVector::from_element(1, y[0] * y[0])),
            0.0,
            DVector::from_element(1, 1.0),
            &[1.5],
            &OdeOptions::default(),
            no_hook,
        );
        assert!(
            matches!(result, Err(HelixError::StepFailure { .. })),
            "{result:?}"
        );
    }

    #[test]
    fn derivative_errors_propagate() {
        let result = integrate(
            |t, _: &DVector<f64>| {
                if t > 0.5 {
                    Err(HelixError::DomainViolation {
                        reason: "test".into(),
                    })
                } else {
                    Ok(DVector::from_element(1, 1.0))
                }
            },
            0.0,
            DVector::from_element(1, 0.0),
            &[1.0],
            &OdeOptions::default(),
            no_hook,
        );
        assert!(matches!(result, Err(HelixError::DomainViolation { .. })));
    }

    #[test]
    fn unordered_targets_are_rejected() {
        let result = integrate(
            |_, y: &DVector<f64>| Ok(y.clone()),
            0.0,
            DVector::from_element(1, 1.0),
            &[0.5, 0.4],
            &OdeOptions::default(),
            no_hook,
        );
        assert!(matches!(result, Err(HelixError::InvalidArgument(_))));
    }
}

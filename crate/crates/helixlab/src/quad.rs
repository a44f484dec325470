//! Quadrature: composite Simpson with Richardson refinement.

use crate::scalar::{real, Real};

/// Integrates `f` over `[a, b]` by doubling a composite Simpson rule until the
/// Richardson-extrapolated value changes by less than `rel_tol` (relative to
/// the current magnitude, with an absolute floor).
pub fn integrate<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, rel_tol: T) -> T {
    if a == b {
        return T::zero();
    }
    let mut panels = 8usize;
    let mut prev = simpson(&mut f, a, b, panels);
    let sixteen = real::<T>(16.0);
    let fifteen = real::<T>(15.0);
    loop {
        panels *= 2;
        let cur = simpson(&mut f, a, b, panels);
        let extrapolated = (sixteen * cur - prev) / fifteen;
        let change = (cur - prev).abs();
        let scale = extrapolated.abs().max(real(1e-300));
        if change <= rel_tol * scale.max(rel_tol) || panels >= 1 << 22 {
            return extrapolated;
        }
        prev = cur;
    }
}

fn simpson<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T, panels: usize) -> T {
    let n = panels * 2;
    let h = (b - a) / real::<T>(n as f64);
    let mut acc = f(a) + f(b);
    let four = real::<T>(4.0);
    let two = real::<T>(2.0);
    for i in 1..n {
        let x = a + h * real::<T>(i as f64);
        let w = if i % 2 == 1 { four } else { two };
        acc += w * f(x);
    }
    acc * h / real::<T>(3.0)
}

//! Truncated Taylor-series arithmetic.
//!
//! A [`Series`] holds coefficients `c[k] = f^(k)(x0) / k!` of a function
//! expanded at some base point, truncated at a fixed order. Arithmetic on
//! series propagates derivatives exactly (up to rounding), which is what the
//! curve oracles use instead of finite differences.

use crate::scalar::{real, Real};

/// Truncated Taylor expansion; `c[k]` is the k-th Taylor *coefficient*
/// (derivative divided by k!). All binary operations require equal lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<T> {
    pub c: Vec<T>,
}

impl<T: Real> Series<T> {
    pub fn constant(value: T, len: usize) -> Self {
        let mut c = vec![T::zero(); len];
        c[0] = value;
        Series { c }
    }

    /// Expansion of the identity map `x -> x` around `x0`.
    pub fn identity(x0: T, len: usize) -> Self {
        let mut c = vec![T::zero(); len];
        c[0] = x0;
        if len > 1 {
            c[1] = T::one();
        }
        Series { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    /// k-th derivative at the base point: `k! * c[k]`.
    pub fn derivative(&self, k: usize) -> T {
        let mut fact = T::one();
        for i in 1..=k {
            fact *= real::<T>(i as f64);
        }
        self.c[k] * fact
    }

    pub fn add(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.len(), rhs.len());
        Series {
            c: self.c.iter().zip(&rhs.c).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.len(), rhs.len());
        Series {
            c: self.c.iter().zip(&rhs.c).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Series {
            c: self.c.iter().map(|&a| -a).collect(),
        }
    }

    pub fn scale(&self, k: T) -> Self {
        Series {
            c: self.c.iter().map(|&a| a * k).collect(),
        }
    }

    /// Cauchy product truncated at the common length.
    pub fn mul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.len(), rhs.len());
        let n = self.len();
        let mut c = vec![T::zero(); n];
        for k in 0..n {
            let mut acc = T::zero();
            for j in 0..=k {
                acc += self.c[j] * rhs.c[k - j];
            }
            c[k] = acc;
        }
        Series { c }
    }

    /// Series division; the divisor must have a nonzero leading coefficient.
    pub fn div(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.len(), rhs.len());
        let n = self.len();
        let mut c = vec![T::zero(); n];
        for k in 0..n {
            let mut acc = self.c[k];
            for j in 0..k {
                acc -= c[j] * rhs.c[k - j];
            }
            c[k] = acc / rhs.c[0];
        }
        Series { c }
    }

    pub fn recip(&self) -> Self {
        Series::constant(T::one(), self.len()).div(self)
    }

    pub fn sqrt(&self) -> Self {
        let n = self.len();
        let mut c = vec![T::zero(); n];
        c[0] = self.c[0].sqrt();
        let two = real::<T>(2.0);
        for k in 1..n {
            let mut acc = self.c[k];
            for j in 1..k {
                acc -= c[j] * c[k - j];
            }
            c[k] = acc / (two * c[0]);
        }
        Series { c }
    }

    pub fn exp(&self) -> Self {
        let n = self.len();
        let mut c = vec![T::zero(); n];
        c[0] = self.c[0].exp();
        for k in 1..n {
            let mut acc = T::zero();
            for j in 1..=k {
                acc += real::<T>(j as f64) * self.c[j] * c[k - j];
            }
            c[k] = acc / real::<T>(k as f64);
        }
        Series { c }
    }

    pub fn ln(&self) -> Self {
        let n = self.len();
        let mut c = vec![T::zero(); n];
        c[0] = self.c[0].ln();
        for k in 1..n {
            let mut acc = self.c[k];
            for j in 1..k {
                acc -= real::<T>(j as f64) / real::<T>(k as f64) * c[j] * self.c[k - j];
            }
            c[k] = acc / self.c[0];
        }
        Series { c }
    }

    /// Sine and cosine share one recurrence, so they are computed together.
    pub fn sin_cos(&self) -> (Self, Self) {
        let n = self.len();
        let mut s = vec![T::zero(); n];
        let mut c = vec![T::zero(); n];
        let (s0, c0) = self.c[0].sin_cos();
        s[0] = s0;
        c[0] = c0;
        for k in 1..n {
            let mut acc_s = T::zero();
            let mut acc_c = T::zero();
            for j in 1..=k {
                let ja = real::<T>(j as f64) * self.c[j];
                acc_s += ja * c[k - j];
                acc_c += ja * s[k - j];
            }
            let inv_k = real::<T>(k as f64).recip();
            s[k] = acc_s * inv_k;
            c[k] = -acc_c * inv_k;
        }
        (Series { c: s }, Series { c })
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    /// Integer power by binary exponentiation (valid for any leading value).
    pub fn powi(&self, mut e: u32) -> Self {
        let mut acc = Series::constant(T::one(), self.len());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Real power via the standard recurrence; needs a positive leading value.
    pub fn powf(&self, p: T) -> Self {
        let n = self.len();
        let mut c = vec![T::zero(); n];
        c[0] = self.c[0].powf(p);
        for k in 1..n {
            let kf = real::<T>(k as f64);
            let mut acc = T::zero();
            for j in 1..=k {
                let jf = real::<T>(j as f64);
                acc += (jf * (p + T::one()) - kf) * self.c[j] * c[k - j];
            }
            c[k] = acc / (kf * self.c[0]);
        }
        Series { c }
    }

    /// Derivative as a series in the same variable (one order shorter in
    /// information; the last coefficient is set to zero).
    pub fn differentiate(&self) -> Self {
        let n = self.len();
        let mut c = vec![T::zero(); n];
        for k in 1..n {
            c[k - 1] = self.c[k] * real::<T>(k as f64);
        }
        Series { c }
    }

    /// Composition `self(b0 + delta(s))` where `delta` has zero constant term
    /// and `self` is expanded at `b0`. Evaluated by Horner over series.
    pub fn compose(&self, delta: &Self) -> Self {
        debug_assert_eq!(self.len(), delta.len());
        debug_assert!(delta.c[0] == T::zero());
        let n = self.len();
        let mut acc = Series::constant(self.c[n - 1], n);
        for k in (0..n - 1).rev() {
            acc = acc.mul(delta);
            acc.c[0] += self.c[k];
        }
        acc
    }
}

/// First-order jet (value + first derivative): the cheap special case of
/// [`Series`] used in hot loops like frame orthogonalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub du: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, du: T) -> Self {
        Dual { re, du }
    }

    pub fn constant(re: T) -> Self {
        Dual { re, du: T::zero() }
    }

    pub fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        Dual {
            re: r,
            du: self.du / (real::<T>(2.0) * r),
        }
    }
}

impl<T: Real> std::ops::Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.re + rhs.re, self.du + rhs.du)
    }
}

impl<T: Real> std::ops::Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.re - rhs.re, self.du - rhs.du)
    }
}

impl<T: Real> std::ops::Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual::new(self.re * rhs.re, self.re * rhs.du + self.du * rhs.re)
    }
}

impl<T: Real> std::ops::Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let re = self.re / rhs.re;
        Dual::new(re, (self.du - re * rhs.du) / rhs.re)
    }
}

impl<T: Real> std::ops::Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.du)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn series_of<F: Fn(f64) -> f64>(f: F, x0: f64, h: f64, order: usize) -> Vec<f64> {
        // central finite differences of successive orders, for cross-checking
        let mut d = vec![f(x0)];
        if order >= 1 {
            d.push((f(x0 + h) - f(x0 - h)) / (2.0 * h));
        }
        if order >= 2 {
            d.push((f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h));
        }
        d
    }

    #[test]
    fn exp_series_matches_derivatives() {
        let x = Series::<f64>::identity(0.3, 6);
        let e = x.mul(&x).exp(); // exp(t^2)
        let fd = series_of(|t| (t * t).exp(), 0.3, 1e-5, 2);
        assert_relative_eq!(e.value(), fd[0], max_relative = 1e-12);
        assert_relative_eq!(e.derivative(1), fd[1], max_relative = 1e-8);
        assert_relative_eq!(e.derivative(2), fd[2], max_relative = 1e-5);
    }

    #[test]
    fn sin_cos_high_order() {
        let x = Series::<f64>::identity(0.7, 9);
        let (s, c) = x.sin_cos();
        // d^k sin = sin(x + k pi/2)
        for k in 0..9 {
            let expect = (0.7 + k as f64 * std::f64::consts::FRAC_PI_2).sin();
            assert_relative_eq!(s.derivative(k), expect, epsilon = 1e-10);
            let expect_c = (0.7 + (k as f64 + 1.0) * std::f64::consts::FRAC_PI_2).sin();
            assert_relative_eq!(c.derivative(k), expect_c, epsilon = 1e-10);
        }
    }

    #[test]
    fn division_inverts_multiplication() {
        let x = Series::<f64>::identity(1.2, 7);
        let a = x.sin().add(&Series::constant(2.0, 7));
        let b = x.exp();
        let q = a.div(&b);
        let back = q.mul(&b);
        for k in 0..7 {
            assert_relative_eq!(back.c[k], a.c[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let x = Series::<f64>::identity(0.9, 8);
        let a = x.exp().add(&Series::constant(0.5, 8));
        let r = a.sqrt();
        let sq = r.mul(&r);
        for k in 0..8 {
            assert_relative_eq!(sq.c[k], a.c[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn powf_matches_exp_log() {
        let x = Series::<f64>::identity(1.4, 7);
        let a = x.add(&Series::constant(0.3, 7));
        let direct = a.powf(2.7);
        let via_log = a.ln().scale(2.7).exp();
        for k in 0..7 {
            assert_relative_eq!(direct.c[k], via_log.c[k], max_relative = 1e-12);
        }
    }

    #[test]
    fn powi_handles_negative_base() {
        let x = Series::<f64>::identity(-1.5, 5);
        let p = x.powi(3);
        assert_relative_eq!(p.value(), -3.375, epsilon = 1e-14);
        assert_relative_eq!(p.derivative(1), 3.0 * 1.5 * 1.5, epsilon = 1e-12);
    }

    #[test]
    fn compose_chain_rule() {
        // f(g(s)) with f = sin at g0, g(s) = g0 + s + 2 s^2
        let order = 6;
        let g0 = 0.4;
        let f = Series::<f64>::identity(g0, order).sin();
        let mut delta = Series::constant(0.0, order);
        delta.c[1] = 1.0;
        delta.c[2] = 2.0;
        let comp = f.compose(&delta);
        // exact: sin(g0 + s + 2 s^2); first derivative at 0: cos(g0) * 1
        assert_relative_eq!(comp.value(), g0.sin(), epsilon = 1e-14);
        assert_relative_eq!(comp.derivative(1), g0.cos(), epsilon = 1e-14);
        // second derivative: -sin(g0) * 1 + cos(g0) * 4
        assert_relative_eq!(
            comp.derivative(2),
            -g0.sin() + 4.0 * g0.cos(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn dual_quotient_rule() {
        let a = Dual::new(2.0_f64, 3.0);
        let b = Dual::new(0.5, -1.0);
        let q = a / b;
        assert_relative_eq!(q.re, 4.0);
        assert_relative_eq!(q.du, (a.du * b.re - a.re * b.du) / (b.re * b.re));
    }
}

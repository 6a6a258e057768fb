//! Truncated Taylor-series arithmetic (forward-mode, univariate).
//!
//! A `Taylor<T, N>` holds the normalized coefficients `f^(k)(x0) / k!` for
//! `k < N`. Propagating a seed `x0 + h` through a closed-form expression gives
//! exact derivatives up to order `N - 1` with no step-size error.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor<T, const N: usize> {
    c: [T; N],
}

impl<T: Real, const N: usize> Taylor<T, N> {
    pub fn constant(x: T) -> Self {
        let mut c = [T::zero(); N];
        c[0] = x;
        Self { c }
    }

    /// Independent variable expanded at `x0`.
    pub fn variable(x0: T) -> Self {
        let mut c = [T::zero(); N];
        c[0] = x0;
        if N > 1 {
            c[1] = T::one();
        }
        Self { c }
    }

    pub fn from_coefficients(c: [T; N]) -> Self {
        Self { c }
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    pub fn coefficients(&self) -> &[T; N] {
        &self.c
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> T {
        let mut fact = T::one();
        for j in 2..=k {
            fact = fact * T::from_usize(j).unwrap();
        }
        self.c[k] * fact
    }

    pub fn scale(self, k: T) -> Self {
        let mut c = self.c;
        for v in c.iter_mut() {
            *v = *v * k;
        }
        Self { c }
    }

    pub fn exp(self) -> Self {
        let mut e = [T::zero(); N];
        e[0] = self.c[0].exp();
        for k in 1..N {
            let mut acc = T::zero();
            for j in 1..=k {
                acc = acc + T::from_usize(j).unwrap() * self.c[j] * e[k - j];
            }
            e[k] = acc / T::from_usize(k).unwrap();
        }
        Self { c: e }
    }

    /// `(sinh f, cosh f)` by the coupled recurrence; avoids forming
    /// `exp(f) - exp(-f)`.
    pub fn sinh_cosh(self) -> (Self, Self) {
        let mut sh = [T::zero(); N];
        let mut ch = [T::zero(); N];
        sh[0] = self.c[0].sinh();
        ch[0] = self.c[0].cosh();
        for k in 1..N {
            let mut acc_s = T::zero();
            let mut acc_c = T::zero();
            for j in 1..=k {
                let w = T::from_usize(j).unwrap() * self.c[j];
                acc_s = acc_s + w * ch[k - j];
                acc_c = acc_c + w * sh[k - j];
            }
            let kk = T::from_usize(k).unwrap();
            sh[k] = acc_s / kk;
            ch[k] = acc_c / kk;
        }
        (Self { c: sh }, Self { c: ch })
    }

    /// `f^alpha`; requires `f(x0) > 0` for non-integer `alpha`.
    pub fn powf(self, alpha: T) -> Self {
        let a0 = self.c[0];
        let mut p = [T::zero(); N];
        p[0] = a0.powf(alpha);
        for k in 1..N {
            let kk = T::from_usize(k).unwrap();
            let mut acc = T::zero();
            for j in 1..=k {
                let jj = T::from_usize(j).unwrap();
                acc = acc + ((alpha + T::one()) * jj - kk) * self.c[j] * p[k - j];
            }
            p[k] = acc / (kk * a0);
        }
        Self { c: p }
    }

    pub fn sqrt(self) -> Self {
        self.powf(T::half())
    }

    pub fn recip(self) -> Self {
        Self::constant(T::one()) / self
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }
}

impl<T: Real, const N: usize> Add for Taylor<T, N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a = *a + b;
        }
        Self { c }
    }
}

impl<T: Real, const N: usize> Sub for Taylor<T, N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a = *a - b;
        }
        Self { c }
    }
}

impl<T: Real, const N: usize> Neg for Taylor<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real, const N: usize> Mul for Taylor<T, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut c = [T::zero(); N];
        for k in 0..N {
            let mut acc = T::zero();
            for i in 0..=k {
                acc = acc + self.c[i] * rhs.c[k - i];
            }
            c[k] = acc;
        }
        Self { c }
    }
}

impl<T: Real, const N: usize> Div for Taylor<T, N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let mut c = [T::zero(); N];
        for k in 0..N {
            let mut acc = self.c[k];
            for i in 1..=k {
                acc = acc - rhs.c[i] * c[k - i];
            }
            c[k] = acc / rhs.c[0];
        }
        Self { c }
    }
}

impl<T: Real, const N: usize> Add<T> for Taylor<T, N> {
    type Output = Self;
    fn add(mut self, rhs: T) -> Self {
        self.c[0] = self.c[0] + rhs;
        self
    }
}

impl<T: Real, const N: usize> Sub<T> for Taylor<T, N> {
    type Output = Self;
    fn sub(mut self, rhs: T) -> Self {
        self.c[0] = self.c[0] - rhs;
        self
    }
}

impl<T: Real, const N: usize> Mul<T> for Taylor<T, N> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type T4 = Taylor<f64, 4>;

    #[test]
    fn exp_of_variable_has_factorial_coefficients() {
        let e = T4::variable(0.3).exp();
        let v = 0.3f64.exp();
        for k in 0..4 {
            assert!((e.derivative(k) - v).abs() < 1e-14);
        }
    }

    #[test]
    fn powf_matches_power_rule() {
        let x = 1.7;
        let p = T4::variable(x).powf(-1.5);
        assert!((p.derivative(1) - (-1.5) * x.powf(-2.5)).abs() < 1e-13);
        assert!((p.derivative(2) - (-1.5) * (-2.5) * x.powf(-3.5)).abs() < 1e-13);
        assert!((p.derivative(3) - (-1.5) * (-2.5) * (-3.5) * x.powf(-4.5)).abs() < 1e-12);
    }

    #[test]
    fn sinh_cosh_derivatives_alternate() {
        let (s, c) = T4::variable(0.8).sinh_cosh();
        assert!((s.derivative(1) - 0.8f64.cosh()).abs() < 1e-14);
        assert!((s.derivative(2) - 0.8f64.sinh()).abs() < 1e-14);
        assert!((c.derivative(3) - 0.8f64.sinh()).abs() < 1e-14);
    }

    #[test]
    fn quotient_rule() {
        // d/dx [x / (1 + x^2)] at x = 0.5
        let x = T4::variable(0.5);
        let f = x / (x * x + 1.0);
        let exact = (1.0 - 0.25) / (1.25f64 * 1.25);
        assert!((f.derivative(1) - exact).abs() < 1e-14);
    }

    #[test]
    fn second_derivative_against_closed_form() {
        // f = exp(2x) * x^3, f'' = exp(2x)(4x^3 + 12x^2 + 6x)
        let x0 = 0.4;
        let x = T4::variable(x0);
        let f = x.scale(2.0).exp() * x * x * x;
        let exact = (2.0 * x0).exp() * (4.0 * x0.powi(3) + 12.0 * x0 * x0 + 6.0 * x0);
        assert!((f.derivative(2) - exact).abs() < 1e-12);
    }
}

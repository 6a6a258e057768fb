//! Distribution functions, nonincreasing rearrangements and Lorentz norms of
//! grid functions along a curve of length `L`.
//!
//! A [`SampledFunction`] is piecewise constant: `n` cells of width `L / n`.
//! Its rearrangement is a finite step function, so every norm below is a
//! finite sum with no quadrature error:
//!
//! ```text
//! ||u||_{p,q}^q = (q/p) int_0^inf (t^{1/p} u*(t))^q dt/t
//!              = sum_k h_k^q (m_k^{q/p} - m_{k-1}^{q/p})
//! ```
//!
//! where `h_1 > h_2 > ...` are the distinct magnitudes and `m_k` the measure
//! of `{|u| >= h_k}`.

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LorentzError {
    #[error("empty sample")]
    Empty,
    #[error("length must be positive and finite")]
    BadLength,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("exponent out of range: p = {p}, q = {q}")]
    BadExponent { p: f64, q: f64 },
    #[error("zero function")]
    ZeroFunction,
    #[error("weak-norm formulas disagree: {rearranged} vs {distribution}")]
    WeakMismatch { rearranged: f64, distribution: f64 },
}

/// `|u|` sampled on `n` equal cells of `[0, length]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction<T> {
    values: Vec<T>,
    length: T,
}

impl<T: Real> SampledFunction<T> {
    /// Stores magnitudes; signs (or phases, for complex data reduced by the
    /// caller) are irrelevant to every quantity here.
    pub fn new(values: Vec<T>, length: T) -> Result<Self, LorentzError> {
        if values.is_empty() {
            return Err(LorentzError::Empty);
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(LorentzError::BadLength);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LorentzError::NonFinite(i));
        }
        Ok(Self {
            values: values.into_iter().map(|v| v.abs()).collect(),
            length,
        })
    }

    pub fn from_fn<F: Fn(T) -> T>(n: usize, length: T, f: F) -> Result<Self, LorentzError> {
        let h = length / T::from_usize(n.max(1)).unwrap();
        let values = (0..n)
            .map(|i| f((T::from_usize(i).unwrap() + T::half()) * h))
            .collect();
        Self::new(values, length)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn cell(&self) -> T {
        self.length / T::from_usize(self.values.len()).unwrap()
    }

    /// `(int |u|^p)^{1/p}` cell by cell.
    pub fn lp_norm(&self, p: T) -> T {
        let s = self
            .values
            .iter()
            .fold(T::zero(), |acc, &v| acc + v.powf(p));
        (s * self.cell()).powf(T::one() / p)
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            values: self.values.iter().map(|&v| (v * c).abs()).collect(),
            length: self.length,
        }
    }
}

/// `omega(alpha) = |{x : |u(x)| > alpha}|`.
pub fn distribution_fn<T: Real>(u: &SampledFunction<T>, alpha: T) -> T {
    let count = u.values.iter().filter(|&&v| v > alpha).count();
    T::from_usize(count).unwrap() * u.cell()
}

/// Step representation of `u*`: `u*(t) = heights[k]` for
/// `t in [measures[k-1], measures[k])`, with `measures[-1] = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rearrangement<T> {
    pub heights: Vec<T>,
    pub measures: Vec<T>,
    pub length: T,
}

impl<T: Real> Rearrangement<T> {
    pub fn eval(&self, t: T) -> T {
        if t < T::zero() {
            return self.heights.first().copied().unwrap_or(T::zero());
        }
        let k = self.measures.partition_point(|&m| m <= t);
        self.heights.get(k).copied().unwrap_or(T::zero())
    }

    /// `|{t : u*(t) > alpha}|`.
    pub fn distribution(&self, alpha: T) -> T {
        let k = self.heights.partition_point(|&h| h > alpha);
        if k == 0 {
            T::zero()
        } else {
            self.measures[k - 1]
        }
    }
}

pub fn rearrangement<T: Real>(u: &SampledFunction<T>) -> Rearrangement<T> {
    let mut v = u.values.clone();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let cell = u.cell();
    let mut heights: Vec<T> = Vec::new();
    let mut measures: Vec<T> = Vec::new();
    for (i, &h) in v.iter().enumerate() {
        let m = T::from_usize(i + 1).unwrap() * cell;
        match heights.last() {
            Some(&last) if last == h => *measures.last_mut().unwrap() = m,
            _ => {
                heights.push(h);
                measures.push(m);
            }
        }
    }
    // A zero level carries no mass in any norm.
    if heights.last() == Some(&T::zero()) {
        heights.pop();
        measures.pop();
    }
    Rearrangement {
        heights,
        measures,
        length: u.length,
    }
}

fn check_exponents<T: Real>(p: T, q: T) -> Result<(), LorentzError> {
    if !(p >= T::one()) || !(q >= T::one()) || !p.is_finite() || !q.is_finite() {
        return Err(LorentzError::BadExponent {
            p: p.to_f64().unwrap_or(f64::NAN),
            q: q.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

pub fn lorentz_norm_of<T: Real>(r: &Rearrangement<T>, p: T, q: T) -> Result<T, LorentzError> {
    check_exponents(p, q)?;
    let e = q / p;
    let mut prev = T::zero();
    let mut acc = T::zero();
    for (&h, &m) in r.heights.iter().zip(&r.measures) {
        let mq = m.powf(e);
        acc = acc + h.powf(q) * (mq - prev);
        prev = mq;
    }
    Ok(acc.powf(T::one() / q))
}

/// `||u||_{L^{p,q}}` for `1 <= p, q < inf`.
pub fn lorentz_norm<T: Real>(u: &SampledFunction<T>, p: T, q: T) -> Result<T, LorentzError> {
    lorentz_norm_of(&rearrangement(u), p, q)
}

/// Both sides of `sup_t t^{1/p} u*(t) = sup_alpha alpha omega(alpha)^{1/p}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeakNorm<T> {
    pub rearranged: T,
    pub distribution: T,
}

/// `sup_t t^{1/p} u*(t)`, cross-checked against the distribution side to
/// relative `1e-9`.
pub fn weak_norm<T: Real>(u: &SampledFunction<T>, p: T) -> Result<T, LorentzError> {
    let w = weak_norm_pair(u, p)?;
    let scale = w.rearranged.abs().max(w.distribution.abs());
    if (w.rearranged - w.distribution).abs() > T::lit(1e-9) * scale {
        return Err(LorentzError::WeakMismatch {
            rearranged: w.rearranged.to_f64().unwrap_or(f64::NAN),
            distribution: w.distribution.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(w.rearranged)
}

pub fn weak_norm_pair<T: Real>(u: &SampledFunction<T>, p: T) -> Result<WeakNorm<T>, LorentzError> {
    check_exponents(p, T::one())?;
    let inv = T::one() / p;
    let r = rearrangement(u);
    // t^{1/p} u*(t) increases on each step; the sup is the left limit at m_k.
    let rearranged = r
        .heights
        .iter()
        .zip(&r.measures)
        .fold(T::zero(), |acc, (&h, &m)| acc.max(h * m.powf(inv)));
    // alpha omega(alpha)^{1/p} increases on [h_{k+1}, h_k); evaluate the
    // left limit at each raw sample value, where omega(h-) = |{|u| >= h}|.
    let cell = u.cell();
    let distribution = u.values.iter().fold(T::zero(), |acc, &h| {
        let at_least = u.values.iter().filter(|&&v| v >= h).count();
        acc.max(h * (T::from_usize(at_least).unwrap() * cell).powf(inv))
    });
    Ok(WeakNorm {
        rearranged,
        distribution,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterpolationReport<T> {
    pub l4: T,
    pub weak4: T,
    pub lorentz42: T,
    /// `||u||_4 / (||u||_{4,inf}^{1/2} ||u||_{4,2}^{1/2})`.
    pub ratio: T,
    pub bound: T,
    pub holds: bool,
}

/// The `L^4` interpolation step with its sharp constant `2^{1/4}`:
/// `int (t^{1/4} u*)^4 dt/t <= sup (t^{1/4} u*)^2 * int (t^{1/4} u*)^2 dt/t`,
/// and the `q/p` prefactors turn this into `||u||_4^4 <= 2 W^2 ||u||_{4,2}^2`.
pub fn interpolation_check<T: Real>(
    u: &SampledFunction<T>,
) -> Result<InterpolationReport<T>, LorentzError> {
    let four = T::lit(4.0);
    let r = rearrangement(u);
    if r.heights.is_empty() {
        return Err(LorentzError::ZeroFunction);
    }
    let l4 = lorentz_norm_of(&r, four, four)?;
    let weak4 = weak_norm(u, four)?;
    let lorentz42 = lorentz_norm_of(&r, four, T::two())?;
    let ratio = l4 / (weak4.sqrt() * lorentz42.sqrt());
    let bound = T::two().powf(T::lit(0.25));
    Ok(InterpolationReport {
        l4,
        weak4,
        lorentz42,
        ratio,
        bound,
        holds: ratio <= bound + T::lit(1e-9),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(h: f64, m: f64, length: f64, n: usize) -> SampledFunction<f64> {
        SampledFunction::from_fn(n, length, |x| if x < m { h } else { 0.0 }).unwrap()
    }

    #[test]
    fn distribution_of_constant() {
        let u = SampledFunction::<f64>::new(vec![1.0; 10], 1.0).unwrap();
        assert!((distribution_fn(&u, 0.5) - 1.0).abs() < 1e-15);
        assert_eq!(distribution_fn(&u, 2.0), 0.0);
    }

    #[test]
    fn ramp_distribution() {
        let n = 1000;
        let u = SampledFunction::from_fn(n, 1.0, |x: f64| x).unwrap();
        for &a in &[0.1, 0.37, 0.8] {
            assert!((distribution_fn(&u, a) - (1.0 - a)).abs() <= 1.0 / n as f64);
        }
    }

    #[test]
    fn step_rearrangement() {
        let u = step(3.0, 0.25, 1.0, 8);
        let r = rearrangement(&u);
        assert_eq!(r.heights, vec![3.0]);
        assert!((r.measures[0] - 0.25).abs() < 1e-15);
        assert_eq!(r.eval(0.1), 3.0);
        assert_eq!(r.eval(0.3), 0.0);
    }

    #[test]
    fn decreasing_input_is_its_own_rearrangement() {
        let u = SampledFunction::new(vec![5.0, 4.0, 2.0, 1.0], 2.0).unwrap();
        let r = rearrangement(&u);
        for (i, &v) in u.values().iter().enumerate() {
            assert_eq!(r.eval(0.5 * i as f64 + 0.25), v);
        }
    }

    #[test]
    fn step_norms_closed_form() {
        let (h, m) = (2.5, 0.375);
        let u = step(h, m, 1.0, 8);
        for &p in &[1.0, 2.0, 4.0] {
            for &q in &[1.0, 2.0, 7.0] {
                let v = lorentz_norm(&u, p, q).unwrap();
                assert!((v - h * m.powf(1.0 / p)).abs() < 1e-12);
            }
            assert!((weak_norm(&u, p).unwrap() - h * m.powf(1.0 / p)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_step_weak_norm() {
        // heights 4 on 1/8, 1 on the next 7/8
        let u = SampledFunction::new(vec![4.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0], 1.0).unwrap();
        let expected = (4.0 * 0.125f64.powf(0.5)).max(1.0);
        assert!((weak_norm(&u, 2.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn diagonal_norm_is_lp() {
        let u = SampledFunction::from_fn(97, 2.0, |x: f64| (3.0 * x).sin() + 0.2 * x).unwrap();
        for &p in &[1.0, 2.0, 4.0, 5.5] {
            let a = lorentz_norm(&u, p, p).unwrap();
            assert!((a - u.lp_norm(p)).abs() < 1e-9 * a);
        }
    }

    #[test]
    fn single_step_ratio_is_one() {
        let r = interpolation_check(&step(1.7, 0.5, 1.0, 16)).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ramp_ratio_below_bound() {
        let u = SampledFunction::from_fn(500, 1.0, |x| x).unwrap();
        let r = interpolation_check(&u).unwrap();
        assert!(r.holds && r.ratio < r.bound);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            SampledFunction::<f64>::new(vec![], 1.0),
            Err(LorentzError::Empty)
        );
        let z = SampledFunction::new(vec![0.0; 4], 1.0).unwrap();
        assert_eq!(interpolation_check(&z), Err(LorentzError::ZeroFunction));
        assert!(lorentz_norm(&z, 0.5, 1.0).is_err());
    }

    #[test]
    fn single_precision_step() {
        let u = SampledFunction::<f32>::new(vec![2.0, 2.0, 0.0, 0.0], 1.0).unwrap();
        assert!((lorentz_norm(&u, 2.0, 1.0).unwrap() - 2.0 * 0.5f32.sqrt()).abs() < 1e-6);
    }
}

//! Phase functions `phi(t, s) = dist(gamma1(t), gamma2(s))` between the
//! reference axis `gamma1(t) = (0, e^t)` and an image geodesic `gamma2`.
//!
//! Two families:
//!
//! * `Line { a }`: `gamma2(s) = (a, e^s)`, with
//!   `cosh phi = (a^2 + e^{2t} + e^{2s}) / (2 e^{t+s})`.
//! * `Circle { a, r }`: `gamma2(s) = (a - r tanh s, r sech s)`, with
//!   `cosh phi = A / (4 r e^{s+t})`,
//!   `A = e^{2s+2t} + (a-r)^2 e^{2s} + e^{2t} + (a+r)^2`.
//!
//! The mixed derivative `phi_st` is evaluated from the closed forms
//!
//! ```text
//! line:   phi_st = -8 a^2 e^{2s+2t} / ((a^2+e^{2t}+e^{2s})^2 - 4 e^{2s+2t})^{3/2}
//! circle: phi_st = 16 r e^{2s+2t} (a+r+(a-r)e^{2s}) (a^2-r^2+e^{2t}) / (A^2 - 16 r^2 e^{2s+2t})^{3/2}
//! ```
//!
//! rewritten through `A^2 - 16 r^2 e^{2s+2t} = 16 r^2 e^{2s+2t} sinh^2 phi` so
//! that no large exponential is squared:
//!
//! ```text
//! line:   phi_st = -a^2 e^{-(s+t)} / sinh^3 phi
//! circle: phi_st = (a cosh s - r sinh s) ((a^2-r^2) e^{-t} + e^t) / (2 r^2 sinh^3 phi)
//! ```
//!
//! `phi_stt` and `phi_sttt` come from pushing a truncated Taylor series in `t`
//! through the same expression.

use serde::Serialize;
use thiserror::Error;

use crate::halfplane::{Geodesic, PARAM_GUARD};
use crate::scalar::Real;
use crate::taylor::Taylor;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseError {
    #[error("line offset must be nonzero (a = 0 is the reference axis itself)")]
    ZeroOffset,
    #[error("circle radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("circle is tangent to the axis at the boundary (r = |a|)")]
    Tangent,
    #[error("non-finite parameter")]
    NonFinite,
    #[error("parameter ({t}, {s}) exceeds the overflow guard")]
    Overflow { t: f64, s: f64 },
    #[error("(t, s) = ({t}, {s}) is a coincidence point where phi = 0")]
    Coincident { t: f64, s: f64 },
    #[error("derivative order {0} outside 1..=3")]
    BadOrder(usize),
    #[error("case has no crossing point")]
    NotIntersecting,
}

fn f64_of<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseKind {
    Line,
    DisjointCircle,
    IntersectingCircle,
}

/// Geodesic-pair configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PhaseCase<T> {
    Line { a: T },
    Circle { a: T, r: T },
}

impl<T: Real> PhaseCase<T> {
    pub fn line(a: T) -> Result<Self, PhaseError> {
        if !a.is_finite() {
            return Err(PhaseError::NonFinite);
        }
        if a == T::zero() {
            return Err(PhaseError::ZeroOffset);
        }
        Ok(PhaseCase::Line { a })
    }

    pub fn circle(a: T, r: T) -> Result<Self, PhaseError> {
        if !a.is_finite() || !r.is_finite() {
            return Err(PhaseError::NonFinite);
        }
        if !(r > T::zero()) {
            return Err(PhaseError::NonPositiveRadius(f64_of(r)));
        }
        if r == a.abs() {
            return Err(PhaseError::Tangent);
        }
        Ok(PhaseCase::Circle { a, r })
    }

    pub fn kind(&self) -> CaseKind {
        match *self {
            PhaseCase::Line { .. } => CaseKind::Line,
            PhaseCase::Circle { a, r } if r < a.abs() => CaseKind::DisjointCircle,
            PhaseCase::Circle { .. } => CaseKind::IntersectingCircle,
        }
    }

    pub fn geodesic(&self) -> Geodesic<T> {
        match *self {
            PhaseCase::Line { a } => Geodesic::VerticalLine { x0: a },
            PhaseCase::Circle { a, r } => Geodesic::HalfCircle { a, r },
        }
    }

    /// Crossing parameters `(t0, s0)` of an intersecting circle.
    pub fn crossing(&self) -> Option<(T, T)> {
        match *self {
            PhaseCase::Circle { a, r } if r > a.abs() => Some((
                T::half() * ((r - a) * (r + a)).ln(),
                T::half() * ((r + a) / (r - a)).ln(),
            )),
            _ => None,
        }
    }

    /// `A = e^{2s+2t} + (a-r)^2 e^{2s} + e^{2t} + (a+r)^2` (circle case).
    pub fn capital_a(&self, t: T, s: T) -> Option<T> {
        match *self {
            PhaseCase::Circle { a, r } => {
                let e2s = (T::two() * s).exp();
                let e2t = (T::two() * t).exp();
                Some(e2s * e2t + (a - r) * (a - r) * e2s + e2t + (a + r) * (a + r))
            }
            PhaseCase::Line { .. } => None,
        }
    }

    /// `cosh(phi) - 1` as a Taylor series in `t`.
    fn u_series<const N: usize>(&self, t: Taylor<T, N>, s: T) -> Taylor<T, N> {
        match *self {
            PhaseCase::Line { a } => {
                // b/2 + 2 sinh^2((s - t)/2), b = a^2 e^{-(s+t)}
                let b = (t + s).scale(-T::one()).exp().scale(a * a);
                let half_gap = (Taylor::constant(s) - t).scale(T::half());
                let (sh, _) = half_gap.sinh_cosh();
                b.scale(T::half()) + (sh * sh).scale(T::two())
            }
            PhaseCase::Circle { a, r } => {
                // ((a cosh s - r sinh s)^2 + (r - e^t cosh s)^2) / (2 r e^t cosh s)
                let (shs, chs) = (s.sinh(), s.cosh());
                let m = a * chs - r * shs;
                let y = t.exp();
                let gap = Taylor::constant(r) - y.scale(chs);
                (gap * gap + m * m) / y.scale(T::two() * r * chs)
            }
        }
    }

    /// Numerator of `phi_st` (everything except the `sinh^-3 phi` factor).
    fn st_numerator<const N: usize>(&self, t: Taylor<T, N>, s: T) -> Taylor<T, N> {
        match *self {
            PhaseCase::Line { a } => (t + s).scale(-T::one()).exp().scale(-(a * a)),
            PhaseCase::Circle { a, r } => {
                let m = a * s.cosh() - r * s.sinh();
                let l = t.scale(-T::one()).exp().scale(a * a - r * r) + t.exp();
                l.scale(m / (T::two() * r * r))
            }
        }
    }
}

fn guard<T: Real>(t: T, s: T) -> Result<(), PhaseError> {
    let g = T::lit(PARAM_GUARD);
    if !t.is_finite() || !s.is_finite() || t.abs() > g || s.abs() > g {
        return Err(PhaseError::Overflow {
            t: f64_of(t),
            s: f64_of(s),
        });
    }
    Ok(())
}

/// `phi(t, s)`.
pub fn phi_eval<T: Real>(c: &PhaseCase<T>, t: T, s: T) -> Result<T, PhaseError> {
    guard(t, s)?;
    let u = c.u_series::<1>(Taylor::variable(t), s).value();
    if !u.is_finite() {
        return Err(PhaseError::Overflow {
            t: f64_of(t),
            s: f64_of(s),
        });
    }
    Ok(T::arcosh1p(u))
}

/// `phi` and its mixed partials `phi_st`, `phi_stt`, `phi_sttt` at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseJet<T> {
    pub phi: T,
    pub phi_st: T,
    pub phi_stt: T,
    pub phi_sttt: T,
    /// `A` of the circle case; `None` for lines.
    pub capital_a: Option<T>,
    /// `phi >= 2`, the lower end of the window `2 <= phi <= T`.
    pub admissible: bool,
}

impl<T: Real> PhaseJet<T> {
    /// `2 <= phi <= horizon`.
    pub fn within_horizon(&self, horizon: T) -> bool {
        self.admissible && self.phi <= horizon
    }
}

pub fn phi_jet<T: Real>(c: &PhaseCase<T>, t: T, s: T) -> Result<PhaseJet<T>, PhaseError> {
    guard(t, s)?;
    let tv = Taylor::<T, 3>::variable(t);
    let u = c.u_series(tv, s);
    if u.value() == T::zero() {
        return Err(PhaseError::Coincident {
            t: f64_of(t),
            s: f64_of(s),
        });
    }
    let sinh2 = u * (u + T::two());
    let st = c.st_numerator(tv, s) * sinh2.powf(T::lit(-1.5));
    if !u.is_finite() || !st.is_finite() {
        return Err(PhaseError::Overflow {
            t: f64_of(t),
            s: f64_of(s),
        });
    }
    let phi = T::arcosh1p(u.value());
    Ok(PhaseJet {
        phi,
        phi_st: st.derivative(0),
        phi_stt: st.derivative(1),
        phi_sttt: st.derivative(2),
        capital_a: c.capital_a(t, s),
        admissible: phi >= T::two(),
    })
}

/// `phi_st / (t - t0)` for an intersecting circle, finite across `t = t0`.
///
/// Uses `(a^2 - r^2) e^{-t} + e^t = e^{2 t0 - t} expm1(2 (t - t0))`.
pub fn phi_st_over_t_minus_t0<T: Real>(c: &PhaseCase<T>, t: T, s: T) -> Result<T, PhaseError> {
    guard(t, s)?;
    let (a, r) = match *c {
        PhaseCase::Circle { a, r } => (a, r),
        PhaseCase::Line { .. } => return Err(PhaseError::NotIntersecting),
    };
    let (t0, _) = c.crossing().ok_or(PhaseError::NotIntersecting)?;
    let d = t - t0;
    let q = if d.abs() < T::epsilon() {
        T::two()
    } else {
        (T::two() * d).exp_m1() / d
    };
    let lq = (T::two() * t0 - t).exp() * q;
    let m = a * s.cosh() - r * s.sinh();
    let u = c.u_series::<1>(Taylor::variable(t), s).value();
    if u == T::zero() {
        return Err(PhaseError::Coincident {
            t: f64_of(t),
            s: f64_of(s),
        });
    }
    let sinh2 = u * (u + T::two());
    Ok(m * lq / (T::two() * r * r * sinh2 * sinh2.sqrt()))
}

/// Base step of the difference quotients for `d_s d_t^order`.
///
/// The stencils are second order; two Richardson levels (`h`, `h/2`, `h/4`)
/// raise that to sixth order, so the finest step balances round-off
/// `eps / h^{order+1}` against truncation `h^6`: `h_min = eps^{1/(order+7)}`.
/// The prefactors were tuned on random admissible points; near-tangent
/// circles with `|phi_st| / phi ~ 1e-7` are the limiting case.
pub fn fd_step<T: Real>(order: usize, scale: T) -> T {
    let p = T::one() / T::from_usize(order + 7).unwrap();
    let mult = if order == 1 { 8.0 } else { 6.0 };
    T::lit(mult) * T::epsilon().powf(p) * scale.abs().max(T::one())
}

fn stencil<T: Real, F: Fn(T, T) -> T>(f: &F, t: T, s: T, order: usize, h: T) -> T {
    let two = T::two();
    // d_t^order at fixed s, second-order central stencils.
    let dt = |s: T| -> T {
        match order {
            1 => (f(t + h, s) - f(t - h, s)) / (two * h),
            2 => (f(t + h, s) - two * f(t, s) + f(t - h, s)) / (h * h),
            _ => {
                (f(t + two * h, s) - two * f(t + h, s) + two * f(t - h, s) - f(t - two * h, s))
                    / (two * h * h * h)
            }
        }
    };
    (dt(s + h) - dt(s - h)) / (two * h)
}

/// Richardson-extrapolated central difference estimate of
/// `d_s d_t^order f(t, s)`, truncation error `O(h^6)`.
pub fn mixed_partial_fd<T: Real, F: Fn(T, T) -> T>(
    f: F,
    t: T,
    s: T,
    order: usize,
) -> Result<T, PhaseError> {
    if !(1..=3).contains(&order) {
        return Err(PhaseError::BadOrder(order));
    }
    let h = fd_step(order, t.abs().max(s.abs()));
    let d1 = stencil(&f, t, s, order, h);
    let d2 = stencil(&f, t, s, order, h * T::half());
    let d4 = stencil(&f, t, s, order, h * T::lit(0.25));
    let three = T::lit(3.0);
    let r1 = (T::lit(4.0) * d2 - d1) / three;
    let r2 = (T::lit(4.0) * d4 - d2) / three;
    Ok((T::lit(16.0) * r2 - r1) / T::lit(15.0))
}

/// Finite-difference estimate of `d_s d_t^order phi` built only from
/// [`phi_eval`].
pub fn phi_fd_oracle<T: Real>(c: &PhaseCase<T>, t: T, s: T, order: usize) -> Result<T, PhaseError> {
    // Probe the widest stencil corners first so overflow surfaces as an error.
    let h = fd_step::<T>(order, t.abs().max(s.abs()));
    phi_eval(c, t + T::two() * h, s + h)?;
    phi_eval(c, t - T::two() * h, s - h)?;
    mixed_partial_fd(
        |tt, ss| phi_eval(c, tt, ss).unwrap_or(T::nan()),
        t,
        s,
        order,
    )
}

/// Necessary parameter constraints for `phi <= T` on `t in [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowConstraints<T> {
    /// Line: `|a| <= e sinh T`. Circle: `a / r <= 2 e cosh T`.
    pub a_bound: T,
    /// Circle: `|a - r| <= 2 e cosh T`; lines carry `inf`.
    pub gap_bound: T,
    pub satisfied: bool,
}

/// Parameters `s` for which `2 <= phi(t, s) <= T` is attainable with
/// `t in [0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibleWindow<T> {
    pub horizon: T,
    pub s_lo: T,
    pub s_hi: T,
    /// Connected pieces; the hull is `[s_lo, s_hi]`.
    pub components: Vec<(T, T)>,
    pub constraints: WindowConstraints<T>,
}

impl<T: Real> AdmissibleWindow<T> {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn contains(&self, s: T) -> bool {
        self.components.iter().any(|&(lo, hi)| s >= lo && s <= hi)
    }

    pub fn length(&self) -> T {
        if self.is_empty() {
            T::zero()
        } else {
            self.s_hi - self.s_lo
        }
    }
}

/// `min_{t in [0,1]} phi(t, s)`: distance from `gamma2(s)` to the unit axis
/// segment. The unconstrained minimiser is `t* = ln |gamma2(s)|`.
pub fn min_over_unit_t<T: Real>(c: &PhaseCase<T>, s: T) -> Result<T, PhaseError> {
    let p = c.geodesic().point(s).map_err(|_| PhaseError::Overflow {
        t: 0.0,
        s: f64_of(s),
    })?;
    let t_star = T::half() * (p.x() * p.x() + p.y() * p.y()).ln();
    phi_eval(c, t_star.max(T::zero()).min(T::one()), s)
}

/// `max_{t in [0,1]} phi(t, s)`; distance to a point is convex along a
/// geodesic, so the maximum sits at an endpoint.
pub fn max_over_unit_t<T: Real>(c: &PhaseCase<T>, s: T) -> Result<T, PhaseError> {
    Ok(phi_eval(c, T::zero(), s)?.max(phi_eval(c, T::one(), s)?))
}

fn search_range<T: Real>(c: &PhaseCase<T>, horizon: T) -> (T, T) {
    match *c {
        PhaseCase::Line { .. } => (-horizon - T::two(), horizon + T::lit(3.0)),
        PhaseCase::Circle { r, .. } => {
            let w = (T::lit(4.0) * horizon.cosh()).ln();
            (r.ln() - w - T::one(), r.ln() + w + T::one())
        }
    }
}

/// Minimiser of a convex function on `[lo, hi]` by golden-section search.
fn golden_min<T: Real, F: Fn(T) -> T>(f: F, mut lo: T, mut hi: T) -> (T, T) {
    let g = T::lit(0.618_033_988_749_894_8);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
        if (hi - lo).abs() <= T::epsilon() * T::lit(8.0) * (T::one() + lo.abs()) {
            break;
        }
    }
    let x = (lo + hi) * T::half();
    (x, f(x))
}

/// Boundary of `{f <= level}` between `inside` (f <= level) and `outside`.
fn bisect_level<T: Real, F: Fn(T) -> T>(f: &F, level: T, mut inside: T, mut outside: T) -> T {
    for _ in 0..200 {
        let mid = (inside + outside) * T::half();
        if mid == inside || mid == outside {
            break;
        }
        if f(mid) <= level {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Sublevel interval `{s in [lo, hi] : f(s) <= level}` of a convex `f`.
fn convex_sublevel<T: Real, F: Fn(T) -> T>(f: &F, level: T, lo: T, hi: T) -> Option<(T, T)> {
    let (xm, fm) = golden_min(f, lo, hi);
    if !(fm <= level) {
        return None;
    }
    let left = if f(lo) <= level {
        lo
    } else {
        bisect_level(f, level, xm, lo)
    };
    let right = if f(hi) <= level {
        hi
    } else {
        bisect_level(f, level, xm, hi)
    };
    Some((left, right))
}

pub fn admissible_window<T: Real>(c: &PhaseCase<T>, horizon: T) -> AdmissibleWindow<T> {
    let e = T::one().exp();
    let constraints = match *c {
        PhaseCase::Line { a } => {
            let a_bound = e * horizon.sinh();
            WindowConstraints {
                a_bound,
                gap_bound: T::infinity(),
                satisfied: a.abs() <= a_bound,
            }
        }
        PhaseCase::Circle { a, r } => {
            let bound = T::two() * e * horizon.cosh();
            WindowConstraints {
                a_bound: bound,
                gap_bound: bound,
                satisfied: a / r <= bound && (a - r).abs() <= bound,
            }
        }
    };
    let (lo, hi) = search_range(c, horizon);
    let big = T::max_value();
    let gmin = |s: T| min_over_unit_t(c, s).unwrap_or(big);
    let gmax = |s: T| max_over_unit_t(c, s).unwrap_or(big);
    let mut components = Vec::new();
    if let Some((i_lo, i_hi)) = convex_sublevel(&gmin, horizon, lo, hi) {
        // Remove the open set where phi < 2 for every t.
        let below_two = convex_sublevel(&gmax, T::two(), lo, hi)
            .filter(|&(j_lo, j_hi)| gmax(j_lo) < T::two() || gmax(j_hi) < T::two() || j_lo < j_hi);
        match below_two {
            Some((j_lo, j_hi)) if j_hi > i_lo && j_lo < i_hi => {
                if j_lo > i_lo {
                    components.push((i_lo, j_lo));
                }
                if j_hi < i_hi {
                    components.push((j_hi, i_hi));
                }
            }
            _ => components.push((i_lo, i_hi)),
        }
    }
    let (s_lo, s_hi) = match (components.first(), components.last()) {
        (Some(&(l, _)), Some(&(_, h))) => (l, h),
        _ => (T::nan(), T::nan()),
    };
    AdmissibleWindow {
        horizon,
        s_lo,
        s_hi,
        components,
        constraints,
    }
}

//! Poincaré half-plane geometry.
//!
//! Points `(x, y)` with `y > 0`, metric `y^-2 (dx^2 + dy^2)`. Geodesics are
//! vertical lines and half-circles centred on the real axis, both carried with
//! unit-speed arclength parametrizations. The reference geodesic is the
//! positive `y`-axis, `t -> (0, e^t)`.

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Real;

/// Largest `|t|` accepted before exponentiating a geodesic parameter.
pub const PARAM_GUARD: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point ({x}, {y}) is not in the upper half-plane")]
    NotInHalfPlane { x: f64, y: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("geodesic parameter {0} exceeds the overflow guard |t| <= 700")]
    ParameterOverflow(f64),
    #[error("half-circle radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("tube radius must be positive, got {0}")]
    NonPositiveTubeRadius(f64),
    #[error("Möbius coefficients have determinant {0}, expected 1")]
    NotUnimodular(f64),
    #[error("point maps to the pole of the Möbius transformation")]
    Pole,
    #[error("half-circle is tangent to the reference axis at the boundary (r = |a|)")]
    Tangent,
    #[error("geodesic coincides with the reference axis")]
    Coincident,
}

fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// A point of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HPoint<T> {
    x: T,
    y: T,
}

impl<T: Real> HPoint<T> {
    pub fn new(x: T, y: T) -> Result<Self, GeometryError> {
        if !x.is_finite() || !y.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if y <= T::zero() {
            return Err(GeometryError::NotInHalfPlane {
                x: to_f64(x),
                y: to_f64(y),
            });
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> T {
        self.x
    }

    pub fn y(&self) -> T {
        self.y
    }

    /// Hyperbolic distance, `arcosh(1 + |p - q|^2 / (2 y_p y_q))`.
    pub fn distance(&self, other: &Self) -> T {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        let u = (dx * dx + dy * dy) / (T::two() * self.y * other.y);
        T::arcosh1p(u)
    }

    /// Distance to the `y`-axis: `arcosh(sqrt(1 + (x/y)^2)) = asinh(|x|/y)`.
    pub fn dist_to_y_axis(&self) -> T {
        (self.x.abs() / self.y).asinh()
    }
}

pub fn hp_distance<T: Real>(p: &HPoint<T>, q: &HPoint<T>) -> T {
    p.distance(q)
}

pub fn dist_to_y_axis<T: Real>(p: &HPoint<T>) -> T {
    p.dist_to_y_axis()
}

/// A complete geodesic of the half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Geodesic<T> {
    VerticalLine { x0: T },
    HalfCircle { a: T, r: T },
}

impl<T: Real> Geodesic<T> {
    pub fn vertical(x0: T) -> Self {
        Geodesic::VerticalLine { x0 }
    }

    pub fn half_circle(a: T, r: T) -> Result<Self, GeometryError> {
        if !(r > T::zero()) {
            return Err(GeometryError::NonPositiveRadius(to_f64(r)));
        }
        if !a.is_finite() || !r.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(Geodesic::HalfCircle { a, r })
    }

    /// Unit-speed point: `(x0, e^t)` or `(a - r tanh t, r sech t)`.
    pub fn point(&self, t: T) -> Result<HPoint<T>, GeometryError> {
        if !(t.abs() <= T::lit(PARAM_GUARD)) {
            return Err(GeometryError::ParameterOverflow(to_f64(t)));
        }
        match *self {
            Geodesic::VerticalLine { x0 } => HPoint::new(x0, t.exp()),
            Geodesic::HalfCircle { a, r } => HPoint::new(a - r * t.tanh(), r / t.cosh()),
        }
    }
}

pub fn geodesic_point<T: Real>(g: &Geodesic<T>, t: T) -> Result<HPoint<T>, GeometryError> {
    g.point(t)
}

/// Tube radius `R` around the reference axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TubeRadius<T>(T);

impl<T: Real> TubeRadius<T> {
    pub fn new(r: T) -> Result<Self, GeometryError> {
        if r > T::zero() && r.is_finite() {
            Ok(Self(r))
        } else {
            Err(GeometryError::NonPositiveTubeRadius(to_f64(r)))
        }
    }

    pub fn get(&self) -> T {
        self.0
    }

    /// `sqrt(cosh^2 R - 1) = sinh R`: the slope of the tube boundary.
    pub fn slope(&self) -> T {
        self.0.sinh()
    }
}

/// `dist(p, axis) <= R`, evaluated as `|x| <= y sinh R`.
pub fn tube_contains<T: Real>(p: &HPoint<T>, radius: TubeRadius<T>) -> bool {
    p.x.abs() <= p.y * radius.slope()
}

/// Set of `u = e^s` for which the half-circle point `gamma(s)` lies in the
/// tube around the axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum TubeWindow<T> {
    Empty,
    Interval {
        lo: T,
        hi: T,
    },
    /// `a = ±r`: the circle ends on the axis' boundary point and the
    /// membership condition degenerates to a linear one. For `a = r` the
    /// window is `[lo, inf)`, for `a = -r` it is `(0, hi]`.
    DegenerateRay {
        lo: T,
        hi: T,
    },
}

impl<T: Real> TubeWindow<T> {
    pub fn contains(&self, u: T) -> bool {
        match *self {
            TubeWindow::Empty => false,
            TubeWindow::Interval { lo, hi } | TubeWindow::DegenerateRay { lo, hi } => {
                u >= lo && u <= hi
            }
        }
    }

    pub fn contains_param(&self, s: T) -> bool {
        self.contains(s.exp())
    }

    /// The window as an `s`-interval (`ln` of the bounds), if nonempty.
    pub fn param_bounds(&self) -> Option<(T, T)> {
        match *self {
            TubeWindow::Empty => None,
            TubeWindow::Interval { lo, hi } | TubeWindow::DegenerateRay { lo, hi } => {
                Some((lo.ln(), hi.ln()))
            }
        }
    }
}

/// Tube window of the half-circle `HalfCircle { a, r }`.
///
/// With `k = a / r`, `S = sinh R`, `C = cosh R` and `D = sqrt(C^2 - k^2)`, the
/// point `gamma(s)` is in the tube iff `|(k-1) u^2 + (k+1)| <= 2 S u`. For
/// `|k| <= C`, `k != ±1`, the solution set is `[|1+k| / (S+D), (S+D) / |1-k|]`;
/// it is empty for `|k| > C`. For `k > 1` these are the usual roots
/// `(S ∓ D) / (k - 1)`.
pub fn tube_window<T: Real>(
    a: T,
    r: T,
    radius: TubeRadius<T>,
) -> Result<TubeWindow<T>, GeometryError> {
    if !(r > T::zero()) {
        return Err(GeometryError::NonPositiveRadius(to_f64(r)));
    }
    let k = a / r;
    let s = radius.slope();
    let c = radius.get().cosh();
    if k.abs() > c {
        return Ok(TubeWindow::Empty);
    }
    let d = ((c - k) * (c + k)).max(T::zero()).sqrt();
    let one = T::one();
    if k == one {
        return Ok(TubeWindow::DegenerateRay {
            lo: one / s,
            hi: T::infinity(),
        });
    }
    if k == -one {
        return Ok(TubeWindow::DegenerateRay {
            lo: T::zero(),
            hi: s,
        });
    }
    Ok(TubeWindow::Interval {
        lo: (one + k).abs() / (s + d),
        hi: (s + d) / (one - k).abs(),
    })
}

/// Real Möbius transformation `z -> (az + b) / (cz + d)` with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MobiusMap<T> {
    a: T,
    b: T,
    c: T,
    d: T,
}

impl<T: Real> MobiusMap<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Result<Self, GeometryError> {
        let det = a * d - b * c;
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
        if !((det - T::one()).abs() <= tol) {
            return Err(GeometryError::NotUnimodular(to_f64(det)));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn identity() -> Self {
        Self {
            a: T::one(),
            b: T::zero(),
            c: T::zero(),
            d: T::one(),
        }
    }

    pub fn coefficients(&self) -> [T; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn apply(&self, p: &HPoint<T>) -> Result<HPoint<T>, GeometryError> {
        // w = (a z + b)/(c z + d); with det = 1, Im w = y / |cz + d|^2.
        let re_den = self.c * p.x + self.d;
        let im_den = self.c * p.y;
        let den = re_den * re_den + im_den * im_den;
        if !(den > T::zero()) || !den.is_finite() {
            return Err(GeometryError::Pole);
        }
        let re_num = self.a * p.x + self.b;
        let im_num = self.a * p.y;
        let x = (re_num * re_den + im_num * im_den) / den;
        let y = p.y / den;
        HPoint::new(x, y)
    }

    /// Image of the `y`-axis, determined by its ideal endpoints
    /// `0 -> b/d` and `inf -> a/c`.
    pub fn image_of_y_axis(&self) -> Geodesic<T> {
        if self.c == T::zero() {
            return Geodesic::VerticalLine {
                x0: self.b / self.d,
            };
        }
        if self.d == T::zero() {
            return Geodesic::VerticalLine {
                x0: self.a / self.c,
            };
        }
        let e0 = self.b / self.d;
        let e1 = self.a / self.c;
        Geodesic::HalfCircle {
            a: (e0 + e1) * T::half(),
            r: (e0 - e1).abs() * T::half(),
        }
    }
}

pub fn mobius_apply<T: Real>(m: &MobiusMap<T>, p: &HPoint<T>) -> Result<HPoint<T>, GeometryError> {
    m.apply(p)
}

pub fn mobius_image_of_y_axis<T: Real>(m: &MobiusMap<T>) -> Geodesic<T> {
    m.image_of_y_axis()
}

/// Relative position of an image geodesic with respect to the `y`-axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PairClass<T> {
    ParallelLine {
        a: T,
    },
    DisjointCircle {
        a: T,
        r: T,
    },
    /// Crossing at `(0, e^{t0})`, reached on the circle at parameter `s0`.
    IntersectingCircle {
        a: T,
        r: T,
        t0: T,
        s0: T,
    },
}

/// Classifies `g` against the `y`-axis. For a crossing half-circle,
/// `e^{2 t0} = r^2 - a^2` and `e^{2 s0} = (r + a) / (r - a)`.
pub fn classify_pair<T: Real>(g: &Geodesic<T>) -> Result<PairClass<T>, GeometryError> {
    match *g {
        Geodesic::VerticalLine { x0 } => {
            if x0 == T::zero() {
                Err(GeometryError::Coincident)
            } else {
                Ok(PairClass::ParallelLine { a: x0 })
            }
        }
        Geodesic::HalfCircle { a, r } => {
            if r == a.abs() {
                Err(GeometryError::Tangent)
            } else if r < a.abs() {
                Ok(PairClass::DisjointCircle { a, r })
            } else {
                let t0 = T::half() * ((r - a) * (r + a)).ln();
                let s0 = T::half() * ((r + a) / (r - a)).ln();
                Ok(PairClass::IntersectingCircle { a, r, t0, s0 })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(x: f64, y: f64) -> HPoint<f64> {
        HPoint::new(x, y).unwrap()
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(matches!(
            HPoint::new(0.0, 0.0),
            Err(GeometryError::NotInHalfPlane { .. })
        ));
        assert!(HPoint::new(1.0, -2.0).is_err());
        assert_eq!(HPoint::new(f64::NAN, 1.0), Err(GeometryError::NonFinite));
    }

    #[test]
    fn distance_examples() {
        assert_relative_eq!(
            p(0.0, 1.0).distance(&p(0.0, 1f64.exp())),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(p(0.0, 1.0).distance(&p(0.0, 1.0)), 0.0);
        assert_relative_eq!(
            p(0.0, 1.0).distance(&p(1.0, 1.0)),
            0.9624236501192069,
            epsilon = 1e-12
        );
    }

    #[test]
    fn nearby_points_keep_precision() {
        // arcosh(1+u) ~ sqrt(2u): distance of (0,1),(1e-9,1) is ~1e-9.
        let d = p(0.0, 1.0).distance(&p(1e-9, 1.0));
        assert_relative_eq!(d, 1e-9, max_relative = 1e-9);
    }

    #[test]
    fn geodesic_point_examples() {
        let v = Geodesic::vertical(0.0).point(1.0).unwrap();
        assert_relative_eq!(v.y(), 1f64.exp());
        let g = Geodesic::half_circle(0.5, 1.3).unwrap();
        let q = g.point(1.5f64.ln()).unwrap();
        assert!(q.x().abs() < 1e-15);
        assert_relative_eq!(q.y(), 1.2, epsilon = 1e-15);
        let apex = g.point(0.0).unwrap();
        assert_eq!((apex.x(), apex.y()), (0.5, 1.3));
        assert_eq!(g.point(701.0), Err(GeometryError::ParameterOverflow(701.0)));
        assert!(g.point(f64::NAN).is_err());
    }

    #[test]
    fn axis_distance_examples() {
        assert_eq!(p(0.0, 5.0).dist_to_y_axis(), 0.0);
        assert_relative_eq!(
            p(1.0, 1.0).dist_to_y_axis(),
            0.881373587019543,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            p(-3.0, 4.0).dist_to_y_axis(),
            1.25f64.acosh(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn tube_boundary_is_at_distance_r() {
        let radius = TubeRadius::new(0.7).unwrap();
        let x = 2.5;
        let y = x / ((0.7f64.cosh()).powi(2) - 1.0).sqrt();
        let q = p(x, y);
        assert!(tube_contains(&q, radius) || (q.dist_to_y_axis() - 0.7).abs() < 1e-10);
        assert!((q.dist_to_y_axis() - 0.7).abs() < 1e-10);
        assert!(tube_contains(&p(0.0, 1e-3), radius));
        assert!(!tube_contains(
            &p(10.0, 1e-3),
            TubeRadius::new(1.0).unwrap()
        ));
    }

    #[test]
    fn tube_window_cases() {
        let radius = TubeRadius::new(1.0).unwrap();
        assert_eq!(tube_window(5.0, 1.0, radius).unwrap(), TubeWindow::Empty);
        let w = tube_window(0.0, 2.0, radius).unwrap();
        assert!(w.contains(1.0));
        // Circle centred on the axis crosses it orthogonally: window is s in [-R, R].
        let (lo, hi) = w.param_bounds().unwrap();
        assert_relative_eq!(lo, -1.0, epsilon = 1e-14);
        assert_relative_eq!(hi, 1.0, epsilon = 1e-14);
        assert!(matches!(
            tube_window(1.0, 1.0, radius).unwrap(),
            TubeWindow::DegenerateRay { .. }
        ));
        assert!(tube_window(1.0, 0.0, radius).is_err());
    }

    #[test]
    fn tube_window_matches_quadratic_roots_for_disjoint_circles() {
        let radius = TubeRadius::new(1.0).unwrap();
        let (ch, sh) = (1f64.cosh(), 1f64.sinh());
        let k: f64 = 1.4;
        let disc = (ch * ch - k * k).sqrt();
        let u_minus = (sh - disc) / (k - 1.0);
        let u_plus = (sh + disc) / (k - 1.0);
        match tube_window(1.4, 1.0, radius).unwrap() {
            TubeWindow::Interval { lo, hi } => {
                assert_relative_eq!(lo, u_minus, max_relative = 1e-13);
                assert_relative_eq!(hi, u_plus, max_relative = 1e-13);
            }
            w => panic!("unexpected {w:?}"),
        }
    }

    #[test]
    fn mobius_examples() {
        let q = p(0.3, 0.8);
        assert_eq!(MobiusMap::identity().apply(&q).unwrap(), q);
        let tr = MobiusMap::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(tr.apply(&p(0.0, 1.0)).unwrap(), p(1.0, 1.0));
        assert!(MobiusMap::new(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn images_of_axis() {
        assert_eq!(
            MobiusMap::<f64>::identity().image_of_y_axis(),
            Geodesic::VerticalLine { x0: 0.0 }
        );
        let tr = MobiusMap::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(tr.image_of_y_axis(), Geodesic::VerticalLine { x0: 1.0 });
        let m = MobiusMap::new(1.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(m.image_of_y_axis(), Geodesic::HalfCircle { a: 0.5, r: 0.5 });
        let inv = MobiusMap::new(0.0, -1.0, 1.0, 0.0).unwrap();
        assert_eq!(inv.image_of_y_axis(), Geodesic::VerticalLine { x0: 0.0 });
    }

    #[test]
    fn classify_examples() {
        let g = Geodesic::half_circle(0.5, 1.3).unwrap();
        match classify_pair(&g).unwrap() {
            PairClass::IntersectingCircle { t0, s0, .. } => {
                assert_relative_eq!(t0, 1.2f64.ln(), epsilon = 1e-14);
                assert_relative_eq!(s0, 1.5f64.ln(), epsilon = 1e-14);
                let a = Geodesic::vertical(0.0).point(t0).unwrap();
                let b = g.point(s0).unwrap();
                assert!(a.distance(&b) < 1e-10);
            }
            c => panic!("unexpected {c:?}"),
        }
        assert!(matches!(
            classify_pair(&Geodesic::half_circle(3.0, 1.0).unwrap()),
            Ok(PairClass::DisjointCircle { .. })
        ));
        assert_eq!(
            classify_pair(&Geodesic::vertical(2.0)).unwrap(),
            PairClass::ParallelLine { a: 2.0 }
        );
        assert_eq!(
            classify_pair(&Geodesic::half_circle(1.0, 1.0).unwrap()),
            Err(GeometryError::Tangent)
        );
        assert_eq!(
            classify_pair(&Geodesic::vertical(0.0)),
            Err(GeometryError::Coincident)
        );
    }

    #[test]
    fn single_precision_geometry() {
        let a = HPoint::<f32>::new(0.0, 1.0).unwrap();
        let b = HPoint::<f32>::new(1.0, 1.0).unwrap();
        assert!((a.distance(&b) - 0.962_423_65).abs() < 1e-6);
    }
}

//! Zonal and highest-weight spherical harmonics on `S^2`, their `L^p` norms
//! along unit great-circle arcs, and growth-exponent fits in `lambda`.

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::fit::{least_squares, FitError, LineFit};
use crate::quadrature::{Composite, GaussLegendre};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Error, PartialEq)]
pub enum SphereError {
    #[error("segment length must lie in (0, 2 pi], got {0}")]
    BadLength(f64),
    #[error("exponent p must be >= 1, got {0}")]
    BadExponent(f64),
    #[error("restriction norm did not converge: {coarse} vs {fine}")]
    NotConverged { coarse: f64, fine: f64 },
    #[error(transparent)]
    Fit(#[from] FitError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HarmonicKind {
    Zonal,
    HighestWeight,
}

/// `L^2(S^2)`-normalized eigenfunction of degree `n`, `lambda^2 = n(n+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HarmonicFamily {
    pub kind: HarmonicKind,
    pub n: usize,
    /// Logarithm of the normalization constant.
    pub log_norm: f64,
}

impl HarmonicFamily {
    pub fn zonal(n: usize) -> Self {
        Self {
            kind: HarmonicKind::Zonal,
            n,
            log_norm: 0.5 * ((2 * n + 1) as f64 / FOUR_PI).ln(),
        }
    }

    pub fn beam(n: usize) -> Self {
        Self {
            kind: HarmonicKind::HighestWeight,
            n,
            log_norm: beam_log_constant(n),
        }
    }

    pub fn lambda(&self) -> f64 {
        ((self.n * (self.n + 1)) as f64).sqrt()
    }

    pub fn eval(&self, theta: f64, phi: f64) -> Complex64 {
        match self.kind {
            HarmonicKind::Zonal => Complex64::new(zonal_eval(self.n, theta), 0.0),
            HarmonicKind::HighestWeight => beam_eval(self.n, theta, phi),
        }
    }
}

/// `ln c_n` with `c_n^2 * 2 pi * int_0^pi sin^{2n+1} = 1`, using
/// `int_0^pi sin^{2n+1} = 2^{2n+1} (n!)^2 / (2n+1)!`.
pub fn beam_log_constant(n: usize) -> f64 {
    let nf = n as f64;
    -0.5 * (TWO_PI.ln() + (2.0 * nf + 1.0) * std::f64::consts::LN_2 + 2.0 * ln_gamma(nf + 1.0)
        - ln_gamma(2.0 * nf + 2.0))
}

/// Legendre polynomial `P_n(x)` by the upward three-term recurrence.
pub fn legendre(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `Z_n(theta) = sqrt((2n+1)/(4 pi)) P_n(cos theta)`.
pub fn zonal_eval(n: usize, theta: f64) -> f64 {
    ((2 * n + 1) as f64 / FOUR_PI).sqrt() * legendre(n, theta.cos())
}

/// `Q_n = c_n sin^n(theta) e^{i n phi}`, magnitude formed in log space.
pub fn beam_eval(n: usize, theta: f64, phi: f64) -> Complex64 {
    let sin = theta.sin().abs();
    let modulus = if n == 0 {
        beam_log_constant(0).exp()
    } else if sin == 0.0 {
        0.0
    } else {
        (beam_log_constant(n) + n as f64 * sin.ln()).exp()
    };
    Complex64::from_polar(modulus, n as f64 * phi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GreatCircle {
    /// `(sin tau, 0, cos tau)`: through the north pole at `tau = 0`.
    Meridian,
    /// `(cos tau, sin tau, 0)`.
    Equator,
}

/// Arc `tau in [offset, offset + length]` of a unit-speed great circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreatCircleSegment {
    pub circle: GreatCircle,
    pub length: f64,
    pub offset: f64,
}

impl GreatCircleSegment {
    pub fn new(circle: GreatCircle, length: f64, offset: f64) -> Result<Self, SphereError> {
        if !(length > 0.0 && length <= TWO_PI) {
            return Err(SphereError::BadLength(length));
        }
        Ok(Self {
            circle,
            length,
            offset,
        })
    }

    /// Unit meridian arc centred on the pole.
    pub fn polar_unit() -> Self {
        Self {
            circle: GreatCircle::Meridian,
            length: 1.0,
            offset: -0.5,
        }
    }

    pub fn equatorial_unit() -> Self {
        Self {
            circle: GreatCircle::Equator,
            length: 1.0,
            offset: 0.0,
        }
    }

    /// Spherical coordinates `(theta, phi)` at arclength `tau`.
    pub fn angles(&self, tau: f64) -> (f64, f64) {
        match self.circle {
            GreatCircle::Meridian => {
                let (x, z) = (tau.sin(), tau.cos());
                (
                    z.clamp(-1.0, 1.0).acos(),
                    if x < 0.0 { std::f64::consts::PI } else { 0.0 },
                )
            }
            GreatCircle::Equator => (std::f64::consts::FRAC_PI_2, tau),
        }
    }
}

/// `p`-th power of `|e|` integrated along the segment with a composite
/// Gauss–Legendre rule of `16 * panels` nodes.
fn power_integral(f: &HarmonicFamily, seg: &GreatCircleSegment, p: f64, panels: usize) -> f64 {
    let q = Composite::<f64>::new(16, panels);
    q.integrate(seg.offset, seg.offset + seg.length, |tau| {
        let (th, ph) = seg.angles(tau);
        f.eval(th, ph).norm().powf(p)
    })
}

fn sup_along(f: &HarmonicFamily, seg: &GreatCircleSegment) -> f64 {
    let m = 64 * (f.n + 4);
    let at = |tau: f64| {
        let (th, ph) = seg.angles(tau);
        f.eval(th, ph).norm()
    };
    let step = seg.length / m as f64;
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for i in 0..=m {
        let v = at(seg.offset + step * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // Golden-section polish inside the neighbouring cells.
    let lo = seg.offset + step * best_i.saturating_sub(1) as f64;
    let hi = (seg.offset + step * (best_i + 1) as f64).min(seg.offset + seg.length);
    let (mut a, mut b) = (lo, hi);
    let g = 0.618_033_988_749_894_8;
    for _ in 0..80 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if at(x1) >= at(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    best.max(at(0.5 * (a + b)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RestrictionNorm {
    pub value: f64,
    /// Result with half the nodes (equal to `value` for `p = inf`).
    pub coarse: f64,
    pub nodes: usize,
}

const MAX_DOUBLINGS: usize = 6;

/// `(int_gamma |e|^p ds)^{1/p}`; `p = f64::INFINITY` gives the sup.
pub fn restriction_norm(
    f: &HarmonicFamily,
    seg: &GreatCircleSegment,
    p: f64,
) -> Result<RestrictionNorm, SphereError> {
    if !(p >= 1.0) {
        return Err(SphereError::BadExponent(p));
    }
    if p.is_infinite() {
        let v = sup_along(f, seg);
        return Ok(RestrictionNorm {
            value: v,
            coarse: v,
            nodes: 64 * (f.n + 4) + 1,
        });
    }
    // |e|^p has kinks at the zeros of e for small p, so panels keep doubling
    // until two levels agree.
    let mut panels = ((f.n as f64 * seg.length).ceil() as usize).max(4);
    let mut coarse = power_integral(f, seg, p, panels).powf(1.0 / p);
    for _ in 0..MAX_DOUBLINGS {
        let fine = power_integral(f, seg, p, 2 * panels).powf(1.0 / p);
        panels *= 2;
        if (coarse - fine).abs() <= 1e-6 * fine.abs() {
            return Ok(RestrictionNorm {
                value: fine,
                coarse,
                nodes: 16 * panels,
            });
        }
        coarse = fine;
    }
    let fine = power_integral(f, seg, p, 2 * panels).powf(1.0 / p);
    Err(SphereError::NotConverged { coarse, fine })
}

/// `int_{S^2} |e|^2` by Gauss–Legendre in `cos theta` and the trapezoid rule
/// in `phi` (exact for these band-limited integrands).
pub fn l2_norm_squared(f: &HarmonicFamily) -> f64 {
    let g = GaussLegendre::<f64>::new(f.n + 2);
    let nphi = 2 * f.n + 2;
    let mut acc = 0.0;
    for (&x, &w) in g.nodes().iter().zip(g.weights()) {
        let th = x.acos();
        let mut ring = 0.0;
        for k in 0..nphi {
            let ph = TWO_PI * k as f64 / nphi as f64;
            ring += f.eval(th, ph).norm_sqr();
        }
        acc += w * ring * TWO_PI / nphi as f64;
    }
    acc
}

/// Spherical Laplacian by Richardson-extrapolated central differences.
fn laplacian_fd(f: &HarmonicFamily, th: f64, ph: f64, h: f64) -> Complex64 {
    let lap = |h: f64| {
        let c = f.eval(th, ph);
        let tp = f.eval(th + h, ph);
        let tm = f.eval(th - h, ph);
        let pp = f.eval(th, ph + h);
        let pm = f.eval(th, ph - h);
        let d2t = (tp - c * 2.0 + tm) / (h * h);
        let d1t = (tp - tm) / (2.0 * h);
        let d2p = (pp - c * 2.0 + pm) / (h * h);
        d2t + d1t * (th.cos() / th.sin()) + d2p / th.sin().powi(2)
    };
    (lap(h * 0.5) * 4.0 - lap(h)) / 3.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LaplacianResidual {
    pub n: usize,
    pub step: f64,
    pub residual: f64,
}

/// `||Delta e + n(n+1) e|| / ||n(n+1) e||` over `points` pseudo-random
/// interior points (deterministic low-discrepancy sequence).
pub fn laplacian_check(f: &HarmonicFamily, points: usize) -> LaplacianResidual {
    let h = (0.1 / (f.n as f64 + 1.0)).min(0.005);
    let ev = (f.n * (f.n + 1)) as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..points {
        // Additive recurrence with the plastic-number constants.
        let u = (0.5 + 0.754_877_666_246_692_7 * i as f64).fract();
        let v = (0.5 + 0.569_840_290_998_053_2 * i as f64).fract();
        let th = 0.05 + (std::f64::consts::PI - 0.1) * u;
        let ph = TWO_PI * v;
        let e = f.eval(th, ph);
        let r = laplacian_fd(f, th, ph, h) + e * ev;
        num += r.norm_sqr();
        den += (e * ev).norm_sqr();
    }
    let residual = if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    };
    LaplacianResidual {
        n: f.n,
        step: h,
        residual,
    }
}

/// Reference exponents `sigma(2, p)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ExponentTable;

impl ExponentTable {
    /// `1/4` on `[2, 4]`, `1/2 - 1/p` on `[4, inf]`; `None` below 2.
    pub fn sigma(p: f64) -> Option<f64> {
        if !(p >= 2.0) {
            None
        } else if p <= 4.0 {
            Some(0.25)
        } else {
            Some(0.5 - 1.0 / p)
        }
    }
}

/// One row of the plotting table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormSample {
    pub family: HarmonicKind,
    pub p: f64,
    pub n: usize,
    pub lambda: f64,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub family: HarmonicKind,
    pub segment: GreatCircleSegment,
    pub p: f64,
    pub fit: LineFit,
    pub samples: Vec<NormSample>,
}

impl ExponentFit {
    pub fn sigma_hat(&self) -> f64 {
        self.fit.slope
    }
}

/// Slope of `ln ||e_n||_{L^p(gamma)}` against `ln lambda`, `lambda = sqrt(n(n+1))`.
/// Fewest degrees `exponent_fit` accepts.
pub const MIN_FIT_DEGREES: usize = 6;

pub fn exponent_fit(
    kind: HarmonicKind,
    seg: &GreatCircleSegment,
    p: f64,
    n_range: &[usize],
) -> Result<ExponentFit, SphereError> {
    let mut samples = Vec::with_capacity(n_range.len());
    for &n in n_range {
        let f = match kind {
            HarmonicKind::Zonal => HarmonicFamily::zonal(n),
            HarmonicKind::HighestWeight => HarmonicFamily::beam(n),
        };
        let norm = restriction_norm(&f, seg, p)?.value;
        samples.push(NormSample {
            family: kind,
            p,
            n,
            lambda: f.lambda(),
            norm,
        });
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.lambda.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.norm.ln()).collect();
    let fit = least_squares(&xs, &ys, MIN_FIT_DEGREES)?;
    Ok(ExponentFit {
        family: kind,
        segment: *seg,
        p,
        fit,
        samples,
    })
}

/// Degrees used by the exponent experiments.
pub const DEFAULT_DEGREES: [usize; 7] = [50, 75, 100, 150, 200, 250, 300];

/// Per-`p` comparison of both saturating configurations against `sigma(2,p)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentRow {
    pub p: f64,
    pub reference: Option<f64>,
    pub beam_equator: f64,
    pub zonal_meridian: f64,
    /// Family with the larger fitted exponent.
    pub attained_by: HarmonicKind,
}

pub fn exponent_report(ps: &[f64], degrees: &[usize]) -> Result<Vec<ExponentRow>, SphereError> {
    ps.iter()
        .map(|&p| {
            let b = exponent_fit(
                HarmonicKind::HighestWeight,
                &GreatCircleSegment::equatorial_unit(),
                p,
                degrees,
            )?
            .sigma_hat();
            let z = exponent_fit(
                HarmonicKind::Zonal,
                &GreatCircleSegment::polar_unit(),
                p,
                degrees,
            )?
            .sigma_hat();
            Ok(ExponentRow {
                p,
                reference: ExponentTable::sigma(p),
                beam_equator: b,
                zonal_meridian: z,
                attained_by: if b >= z {
                    HarmonicKind::HighestWeight
                } else {
                    HarmonicKind::Zonal
                },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zonal_at_pole_and_degree_zero() {
        for n in [0, 1, 7, 300] {
            let v = zonal_eval(n, 0.0);
            assert!((v - ((2 * n + 1) as f64 / FOUR_PI).sqrt()).abs() < 1e-12 * v);
        }
        assert!((zonal_eval(0, 1.3) - 1.0 / FOUR_PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normalizations() {
        for n in [0, 1, 5, 40, 120] {
            assert!((l2_norm_squared(&HarmonicFamily::zonal(n)) - 1.0).abs() < 1e-8);
            assert!((l2_norm_squared(&HarmonicFamily::beam(n)) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn beam_constant_small_degree() {
        // c_0 = 1/sqrt(4 pi); c_1 = sqrt(3/(8 pi))
        assert!((beam_log_constant(0).exp() - 1.0 / FOUR_PI.sqrt()).abs() < 1e-14);
        assert!(
            (beam_log_constant(1).exp() - (3.0 / (8.0 * std::f64::consts::PI)).sqrt()).abs()
                < 1e-14
        );
        let q = beam_eval(10, std::f64::consts::FRAC_PI_2, 0.3);
        assert!((q.norm() - beam_log_constant(10).exp()).abs() < 1e-14);
    }

    #[test]
    fn beam_constant_grows_like_quarter_power() {
        let ns: Vec<f64> = (50..=300).step_by(25).map(|n| n as f64).collect();
        let ys: Vec<f64> = ns.iter().map(|&n| beam_log_constant(n as usize)).collect();
        let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
        let f = least_squares(&xs, &ys, 3).unwrap();
        assert!((f.slope - 0.25).abs() < 0.01, "{}", f.slope);
    }

    #[test]
    fn trivial_restriction_norms() {
        let z0 = HarmonicFamily::zonal(0);
        for p in [1.0, 2.0, 5.0, f64::INFINITY] {
            let v = restriction_norm(&z0, &GreatCircleSegment::polar_unit(), p).unwrap();
            assert!((v.value - 1.0 / FOUR_PI.sqrt()).abs() < 1e-12);
        }
        let b = HarmonicFamily::beam(40);
        for p in [2.0, 3.0, f64::INFINITY] {
            let v = restriction_norm(&b, &GreatCircleSegment::equatorial_unit(), p).unwrap();
            assert!((v.value - b.log_norm.exp()).abs() < 1e-12 * v.value);
        }
        let z = HarmonicFamily::zonal(60);
        let sup = restriction_norm(&z, &GreatCircleSegment::polar_unit(), f64::INFINITY).unwrap();
        assert!((sup.value - (121.0 / FOUR_PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn laplacian_residuals() {
        assert!(laplacian_check(&HarmonicFamily::zonal(1), 200).residual < 1e-8);
        assert!(laplacian_check(&HarmonicFamily::zonal(100), 1000).residual < 1e-4);
        assert!(laplacian_check(&HarmonicFamily::beam(50), 1000).residual < 1e-4);
    }

    #[test]
    fn exponent_table_continuous_at_four() {
        assert_eq!(ExponentTable::sigma(4.0), Some(0.25));
        assert!((ExponentTable::sigma(4.0 + 1e-12).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(ExponentTable::sigma(1.5), None);
        assert_eq!(ExponentTable::sigma(f64::INFINITY), Some(0.5));
    }

    #[test]
    fn segment_validation() {
        assert!(GreatCircleSegment::new(GreatCircle::Equator, 0.0, 0.0).is_err());
        assert!(GreatCircleSegment::new(GreatCircle::Equator, 7.0, 0.0).is_err());
        let seg = GreatCircleSegment::polar_unit();
        let (th, _) = seg.angles(-0.3);
        assert!((th - 0.3).abs() < 1e-15);
    }
}

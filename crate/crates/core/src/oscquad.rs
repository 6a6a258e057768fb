//! Oscillatory integral operators `T_lambda f(t) = ∫ e^{i lambda phi(t,s)} a(t,s) f(s) ds`:
//! the `T T*` kernel, its decay, the constant `C_{a,phi}`, operator norms and
//! their scaling in `lambda`, plus the flat model kernels (circle integral and
//! the restriction kernel built from it).
//!
//! Amplitudes are separable, `a(t,s) = c · A(t) B(s)`, so the Nyström matrix
//! factors as `diag · E · diag` with `E_ij = e^{i lambda phi(t_i, s_j)}`. For
//! phases of the form `g(t) s` the rows of `E` are generated panel by panel
//! with a complex rotation, which keeps memory linear in `n`.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::boundscan::{box_extrema, ScanError, Sense};
use crate::fit::{log_log_slope, FitError, LineFit};
use crate::phase::{phi_eval, phi_jet, phi_st_over_t_minus_t0, PhaseCase, PhaseError};
use crate::quadrature::{Composite, GaussLegendre};
use crate::taylor::Taylor;

#[derive(Debug, Error, PartialEq)]
pub enum OscError {
    #[error("lambda must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("amplitude box [{0}, {1}] is empty or not finite")]
    BadBox(f64, f64),
    #[error("kernel at ({s}, {s_prime}) not converged: {panels} panels, last change {delta:e}")]
    KernelNotConverged {
        s: f64,
        s_prime: f64,
        panels: usize,
        delta: f64,
    },
    #[error("{n} nodes cannot resolve the oscillation, need at least {needed}")]
    Underresolved { n: usize, needed: usize },
    #[error("dense phase matrix with {entries} entries exceeds the memory cap")]
    TooLarge { entries: usize },
    #[error(
        "Lanczos iteration stalled after {iterations} steps (last relative change {change:e})"
    )]
    LanczosNotConverged { iterations: usize, change: f64 },
    #[error("inf |phi_st| vanishes on the support; use the degenerate regime")]
    VanishingMixedDerivative,
    #[error("degenerate regime needs a phase with a zero line t = t0")]
    NoFoldLine,
    #[error("need at least {needed} lambda values, got {got}")]
    TooFewLambdas { needed: usize, got: usize },
    #[error("separation {0} outside (0, 1]")]
    BadDelta(f64),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

const GL_ORDER: usize = 10;

fn check_box(b: (f64, f64)) -> Result<(), OscError> {
    if b.0.is_finite() && b.1.is_finite() && b.0 <= b.1 {
        Ok(())
    } else {
        Err(OscError::BadBox(b.0, b.1))
    }
}

fn bump_taylor(x: Taylor<f64, 3>) -> Taylor<f64, 3> {
    if x.value().abs() >= 1.0 {
        return Taylor::constant(0.0);
    }
    let q = -(x * x) + 1.0;
    (-(q.recip()) + 1.0).exp()
}

/// `exp(1 - 1/(1 - x^2))` on `(-1, 1)`, zero outside; equals 1 at the centre.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

fn smooth_step_taylor(x: Taylor<f64, 3>) -> Taylor<f64, 3> {
    let v = x.value();
    if v <= 0.0 {
        return Taylor::constant(0.0);
    }
    if v >= 1.0 {
        return Taylor::constant(1.0);
    }
    let up = (-(x.recip())).exp();
    let down = (-((-x + 1.0).recip())).exp();
    up / (up + down)
}

/// `C^∞` step from 0 at `x <= 0` to 1 at `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    smooth_step_taylor(Taylor::constant(x)).value()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum AmplitudeProfile {
    /// Product of bumps over the `t` and `s` boxes.
    Bump,
    /// `T^{-1} lambda^{1/2} t^{-1/2} chi(t)` in `t`, constant in `s`; `chi`
    /// ramps up on `[2, 2 + w]` and down on `[T - w, T]` with
    /// `w = min(1, (T - 2)/2)`.
    Radial { horizon: f64, lambda: f64 },
}

/// Separable amplitude `scale · A(t) B(s)` supported in `t_box × s_box`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Amplitude {
    pub profile: AmplitudeProfile,
    pub t_box: (f64, f64),
    pub s_box: (f64, f64),
    pub scale: f64,
    /// `‖∂_t^i a‖_∞` for `i = 0, 1, 2`, measured on a grid.
    pub t_norms: [f64; 3],
}

impl Amplitude {
    pub fn bump(t_box: (f64, f64), s_box: (f64, f64)) -> Result<Self, OscError> {
        check_box(t_box)?;
        check_box(s_box)?;
        if t_box.0 == t_box.1 || s_box.0 == s_box.1 {
            return Err(OscError::BadBox(t_box.0, t_box.1));
        }
        Ok(Self::with_profile(AmplitudeProfile::Bump, t_box, s_box))
    }

    fn with_profile(profile: AmplitudeProfile, t_box: (f64, f64), s_box: (f64, f64)) -> Self {
        let mut a = Self {
            profile,
            t_box,
            s_box,
            scale: 1.0,
            t_norms: [0.0; 3],
        };
        a.t_norms = a.measure_t_norms(8192);
        a
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            scale: self.scale * k,
            t_norms: self.t_norms.map(|v| v * k.abs()),
            ..self.clone()
        }
    }

    fn t_factor(&self, t: Taylor<f64, 3>) -> Taylor<f64, 3> {
        match self.profile {
            AmplitudeProfile::Bump => {
                let (lo, hi) = self.t_box;
                bump_taylor(t * (2.0 / (hi - lo)) - (hi + lo) / (hi - lo))
            }
            AmplitudeProfile::Radial { horizon, lambda } => {
                let w = ((horizon - 2.0) / 2.0).min(1.0);
                let v = t.value();
                if w <= 0.0 || v <= 2.0 || v >= horizon {
                    return Taylor::constant(0.0);
                }
                let ramp = smooth_step_taylor((t - 2.0) * (1.0 / w))
                    * smooth_step_taylor((-t + horizon) * (1.0 / w));
                t.powf(-0.5) * ramp * (lambda.sqrt() / horizon)
            }
        }
    }

    fn s_factor(&self, s: f64) -> f64 {
        let (lo, hi) = self.s_box;
        match self.profile {
            AmplitudeProfile::Bump => bump((2.0 * s - lo - hi) / (hi - lo)),
            AmplitudeProfile::Radial { .. } => {
                if s >= lo && s <= hi {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// The `t` factor including `scale`.
    pub fn t_part(&self, t: f64) -> f64 {
        self.scale * self.t_factor(Taylor::constant(t)).value()
    }

    pub fn s_part(&self, s: f64) -> f64 {
        self.s_factor(s)
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        self.t_part(t) * self.s_part(s)
    }

    /// `(a, ∂_t a, ∂_t^2 a)` at `(t, s)`.
    pub fn t_jet(&self, t: f64, s: f64) -> [f64; 3] {
        let j = self.t_factor(Taylor::variable(t));
        let k = self.scale * self.s_factor(s);
        [
            j.derivative(0) * k,
            j.derivative(1) * k,
            j.derivative(2) * k,
        ]
    }

    fn measure_t_norms(&self, n: usize) -> [f64; 3] {
        let (lo, hi) = self.t_box;
        // sup_s |B| is 1 for both profiles
        let mut out = [0.0f64; 3];
        for i in 0..=n {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            let j = self.t_factor(Taylor::variable(t));
            for (k, o) in out.iter_mut().enumerate() {
                *o = o.max((self.scale * j.derivative(k)).abs());
            }
        }
        out
    }

    pub fn sup_norm(&self) -> f64 {
        self.t_norms[0]
    }

    /// Diameter of the support box.
    pub fn diam(&self) -> f64 {
        (self.t_box.1 - self.t_box.0).hypot(self.s_box.1 - self.s_box.0)
    }
}

/// `a(r) = T^{-1} lambda^{1/2} r^{-1/2} chi(r)` with `chi` a smooth cutoff
/// supported in `[2, T]`.
pub fn model_amplitude(horizon: f64, lambda: f64) -> Amplitude {
    Amplitude::with_profile(
        AmplitudeProfile::Radial { horizon, lambda },
        (2.0, horizon.max(2.0)),
        (0.0, 1.0),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Phase {
    /// `phi = t s`.
    Product,
    /// `phi = (t - 1/2)^2 s / 2`, mixed derivative vanishing on `t = 1/2`.
    Fold,
    Geometric(PhaseCase<f64>),
}

impl Phase {
    pub fn value(&self, t: f64, s: f64) -> Result<f64, OscError> {
        match self {
            Phase::Product => Ok(t * s),
            Phase::Fold => Ok((t - 0.5).powi(2) * s / 2.0),
            Phase::Geometric(c) => Ok(phi_eval(c, t, s)?),
        }
    }

    /// `(phi_st, phi_stt, phi_sttt)`.
    pub fn mixed_jet(&self, t: f64, s: f64) -> Result<[f64; 3], OscError> {
        match self {
            Phase::Product => Ok([1.0, 0.0, 0.0]),
            Phase::Fold => Ok([t - 0.5, 1.0, 0.0]),
            Phase::Geometric(c) => {
                let j = phi_jet(c, t, s)?;
                Ok([j.phi_st, j.phi_stt, j.phi_sttt])
            }
        }
    }

    pub fn fold_line(&self) -> Option<f64> {
        match self {
            Phase::Product => None,
            Phase::Fold => Some(0.5),
            Phase::Geometric(c) => c.crossing().map(|(t0, _)| t0),
        }
    }

    /// `phi_st / (t - t0)` for phases with a zero line.
    pub fn fold_ratio(&self, t: f64, s: f64) -> Result<Option<f64>, OscError> {
        match self {
            Phase::Product => Ok(None),
            Phase::Fold => Ok(Some(1.0)),
            Phase::Geometric(c) => match c.crossing() {
                Some(_) => Ok(Some(phi_st_over_t_minus_t0(c, t, s)?)),
                None => Ok(None),
            },
        }
    }

    /// `g` with `phi(t, s) = g(t) s`, when the phase has that form.
    fn separable_factor(&self) -> Option<fn(f64) -> f64> {
        match self {
            Phase::Product => Some(|t| t),
            Phase::Fold => Some(|t| (t - 0.5) * (t - 0.5) / 2.0),
            Phase::Geometric(_) => None,
        }
    }
}

/// Extrema of the mixed derivatives over a box, in linear scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseExtrema {
    pub inf_st: f64,
    pub sup_st: f64,
    pub sup_stt: f64,
    pub sup_sttt: f64,
    pub inf_ratio: Option<f64>,
}

pub const EXTREMA_GRID: usize = 64;
pub const EXTREMA_DEPTH: usize = 3;

/// Same grid and refinement as the bound scan, so geometric phases on
/// `[0,1] × s_box` reproduce its extrema.
pub fn phase_extrema(
    phase: &Phase,
    t_box: (f64, f64),
    s_box: (f64, f64),
) -> Result<PhaseExtrema, OscError> {
    let e = box_extrema(
        |t, s| {
            let map = |e: OscError| match e {
                OscError::Phase(p) => ScanError::Phase(p),
                other => panic!("unexpected error {other}"),
            };
            let j = phase.mixed_jet(t, s).map_err(map)?;
            let ratio = phase.fold_ratio(t, s).map_err(map)?;
            let st = j[0].abs().ln();
            Ok([
                st,
                st,
                j[1].abs().ln(),
                j[2].abs().ln(),
                ratio.map_or(f64::NAN, |r| r.abs().ln()),
            ])
        },
        t_box,
        &[s_box],
        EXTREMA_GRID,
        EXTREMA_DEPTH,
        [Sense::Min, Sense::Max, Sense::Max, Sense::Max, Sense::Min],
    )?;
    let lin = |x: &crate::boundscan::Extremum| if x.found() { x.value.exp() } else { 0.0 };
    Ok(PhaseExtrema {
        inf_st: lin(&e[0]),
        sup_st: lin(&e[1]),
        sup_stt: lin(&e[2]),
        sup_sttt: lin(&e[3]),
        inf_ratio: if e[4].found() {
            Some(e[4].value.exp())
        } else {
            None
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillatoryOperator {
    pub phase: Phase,
    pub amplitude: Amplitude,
    pub lambda: f64,
    pub extrema: PhaseExtrema,
}

impl OscillatoryOperator {
    pub fn new(phase: Phase, amplitude: Amplitude, lambda: f64) -> Result<Self, OscError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(OscError::BadLambda(lambda));
        }
        let extrema = phase_extrema(&phase, amplitude.t_box, amplitude.s_box)?;
        Ok(Self {
            phase,
            amplitude,
            lambda,
            extrema,
        })
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self, OscError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(OscError::BadLambda(lambda));
        }
        Ok(Self {
            lambda,
            ..self.clone()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelValue {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub panels: usize,
    /// Change under the last panel doubling.
    pub delta: f64,
    /// `∫ |a(t,s) a(t,s')| dt`, the scale of the tolerance.
    pub scale: f64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub const KERNEL_TOL: f64 = 1e-8;
const KERNEL_MAX_PANELS: usize = 1 << 16;

fn kernel_sum(
    op: &OscillatoryOperator,
    s: f64,
    s2: f64,
    panels: usize,
) -> Result<Complex64, OscError> {
    let (lo, hi) = op.amplitude.t_box;
    let bs = op.amplitude.s_part(s) * op.amplitude.s_part(s2);
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, w) in Composite::<f64>::new(GL_ORDER, panels).points(lo, hi) {
        let at = op.amplitude.t_part(t);
        if at == 0.0 {
            continue;
        }
        let d = if s == s2 {
            0.0
        } else {
            op.phase.value(t, s)? - op.phase.value(t, s2)?
        };
        acc += Complex64::from_polar(w * at * at * bs, op.lambda * d);
    }
    Ok(acc)
}

/// `K(s,s') = ∫ e^{i lambda (phi(t,s) - phi(t,s'))} a(t,s) a(t,s') dt` by
/// composite Gauss–Legendre, doubling panels until the change is at most
/// `1e-8 ∫|a(t,s) a(t,s')| dt`.
pub fn ttstar_kernel(
    op: &OscillatoryOperator,
    s: f64,
    s_prime: f64,
) -> Result<KernelValue, OscError> {
    let (lo, hi) = op.amplitude.t_box;
    let scale = Composite::<f64>::new(GL_ORDER, 64)
        .integrate(lo, hi, |t| op.amplitude.t_part(t).powi(2))
        * (op.amplitude.s_part(s) * op.amplitude.s_part(s_prime)).abs();
    if scale == 0.0 {
        return Ok(KernelValue {
            value: Complex64::new(0.0, 0.0),
            panels: 0,
            delta: 0.0,
            scale,
        });
    }
    let osc = (s - s_prime).abs() * op.extrema.sup_st * (hi - lo) / TAU;
    let mut panels = ((4.0 * op.lambda * osc).ceil() as usize).max(32);
    let mut prev = kernel_sum(op, s, s_prime, panels)?;
    loop {
        let next = kernel_sum(op, s, s_prime, 2 * panels)?;
        let delta = (next - prev).norm();
        panels *= 2;
        if delta <= KERNEL_TOL * scale {
            return Ok(KernelValue {
                value: next,
                panels,
                delta,
                scale,
            });
        }
        if panels >= KERNEL_MAX_PANELS {
            return Err(OscError::KernelNotConverged {
                s,
                s_prime,
                panels,
                delta,
            });
        }
        prev = next;
    }
}

/// `K` on all ordered pairs of a node set (both orders computed, so the
/// Hermitian defect is a genuine check).
#[derive(Clone, Debug, PartialEq)]
pub struct KernelGrid {
    pub s: Vec<f64>,
    /// Row-major, `values[i * n + j] = K(s_i, s_j)`.
    pub values: Vec<Complex64>,
    pub max_panels: usize,
    pub max_delta: f64,
}

impl KernelGrid {
    pub fn compute(op: &OscillatoryOperator, s: &[f64]) -> Result<Self, OscError> {
        let n = s.len();
        let cells: Vec<KernelValue> = (0..n * n)
            .into_par_iter()
            .map(|k| ttstar_kernel(op, s[k / n], s[k % n]))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            s: s.to_vec(),
            values: cells.iter().map(|c| c.value).collect(),
            max_panels: cells.iter().map(|c| c.panels).max().unwrap_or(0),
            max_delta: cells.iter().map(|c| c.delta).fold(0.0, f64::max),
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.s.len() + j]
    }

    /// `max |K(s,s') - conj K(s',s)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.s.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "s,s_prime,re,im")?;
        let n = self.s.len();
        for i in 0..n {
            for j in 0..n {
                let z = self.get(i, j);
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    self.s[i], self.s[j], z.re, z.im
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `inf |phi_st| > 0`: `|K| ≲ (1 + lambda|s-s'|)^{-2}`.
    Nondegenerate,
    /// `phi_st` vanishes on `t = t0` with `phi_stt ≠ 0`: `|K| ≲ (lambda|s-s'|)^{-1/2}`.
    Degenerate,
}

impl Regime {
    fn weight(self, sep: f64) -> f64 {
        match self {
            Regime::Nondegenerate => (1.0 + sep).powi(2),
            Regime::Degenerate => sep.sqrt(),
        }
    }

    fn diam_power(self) -> f64 {
        match self {
            Regime::Nondegenerate => 0.5,
            Regime::Degenerate => 0.25,
        }
    }
}

/// The bracket of `C_{a,phi}` with the absolute constant set to 1, and its
/// ingredients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CaphiReport {
    pub regime: Regime,
    pub diam: f64,
    /// `‖∂_t^i a‖_∞`, `i = 0, 1, 2`.
    pub amplitude_norms: [f64; 3],
    /// `‖∂_t^j phi_st‖_∞`, `j = 0, 1, 2`.
    pub phase_norms: [f64; 3],
    /// `inf |phi_st|` or `inf |phi_st / (t - t0)|`.
    pub inf: f64,
    pub value: f64,
}

pub fn c_aphi(op: &OscillatoryOperator, regime: Regime) -> Result<CaphiReport, OscError> {
    let e = &op.extrema;
    let inf = match regime {
        Regime::Nondegenerate => {
            if !(e.inf_st > 0.0) {
                return Err(OscError::VanishingMixedDerivative);
            }
            e.inf_st
        }
        Regime::Degenerate => e.inf_ratio.ok_or(OscError::NoFoldLine)?,
    };
    let a = op.amplitude.t_norms;
    let p = [e.sup_st, e.sup_stt, e.sup_sttt];
    let mut cross = 0.0;
    for ai in a {
        for pj in p {
            cross += ai * pj;
        }
    }
    let diam = op.amplitude.diam();
    Ok(CaphiReport {
        regime,
        diam,
        amplitude_norms: a,
        phase_norms: p,
        inf,
        value: diam.powf(regime.diam_power()) * (a[0] + cross / (inf * inf)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayConfig {
    pub lambdas: Vec<f64>,
    /// Values of `lambda |s - s'|`.
    pub separations: Vec<f64>,
    /// Pair centres as fractions of the `s` box.
    pub centres: Vec<f64>,
}

impl DecayConfig {
    pub fn for_regime(regime: Regime) -> Self {
        let separations = match regime {
            Regime::Nondegenerate => vec![0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0],
            Regime::Degenerate => vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
        };
        Self {
            lambdas: vec![64.0, 128.0, 256.0, 512.0],
            separations,
            centres: vec![0.4, 0.45, 0.5, 0.55, 0.6],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub lambda: f64,
    /// `sup |K| w(lambda|s-s'|)` over the grid.
    pub m: f64,
    pub s: f64,
    pub s_prime: f64,
    /// `max |K|` over pairs with `lambda |s - s'| <= 1`.
    pub near_max: f64,
    pub max_panels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub regime: Regime,
    pub rows: Vec<DecayRow>,
    /// Largest `|M_{2 lambda} / M_lambda - 1|` over consecutive lambdas.
    pub drift: f64,
    pub stable: bool,
    /// `diam(supp a) ‖a‖_∞^2`.
    pub near_bound: f64,
    pub near_ok: bool,
    pub c_aphi: CaphiReport,
    /// `max M / C_{a,phi}^2`.
    pub m_over_c2: f64,
    pub pass: bool,
}

pub const DRIFT_TOL: f64 = 0.15;
pub const CONSTANT_FACTOR: f64 = 1e3;

/// Largest relative change between consecutive entries.
pub fn relative_drift(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| (w[1] / w[0] - 1.0).abs())
        .fold(0.0, f64::max)
}

pub fn kernel_decay_check(
    phase: Phase,
    amplitude: Amplitude,
    regime: Regime,
    cfg: &DecayConfig,
) -> Result<DecayReport, OscError> {
    let base = OscillatoryOperator::new(
        phase,
        amplitude,
        cfg.lambdas.first().copied().unwrap_or(1.0),
    )?;
    let caphi = c_aphi(&base, regime)?;
    let (s_lo, s_hi) = base.amplitude.s_box;
    let width = s_hi - s_lo;
    let mut rows = Vec::new();
    for &lambda in &cfg.lambdas {
        let op = base.with_lambda(lambda)?;
        let pairs: Vec<(f64, f64, f64)> = cfg
            .centres
            .iter()
            .flat_map(|&c| {
                cfg.separations.iter().filter_map(move |&sep| {
                    let mid = s_lo + c * width;
                    let half = sep / lambda / 2.0;
                    (mid - half >= s_lo && mid + half <= s_hi).then_some((
                        mid - half,
                        mid + half,
                        sep,
                    ))
                })
            })
            .collect();
        let vals: Vec<(KernelValue, f64, f64, f64)> = pairs
            .par_iter()
            .map(|&(s, s2, sep)| ttstar_kernel(&op, s, s2).map(|k| (k, s, s2, sep)))
            .collect::<Result<_, _>>()?;
        let mut row = DecayRow {
            lambda,
            m: 0.0,
            s: f64::NAN,
            s_prime: f64::NAN,
            near_max: 0.0,
            max_panels: 0,
        };
        for (k, s, s2, sep) in vals {
            let mag = k.value.norm();
            let prod = mag * regime.weight(sep);
            if prod > row.m {
                row.m = prod;
                row.s = s;
                row.s_prime = s2;
            }
            if sep <= 1.0 {
                row.near_max = row.near_max.max(mag);
            }
            row.max_panels = row.max_panels.max(k.panels);
        }
        rows.push(row);
    }
    let ms: Vec<f64> = rows.iter().map(|r| r.m).collect();
    let drift = relative_drift(&ms);
    let near_bound = base.amplitude.diam() * base.amplitude.sup_norm().powi(2);
    let near_ok = rows.iter().all(|r| r.near_max <= near_bound + 1e-9);
    let m_over_c2 = ms.iter().cloned().fold(0.0, f64::max) / caphi.value.powi(2);
    let stable = drift <= DRIFT_TOL;
    Ok(DecayReport {
        regime,
        rows,
        drift,
        stable,
        near_bound,
        near_ok,
        c_aphi: caphi,
        m_over_c2,
        pass: stable && near_ok && m_over_c2 <= CONSTANT_FACTOR,
    })
}

// ---------------------------------------------------------------------------
// Operator norms

/// Nodes on the longer side needed for `n >= 8 lambda · support`, rounded up
/// to whole panels; the shorter side gets the same density.
pub fn required_nodes(op: &OscillatoryOperator) -> usize {
    let (t, s) = (op.amplitude.t_box, op.amplitude.s_box);
    let width = (t.1 - t.0).max(s.1 - s.0);
    let n = ((8.0 * op.lambda * width).ceil() as usize).max(60);
    n.div_ceil(GL_ORDER) * GL_ORDER
}

/// Nodes on the `t` and `s` sides when the longer side gets `n`; both are
/// whole panels and keep the same density.
fn side_nodes(a: &Amplitude, n: usize) -> (usize, usize) {
    let (wt, ws) = (a.t_box.1 - a.t_box.0, a.s_box.1 - a.s_box.0);
    let w = wt.max(ws);
    let side = |x: f64| (((n as f64 * x / w).ceil() as usize).max(1)).div_ceil(GL_ORDER) * GL_ORDER;
    (side(wt), side(ws))
}

/// 80M complex entries (1.28 GB), enough for an 8200-node square at lambda = 1024.
const DENSE_CAP: usize = 80_000_000;

enum PhaseMatrix {
    Dense(Vec<Complex64>),
    /// `E_ij = e^{i lambda g_i s_j}` with `s_j = s0 + p h + x_k`.
    Separable {
        g: Vec<f64>,
        s0: f64,
        h: f64,
        offsets: Vec<f64>,
        panels: usize,
    },
}

struct Nystrom {
    rows: Vec<f64>,
    cols: Vec<f64>,
    lambda: f64,
    e: PhaseMatrix,
}

fn panel_nodes(lo: f64, hi: f64, panels: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, f64) {
    let h = (hi - lo) / panels as f64;
    let rule = GaussLegendre::<f64>::new(GL_ORDER);
    let local: Vec<(f64, f64)> = rule.mapped(0.0, h).collect();
    let mut nodes = Vec::with_capacity(panels * GL_ORDER);
    let mut weights = Vec::with_capacity(panels * GL_ORDER);
    for p in 0..panels {
        for &(x, w) in &local {
            nodes.push(lo + p as f64 * h + x);
            weights.push(w);
        }
    }
    (nodes, weights, local.iter().map(|l| l.0).collect(), h)
}

fn rotations(offsets: &[f64], w: f64) -> ([f64; GL_ORDER], [f64; GL_ORDER]) {
    let mut re = [0.0; GL_ORDER];
    let mut im = [0.0; GL_ORDER];
    for (k, &x) in offsets.iter().enumerate() {
        let (sn, cs) = (w * x).sin_cos();
        re[k] = cs;
        im[k] = sn;
    }
    (re, im)
}

#[inline]
fn panel_dot(ir: &[f64; GL_ORDER], ii: &[f64; GL_ORDER], yr: &[f64], yi: &[f64]) -> (f64, f64) {
    let (yr, yi) = (&yr[..GL_ORDER], &yi[..GL_ORDER]);
    let mut pr = 0.0;
    let mut pi = 0.0;
    for k in 0..GL_ORDER {
        pr += ir[k] * yr[k] - ii[k] * yi[k];
        pi += ir[k] * yi[k] + ii[k] * yr[k];
    }
    (pr, pi)
}

#[inline]
fn panel_axpy(
    ir: &[f64; GL_ORDER],
    ii: &[f64; GL_ORDER],
    x: Complex64,
    or: &mut [f64],
    oi: &mut [f64],
) {
    let (or, oi) = (&mut or[..GL_ORDER], &mut oi[..GL_ORDER]);
    for k in 0..GL_ORDER {
        or[k] += ir[k] * x.re - ii[k] * x.im;
        oi[k] += ir[k] * x.im + ii[k] * x.re;
    }
}

impl Nystrom {
    fn new(op: &OscillatoryOperator, n: usize) -> Result<Self, OscError> {
        let a = &op.amplitude;
        let (nt, ns) = side_nodes(a, n);
        let (t_nodes, t_w, _, _) = panel_nodes(a.t_box.0, a.t_box.1, nt / GL_ORDER);
        let (s_nodes, s_w, offsets, h) = panel_nodes(a.s_box.0, a.s_box.1, ns / GL_ORDER);
        let panels = ns / GL_ORDER;
        let rows: Vec<f64> = t_nodes
            .iter()
            .zip(&t_w)
            .map(|(&t, &w)| w.sqrt() * a.t_part(t))
            .collect();
        let cols: Vec<f64> = s_nodes
            .iter()
            .zip(&s_w)
            .map(|(&s, &w)| w.sqrt() * a.s_part(s))
            .collect();
        let e = match op.phase.separable_factor() {
            Some(g) => PhaseMatrix::Separable {
                g: t_nodes.iter().map(|&t| g(t)).collect(),
                s0: a.s_box.0,
                h,
                offsets,
                panels,
            },
            None => {
                let entries = t_nodes.len() * s_nodes.len();
                if entries > DENSE_CAP {
                    return Err(OscError::TooLarge { entries });
                }
                let m = s_nodes.len();
                let e: Vec<Complex64> = (0..entries)
                    .into_par_iter()
                    .map(|k| {
                        op.phase
                            .value(t_nodes[k / m], s_nodes[k % m])
                            .map(|p| Complex64::from_polar(1.0, op.lambda * p))
                    })
                    .collect::<Result<_, _>>()?;
                PhaseMatrix::Dense(e)
            }
        };
        Ok(Self {
            rows,
            cols,
            lambda: op.lambda,
            e,
        })
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let y: Vec<Complex64> = v.iter().zip(&self.cols).map(|(x, c)| x * c).collect();
        let m = self.cols.len();
        let (yr, yi): (Vec<f64>, Vec<f64>) = y.iter().map(|z| (z.re, z.im)).unzip();
        let row_sum = |i: usize| -> Complex64 {
            match &self.e {
                PhaseMatrix::Dense(e) => e[i * m..(i + 1) * m]
                    .iter()
                    .zip(&y)
                    .map(|(a, b)| a * b)
                    .sum(),
                PhaseMatrix::Separable {
                    g,
                    s0,
                    h,
                    offsets,
                    panels,
                } => {
                    let w = self.lambda * g[i];
                    let (ir, ii) = rotations(offsets, w);
                    let step = Complex64::from_polar(1.0, w * h);
                    let mut z = Complex64::new(0.0, 0.0);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for p in 0..*panels {
                        if p % 64 == 0 {
                            z = Complex64::from_polar(1.0, w * (s0 + p as f64 * h));
                        }
                        let r = p * GL_ORDER..(p + 1) * GL_ORDER;
                        let (pr, pi) = panel_dot(&ir, &ii, &yr[r.clone()], &yi[r]);
                        acc += z * Complex64::new(pr, pi);
                        z *= step;
                    }
                    acc
                }
            }
        };
        (0..self.rows.len())
            .into_par_iter()
            .map(|i| {
                if self.rows[i] == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    self.rows[i] * row_sum(i)
                }
            })
            .collect()
    }

    fn apply_adjoint(&self, u: &[Complex64]) -> Vec<Complex64> {
        let m = self.cols.len();
        let mut out_r = vec![0.0; m];
        let mut out_i = vec![0.0; m];
        for (i, (&r, &ui)) in self.rows.iter().zip(u).enumerate() {
            let x = ui * r;
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            match &self.e {
                PhaseMatrix::Dense(e) => {
                    for ((or, oi), a) in out_r
                        .iter_mut()
                        .zip(out_i.iter_mut())
                        .zip(&e[i * m..(i + 1) * m])
                    {
                        let v = a.conj() * x;
                        *or += v.re;
                        *oi += v.im;
                    }
                }
                PhaseMatrix::Separable {
                    g,
                    s0,
                    h,
                    offsets,
                    panels,
                } => {
                    let w = -self.lambda * g[i];
                    let (ir, ii) = rotations(offsets, w);
                    let step = Complex64::from_polar(1.0, w * h);
                    let mut z = Complex64::new(0.0, 0.0);
                    for p in 0..*panels {
                        if p % 64 == 0 {
                            z = Complex64::from_polar(1.0, w * (s0 + p as f64 * h));
                        }
                        let zx = z * x;
                        let r = p * GL_ORDER..(p + 1) * GL_ORDER;
                        panel_axpy(&ir, &ii, zx, &mut out_r[r.clone()], &mut out_i[r]);
                        z *= step;
                    }
                }
            }
        }
        out_r
            .into_iter()
            .zip(out_i)
            .zip(&self.cols)
            .map(|((re, im), c)| Complex64::new(re * c, im * c))
            .collect()
    }

    fn dense(&self) -> Vec<Complex64> {
        let m = self.cols.len();
        let mut out = Vec::with_capacity(self.rows.len() * m);
        for i in 0..self.rows.len() {
            let mut e = vec![Complex64::new(0.0, 0.0); self.rows.len()];
            e[i] = Complex64::new(1.0, 0.0);
            // row i of M is e_i^* M, i.e. the conjugate of M^* e_i
            out.extend(self.apply_adjoint(&e).into_iter().map(|z| z.conj()));
        }
        out
    }
}

/// The quadrature-weighted Nyström matrix (row-major, `n_t × n_s`), for
/// external oracles.
pub fn nystrom_matrix(
    op: &OscillatoryOperator,
    n: usize,
) -> Result<(usize, usize, Vec<Complex64>), OscError> {
    let ny = Nystrom::new(op, n)?;
    Ok((ny.rows.len(), ny.cols.len(), ny.dense()))
}

/// Number of eigenvalues of the symmetric tridiagonal `(d, e)` below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix.
pub fn tridiagonal_eigenvalue(d: &[f64], e: &[f64], k: usize) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..d.len() {
        let r =
            if i > 0 { e[i - 1].abs() } else { 0.0 } + if i < e.len() { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Last component of the unit eigenvector of the tridiagonal `(d, e)` for
/// the eigenvalue `theta`, by two steps of inverse iteration.
fn tridiagonal_last_component(d: &[f64], e: &[f64], theta: f64) -> f64 {
    let n = d.len();
    if n == 1 {
        return 1.0;
    }
    let shift = theta + 1e-12 * theta.abs().max(f64::MIN_POSITIVE);
    let mut y = vec![1.0; n];
    for _ in 0..2 {
        // Thomas algorithm on (T - shift) x = y
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        let mut piv = d[0] - shift;
        c[0] = if n > 1 { e[0] / piv } else { 0.0 };
        r[0] = y[0] / piv;
        for i in 1..n {
            piv = d[i] - shift - e[i - 1] * c[i - 1];
            if piv == 0.0 {
                piv = f64::MIN_POSITIVE;
            }
            c[i] = if i + 1 < n { e[i] / piv } else { 0.0 };
            r[i] = (y[i] - e[i - 1] * r[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            r[i] -= c[i] * r[i + 1];
        }
        let len = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        y = r.iter().map(|v| v / len).collect();
    }
    y[n - 1]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OpNorm {
    pub lambda: f64,
    pub value: f64,
    pub n_t: usize,
    pub n_s: usize,
    pub iterations: usize,
    /// Smallest Ritz value of the discretized `T* T`.
    pub min_ritz: f64,
    pub psd: bool,
}

const LANCZOS_CAP: usize = 400;
/// Stop once the Ritz residual `beta_k |y_k|` is below this fraction of the
/// top Ritz value: an eigenvalue of `M* M` then lies that close, so the
/// singular value is good to half that.
const LANCZOS_TOL: f64 = 1e-6;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value of the Nyström discretization of `T_lambda`, from
/// Lanczos on `M* M` with full reorthogonalization.
pub fn opnorm(op: &OscillatoryOperator, n: usize) -> Result<OpNorm, OscError> {
    let needed = required_nodes(op);
    if n < needed {
        return Err(OscError::Underresolved { n, needed });
    }
    let ny = Nystrom::new(op, n)?;
    let m = ny.cols.len();
    let mut q: Vec<Complex64> = (0..m)
        .map(|j| {
            Complex64::new(
                1.0 + 0.5 * (j as f64 * 0.7).sin(),
                0.3 * (j as f64 * 1.3).cos(),
            )
        })
        .collect();
    let q_norm = norm(&q);
    q.iter_mut().for_each(|z| *z /= q_norm);
    let mut basis: Vec<Vec<Complex64>> = vec![q];
    let (mut d, mut e) = (Vec::new(), Vec::new());
    let mut theta = 0.0;
    let mut change = f64::INFINITY;
    for k in 0..LANCZOS_CAP.min(m) {
        let mut w = ny.apply_adjoint(&ny.apply(&basis[k]));
        let alpha = dot(&basis[k], &w).re;
        d.push(alpha);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let next = tridiagonal_eigenvalue(&d, &e, d.len() - 1);
        change = (next - theta).abs() / next.abs().max(f64::MIN_POSITIVE);
        theta = next;
        let beta = norm(&w);
        let residual = beta * tridiagonal_last_component(&d, &e, theta).abs();
        let done = beta <= 1e-14 * theta.abs().max(f64::MIN_POSITIVE)
            || (k >= 2 && residual <= LANCZOS_TOL * theta);
        if done || k + 1 == m {
            let min_ritz = tridiagonal_eigenvalue(&d, &e, 0);
            return Ok(OpNorm {
                lambda: op.lambda,
                value: theta.max(0.0).sqrt(),
                n_t: ny.rows.len(),
                n_s: m,
                iterations: k + 1,
                min_ritz,
                psd: min_ritz >= -1e-9 * theta.abs(),
            });
        }
        e.push(beta);
        w.iter_mut().for_each(|z| *z /= beta);
        basis.push(w);
    }
    Err(OscError::LanczosNotConverged {
        iterations: LANCZOS_CAP.min(m),
        change,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub norms: Vec<OpNorm>,
    pub fit: LineFit,
}

impl ScalingReport {
    pub fn slope(&self) -> f64 {
        self.fit.slope
    }
}

/// Fewest frequencies `norm_scaling_fit` accepts.
pub const MIN_FIT_LAMBDAS: usize = 5;

/// Least-squares slope of `log opnorm` against `log lambda`, each norm at
/// the minimal resolving node count.
pub fn norm_scaling_fit(
    phase: Phase,
    amplitude: Amplitude,
    lambdas: &[f64],
) -> Result<ScalingReport, OscError> {
    if lambdas.len() < MIN_FIT_LAMBDAS {
        return Err(OscError::TooFewLambdas {
            needed: MIN_FIT_LAMBDAS,
            got: lambdas.len(),
        });
    }
    let base = OscillatoryOperator::new(phase, amplitude, lambdas[0])?;
    let norms: Vec<OpNorm> = lambdas
        .iter()
        .map(|&l| {
            let op = base.with_lambda(l)?;
            opnorm(&op, required_nodes(&op))
        })
        .collect::<Result<_, _>>()?;
    let fit = log_log_slope(
        lambdas,
        &norms.iter().map(|n| n.value).collect::<Vec<_>>(),
        5,
    )?;
    Ok(ScalingReport { norms, fit })
}

// ---------------------------------------------------------------------------
// Flat model kernels

/// `∫_{S^1} e^{i x ω_1} dω` (equal to `2π J_0(x)`) by the periodic
/// trapezoid rule with `2⌈|x|⌉ + 64` nodes; `NaN` for non-finite `x`.
pub fn circle_kernel(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let x = x.abs();
    let n = 2 * (x.ceil() as usize) + 64;
    let h = TAU / n as f64;
    // nodes θ and 2π - θ contribute equally
    let half = n / 2;
    let mut acc = (x).cos() + (-x).cos();
    for k in 1..half {
        acc += 2.0 * (x * (k as f64 * h).cos()).cos();
    }
    acc * h
}

/// Half-width of the time bump `rho` in the model symbol.
pub const MODEL_T_HALF_WIDTH: f64 = 2.0;
/// `|l - lambda|` beyond which `rho-hat(l - lambda)` is dropped.
pub const MODEL_XI_CUTOFF: f64 = 200.0;
const MODEL_XI_PANELS: usize = 400;

/// Littlewood–Paley bump: 1 on `[1/2, 2]`, 0 outside `[1/4, 4]`.
pub fn lp_bump(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let l = x.log2();
    smooth_step(l + 2.0) * smooth_step(2.0 - l)
}

fn rho_hat(xi: f64) -> f64 {
    let w = MODEL_T_HALF_WIDTH;
    let panels = 16 + (xi.abs() * 2.0 * w / TAU).ceil() as usize;
    Composite::<f64>::new(GL_ORDER, panels).integrate(-w, w, |t| (xi * t).cos() * bump(t / w))
}

/// `(xi, weight, rho-hat(xi))` on the `l - lambda` grid; independent of `lambda`.
fn rho_hat_table() -> &'static [(f64, f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        Composite::<f64>::new(GL_ORDER, MODEL_XI_PANELS)
            .points(-MODEL_XI_CUTOFF, MODEL_XI_CUTOFF)
            .into_par_iter()
            .map(|(xi, w)| (xi, w, rho_hat(xi)))
            .collect()
    })
}

/// `|K_lambda(delta)|` for the symbol `alpha = rho(t) beta(l / lambda)`:
/// `K = ∫ rho-hat(l - lambda) beta(l / lambda) circle_kernel(l delta) l dl`,
/// with `rho` a bump on `[-2, 2]` and `beta` the Littlewood–Paley bump.
/// `delta = 0` gives the diagonal value.
pub fn model_restriction_kernel(lambda: f64, delta: f64) -> Result<f64, OscError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(OscError::BadLambda(lambda));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(OscError::BadDelta(delta));
    }
    let mut acc = 0.0;
    for &(xi, w, rh) in rho_hat_table() {
        let l = lambda + xi;
        let b = lp_bump(l / lambda);
        if b == 0.0 {
            continue;
        }
        acc += w * rh * b * circle_kernel(l * delta) * l;
    }
    Ok(acc.abs())
}

/// `sup λ^{-1/2} δ'^{1/2} |K_λ(δ')|` over one oscillation period of
/// `cos(λδ')`: `[δ, δ + 2π/λ]`, shifted left to end at 1 when needed.
/// Grid of 12 steps, then golden-section polish around the best one.
pub fn model_kernel_envelope(lambda: f64, delta: f64) -> Result<f64, OscError> {
    let period = TAU / lambda;
    let lo = delta.min(1.0 - period).max(f64::MIN_POSITIVE);
    let hi = (lo + period).min(1.0);
    let f = |d: f64| -> Result<f64, OscError> {
        Ok((d / lambda).sqrt() * model_restriction_kernel(lambda, d)?)
    };
    let steps = 12;
    let h = (hi - lo) / steps as f64;
    let mut best = (f64::NEG_INFINITY, lo);
    for k in 0..=steps {
        let d = lo + h * k as f64;
        let v = f(d)?;
        if v > best.0 {
            best = (v, d);
        }
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((best.1 - h).max(lo), (best.1 + h).min(hi));
    for _ in 0..20 {
        let (x1, x2) = (b - g * (b - a), a + g * (b - a));
        if f(x1)? >= f(x2)? {
            b = x2;
        } else {
            a = x1;
        }
    }
    Ok(best.0.max(f(0.5 * (a + b))?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnvelopeRow {
    pub lambda: f64,
    pub delta: f64,
    pub envelope: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NearRow {
    pub lambda: f64,
    /// `sup_{delta <= 1/lambda} |K_lambda| / lambda`.
    pub constant: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JointRow {
    pub lambda: f64,
    pub delta: f64,
    pub kernel: f64,
    /// `|K| (lambda delta)^{1/2} / lambda`.
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelKernelReport {
    pub envelopes: Vec<EnvelopeRow>,
    /// Worst drift of the envelope across lambdas at a common delta.
    pub envelope_drift: f64,
    pub near: Vec<NearRow>,
    pub near_drift: f64,
    pub joint: Vec<JointRow>,
    pub joint_drift: f64,
    pub pass: bool,
}

pub const MODEL_DELTAS: [f64; 6] = [1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0, 1.0];

/// Envelope stability on `delta in [4/lambda, 1]`, the near-diagonal
/// `O(lambda)` constant, and the joint rescaling at `lambda delta = 8`.
pub fn model_kernel_check(lambdas: &[f64]) -> Result<ModelKernelReport, OscError> {
    let lam_min = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let deltas: Vec<f64> = MODEL_DELTAS
        .iter()
        .cloned()
        .filter(|&d| d >= 4.0 / lam_min)
        .collect();
    let jobs: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| deltas.iter().map(move |&d| (l, d)))
        .collect();
    let envelopes: Vec<EnvelopeRow> = jobs
        .par_iter()
        .map(|&(lambda, delta)| {
            model_kernel_envelope(lambda, delta).map(|envelope| EnvelopeRow {
                lambda,
                delta,
                envelope,
            })
        })
        .collect::<Result<_, _>>()?;
    let envelope_drift = deltas
        .iter()
        .map(|&d| {
            let v: Vec<f64> = envelopes
                .iter()
                .filter(|r| r.delta == d)
                .map(|r| r.envelope)
                .collect();
            relative_drift(&v)
        })
        .fold(0.0, f64::max);
    let near: Vec<NearRow> = lambdas
        .iter()
        .map(|&lambda| {
            let mut c = 0.0f64;
            for k in 0..=8 {
                c = c.max(model_restriction_kernel(lambda, k as f64 / 8.0 / lambda)? / lambda);
            }
            Ok(NearRow {
                lambda,
                constant: c,
            })
        })
        .collect::<Result<_, OscError>>()?;
    let near_drift = relative_drift(&near.iter().map(|r| r.constant).collect::<Vec<_>>());
    let joint: Vec<JointRow> = lambdas
        .iter()
        .map(|&lambda| {
            let delta = 8.0 / lambda;
            let kernel = model_restriction_kernel(lambda, delta)?;
            Ok(JointRow {
                lambda,
                delta,
                kernel,
                normalized: kernel * (lambda * delta).sqrt() / lambda,
            })
        })
        .collect::<Result<_, OscError>>()?;
    let joint_drift = relative_drift(&joint.iter().map(|r| r.normalized).collect::<Vec<_>>());
    Ok(ModelKernelReport {
        pass: envelope_drift <= DRIFT_TOL && near_drift <= DRIFT_TOL && joint_drift <= DRIFT_TOL,
        envelopes,
        envelope_drift,
        near,
        near_drift,
        joint,
        joint_drift,
    })
}

/// `2π J_0` envelope constant: `2π sqrt(2/π) ≈ 5.013`.
pub fn circle_envelope_constant() -> f64 {
    TAU * (2.0 / PI).sqrt()
}

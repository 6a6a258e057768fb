//! Operator norms and kernels against independent evaluations.

use georestrict::oscquad::{nystrom_matrix, EXTREMA_DEPTH, EXTREMA_GRID};
use georestrict::quadrature::Composite;
use georestrict::*;
use nalgebra::DMatrix;
use num_complex::Complex64;

fn circle_op(lambda: f64) -> OscillatoryOperator {
    let c = PhaseCase::circle(1.5, 1.0).unwrap();
    OscillatoryOperator::new(Phase::Geometric(c), Amplitude::bump((0.0, 1.0), (0.0, 1.0)).unwrap(), lambda).unwrap()
}

fn svd_norm(op: &OscillatoryOperator, n: usize) -> f64 {
    let (rows, cols, data) = nystrom_matrix(op, n).unwrap();
    let m = DMatrix::<Complex64>::from_row_slice(rows, cols, &data);
    m.singular_values().max()
}

#[test]
fn lanczos_norm_matches_dense_svd() {
    let cases = [
        OscillatoryOperator::new(Phase::Product, Amplitude::bump((0.0, 1.0), (0.0, 1.0)).unwrap(), 16.0).unwrap(),
        OscillatoryOperator::new(Phase::Fold, Amplitude::bump((-0.5, 1.5), (0.0, 1.0)).unwrap(), 12.0).unwrap(),
        circle_op(20.0),
    ];
    for op in &cases {
        let n = oscquad::required_nodes(op);
        assert!(n <= 256, "{n}");
        let lanczos = opnorm(op, n).unwrap();
        let oracle = svd_norm(op, n);
        let rel = (lanczos.value - oracle).abs() / oracle;
        assert!(rel <= 1e-6, "{:?}: lanczos {} svd {oracle}", op.phase, lanczos.value);
        assert!(lanczos.psd, "min Ritz {}", lanczos.min_ritz);
    }
}

#[test]
fn norm_is_stable_under_node_doubling() {
    let op = circle_op(16.0);
    let n = oscquad::required_nodes(&op);
    let (a, b) = (opnorm(&op, n).unwrap().value, opnorm(&op, 2 * n).unwrap().value);
    assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
}

/// Brute-force `K(s, s')` with a fixed, generous panel count.
fn kernel_by_brute_force(op: &OscillatoryOperator, s: f64, s2: f64) -> Complex64 {
    let (lo, hi) = op.amplitude.t_box;
    let bs = op.amplitude.s_part(s) * op.amplitude.s_part(s2);
    Composite::<f64>::new(20, 400)
        .points(lo, hi)
        .into_iter()
        .map(|(t, w)| {
            let d = op.phase.value(t, s).unwrap() - op.phase.value(t, s2).unwrap();
            Complex64::from_polar(w * op.amplitude.t_part(t).powi(2) * bs, op.lambda * d)
        })
        .sum()
}

#[test]
fn kernel_matches_brute_force_and_trivial_bound() {
    let ops = [
        circle_op(64.0),
        OscillatoryOperator::new(Phase::Fold, Amplitude::bump((-1.5, 2.5), (-1.5, 2.5)).unwrap(), 64.0).unwrap(),
    ];
    for op in &ops {
        let bound = op.amplitude.diam() * op.amplitude.sup_norm().powi(2) + 1e-9;
        let (lo, hi) = op.amplitude.s_box;
        let s: Vec<f64> = (1..8).map(|k| lo + (hi - lo) * k as f64 / 8.0).collect();
        for &a in &s {
            for &b in &s {
                let k = ttstar_kernel(op, a, b).unwrap();
                let brute = kernel_by_brute_force(op, a, b);
                assert!((k.value - brute).norm() <= 1e-8 * k.scale.max(1e-300), "{a} {b}: {} vs {brute}", k.value);
                assert!(k.value.norm() <= bound);
            }
        }
        let grid = KernelGrid::compute(op, &s).unwrap();
        assert!(grid.hermitian_defect() <= 1e-9);
    }
}

/// The ingredients of `C_{a,phi}` for a geometric phase equal the bound
/// scan's extrema over the same box.
#[test]
fn caphi_ingredients_match_bound_scan() {
    let case = PhaseCase::circle(1.5, 1.0).unwrap();
    let s_box = (-0.5, 1.0);
    let op = OscillatoryOperator::new(Phase::Geometric(case), Amplitude::bump((0.0, 1.0), s_box).unwrap(), 8.0).unwrap();
    let scan = scan_extrema_in(&case, 5.0, &[s_box], EXTREMA_GRID, EXTREMA_DEPTH).unwrap();
    let report = c_aphi(&op, Regime::Nondegenerate).unwrap();
    let pairs = [
        (report.inf, scan.log_inf_st.value),
        (report.phase_norms[0], scan.log_sup_st.value),
        (report.phase_norms[1], scan.log_sup_stt.value),
        (report.phase_norms[2], scan.log_sup_sttt.value),
    ];
    for (ours, log_scan) in pairs {
        let theirs = log_scan.exp();
        assert!((ours - theirs).abs() <= 1e-6 * theirs, "{ours} vs {theirs}");
    }
    assert!(report.value.is_finite() && report.value > 0.0);
}

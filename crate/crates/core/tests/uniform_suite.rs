//! Heat-kernel majorants against the closed-form Fourier data of the free
//! circle, plus the edge-comparison inequality over sampled phases.

use std::f64::consts::PI;

use graphscape::cases;
use graphscape::eigensolver::SolverConfig;
use graphscape::quad::adaptive_simpson;
use graphscape::spectral::{assemble, solve_eigs};
use graphscape::uniform::{cluster_bound, heat_majorant, theta3};

#[test]
fn free_circle_majorant_matches_fourier_series() {
    // p_hat(t, arc) = 1/(2 pi) + sum_n 2 e^{-n^2 t} / pi: every mode has
    // sup 1/sqrt(pi) on an arc of length pi
    let data = cases::circle_free(2.0 * PI).unwrap();
    let ham = assemble(&data.graph, &data.potential, PI / 256.0).unwrap();
    let pairs = solve_eigs(&data.graph, &ham, 41, &SolverConfig::default()).unwrap();
    for t in [0.5, 1.0, 10.0] {
        let maj = heat_majorant(&data.graph, &pairs, t, 1e-10).unwrap();
        let mut oracle = 1.0 / (2.0 * PI);
        let mut n = 1;
        loop {
            let term = 2.0 * (-((n * n) as f64) * t).exp() / PI;
            oracle += term;
            if term < 1e-16 {
                break;
            }
            n += 1;
        }
        for side in &maj.graph_side {
            assert!(
                (side - oracle).abs() < 2e-3 * oracle,
                "t = {t}: {side} vs fourier {oracle}"
            );
        }
        // decoupled side: theta_3(exp(-(pi/|e|)^2 t))/|e| with |e| = pi
        let edge_expect = theta3((-t).exp(), 1e-13) / PI;
        for side in &maj.edge_side {
            assert!((side - edge_expect).abs() < 1e-10 * edge_expect);
        }
        // the summed comparison with factor 3/2
        assert!(maj.sum_graph_side() <= 1.5 * maj.sum_edge_side() + 1e-12);
    }
}

#[test]
fn majorant_long_time_limits() {
    let data = cases::circle_free(2.0 * PI).unwrap();
    let ham = assemble(&data.graph, &data.potential, PI / 256.0).unwrap();
    let pairs = solve_eigs(&data.graph, &ham, 11, &SolverConfig::default()).unwrap();
    let maj = heat_majorant(&data.graph, &pairs, 50.0, 1e-12).unwrap();
    // graph side -> 1/|Gamma|, decoupled side -> 1/|e|; strict inequality
    for side in &maj.graph_side {
        assert!((side - 1.0 / (2.0 * PI)).abs() < 1e-12);
    }
    for side in &maj.edge_side {
        assert!((side - 1.0 / PI).abs() < 1e-12);
    }
    assert!(maj.sum_graph_side() < 1.5 * maj.sum_edge_side());
}

#[test]
fn majorant_insufficient_spectrum_is_reported() {
    let data = cases::circle_free(2.0 * PI).unwrap();
    let ham = assemble(&data.graph, &data.potential, PI / 64.0).unwrap();
    let pairs = solve_eigs(&data.graph, &ham, 3, &SolverConfig::default()).unwrap();
    // at t = 0.05 three modes leave a visible tail
    assert!(matches!(
        heat_majorant(&data.graph, &pairs, 0.05, 1e-10),
        Err(graphscape::error::Error::InsufficientSpectrum { .. })
    ));
}

#[test]
fn cosine_l2_vs_sup_comparison_over_phases() {
    // for sqrt(E) |e| >= pi the phase-independent comparison
    // int cos^2 >= (|e|/2)(1 - |sin(sqrt(E)|e|)|/(sqrt(E)|e|))
    // holds for every phase; the unsigned-sine form holds whenever
    // sin(sqrt(E)|e|) >= 0 (it overstates the bound otherwise)
    for (energy, len) in [(1.0, PI), (2.0, 4.0), (9.0, 2.0), (15.421, 2.0)] {
        let e: f64 = energy;
        let k = e.sqrt();
        assert!(k * len >= PI - 1e-12);
        let kl = k * len;
        let rhs_abs = (len / 2.0) * (1.0 - kl.sin().abs() / kl);
        let rhs_signed = (len / 2.0) * (1.0 - kl.sin() / kl);
        for i in 0..32 {
            let phi = 2.0 * PI * i as f64 / 32.0;
            let f = |x: f64| (k * x - phi).cos().powi(2);
            let lhs = adaptive_simpson(&f, 0.0, len, 1e-12);
            assert!(
                lhs >= rhs_abs - 1e-10,
                "E={energy} len={len} phi={phi}: {lhs} < {rhs_abs}"
            );
            if kl.sin() >= 0.0 {
                assert!(lhs >= rhs_signed - 1e-10);
            }
        }
    }
}

#[test]
fn cluster_sums_below_the_explicit_constant() {
    // first ten eigenpairs of the cosine circle and the free circle
    for name in ["mathieu-circle", "circle-free"] {
        let mut params = std::collections::BTreeMap::new();
        params.insert("q".to_string(), 10.0);
        let data = cases::build_case_study(name, &params).unwrap();
        let ham = assemble(&data.graph, &data.potential, PI / 256.0).unwrap();
        let pairs = solve_eigs(&data.graph, &ham, 10, &SolverConfig::default()).unwrap();
        let cb = cluster_bound(&data.graph, &pairs, pairs[9].energy, 0.0);
        for (e, lhs) in cb.lhs_per_edge.iter().enumerate() {
            assert!(
                *lhs <= cb.rhs_sqrt,
                "{name} edge {e}: cluster sum {lhs} vs bound {}",
                cb.rhs_sqrt
            );
            assert!(*lhs <= cb.rhs_refined_per_edge[e]);
        }
    }
}

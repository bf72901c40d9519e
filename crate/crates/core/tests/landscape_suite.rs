//! Supersolution assembly, maximum-principle bounds, the quadratic-form
//! inequality, and the reciprocal-weight extension.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use graphscape::cases;
use graphscape::eigensolver::SolverConfig;
use graphscape::error::Error;
use graphscape::graph::{EdgeId, GraphBuilder, GraphPoint, VertexId};
use graphscape::potential::{EdgePotential, PotentialField};
use graphscape::spectral::{assemble, solve_eigs};
use graphscape::torsion::{
    assemble_landscape, fit_minorant, gaussian_interval_piece, max_principle_envelope,
    star_piece, torsion_agmon_extension, QuadraticMinorant,
};
use graphscape::verify::{boggio_slack, check_domination, kirchhoff_test_function, w_max_split};

#[test]
fn single_piece_is_used_verbatim_with_zero_constant() {
    let mut b = GraphBuilder::new();
    let u = b.add_vertex("u");
    let v = b.add_vertex("v");
    b.add_edge(u, v, 2.0);
    let g = b.build().unwrap();
    let pot = PotentialField::new(
        &g,
        vec![EdgePotential::Quadratic {
            c0: 4.0,
            c1: -4.0,
            c2: 4.0, // 4 + 4 (s-1)^2 - 4 s ... = 4(s-1)^2 + s-free form
        }],
    )
    .unwrap();
    // V(s) = 4 - 4s + 4 s^2 = 4 (s - 1/2)^2 + 3
    let m = fit_minorant(&|s: f64| 4.0 - 4.0 * s + 4.0 * s * s, 0.0, 2.0, 0.5);
    let piece = gaussian_interval_piece(EdgeId(0), &m).unwrap();
    let land = assemble_landscape(&g, &pot, &[piece.clone()]).unwrap();
    assert_eq!(land.c0, 0.0, "supersolution holds without a constant");
    assert!(land.worst_slack >= -1e-8);
    // the assembled function equals the raw piece profile
    let amp = match piece.profile {
        graphscape::torsion::PieceProfile::Gaussian { amp, .. } => amp,
        _ => unreachable!(),
    };
    for i in 0..=16 {
        let s = 2.0 * i as f64 / 16.0;
        let u = s - 0.5;
        let expect = amp * (0.5 + (-m.b * u * u / 2.0).exp());
        let got = land.eval(GraphPoint::new(EdgeId(0), s)).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect.max(1.0));
    }
    // boundary: the two edge ends
    assert_eq!(land.boundary.len(), 2);
}

#[test]
fn mathieu_cover_is_certified_and_c1() {
    let data = cases::mathieu_circle(10.0).unwrap();
    let pieces = cases::mathieu_torsion_pieces(&data, 0.35).unwrap();
    assert_eq!(pieces.len(), 4); // two wells + two caps
    let land = assemble_landscape(&data.graph, &data.potential, &pieces).unwrap();
    assert!(land.worst_slack >= -1e-8, "slack {}", land.worst_slack);
    assert!(land.boundary.is_empty(), "a closed cover has no boundary");
    assert!(land.min_value() > 0.0);
    // outgoing derivative sums vanish at both vertices (symmetric caps)
    for &(v, sum) in &land.vertex_outgoing_sums {
        assert!(sum.abs() <= 1e-8, "vertex {v:?}: outgoing sum {sum}");
    }
    // continuity and first-derivative continuity across junctions
    for e in data.graph.edges() {
        for &cut in &[0.35, PI - 0.35] {
            let below = GraphPoint::new(e.id, cut - 1e-7);
            let above = GraphPoint::new(e.id, cut + 1e-7);
            let jump = land.eval(below).unwrap() - land.eval(above).unwrap();
            assert!(jump.abs() < 1e-5, "value jump {jump} at {cut}");
            let djump = land.deriv(below).unwrap() - land.deriv(above).unwrap();
            assert!(djump.abs() < 1e-3, "derivative jump {djump} at {cut}");
        }
    }
}

#[test]
fn mathieu_max_principle_dominates_both_parity_states() {
    let data = cases::mathieu_circle(10.0).unwrap();
    let pieces = cases::mathieu_torsion_pieces(&data, 0.35).unwrap();
    let land = assemble_landscape(&data.graph, &data.potential, &pieces).unwrap();
    let ham = assemble(&data.graph, &data.potential, PI / 512.0).unwrap();
    let pairs = solve_eigs(&data.graph, &ham, 2, &SolverConfig::default()).unwrap();
    for pair in &pairs {
        let env = max_principle_envelope(&data.graph, &land, pair.energy, pair.linf_norm(), &[])
            .unwrap();
        let report = check_domination(&data.graph, pair, &env, 512);
        assert!(
            report.pass,
            "E = {}: worst margin {} at {:?}",
            pair.energy, report.worst_margin, report.worst_at
        );
    }
}

#[test]
fn square_well_bound_matches_paper_closed_form() {
    let data = cases::square_well_star(1, 25.0, 8.0).unwrap();
    let pair = cases::square_well_eigenpair(&data, 512);
    let energy = pair.energy;
    let (land, shifted_energy) = cases::square_well_torsion(&data).unwrap();
    assert_eq!(land.c0, 0.0);
    assert!((shifted_energy - 2.0 * energy).abs() < 1e-12);
    // boundary values: |psi| at the two junction vertices
    let psi_sup = pair.linf_on_edge(EdgeId(0));
    let boundary_vals: Vec<f64> = land
        .boundary
        .iter()
        .map(|&p| pair.value(p).abs())
        .collect();
    assert_eq!(boundary_vals.len(), 2);
    let env =
        max_principle_envelope(&data.graph, &land, shifted_energy, psi_sup, &boundary_vals)
            .unwrap();
    // closed form: max(psi(1) + 2 sqrt(E)(e^{-sqrt(E) x^2/2} - e^{-sqrt(E)/2}) sup,
    //                  sqrt(E)(1 + 2 e^{-sqrt(E) x^2/2}) sup)
    let b = energy.sqrt();
    let psi1 = boundary_vals[0];
    for i in 0..=32 {
        let s = 2.0 * i as f64 / 32.0;
        let x = s - 1.0;
        let first = psi1 + 2.0 * b * ((-b * x * x / 2.0).exp() - (-b / 2.0).exp()) * psi_sup;
        let second = b * (1.0 + 2.0 * (-b * x * x / 2.0).exp()) * psi_sup;
        let expect = first.max(second);
        let got = env.eval(GraphPoint::new(EdgeId(0), s)).unwrap();
        assert!(
            (got - expect).abs() < 1e-9 * expect,
            "s = {s}: {got} vs {expect}"
        );
    }
    // and it dominates the eigenfunction on the wells
    let report = check_domination(&data.graph, &pair, &env, 512);
    assert!(report.pass, "worst margin {}", report.worst_margin);
}

#[test]
fn max_principle_soundness_square_well() {
    // W = |psi| - E_shifted psi_sup T attains its maximum on the boundary
    let data = cases::square_well_star(3, 25.0, 8.0).unwrap();
    let pair = cases::square_well_eigenpair(&data, 512);
    let (land, shifted_energy) = cases::square_well_torsion(&data).unwrap();
    let psi_sup = pair.linf_norm();
    let _ = shifted_energy;
    let (interior, boundary) = w_max_split(&data.graph, &pair, &land, psi_sup, 1024);
    // the maximum principle controls the positive part: any positive
    // interior value must be matched on the boundary
    assert!(
        interior <= boundary.max(0.0) + 1e-6,
        "interior max {interior} exceeds boundary max {boundary}"
    );
}

#[test]
fn zero_energy_envelope_is_boundary_only() {
    let data = cases::square_well_star(1, 25.0, 8.0).unwrap();
    let (land, _) = cases::square_well_torsion(&data).unwrap();
    let env = max_principle_envelope(&data.graph, &land, 0.0, 1.0, &[0.25, 0.3]).unwrap();
    for i in 1..16 {
        let s = 2.0 * i as f64 / 16.0;
        let v = env.eval(GraphPoint::new(EdgeId(0), s));
        if let Some(v) = v {
            assert!((v - 0.3).abs() < 1e-12, "expected the boundary max, got {v}");
        }
    }
}

#[test]
fn three_star_symmetric_well_is_super_kirchhoff() {
    // V = u^2 in the distance from the center: a symmetric Gaussian star
    let mut b = GraphBuilder::new();
    let c = b.add_vertex("c");
    let l1 = b.add_vertex("l1");
    let l2 = b.add_vertex("l2");
    let l3 = b.add_vertex("l3");
    b.add_edge(c, l1, 1.5);
    b.add_edge(c, l2, 1.5);
    b.add_edge(c, l3, 1.5);
    let g = b.build().unwrap();
    let desc = EdgePotential::Quadratic {
        c0: 0.0,
        c1: 0.0,
        c2: 1.0,
    };
    let pot = PotentialField::new(&g, vec![desc.clone(), desc.clone(), desc]).unwrap();
    let m = QuadraticMinorant {
        lo: -1.5,
        hi: 1.5,
        y: 0.0,
        v1: 0.0,
        b: 1.0,
    };
    let piece = star_piece(VertexId(0), 1.5, &m).unwrap();
    let land = assemble_landscape(&g, &pot, &[piece]).unwrap();
    assert!(land.worst_slack >= -1e-8);
    let center_sum = land
        .vertex_outgoing_sums
        .iter()
        .find(|(v, _)| *v == VertexId(0))
        .map(|(_, s)| *s)
        .unwrap();
    assert!(center_sum.abs() <= 1e-8, "center outgoing sum {center_sum}");
    assert!(center_sum >= -1e-8);
}

#[test]
fn boggio_inequality_for_assembled_landscape() {
    let data = cases::mathieu_circle(10.0).unwrap();
    let pieces = cases::mathieu_torsion_pieces(&data, 0.35).unwrap();
    let land = assemble_landscape(&data.graph, &data.potential, &pieces).unwrap();
    let g = &data.graph;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..6 {
        let values: Vec<f64> = (0..g.n_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nprop: usize = g.vertices().map(|v| g.degree(v)).sum();
        let props: Vec<f64> = (0..nprop).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = kirchhoff_test_function(g, &values, &props);
        let slack = boggio_slack(g, &land, &f);
        assert!(slack >= -1e-6, "quadratic form slack {slack}");
    }
}

#[test]
fn random_supersolutions_have_no_strict_interior_maximum() {
    // convex pieces on a star with nonnegative outgoing slope sums at the
    // center: the positive part cannot peak strictly inside
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _trial in 0..10 {
        let deg = rng.gen_range(3..=5usize);
        let lens: Vec<f64> = (0..deg).map(|_| rng.gen_range(0.8..2.0)).collect();
        // w_e(s) = w0 + d_e s + q_e s^2 with q_e >= eps^2/2 (so H w <= -eps^2)
        let w0: f64 = rng.gen_range(-0.5..1.0);
        let mut slopes: Vec<f64> = (0..deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = slopes.iter().sum::<f64>() / deg as f64;
        if mean < 0.0 {
            for s in slopes.iter_mut() {
                *s -= mean; // recentre so the outgoing sum is >= 0
            }
        }
        let qs: Vec<f64> = (0..deg).map(|_| rng.gen_range(0.05..0.8)).collect();
        // scan interior grid points for strict local maxima of w_+
        let n = 200;
        for e in 0..deg {
            let w = |s: f64| (w0 + slopes[e] * s + qs[e] * s * s).max(0.0);
            for i in 1..n {
                let s = lens[e] * i as f64 / n as f64;
                let h = lens[e] / n as f64;
                let strict_max = w(s) > w(s - h) + 1e-12 && w(s) > w(s + h) + 1e-12;
                assert!(!strict_max, "strict interior max on edge {e} at s={s}");
            }
        }
        // center: w(0) must not strictly dominate all first grid points
        let h = 0.01;
        let center_max = (0..deg).all(|e| {
            (w0.max(0.0)) > (w0 + slopes[e] * h + qs[e] * h * h).max(0.0) + 1e-12
        });
        assert!(!center_max, "strict maximum at the center vertex");
    }
}

#[test]
fn reciprocal_extension_validity_and_domination() {
    // the deep reciprocal region of the cosine-circle cover sits around
    // the zeroed junctions, interior to the closed cover
    let data = cases::mathieu_circle(10.0).unwrap();
    let pieces = cases::mathieu_torsion_pieces(&data, 0.35).unwrap();
    let land = assemble_landscape(&data.graph, &data.potential, &pieces).unwrap();
    let ham = assemble(&data.graph, &data.potential, PI / 256.0).unwrap();
    let pairs = solve_eigs(&data.graph, &ham, 1, &SolverConfig::default()).unwrap();
    let pair = &pairs[0];
    let delta = 0.5;
    let env = torsion_agmon_extension(&data.graph, &land, pair.energy, delta, Some(pair)).unwrap();
    assert!(!env.is_empty());
    // validity stays inside { 1/T - E >= delta } and the bound is finite
    for (eid, s0, s1) in env.validity() {
        for i in 0..=64 {
            let s = s0 + (s1 - s0) * i as f64 / 64.0;
            let p = GraphPoint::new(eid, s);
            let t = land.eval(p).unwrap();
            assert!(1.0 / t - pair.energy - delta >= -1e-9);
            assert!(env.eval(p).unwrap().is_finite());
        }
    }
    // and it dominates the computed eigenfunction there
    let report = check_domination(&data.graph, pair, &env, 512);
    assert!(
        report.pass,
        "worst margin {} at {:?}",
        report.worst_margin, report.worst_at
    );
    // energy above the reciprocal range: empty region
    let tmin = land.min_value();
    assert!(matches!(
        torsion_agmon_extension(&data.graph, &land, 1.0 / tmin + 1.0, 0.5, None),
        Err(Error::EmptyRegion)
    ));
}
#[test]
fn square_well_reciprocal_region_scan_at_small_energy() {
    // shallow well: the reciprocal level 1/T exceeds the (shifted) energy
    // plus delta on part of the wells
    let data = cases::square_well_star(1, 0.06, 40.0).unwrap();
    let (land, shifted_energy) = cases::square_well_torsion(&data).unwrap();
    let delta = 0.03;
    let mut region_len = 0.0;
    for (eid, s0, s1) in land.covered() {
        let n = 512;
        for i in 0..n {
            let s = s0 + (s1 - s0) * (i as f64 + 0.5) / n as f64;
            let t = land.eval(GraphPoint::new(eid, s)).unwrap();
            if 1.0 / t - shifted_energy >= delta {
                region_len += (s1 - s0) / n as f64;
            }
        }
    }
    assert!(region_len > 0.1, "deep reciprocal region length {region_len}");
    // the deep region touches the boundary of the cover here, so the
    // collar-anchored envelope may be inapplicable; what must not happen
    // is an empty region
    match torsion_agmon_extension(&data.graph, &land, shifted_energy, delta, None) {
        Ok(env) => assert!(!env.is_empty()),
        Err(Error::MethodInapplicable { .. }) => {}
        Err(e) => panic!("unexpected error {e}"),
    }
}

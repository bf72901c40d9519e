//! Cross-cutting numerical verification: envelope domination reports,
//! constructive Harnack constants, regime classification, and the
//! quadratic-form (Picone) check for assembled supersolutions.

use crate::envelope::{Envelope, Method};
use crate::error::{Error, Result};
use crate::graph::{EdgeEnd, EdgeId, GraphPoint, MetricGraph, VertexId};
use crate::metric::{shortest_path, UnitWeight};
use crate::potential::PotentialField;
use crate::quad::adaptive_simpson;
use crate::spectral::Eigenpair;
use crate::torsion::LandscapeFunction;

/// Pointwise comparison of an envelope against |psi| on a shared grid.
#[derive(Debug, Clone)]
pub struct DominationReport {
    pub method: Method,
    pub energy: f64,
    pub grid_per_edge: usize,
    pub points_checked: usize,
    pub worst_margin: f64,
    pub worst_at: GraphPoint,
    pub tolerance: f64,
    pub pass: bool,
    /// All points where the margin is below -tolerance.
    pub violations: Vec<(GraphPoint, f64)>,
}

/// Margin function `envelope(x) - |psi(x)|` sampled on `grid_per_edge`
/// points per covered edge; passes when the worst margin is above
/// `-1e-6 * max(1, sup |psi|)`.
pub fn check_domination(
    g: &MetricGraph,
    pair: &Eigenpair,
    env: &Envelope,
    grid_per_edge: usize,
) -> DominationReport {
    let tol = 1e-6 * pair.linf_norm().max(1.0);
    let mut worst = (f64::INFINITY, GraphPoint::new(EdgeId(0), 0.0));
    let mut violations = Vec::new();
    let mut checked = 0usize;
    for e in g.edges() {
        for i in 0..=grid_per_edge {
            let s = e.length * i as f64 / grid_per_edge as f64;
            let p = GraphPoint::new(e.id, s);
            let Some(bound) = env.eval(p) else { continue };
            let margin = bound - pair.value(p).abs();
            checked += 1;
            if margin < worst.0 {
                worst = (margin, p);
            }
            if margin < -tol {
                violations.push((p, margin));
            }
        }
    }
    DominationReport {
        method: env.method,
        energy: pair.energy,
        grid_per_edge,
        points_checked: checked,
        worst_margin: worst.0,
        worst_at: worst.1,
        tolerance: tol,
        pass: violations.is_empty() && checked > 0,
        violations,
    }
}

/// Constructive Harnack constant along a path between two extremal
/// candidates: with eta the linear ramp of width `collar` on the stub
/// extensions and side branches,
/// `C = exp( sqrt( |P| max(0, 2 int eta^2 (V-E) + 4 int eta'^2) ) )`.
/// The negative part of the potential integral is clamped at zero.
pub fn harnack_constant(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    p1: GraphPoint,
    p2: GraphPoint,
    collar: Option<f64>,
) -> Result<f64> {
    if g.same_point(p1, p2, 1e-12) {
        return Ok(1.0);
    }
    let w = UnitWeight::new(g);
    let (plen, path) = shortest_path(g, &w, &[p1], p2).map_err(|_| Error::PathNotFound)?;
    if path.segments.is_empty() {
        return Ok(1.0);
    }
    let width = collar.unwrap_or_else(|| (g.min_edge_length() / 2.0).min(plen / 2.0));
    // int over P of (V - E), eta = 1
    let mut pot_int = 0.0;
    for seg in &path.segments {
        let (lo, hi) = (seg.enter.min(seg.exit), seg.enter.max(seg.exit));
        let pot = potential.clone();
        let gr = g.clone();
        let eid = seg.edge;
        let f = move |s: f64| pot.eval(&gr, eid, s) - energy;
        pot_int += adaptive_simpson(&f, lo, hi, 1e-10);
    }
    // stubs: extensions beyond the endpoints, plus side branches at every
    // vertex strictly inside the path
    let mut ramp_int = 0.0; // int eta'^2
    let mut stub_pot = 0.0; // int eta^2 (V - E) over stubs
    let mut add_stub = |edge: EdgeId, from: f64, dir: f64, room: f64| {
        let wlen = width.min(room);
        if wlen <= 1e-12 {
            return;
        }
        ramp_int += 1.0 / wlen;
        let pot = potential.clone();
        let gr = g.clone();
        let f = move |d: f64| {
            let eta = 1.0 - d / wlen;
            eta * eta * (pot.eval(&gr, edge, from + dir * d) - energy)
        };
        stub_pot += adaptive_simpson(&f, 0.0, wlen, 1e-10);
    };
    // endpoint extensions
    for (pt, seg_is_first) in [(p1, true), (p2, false)] {
        let e = g.edge(pt.edge);
        // extend away from the path if there is room on the edge
        let seg = if seg_is_first {
            path.segments.first().unwrap()
        } else {
            path.segments.last().unwrap()
        };
        let into_path = (seg.exit - seg.enter).signum();
        let dir = if seg_is_first { -into_path } else { into_path };
        let room = if dir > 0.0 { e.length - pt.s } else { pt.s };
        add_stub(pt.edge, pt.s, dir, room);
    }
    // side branches at interior path vertices
    let mut used_ends: Vec<(usize, EdgeId, EdgeEnd)> = Vec::new();
    for seg in &path.segments {
        let e = g.edge(seg.edge);
        for (coord, end) in [(seg.enter, 0), (seg.exit, 1)] {
            let at_end = if coord <= 1e-9 {
                Some(EdgeEnd::Start)
            } else if coord >= e.length - 1e-9 {
                Some(EdgeEnd::End)
            } else {
                None
            };
            let _ = end;
            if let Some(which) = at_end {
                let v = e.vertex_at(which);
                used_ends.push((v.0, seg.edge, which));
            }
        }
    }
    let mut seen_vertices: Vec<usize> = used_ends.iter().map(|&(v, _, _)| v).collect();
    seen_vertices.sort_unstable();
    seen_vertices.dedup();
    for v in seen_vertices {
        for &(eid, end) in g.incident(VertexId(v)) {
            let used = used_ends
                .iter()
                .any(|&(uv, ue, uend)| uv == v && ue == eid && uend == end);
            if used {
                continue;
            }
            let e = g.edge(eid);
            let (from, dir, room) = match end {
                EdgeEnd::Start => (0.0, 1.0, e.length),
                EdgeEnd::End => (e.length, -1.0, e.length),
            };
            add_stub(eid, from, dir, room);
        }
    }
    let bound = plen * (2.0 * (pot_int + stub_pot) + 4.0 * ramp_int).max(0.0);
    Ok(bound.sqrt().exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Tunneling,
    Transition,
    AllowedModerate,
    HighEnergy,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Tunneling => "tunneling",
            Regime::Transition => "transition",
            Regime::AllowedModerate => "allowed-moderate",
            Regime::HighEnergy => "high-energy",
        }
    }

    /// Bound families recommended for each regime.
    pub fn recommended(&self) -> &'static [Method] {
        match self {
            Regime::Tunneling => &[Method::Agmon, Method::AgmonInterval],
            Regime::Transition => &[Method::Window, Method::Gronwall],
            Regime::AllowedModerate => &[Method::Torsion, Method::TorsionAgmon],
            Regime::HighEnergy => &[Method::Davies, Method::Oscillation, Method::Uniform],
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RegimeThresholds {
    /// Tunneling margin: V - E > delta_t.
    pub delta_t: f64,
    /// Transition half-width as a fraction of max(1, E).
    pub tau_frac: f64,
    /// High-energy cutoff: E >= ratio * max V.
    pub ratio: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            delta_t: 0.0,
            tau_frac: 0.05,
            ratio: 5.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegimeMap {
    pub energy: f64,
    pub tau: f64,
    pub thresholds: RegimeThresholds,
    pub samples_per_edge: usize,
    pub labels: Vec<Vec<Regime>>,
    pub high_energy_global: bool,
}

/// Label each grid point by the applicable bound regime. Tunneling wins
/// where V exceeds E (strict, by the tunneling-region definition);
/// transition covers the band |V - E| < tau on the allowed side.
pub fn select_regime(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    thresholds: RegimeThresholds,
    samples_per_edge: usize,
) -> RegimeMap {
    let tau = thresholds.tau_frac * energy.abs().max(1.0);
    let vmax = potential.global_max(g);
    let high = energy >= thresholds.ratio * vmax;
    let labels = g
        .edges()
        .iter()
        .map(|e| {
            (0..=samples_per_edge)
                .map(|i| {
                    if high {
                        return Regime::HighEnergy;
                    }
                    let s = e.length * i as f64 / samples_per_edge as f64;
                    let v = potential.eval(g, e.id, s);
                    if v - energy > thresholds.delta_t {
                        Regime::Tunneling
                    } else if (v - energy).abs() < tau {
                        Regime::Transition
                    } else {
                        Regime::AllowedModerate
                    }
                })
                .collect()
        })
        .collect();
    RegimeMap {
        energy,
        tau,
        thresholds,
        samples_per_edge,
        labels,
        high_energy_global: high,
    }
}

impl RegimeMap {
    pub fn label_at(&self, g: &MetricGraph, p: GraphPoint) -> Regime {
        let e = g.edge(p.edge);
        let i = ((p.s / e.length) * self.samples_per_edge as f64).round() as usize;
        self.labels[p.edge.0][i.min(self.samples_per_edge)]
    }

    pub fn count(&self, r: Regime) -> usize {
        self.labels
            .iter()
            .flat_map(|l| l.iter())
            .filter(|&&x| x == r)
            .count()
    }
}

/// A C^1 test function with Kirchhoff-compatible traces: per edge a cubic
/// Hermite from (value, outgoing derivative) data at both ends, with the
/// outgoing derivatives summing to zero at every vertex.
#[derive(Debug, Clone)]
pub struct TestFunction {
    /// Per edge: (value at start, d/ds at start, value at end, d/ds at end).
    pub ends: Vec<(f64, f64, f64, f64)>,
}

impl TestFunction {
    pub fn eval(&self, g: &MetricGraph, e: EdgeId, s: f64) -> f64 {
        let (v0, d0, v1, d1) = self.ends[e.0];
        let l = g.edge(e).length;
        let t = s / l;
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        h00 * v0 + h10 * l * d0 + h01 * v1 + h11 * l * d1
    }

    pub fn deriv(&self, g: &MetricGraph, e: EdgeId, s: f64) -> f64 {
        let (v0, d0, v1, d1) = self.ends[e.0];
        let l = g.edge(e).length;
        let t = s / l;
        let dh00 = 6.0 * t * t - 6.0 * t;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = -6.0 * t * t + 6.0 * t;
        let dh11 = 3.0 * t * t - 2.0 * t;
        (dh00 * v0 + dh01 * v1) / l + dh10 * d0 + dh11 * d1
    }
}

/// Build a Kirchhoff-compatible test function from arbitrary per-vertex
/// values and raw per-end derivative proposals (the proposals at each
/// vertex are recentred to sum to zero).
pub fn kirchhoff_test_function(
    g: &MetricGraph,
    vertex_values: &[f64],
    derivative_proposals: &[f64],
) -> TestFunction {
    assert_eq!(vertex_values.len(), g.n_vertices());
    // recentre proposals per vertex
    let mut idx = 0usize;
    let mut out_deriv: Vec<Vec<f64>> = Vec::with_capacity(g.n_vertices());
    for v in g.vertices() {
        let d = g.degree(v);
        let slice = &derivative_proposals[idx..idx + d];
        let mean = slice.iter().sum::<f64>() / d as f64;
        out_deriv.push(slice.iter().map(|x| x - mean).collect());
        idx += d;
    }
    let mut ends = vec![(0.0, 0.0, 0.0, 0.0); g.n_edges()];
    for v in g.vertices() {
        for (k, &(eid, end)) in g.incident(v).iter().enumerate() {
            let outgoing = out_deriv[v.0][k];
            match end {
                EdgeEnd::Start => {
                    ends[eid.0].0 = vertex_values[v.0];
                    ends[eid.0].1 = outgoing; // outgoing at start = +d/ds
                }
                EdgeEnd::End => {
                    ends[eid.0].2 = vertex_values[v.0];
                    ends[eid.0].3 = -outgoing; // outgoing at end = -d/ds
                }
            }
        }
    }
    TestFunction { ends }
}

/// Quadratic-form slack `sum_e int |f'|^2 - sum_e int f^2 (-T''/T)` over
/// the covered region of an assembled supersolution; nonnegative (within
/// quadrature error) when the supersolution satisfies the outgoing-sum
/// conditions at its vertices.
pub fn boggio_slack(g: &MetricGraph, land: &LandscapeFunction, f: &TestFunction) -> f64 {
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (eid, s0, s1) in land.covered() {
        let fl = f.clone();
        let gr = g.clone();
        let d2 = |s: f64| {
            let fp = fl.deriv(&gr, eid, s);
            fp * fp
        };
        lhs += adaptive_simpson(&d2, s0, s1, 1e-10);
        let fl2 = f.clone();
        let gr2 = g.clone();
        let la = land.clone();
        let rd = move |s: f64| {
            let p = GraphPoint::new(eid, s);
            let fv = fl2.eval(&gr2, eid, s);
            let t = la.eval(p).unwrap();
            let tdd = la.second_deriv(p).unwrap();
            fv * fv * (-tdd / t)
        };
        rhs += adaptive_simpson(&rd, s0, s1, 1e-10);
    }
    lhs - rhs
}

/// Interior and boundary maxima of `W = |psi| - E psi_sup T` over the
/// covered region, for the maximum-principle soundness check.
pub fn w_max_split(
    g: &MetricGraph,
    pair: &Eigenpair,
    land: &LandscapeFunction,
    psi_sup: f64,
    grid_per_edge: usize,
) -> (f64, f64) {
    let energy = pair.energy;
    let w_at = |p: GraphPoint| {
        pair.value(p).abs() - energy * psi_sup * land.eval(p).unwrap_or(f64::INFINITY)
    };
    let mut interior: f64 = f64::NEG_INFINITY;
    for (eid, s0, s1) in land.covered() {
        let _ = g.edge(eid);
        for i in 0..=grid_per_edge {
            let s = s0 + (s1 - s0) * i as f64 / grid_per_edge as f64;
            interior = interior.max(w_at(GraphPoint::new(eid, s)));
        }
    }
    let boundary = land
        .boundary
        .iter()
        .map(|&p| w_at(p))
        .fold(f64::NEG_INFINITY, f64::max);
    (interior, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::Segment;
    use crate::graph::GraphBuilder;
    use crate::potential::EdgePotential;

    fn segment_graph() -> MetricGraph {
        let mut b = GraphBuilder::new();
        let u = b.add_vertex("u");
        let v = b.add_vertex("v");
        b.add_edge(u, v, 2.0);
        b.build().unwrap()
    }

    #[test]
    fn scaled_down_envelope_fails_with_located_violations() {
        let g = segment_graph();
        let pot = PotentialField::zero(&g);
        let ham = crate::spectral::assemble(&g, &pot, 0.01).unwrap();
        let pairs =
            crate::spectral::solve_eigs(&g, &ham, 1, &crate::SolverConfig::default()).unwrap();
        let p = &pairs[0];
        let sup = p.linf_norm();
        let mut good = Envelope::new(Method::Uniform, 1);
        good.push_segment(EdgeId(0), Segment::constant(0.0, 2.0, sup * 1.01));
        let rep = check_domination(&g, p, &good, 512);
        assert!(rep.pass, "worst margin {}", rep.worst_margin);
        let mut bad = Envelope::new(Method::Uniform, 1);
        bad.push_segment(EdgeId(0), Segment::constant(0.0, 2.0, sup * 0.5));
        let rep = check_domination(&g, p, &bad, 512);
        assert!(!rep.pass);
        assert!(!rep.violations.is_empty());
        assert!(rep.worst_margin < 0.0);
    }

    #[test]
    fn harnack_single_point_is_one() {
        let g = segment_graph();
        let pot = PotentialField::zero(&g);
        let p = GraphPoint::new(EdgeId(0), 0.7);
        let c = harnack_constant(&g, &pot, 1.0, p, p, None).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn harnack_ramp_only_case() {
        // V == E on the window: the potential term vanishes, leaving
        // C = exp(sqrt(4 |P| * sum 1/w))
        let g = segment_graph();
        let pot =
            PotentialField::new(&g, vec![EdgePotential::Constant(1.5)]).unwrap();
        let p1 = GraphPoint::new(EdgeId(0), 0.5);
        let p2 = GraphPoint::new(EdgeId(0), 1.5);
        let w = 0.25;
        let c = harnack_constant(&g, &pot, 1.5, p1, p2, Some(w)).unwrap();
        let expect = (1.0f64 * 4.0 * (2.0 / w)).sqrt().exp();
        assert!((c - expect).abs() < 1e-9 * expect, "{c} vs {expect}");
    }

    #[test]
    fn regime_trivial_cases() {
        let g = segment_graph();
        let pot = PotentialField::zero(&g);
        let map = select_regime(&g, &pot, 100.0, RegimeThresholds::default(), 64);
        assert!(map.high_energy_global);
        assert_eq!(map.count(Regime::HighEnergy), 65);

        let pot5 = PotentialField::new(&g, vec![EdgePotential::Constant(5.0)]).unwrap();
        let map = select_regime(&g, &pot5, 1.0, RegimeThresholds::default(), 64);
        assert_eq!(map.count(Regime::Tunneling), 65);
    }

    #[test]
    fn regime_partition_is_total() {
        let g = segment_graph();
        let pot = PotentialField::new(
            &g,
            vec![EdgePotential::Cosine {
                a: 5.0,
                b: 5.0,
                omega: 3.0,
                phi: 0.2,
            }],
        )
        .unwrap();
        let map = select_regime(&g, &pot, 6.0, RegimeThresholds::default(), 256);
        let total = map.count(Regime::Tunneling)
            + map.count(Regime::Transition)
            + map.count(Regime::AllowedModerate)
            + map.count(Regime::HighEnergy);
        assert_eq!(total, 257);
        assert!(map.count(Regime::Tunneling) > 0);
        assert!(map.count(Regime::Transition) > 0);
        assert!(map.count(Regime::AllowedModerate) > 0);
    }

    #[test]
    fn test_function_traces_are_kirchhoff() {
        let mut b = GraphBuilder::new();
        let c = b.add_vertex("c");
        let l1 = b.add_vertex("l1");
        let l2 = b.add_vertex("l2");
        let l3 = b.add_vertex("l3");
        b.add_edge(c, l1, 1.0);
        b.add_edge(c, l2, 1.0);
        b.add_edge(c, l3, 1.0);
        let g = b.build().unwrap();
        let nprop: usize = g.vertices().map(|v| g.degree(v)).sum();
        let props: Vec<f64> = (0..nprop).map(|i| (i as f64 * 1.37).sin()).collect();
        let f = kirchhoff_test_function(&g, &[1.0, 0.3, -0.2, 0.8], &props);
        // continuity at the center and zero outgoing sum
        let mut sum = 0.0;
        for &(eid, end) in g.incident(crate::graph::VertexId(0)) {
            let e = g.edge(eid);
            let (s, sign) = match end {
                EdgeEnd::Start => (0.0, 1.0),
                EdgeEnd::End => (e.length, -1.0),
            };
            assert!((f.eval(&g, eid, s) - 1.0).abs() < 1e-14);
            sum += sign * f.deriv(&g, eid, s);
        }
        assert!(sum.abs() < 1e-12);
    }
}

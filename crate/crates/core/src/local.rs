//! Edge-local pointwise bounds: the first-order differential inequality on
//! `g = psi^2 + psi'^2/(E - E_m)`, its oscillation-theory corollary, the
//! transition-window estimate, and the Gronwall shooting bound. None of
//! these propagate through vertices; the derivative can jump there.

use std::sync::Arc;

use crate::envelope::{Envelope, Method, Segment};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, GraphPoint, MetricGraph};
use crate::metric::{DistanceField, UnitWeight};
use crate::potential::PotentialField;
use crate::quad::{adaptive_simpson, CumulativeIntegral, Density};
use crate::roots::scan_roots;
use crate::spectral::Eigenpair;

/// Samples of `g(x) = psi(x)^2 + psi'(x)^2 / (E - E_m)` per edge.
#[derive(Debug, Clone)]
pub struct GFunction {
    pub energy: f64,
    pub shift: f64,
    pub values: Vec<Vec<f64>>,
    pub grids: Vec<(usize, f64)>,
}

pub fn g_function(pair: &Eigenpair, shift: f64) -> Result<GFunction> {
    if shift >= pair.energy {
        return Err(Error::ShiftNotBelowE {
            shift,
            energy: pair.energy,
        });
    }
    let denom = pair.energy - shift;
    let values = pair
        .values
        .iter()
        .zip(pair.derivs.iter())
        .map(|(vals, ders)| {
            vals.iter()
                .zip(ders.iter())
                .map(|(&v, &d)| v * v + d * d / denom)
                .collect()
        })
        .collect();
    Ok(GFunction {
        energy: pair.energy,
        shift,
        values,
        grids: pair.grids.clone(),
    })
}

impl GFunction {
    pub fn min_on_edge(&self, e: EdgeId) -> (f64, f64) {
        let (_, h) = self.grids[e.0];
        let mut best = (f64::INFINITY, 0.0);
        for (i, &v) in self.values[e.0].iter().enumerate() {
            if v < best.0 {
                best = (v, i as f64 * h);
            }
        }
        (best.1, best.0)
    }

    pub fn spread_on_edge(&self, e: EdgeId) -> f64 {
        let vals = &self.values[e.0];
        let mx = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mn = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        mx - mn
    }
}

fn abs_shift_cumulative(
    g: &MetricGraph,
    potential: &PotentialField,
    edge: EdgeId,
    shift: f64,
) -> CumulativeIntegral {
    let e = g.edge(edge);
    let pot = potential.clone();
    let gref = g.clone();
    let density: Density = Arc::new(move |s: f64| (pot.eval(&gref, edge, s) - shift).abs());
    // kinks where V crosses the shift level
    let pot2 = potential.clone();
    let gref2 = g.clone();
    let f = move |s: f64| pot2.eval(&gref2, edge, s) - shift;
    let kinks = scan_roots(&f, 0.0, e.length, 2048, 1e-13 * e.length.max(1.0));
    CumulativeIntegral::new(density, 0.0, e.length, &kinks, 64, 1e-11)
}

/// Pointwise bound from the differential inequality on one edge: from an
/// anchor y (default: where g is smallest),
/// `|psi(x)| <= sqrt(g(y)) * exp( |int_y^x |V - E_m|| / (2 sqrt(E - E_m)) )`.
/// Both the g-level bound and the |psi| corollary are recorded.
pub fn davies_envelope(
    g: &MetricGraph,
    potential: &PotentialField,
    pair: &Eigenpair,
    edge: EdgeId,
    anchor: Option<f64>,
    shift: Option<f64>,
) -> Result<Envelope> {
    let e = g.edge(edge);
    let e_m = shift.unwrap_or_else(|| potential.min_on_edge(edge, 0.0, e.length, e.length));
    let gf = g_function(pair, e_m)?;
    let y = anchor.unwrap_or_else(|| gf.min_on_edge(edge).0);
    let (py, dy) = pair.value_deriv(GraphPoint::new(edge, y));
    let g_anchor = py * py + dy * dy / (pair.energy - e_m);
    let cum = Arc::new(abs_shift_cumulative(g, potential, edge, e_m));
    let cy = cum.eval(y);
    let rate = 0.5 / (pair.energy - e_m).sqrt();
    let mut env = Envelope::new(Method::Davies, g.n_edges());
    env.provenance.push("edge", edge.0);
    env.provenance.push_num("energy", pair.energy);
    env.provenance.push_num("shift_em", e_m);
    env.provenance.push_num("anchor", y);
    env.provenance.push_num("g_at_anchor", g_anchor);
    env.provenance
        .push("g_envelope", "g(x) <= g(y) exp(2 * rate * |int|)");
    let profile = Arc::new(move |s: f64| {
        let i = (cum.eval(s) - cy).abs();
        g_anchor.sqrt() * (rate * i).exp()
    });
    env.push_segment(edge, Segment::new(0.0, e.length, profile));
    Ok(env)
}

/// Derivative-free bound via the oscillation theorem: if
/// `E - V >= k^2 > 0` on `[x1, x2]` with `x2 - x1 >= pi/k`, then for
/// `x >= x1` (and mirrored for `x <= x2`)
/// `|psi(x)| <= sup_{[x1,x2]} |psi| * exp( int / (2 sqrt(E - E_m)) )`.
pub fn oscillation_envelope(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    edge: EdgeId,
    subinterval: (f64, f64),
    shift: Option<f64>,
    pair: Option<&Eigenpair>,
    sup_override: Option<f64>,
) -> Result<Envelope> {
    let e = g.edge(edge);
    let (x1, x2) = subinterval;
    assert!(x1 < x2 && x1 >= 0.0 && x2 <= e.length);
    let k2 = energy - potential.max_on_edge(edge, x1, x2, e.length);
    if k2 <= 0.0 {
        return Err(Error::SubintervalTooShort {
            length: x2 - x1,
            need: f64::INFINITY,
        });
    }
    let need = std::f64::consts::PI / k2.sqrt();
    if x2 - x1 < need - 1e-12 {
        return Err(Error::SubintervalTooShort {
            length: x2 - x1,
            need,
        });
    }
    let e_m = shift.unwrap_or_else(|| potential.min_on_edge(edge, 0.0, e.length, e.length));
    if e_m >= energy {
        return Err(Error::ShiftNotBelowE { shift: e_m, energy });
    }
    let sup = sup_override
        .or_else(|| pair.map(|p| p.sup_on(edge, x1, x2)))
        .expect("need an eigenpair or an explicit sup on the subinterval");
    let cum = Arc::new(abs_shift_cumulative(g, potential, edge, e_m));
    let (c1, c2) = (cum.eval(x1), cum.eval(x2));
    let rate = 0.5 / (energy - e_m).sqrt();
    let mut env = Envelope::new(Method::Oscillation, g.n_edges());
    env.provenance.push("edge", edge.0);
    env.provenance.push_num("energy", energy);
    env.provenance.push_num("shift_em", e_m);
    env.provenance.push_num("x1", x1);
    env.provenance.push_num("x2", x2);
    env.provenance.push_num("k2", k2);
    env.provenance.push_num("sup_on_subinterval", sup);
    let profile = Arc::new(move |s: f64| {
        let mut expo = f64::INFINITY;
        if s >= x1 {
            expo = expo.min((cum.eval(s) - c1).max(0.0));
        }
        if s <= x2 {
            expo = expo.min((c2 - cum.eval(s)).max(0.0));
        }
        sup * (rate * expo).exp()
    });
    env.push_segment(edge, Segment::new(0.0, e.length, profile));
    Ok(env)
}

/// Window estimate. `window` lists per-edge subintervals forming a region
/// W (interior vertices are allowed); the collar of width `ell` inside W
/// must be vertex-free. For x with dist(x, dW) >= ell,
/// `|psi(x)|^2 <= ( int_Bl psi^2 / ell^2 + int_W (E-V)_+ psi^2 )
///                * dist(x, dW)`;
/// without an eigenpair the normalized-psi coefficients
/// `1/ell^2 + max_W (E-V)_+` are used and also recorded either way.
pub fn window_envelope(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    window: &[Vec<(f64, f64)>],
    ell: f64,
    pair: Option<&Eigenpair>,
) -> Result<Envelope> {
    assert!(ell > 0.0);
    let (boundary, components) = crate::spectral::assemble_components(g, window);
    // collar must avoid vertices: boundary points must be interior roots,
    // and interior vertices must sit deeper than ell
    let sources: Vec<GraphPoint> = boundary.iter().map(|b| b.point).collect();
    if sources.is_empty() {
        return Err(Error::MethodInapplicable {
            method: "window".into(),
            reason: "window has no boundary".into(),
        });
    }
    for b in &boundary {
        if g.vertex_of_point(b.point, 1e-9).is_some() {
            return Err(Error::CollarContainsVertex {
                edge: b.point.edge.0,
                s: b.point.s,
                width: ell,
            });
        }
    }
    let dist = DistanceField::new(g, UnitWeight::new(g), &sources);
    for comp in &components {
        for &(eid, a, b) in &comp.intervals {
            let e = g.edge(eid);
            for (coord, v) in [(a, e.ends.0), (b, e.ends.1)] {
                let at_vertex = coord <= 1e-9 || coord >= e.length - 1e-9;
                if at_vertex {
                    let d = dist.vertex_distance(v);
                    if d <= ell + 1e-12 {
                        return Err(Error::CollarContainsVertex {
                            edge: eid.0,
                            s: coord,
                            width: ell,
                        });
                    }
                }
            }
        }
    }
    // coefficient
    let mut max_ev = 0.0f64;
    for (ei, list) in window.iter().enumerate() {
        let eid = EdgeId(ei);
        let len = g.edge(eid).length;
        for &(a, b) in list {
            max_ev = max_ev.max((energy - potential.min_on_edge(eid, a, b, len)).max(0.0));
        }
    }
    let psi_free_coeff = 1.0 / (ell * ell) + max_ev;
    let coeff = match pair {
        None => psi_free_coeff,
        Some(p) => {
            // int over the collar B_ell of psi^2
            let mut collar_int = 0.0;
            let mut well_int = 0.0;
            for (ei, list) in window.iter().enumerate() {
                let eid = EdgeId(ei);
                for &(a, b) in list {
                    // split [a,b] into { dist <= ell } and the rest
                    let f = |s: f64| dist.eval(g, GraphPoint::new(eid, s)) - ell;
                    let cuts = scan_roots(&f, a, b, 256, 1e-12 * (b - a).max(1.0));
                    let mut pts = vec![a];
                    pts.extend(cuts.iter().copied().filter(|&c| c > a && c < b));
                    pts.push(b);
                    for w in pts.windows(2) {
                        let mid = 0.5 * (w[0] + w[1]);
                        if f(mid) <= 0.0 {
                            let n = p.l2_on(eid, w[0], w[1]);
                            collar_int += n * n;
                        }
                    }
                    let pe = p.clone();
                    let pot = potential.clone();
                    let gr = g.clone();
                    let integrand = move |s: f64| {
                        let v = pot.eval(&gr, eid, s);
                        let psi = pe.value(GraphPoint::new(eid, s));
                        (energy - v).max(0.0) * psi * psi
                    };
                    well_int += adaptive_simpson(&integrand, a, b, 1e-10);
                }
            }
            collar_int / (ell * ell) + well_int
        }
    };
    let mut env = Envelope::new(Method::Window, g.n_edges());
    env.provenance.push_num("energy", energy);
    env.provenance.push_num("ell", ell);
    env.provenance.push_num("coefficient", coeff);
    env.provenance.push_num("psi_free_coefficient", psi_free_coeff);
    env.provenance.push(
        "coefficient_source",
        if pair.is_some() { "eigenpair integrals" } else { "normalized-psi bound" },
    );
    let dist = Arc::new(dist);
    let garc = Arc::new(g.clone());
    for (ei, list) in window.iter().enumerate() {
        let eid = EdgeId(ei);
        for &(a, b) in list {
            let f = |s: f64| dist.eval(g, GraphPoint::new(eid, s)) - ell;
            let cuts = scan_roots(&f, a, b, 256, 1e-12 * (b - a).max(1.0));
            let mut pts = vec![a];
            pts.extend(cuts.iter().copied().filter(|&c| c > a && c < b));
            pts.push(b);
            for w in pts.windows(2) {
                if f(0.5 * (w[0] + w[1])) >= 0.0 && w[1] - w[0] > 1e-10 {
                    let df = dist.clone();
                    let ga = garc.clone();
                    let profile = Arc::new(move |s: f64| {
                        (coeff * df.eval(&ga, GraphPoint::new(eid, s))).max(0.0).sqrt()
                    });
                    env.push_segment(eid, Segment::new(w[0], w[1], profile));
                }
            }
        }
    }
    if env.is_empty() {
        return Err(Error::MethodInapplicable {
            method: "window".into(),
            reason: "no points at distance >= ell from the window boundary".into(),
        });
    }
    Ok(env)
}

/// Components of `{ |V - E| <= tau }` as per-edge interval lists, for the
/// automatic window choice.
pub fn transition_windows(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    tau: f64,
) -> Vec<Vec<(f64, f64)>> {
    let hi = crate::spectral::classify_regions(g, potential, energy + tau, None);
    let lo = crate::spectral::classify_regions(g, potential, energy - tau, None);
    // below E + tau  AND  above E - tau
    let mut out = vec![Vec::new(); g.n_edges()];
    for e in g.edges() {
        for &(a0, b0) in &hi.allowed[e.id.0] {
            for &(a1, b1) in &lo.tunneling[e.id.0] {
                let a = a0.max(a1);
                let b = b0.min(b1);
                if b - a > 1e-10 {
                    out[e.id.0].push((a, b));
                }
            }
        }
    }
    out
}

/// Shooting bound along a vertex-free segment from an anchor with known
/// value and derivative:
/// `|psi(x)| <= (|psi0| + |x-x0| |dpsi0|) exp( int_x0^x (x-t)|V(t)-E| dt )`.
/// The linear prefactor majorizes |psi0 + (x-x0) dpsi0| (and equals it when
/// the signs agree), which keeps the bound monotone as Gronwall requires.
/// Not vertex-propagating.
pub fn gronwall_envelope(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    edge: EdgeId,
    x0: f64,
    psi0: f64,
    dpsi0: f64,
    segment: (f64, f64),
) -> Result<Envelope> {
    let e = g.edge(edge);
    let (s0, s1) = segment;
    assert!(s0 <= x0 && x0 <= s1 && s0 >= 0.0 && s1 <= e.length);
    let pot = potential.clone();
    let gref = g.clone();
    let w: Density = Arc::new(move |s: f64| (pot.eval(&gref, edge, s) - energy).abs());
    let pot2 = potential.clone();
    let gref2 = g.clone();
    let tw: Density = Arc::new(move |s: f64| s * (pot2.eval(&gref2, edge, s) - energy).abs());
    let f = {
        let pot = potential.clone();
        let gref = g.clone();
        move |s: f64| pot.eval(&gref, edge, s) - energy
    };
    let kinks = scan_roots(&f, 0.0, e.length, 2048, 1e-13 * e.length.max(1.0));
    let cw = Arc::new(CumulativeIntegral::new(w, 0.0, e.length, &kinks, 64, 1e-11));
    let ctw = Arc::new(CumulativeIntegral::new(tw, 0.0, e.length, &kinks, 64, 1e-11));
    let (cw0, ctw0) = (cw.eval(x0), ctw.eval(x0));
    let mut env = Envelope::new(Method::Gronwall, g.n_edges());
    env.provenance.push("edge", edge.0);
    env.provenance.push_num("energy", energy);
    env.provenance.push_num("x0", x0);
    env.provenance.push_num("psi0", psi0);
    env.provenance.push_num("dpsi0", dpsi0);
    env.provenance.push("prefactor", "absolute-value majorant");
    env.provenance.push("vertex_propagating", "no");
    let profile = Arc::new(move |s: f64| {
        let alpha = psi0.abs() + (s - x0).abs() * dpsi0.abs();
        let kernel = if s >= x0 {
            s * (cw.eval(s) - cw0) - (ctw.eval(s) - ctw0)
        } else {
            (ctw0 - ctw.eval(s)) - s * (cw0 - cw.eval(s))
        };
        alpha * kernel.max(0.0).exp()
    });
    env.push_segment(edge, Segment::new(s0, s1, profile));
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::SolverConfig;
    use crate::graph::GraphBuilder;
    use crate::potential::EdgePotential;
    use crate::spectral::{assemble, solve_eigs};
    use std::f64::consts::PI;

    fn circle(total: f64) -> MetricGraph {
        let mut b = GraphBuilder::new();
        let u = b.add_vertex("u");
        let v = b.add_vertex("v");
        b.add_edge(u, v, total / 2.0);
        b.add_edge(v, u, total / 2.0);
        b.build().unwrap()
    }

    #[test]
    fn g_is_conserved_when_potential_equals_shift() {
        // constant potential c, shift E_m = c: g is exactly conserved in
        // the continuum; discrete samples agree to O(h^2)
        let g = circle(2.0 * PI);
        let c = 2.0;
        let pot = PotentialField::new(
            &g,
            vec![EdgePotential::Constant(c), EdgePotential::Constant(c)],
        )
        .unwrap();
        let ham = assemble(&g, &pot, PI / 512.0).unwrap();
        let pairs = solve_eigs(&g, &ham, 3, &SolverConfig::default()).unwrap();
        let gf = g_function(&pairs[1], c).unwrap();
        for e in [EdgeId(0), EdgeId(1)] {
            assert!(gf.spread_on_edge(e) < 2e-5, "{}", gf.spread_on_edge(e));
        }
    }

    #[test]
    fn shift_above_energy_rejected() {
        let g = circle(2.0 * PI);
        let pot = PotentialField::zero(&g);
        let ham = assemble(&g, &pot, PI / 128.0).unwrap();
        let pairs = solve_eigs(&g, &ham, 2, &SolverConfig::default()).unwrap();
        assert!(matches!(
            g_function(&pairs[1], 2.0),
            Err(Error::ShiftNotBelowE { .. })
        ));
    }

    #[test]
    fn davies_constant_shift_gives_flat_envelope() {
        let g = circle(2.0 * PI);
        let pot = PotentialField::zero(&g);
        let ham = assemble(&g, &pot, PI / 512.0).unwrap();
        let pairs = solve_eigs(&g, &ham, 2, &SolverConfig::default()).unwrap();
        let env = davies_envelope(&g, &pot, &pairs[1], EdgeId(0), None, Some(0.0)).unwrap();
        // V == E_m = 0: envelope is the constant sqrt(g(y)) = 1/sqrt(pi)
        let expect = (1.0 / PI).sqrt();
        for i in 0..=16 {
            let s = PI * i as f64 / 16.0;
            let v = env.eval(GraphPoint::new(EdgeId(0), s)).unwrap();
            assert!((v - expect).abs() < 1e-4, "{v} vs {expect}");
        }
        // and it dominates |psi| on the edge
        for i in 0..=64 {
            let s = PI * i as f64 / 64.0;
            let p = pairs[1].value(GraphPoint::new(EdgeId(0), s)).abs();
            assert!(env.eval(GraphPoint::new(EdgeId(0), s)).unwrap() >= p - 1e-9);
        }
    }

    #[test]
    fn oscillation_free_mode_is_flat() {
        // V = 0, E = k^2: envelope == sup on the subinterval, exactly
        let g = circle(2.0 * PI);
        let pot = PotentialField::zero(&g);
        let ham = assemble(&g, &pot, PI / 512.0).unwrap();
        let pairs = solve_eigs(&g, &ham, 2, &SolverConfig::default()).unwrap();
        let p = &pairs[1];
        // the exact mode has E = 1 (k = 1), so pi/k equals the arc length
        let env = oscillation_envelope(
            &g,
            &pot,
            1.0,
            EdgeId(0),
            (0.0, PI),
            Some(0.0),
            Some(p),
            None,
        )
        .unwrap();
        let sup = p.sup_on(EdgeId(0), 0.0, PI);
        for i in 0..=32 {
            let s = PI * i as f64 / 32.0;
            let v = env.eval(GraphPoint::new(EdgeId(0), s)).unwrap();
            assert!((v - sup).abs() < 1e-12);
            assert!(v >= p.value(GraphPoint::new(EdgeId(0), s)).abs() - 1e-9);
        }
    }

    #[test]
    fn oscillation_too_short_rejected() {
        let g = circle(2.0 * PI);
        let pot = PotentialField::zero(&g);
        let e = 1.0; // k = 1, need pi
        let r = oscillation_envelope(
            &g,
            &pot,
            e,
            EdgeId(0),
            (0.0, 0.9 * PI),
            Some(0.0),
            None,
            Some(1.0),
        );
        assert!(matches!(r, Err(Error::SubintervalTooShort { .. })));
    }

    #[test]
    fn gronwall_linear_when_potential_equals_energy() {
        let g = circle(2.0 * PI);
        let pot = PotentialField::new(
            &g,
            vec![EdgePotential::Constant(3.0), EdgePotential::Constant(3.0)],
        )
        .unwrap();
        // V == E: amplification factor is exactly 1; same-sign data makes
        // the majorant equal the linear solution
        let env = gronwall_envelope(&g, &pot, 3.0, EdgeId(0), 1.0, 0.5, 0.25, (0.0, PI)).unwrap();
        for i in 0..=16 {
            let s = PI * i as f64 / 16.0;
            let expect = 0.5 + (s - 1.0).abs() * 0.25;
            let v = env.eval(GraphPoint::new(EdgeId(0), s)).unwrap();
            assert!((v - expect).abs() < 1e-10, "{v} vs {expect}");
        }
    }

    #[test]
    fn gronwall_amplification_bound() {
        // |V - E| <= eps on length L: factor <= exp(eps L^2 / 2)
        let g = circle(2.0);
        let eps = 0.3;
        let pot = PotentialField::new(
            &g,
            vec![
                EdgePotential::Constant(1.0 + eps),
                EdgePotential::Constant(1.0 + eps),
            ],
        )
        .unwrap();
        let env = gronwall_envelope(&g, &pot, 1.0, EdgeId(0), 0.0, 1.0, 0.0, (0.0, 1.0)).unwrap();
        let v = env.eval(GraphPoint::new(EdgeId(0), 1.0)).unwrap();
        assert!(v <= (eps * 1.0f64 / 2.0).exp() + 1e-12);
        assert!((v - (eps * 0.5f64).exp()).abs() < 1e-9); // constant |V-E| is exact
    }
}

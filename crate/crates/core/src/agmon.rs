//! Exponential tunneling envelopes built from a path metric with density
//! sqrt((V - E)_+). The positive part makes the density well defined on the
//! whole graph; classically allowed stretches contribute zero weight.

use std::sync::Arc;

use crate::envelope::{Envelope, Method, Segment};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, GraphPoint, MetricGraph};
use crate::metric::{DistanceField, TableWeight, UnitWeight};
use crate::potential::PotentialField;
use crate::quad::{CumulativeIntegral, Density};
use crate::spectral::{classify_regions, Eigenpair, RegionPartition, TunnelingComponent};

/// Per-edge cumulative integrals of sqrt((V - E)_+), split at turning
/// points so partial integrals stay exact near the square-root zeros.
pub fn agmon_weight(g: &MetricGraph, potential: &PotentialField, energy: f64) -> TableWeight {
    weight_for_density(g, potential, energy, 0.0)
}

fn weight_for_density(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    extra_shift: f64,
) -> TableWeight {
    let level = energy + extra_shift;
    let part = classify_regions(g, potential, level, None);
    let mut tables = Vec::with_capacity(g.n_edges());
    for e in g.edges() {
        let pot = potential.clone();
        let gref = g.clone();
        let eid = e.id;
        let density: Density =
            Arc::new(move |s: f64| (pot.eval(&gref, eid, s) - level).max(0.0).sqrt());
        let mut zeros: Vec<f64> = Vec::new();
        for bp in &part.boundary {
            if bp.point.edge == e.id && bp.is_root {
                zeros.push(bp.point.s);
            }
        }
        tables.push(CumulativeIntegral::new(
            density,
            0.0,
            e.length,
            &zeros,
            64,
            1e-11,
        ));
    }
    TableWeight::new(tables)
}

/// Weighted distance from a source set to a point: the infimum over paths
/// of the integral of sqrt((V - E)_+). Zero when the optimal path stays in
/// the classically allowed region.
pub fn agmon_distance(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    sources: &[GraphPoint],
    x: GraphPoint,
) -> f64 {
    let w = agmon_weight(g, potential, energy);
    DistanceField::new(g, w, sources).eval(g, x)
}

/// Reusable distance field for many targets.
pub fn agmon_field(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    sources: &[GraphPoint],
) -> DistanceField<TableWeight> {
    DistanceField::new(g, agmon_weight(g, potential, energy), sources)
}

fn collar_l2(psi: Option<&Eigenpair>, stubs: &[(EdgeId, f64, f64)]) -> f64 {
    match psi {
        None => 1.0,
        Some(pair) => {
            let mut acc = 0.0;
            for &(e, s0, s1) in stubs {
                let n = pair.l2_on(e, s0, s1);
                acc += n * n;
            }
            acc.sqrt()
        }
    }
}

/// Single-interval bound on `[a, b]` inside one edge: the collars
/// `[a - ell, a]` and `[b, b + ell]` must stay on the edge, and the whole
/// window `[a - ell, b + ell]` must satisfy V >= E.
///
/// The bound is
/// `sqrt((x-a+ell)(b+ell-x)/(b-a+2 ell)) * ||psi||_collars / (ell F(x))`
/// with `F(x) = exp(min(int_a^x, int_x^b) of sqrt(V - E))`.
pub fn interval_envelope(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    edge: EdgeId,
    a: f64,
    b: f64,
    ell: f64,
    psi: Option<&Eigenpair>,
) -> Result<Envelope> {
    let e = g.edge(edge);
    assert!(a < b && ell > 0.0, "need a < b and ell > 0");
    let tol = 1e-12 * e.length.max(1.0);
    if a - ell < -tol || b + ell > e.length + tol {
        return Err(Error::CollarContainsVertex {
            edge: edge.0,
            s: if a - ell < -tol { a } else { b },
            width: ell,
        });
    }
    let lo = (a - ell).max(0.0);
    let hi = (b + ell).min(e.length);
    let vmin = potential.min_on_edge(edge, lo, hi, e.length);
    if vmin < energy - 1e-9 * energy.abs().max(1.0) {
        return Err(Error::RegionNotTunneling { a, b, energy });
    }
    let pot = potential.clone();
    let gref = g.clone();
    let density: Density = Arc::new(move |s: f64| (pot.eval(&gref, edge, s) - energy).max(0.0).sqrt());
    // sqrt zeros can only sit at the window ends
    let mut zeros = Vec::new();
    if (potential.eval(g, edge, a) - energy).abs() < 1e-6 * energy.abs().max(1.0) {
        zeros.push(a);
    }
    if (potential.eval(g, edge, b) - energy).abs() < 1e-6 * energy.abs().max(1.0) {
        zeros.push(b);
    }
    let cum = CumulativeIntegral::new(density, a, b, &zeros, 32, 1e-11);
    let total = cum.total();
    let norm = collar_l2(psi, &[(edge, lo, a), (edge, b, hi)]);
    let mut env = Envelope::new(Method::AgmonInterval, g.n_edges());
    env.provenance.push("edge", edge.0);
    env.provenance.push_num("a", a);
    env.provenance.push_num("b", b);
    env.provenance.push_num("ell", ell);
    env.provenance.push_num("energy", energy);
    env.provenance.push_num("collar_l2", norm);
    env.provenance
        .push("collar_norm_source", if psi.is_some() { "eigenpair" } else { "bounded-by-1" });
    let cum = Arc::new(cum);
    let profile = Arc::new(move |x: f64| {
        let pref = ((x - a + ell) * (b + ell - x) / (b - a + 2.0 * ell)).max(0.0).sqrt();
        let f = (cum.eval(x)).min(total - cum.eval(x));
        pref * norm / (ell * f.exp())
    });
    env.push_segment(edge, Segment::new(a, b, profile));
    Ok(env)
}

/// Default collar width: half the minimum edge length, capped by half the
/// tightest exit room of the component.
pub fn default_collar_width(g: &MetricGraph, comp: &TunnelingComponent) -> f64 {
    let mut ell = g.min_edge_length() / 2.0;
    for stub in &comp.exits {
        ell = ell.min(stub.max_len / 2.0);
    }
    ell
}

/// Exponential decay bound on the tunneling region: for x with
/// dist(x, boundary) >= ell,
/// `sqrt(dist(x)) * ||psi||_collars * exp(-rho(x)) / ell`,
/// where dist is the arclength metric to the component boundary and rho the
/// weighted distance. Components of the tunneling region are handled
/// independently, each with its own collar norm.
pub fn tunneling_envelope(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    partition: &RegionPartition,
    ell: Option<f64>,
    psi: Option<&Eigenpair>,
) -> Result<Envelope> {
    if partition.tunneling_is_empty() {
        return Err(Error::MethodInapplicable {
            method: "agmon".into(),
            reason: "tunneling region is empty".into(),
        });
    }
    let weight = Arc::new(agmon_weight(g, potential, energy));
    decay_envelope(
        g,
        &partition.tunneling,
        weight,
        None,
        ell,
        psi,
        Method::Agmon,
        energy,
    )
}

/// Shared construction behind [`tunneling_envelope`] and the reciprocal
/// landscape extension: exponential decay into `region` with the supplied
/// weight density, collars of width `ell` extending out of it.
#[allow(clippy::too_many_arguments)]
pub(crate) fn decay_envelope(
    g: &MetricGraph,
    region: &[Vec<(f64, f64)>],
    weight: Arc<TableWeight>,
    clip_cover: Option<Vec<(EdgeId, f64, f64)>>,
    ell: Option<f64>,
    psi: Option<&Eigenpair>,
    method: Method,
    energy: f64,
) -> Result<Envelope> {
    let method_name = method.name().to_string();
    let (boundary, mut components) = crate::spectral::assemble_components(g, region);
    if let Some(cover) = &clip_cover {
        for comp in components.iter_mut() {
            for stub in comp.exits.iter_mut() {
                let mut room = 0.0f64;
                for &(ce, a, b) in cover {
                    if ce != stub.edge {
                        continue;
                    }
                    if stub.from >= a - 1e-9 && stub.from <= b + 1e-9 {
                        let r = if stub.dir > 0.0 { b - stub.from } else { stub.from - a };
                        room = room.max(r);
                    }
                }
                stub.max_len = stub.max_len.min(room.max(0.0));
            }
        }
    }
    let mut env = Envelope::new(method, g.n_edges());
    env.provenance.push_num("energy", energy);
    let garc = Arc::new(g.clone());
    for (ci, comp) in components.iter().enumerate() {
        if comp.exits.is_empty() {
            // no boundary: the component covers the whole graph and the
            // construction does not apply
            continue;
        }
        let ell_c = match ell {
            Some(l) => l,
            None => default_collar_width(g, comp),
        };
        if ell_c <= 0.0 {
            continue;
        }
        for stub in &comp.exits {
            if stub.max_len + 1e-12 < ell_c {
                return Err(Error::CollarContainsVertex {
                    edge: stub.edge.0,
                    s: stub.from,
                    width: ell_c,
                });
            }
        }
        let stubs: Vec<(EdgeId, f64, f64)> = comp
            .exits
            .iter()
            .map(|st| (st.edge, st.from, st.from + st.dir * ell_c))
            .collect();
        let norm = collar_l2(psi, &stubs);
        let sources: Vec<GraphPoint> = comp
            .boundary
            .iter()
            .map(|&bi| boundary[bi].point)
            .collect();
        let dist_field = Arc::new(DistanceField::new(g, UnitWeight::new(g), &sources));
        let rho_field = Arc::new(DistanceField::new(g, weight.clone(), &sources));
        env.provenance
            .push(&format!("component{ci}_ell"), format!("{ell_c:.12e}"));
        env.provenance
            .push(&format!("component{ci}_collar_l2"), format!("{norm:.12e}"));
        env.provenance
            .push(&format!("component{ci}_boundary_points"), sources.len());
        for &(eid, a, b) in &comp.intervals {
            let valid = clip_by_distance(g, &dist_field, eid, a, b, ell_c);
            for (v0, v1) in valid {
                let df = dist_field.clone();
                let rf = rho_field.clone();
                let ga = garc.clone();
                let nl = norm;
                let el = ell_c;
                let profile = Arc::new(move |s: f64| {
                    let p = GraphPoint::new(eid, s);
                    let dist = df.eval(&ga, p);
                    let rho = rf.eval(&ga, p);
                    dist.max(0.0).sqrt() * nl * (-rho).exp() / el
                });
                env.push_segment(eid, Segment::new(v0, v1, profile));
            }
        }
    }
    env.provenance.push(
        "collar_norm_source",
        if psi.is_some() { "eigenpair" } else { "bounded-by-1" },
    );
    if env.is_empty() {
        return Err(Error::MethodInapplicable {
            method: method_name,
            reason: "no points at distance >= ell from the region boundary".into(),
        });
    }
    Ok(env)
}

/// Candidate separating intervals for [`delta_envelope`]: maximal vertex-free
/// bands where `E + delta <= V <= E + 2 delta`.
pub fn suggest_delta_cuts(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    delta: f64,
) -> Vec<(EdgeId, f64, f64)> {
    let outer = classify_regions(g, potential, energy + delta, None);
    let inner = classify_regions(g, potential, energy + 2.0 * delta, None);
    let mut cuts = Vec::new();
    for e in g.edges() {
        for &(a, b) in &outer.tunneling[e.id.0] {
            // subtract the deeper region's intervals
            let mut pieces = vec![(a, b)];
            for &(c, d) in &inner.tunneling[e.id.0] {
                let mut next = Vec::new();
                for (p, q) in pieces {
                    if d <= p || c >= q {
                        next.push((p, q));
                    } else {
                        if c > p {
                            next.push((p, c));
                        }
                        if d < q {
                            next.push((d, q));
                        }
                    }
                }
                pieces = next;
            }
            for (p, q) in pieces {
                if q - p > 1e-9 {
                    cuts.push((e.id, p, q));
                }
            }
        }
    }
    cuts
}

/// Sharpened tunneling bound with weight density sqrt((V - E - delta)_+):
/// for points of the `E + 2 delta` region separated from the rest of the
/// graph by the given cut intervals,
/// `psi(x)^2 <= (1/sqrt(delta)) sum_j e^{2 sqrt(delta) L_j}
///              ((1/L_j)^2 + delta/L_j) ||psi||^2_{I_j} / F(x)^2`,
/// with `F(x) = exp(rho(x, cuts))` in the shifted weight.
pub fn delta_envelope(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    delta: f64,
    cuts: &[(EdgeId, f64, f64)],
    psi: Option<&Eigenpair>,
) -> Result<Envelope> {
    assert!(delta > 0.0, "delta must be positive");
    if cuts.is_empty() {
        return Err(Error::NoSeparatingInterval { need: 0.0 });
    }
    let tol = 1e-7 * energy.abs().max(1.0);
    for &(e, a, b) in cuts {
        let len = g.edge(e).length;
        let l = b - a;
        if !(a >= -1e-12 && b <= len + 1e-12 && l > 0.0) {
            return Err(Error::NoSeparatingInterval { need: l });
        }
        let vmin = potential.min_on_edge(e, a, b, len);
        let vmax = potential.max_on_edge(e, a, b, len);
        if vmin < energy + delta - tol || vmax > energy + 2.0 * delta + tol {
            return Err(Error::NoSeparatingInterval { need: l });
        }
    }
    let inner = classify_regions(g, potential, energy + 2.0 * delta, None);
    if inner.tunneling_is_empty() {
        return Err(Error::NoSeparatingInterval { need: 0.0 });
    }
    let enclosed = enclosed_pieces(g, potential, energy + delta, cuts);
    // bound constant
    let mut c2 = 0.0;
    for &(e, a, b) in cuts {
        let l = b - a;
        let w = match psi {
            Some(p) => p.l2_on(e, a, b).powi(2),
            None => 1.0,
        };
        c2 += (2.0 * delta.sqrt() * l).exp() * (1.0 / (l * l) + delta / l) * w;
    }
    c2 /= delta.sqrt();
    let c = c2.sqrt();
    // F field anchored at the cut endpoints (distance to a sub-arc is
    // attained at one of its endpoints)
    let mut sources = Vec::new();
    for &(e, a, b) in cuts {
        sources.push(GraphPoint::new(e, a));
        sources.push(GraphPoint::new(e, b));
    }
    let weight = Arc::new(weight_for_density(g, potential, energy, delta));
    let rho_field = Arc::new(DistanceField::new(g, weight, &sources));
    let garc = Arc::new(g.clone());
    let mut env = Envelope::new(Method::AgmonDelta, g.n_edges());
    env.provenance.push_num("energy", energy);
    env.provenance.push_num("delta", delta);
    env.provenance.push_num("bound_constant", c);
    env.provenance.push("cuts", cuts.len());
    for (ci, &(e, a, b)) in cuts.iter().enumerate() {
        env.provenance
            .push(&format!("cut{ci}"), format!("edge {} [{a:.6}, {b:.6}]", e.0));
    }
    env.provenance
        .push("cut_norm_source", if psi.is_some() { "eigenpair" } else { "bounded-by-1" });
    for e in g.edges() {
        for &(ta, tb) in &inner.tunneling[e.id.0] {
            for &(pa, pb) in &enclosed[e.id.0] {
                let lo = ta.max(pa);
                let hi = tb.min(pb);
                if hi - lo > 1e-9 {
                    let rf = rho_field.clone();
                    let ga = garc.clone();
                    let eid = e.id;
                    let profile = Arc::new(move |s: f64| {
                        let rho = rf.eval(&ga, GraphPoint::new(eid, s));
                        c * (-rho).exp()
                    });
                    env.push_segment(e.id, Segment::new(lo, hi, profile));
                }
            }
        }
    }
    if env.is_empty() {
        return Err(Error::NoSeparatingInterval { need: 0.0 });
    }
    Ok(env)
}

/// Per-edge subintervals belonging to components of (graph minus cuts) that
/// stay entirely inside { V >= level }.
fn enclosed_pieces(
    g: &MetricGraph,
    potential: &PotentialField,
    level: f64,
    cuts: &[(EdgeId, f64, f64)],
) -> Vec<Vec<(f64, f64)>> {
    let nv = g.n_vertices();
    // pieces per edge after removing the cuts
    let mut pieces: Vec<Vec<(f64, f64)>> = Vec::with_capacity(g.n_edges());
    for e in g.edges() {
        let mut list = vec![(0.0, e.length)];
        for &(ce, a, b) in cuts {
            if ce != e.id {
                continue;
            }
            let mut next = Vec::new();
            for (p, q) in list {
                if b <= p || a >= q {
                    next.push((p, q));
                } else {
                    if a > p {
                        next.push((p, a));
                    }
                    if b < q {
                        next.push((b, q));
                    }
                }
            }
            list = next;
        }
        pieces.push(list);
    }
    // union-find over vertices and pieces
    let mut ids = Vec::new(); // (edge, piece idx) -> node id
    let mut node_of = vec![Vec::new(); g.n_edges()];
    let mut count = nv;
    for (ei, list) in pieces.iter().enumerate() {
        for (pi, _) in list.iter().enumerate() {
            ids.push((ei, pi));
            node_of[ei].push(count);
            count += 1;
        }
    }
    let mut parent: Vec<usize> = (0..count).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    };
    for (ei, list) in pieces.iter().enumerate() {
        let e = g.edge(EdgeId(ei));
        for (pi, &(a, b)) in list.iter().enumerate() {
            let node = node_of[ei][pi];
            if a <= 1e-12 {
                union(&mut parent, node, e.ends.0 .0);
            }
            if b >= e.length - 1e-12 {
                union(&mut parent, node, e.ends.1 .0);
            }
        }
    }
    // a component is "outer" if it contains a piece dipping below the level
    let mut outer: std::collections::BTreeSet<usize> = std::collections::BTreeSet::new();
    for (ei, list) in pieces.iter().enumerate() {
        let len = g.edge(EdgeId(ei)).length;
        for (pi, &(a, b)) in list.iter().enumerate() {
            if potential.min_on_edge(EdgeId(ei), a, b, len) < level - 1e-9 * level.abs().max(1.0) {
                let r = find(&mut parent, node_of[ei][pi]);
                outer.insert(r);
            }
        }
    }
    let mut out = vec![Vec::new(); g.n_edges()];
    for (ei, list) in pieces.iter().enumerate() {
        for (pi, &(a, b)) in list.iter().enumerate() {
            let r = find(&mut parent, node_of[ei][pi]);
            if !outer.contains(&r) {
                out[ei].push((a, b));
            }
        }
    }
    out
}

/// Subintervals of [a, b] on `edge` where the field value is >= ell.
fn clip_by_distance<W: crate::metric::EdgeWeight>(
    g: &MetricGraph,
    field: &DistanceField<W>,
    edge: EdgeId,
    a: f64,
    b: f64,
    ell: f64,
) -> Vec<(f64, f64)> {
    let n = 512;
    let f = |s: f64| field.eval(g, GraphPoint::new(edge, s)) - ell;
    let cuts = crate::roots::scan_roots(&f, a, b, n, 1e-12 * (b - a).max(1.0));
    let mut edges = vec![a];
    edges.extend(cuts.iter().copied().filter(|&c| c > a && c < b));
    edges.push(b);
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if f(mid) >= 0.0 && w[1] - w[0] > 1e-12 {
            out.push((w[0], w[1]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::potential::EdgePotential;

    #[test]
    fn constant_density_distance() {
        // V - E = c^2 on a single edge; distance from left end = c d
        let mut b = GraphBuilder::new();
        let u = b.add_vertex("u");
        let v = b.add_vertex("v");
        let e = b.add_edge(u, v, 2.0);
        let g = b.build().unwrap();
        let c: f64 = 1.5;
        let pot = PotentialField::new(&g, vec![EdgePotential::Constant(c * c + 1.0)]).unwrap();
        let d = agmon_distance(&g, &pot, 1.0, &[GraphPoint::new(e, 0.0)], GraphPoint::new(e, 1.2));
        assert!((d - c * 1.2).abs() < 1e-9, "{d}");
    }
}

//! Explicit supersolutions of `H T >= 1` (simplified torsion functions)
//! assembled from Gaussian-plus-constant pieces over intervals and
//! symmetric stars, converted into pointwise bounds by the maximum
//! principle and into exponential extensions via the reciprocal weight.

use std::sync::Arc;

use crate::agmon;
use crate::envelope::{Envelope, Method, Segment};
use crate::error::{Error, Result};
use crate::graph::{EdgeEnd, EdgeId, GraphPoint, MetricGraph, VertexId};
use crate::metric::TableWeight;
use crate::potential::PotentialField;
use crate::quad::{CumulativeIntegral, Density};
use crate::spectral::Eigenpair;

/// Quadratic lower bound `V(x) >= v1 + b^2 (x - y)^2` on `[lo, hi]` in a
/// 1-D coordinate (an edge coordinate, or distance from a star center).
#[derive(Debug, Clone, Copy)]
pub struct QuadraticMinorant {
    pub lo: f64,
    pub hi: f64,
    pub y: f64,
    pub v1: f64,
    pub b: f64,
}

/// Fit (v1, b) maximizing `b + v1/2` subject to the minorant inequality on
/// a dense check grid. `b = 0` with `v1 = min V` is always feasible.
pub fn fit_minorant(v: &dyn Fn(f64) -> f64, lo: f64, hi: f64, y: f64) -> QuadraticMinorant {
    let n = 2048;
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| v(x)).collect();
    let v1_for = |b: f64| -> f64 {
        xs.iter()
            .zip(vs.iter())
            .map(|(&x, &vx)| vx - b * b * (x - y) * (x - y))
            .fold(f64::INFINITY, f64::min)
    };
    let vmin = vs.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    let mut best = QuadraticMinorant {
        lo,
        hi,
        y,
        v1: vmin.max(0.0),
        b: 0.0,
    };
    let mut best_obj = best.b + best.v1 / 2.0;
    // largest b still feasible with v1 = 0
    let mut bmax = f64::INFINITY;
    for (&x, &vx) in xs.iter().zip(vs.iter()) {
        let u2 = (x - y) * (x - y);
        if u2 > 1e-20 {
            bmax = bmax.min((vx.max(0.0) / u2).sqrt());
        }
    }
    if !bmax.is_finite() || bmax <= 0.0 {
        return best;
    }
    let mut lo_b = bmax * 1e-3;
    let mut hi_b = bmax;
    for _pass in 0..3 {
        let m = 80;
        let mut pass_best = (best_obj, best.b);
        for i in 0..=m {
            let b = lo_b + (hi_b - lo_b) * i as f64 / m as f64;
            let v1 = v1_for(b);
            if v1 < -1e-12 {
                continue;
            }
            let obj = b + v1.max(0.0) / 2.0;
            if obj > pass_best.0 {
                pass_best = (obj, b);
            }
        }
        if pass_best.0 > best_obj {
            best_obj = pass_best.0;
            let b = pass_best.1;
            best = QuadraticMinorant {
                lo,
                hi,
                y,
                v1: v1_for(b).max(0.0),
                b,
            };
        }
        let w = (hi_b - lo_b) / m as f64;
        lo_b = (best.b - 2.0 * w).max(0.0);
        hi_b = best.b + 2.0 * w;
        if hi_b <= lo_b {
            break;
        }
    }
    best
}

/// Minimal amplitude `A` so that `A f(u) >= 1` on the minorant interval,
/// where `f(u) = (v1 + b^2 u^2)/2 + (b + v1) e^{-b u^2/2}`, together with
/// the simpler guaranteed value `A0 = 1/(b + v1/2)`.
pub fn amplitude(m: &QuadraticMinorant) -> Result<(f64, f64)> {
    if m.b <= 0.0 {
        return Err(Error::DegenerateMinorant);
    }
    let (v1, b) = (m.v1, m.b);
    let f = |u: f64| (v1 + b * b * u * u) / 2.0 + (b + v1) * (-b * u * u / 2.0).exp();
    let (ulo, uhi) = (m.lo - m.y, m.hi - m.y);
    let mut candidates = vec![ulo, uhi];
    if ulo <= 0.0 && uhi >= 0.0 {
        candidates.push(0.0);
    }
    if v1 > 0.0 {
        let u2 = -(2.0 / b) * (b / (b + v1)).ln();
        if u2 > 0.0 {
            let u = u2.sqrt();
            if u >= ulo && u <= uhi {
                candidates.push(u);
            }
            if -u >= ulo && -u <= uhi {
                candidates.push(-u);
            }
        }
    }
    let fmin = candidates.into_iter().map(f).fold(f64::INFINITY, f64::min);
    Ok((1.0 / fmin, 1.0 / (b + v1 / 2.0)))
}

/// Base profile of one piece in its local coordinate u (offset from the
/// center).
#[derive(Debug, Clone, Copy)]
pub enum PieceProfile {
    /// `A (1/2 + e^{-b u^2 / 2})`.
    Gaussian { amp: f64, b: f64 },
    /// `a1 - b1 u^2` (flat when `b1 = 0`); flagged uniform-grade.
    Quadratic { a1: f64, b1: f64 },
}

/// Placement of a piece on the graph.
#[derive(Debug, Clone)]
pub enum PieceGeometry {
    /// `[s0, s1]` on one edge with the profile centered at `center`.
    Interval {
        edge: EdgeId,
        s0: f64,
        s1: f64,
        center: f64,
    },
    /// Symmetric about a vertex: the same profile in the distance from the
    /// vertex, reaching `half_width` into every incident edge end.
    SymmetricStar { vertex: VertexId, half_width: f64 },
    /// Center displaced by `center_offset` into the privileged edge end;
    /// every other incident edge carries the mirrored decreasing tail.
    /// The outgoing derivative sum at the vertex is <= 0, which is the
    /// direction needed by the maximum principle (but not by the quadratic
    /// form inequality).
    PrivilegedStar {
        vertex: VertexId,
        privileged: (EdgeId, EdgeEnd),
        center_offset: f64,
        reach_past_center: f64,
        branch_reach: f64,
    },
}

#[derive(Debug, Clone)]
pub struct TorsionPiece {
    pub geometry: PieceGeometry,
    pub profile: PieceProfile,
    pub minorant: QuadraticMinorant,
    pub uniform_grade: bool,
}

/// Gaussian piece on an interval of one edge from a fitted minorant in the
/// edge coordinate.
pub fn gaussian_interval_piece(edge: EdgeId, m: &QuadraticMinorant) -> Result<TorsionPiece> {
    let (a, _a0) = amplitude(m)?;
    Ok(TorsionPiece {
        geometry: PieceGeometry::Interval {
            edge,
            s0: m.lo,
            s1: m.hi,
            center: m.y,
        },
        profile: PieceProfile::Gaussian { amp: a, b: m.b },
        minorant: *m,
        uniform_grade: false,
    })
}

/// Flat or quadratic piece for `b = 0` minorants: constant `2 / v1` when
/// `v1 > 0`, else a downward parabola whose curvature alone supplies
/// `H T >= 1`. No better than the uniform bound; kept so a seamless
/// landscape can always be completed.
pub fn flat_interval_piece(edge: EdgeId, m: &QuadraticMinorant) -> TorsionPiece {
    let umax = (m.hi - m.y).abs().max((m.lo - m.y).abs());
    let profile = if m.v1 > 1e-12 {
        PieceProfile::Quadratic { a1: 2.0 / m.v1, b1: 0.0 }
    } else {
        PieceProfile::Quadratic {
            a1: 0.5 * umax * umax + 1.0,
            b1: 0.5,
        }
    };
    TorsionPiece {
        geometry: PieceGeometry::Interval {
            edge,
            s0: m.lo,
            s1: m.hi,
            center: m.y,
        },
        profile,
        minorant: *m,
        uniform_grade: true,
    }
}

/// Symmetric star piece: the minorant must hold in the distance-from-vertex
/// coordinate uniformly over every incident edge end.
pub fn star_piece(
    vertex: VertexId,
    half_width: f64,
    m: &QuadraticMinorant,
) -> Result<TorsionPiece> {
    let sym = QuadraticMinorant {
        lo: -half_width,
        hi: half_width,
        y: 0.0,
        v1: m.v1,
        b: m.b,
    };
    let (a, _a0) = amplitude(&sym)?;
    Ok(TorsionPiece {
        geometry: PieceGeometry::SymmetricStar { vertex, half_width },
        profile: PieceProfile::Gaussian { amp: a, b: m.b },
        minorant: sym,
        uniform_grade: false,
    })
}

/// Flat star cap for vertices where no convex minorant exists (potential
/// maxima): constant `2 / v1` with `v1 = min V` over the cap. Uniform-grade.
pub fn flat_star_piece(vertex: VertexId, half_width: f64, v1: f64) -> Result<TorsionPiece> {
    if v1 <= 0.0 {
        return Err(Error::AssemblyInfeasible(
            "flat star cap needs min V > 0 on the cap".into(),
        ));
    }
    Ok(TorsionPiece {
        geometry: PieceGeometry::SymmetricStar { vertex, half_width },
        profile: PieceProfile::Quadratic {
            a1: 2.0 / v1,
            b1: 0.0,
        },
        minorant: QuadraticMinorant {
            lo: -half_width,
            hi: half_width,
            y: 0.0,
            v1,
            b: 0.0,
        },
        uniform_grade: true,
    })
}

/// One analytic term of the assembled landscape on an edge span.
#[derive(Debug, Clone, Copy)]
enum Term {
    Const(f64),
    /// amp (1/2 + e^{-b (s - c)^2/2}); c may lie outside the edge.
    Gauss { amp: f64, b: f64, c: f64 },
    /// q0 + q1 (s - c) + q2 (s - c)^2.
    Poly2 { c: f64, q0: f64, q1: f64, q2: f64 },
    /// A Poly2 supported on [r0, r1] only (ramp window).
    Windowed {
        r0: f64,
        r1: f64,
        c: f64,
        q0: f64,
        q1: f64,
        q2: f64,
    },
}

impl Term {
    fn eval(&self, s: f64) -> f64 {
        match *self {
            Term::Const(v) => v,
            Term::Gauss { amp, b, c } => {
                let u = s - c;
                amp * (0.5 + (-b * u * u / 2.0).exp())
            }
            Term::Poly2 { c, q0, q1, q2 } => {
                let u = s - c;
                q0 + q1 * u + q2 * u * u
            }
            Term::Windowed { r0, r1, c, q0, q1, q2 } => {
                if s < r0 || s > r1 {
                    0.0
                } else {
                    let u = s - c;
                    q0 + q1 * u + q2 * u * u
                }
            }
        }
    }

    fn d1(&self, s: f64) -> f64 {
        match *self {
            Term::Const(_) => 0.0,
            Term::Gauss { amp, b, c } => {
                let u = s - c;
                -amp * b * u * (-b * u * u / 2.0).exp()
            }
            Term::Poly2 { c, q1, q2, .. } => q1 + 2.0 * q2 * (s - c),
            Term::Windowed { r0, r1, c, q1, q2, .. } => {
                if s < r0 || s > r1 {
                    0.0
                } else {
                    q1 + 2.0 * q2 * (s - c)
                }
            }
        }
    }

    fn d2(&self, s: f64) -> f64 {
        match *self {
            Term::Const(_) => 0.0,
            Term::Gauss { amp, b, c } => {
                let u = s - c;
                amp * b * (b * u * u - 1.0) * (-b * u * u / 2.0).exp()
            }
            Term::Poly2 { q2, .. } => 2.0 * q2,
            Term::Windowed { r0, r1, q2, .. } => {
                if s < r0 || s > r1 {
                    0.0
                } else {
                    2.0 * q2
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Span {
    s0: f64,
    s1: f64,
    terms: Vec<Term>,
}

impl Span {
    fn eval(&self, s: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(s)).sum()
    }
    fn d1(&self, s: f64) -> f64 {
        self.terms.iter().map(|t| t.d1(s)).sum()
    }
    fn d2(&self, s: f64) -> f64 {
        self.terms.iter().map(|t| t.d2(s)).sum()
    }
}

/// Assembled piecewise-analytic supersolution with its certificates.
#[derive(Debug, Clone)]
pub struct LandscapeFunction {
    spans: Vec<Vec<Span>>,
    pub c0: f64,
    pub worst_slack: f64,
    pub worst_slack_at: (EdgeId, f64),
    /// Outgoing derivative sums at vertices interior to the covered set.
    pub vertex_outgoing_sums: Vec<(VertexId, f64)>,
    /// Boundary points of the covered region.
    pub boundary: Vec<GraphPoint>,
    pub verified: bool,
    pub uniform_grade: bool,
}

impl LandscapeFunction {
    pub fn covered(&self) -> Vec<(EdgeId, f64, f64)> {
        let mut out = Vec::new();
        for (e, spans) in self.spans.iter().enumerate() {
            for sp in spans {
                out.push((EdgeId(e), sp.s0, sp.s1));
            }
        }
        out
    }

    pub fn covers(&self, p: GraphPoint) -> bool {
        self.spans[p.edge.0]
            .iter()
            .any(|sp| p.s >= sp.s0 - 1e-12 && p.s <= sp.s1 + 1e-12)
    }

    pub fn eval(&self, p: GraphPoint) -> Option<f64> {
        self.spans[p.edge.0]
            .iter()
            .find(|sp| p.s >= sp.s0 - 1e-12 && p.s <= sp.s1 + 1e-12)
            .map(|sp| sp.eval(p.s))
    }

    pub fn deriv(&self, p: GraphPoint) -> Option<f64> {
        self.spans[p.edge.0]
            .iter()
            .find(|sp| p.s >= sp.s0 - 1e-12 && p.s <= sp.s1 + 1e-12)
            .map(|sp| sp.d1(p.s))
    }

    pub fn second_deriv(&self, p: GraphPoint) -> Option<f64> {
        self.spans[p.edge.0]
            .iter()
            .find(|sp| p.s >= sp.s0 - 1e-12 && p.s <= sp.s1 + 1e-12)
            .map(|sp| sp.d2(p.s))
    }

    pub fn min_value(&self) -> f64 {
        let mut m = f64::INFINITY;
        for spans in &self.spans {
            for sp in spans {
                for i in 0..=256 {
                    let s = sp.s0 + (sp.s1 - sp.s0) * i as f64 / 256.0;
                    m = m.min(sp.eval(s));
                }
            }
        }
        m
    }
}

fn base_term(profile: &PieceProfile, center: f64) -> Term {
    match *profile {
        PieceProfile::Gaussian { amp, b } => Term::Gauss { amp, b, c: center },
        PieceProfile::Quadratic { a1, b1 } => Term::Poly2 {
            c: center,
            q0: a1,
            q1: 0.0,
            q2: -b1,
        },
    }
}

struct RawSpan {
    edge: EdgeId,
    span: Span,
    /// endpoints that are star centers (no ramp, value not zeroed)
    center_ends: Vec<f64>,
}

fn piece_spans(g: &MetricGraph, piece: &TorsionPiece) -> Vec<RawSpan> {
    match &piece.geometry {
        PieceGeometry::Interval { edge, s0, s1, center } => vec![RawSpan {
            edge: *edge,
            span: Span {
                s0: *s0,
                s1: *s1,
                terms: vec![base_term(&piece.profile, *center)],
            },
            center_ends: Vec::new(),
        }],
        PieceGeometry::SymmetricStar { vertex, half_width } => {
            let mut out = Vec::new();
            for &(eid, end) in g.incident(*vertex) {
                let e = g.edge(eid);
                let (s0, s1, center) = match end {
                    EdgeEnd::Start => (0.0, half_width.min(e.length), 0.0),
                    EdgeEnd::End => ((e.length - half_width).max(0.0), e.length, e.length),
                };
                out.push(RawSpan {
                    edge: eid,
                    span: Span {
                        s0,
                        s1,
                        terms: vec![base_term(&piece.profile, center)],
                    },
                    center_ends: vec![center],
                });
            }
            out
        }
        PieceGeometry::PrivilegedStar {
            vertex,
            privileged,
            center_offset,
            reach_past_center,
            branch_reach,
        } => {
            let mut out = Vec::new();
            for &(eid, end) in g.incident(*vertex) {
                let e = g.edge(eid);
                let is_priv = (eid, end) == *privileged;
                let (s0, s1, center, vcoord) = match (end, is_priv) {
                    (EdgeEnd::Start, true) => {
                        (0.0, center_offset + reach_past_center, *center_offset, 0.0)
                    }
                    (EdgeEnd::End, true) => (
                        e.length - center_offset - reach_past_center,
                        e.length,
                        e.length - center_offset,
                        e.length,
                    ),
                    (EdgeEnd::Start, false) => (0.0, *branch_reach, -center_offset, 0.0),
                    (EdgeEnd::End, false) => (
                        e.length - branch_reach,
                        e.length,
                        e.length + center_offset,
                        e.length,
                    ),
                };
                out.push(RawSpan {
                    edge: eid,
                    span: Span {
                        s0: s0.max(0.0),
                        s1: s1.min(e.length),
                        terms: vec![base_term(&piece.profile, center)],
                    },
                    center_ends: vec![vcoord],
                });
            }
            out
        }
    }
}

/// Assemble pieces into a certified supersolution. At junctions interior
/// to the covered region, quadratic ramps make the derivatives vanish and
/// per-piece constants zero the junction values (which joins pieces C^1
/// and closes cycles automatically); endpoints on the boundary of the
/// cover stay untouched. A global constant then restores `H T >= 1`,
/// verified on a refining grid against the true potential.
pub fn assemble_landscape(
    g: &MetricGraph,
    potential: &PotentialField,
    pieces: &[TorsionPiece],
) -> Result<LandscapeFunction> {
    assert!(!pieces.is_empty(), "need at least one piece");
    let mut piece_raws: Vec<Vec<RawSpan>> = pieces.iter().map(|p| piece_spans(g, p)).collect();
    let uniform_grade = pieces.iter().any(|p| p.uniform_grade);

    // classify endpoints: interior junctions get ramps and zeroing
    let tol = 1e-9;
    let extents: Vec<Vec<(f64, f64)>> = {
        let mut by_edge = vec![Vec::new(); g.n_edges()];
        for raws in &piece_raws {
            for rs in raws {
                by_edge[rs.edge.0].push((rs.span.s0, rs.span.s1));
            }
        }
        by_edge
    };
    let touches = |e: EdgeId, c: f64| -> usize {
        extents[e.0]
            .iter()
            .filter(|&&(a, b)| (a - c).abs() < tol || (b - c).abs() < tol)
            .count()
    };
    let vertex_covered = |v: VertexId| -> bool {
        g.incident(v).iter().all(|&(eid, end)| {
            let c = g.edge(eid).coord_at(end);
            extents[eid.0]
                .iter()
                .any(|&(a, b)| c >= a - tol && c <= b + tol && (b - a) > tol)
        })
    };
    // degree-1 vertices stay boundary points even when covered (the
    // maximum-principle bound consumes a boundary value there)
    let is_interior_junction = |e: EdgeId, c: f64| -> bool {
        let el = g.edge(e);
        if c <= tol || c >= el.length - tol {
            let v = if c <= tol { el.ends.0 } else { el.ends.1 };
            g.degree(v) >= 2 && vertex_covered(v)
        } else {
            touches(e, c) >= 2
        }
    };

    let mut any_zeroed = false;
    for raws in piece_raws.iter_mut() {
        let mut junction_vals = Vec::new();
        for rs in raws.iter_mut() {
            let len_span = rs.span.s1 - rs.span.s0;
            let eps = (0.05 * len_span).max(1e-9);
            for (endpoint, inward) in [(rs.span.s0, 1.0), (rs.span.s1, -1.0)] {
                let is_center = rs
                    .center_ends
                    .iter()
                    .any(|&c| (c - endpoint).abs() < 1e-12);
                if is_center || !is_interior_junction(rs.edge, endpoint) {
                    continue;
                }
                let d_inward: f64 =
                    rs.span.terms.iter().map(|t| t.d1(endpoint)).sum::<f64>() * inward;
                let (r0, r1) = if inward > 0.0 {
                    (endpoint, (endpoint + eps).min(rs.span.s1))
                } else {
                    ((endpoint - eps).max(rs.span.s0), endpoint)
                };
                rs.span.terms.push(Term::Windowed {
                    r0,
                    r1,
                    c: endpoint,
                    q0: d_inward * eps / 2.0,
                    q1: -d_inward * inward,
                    q2: d_inward / (2.0 * eps),
                });
                junction_vals.push(rs.span.eval(endpoint));
            }
        }
        if !junction_vals.is_empty() {
            let mn = junction_vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let mx = junction_vals
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            if mx - mn > 1e-7 * mx.abs().max(1.0) {
                return Err(Error::AssemblyInfeasible(format!(
                    "piece junction values differ ({mn:.6e} vs {mx:.6e}); \
                     use symmetric pieces or matched junctions"
                )));
            }
            let ci = 0.5 * (mn + mx);
            for rs in raws.iter_mut() {
                rs.span.terms.push(Term::Const(-ci));
            }
            any_zeroed = true;
        }
    }
    let mut spans: Vec<Vec<Span>> = vec![Vec::new(); g.n_edges()];
    for raws in piece_raws {
        for rs in raws {
            if rs.span.s1 - rs.span.s0 > 1e-12 {
                spans[rs.edge.0].push(rs.span);
            }
        }
    }

    for (e, list) in spans.iter_mut().enumerate() {
        list.sort_by(|a, b| a.s0.partial_cmp(&b.s0).unwrap());
        for w in list.windows(2) {
            if w[1].s0 < w[0].s1 - 1e-9 {
                return Err(Error::AssemblyInfeasible(format!(
                    "pieces overlap on edge {e} near s = {:.6}",
                    w[1].s0
                )));
            }
        }
    }

    // smallest global constant restoring H T >= 1, on a refining grid
    let target = -1e-8;
    let mut c0: f64 = if any_zeroed { 1e-9 } else { 0.0 };
    let mut grid = 512usize;
    for _pass in 0..4 {
        let mut needed: f64 = c0;
        let mut worst = f64::INFINITY;
        for (e, list) in spans.iter().enumerate() {
            let eid = EdgeId(e);
            for sp in list {
                for i in 0..=grid {
                    let s = (sp.s0 + (sp.s1 - sp.s0) * i as f64 / grid as f64)
                        .clamp(sp.s0 + 1e-12, sp.s1 - 1e-12);
                    let v = potential.eval(g, eid, s);
                    let base = -sp.d2(s) + v * sp.eval(s) - 1.0;
                    worst = worst.min(base + v * needed);
                    if base + v * needed < target {
                        if v <= 1e-12 {
                            return Err(Error::SupersolutionFailure {
                                worst: base,
                                edge: e,
                                s,
                            });
                        }
                        needed = needed.max((target * 0.5 - base) / v);
                    }
                }
            }
        }
        if needed <= c0 && worst >= target {
            break;
        }
        c0 = needed;
        grid *= 2;
    }
    for list in spans.iter_mut() {
        for sp in list.iter_mut() {
            sp.terms.push(Term::Const(c0));
        }
    }
    let mut final_worst = (f64::INFINITY, (EdgeId(0), 0.0));
    for (e, list) in spans.iter().enumerate() {
        let eid = EdgeId(e);
        for sp in list {
            for i in 0..=1024 {
                let s = (sp.s0 + (sp.s1 - sp.s0) * i as f64 / 1024.0)
                    .clamp(sp.s0 + 1e-12, sp.s1 - 1e-12);
                let v = potential.eval(g, eid, s);
                let slack = -sp.d2(s) + v * sp.eval(s) - 1.0;
                if slack < final_worst.0 {
                    final_worst = (slack, (eid, s));
                }
            }
        }
    }
    if final_worst.0 < target {
        return Err(Error::SupersolutionFailure {
            worst: final_worst.0,
            edge: final_worst.1 .0 .0,
            s: final_worst.1 .1,
        });
    }

    // outgoing sums at fully covered interior vertices
    let mut vertex_outgoing_sums = Vec::new();
    for v in g.vertices() {
        let mut all_covered = true;
        let mut sum = 0.0;
        for &(eid, end) in g.incident(v) {
            let e = g.edge(eid);
            let s = e.coord_at(end);
            match spans[eid.0]
                .iter()
                .find(|sp| s >= sp.s0 - 1e-9 && s <= sp.s1 + 1e-9)
            {
                Some(sp) => {
                    let sign = match end {
                        EdgeEnd::Start => 1.0,
                        EdgeEnd::End => -1.0,
                    };
                    sum += sign * sp.d1(s);
                }
                None => all_covered = false,
            }
        }
        if all_covered && g.degree(v) >= 2 {
            vertex_outgoing_sums.push((v, sum));
        }
    }
    // boundary points of the covered region, deduplicated at vertices
    let mut boundary: Vec<GraphPoint> = Vec::new();
    for (e, list) in spans.iter().enumerate() {
        let eid = EdgeId(e);
        let el = g.edge(eid);
        for sp in list {
            for endpoint in [sp.s0, sp.s1] {
                let at_vertex = endpoint <= 1e-9 || endpoint >= el.length - 1e-9;
                let candidate = GraphPoint::new(eid, endpoint);
                let is_boundary = if at_vertex {
                    let v = if endpoint <= 1e-9 { el.ends.0 } else { el.ends.1 };
                    !vertex_outgoing_sums.iter().any(|&(w, _)| w == v)
                } else {
                    list.iter()
                        .filter(|o| {
                            (o.s0 - endpoint).abs() < 1e-9 || (o.s1 - endpoint).abs() < 1e-9
                        })
                        .count()
                        < 2
                };
                if is_boundary && !boundary.iter().any(|&b| g.same_point(b, candidate, 1e-9)) {
                    boundary.push(candidate);
                }
            }
        }
    }

    Ok(LandscapeFunction {
        spans,
        c0,
        worst_slack: final_worst.0,
        worst_slack_at: final_worst.1,
        vertex_outgoing_sums,
        boundary,
        verified: true,
        uniform_grade,
    })
}

/// Maximum-principle bound from a verified supersolution:
/// `max_boundary (|psi| - E psi_sup T)_+  +  E psi_sup T(x)` over the
/// covered region. `boundary_values` must align with
/// [`LandscapeFunction::boundary`]; an empty boundary (closed cover)
/// drops the first term.
pub fn max_principle_envelope(
    g: &MetricGraph,
    landscape: &LandscapeFunction,
    energy: f64,
    psi_sup: f64,
    boundary_values: &[f64],
) -> Result<Envelope> {
    if !landscape.verified {
        return Err(Error::UnverifiedSupersolution);
    }
    assert_eq!(
        boundary_values.len(),
        landscape.boundary.len(),
        "one boundary value per boundary point"
    );
    let mut bterm: f64 = 0.0;
    for (bp, &bv) in landscape.boundary.iter().zip(boundary_values.iter()) {
        let t = landscape.eval(*bp).unwrap_or(0.0);
        bterm = bterm.max((bv.abs() - energy * psi_sup * t).max(0.0));
    }
    let mut env = Envelope::new(Method::Torsion, g.n_edges());
    env.provenance.push_num("energy", energy);
    env.provenance.push_num("psi_sup", psi_sup);
    env.provenance.push_num("c0", landscape.c0);
    env.provenance.push_num("boundary_term", bterm);
    env.provenance
        .push_num("worst_supersolution_slack", landscape.worst_slack);
    env.provenance.push("boundary_points", landscape.boundary.len());
    if landscape.uniform_grade {
        env.provenance.push("grade", "uniform-grade (flat pieces present)");
    }
    let land = Arc::new(landscape.clone());
    for (eid, s0, s1) in landscape.covered() {
        let la = land.clone();
        let profile = Arc::new(move |s: f64| {
            bterm + energy * psi_sup * la.eval(GraphPoint::new(eid, s)).unwrap_or(f64::INFINITY)
        });
        env.push_segment(eid, Segment::new(s0, s1, profile));
    }
    Ok(env)
}

/// Exponential extension past the classically allowed boundary: on the
/// region where `1/T - E >= delta`, reuse the tunneling machinery with
/// weight density `sqrt(1/T - E - delta)`.
pub fn torsion_agmon_extension(
    g: &MetricGraph,
    landscape: &LandscapeFunction,
    energy: f64,
    delta: f64,
    psi: Option<&Eigenpair>,
) -> Result<Envelope> {
    if !landscape.verified {
        return Err(Error::UnverifiedSupersolution);
    }
    assert!(delta > 0.0);
    let mut region: Vec<Vec<(f64, f64)>> = vec![Vec::new(); g.n_edges()];
    let land = Arc::new(landscape.clone());
    for (eid, s0, s1) in landscape.covered() {
        let la = land.clone();
        let f = move |s: f64| {
            1.0 / la.eval(GraphPoint::new(eid, s)).unwrap_or(f64::INFINITY) - energy - delta
        };
        let cuts = crate::roots::scan_roots(&f, s0, s1, 512, 1e-13 * (s1 - s0).max(1.0));
        let mut pts = vec![s0];
        pts.extend(cuts.iter().copied().filter(|&c| c > s0 && c < s1));
        pts.push(s1);
        for w in pts.windows(2) {
            if f(0.5 * (w[0] + w[1])) >= 0.0 && w[1] - w[0] > 1e-10 {
                region[eid.0].push((w[0], w[1]));
            }
        }
    }
    if region.iter().all(|r| r.is_empty()) {
        return Err(Error::EmptyRegion);
    }
    let mut tables = Vec::with_capacity(g.n_edges());
    for e in g.edges() {
        let la = land.clone();
        let eid = e.id;
        let density: Density = Arc::new(move |s: f64| match la.eval(GraphPoint::new(eid, s)) {
            Some(t) => (1.0 / t - energy - delta).max(0.0).sqrt(),
            None => 0.0,
        });
        let mut zeros = Vec::new();
        for &(a, b) in &region[e.id.0] {
            zeros.push(a);
            zeros.push(b);
        }
        tables.push(CumulativeIntegral::new(
            density, 0.0, e.length, &zeros, 64, 1e-11,
        ));
    }
    let weight = Arc::new(TableWeight::new(tables));
    agmon::decay_envelope(
        g,
        &region,
        weight,
        Some(landscape.covered()),
        None,
        psi,
        Method::TorsionAgmon,
        energy,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minorant_constant_potential() {
        // V = 5 on [-1,1]: objective b + (5 - b^2)/2 peaks at b = 1
        let m = fit_minorant(&|_x| 5.0, -1.0, 1.0, 0.0);
        assert!((m.b - 1.0).abs() < 0.02, "b = {}", m.b);
        assert!((m.v1 - (5.0 - m.b * m.b)).abs() < 1e-9);
    }

    #[test]
    fn minorant_pure_quadratic_recovers_curvature() {
        let m = fit_minorant(&|x: f64| 4.0 * x * x, -1.0, 1.0, 0.0);
        assert!((m.b - 2.0).abs() < 0.02, "b = {}", m.b);
        assert!(m.v1.abs() < 1e-9);
    }

    #[test]
    fn minorant_matches_exhaustive_grid_search() {
        let q = 10.0;
        let v = |x: f64| 2.0 * q * (1.0 - (2.0 * x).cos());
        let (lo, hi, y) = (-1.2, 1.2, 0.0);
        let xs: Vec<f64> = (0..=800)
            .map(|i| lo + (hi - lo) * i as f64 / 800.0)
            .collect();
        let mut best_obj: f64 = 0.0;
        for ib in 0..=400 {
            let b = 8.0 * ib as f64 / 400.0;
            let v1 = xs
                .iter()
                .map(|&x| v(x) - b * b * (x - y) * (x - y))
                .fold(f64::INFINITY, f64::min);
            if v1 >= 0.0 {
                best_obj = best_obj.max(b + v1 / 2.0);
            }
        }
        let m = fit_minorant(&v, lo, hi, y);
        let obj = m.b + m.v1 / 2.0;
        assert!(
            obj >= best_obj - 0.02 * best_obj.abs(),
            "fit {obj} vs oracle {best_obj}"
        );
        for &x in &xs {
            assert!(v(x) - (m.v1 + m.b * m.b * (x - y) * (x - y)) >= -1e-10);
        }
    }

    #[test]
    fn amplitude_v1_zero_is_one_over_b() {
        let m = QuadraticMinorant {
            lo: -1.0,
            hi: 1.0,
            y: 0.0,
            v1: 0.0,
            b: 1.7,
        };
        let (a, a0) = amplitude(&m).unwrap();
        assert!((a - 1.0 / 1.7).abs() < 1e-14);
        assert!((a0 - 1.0 / 1.7).abs() < 1e-14);
    }

    #[test]
    fn amplitude_matches_dense_grid_minimum() {
        let m = QuadraticMinorant {
            lo: -1.0,
            hi: 1.0,
            y: 0.0,
            v1: 0.7,
            b: 1.3,
        };
        let (a, _) = amplitude(&m).unwrap();
        let f = |u: f64| {
            (m.v1 + m.b * m.b * u * u) / 2.0 + (m.b + m.v1) * (-m.b * u * u / 2.0).exp()
        };
        let mut fmin = f64::INFINITY;
        for i in 0..=100_000 {
            let u = -1.0 + 2.0 * i as f64 / 100_000.0;
            fmin = fmin.min(f(u));
        }
        assert!((1.0 / a - fmin).abs() < 1e-8, "{} vs {}", 1.0 / a, fmin);
    }

    #[test]
    fn degenerate_minorant_rejected() {
        let m = QuadraticMinorant {
            lo: 0.0,
            hi: 1.0,
            y: 0.5,
            v1: 2.0,
            b: 0.0,
        };
        assert!(matches!(amplitude(&m), Err(Error::DegenerateMinorant)));
    }
}

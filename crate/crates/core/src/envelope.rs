//! Certified pointwise upper bounds. An [`Envelope`] carries a method tag,
//! a validity region given as per-edge subintervals, an evaluable profile
//! on each subinterval, and a provenance record listing every measured
//! quantity that entered the bound.

use std::fmt;
use std::sync::Arc;

use crate::graph::{EdgeId, GraphPoint, MetricGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Agmon,
    AgmonInterval,
    AgmonDelta,
    Torsion,
    TorsionAgmon,
    Davies,
    Oscillation,
    Gronwall,
    Window,
    Uniform,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Agmon => "agmon",
            Method::AgmonInterval => "agmon-interval",
            Method::AgmonDelta => "agmon-delta",
            Method::Torsion => "torsion",
            Method::TorsionAgmon => "torsion-agmon",
            Method::Davies => "davies",
            Method::Oscillation => "oscillation",
            Method::Gronwall => "gronwall",
            Method::Window => "window",
            Method::Uniform => "uniform",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inputs and measured constants behind a bound, as ordered key/value
/// pairs (deterministic emission order).
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub entries: Vec<(String, String)>,
}

impl Provenance {
    pub fn push(&mut self, key: &str, value: impl fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_num(&mut self, key: &str, value: f64) {
        self.entries.push((key.to_string(), format!("{value:.12e}")));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One validity subinterval of an edge with its bound profile.
#[derive(Clone)]
pub struct Segment {
    pub s0: f64,
    pub s1: f64,
    profile: Profile,
}

impl Segment {
    pub fn new(s0: f64, s1: f64, profile: Profile) -> Self {
        Segment { s0, s1, profile }
    }

    pub fn constant(s0: f64, s1: f64, c: f64) -> Self {
        Segment {
            s0,
            s1,
            profile: Arc::new(move |_| c),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.profile)(s)
    }

    pub fn contains(&self, s: f64, slack: f64) -> bool {
        s >= self.s0 - slack && s <= self.s1 + slack
    }
}

impl fmt::Debug for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Segment[{:.6}, {:.6}]", self.s0, self.s1)
    }
}

#[derive(Debug, Clone)]
pub struct Envelope {
    pub method: Method,
    pub provenance: Provenance,
    /// Per edge index: validity subintervals with profiles.
    segments: Vec<Vec<Segment>>,
}

impl Envelope {
    pub fn new(method: Method, n_edges: usize) -> Self {
        Envelope {
            method,
            provenance: Provenance::default(),
            segments: vec![Vec::new(); n_edges],
        }
    }

    pub fn push_segment(&mut self, e: EdgeId, seg: Segment) {
        self.segments[e.0].push(seg);
    }

    pub fn segments_on(&self, e: EdgeId) -> &[Segment] {
        &self.segments[e.0]
    }

    pub fn is_empty(&self) -> bool {
        self.segments.iter().all(|s| s.is_empty())
    }

    pub fn covers(&self, p: GraphPoint) -> bool {
        self.segments[p.edge.0].iter().any(|s| s.contains(p.s, 0.0))
    }

    /// Bound value at a point inside the validity region. Points covered by
    /// several segments get the smallest (sharpest) applicable value.
    pub fn eval(&self, p: GraphPoint) -> Option<f64> {
        let mut best: Option<f64> = None;
        for seg in &self.segments[p.edge.0] {
            if seg.contains(p.s, 0.0) {
                let v = seg.eval(p.s);
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        best
    }

    /// Validity region as per-edge intervals.
    pub fn validity(&self) -> Vec<(EdgeId, f64, f64)> {
        let mut out = Vec::new();
        for (e, segs) in self.segments.iter().enumerate() {
            for s in segs {
                out.push((EdgeId(e), s.s0, s.s1));
            }
        }
        out
    }

    /// Uniform samples of the bound over its validity region:
    /// (edge, s, value), `per_edge + 1` grid points per covered edge.
    pub fn sample(&self, g: &MetricGraph, per_edge: usize) -> Vec<(EdgeId, f64, f64)> {
        let mut rows = Vec::new();
        for e in g.edges() {
            if self.segments[e.id.0].is_empty() {
                continue;
            }
            for i in 0..=per_edge {
                let s = e.length * i as f64 / per_edge as f64;
                if let Some(v) = self.eval(GraphPoint::new(e.id, s)) {
                    rows.push((e.id, s, v));
                }
            }
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    #[test]
    fn segment_lookup_and_min_over_overlaps() {
        let mut b = GraphBuilder::new();
        let u = b.add_vertex("u");
        let v = b.add_vertex("v");
        let e = b.add_edge(u, v, 2.0);
        let g = b.build().unwrap();
        let mut env = Envelope::new(Method::Uniform, g.n_edges());
        env.push_segment(e, Segment::constant(0.0, 2.0, 3.0));
        env.push_segment(e, Segment::new(0.5, 1.0, Arc::new(|s| 1.0 + s)));
        assert_eq!(env.eval(GraphPoint::new(e, 0.1)), Some(3.0));
        assert_eq!(env.eval(GraphPoint::new(e, 0.75)), Some(1.75));
        assert!(env.covers(GraphPoint::new(e, 1.5)));
        let rows = env.sample(&g, 4);
        assert_eq!(rows.len(), 5);
    }
}

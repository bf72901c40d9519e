//! Metric graphs: a combinatorial graph whose edges carry arclength
//! coordinates. Loops and multi-edges are allowed; every edge owns a fixed
//! orientation and all per-edge data is stored in that orientation.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

/// Which end of an (oriented) edge is incident to a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeEnd {
    Start,
    End,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub id: EdgeId,
    pub ends: (VertexId, VertexId),
    pub length: f64,
    pub label: String,
}

impl Edge {
    pub fn other_end(&self, v: VertexId) -> VertexId {
        if self.ends.0 == v {
            self.ends.1
        } else {
            self.ends.0
        }
    }

    pub fn vertex_at(&self, end: EdgeEnd) -> VertexId {
        match end {
            EdgeEnd::Start => self.ends.0,
            EdgeEnd::End => self.ends.1,
        }
    }

    /// Arclength coordinate of the given end.
    pub fn coord_at(&self, end: EdgeEnd) -> f64 {
        match end {
            EdgeEnd::Start => 0.0,
            EdgeEnd::End => self.length,
        }
    }
}

/// A point on the graph: an edge and an arclength coordinate measured from
/// the edge's first endpoint. Points with `s` at 0 or the edge length are
/// identified with the corresponding vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPoint {
    pub edge: EdgeId,
    pub s: f64,
}

impl GraphPoint {
    pub fn new(edge: EdgeId, s: f64) -> Self {
        GraphPoint { edge, s }
    }
}

/// One traversed piece of an edge. `enter > exit` means the edge is walked
/// against its stored orientation.
#[derive(Debug, Clone, Copy)]
pub struct PathSegment {
    pub edge: EdgeId,
    pub enter: f64,
    pub exit: f64,
}

impl PathSegment {
    pub fn length(&self) -> f64 {
        (self.exit - self.enter).abs()
    }
}

/// An oriented walk through the graph as a list of edge segments.
#[derive(Debug, Clone, Default)]
pub struct GraphPath {
    pub segments: Vec<PathSegment>,
}

impl GraphPath {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length()).sum()
    }

    /// Consecutive segments must share a vertex of the graph.
    pub fn is_consistent(&self, g: &MetricGraph) -> bool {
        for w in self.segments.windows(2) {
            let a = GraphPoint::new(w[0].edge, w[0].exit);
            let b = GraphPoint::new(w[1].edge, w[1].enter);
            if !g.same_point(a, b, 1e-9) {
                return false;
            }
        }
        true
    }
}

/// Validation limits for the standing assumptions. `l_min` is the shortest
/// admissible edge, `d_max` the largest admissible vertex degree.
#[derive(Debug, Clone, Copy)]
pub struct GraphConfig {
    pub l_min: f64,
    pub d_max: usize,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            l_min: 1e-6,
            d_max: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetricGraph {
    n_vertices: usize,
    edges: Vec<Edge>,
    vertex_labels: Vec<String>,
    /// Per vertex: incident (edge, end) pairs. A loop contributes both ends.
    incidence: Vec<Vec<(EdgeId, EdgeEnd)>>,
    config: GraphConfig,
}

impl MetricGraph {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    pub fn vertex_label(&self, v: VertexId) -> &str {
        &self.vertex_labels[v.0]
    }

    pub fn incident(&self, v: VertexId) -> &[(EdgeId, EdgeEnd)] {
        &self.incidence[v.0]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v.0].len()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.length)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn config(&self) -> &GraphConfig {
        &self.config
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.n_vertices).map(VertexId)
    }

    /// The vertex a point sits on, if it sits on one (within `tol`).
    pub fn vertex_of_point(&self, p: GraphPoint, tol: f64) -> Option<VertexId> {
        let e = self.edge(p.edge);
        if p.s.abs() <= tol {
            Some(e.ends.0)
        } else if (p.s - e.length).abs() <= tol {
            Some(e.ends.1)
        } else {
            None
        }
    }

    /// Equality of graph points, identifying edge ends with vertices.
    pub fn same_point(&self, a: GraphPoint, b: GraphPoint, tol: f64) -> bool {
        if a.edge == b.edge && (a.s - b.s).abs() <= tol {
            return true;
        }
        match (self.vertex_of_point(a, tol), self.vertex_of_point(b, tol)) {
            (Some(u), Some(v)) => u == v,
            _ => false,
        }
    }

    fn check(&self) -> Result<()> {
        for e in &self.edges {
            if !(e.length.is_finite() && e.length >= self.config.l_min) {
                return Err(Error::EdgeTooShort {
                    edge: e.id.0,
                    length: e.length,
                    min: self.config.l_min,
                });
            }
        }
        for v in 0..self.n_vertices {
            if self.incidence[v].len() > self.config.d_max {
                return Err(Error::DegreeTooLarge {
                    vertex: v,
                    degree: self.incidence[v].len(),
                    max: self.config.d_max,
                });
            }
        }
        if self.n_vertices > 0 {
            let mut seen = vec![false; self.n_vertices];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &(eid, _) in &self.incidence[v] {
                    let w = self.edge(eid).other_end(VertexId(v)).0;
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            if let Some(v) = seen.iter().position(|s| !s) {
                return Err(Error::DisconnectedGraph(v));
            }
        }
        Ok(())
    }

    /// Doubled graph without leaves: two copies of `self` glued at the
    /// former degree-1 vertices. A graph with no leaves is returned as-is
    /// (copy index 0 for every edge).
    pub fn double_leaves(&self) -> DoubledGraph {
        let leaves: Vec<bool> = (0..self.n_vertices)
            .map(|v| self.incidence[v].len() == 1)
            .collect();
        if !leaves.iter().any(|&l| l) {
            return DoubledGraph {
                graph: self.clone(),
                edge_origin: self.edges.iter().map(|e| (e.id, 0)).collect(),
            };
        }
        let mut b = GraphBuilder::with_config(self.config);
        // leaf vertices map to one shared vertex; others get two copies
        let mut map = vec![[usize::MAX; 2]; self.n_vertices];
        for v in 0..self.n_vertices {
            if leaves[v] {
                let nv = b.add_vertex(&format!("{}", self.vertex_labels[v]));
                map[v] = [nv.0, nv.0];
            } else {
                let a = b.add_vertex(&format!("{}+", self.vertex_labels[v]));
                let c = b.add_vertex(&format!("{}-", self.vertex_labels[v]));
                map[v] = [a.0, c.0];
            }
        }
        let mut edge_origin = Vec::with_capacity(2 * self.edges.len());
        for copy in 0..2usize {
            for e in &self.edges {
                b.add_edge_labeled(
                    VertexId(map[e.ends.0 .0][copy]),
                    VertexId(map[e.ends.1 .0][copy]),
                    e.length,
                    &format!("{}{}", e.label, if copy == 0 { "+" } else { "-" }),
                );
                edge_origin.push((e.id, copy));
            }
        }
        let graph = b.build().expect("doubling preserves validity");
        DoubledGraph { graph, edge_origin }
    }
}

/// Result of [`MetricGraph::double_leaves`]: the doubled graph and, for each
/// of its edges, the originating edge and copy index.
#[derive(Debug, Clone)]
pub struct DoubledGraph {
    pub graph: MetricGraph,
    pub edge_origin: Vec<(EdgeId, usize)>,
}

#[derive(Debug, Default)]
pub struct GraphBuilder {
    vertex_labels: Vec<String>,
    edges: Vec<(VertexId, VertexId, f64, String)>,
    config: GraphConfig,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::with_config(GraphConfig::default())
    }

    pub fn with_config(config: GraphConfig) -> Self {
        GraphBuilder {
            vertex_labels: Vec::new(),
            edges: Vec::new(),
            config,
        }
    }

    pub fn add_vertex(&mut self, label: &str) -> VertexId {
        self.vertex_labels.push(label.to_string());
        VertexId(self.vertex_labels.len() - 1)
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId, length: f64) -> EdgeId {
        let label = format!("e{}", self.edges.len());
        self.add_edge_labeled(u, v, length, &label)
    }

    pub fn add_edge_labeled(
        &mut self,
        u: VertexId,
        v: VertexId,
        length: f64,
        label: &str,
    ) -> EdgeId {
        self.edges.push((u, v, length, label.to_string()));
        EdgeId(self.edges.len() - 1)
    }

    pub fn build(self) -> Result<MetricGraph> {
        let n = self.vertex_labels.len();
        let mut incidence = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, (u, v, length, label)) in self.edges.into_iter().enumerate() {
            let id = EdgeId(i);
            incidence[u.0].push((id, EdgeEnd::Start));
            incidence[v.0].push((id, EdgeEnd::End));
            edges.push(Edge {
                id,
                ends: (u, v),
                length,
                label,
            });
        }
        let g = MetricGraph {
            n_vertices: n,
            edges,
            vertex_labels: self.vertex_labels,
            incidence,
            config: self.config,
        };
        g.check()?;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(len: f64) -> MetricGraph {
        let mut b = GraphBuilder::new();
        let v = b.add_vertex("v");
        b.add_edge(v, v, len);
        b.build().unwrap()
    }

    #[test]
    fn single_loop_is_a_circle() {
        let g = circle(2.0 * std::f64::consts::PI);
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.degree(VertexId(0)), 2);
        assert!((g.total_length() - 2.0 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn tetrahedron_dimensions() {
        let mut b = GraphBuilder::new();
        let vs: Vec<_> = (0..4).map(|i| b.add_vertex(&format!("v{i}"))).collect();
        let l = 2.0 * std::f64::consts::PI;
        for i in 0..4 {
            for j in (i + 1)..4 {
                b.add_edge(vs[i], vs[j], l);
            }
        }
        let g = b.build().unwrap();
        assert_eq!(g.n_edges(), 6);
        assert!((g.total_length() - 12.0 * std::f64::consts::PI).abs() < 1e-12);
        for v in g.vertices() {
            assert_eq!(g.degree(v), 3);
        }
    }

    #[test]
    fn too_short_edge_rejected() {
        let mut b = GraphBuilder::new();
        let u = b.add_vertex("u");
        let v = b.add_vertex("v");
        b.add_edge(u, v, 1e-9);
        match b.build() {
            Err(Error::EdgeTooShort { edge: 0, .. }) => {}
            other => panic!("expected EdgeTooShort, got {other:?}"),
        }
    }

    #[test]
    fn disconnected_rejected() {
        let mut b = GraphBuilder::new();
        let u = b.add_vertex("u");
        let v = b.add_vertex("v");
        let w = b.add_vertex("w");
        let x = b.add_vertex("x");
        b.add_edge(u, v, 1.0);
        b.add_edge(w, x, 1.0);
        match b.build() {
            Err(Error::DisconnectedGraph(_)) => {}
            other => panic!("expected DisconnectedGraph, got {other:?}"),
        }
    }

    #[test]
    fn degree_cap_enforced() {
        let mut b = GraphBuilder::with_config(GraphConfig {
            d_max: 3,
            ..Default::default()
        });
        let c = b.add_vertex("c");
        for i in 0..4 {
            let v = b.add_vertex(&format!("l{i}"));
            b.add_edge(c, v, 1.0);
        }
        assert!(matches!(
            b.build(),
            Err(Error::DegreeTooLarge { vertex: 0, degree: 4, max: 3 })
        ));
    }

    #[test]
    fn double_interval_gives_circle_of_twice_the_length() {
        let mut b = GraphBuilder::new();
        let u = b.add_vertex("u");
        let v = b.add_vertex("v");
        b.add_edge(u, v, 1.0);
        let g = b.build().unwrap();
        let d = g.double_leaves();
        assert_eq!(d.graph.n_vertices(), 2);
        assert_eq!(d.graph.n_edges(), 2);
        assert!((d.graph.total_length() - 2.0).abs() < 1e-15);
        for v in d.graph.vertices() {
            assert_eq!(d.graph.degree(v), 2);
        }
    }

    #[test]
    fn double_three_star() {
        let mut b = GraphBuilder::new();
        let c = b.add_vertex("c");
        for i in 0..3 {
            let v = b.add_vertex(&format!("l{i}"));
            b.add_edge(c, v, 1.0);
        }
        let g = b.build().unwrap();
        let d = g.double_leaves();
        // two centers of degree 3, three former leaves of degree 2
        assert_eq!(d.graph.n_vertices(), 5);
        assert_eq!(d.graph.n_edges(), 6);
        assert!((d.graph.total_length() - 6.0).abs() < 1e-15);
        let mut degrees: Vec<_> = d.graph.vertices().map(|v| d.graph.degree(v)).collect();
        degrees.sort();
        assert_eq!(degrees, vec![2, 2, 2, 3, 3]);
        assert!(d.graph.vertices().all(|v| d.graph.degree(v) >= 2));
    }

    #[test]
    fn double_leafless_graph_is_identity() {
        let g = circle(3.0);
        let d = g.double_leaves();
        assert_eq!(d.graph.n_edges(), 1);
        assert!((d.graph.total_length() - 3.0).abs() < 1e-15);
        assert_eq!(d.edge_origin, vec![(EdgeId(0), 0)]);
    }

    #[test]
    fn point_identification_at_vertices() {
        let mut b = GraphBuilder::new();
        let u = b.add_vertex("u");
        let v = b.add_vertex("v");
        let e0 = b.add_edge(u, v, 1.0);
        let e1 = b.add_edge(u, v, 2.0);
        let g = b.build().unwrap();
        assert!(g.same_point(
            GraphPoint::new(e0, 1.0),
            GraphPoint::new(e1, 2.0),
            1e-12
        ));
        assert!(!g.same_point(
            GraphPoint::new(e0, 0.0),
            GraphPoint::new(e1, 2.0),
            1e-12
        ));
        assert!(!g.same_point(
            GraphPoint::new(e0, 0.5),
            GraphPoint::new(e1, 0.5),
            1e-12
        ));
    }
}

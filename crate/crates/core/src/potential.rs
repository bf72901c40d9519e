//! Nonnegative potentials given per edge, either in closed form or as
//! uniformly sampled values with linear interpolation.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, MetricGraph};

#[derive(Debug, Clone)]
pub enum EdgePotential {
    Constant(f64),
    /// `a + b cos(omega s + phi)` in the edge's arclength coordinate.
    Cosine { a: f64, b: f64, omega: f64, phi: f64 },
    /// `c0 + c1 s + c2 s^2`.
    Quadratic { c0: f64, c1: f64, c2: f64 },
    /// Uniform samples over the full edge, linear interpolation between nodes.
    Sampled(Vec<f64>),
}

impl EdgePotential {
    pub fn eval(&self, s: f64, length: f64) -> f64 {
        match self {
            EdgePotential::Constant(c) => *c,
            EdgePotential::Cosine { a, b, omega, phi } => a + b * (omega * s + phi).cos(),
            EdgePotential::Quadratic { c0, c1, c2 } => c0 + s * (c1 + s * c2),
            EdgePotential::Sampled(vals) => {
                let n = vals.len();
                if n == 1 {
                    return vals[0];
                }
                let t = (s / length).clamp(0.0, 1.0) * (n - 1) as f64;
                let i = (t.floor() as usize).min(n - 2);
                let frac = t - i as f64;
                vals[i] * (1.0 - frac) + vals[i + 1] * frac
            }
        }
    }

    /// Exact minimum over `[s0, s1]` for closed forms; node scan for samples
    /// (linear interpolation attains its extrema at nodes or interval ends).
    fn min_on(&self, s0: f64, s1: f64, length: f64) -> f64 {
        match self {
            EdgePotential::Constant(c) => *c,
            EdgePotential::Cosine { a, b, omega, phi } => {
                let mut m = self.eval(s0, length).min(self.eval(s1, length));
                if *omega != 0.0 {
                    // interior critical points: omega s + phi = k pi
                    let k0 = ((omega * s0 + phi) / std::f64::consts::PI).ceil() as i64;
                    let k1 = ((omega * s1 + phi) / std::f64::consts::PI).floor() as i64;
                    for k in k0..=k1 {
                        let s = (k as f64 * std::f64::consts::PI - phi) / omega;
                        if s >= s0 && s <= s1 {
                            m = m.min(a + b * (omega * s + phi).cos());
                        }
                    }
                } else {
                    m = m.min(a + b * phi.cos());
                }
                m
            }
            EdgePotential::Quadratic { c1, c2, .. } => {
                let mut m = self.eval(s0, length).min(self.eval(s1, length));
                if *c2 != 0.0 {
                    let sc = -c1 / (2.0 * c2);
                    if sc >= s0 && sc <= s1 {
                        m = m.min(self.eval(sc, length));
                    }
                }
                m
            }
            EdgePotential::Sampled(vals) => {
                let n = vals.len();
                let mut m = self.eval(s0, length).min(self.eval(s1, length));
                for (i, &v) in vals.iter().enumerate() {
                    let s = length * i as f64 / (n - 1).max(1) as f64;
                    if s >= s0 && s <= s1 {
                        m = m.min(v);
                    }
                }
                m
            }
        }
    }

    fn max_on(&self, s0: f64, s1: f64, length: f64) -> f64 {
        // max V = -min(-V)
        self.negated().min_on(s0, s1, length) * -1.0
    }

    fn negated(&self) -> EdgePotential {
        match self {
            EdgePotential::Constant(c) => EdgePotential::Constant(-c),
            EdgePotential::Cosine { a, b, omega, phi } => EdgePotential::Cosine {
                a: -a,
                b: -b,
                omega: *omega,
                phi: *phi,
            },
            EdgePotential::Quadratic { c0, c1, c2 } => EdgePotential::Quadratic {
                c0: -c0,
                c1: -c1,
                c2: -c2,
            },
            EdgePotential::Sampled(v) => EdgePotential::Sampled(v.iter().map(|x| -x).collect()),
        }
    }

    fn shifted(&self, c: f64) -> EdgePotential {
        match self {
            EdgePotential::Constant(a) => EdgePotential::Constant(a + c),
            EdgePotential::Cosine { a, b, omega, phi } => EdgePotential::Cosine {
                a: a + c,
                b: *b,
                omega: *omega,
                phi: *phi,
            },
            EdgePotential::Quadratic { c0, c1, c2 } => EdgePotential::Quadratic {
                c0: c0 + c,
                c1: *c1,
                c2: *c2,
            },
            EdgePotential::Sampled(v) => {
                EdgePotential::Sampled(v.iter().map(|x| x + c).collect())
            }
        }
    }
}

/// The potential over the whole graph, one descriptor per edge.
#[derive(Debug, Clone)]
pub struct PotentialField {
    per_edge: Vec<EdgePotential>,
}

impl PotentialField {
    /// Validates nonnegativity (analytically for closed forms, at the nodes
    /// for samples) against the given graph.
    pub fn new(g: &MetricGraph, per_edge: Vec<EdgePotential>) -> Result<Self> {
        assert_eq!(per_edge.len(), g.n_edges(), "one descriptor per edge");
        let field = PotentialField { per_edge };
        for e in g.edges() {
            let m = field.min_on_edge(e.id, 0.0, e.length, e.length);
            if m < 0.0 {
                // locate a witness for the report
                let mut at = 0.0;
                let mut worst = f64::INFINITY;
                for i in 0..=2048 {
                    let s = e.length * i as f64 / 2048.0;
                    let v = field.eval_on(e.id, s, e.length);
                    if v < worst {
                        worst = v;
                        at = s;
                    }
                }
                return Err(Error::NegativePotential {
                    edge: e.id.0,
                    min: m,
                    at,
                });
            }
        }
        Ok(field)
    }

    pub fn zero(g: &MetricGraph) -> Self {
        PotentialField {
            per_edge: vec![EdgePotential::Constant(0.0); g.n_edges()],
        }
    }

    pub fn descriptor(&self, e: EdgeId) -> &EdgePotential {
        &self.per_edge[e.0]
    }

    fn eval_on(&self, e: EdgeId, s: f64, length: f64) -> f64 {
        self.per_edge[e.0].eval(s, length)
    }

    pub fn eval(&self, g: &MetricGraph, e: EdgeId, s: f64) -> f64 {
        self.eval_on(e, s, g.edge(e).length)
    }

    pub fn min_on_edge(&self, e: EdgeId, s0: f64, s1: f64, length: f64) -> f64 {
        self.per_edge[e.0].min_on(s0, s1, length)
    }

    pub fn max_on_edge(&self, e: EdgeId, s0: f64, s1: f64, length: f64) -> f64 {
        self.per_edge[e.0].max_on(s0, s1, length)
    }

    pub fn global_min(&self, g: &MetricGraph) -> f64 {
        g.edges()
            .iter()
            .map(|e| self.min_on_edge(e.id, 0.0, e.length, e.length))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn global_max(&self, g: &MetricGraph) -> f64 {
        g.edges()
            .iter()
            .map(|e| self.max_on_edge(e.id, 0.0, e.length, e.length))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Gauge shift `V -> V + c` (the eigenvalue shifts by the same amount).
    /// The shift may be negative as long as nonnegativity is preserved by
    /// the caller's usage; no validation is repeated here.
    pub fn shifted(&self, c: f64) -> PotentialField {
        PotentialField {
            per_edge: self.per_edge.iter().map(|p| p.shifted(c)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn two_edge_graph() -> MetricGraph {
        let mut b = GraphBuilder::new();
        let u = b.add_vertex("u");
        let v = b.add_vertex("v");
        b.add_edge(u, v, 2.0);
        b.add_edge(u, v, 3.0);
        b.build().unwrap()
    }

    #[test]
    fn closed_form_evaluation() {
        let g = two_edge_graph();
        let f = PotentialField::new(
            &g,
            vec![
                EdgePotential::Cosine {
                    a: 2.0,
                    b: 1.0,
                    omega: 3.0,
                    phi: 0.5,
                },
                EdgePotential::Quadratic {
                    c0: 1.0,
                    c1: 0.0,
                    c2: 0.25,
                },
            ],
        )
        .unwrap();
        let s = 0.7;
        assert!((f.eval(&g, EdgeId(0), s) - (2.0 + (3.0 * s + 0.5).cos())).abs() < 1e-15);
        assert!((f.eval(&g, EdgeId(1), s) - (1.0 + 0.25 * s * s)).abs() < 1e-15);
    }

    #[test]
    fn negative_potential_rejected() {
        let g = two_edge_graph();
        let r = PotentialField::new(
            &g,
            vec![
                EdgePotential::Cosine {
                    a: 0.5,
                    b: 1.0,
                    omega: 3.0,
                    phi: 0.0,
                },
                EdgePotential::Constant(0.0),
            ],
        );
        assert!(matches!(r, Err(Error::NegativePotential { edge: 0, .. })));
    }

    #[test]
    fn sampled_reproduces_nodes_and_interpolates() {
        let g = two_edge_graph();
        let vals = vec![0.0, 1.0, 4.0, 9.0, 16.0];
        let f = PotentialField::new(
            &g,
            vec![
                EdgePotential::Sampled(vals.clone()),
                EdgePotential::Constant(1.0),
            ],
        )
        .unwrap();
        let len = 2.0;
        for (i, &v) in vals.iter().enumerate() {
            let s = len * i as f64 / 4.0;
            assert!((f.eval(&g, EdgeId(0), s) - v).abs() < 1e-14);
        }
        // midpoint between nodes 1 and 2
        let s = len * 1.5 / 4.0;
        assert!((f.eval(&g, EdgeId(0), s) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn interval_extrema() {
        let g = two_edge_graph();
        let f = PotentialField::new(
            &g,
            vec![
                EdgePotential::Cosine {
                    a: 2.0,
                    b: -1.5,
                    omega: std::f64::consts::PI,
                    phi: 0.0,
                },
                EdgePotential::Constant(3.0),
            ],
        )
        .unwrap();
        // V(s) = 2 - 1.5 cos(pi s): min 0.5 at s=0 (mod 2), max 3.5 at s=1
        assert!((f.min_on_edge(EdgeId(0), 0.0, 2.0, 2.0) - 0.5).abs() < 1e-14);
        assert!((f.max_on_edge(EdgeId(0), 0.0, 2.0, 2.0) - 3.5).abs() < 1e-14);
        assert!((f.min_on_edge(EdgeId(0), 0.5, 0.9, 2.0) - f.eval(&g, EdgeId(0), 0.5)).abs() < 1e-14);
    }

    #[test]
    fn shift_moves_everything() {
        let g = two_edge_graph();
        let f = PotentialField::new(
            &g,
            vec![EdgePotential::Constant(1.0), EdgePotential::Constant(2.0)],
        )
        .unwrap();
        let s = f.shifted(2.5);
        assert!((s.global_min(&g) - 3.5).abs() < 1e-15);
        assert!((s.global_max(&g) - 4.5).abs() < 1e-15);
    }
}

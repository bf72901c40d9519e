//! Uniform sup-norm bounds with explicit constants from heat-kernel
//! comparison: the graph constant `C^2 = 3m / (2 min |e|)`, the decoupled
//! theta-function majorant per edge, and the cluster inequality summing
//! sup norms of all eigenfunctions below an energy.

use crate::envelope::{Envelope, Method, Segment};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::roots::golden_max;
use crate::spectral::Eigenpair;

/// Third Jacobi theta value at z = 0: `1 + 2 sum q^{n^2}`, truncated with a
/// certified geometric tail below `tol`.
pub fn theta3(q: f64, tol: f64) -> f64 {
    assert!((0.0..1.0).contains(&q));
    let mut acc = 1.0;
    let mut n = 1u32;
    loop {
        let term = 2.0 * q.powi((n * n) as i32);
        acc += term;
        // remaining terms are dominated by the geometric series with
        // ratio q^(2n+3) starting at q^((n+1)^2)
        let tail = 2.0 * q.powi(((n + 1) * (n + 1)) as i32) / (1.0 - q).max(1e-300);
        if tail < tol || n > 10_000 {
            break;
        }
        n += 1;
    }
    acc
}

/// The edge-comparison constant `2 max_{[pi, inf)} 1/(1 - sin x / x)`.
/// The interior maximum of sin x / x on `[pi, inf)` is at the root of
/// tan x = x in (2 pi, 5 pi/2); beyond 3 pi the function is below 1/(3 pi),
/// which is smaller, so the scan range is complete.
pub fn edge_comparison_constant() -> f64 {
    let f = |x: f64| x.sin() / x;
    let (_, peak) = golden_max(&f, 2.0 * std::f64::consts::PI, 2.5 * std::f64::consts::PI, 1e-12);
    let cap = 1.0 / (3.0 * std::f64::consts::PI);
    let max = peak.max(cap);
    2.0 / (1.0 - max)
}

/// The explicit uniform constant and bound `C (E - inf V)^{1/4}` with
/// `C^2 = 3 m / (2 min |e|)`.
#[derive(Debug, Clone, Copy)]
pub struct UniformBound {
    pub value: f64,
    pub c_squared: f64,
    pub n_edges: usize,
    pub min_edge_length: f64,
    pub energy: f64,
    pub v_min: f64,
}

pub fn uniform_bound(g: &MetricGraph, energy: f64, v_min: f64) -> Result<UniformBound> {
    if energy <= v_min {
        return Err(Error::EnergyBelowInf { energy, v_min });
    }
    let m = g.n_edges();
    let min_edge = g.min_edge_length();
    let c2 = 3.0 * m as f64 / (2.0 * min_edge);
    Ok(UniformBound {
        value: c2.sqrt() * (energy - v_min).powf(0.25),
        c_squared: c2,
        n_edges: m,
        min_edge_length: min_edge,
        energy,
        v_min,
    })
}

/// Constant envelope over the whole graph from [`uniform_bound`].
pub fn uniform_envelope(g: &MetricGraph, energy: f64, v_min: f64) -> Result<Envelope> {
    let ub = uniform_bound(g, energy, v_min)?;
    let mut env = Envelope::new(Method::Uniform, g.n_edges());
    env.provenance.push_num("energy", energy);
    env.provenance.push_num("v_min", v_min);
    env.provenance.push_num("c_squared", ub.c_squared);
    env.provenance.push("n_edges", ub.n_edges);
    env.provenance.push_num("min_edge_length", ub.min_edge_length);
    for e in g.edges() {
        env.push_segment(e.id, Segment::constant(0.0, e.length, ub.value));
    }
    Ok(env)
}

/// Per-edge sup-norm bound in the sharper single-edge form
/// `C^2 ( sqrt(2 e (E - inf V) / pi) + sqrt(e) / |e| )` (e = Euler's
/// number), returned as a bound on the sup norm itself.
pub fn single_edge_heat_bound(c_squared: f64, energy: f64, v_min: f64, edge_len: f64) -> f64 {
    let e = std::f64::consts::E;
    (c_squared * ((2.0 * e * (energy - v_min) / std::f64::consts::PI).sqrt() + e.sqrt() / edge_len))
        .sqrt()
}

/// Both sides of the per-edge heat-kernel comparison at time `t`, built
/// from computed spectral data of the free (V = 0) graph with certified
/// tails from the decoupled-Neumann lower bounds on the spectrum.
#[derive(Debug, Clone)]
pub struct HeatKernelMajorant {
    pub t: f64,
    /// p_hat_Gamma(t, e) from the eigen data (constant mode + sum), plus
    /// the certified tail upper bound (already included in the value).
    pub graph_side: Vec<f64>,
    /// Decoupled edge value theta_3(0, exp(-(pi/|e|)^2 t)) / |e|.
    pub edge_side: Vec<f64>,
    /// Right side of the 3-vs-M split bound, per edge, tail included.
    pub split_bound: Vec<f64>,
    pub tail_bound: f64,
    pub n_modes_used: usize,
}

impl HeatKernelMajorant {
    pub fn sum_graph_side(&self) -> f64 {
        self.graph_side.iter().sum()
    }
    pub fn sum_edge_side(&self) -> f64 {
        self.edge_side.iter().sum()
    }
}

/// Decoupled-Neumann spectrum lower bounds: the sorted multiset
/// `{ (k pi / |e|)^2 : k >= 0, e }` minorizes the graph spectrum.
fn neumann_lower_bounds(g: &MetricGraph, count: usize) -> Vec<f64> {
    let mut vals = Vec::with_capacity(count + g.n_edges());
    let mut k = 0usize;
    while vals.len() < count + g.n_edges() {
        for e in g.edges() {
            vals.push((k as f64 * std::f64::consts::PI / e.length).powi(2));
        }
        k += 1;
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals.truncate(count);
    vals
}

pub fn heat_majorant(
    g: &MetricGraph,
    free_pairs: &[Eigenpair],
    t: f64,
    tail_tol: f64,
) -> Result<HeatKernelMajorant> {
    assert!(t > 0.0);
    let total_len = g.total_length();
    let m_const = edge_comparison_constant();
    let c2 = 3.0 * g.n_edges() as f64 / (2.0 * g.min_edge_length());
    let n_used = free_pairs.len().saturating_sub(1); // skip the constant mode
    // certified tail: lower bounds for lambda_n, n > n_used, from the
    // decoupled spectrum; e^{-xt} sqrt(x) is decreasing past 1/(2t)
    let mus = neumann_lower_bounds(g, n_used + 1 + 4096);
    let f = |x: f64| (-x * t).exp() * x.sqrt();
    let peak_x = 0.5 / t;
    let mut tail = 0.0;
    let mut plain_tail = 0.0; // sum of e^{-mu t} for the split bound
    for &mu in mus.iter().skip(n_used + 1) {
        let term = if mu >= peak_x { f(mu) } else { f(peak_x) };
        tail += c2 * term;
        plain_tail += (-mu * t).exp();
        if c2 * term < 1e-18 && (-mu * t).exp() < 1e-18 {
            break;
        }
    }
    if tail > tail_tol {
        return Err(Error::InsufficientSpectrum {
            tail,
            tol: tail_tol,
        });
    }
    let mut graph_side = Vec::with_capacity(g.n_edges());
    let mut edge_side = Vec::with_capacity(g.n_edges());
    let mut split_bound = Vec::with_capacity(g.n_edges());
    for e in g.edges() {
        let mut acc = 1.0 / total_len;
        for p in free_pairs.iter().skip(1) {
            let sup = p.linf_on_edge(e.id);
            acc += (-p.energy * t).exp() * sup * sup;
        }
        graph_side.push(acc + tail);
        let q = (-(std::f64::consts::PI / e.length).powi(2) * t).exp();
        edge_side.push(theta3(q, 1e-12) / e.length);
        let threshold = std::f64::consts::PI / e.length;
        let mut lo_sum = 0.0;
        let mut hi_sum = 0.0;
        for p in free_pairs.iter().skip(1) {
            if p.energy < threshold {
                lo_sum += (-p.energy * t).exp();
            } else {
                hi_sum += (-p.energy * t).exp();
            }
        }
        split_bound
            .push(1.0 / total_len + (3.0 * lo_sum + m_const * (hi_sum + plain_tail)) / e.length);
    }
    Ok(HeatKernelMajorant {
        t,
        graph_side,
        edge_side,
        split_bound,
        tail_bound: tail,
        n_modes_used: n_used,
    })
}

/// Cluster inequality data: per edge, the sum of squared sup norms of all
/// eigenpairs with `E_j <= E` against the two closed-form right sides.
#[derive(Debug, Clone)]
pub struct ClusterBound {
    pub energy: f64,
    pub lhs_per_edge: Vec<f64>,
    pub rhs_sqrt: f64,
    pub rhs_refined_per_edge: Vec<f64>,
    pub n_pairs: usize,
}

pub fn cluster_bound(
    g: &MetricGraph,
    pairs: &[Eigenpair],
    energy: f64,
    v_min: f64,
) -> ClusterBound {
    let c2 = 3.0 * g.n_edges() as f64 / (2.0 * g.min_edge_length());
    let used: Vec<&Eigenpair> = pairs.iter().filter(|p| p.energy <= energy).collect();
    let mut lhs = vec![0.0; g.n_edges()];
    for p in &used {
        for e in g.edges() {
            let sup = p.linf_on_edge(e.id);
            lhs[e.id.0] += sup * sup;
        }
    }
    let euler = std::f64::consts::E;
    let rhs_refined = g
        .edges()
        .iter()
        .map(|e| {
            c2 * ((2.0 * euler * (energy - v_min) / std::f64::consts::PI).sqrt()
                + euler.sqrt() / e.length)
        })
        .collect();
    ClusterBound {
        energy,
        lhs_per_edge: lhs,
        rhs_sqrt: c2 * (energy - v_min).max(0.0).sqrt(),
        rhs_refined_per_edge: rhs_refined,
        n_pairs: used.len(),
    }
}

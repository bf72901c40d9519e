//! Finite-difference discretization of `H = -d^2/dx^2 + V` on a metric
//! graph with Kirchhoff vertex conditions, eigenpair computation, and
//! classification of tunneling / classically allowed regions.
//!
//! Unknowns are the interior grid values of every edge plus one value per
//! vertex. The assembled problem is the generalized symmetric pencil
//! `A x = E M x` with a lumped (trapezoid) mass matrix, so the reported
//! normalization is exactly the trapezoid-rule L2 norm.

use crate::eigensolver::{self, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{EdgeEnd, EdgeId, GraphPoint, MetricGraph, VertexId};
use crate::potential::PotentialField;
use crate::roots::scan_roots;

/// Uniform grid on one edge: `n` interior nodes with step `h`; node `i`
/// (1-based among interiors) sits at `s = i h`, and the edge contributes
/// `n + 2` sampled values once the endpoint vertex values are included.
#[derive(Debug, Clone, Copy)]
pub struct EdgeGrid {
    pub n: usize,
    pub h: f64,
    pub dof0: usize,
}

#[derive(Debug, Clone)]
pub struct DiscretizedHamiltonian {
    nv: usize,
    grids: Vec<EdgeGrid>,
    ndof: usize,
    /// A = stiffness + lumped potential, symmetric.
    diag: Vec<f64>,
    /// Per edge: off-diagonal values along the interior chain (n-1 entries).
    off: Vec<Vec<f64>>,
    /// Per edge: (vertex dof, interior dof, value) for the two end couplings.
    coup: Vec<Vec<(usize, usize, f64)>>,
    /// Lumped mass diagonal.
    mass: Vec<f64>,
}

impl DiscretizedHamiltonian {
    pub fn ndof(&self) -> usize {
        self.ndof
    }

    pub fn n_vertices(&self) -> usize {
        self.nv
    }

    pub fn grids(&self) -> &[EdgeGrid] {
        &self.grids
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (yi, (&d, &xi)) in y.iter_mut().zip(self.diag.iter().zip(x.iter())) {
            *yi = d * xi;
        }
        for (e, grid) in self.grids.iter().enumerate() {
            let o = &self.off[e];
            let base = grid.dof0;
            for (i, &v) in o.iter().enumerate() {
                y[base + i] += v * x[base + i + 1];
                y[base + i + 1] += v * x[base + i];
            }
            for &(vd, id, v) in &self.coup[e] {
                y[vd] += v * x[id];
                y[id] += v * x[vd];
            }
        }
    }

    /// Residual of the generalized problem in the mass-weighted norm:
    /// `|| M^{-1/2} (A x - E M x) || / || M^{1/2} x ||`.
    pub fn residual(&self, x: &[f64], energy: f64) -> f64 {
        let mut ax = vec![0.0; self.ndof];
        self.matvec(x, &mut ax);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.ndof {
            let r = ax[i] - energy * self.mass[i] * x[i];
            num += r * r / self.mass[i];
            den += self.mass[i] * x[i] * x[i];
        }
        (num / den.max(1e-300)).sqrt()
    }

    pub(crate) fn structure(&self) -> eigensolver::PencilRef<'_> {
        eigensolver::PencilRef {
            nv: self.nv,
            ndof: self.ndof,
            grids: &self.grids,
            diag: &self.diag,
            off: &self.off,
            coup: &self.coup,
            mass: &self.mass,
        }
    }
}

/// Assemble the discretization with target step `h` (each edge gets the
/// largest uniform step not exceeding `h`).
pub fn assemble(
    g: &MetricGraph,
    potential: &PotentialField,
    h: f64,
) -> Result<DiscretizedHamiltonian> {
    for e in g.edges() {
        if h > e.length / 4.0 {
            return Err(Error::StepTooCoarse {
                edge: e.id.0,
                h,
                length: e.length,
            });
        }
    }
    let nv = g.n_vertices();
    let mut grids = Vec::with_capacity(g.n_edges());
    let mut ndof = nv;
    for e in g.edges() {
        let cells = (e.length / h).ceil() as usize;
        let n = cells - 1; // interior nodes
        let he = e.length / cells as f64;
        grids.push(EdgeGrid { n, h: he, dof0: ndof });
        ndof += n;
    }
    let mut diag = vec![0.0; ndof];
    let mut mass = vec![0.0; ndof];
    let mut off = Vec::with_capacity(g.n_edges());
    let mut coup = Vec::with_capacity(g.n_edges());
    for (ei, e) in g.edges().iter().enumerate() {
        let grid = grids[ei];
        let he = grid.h;
        let inv = 1.0 / he;
        for i in 0..grid.n {
            let s = (i + 1) as f64 * he;
            let v = potential.eval(g, e.id, s);
            diag[grid.dof0 + i] = 2.0 * inv + v * he;
            mass[grid.dof0 + i] = he;
        }
        off.push(vec![-inv; grid.n.saturating_sub(1)]);
        let v0 = e.ends.0 .0;
        let v1 = e.ends.1 .0;
        // vertex contributions: half-cell mass and one-sided potential limits
        diag[v0] += inv + 0.5 * he * potential.eval(g, e.id, 0.0);
        diag[v1] += inv + 0.5 * he * potential.eval(g, e.id, e.length);
        mass[v0] += 0.5 * he;
        mass[v1] += 0.5 * he;
        coup.push(vec![
            (v0, grid.dof0, -inv),
            (v1, grid.dof0 + grid.n - 1, -inv),
        ]);
    }
    Ok(DiscretizedHamiltonian {
        nv,
        grids,
        ndof,
        diag,
        off,
        coup,
        mass,
    })
}

/// A computed eigenpair: energy, per-edge samples of the eigenfunction and
/// its derivative (one-sided at the edge ends), a residual certificate, and
/// the quadrature rule used for normalization.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub energy: f64,
    pub residual: f64,
    /// Per edge: `n + 2` values including the two endpoint (vertex) values.
    pub values: Vec<Vec<f64>>,
    /// Same layout; central differences inside, one-sided at the ends.
    pub derivs: Vec<Vec<f64>>,
    /// Per edge (n, h).
    pub grids: Vec<(usize, f64)>,
    pub norm_rule: &'static str,
    pub provenance: String,
}

impl Eigenpair {
    /// Build from per-edge samples (including endpoints); normalizes to
    /// unit trapezoid L2 norm and fills in difference-quotient derivatives.
    pub fn from_samples(
        g: &MetricGraph,
        energy: f64,
        mut values: Vec<Vec<f64>>,
        residual: f64,
        provenance: &str,
    ) -> Eigenpair {
        let grids: Vec<(usize, f64)> = g
            .edges()
            .iter()
            .zip(values.iter())
            .map(|(e, vals)| {
                let n = vals.len() - 2;
                (n, e.length / (n + 1) as f64)
            })
            .collect();
        // trapezoid norm over all edges
        let mut nrm2 = 0.0;
        for (vals, &(n, h)) in values.iter().zip(grids.iter()) {
            for (i, &v) in vals.iter().enumerate() {
                let w = if i == 0 || i == n + 1 { 0.5 * h } else { h };
                nrm2 += w * v * v;
            }
        }
        let scale = 1.0 / nrm2.sqrt();
        for vals in values.iter_mut() {
            for v in vals.iter_mut() {
                *v *= scale;
            }
        }
        let derivs = values
            .iter()
            .zip(grids.iter())
            .map(|(vals, &(n, h))| {
                let m = n + 2;
                let mut d = vec![0.0; m];
                for i in 1..m - 1 {
                    d[i] = (vals[i + 1] - vals[i - 1]) / (2.0 * h);
                }
                d[0] = (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * h);
                d[m - 1] = (3.0 * vals[m - 1] - 4.0 * vals[m - 2] + vals[m - 3]) / (2.0 * h);
                d
            })
            .collect();
        Eigenpair {
            energy,
            residual,
            values,
            derivs,
            grids,
            norm_rule: "trapezoid",
            provenance: provenance.to_string(),
        }
    }

    pub fn node_coord(&self, e: EdgeId, i: usize) -> f64 {
        let (_, h) = self.grids[e.0];
        i as f64 * h
    }

    pub fn n_nodes(&self, e: EdgeId) -> usize {
        self.grids[e.0].0 + 2
    }

    /// Cubic-interpolated value and derivative at an arbitrary point.
    pub fn value_deriv(&self, p: GraphPoint) -> (f64, f64) {
        let vals = &self.values[p.edge.0];
        let (n, h) = self.grids[p.edge.0];
        let m = n + 2;
        let t = (p.s / h).clamp(0.0, (m - 1) as f64);
        let mut i0 = (t.floor() as usize).min(m - 2);
        // 4-point stencil around the cell [i0, i0+1]
        i0 = i0.saturating_sub(1).min(m - 4);
        let x0 = i0 as f64;
        let xs = [x0, x0 + 1.0, x0 + 2.0, x0 + 3.0];
        let ys = [vals[i0], vals[i0 + 1], vals[i0 + 2], vals[i0 + 3]];
        let (mut v, mut d) = (0.0, 0.0);
        for j in 0..4 {
            let mut den = 1.0;
            let mut num = 1.0;
            for k in 0..4 {
                if k != j {
                    den *= xs[j] - xs[k];
                    num *= t - xs[k];
                }
            }
            let mut dnum = 0.0;
            for m in 0..4 {
                if m == j {
                    continue;
                }
                let mut prod = 1.0;
                for k in 0..4 {
                    if k != j && k != m {
                        prod *= t - xs[k];
                    }
                }
                dnum += prod;
            }
            v += ys[j] * num / den;
            d += ys[j] * dnum / den;
        }
        (v, d / h)
    }

    pub fn value(&self, p: GraphPoint) -> f64 {
        self.value_deriv(p).0
    }

    /// Outgoing derivative at vertex `v` along each incident edge end,
    /// from the stored one-sided differences.
    pub fn outgoing_derivatives(&self, g: &MetricGraph, v: VertexId) -> Vec<(EdgeId, f64)> {
        g.incident(v)
            .iter()
            .map(|&(eid, end)| {
                let d = &self.derivs[eid.0];
                let out = match end {
                    EdgeEnd::Start => d[0],
                    EdgeEnd::End => -d[d.len() - 1],
                };
                (eid, out)
            })
            .collect()
    }

    pub fn vertex_value(&self, g: &MetricGraph, v: VertexId) -> f64 {
        let &(eid, end) = &g.incident(v)[0];
        let vals = &self.values[eid.0];
        match end {
            EdgeEnd::Start => vals[0],
            EdgeEnd::End => vals[vals.len() - 1],
        }
    }

    pub fn linf_norm(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    pub fn linf_on_edge(&self, e: EdgeId) -> f64 {
        self.values[e.0].iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    /// Sup of |psi| over a subinterval, from the samples inside it plus the
    /// interpolated endpoint values.
    pub fn sup_on(&self, e: EdgeId, s0: f64, s1: f64) -> f64 {
        let (lo, hi) = if s0 <= s1 { (s0, s1) } else { (s1, s0) };
        let (n, h) = self.grids[e.0];
        let mut m = self
            .value(GraphPoint::new(e, lo))
            .abs()
            .max(self.value(GraphPoint::new(e, hi)).abs());
        for i in 0..n + 2 {
            let s = i as f64 * h;
            if s >= lo && s <= hi {
                m = m.max(self.values[e.0][i].abs());
            }
        }
        m
    }

    /// Trapezoid L2 norm of psi over a subinterval of one edge, refined by
    /// Simpson on the cubic interpolant.
    pub fn l2_on(&self, e: EdgeId, s0: f64, s1: f64) -> f64 {
        let (lo, hi) = if s0 <= s1 { (s0, s1) } else { (s1, s0) };
        if hi <= lo {
            return 0.0;
        }
        let steps = 128;
        let mut acc = 0.0;
        let w = (hi - lo) / steps as f64;
        for i in 0..steps {
            let a = lo + i as f64 * w;
            let fa = self.value(GraphPoint::new(e, a)).powi(2);
            let fm = self.value(GraphPoint::new(e, a + 0.5 * w)).powi(2);
            let fb = self.value(GraphPoint::new(e, a + w)).powi(2);
            acc += w / 6.0 * (fa + 4.0 * fm + fb);
        }
        acc.sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        let mut nrm2 = 0.0;
        for (vals, &(n, h)) in self.values.iter().zip(self.grids.iter()) {
            for (i, &v) in vals.iter().enumerate() {
                let w = if i == 0 || i == n + 1 { 0.5 * h } else { h };
                nrm2 += w * v * v;
            }
        }
        nrm2.sqrt()
    }
}

/// Extract per-edge sample vectors (with endpoint vertex values) from a
/// flat dof vector.
fn unflatten(g: &MetricGraph, grids: &[EdgeGrid], x: &[f64]) -> Vec<Vec<f64>> {
    g.edges()
        .iter()
        .zip(grids.iter())
        .map(|(e, grid)| {
            let mut vals = Vec::with_capacity(grid.n + 2);
            vals.push(x[e.ends.0 .0]);
            for i in 0..grid.n {
                vals.push(x[grid.dof0 + i]);
            }
            vals.push(x[e.ends.1 .0]);
            vals
        })
        .collect()
}

/// The `k` lowest eigenpairs in ascending order, each L2-normalized with a
/// residual certificate. Dense below `config.dense_threshold` dofs,
/// shift-invert Lanczos above.
pub fn solve_eigs(
    g: &MetricGraph,
    ham: &DiscretizedHamiltonian,
    k: usize,
    config: &SolverConfig,
) -> Result<Vec<Eigenpair>> {
    assert!(k >= 1 && k <= ham.ndof, "need 1 <= k <= ndof");
    let (energies, vectors) = eigensolver::lowest_pairs(&ham.structure(), k, config)?;
    let mut out = Vec::with_capacity(k);
    for (j, lambda) in energies.iter().enumerate() {
        // vectors are y = M^{1/2} psi with unit Euclidean norm
        let psi: Vec<f64> = vectors[j]
            .iter()
            .zip(ham.mass.iter())
            .map(|(&y, &m)| y / m.sqrt())
            .collect();
        let res = ham.residual(&psi, *lambda);
        if res > config.residual_tol {
            return Err(Error::ConvergenceFailure {
                achieved: res,
                tol: config.residual_tol,
            });
        }
        let values = unflatten(g, &ham.grids, &psi);
        out.push(Eigenpair::from_samples(
            g,
            *lambda,
            values,
            res,
            "solved",
        ));
    }
    Ok(out)
}

/// Solve on steps `h` and `h/2` and Richardson-extrapolate the eigenvalues
/// (the discretization is second order). Returns the fine-grid pairs with
/// extrapolated energies attached.
pub fn solve_extrapolated(
    g: &MetricGraph,
    potential: &PotentialField,
    h: f64,
    k: usize,
    config: &SolverConfig,
) -> Result<(Vec<Eigenpair>, Vec<f64>)> {
    let coarse = solve_eigs(g, &assemble(g, potential, h)?, k, config)?;
    let fine = solve_eigs(g, &assemble(g, potential, 0.5 * h)?, k, config)?;
    let extrap = coarse
        .iter()
        .zip(fine.iter())
        .map(|(c, f)| (4.0 * f.energy - c.energy) / 3.0)
        .collect();
    Ok((fine, extrap))
}

/// Where a tunneling region meets the classically allowed set.
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    pub point: GraphPoint,
    /// True when located as a root of V - E inside an edge; false when the
    /// regions meet at a vertex where V jumps.
    pub is_root: bool,
}

/// A collar direction leading out of a tunneling component into the
/// classically allowed region.
#[derive(Debug, Clone)]
pub struct CollarStub {
    pub edge: EdgeId,
    pub from: f64,
    /// +1: increasing coordinate; -1: decreasing.
    pub dir: f64,
    /// Room along the edge before hitting a vertex or another tunneling
    /// interval.
    pub max_len: f64,
    pub boundary_index: usize,
}

/// One connected component of the tunneling region.
#[derive(Debug, Clone)]
pub struct TunnelingComponent {
    pub intervals: Vec<(EdgeId, f64, f64)>,
    pub boundary: Vec<usize>,
    pub exits: Vec<CollarStub>,
}

#[derive(Debug, Clone)]
pub struct RegionPartition {
    pub energy: f64,
    /// Per edge: closed subintervals where V >= E.
    pub tunneling: Vec<Vec<(f64, f64)>>,
    /// Per edge: closed subintervals where V <= E.
    pub allowed: Vec<Vec<(f64, f64)>>,
    pub boundary: Vec<BoundaryPoint>,
    pub components: Vec<TunnelingComponent>,
    /// Optional low-energy set at a second threshold.
    pub low_energy: Option<(f64, Vec<Vec<(f64, f64)>>)>,
}

impl RegionPartition {
    pub fn tunneling_is_empty(&self) -> bool {
        self.tunneling.iter().all(|t| t.is_empty())
    }

    pub fn contains_tunneling(&self, p: GraphPoint, slack: f64) -> bool {
        self.tunneling[p.edge.0]
            .iter()
            .any(|&(a, b)| p.s >= a - slack && p.s <= b + slack)
    }
}

/// Locate turning points by bisection on V - E per edge and decompose the
/// graph into tunneling and allowed subintervals. Degenerate touchings
/// (double roots) produce zero-length components, which are dropped.
pub fn classify_regions(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    low_energy: Option<f64>,
) -> RegionPartition {
    let scan = 4096;
    let mut tunneling = Vec::with_capacity(g.n_edges());
    let mut allowed = Vec::with_capacity(g.n_edges());
    for e in g.edges() {
        let f = |s: f64| potential.eval(g, e.id, s) - energy;
        let roots = scan_roots(&f, 0.0, e.length, scan, 1e-15 * e.length.max(1.0));
        let (tun, alw) = split_intervals(&f, e.length, &roots);
        tunneling.push(tun);
        allowed.push(alw);
    }
    let (boundary, components) = assemble_components(g, &tunneling);
    let low = low_energy.map(|ep| {
        let mut per_edge = Vec::with_capacity(g.n_edges());
        for e in g.edges() {
            let f = |s: f64| potential.eval(g, e.id, s) - ep;
            let roots = scan_roots(&f, 0.0, e.length, scan, 1e-15 * e.length.max(1.0));
            let (_, alw) = split_intervals(&f, e.length, &roots);
            per_edge.push(alw);
        }
        (ep, per_edge)
    });
    RegionPartition {
        energy,
        tunneling,
        allowed,
        boundary,
        components,
        low_energy: low,
    }
}

type Intervals = Vec<(f64, f64)>;

fn split_intervals(f: &dyn Fn(f64) -> f64, length: f64, roots: &[f64]) -> (Intervals, Intervals) {
    let min_len = 1e-12 * length.max(1.0);
    let mut cuts = vec![0.0];
    cuts.extend(roots.iter().copied().filter(|&r| r > min_len && r < length - min_len));
    cuts.push(length);
    let mut tun = Vec::new();
    let mut alw = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < min_len {
            continue;
        }
        let mid = 0.5 * (a + b);
        if f(mid) > 0.0 {
            tun.push((a, b));
        } else {
            alw.push((a, b));
        }
    }
    (tun, alw)
}

pub(crate) fn assemble_components(
    g: &MetricGraph,
    tunneling: &[Intervals],
) -> (Vec<BoundaryPoint>, Vec<TunnelingComponent>) {
    // collect intervals with ids
    let mut ivals: Vec<(EdgeId, f64, f64)> = Vec::new();
    for (ei, list) in tunneling.iter().enumerate() {
        for &(a, b) in list {
            ivals.push((EdgeId(ei), a, b));
        }
    }
    let n = ivals.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    // intervals touching a common vertex merge
    let touch_tol = 1e-9;
    let mut at_vertex: Vec<Vec<usize>> = vec![Vec::new(); g.n_vertices()];
    for (idx, &(eid, a, b)) in ivals.iter().enumerate() {
        let e = g.edge(eid);
        if a <= touch_tol {
            at_vertex[e.ends.0 .0].push(idx);
        }
        if b >= e.length - touch_tol {
            at_vertex[e.ends.1 .0].push(idx);
        }
    }
    for list in &at_vertex {
        for w in list.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a] = b;
            }
        }
    }
    // boundary points and exit stubs
    let mut boundary: Vec<BoundaryPoint> = Vec::new();
    let mut comp_map: std::collections::BTreeMap<usize, TunnelingComponent> =
        std::collections::BTreeMap::new();
    let mut vertex_boundary: std::collections::BTreeMap<(usize, usize), usize> =
        std::collections::BTreeMap::new(); // (vertex, component root) -> boundary idx

    for idx in 0..n {
        let root = find(&mut parent, idx);
        let entry = comp_map.entry(root).or_insert_with(|| TunnelingComponent {
            intervals: Vec::new(),
            boundary: Vec::new(),
            exits: Vec::new(),
        });
        entry.intervals.push(ivals[idx]);
    }
    for idx in 0..n {
        let (eid, a, b) = ivals[idx];
        let e = g.edge(eid);
        let root = find(&mut parent, idx);
        for (coord, at_start) in [(a, true), (b, false)] {
            let interior_root = coord > touch_tol && coord < e.length - touch_tol;
            if interior_root {
                // mid-edge turning point: exit along this edge away from the interval
                let dir = if at_start { -1.0 } else { 1.0 };
                let room = room_along(g, tunneling, eid, coord, dir);
                let bi = boundary.len();
                boundary.push(BoundaryPoint {
                    point: GraphPoint::new(eid, coord),
                    is_root: true,
                });
                let comp = comp_map.get_mut(&root).unwrap();
                comp.boundary.push(bi);
                comp.exits.push(CollarStub {
                    edge: eid,
                    from: coord,
                    dir,
                    max_len: room,
                    boundary_index: bi,
                });
            } else {
                // interval reaches a vertex: boundary only if some incident
                // edge end is not covered by tunneling there
                let v = if coord <= touch_tol { e.ends.0 } else { e.ends.1 };
                let mut exits = Vec::new();
                for &(oid, oend) in g.incident(v) {
                    let oe = g.edge(oid);
                    let (from, dir) = match oend {
                        EdgeEnd::Start => (0.0, 1.0),
                        EdgeEnd::End => (oe.length, -1.0),
                    };
                    let covered = tunneling[oid.0].iter().any(|&(ta, tb)| {
                        (from - ta).abs() <= touch_tol || (from - tb).abs() <= touch_tol
                    });
                    if !covered {
                        exits.push((oid, from, dir));
                    }
                }
                if !exits.is_empty() {
                    let key = (v.0, root);
                    let bi = *vertex_boundary.entry(key).or_insert_with(|| {
                        let bi = boundary.len();
                        boundary.push(BoundaryPoint {
                            point: GraphPoint::new(eid, coord),
                            is_root: false,
                        });
                        let comp = comp_map.get_mut(&root).unwrap();
                        comp.boundary.push(bi);
                        for (oid, from, dir) in &exits {
                            let room = room_along(g, tunneling, *oid, *from, *dir);
                            comp.exits.push(CollarStub {
                                edge: *oid,
                                from: *from,
                                dir: *dir,
                                max_len: room,
                                boundary_index: bi,
                            });
                        }
                        bi
                    });
                    let _ = bi;
                }
            }
        }
    }
    (boundary, comp_map.into_values().collect())
}

/// Free room along `edge` from `from` in direction `dir` before hitting a
/// vertex or a tunneling interval.
fn room_along(
    g: &MetricGraph,
    tunneling: &[Intervals],
    edge: EdgeId,
    from: f64,
    dir: f64,
) -> f64 {
    let len = g.edge(edge).length;
    let mut room = if dir > 0.0 { len - from } else { from };
    for &(a, b) in &tunneling[edge.0] {
        if dir > 0.0 && a > from + 1e-12 {
            room = room.min(a - from);
        }
        if dir < 0.0 && b < from - 1e-12 {
            room = room.min(from - b);
        }
    }
    room.max(0.0)
}

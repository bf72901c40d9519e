//! Symmetric eigensolvers for the assembled pencil `A x = E M x`.
//!
//! Below a dimension threshold the symmetrized matrix is handed to a dense
//! solver. Above it, shift-invert Lanczos with full reorthogonalization and
//! deflation restarts is used; the shifted matrix is factored exactly by
//! eliminating the per-edge tridiagonal blocks and solving a small Schur
//! complement on the vertex unknowns, so each application costs O(n).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spectral::EdgeGrid;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Densify below this many degrees of freedom.
    pub dense_threshold: usize,
    /// Residual certificate each returned pair must satisfy.
    pub residual_tol: f64,
    /// Hard cap on Lanczos vectors per restart.
    pub max_lanczos: usize,
    /// Extra Lanczos vectors beyond the requested count, for separating
    /// near-degenerate clusters.
    pub extra_vectors: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dense_threshold: 4000,
            residual_tol: 1e-8,
            max_lanczos: 320,
            extra_vectors: 24,
        }
    }
}

/// Borrowed view of the assembled pencil's structure.
pub struct PencilRef<'a> {
    pub nv: usize,
    pub ndof: usize,
    pub grids: &'a [EdgeGrid],
    pub diag: &'a [f64],
    pub off: &'a [Vec<f64>],
    pub coup: &'a [Vec<(usize, usize, f64)>],
    pub mass: &'a [f64],
}

impl PencilRef<'_> {
    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, &d), &xi) in y.iter_mut().zip(self.diag.iter()).zip(x.iter()) {
            *yi = d * xi;
        }
        for (e, grid) in self.grids.iter().enumerate() {
            let base = grid.dof0;
            for (i, &v) in self.off[e].iter().enumerate() {
                y[base + i] += v * x[base + i + 1];
                y[base + i + 1] += v * x[base + i];
            }
            for &(vd, id, v) in &self.coup[e] {
                y[vd] += v * x[id];
                y[id] += v * x[vd];
            }
        }
    }

    /// Residual of (lambda, z) for the symmetrized problem, z Euclidean-unit.
    fn sym_residual(&self, z: &[f64], lambda: f64) -> f64 {
        let n = self.ndof;
        let x: Vec<f64> = z
            .iter()
            .zip(self.mass.iter())
            .map(|(&zi, &m)| zi / m.sqrt())
            .collect();
        let mut ax = vec![0.0; n];
        self.matvec(&x, &mut ax);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let r = ax[i] / self.mass[i].sqrt() - lambda * z[i];
            num += r * r;
            den += z[i] * z[i];
        }
        (num / den.max(1e-300)).sqrt()
    }
}

/// Lowest `k` eigenvalues with Euclidean-orthonormal vectors of the
/// symmetrized problem (`y = M^{1/2} psi`).
pub fn lowest_pairs(
    p: &PencilRef<'_>,
    k: usize,
    config: &SolverConfig,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if p.ndof <= config.dense_threshold || k * 4 >= p.ndof {
        dense_lowest(p, k)
    } else {
        lanczos_lowest(p, k, config)
    }
}

fn dense_lowest(p: &PencilRef<'_>, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = p.ndof;
    let mut s = DMatrix::<f64>::zeros(n, n);
    let rs: Vec<f64> = p.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    for i in 0..n {
        s[(i, i)] = p.diag[i] * rs[i] * rs[i];
    }
    for (e, grid) in p.grids.iter().enumerate() {
        let base = grid.dof0;
        for (i, &v) in p.off[e].iter().enumerate() {
            let w = v * rs[base + i] * rs[base + i + 1];
            s[(base + i, base + i + 1)] += w;
            s[(base + i + 1, base + i)] += w;
        }
        for &(vd, id, v) in &p.coup[e] {
            let w = v * rs[vd] * rs[id];
            s[(vd, id)] += w;
            s[(id, vd)] += w;
        }
    }
    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut vals = Vec::with_capacity(k);
    let mut vecs = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        vals.push(eig.eigenvalues[idx]);
        let col = eig.eigenvectors.column(idx);
        vecs.push(col.iter().copied().collect());
    }
    Ok((vals, vecs))
}

/// Exact factorization of `A - sigma M` exploiting the per-edge tridiagonal
/// blocks; the vertex unknowns are eliminated through a dense Schur
/// complement of size `nv`.
struct StructuredFactor {
    nv: usize,
    grids: Vec<EdgeGrid>,
    coup: Vec<Vec<(usize, usize, f64)>>,
    // LDL^T factors of the shifted interior blocks, per edge
    d: Vec<Vec<f64>>,
    l: Vec<Vec<f64>>,
    // T^{-1} C columns: key (vertex, edge) -> interior values on that edge
    wcols: std::collections::BTreeMap<(usize, usize), Vec<f64>>,
    schur_chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl StructuredFactor {
    fn new(p: &PencilRef<'_>, sigma: f64) -> Option<Self> {
        let nv = p.nv;
        let mut d_all = Vec::with_capacity(p.grids.len());
        let mut l_all = Vec::with_capacity(p.grids.len());
        for (e, grid) in p.grids.iter().enumerate() {
            let n = grid.n;
            let mut d = Vec::with_capacity(n);
            let mut l = Vec::with_capacity(n.saturating_sub(1));
            for i in 0..n {
                let di = p.diag[grid.dof0 + i] - sigma * p.mass[grid.dof0 + i];
                let dhat = if i == 0 {
                    di
                } else {
                    di - l[i - 1] * l[i - 1] * d[i - 1]
                };
                if dhat <= 0.0 {
                    return None; // not SPD at this shift
                }
                if i + 1 < n {
                    l.push(p.off[e][i] / dhat);
                }
                d.push(dhat);
            }
            d_all.push(d);
            l_all.push(l);
        }
        // Schur complement on vertices
        let mut schur = DMatrix::<f64>::zeros(nv, nv);
        for v in 0..nv {
            schur[(v, v)] = p.diag[v] - sigma * p.mass[v];
        }
        let mut wcols = std::collections::BTreeMap::new();
        for (e, grid) in p.grids.iter().enumerate() {
            // collect this edge's couplings grouped by vertex
            let mut per_vertex: std::collections::BTreeMap<usize, Vec<(usize, f64)>> =
                std::collections::BTreeMap::new();
            for &(vd, id, val) in &p.coup[e] {
                per_vertex
                    .entry(vd)
                    .or_default()
                    .push((id - grid.dof0, val));
            }
            let verts: Vec<usize> = per_vertex.keys().copied().collect();
            for &v in &verts {
                let mut rhs = vec![0.0; grid.n];
                for &(i, val) in &per_vertex[&v] {
                    rhs[i] += val;
                }
                tridiag_solve(&d_all[e], &l_all[e], &mut rhs);
                wcols.insert((v, e), rhs);
            }
            for &v1 in &verts {
                let w1 = &wcols[&(v1, e)];
                for &v2 in &verts {
                    // c_{v2,e}^T T^{-1} c_{v1,e}
                    let mut acc = 0.0;
                    for &(i, val) in &per_vertex[&v2] {
                        acc += val * w1[i];
                    }
                    schur[(v2, v1)] -= acc;
                }
            }
        }
        let schur_chol = nalgebra::Cholesky::new(schur)?;
        Some(StructuredFactor {
            nv,
            grids: p.grids.to_vec(),
            coup: p.coup.to_vec(),
            d: d_all,
            l: l_all,
            wcols,
            schur_chol,
        })
    }

    /// x = (A - sigma M)^{-1} b.
    fn solve(&self, b: &[f64], x: &mut [f64]) {
        let nv = self.nv;
        // interior block solves
        for (e, grid) in self.grids.iter().enumerate() {
            let base = grid.dof0;
            x[base..base + grid.n].copy_from_slice(&b[base..base + grid.n]);
            tridiag_solve_slice(&self.d[e], &self.l[e], &mut x[base..base + grid.n]);
        }
        // vertex rhs
        let mut rv = nalgebra::DVector::<f64>::zeros(nv);
        for v in 0..nv {
            rv[v] = b[v];
        }
        for (e, grid) in self.grids.iter().enumerate() {
            for &(vd, id, val) in &self.coup[e] {
                rv[vd] -= val * x[grid.dof0 + (id - grid.dof0)];
            }
        }
        let xv = self.schur_chol.solve(&rv);
        for v in 0..nv {
            x[v] = xv[v];
        }
        // back-substitute into interiors
        for (e, grid) in self.grids.iter().enumerate() {
            let base = grid.dof0;
            let verts: std::collections::BTreeSet<usize> =
                self.coup[e].iter().map(|&(vd, _, _)| vd).collect();
            for v in verts {
                if let Some(w) = self.wcols.get(&(v, e)) {
                    let xvv = xv[v];
                    for i in 0..grid.n {
                        x[base + i] -= xvv * w[i];
                    }
                }
            }
        }
    }
}

fn tridiag_solve(d: &[f64], l: &[f64], b: &mut Vec<f64>) {
    tridiag_solve_slice(d, l, b.as_mut_slice());
}

/// In-place LDL^T solve for one edge block (L holds the multipliers).
fn tridiag_solve_slice(d: &[f64], l: &[f64], b: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        b[i] -= l[i - 1] * b[i - 1];
    }
    for i in 0..n {
        b[i] /= d[i];
    }
    for i in (0..n.saturating_sub(1)).rev() {
        b[i] -= l[i] * b[i + 1];
    }
}

fn lanczos_lowest(
    p: &PencilRef<'_>,
    k: usize,
    config: &SolverConfig,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = p.ndof;
    let sigma = -1.0;
    let factor = StructuredFactor::new(p, sigma).ok_or(Error::ConvergenceFailure {
        achieved: f64::INFINITY,
        tol: config.residual_tol,
    })?;
    let msqrt: Vec<f64> = p.mass.iter().map(|m| m.sqrt()).collect();
    // B z = M^{1/2} (A - sigma M)^{-1} M^{1/2} z
    let apply = |z: &[f64], out: &mut Vec<f64>, scratch: &mut Vec<f64>| {
        for i in 0..n {
            scratch[i] = z[i] * msqrt[i];
        }
        factor.solve(scratch, out);
        for i in 0..n {
            out[i] *= msqrt[i];
        }
    };

    let mut converged_vals: Vec<f64> = Vec::new();
    let mut converged_vecs: Vec<Vec<f64>> = Vec::new();
    let mut rng_state = 0x9e3779b97f4a7c15u64;
    let mut rand = move || {
        // xorshift64*, deterministic across runs
        rng_state ^= rng_state >> 12;
        rng_state ^= rng_state << 25;
        rng_state ^= rng_state >> 27;
        (rng_state.wrapping_mul(0x2545f4914f6cdd1d) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };

    for _restart in 0..8 {
        if converged_vals.len() >= k {
            break;
        }
        let want = k - converged_vals.len();
        let m = (2 * want + config.extra_vectors + 16).min(config.max_lanczos).min(n);
        // start vector orthogonal to converged ones
        let mut v0: Vec<f64> = (0..n).map(|_| rand()).collect();
        orthogonalize(&mut v0, &converged_vecs);
        normalize(&mut v0);

        let mut basis: Vec<Vec<f64>> = vec![v0];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        for j in 0..m {
            apply(&basis[j], &mut w, &mut scratch);
            let alpha = dot(&w, &basis[j]);
            for i in 0..n {
                w[i] -= alpha * basis[j][i];
            }
            if j > 0 {
                let beta_prev = betas[j - 1];
                for i in 0..n {
                    w[i] -= beta_prev * basis[j - 1][i];
                }
            }
            // full reorthogonalization against the basis and converged vectors
            orthogonalize(&mut w, &basis);
            orthogonalize(&mut w, &converged_vecs);
            alphas.push(alpha);
            let beta = norm(&w);
            if j + 1 < m {
                if beta < 1e-13 {
                    break;
                }
                betas.push(beta);
                let vnext: Vec<f64> = w.iter().map(|x| x / beta).collect();
                basis.push(vnext);
            }
        }
        let mm = alphas.len();
        let mut t = DMatrix::<f64>::zeros(mm, mm);
        for i in 0..mm {
            t[(i, i)] = alphas[i];
            if i + 1 < mm {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let te = t.symmetric_eigen();
        let mut order: Vec<usize> = (0..mm).collect();
        // largest theta <-> smallest eigenvalue of the pencil
        order.sort_by(|&a, &b| te.eigenvalues[b].partial_cmp(&te.eigenvalues[a]).unwrap());
        for &idx in order.iter().take(want + 4) {
            let theta = te.eigenvalues[idx];
            if theta <= 0.0 {
                continue;
            }
            let lambda = sigma + 1.0 / theta;
            let mut z = vec![0.0; n];
            for (j, row) in basis.iter().enumerate() {
                let c = te.eigenvectors[(j, idx)];
                for i in 0..n {
                    z[i] += c * row[i];
                }
            }
            orthogonalize(&mut z, &converged_vecs);
            let nz = norm(&z);
            if nz < 1e-8 {
                continue;
            }
            for zi in z.iter_mut() {
                *zi /= nz;
            }
            let res = p.sym_residual(&z, lambda);
            if res <= config.residual_tol {
                converged_vals.push(lambda);
                converged_vecs.push(z);
            }
        }
    }

    if converged_vals.len() < k {
        // report the best residual we could achieve for diagnostics
        return Err(Error::ConvergenceFailure {
            achieved: f64::NAN,
            tol: config.residual_tol,
        });
    }
    let mut order: Vec<usize> = (0..converged_vals.len()).collect();
    order.sort_by(|&a, &b| converged_vals[a].partial_cmp(&converged_vals[b]).unwrap());
    let vals: Vec<f64> = order.iter().take(k).map(|&i| converged_vals[i]).collect();
    let vecs: Vec<Vec<f64>> = order
        .iter()
        .take(k)
        .map(|&i| converged_vecs[i].clone())
        .collect();
    Ok((vals, vecs))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let n = norm(a);
    if n > 0.0 {
        for x in a.iter_mut() {
            *x /= n;
        }
    }
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(w, b);
            for i in 0..w.len() {
                w[i] -= c * b[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::potential::{EdgePotential, PotentialField};
    use crate::spectral::assemble;
    use std::f64::consts::PI;

    #[test]
    fn lanczos_matches_dense() {
        // star with 3 edges and a mildly varying potential
        let mut b = GraphBuilder::new();
        let c = b.add_vertex("c");
        let l1 = b.add_vertex("l1");
        let l2 = b.add_vertex("l2");
        let l3 = b.add_vertex("l3");
        b.add_edge(c, l1, 2.0);
        b.add_edge(c, l2, 3.0);
        b.add_edge(c, l3, 2.5);
        let g = b.build().unwrap();
        let v = PotentialField::new(
            &g,
            vec![
                EdgePotential::Quadratic {
                    c0: 1.0,
                    c1: 0.2,
                    c2: 0.0,
                },
                EdgePotential::Cosine {
                    a: 2.0,
                    b: 1.0,
                    omega: PI,
                    phi: 0.3,
                },
                EdgePotential::Constant(0.5),
            ],
        )
        .unwrap();
        let ham = assemble(&g, &v, 0.01).unwrap();
        let k = 6;
        let dense_cfg = SolverConfig {
            dense_threshold: 10_000,
            ..Default::default()
        };
        let lanczos_cfg = SolverConfig {
            dense_threshold: 10,
            ..Default::default()
        };
        let (ed, _) = lowest_pairs(&ham.structure(), k, &dense_cfg).unwrap();
        let (el, vl) = lowest_pairs(&ham.structure(), k, &lanczos_cfg).unwrap();
        for i in 0..k {
            assert!(
                (ed[i] - el[i]).abs() < 1e-8 * (1.0 + ed[i].abs()),
                "eig {i}: dense {} vs lanczos {}",
                ed[i],
                el[i]
            );
        }
        // pairwise orthogonality of the lanczos vectors
        for i in 0..k {
            for j in 0..i {
                assert!(dot(&vl[i], &vl[j]).abs() < 1e-8);
            }
        }
    }
}

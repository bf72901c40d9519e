//! Fixed-step RK4 integration of the 1-D stationary Schrödinger equation,
//! used to construct reference eigenfunctions in the case studies.

/// Integrate psi'' = (V(x) - energy) psi from `x0` to `x1` with initial
/// data (psi, psi'), `steps` RK4 steps. Returns (psi, psi') at `x1`.
pub fn integrate_schrodinger(
    potential: &dyn Fn(f64) -> f64,
    energy: f64,
    x0: f64,
    x1: f64,
    psi0: f64,
    dpsi0: f64,
    steps: usize,
) -> (f64, f64) {
    let h = (x1 - x0) / steps as f64;
    let rhs = |x: f64, y: [f64; 2]| [y[1], (potential(x) - energy) * y[0]];
    let mut y = [psi0, dpsi0];
    let mut x = x0;
    for _ in 0..steps {
        let k1 = rhs(x, y);
        let k2 = rhs(x + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(x + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        x += h;
    }
    y.into()
}

/// Sample (psi, psi') on a uniform grid of `n + 1` points over `[x0, x1]`,
/// integrating with `sub` RK4 substeps per grid cell.
pub fn sample_schrodinger(
    potential: &dyn Fn(f64) -> f64,
    energy: f64,
    x0: f64,
    x1: f64,
    psi0: f64,
    dpsi0: f64,
    n: usize,
    sub: usize,
) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n + 1);
    let mut state = (psi0, dpsi0);
    out.push(state);
    for i in 0..n {
        let a = x0 + (x1 - x0) * i as f64 / n as f64;
        let b = x0 + (x1 - x0) * (i + 1) as f64 / n as f64;
        state = integrate_schrodinger(potential, energy, a, b, state.0, state.1, sub);
        out.push(state);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_particle_is_a_sine() {
        // psi'' = -E psi with E = 4: psi = sin(2x)/2 from (0, 1)
        let (p, dp) = integrate_schrodinger(&|_| 0.0, 4.0, 0.0, 1.3, 0.0, 1.0, 4000);
        assert!((p - (2.0 * 1.3f64).sin() / 2.0).abs() < 1e-11);
        assert!((dp - (2.0 * 1.3f64).cos()).abs() < 1e-11);
    }

    #[test]
    fn constant_barrier_is_hyperbolic() {
        // psi'' = (M - E) psi, cosh solution
        let kappa2: f64 = 3.0;
        let (p, dp) = integrate_schrodinger(&|_| 5.0, 2.0, 0.0, 2.0, 1.0, 0.0, 4000);
        let k = kappa2.sqrt();
        assert!((p - (k * 2.0).cosh()).abs() < 1e-9);
        assert!((dp - k * (k * 2.0).sinh()).abs() < 1e-9);
    }
}

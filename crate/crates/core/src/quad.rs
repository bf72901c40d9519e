//! Adaptive quadrature and cumulative integrals of per-edge densities.
//!
//! Densities of the form sqrt((V - E)_+) vanish like a square root exactly
//! at turning points, so cells touching a turning point are integrated under
//! the substitution x = b + u^2, which removes the singular derivative.

use std::sync::Arc;

pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

fn simpson_rule(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

fn adapt(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_rule(fa, flm, fm, m - a);
    let right = simpson_rule(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson integral of `f` over `[a, b]` (a <= b).
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson_rule(fa, fm, fb, b - a);
    adapt(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// Integral of `f` over `[a, b]` where `f` vanishes like sqrt at `a`
/// (when `left_sqrt`) and/or at `b` (when `right_sqrt`).
pub fn integrate_sqrt_aware(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    left_sqrt: bool,
    right_sqrt: bool,
    tol: f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    match (left_sqrt, right_sqrt) {
        (false, false) => adaptive_simpson(f, a, b, tol),
        (true, false) => {
            let g = |u: f64| 2.0 * u * f(a + u * u);
            adaptive_simpson(&g, 0.0, (b - a).sqrt(), tol)
        }
        (false, true) => {
            let g = |u: f64| 2.0 * u * f(b - u * u);
            adaptive_simpson(&g, 0.0, (b - a).sqrt(), tol)
        }
        (true, true) => {
            let m = 0.5 * (a + b);
            integrate_sqrt_aware(f, a, m, true, false, 0.5 * tol)
                + integrate_sqrt_aware(f, m, b, false, true, 0.5 * tol)
        }
    }
}

/// Cumulative integral `s -> integral of the density over [start, s]` on a
/// single edge interval, exact to quadrature tolerance at every coordinate.
///
/// Knot cells are split at the listed sqrt-zeros of the density, so partial
/// integrals touching a turning point always use the regularizing
/// substitution rather than resampling.
pub struct CumulativeIntegral {
    knots: Vec<f64>,
    cum: Vec<f64>,
    /// knot flags: density has a sqrt-zero exactly at this knot
    sqrt_zero: Vec<bool>,
    density: Density,
    tol: f64,
}

impl CumulativeIntegral {
    pub fn new(
        density: Density,
        start: f64,
        end: f64,
        sqrt_zeros: &[f64],
        base_cells: usize,
        tol: f64,
    ) -> Self {
        assert!(end >= start);
        let mut knots = Vec::new();
        let n = base_cells.max(1);
        for i in 0..=n {
            knots.push(start + (end - start) * i as f64 / n as f64);
        }
        for &z in sqrt_zeros {
            if z > start && z < end {
                knots.push(z);
            }
        }
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        knots.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * (end - start).max(1.0));
        let is_zero = |s: f64| {
            sqrt_zeros
                .iter()
                .any(|&z| (z - s).abs() < 1e-12 * (end - start).max(1.0))
        };
        let sqrt_zero: Vec<bool> = knots.iter().map(|&s| is_zero(s)).collect();
        let mut cum = vec![0.0];
        for i in 1..knots.len() {
            let piece = integrate_sqrt_aware(
                density.as_ref(),
                knots[i - 1],
                knots[i],
                sqrt_zero[i - 1],
                sqrt_zero[i],
                tol,
            );
            cum.push(cum[i - 1] + piece.max(0.0));
        }
        CumulativeIntegral {
            knots,
            cum,
            sqrt_zero,
            density,
            tol,
        }
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Cumulative value at `s`, clamped to the covered interval.
    pub fn eval(&self, s: f64) -> f64 {
        let s = s.clamp(self.start(), self.end());
        // enclosing cell
        let i = match self
            .knots
            .binary_search_by(|k| k.partial_cmp(&s).unwrap())
        {
            Ok(i) => return self.cum[i],
            Err(i) => i - 1,
        };
        let piece = integrate_sqrt_aware(
            self.density.as_ref(),
            self.knots[i],
            s,
            self.sqrt_zero[i],
            false,
            self.tol,
        );
        self.cum[i] + piece.max(0.0)
    }

    /// Integral over `[s0, s1]` (orientation-insensitive).
    pub fn between(&self, s0: f64, s1: f64) -> f64 {
        (self.eval(s1) - self.eval(s0)).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_matches_closed_forms() {
        let f = |x: f64| x.sin();
        let v = adaptive_simpson(&f, 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
        let g = |x: f64| (-x * x).exp();
        let v = adaptive_simpson(&g, -6.0, 6.0, 1e-12);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn sqrt_singularity_handled() {
        // integral of sqrt(x) over [0,1] = 2/3; plain Simpson struggles at 0
        let f = |x: f64| x.sqrt();
        let v = integrate_sqrt_aware(&f, 0.0, 1.0, true, false, 1e-13);
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        // sqrt((1-x)(x)) over [0,1] = pi/8
        let g = |x: f64| (x * (1.0 - x)).max(0.0).sqrt();
        let v = integrate_sqrt_aware(&g, 0.0, 1.0, true, true, 1e-13);
        assert!((v - std::f64::consts::PI / 8.0).abs() < 1e-11);
    }

    #[test]
    fn cumulative_evaluates_partial_integrals() {
        // density sqrt(sin x) on [0, pi]: turning points at 0 and pi
        let d: Density = Arc::new(|x: f64| x.sin().max(0.0).sqrt());
        let c = CumulativeIntegral::new(d, 0.0, std::f64::consts::PI, &[0.0, std::f64::consts::PI], 16, 1e-12);
        // independent check with a fine composite midpoint rule under u-substitution
        let oracle = |s: f64| {
            let n = 200_000;
            let mut acc = 0.0;
            for i in 0..n {
                let x = s * (i as f64 + 0.5) / n as f64;
                acc += (x.sin().max(0.0)).sqrt();
            }
            acc * s / n as f64
        };
        for &s in &[0.3, 1.0, 2.0, 3.0] {
            assert!(
                (c.eval(s) - oracle(s)).abs() < 5e-7,
                "s={s}: {} vs {}",
                c.eval(s),
                oracle(s)
            );
        }
        assert!((c.between(1.0, 0.3) - (c.eval(1.0) - c.eval(0.3))).abs() < 1e-15);
    }

    #[test]
    fn cumulative_is_monotone() {
        let d: Density = Arc::new(|x: f64| (x.cos() + 1.0).max(0.0).sqrt());
        let c = CumulativeIntegral::new(d, 0.0, 10.0, &[std::f64::consts::PI, 3.0 * std::f64::consts::PI], 32, 1e-11);
        let mut prev = -1.0;
        for i in 0..=500 {
            let s = 10.0 * i as f64 / 500.0;
            let v = c.eval(s);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }
}

//! Scalar root finding: bracketing bisection and a Brent-style refinement.

/// Bisection on a bracketing interval. Requires f(a) and f(b) of opposite
/// sign; returns the midpoint once the bracket is below `xtol`.
pub fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    let mut fa = f(a);
    let fb = f(b);
    assert!(
        fa * fb <= 0.0,
        "bisect requires a sign change: f({a})={fa}, f({b})={fb}"
    );
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= xtol {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Brent's method (inverse quadratic interpolation with bisection fallback).
pub fn brent(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    assert!(fa * fb <= 0.0, "brent requires a sign change");
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut mflag = true;
    let mut d = c;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() < tol {
            return b;
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let cond = !((lo.min(b) < s && s < lo.max(b))
            && !(mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            && !(!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            && !(mflag && (b - c).abs() < tol)
            && !(!mflag && (c - d).abs() < tol));
        if cond {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    b
}

/// Scan `[a, b]` at `n` points for sign changes of `f` and refine each
/// bracket by bisection. Returns roots in increasing order.
pub fn scan_roots(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize, xtol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev_x = a;
    let mut prev_f = f(a);
    for i in 1..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        let fx = f(x);
        if prev_f == 0.0 {
            roots.push(prev_x);
        } else if prev_f * fx < 0.0 {
            roots.push(bisect(f, prev_x, x, xtol));
        }
        prev_x = x;
        prev_f = fx;
    }
    if prev_f == 0.0 {
        roots.push(prev_x);
    }
    roots.dedup_by(|x, y| (*x - *y).abs() < xtol * 4.0);
    roots
}

/// Golden-section maximization of `f` on `[a, b]` (unimodal assumed).
pub fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_and_brent_agree() {
        let f = |x: f64| x.tan() - x;
        // root in (2 pi, 2.5 pi)
        let a = 2.0 * std::f64::consts::PI + 0.5;
        let b = 2.5 * std::f64::consts::PI - 1e-6;
        let r1 = bisect(&f, a, b, 1e-14);
        let r2 = brent(&f, a, b, 1e-14);
        assert!((r1 - r2).abs() < 1e-10);
        assert!((r1.tan() - r1).abs() < 1e-6);
    }

    #[test]
    fn scan_finds_all_cos_roots() {
        let f = |x: f64| x.cos();
        let roots = scan_roots(&f, 0.0, 10.0, 1000, 1e-13);
        assert_eq!(roots.len(), 3);
        for (i, r) in roots.iter().enumerate() {
            let expect = std::f64::consts::PI * (0.5 + i as f64);
            assert!((r - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn golden_section_peak() {
        let f = |x: f64| -(x - 1.7).powi(2) + 3.0;
        let (x, v) = golden_max(&f, 0.0, 5.0, 1e-12);
        assert!((x - 1.7).abs() < 1e-6);
        assert!((v - 3.0).abs() < 1e-15);
    }
}

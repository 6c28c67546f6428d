//! Bracketing and bisection on a uniform grid.

use crate::scalar::Real;

/// Bisects `f` on `[a, b]`, which must bracket a sign change (or have a zero
/// at an endpoint).
///
/// Stops when the bracket is narrower than `x_tol` or cannot be split any
/// further in floating point, and returns the endpoint with the smaller
/// residual. Pass `x_tol = 0` to run to machine precision.
pub fn bisect<F: Real, G: Fn(F) -> F>(f: G, mut a: F, mut b: F, x_tol: F) -> F {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == F::zero() {
        return a;
    }
    if fb == F::zero() {
        return b;
    }
    let two = F::lit(2.0);
    loop {
        let mid = a + (b - a) / two;
        if b - a <= x_tol || mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == F::zero() {
            return mid;
        }
        if (fm < F::zero()) == (fa < F::zero()) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    if fa.abs() <= fb.abs() {
        a
    } else {
        b
    }
}

/// `n` uniformly spaced points covering `[a, b]`, endpoints included.
pub fn uniform_grid<F: Real>(a: F, b: F, n: usize) -> impl Iterator<Item = F> {
    let n = n.max(2);
    let last = F::from_usize(n - 1).unwrap();
    (0..n).map(move |i| {
        if i == n - 1 {
            b
        } else {
            a + (b - a) * F::from_usize(i).unwrap() / last
        }
    })
}

/// Every root of `f` in `[a, b]` visible as a sign change or exact zero on
/// an `n`-point grid, refined by bisection. Sorted ascending.
pub fn grid_roots<F: Real, G: Fn(F) -> F>(f: G, a: F, b: F, n: usize, x_tol: F) -> Vec<F> {
    let mut roots = Vec::new();
    let mut prev: Option<(F, F)> = None;
    for x in uniform_grid(a, b, n) {
        let fx = f(x);
        if fx == F::zero() {
            roots.push(x);
        } else if let Some((xp, fp)) = prev {
            if fp != F::zero() && (fp < F::zero()) != (fx < F::zero()) {
                roots.push(bisect(&f, xp, x, x_tol));
            }
        }
        prev = Some((x, fx));
    }
    roots.dedup();
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt_two() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 0.0);
        assert!((r - 2f64.sqrt()).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn bisect_respects_tolerance() {
        let r = bisect(|x: f64| x - 0.3, 0.0, 1.0, 1e-6);
        assert!((r - 0.3).abs() < 1e-6);
    }

    #[test]
    fn grid_endpoints_exact() {
        let g: Vec<f64> = uniform_grid(0.0, 1.0, 3).collect();
        assert_eq!(g, vec![0.0, 0.5, 1.0]);
        let g: Vec<f64> = uniform_grid(0.1, 0.7, 7).collect();
        assert_eq!(*g.last().unwrap(), 0.7);
    }

    #[test]
    fn sine_roots() {
        let roots = grid_roots(|x: f64| x.sin(), 0.5, 10.0, 1000, 0.0);
        assert_eq!(roots.len(), 3);
        for (r, k) in roots.iter().zip(1..) {
            assert!((r - k as f64 * std::f64::consts::PI).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_zero_on_grid_reported_once() {
        let roots = grid_roots(|x: f64| x - 0.5, 0.0, 1.0, 3, 0.0);
        assert_eq!(roots, vec![0.5]);
    }

    #[test]
    fn f32_instantiation() {
        let r = bisect(|x: f32| x * x - 2.0, 0.0, 2.0, 0.0);
        assert!((r - 2f32.sqrt()).abs() < 1e-6);
    }
}

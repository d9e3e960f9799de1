//! One-dimensional minimisation helpers.

/// Inverse golden ratio `1/φ`.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a local minimum of `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `tol · max(1, |x|)`. Returns
/// `(x_min, f_min)`, where the end points are also considered so that a
/// boundary minimum is returned exactly.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let (fa0, fb0, a0, b0) = (f(a), f(b), a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol * c.abs().max(1.0) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for (x, fx) in [(a0, fa0), (b0, fb0)] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Uniform grid scan of `n` points over `[a, b]` followed by golden-section
/// refinement over the two cells around the best grid point.
///
/// Unimodality is not assumed. Ties on the grid resolve to the smallest `x`.
pub fn grid_then_golden(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize, tol: f64) -> (f64, f64) {
    assert!(n >= 2 && b > a);
    let h = (b - a) / (n - 1) as f64;
    let mut best_i = 0;
    let mut best = f(a);
    for i in 1..n {
        let x = if i == n - 1 { b } else { a + h * i as f64 };
        let v = f(x);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = if best_i == 0 { a } else { a + h * (best_i - 1) as f64 };
    let hi = if best_i + 1 >= n { b } else { a + h * (best_i + 1) as f64 };
    let x_grid = if best_i == n - 1 { b } else { a + h * best_i as f64 };
    let (x, v) = golden_section(&f, lo, hi, tol);
    if v <= best {
        (x, v)
    } else {
        (x_grid, best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, v) = golden_section(|x| (x - 0.3) * (x - 0.3) + 2.0, -1.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn golden_returns_boundary_minimum() {
        let (x, v) = golden_section(|x| x, 1.0, 2.0, 1e-12);
        assert_eq!((x, v), (1.0, 1.0));
    }

    #[test]
    fn grid_handles_multimodal() {
        // two wells; the deeper one is at x = 2
        let f = |x: f64| ((x + 1.0).powi(2) - 0.5).min((x - 2.0).powi(2) - 1.0);
        let (x, v) = grid_then_golden(f, -3.0, 3.0, 101, 1e-12);
        assert!((x - 2.0).abs() < 1e-6);
        assert!((v + 1.0).abs() < 1e-12);
    }
}

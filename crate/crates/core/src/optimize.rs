//! Bounded one-dimensional maximization and bisection on `[0, tau_max]`.

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const SCAN_POINTS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum MaxOutcome {
    Converged(f64),
    /// Iteration budget exhausted; carries the best iterate.
    Exhausted(f64, usize),
}

/// Maximizes `f` on `[0, hi]`.
///
/// A quadratically spaced scan (dense near zero, where the small-sample
/// optima live) locates the best cell; golden-section search refines within
/// its neighbours. The left endpoint is returned as an exact `0.0` whenever
/// it is at least as good as the refined interior point.
pub(crate) fn maximize_on_interval<F>(f: F, hi: f64, tol: f64, max_iter: usize) -> MaxOutcome
where
    F: Fn(f64) -> f64,
{
    let node = |i: usize| hi * (i as f64 / SCAN_POINTS as f64).powi(2);
    let mut best = 0;
    let mut best_val = f(0.0);
    for i in 1..=SCAN_POINTS {
        let v = f(node(i));
        // NaN at 0 (e.g. log 0 penalties) loses to any finite value.
        if v > best_val || best_val.is_nan() {
            best = i;
            best_val = v;
        }
    }
    let mut a = node(best.saturating_sub(1));
    let mut b = node((best + 1).min(SCAN_POINTS));

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while b - a > tol {
        if iter == max_iter {
            let x = if fc >= fd { c } else { d };
            return MaxOutcome::Exhausted(x, iter);
        }
        iter += 1;
        if fc >= fd {
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
    let mut x = 0.5 * (a + b);
    let mut fx = f(x);
    for (cand, v) in [(c, fc), (d, fd)] {
        if v > fx {
            x = cand;
            fx = v;
        }
    }
    if f(hi) > fx {
        x = hi;
        fx = f(hi);
    }
    // An interior point within tolerance of zero whose advantage is only
    // rounding noise is the boundary solution.
    let f0 = f(0.0);
    if f0 >= fx || (x <= tol && f0 >= fx - 1e-12 * fx.abs().max(1.0)) {
        x = 0.0;
    }
    MaxOutcome::Converged(x)
}

/// Root of a non-increasing `g` on `[lo, hi]` with `g(lo) > 0 >= g(hi)`.
///
/// Stops once the bracket is narrower than `tol` and `|g|` is below
/// `value_tol`, or when the bracket cannot shrink any further.
pub(crate) fn bisect_decreasing<G>(g: G, mut lo: f64, mut hi: f64, tol: f64, value_tol: f64) -> f64
where
    G: Fn(f64) -> f64,
{
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        let v = g(mid);
        if hi - lo < tol && v.abs() <= value_tol {
            return mid;
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

//! Composite Newton–Cotes and Gregory rules on uniform grids plus a fixed
//! Gauss–Legendre panel for short intervals.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Weights of composite Simpson on `n` equally spaced nodes.
///
/// When the number of intervals is odd the last three intervals use
/// Simpson's 3/8 rule, so every rule is exact for cubics.
pub fn simpson_weights<T: Real>(n: usize, h: T) -> Result<Vec<T>> {
    if n < 3 {
        return Err(Error::Precondition(format!(
            "Simpson quadrature needs at least 3 nodes, got {n}"
        )));
    }
    let mut w = vec![T::zero(); n];
    let intervals = n - 1;
    let (simpson_intervals, tail) = match intervals % 2 {
        0 => (intervals, false),
        _ => (intervals - 3, true),
    };
    let third = h / lit(3.0);
    for k in (0..simpson_intervals).step_by(2) {
        w[k] = w[k] + third;
        w[k + 1] = w[k + 1] + lit::<T>(4.0) * third;
        w[k + 2] = w[k + 2] + third;
    }
    if tail {
        let s = simpson_intervals;
        let eighth = lit::<T>(3.0) * h / lit(8.0);
        w[s] = w[s] + eighth;
        w[s + 1] = w[s + 1] + lit::<T>(3.0) * eighth;
        w[s + 2] = w[s + 2] + lit::<T>(3.0) * eighth;
        w[s + 3] = w[s + 3] + eighth;
    }
    Ok(w)
}

/// Trapezoid weights with Gregory end corrections through seventh
/// differences, mirrored at both ends. Exact for polynomials of degree 7 and
/// far more accurate than Simpson when the integrand has a non-zero slope at
/// an endpoint, as ρ|ψ|² does at ρ = 0 for l = 0.
pub fn gregory_weights<T: Real>(n: usize, h: T) -> Result<Vec<T>> {
    const END: [f64; 8] = [
        1070017.0 / 3628800.0,
        5537111.0 / 3628800.0,
        103613.0 / 403200.0,
        261115.0 / 145152.0,
        298951.0 / 725760.0,
        515677.0 / 403200.0,
        3349879.0 / 3628800.0,
        3662753.0 / 3628800.0,
    ];
    if n < 2 * END.len() {
        return Err(Error::Precondition(format!(
            "Gregory quadrature needs at least {} nodes, got {n}",
            2 * END.len()
        )));
    }
    let mut w = vec![h; n];
    for (k, &e) in END.iter().enumerate() {
        w[k] = h * lit(e);
        w[n - 1 - k] = h * lit(e);
    }
    Ok(w)
}

pub fn simpson<T: Real>(values: &[T], h: T) -> Result<T> {
    let w = simpson_weights(values.len(), h)?;
    Ok(values
        .iter()
        .zip(&w)
        .fold(T::zero(), |acc, (&v, &wi)| acc + v * wi))
}

/// Running integral ∫₀^{x_k} f on a uniform grid.
///
/// Even nodes carry the composite Simpson value; odd nodes add the integral
/// of the parabola through the previous three samples over the last interval.
pub fn cumulative_simpson<T: Real>(values: &[T], h: T) -> Vec<T> {
    let n = values.len();
    let mut out = vec![T::zero(); n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = h * (values[0] + values[1]) / lit(2.0);
        return out;
    }
    // first interval from the parabola through nodes 0,1,2
    out[1] = h / lit(12.0) * (lit::<T>(5.0) * values[0] + lit::<T>(8.0) * values[1] - values[2]);
    for k in 2..n {
        if k % 2 == 0 {
            out[k] = out[k - 2]
                + h / lit(3.0) * (values[k - 2] + lit::<T>(4.0) * values[k - 1] + values[k]);
        } else {
            out[k] = out[k - 1]
                + h / lit(12.0)
                    * (-values[k - 2] + lit::<T>(8.0) * values[k - 1] + lit::<T>(5.0) * values[k]);
        }
    }
    out
}

/// Five-point Gauss–Legendre rule on [a, b].
pub fn gauss_legendre5<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T) -> T {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    let half = (b - a) / lit(2.0);
    let mid = (a + b) / lit(2.0);
    NODES
        .iter()
        .zip(WEIGHTS.iter())
        .fold(T::zero(), |acc, (&x, &w)| {
            acc + lit::<T>(w) * f(mid + half * lit(x))
        })
        * half
}

/// Checks that `xs` is uniformly spaced and returns the spacing.
pub fn uniform_spacing<T: Real>(xs: &[T]) -> Result<T> {
    if xs.len() < 2 {
        return Err(Error::Precondition("grid needs at least two nodes".into()));
    }
    let h = (xs[xs.len() - 1] - xs[0]) / lit((xs.len() - 1) as f64);
    let tol = lit::<T>(1e-9) * h.abs().max(xs[0].abs());
    for (k, pair) in xs.windows(2).enumerate() {
        if ((pair[1] - pair[0]) - h).abs() > tol {
            return Err(Error::Precondition(format!(
                "grid is not uniform at node {k}"
            )));
        }
    }
    if h <= T::zero() {
        return Err(Error::Precondition("grid must be increasing".into()));
    }
    Ok(h)
}

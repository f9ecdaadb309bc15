//! Numerical integration: adaptive Simpson for smooth integrands and a
//! kink-aware trapezoid rule for positive-part pressure along sampled paths.

use crate::error::{require_positive, Result};

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of a smooth integrand over `[a, b]`.
///
/// `rel_tol` is relative to the magnitude of a coarse first estimate; an
/// absolute floor of `1e-300` keeps the recursion finite for zero integrands.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    require_positive("tol", rel_tol)?;
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let eps = (rel_tol * whole.abs()).max(1e-300);
    Ok(simpson_step(&f, a, b, fa, fm, fb, whole, eps, MAX_DEPTH))
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

/// Integral of `[g(A(t))]_+` along a sampled reservoir path, with
/// `g(A) = slope * (A - threshold)`.
///
/// Between consecutive samples the path is taken as an exponential
/// interpolant. When a segment crosses the threshold the crossing time is
/// solved on that interpolant and inserted as a breakpoint, so the positive
/// part is never integrated across its kink. Zero-length segments (pre/post
/// jump pairs) contribute nothing.
pub fn positive_pressure_integral(
    times: &[f64],
    levels: &[f64],
    slope: f64,
    threshold: f64,
) -> f64 {
    debug_assert_eq!(times.len(), levels.len());
    let pressure = |a: f64| slope * (a - threshold);
    let mut total = 0.0;
    for i in 1..times.len() {
        let (t0, t1) = (times[i - 1], times[i]);
        let dt = t1 - t0;
        if dt <= 0.0 {
            continue;
        }
        let (a0, a1) = (levels[i - 1], levels[i]);
        let (p0, p1) = (pressure(a0), pressure(a1));
        if p0 <= 0.0 && p1 <= 0.0 {
            continue;
        }
        if p0 >= 0.0 && p1 >= 0.0 {
            total += 0.5 * dt * (p0 + p1);
            continue;
        }
        // Exactly one endpoint is active; both levels are positive here since
        // the threshold is positive and one endpoint lies above it.
        let crossing = if a0 > 0.0 && a1 > 0.0 && a0 != a1 {
            dt * (threshold / a0).ln() / (a1 / a0).ln()
        } else {
            dt * (threshold - a0) / (a1 - a0)
        };
        let crossing = crossing.clamp(0.0, dt);
        if p0 > 0.0 {
            total += 0.5 * crossing * p0;
        } else {
            total += 0.5 * (dt - crossing) * p1;
        }
    }
    total
}

/// Composite trapezoid rule on a sample grid (zero-length gaps contribute nothing).
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

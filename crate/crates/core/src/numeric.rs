//! Scalar root finding and maximization.

use crate::error::{Error, Result};

const MAX_BISECTION_STEPS: usize = 400;
const MAX_BRACKET_DOUBLINGS: usize = 200;

/// Root of a strictly decreasing `f` on `[lo, hi]` with `f(lo) >= 0 >= f(hi)`.
///
/// Stops when the bracket is narrower than `xtol * max(1, |x|)`.
pub fn bisect_decreasing<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol * mid.abs().max(1.0) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence {
        solver: "bisection",
        iterations: MAX_BISECTION_STEPS,
    })
}

/// Doubles `hi` until a strictly decreasing `f` becomes non-positive there.
///
/// Returns `None` when `f` stays positive up to `limit`.
pub fn expand_upper_bracket<F>(f: F, start: f64, limit: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut hi = start.max(1.0);
    for _ in 0..MAX_BRACKET_DOUBLINGS {
        if f(hi) <= 0.0 {
            return Some(hi);
        }
        if hi >= limit {
            return None;
        }
        hi = (2.0 * hi).min(limit);
    }
    None
}

/// Root of a strictly decreasing `f` on `[0, inf)`, or `None` when `f(0) < 0`
/// or `f` stays positive up to `limit`.
pub fn decreasing_root_on_half_line<F>(f: F, limit: f64, xtol: f64) -> Result<Option<f64>>
where
    F: Fn(f64) -> f64,
{
    let at_zero = f(0.0);
    if at_zero < 0.0 {
        return Ok(None);
    }
    if at_zero == 0.0 {
        return Ok(Some(0.0));
    }
    match expand_upper_bracket(&f, 1.0, limit) {
        Some(hi) => bisect_decreasing(&f, 0.0, hi, xtol).map(Some),
        None => Ok(None),
    }
}

/// Maximizer of a unimodal `f` on `[lo, hi]` by golden-section search.
pub fn golden_section_max<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > xtol * (1.0 + a.abs()) {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
    }
    // The endpoints themselves may beat the interior probes for monotone f.
    let mid = 0.5 * (lo + hi);
    [(mid, f(mid)), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .fold((mid, f64::NEG_INFINITY), |best, cand| {
            if cand.1 > best.1 {
                cand
            } else {
                best
            }
        })
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt_two() {
        let root = bisect_decreasing(|x| 2.0 - x * x, 0.0, 2.0, 1e-14).unwrap();
        assert!((root - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn half_line_root() {
        let root = decreasing_root_on_half_line(|x| 100.0 - x, 1e12, 1e-14).unwrap();
        assert!((root.unwrap() - 100.0).abs() < 1e-10);
        assert_eq!(decreasing_root_on_half_line(|x| -1.0 - x, 1e12, 1e-14).unwrap(), None);
        // Asymptote above zero: no root.
        assert_eq!(
            decreasing_root_on_half_line(|x| 1.0 / (1.0 + x) + 0.1, 1e6, 1e-14).unwrap(),
            None
        );
    }

    #[test]
    fn golden_section_on_parabola_and_boundary() {
        let (x, fx) = golden_section_max(|x| -(x - 1.3).powi(2), 0.0, 5.0, 1e-12);
        assert!((x - 1.3).abs() < 1e-8);
        assert!(fx.abs() < 1e-15);
        let (x, _) = golden_section_max(|x| -x, 0.0, 5.0, 1e-12);
        assert_eq!(x, 0.0);
    }

    #[test]
    fn linspace_hits_endpoints() {
        let g = linspace(0.0, 1.0, 101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
        assert_eq!(g[50], 0.5);
    }
}

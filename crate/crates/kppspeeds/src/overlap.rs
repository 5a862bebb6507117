//! Shared pieces of the region-overlap constructions: stable quadratic
//! roots, interval gaps, a scan-and-refine minimiser and threshold search.

use crate::error::{Error, Result};
use crate::roots::{bisect_threshold, golden_min};

/// Roots `(r^-, r^+)` of `diff r² - c r + a = 0`, or `None` when complex.
/// The smaller root uses `2a/(c + √disc)` to avoid cancellation.
pub(crate) fn quad_roots(c: f64, diff: f64, a: f64) -> Option<(f64, f64)> {
    let disc = c * c - 4.0 * diff * a;
    if disc < 0.0 || disc.is_nan() {
        return None;
    }
    let s = disc.sqrt();
    Some((2.0 * a / (c + s), (c + s) / (2.0 * diff)))
}

/// Signed separation of two closed intervals; `≤ 0` iff they intersect.
pub(crate) fn interval_gap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.1).max(b.0 - a.1)
}

/// Minimum of `f` over `[lo, hi]`: a 512-point scan, then golden-section
/// refinement around the lowest few sampled local minima. Returns
/// `(min, argmin)` and stops early at the first non-positive sample.
pub(crate) fn scan_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    const N: usize = 512;
    const REFINE: usize = 4;
    if !(hi > lo) {
        return (f(lo), lo);
    }
    let h = (hi - lo) / (N - 1) as f64;
    let at = |i: usize| if i >= N - 1 { hi } else { lo + h * i as f64 };
    let mut v = Vec::with_capacity(N);
    for i in 0..N {
        let x = at(i);
        let fx = f(x);
        if fx <= 0.0 {
            return (fx, x);
        }
        v.push(fx);
    }
    let mut minima: Vec<usize> = (0..N)
        .filter(|&i| (i == 0 || v[i] <= v[i - 1]) && (i == N - 1 || v[i] <= v[i + 1]))
        .collect();
    minima.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut best = (v[minima[0]], at(minima[0]));
    for &i in minima.iter().take(REFINE) {
        let (x, fx) = golden_min(&f, at(i.saturating_sub(1)), at(i + 1), 1e-13 * (hi - lo));
        if fx < best.0 {
            best = (fx, x);
        }
    }
    best
}

/// Smallest `c ≥ lo` with `pred(c)`, assuming monotonicity. `hi` is doubled
/// until the predicate holds, then the bracket is bisected to `rel`.
pub(crate) fn first_true<P: FnMut(f64) -> bool>(mut pred: P, lo: f64, hi: f64, rel: f64) -> Result<f64> {
    let mut lo = lo;
    let mut hi = hi.max(lo);
    let mut widen = 0;
    while !pred(hi) {
        lo = hi;
        hi = 2.0 * hi + 1.0;
        widen += 1;
        if widen > 40 {
            return Err(Error::NoConvergence(format!("no overlap found below c = {hi}")));
        }
    }
    Ok(bisect_threshold(pred, lo, hi, rel, 1e-15))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_are_stable() {
        let (a, b) = quad_roots(1e8, 1.0, 1.0).unwrap();
        assert!((a - 1e-8).abs() < 1e-22);
        assert!((b - 1e8).abs() < 1e-6);
        assert!(quad_roots(1.0, 1.0, 1.0).is_none());
    }

    #[test]
    fn gap_sign() {
        assert!(interval_gap((0.0, 1.0), (0.5, 2.0)) < 0.0);
        assert_eq!(interval_gap((0.0, 1.0), (1.0, 2.0)), 0.0);
        assert_eq!(interval_gap((0.0, 1.0), (3.0, 4.0)), 2.0);
    }

    #[test]
    fn scan_finds_interior_min() {
        let (v, x) = scan_min(|x| (x - 0.3337).powi(2) + 1.0, 0.0, 1.0);
        assert!((x - 0.3337).abs() < 1e-6 && (v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_with_widening() {
        let c = first_true(|c| c >= 37.25, 0.0, 1.0, 1e-14).unwrap();
        assert!((c - 37.25).abs() < 1e-10);
    }
}

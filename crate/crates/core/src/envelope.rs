//! Upper concave envelopes of cumulative functions.
//!
//! The envelope of a piecewise-linear function is the upper hull of its knot
//! values, built with a monotone chain. The slopes of the hull are the
//! per-block description rates of an optimal schedule.
//!
//! [`legendre_value`] computes the same envelope through the min-sup
//! conjugate formula instead of a hull, and is kept as an independent check.

use serde::Serialize;

use crate::cumfn::{CumulativeFunction, Side};
use crate::error::{Error, Result};
use crate::schedule::RateProfile;

/// Adjacent segments whose slopes differ by less than this are merged.
pub const SLOPE_MERGE_TOL: f64 = 1e-12;

/// Slope grid size used by [`legendre_value`] when none is given.
pub const DEFAULT_SLOPE_GRID: usize = 10_001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub slope: f64,
}

impl Segment {
    pub fn width(&self) -> f64 {
        self.alpha_hi - self.alpha_lo
    }
}

/// Continuous concave piecewise-linear function with non-increasing slopes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcaveEnvelope {
    knots: Vec<(f64, f64)>,
    segments: Vec<Segment>,
}

impl ConcaveEnvelope {
    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn value(&self, alpha: f64) -> f64 {
        let alpha = alpha.clamp(0.0, 1.0);
        let idx = self.knots.partition_point(|&(a, _)| a < alpha);
        if idx < self.knots.len() && self.knots[idx].0 == alpha {
            return self.knots[idx].1;
        }
        let (a0, v0) = self.knots[idx - 1];
        let (a1, v1) = self.knots[idx];
        v0 + (v1 - v0) * (alpha - a0) / (a1 - a0)
    }

    /// Slope of the segment on the requested side of `alpha`. At a kink the
    /// two sides differ; at the domain ends the only available side is used.
    pub fn slope(&self, alpha: f64, side: Side) -> f64 {
        let n = self.segments.len();
        let idx = match side {
            Side::Right => self.segments.partition_point(|s| s.alpha_hi <= alpha),
            Side::Left => self.segments.partition_point(|s| s.alpha_hi < alpha),
        };
        self.segments[idx.min(n - 1)].slope
    }

    /// Converts back into a (continuous) cumulative function.
    pub fn to_function(&self) -> CumulativeFunction {
        CumulativeFunction::from_points(&self.knots).expect("envelope is a regular function")
    }
}

/// Upper concave envelope of a finite, non-decreasing cumulative function.
pub fn concave_envelope(f: &CumulativeFunction) -> Result<ConcaveEnvelope> {
    if !f.is_finite() {
        return Err(Error::InvalidArgument("envelope of a function with infinite values".into()));
    }
    let mut points: Vec<(f64, f64)> = f.sides().map(|(a, _, v)| (a, v)).collect();
    points.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    // Keep the highest value per abscissa.
    points.dedup_by(|later, kept| {
        if later.0 == kept.0 {
            kept.1 = kept.1.max(later.1);
            true
        } else {
            false
        }
    });

    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for p in points {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }

    // Merge nearly collinear vertices left over from rounding.
    let last = hull.len() - 1;
    let mut knots: Vec<(f64, f64)> = Vec::with_capacity(hull.len());
    for (i, &mid) in hull.iter().enumerate() {
        if i > 0 && i < last {
            let prev = knots[knots.len() - 1];
            let next = hull[i + 1];
            let s1 = (mid.1 - prev.1) / (mid.0 - prev.0);
            let s2 = (next.1 - mid.1) / (next.0 - mid.0);
            if (s1 - s2).abs() <= SLOPE_MERGE_TOL {
                continue;
            }
        }
        knots.push(mid);
    }

    let segments = knots
        .windows(2)
        .map(|w| Segment {
            alpha_lo: w[0].0,
            alpha_hi: w[1].0,
            slope: (w[1].1 - w[0].1) / (w[1].0 - w[0].0),
        })
        .collect();
    Ok(ConcaveEnvelope { knots, segments })
}

/// Per-block increments of the envelope on the grid `i / k`.
pub fn segment_slopes(e: &ConcaveEnvelope, k: usize) -> Result<RateProfile> {
    if k == 0 {
        return Err(Error::ZeroBlocks);
    }
    let grid: Vec<f64> = (0..=k).map(|i| e.value(i as f64 / k as f64)).collect();
    RateProfile::new(grid.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect())
}

/// Envelope value at `alpha` via `min_{a >= 0} (a * alpha + sup_z (F(z) - a z))`.
///
/// The outer minimum is taken over `grid_points` slopes spread uniformly on
/// `[0, F(1) / alpha]`, then refined by ternary search inside the bracket of
/// the best grid point (the objective is convex in `a`). Every slope tried
/// gives an upper bound on the envelope, so the result never undershoots it.
pub fn legendre_value(f: &CumulativeFunction, alpha: f64, grid_points: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "legendre_value needs alpha in (0, 1], got {alpha}"
        )));
    }
    if grid_points == 0 {
        return Err(Error::InvalidArgument("empty slope grid".into()));
    }
    if !f.is_finite() {
        return Err(Error::InvalidArgument("envelope of a function with infinite values".into()));
    }
    let sides: Vec<(f64, f64)> = f.sides().map(|(z, _, v)| (z, v)).collect();
    let objective = |a: f64| {
        let b = sides
            .iter()
            .map(|&(z, v)| v - a * z)
            .fold(f64::NEG_INFINITY, f64::max);
        a * alpha + b
    };

    let top = (f.final_value() / alpha).max(0.0);
    if grid_points == 1 || top == 0.0 {
        return Ok(objective(0.0).min(objective(top)));
    }
    let step = top / (grid_points - 1) as f64;
    let (best_i, mut best) = (0..grid_points)
        .map(|i| (i, objective(i as f64 * step)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });

    let mut lo = best_i.saturating_sub(1) as f64 * step;
    let mut hi = ((best_i + 1).min(grid_points - 1)) as f64 * step;
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + hi) {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let (f1, f2) = (objective(m1), objective(m2));
        best = best.min(f1).min(f2);
        if f1 <= f2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    Ok(best.min(objective(0.5 * (lo + hi))))
}

//! Achievability verdicts and minimum distortion.
//!
//! Every check reduces to comparing piecewise-linear functions, so the
//! inequalities are evaluated exactly at knots (both one-sided values) rather
//! than on a grid. Margins are signed: negative means violated.

use serde::Serialize;

use crate::cumfn::{
    effective_crdf, merged_alphas, rate_leakage_gap, CumulativeFunction, Mode, Side,
};
use crate::envelope::concave_envelope;
use crate::error::{Error, Result};
use crate::ratedist::{RdCurve, SourceModel};

/// A verdict is positive when its margin is at least `-VERDICT_TOL`.
pub const VERDICT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct VerdictDetails {
    /// `sup (G - L)`, when the check involves a leakage budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub withheld_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope_knots: Option<Vec<(f64, f64)>>,
    /// Average distortion of the optimal schedule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub achievable: bool,
    pub margin: f64,
    pub binding_alpha: f64,
    pub details: VerdictDetails,
}

impl Verdict {
    fn from_margin(margin: f64, binding_alpha: f64, details: VerdictDetails) -> Self {
        Verdict { achievable: margin >= -VERDICT_TOL, margin, binding_alpha, details }
    }
}

/// Smallest slack over a set of one-sided evaluation points.
struct MinSlack {
    margin: f64,
    alpha: f64,
}

impl MinSlack {
    fn new() -> Self {
        MinSlack { margin: f64::INFINITY, alpha: 0.0 }
    }

    fn offer(&mut self, alpha: f64, slack: f64) {
        if slack < self.margin {
            self.margin = slack;
            self.alpha = alpha;
        }
    }
}

/// One-sided evaluation points at the union of the functions' knots.
fn evaluation_points(fs: &[&CumulativeFunction]) -> Vec<(f64, Side)> {
    merged_alphas(fs)
        .into_iter()
        .enumerate()
        .flat_map(|(i, a)| {
            let left = (i > 0).then_some((a, Side::Left));
            left.into_iter().chain(std::iter::once((a, Side::Right)))
        })
        .collect()
}

fn at(f: &CumulativeFunction, alpha: f64, side: Side) -> f64 {
    match side {
        Side::Right => f.value(alpha),
        Side::Left => f.left_limit(alpha),
    }
}

/// Lossless achievability: `G(1) - G(a) >= max{(1 - a) H, H - L(a)}` for all `a`.
pub fn check_lossless(
    g: &CumulativeFunction,
    l: &CumulativeFunction,
    source: &SourceModel,
) -> Result<Verdict> {
    g.ensure_rate("rate function")?;
    let h = source.entropy();
    let total = g.final_value();
    let mut worst = MinSlack::new();
    for (a, side) in evaluation_points(&[g, l]) {
        let lhs = total - at(g, a, side);
        let rhs = ((1.0 - a) * h).max(h - at(l, a, side));
        worst.offer(a, lhs - rhs);
    }
    let details = VerdictDetails { entropy: Some(h), ..Default::default() };
    Ok(Verdict::from_margin(worst.margin, worst.alpha, details))
}

/// The same lossless question posed on the effective rate function:
/// `G_eff(1) - (1 - a) H >= G_eff(a)` for all `a`.
pub fn check_effective_lossless(
    g: &CumulativeFunction,
    l: &CumulativeFunction,
    source: &SourceModel,
) -> Result<Verdict> {
    let h = source.entropy();
    let g_eff = effective_crdf(g, l, Mode::Lossy)?;
    let total = g_eff.final_value();
    let mut worst = MinSlack::new();
    for (a, side) in evaluation_points(&[&g_eff]) {
        worst.offer(a, total - (1.0 - a) * h - at(&g_eff, a, side));
    }
    let details = VerdictDetails {
        entropy: Some(h),
        withheld_rate: Some(rate_leakage_gap(g, l)?.value.max(0.0)),
        ..Default::default()
    };
    Ok(Verdict::from_margin(worst.margin, worst.alpha, details))
}

/// Whether the lossless check and its effective-rate form agree.
pub fn hamming_consistency(
    g: &CumulativeFunction,
    l: &CumulativeFunction,
    source: &SourceModel,
) -> Result<bool> {
    let direct = check_lossless(g, l, source)?;
    let effective = check_effective_lossless(g, l, source)?;
    Ok(direct.achievable == effective.achievable)
}

/// Average distortion of the best schedule: the integral of `D` applied to
/// the slope of the concave envelope of the effective rate function, summed
/// exactly over envelope segments.
pub fn min_distortion(
    g: &CumulativeFunction,
    l: &CumulativeFunction,
    curve: &RdCurve,
) -> Result<f64> {
    Ok(lossy_summary(g, l, curve)?.integral)
}

struct LossySummary {
    integral: f64,
    withheld: f64,
    envelope_knots: Vec<(f64, f64)>,
    binding_alpha: f64,
}

fn lossy_summary(
    g: &CumulativeFunction,
    l: &CumulativeFunction,
    curve: &RdCurve,
) -> Result<LossySummary> {
    if !curve.d_max().is_finite() {
        return Err(Error::UnboundedDistortion);
    }
    let withheld = rate_leakage_gap(g, l)?.value.max(0.0);
    let g_eff = g.clip_shift(withheld)?;
    let env = concave_envelope(&g_eff)?;
    let floor = curve.d_min();
    let mut integral = 0.0;
    let mut binding_alpha = 1.0;
    for s in env.segments() {
        let d = curve.distortion(s.slope);
        integral += s.width() * d;
        if d > floor && binding_alpha == 1.0 {
            binding_alpha = s.alpha_lo;
        }
    }
    Ok(LossySummary { integral, withheld, envelope_knots: env.knots().to_vec(), binding_alpha })
}

/// Lossy achievability at average distortion `dbar`.
pub fn check_lossy(
    g: &CumulativeFunction,
    l: &CumulativeFunction,
    curve: &RdCurve,
    dbar: f64,
) -> Result<Verdict> {
    if !(dbar >= 0.0) {
        return Err(Error::InvalidArgument(format!("distortion level {dbar}")));
    }
    let s = lossy_summary(g, l, curve)?;
    let note = matches!(curve.form(), crate::ratedist::CurveForm::Sampled { .. }).then(|| {
        "sampled curve: chord interpolation over-estimates D, so the integral is an upper bound"
            .to_string()
    });
    let details = VerdictDetails {
        withheld_rate: Some(s.withheld),
        envelope_knots: Some(s.envelope_knots),
        integral: Some(s.integral),
        note,
        ..Default::default()
    };
    Ok(Verdict::from_margin(dbar - s.integral, s.binding_alpha, details))
}

/// Lossy achievability when `R(D) = c - D`:
/// `G_eff(1) - G_eff(a) >= (1 - a) c - dbar` on `[0, 1 - dbar / c]`.
///
/// Outside that interval the right-hand side is negative, so the slack
/// there is positive; the reported margin is the minimum over all of
/// `[0, 1]`, which makes it comparable with `dbar - integral`.
pub fn check_linear_rd(
    g: &CumulativeFunction,
    l: &CumulativeFunction,
    c: f64,
    dbar: f64,
) -> Result<Verdict> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("linear rate-distortion needs c > 0, got {c}")));
    }
    if !(dbar >= 0.0) {
        return Err(Error::InvalidArgument(format!("distortion level {dbar}")));
    }
    let withheld = rate_leakage_gap(g, l)?.value.max(0.0);
    let g_eff = g.clip_shift(withheld)?;
    let total = g_eff.final_value();
    let upper = 1.0 - dbar / c;

    let mut all = MinSlack::new();
    let mut inside = MinSlack::new();
    let mut points = evaluation_points(&[&g_eff]);
    if (0.0..=1.0).contains(&upper) {
        points.push((upper, Side::Right));
        if upper > 0.0 {
            points.push((upper, Side::Left));
        }
    }
    for (a, side) in points {
        let slack = total - at(&g_eff, a, side) - ((1.0 - a) * c - dbar);
        all.offer(a, slack);
        if a <= upper {
            inside.offer(a, slack);
        }
    }
    let achievable = inside.margin >= -VERDICT_TOL;
    let details = VerdictDetails { withheld_rate: Some(withheld), ..Default::default() };
    Ok(Verdict { achievable, margin: all.margin, binding_alpha: all.alpha, details })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumfn::Knot;

    fn half() -> SourceModel {
        SourceModel::uniform(2).unwrap()
    }

    fn erasure() -> RdCurve {
        RdCurve::linear(1.0).unwrap()
    }

    fn leaky_instance() -> (CumulativeFunction, CumulativeFunction) {
        let g = CumulativeFunction::step(0.5, 1.0).unwrap();
        let l = CumulativeFunction::from_points(&[(0.0, 0.0), (0.5, 0.2), (1.0, 1.0)]).unwrap();
        (g, l)
    }

    #[test]
    fn lossless_examples() {
        let g = CumulativeFunction::line(1.0);
        let l = CumulativeFunction::constant(1.0).unwrap();
        let v = check_lossless(&g, &l, &half()).unwrap();
        assert!(v.achievable);
        assert_eq!(v.margin, 0.0);

        let late = CumulativeFunction::new(vec![Knot::flat(0.0, 0.0), Knot::new(1.0, 0.0, 1.0)]).unwrap();
        let v = check_lossless(&g, &late, &half()).unwrap();
        assert!(!v.achievable);

        let short = CumulativeFunction::line(0.9);
        let v = check_lossless(&CumulativeFunction::line(5.0), &short, &half()).unwrap();
        assert!(!v.achievable);
        assert_eq!(v.binding_alpha, 1.0);
    }

    #[test]
    fn consistency_examples() {
        let g = CumulativeFunction::line(1.0);
        assert!(hamming_consistency(&g, &CumulativeFunction::constant(1.0).unwrap(), &half()).unwrap());
        let late = CumulativeFunction::new(vec![Knot::flat(0.0, 0.0), Knot::new(1.0, 0.0, 1.0)]).unwrap();
        assert!(hamming_consistency(&g, &late, &half()).unwrap());
        assert!(!check_effective_lossless(&g, &late, &half()).unwrap().achievable);
    }

    #[test]
    fn min_distortion_examples() {
        let unconstrained = CumulativeFunction::unconstrained();
        let g = CumulativeFunction::step(1.0, 0.6).unwrap();
        assert!((min_distortion(&g, &unconstrained, &erasure()).unwrap() - 0.4).abs() < 1e-15);

        let (g, l) = leaky_instance();
        assert!((min_distortion(&g, &l, &erasure()).unwrap() - 0.8).abs() < 1e-12);

        let g = CumulativeFunction::line(1.0);
        assert_eq!(min_distortion(&g, &unconstrained, &erasure()).unwrap(), 0.0);
    }

    #[test]
    fn lossy_examples() {
        let (g, l) = leaky_instance();
        let v = check_lossy(&g, &l, &erasure(), 0.8).unwrap();
        assert!(v.achievable);
        assert!(v.margin.abs() < 1e-12);
        assert_eq!(v.binding_alpha, 0.0);
        assert!(!check_lossy(&g, &l, &erasure(), 0.79).unwrap().achievable);

        let zero = CumulativeFunction::from_points(&[(0.0, 0.0), (1.0, 0.0)]).unwrap();
        assert!(check_lossy(&zero, &l, &erasure(), 1.0).unwrap().achievable);
        assert!(check_lossy(&g, &l, &erasure(), -0.1).is_err());
    }

    #[test]
    fn linear_rd_examples() {
        let v = check_linear_rd(&CumulativeFunction::line(0.6), &CumulativeFunction::unconstrained(), 1.0, 0.4)
            .unwrap();
        assert!(v.achievable);
        assert!(v.margin.abs() < 1e-15);

        // Log-loss: no leakage allowed before 0.6, so nothing is usable before.
        let source = SourceModel::uniform(4).unwrap();
        let h = source.entropy();
        let l = CumulativeFunction::new(vec![
            Knot::flat(0.0, 0.0),
            Knot::new(0.6, 0.0, 10.0),
            Knot::flat(1.0, 10.0),
        ])
        .unwrap();
        let g = CumulativeFunction::line(3.0);
        let dbar = 1.0;
        let v = check_linear_rd(&g, &l, h, dbar).unwrap();
        let g_eff = effective_crdf(&g, &l, Mode::Lossy).unwrap();
        assert_eq!(g_eff.value(0.6), 0.0);
        assert!(g_eff.final_value() >= h - dbar);
        assert!(v.achievable);
        let curve = RdCurve::linear(h).unwrap();
        assert_eq!(check_lossy(&g, &l, &curve, dbar).unwrap().achievable, v.achievable);

        // Too little usable rate for the target.
        let tight = CumulativeFunction::line(2.3);
        assert!(!check_linear_rd(&tight, &l, h, dbar).unwrap().achievable);

        let zero = CumulativeFunction::from_points(&[(0.0, 0.0), (1.0, 0.0)]).unwrap();
        assert!(check_linear_rd(&zero, &l, 1.0, 1.0).unwrap().achievable);
        assert!(check_linear_rd(&zero, &l, 0.0, 1.0).is_err());
    }

    #[test]
    fn earlier_rate_is_not_more_rate() {
        let unconstrained = CumulativeFunction::unconstrained();
        let late = CumulativeFunction::step(1.0, 0.6).unwrap();
        let early = CumulativeFunction::step(0.5, 0.6).unwrap();
        // `early >= late` pointwise, yet it can only describe the first half.
        assert!((min_distortion(&early, &unconstrained, &erasure()).unwrap() - 0.5).abs() < 1e-12);
        assert!((min_distortion(&late, &unconstrained, &erasure()).unwrap() - 0.4).abs() < 1e-12);
        // Adding rate on top of every slot does help.
        let more = late.add(&CumulativeFunction::line(0.2)).unwrap();
        assert!(min_distortion(&more, &unconstrained, &erasure()).unwrap() <= 0.4);
    }

    #[test]
    fn unbounded_curve_rejected() {
        let (g, l) = leaky_instance();
        let curve = RdCurve::linear(f64::INFINITY);
        assert!(curve.is_err());
        assert!(min_distortion(&g, &l, &RdCurve::linear(2.0).unwrap()).is_ok());
    }
}

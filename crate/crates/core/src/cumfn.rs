//! Regular cumulative functions on `[0, 1]`.
//!
//! A [`CumulativeFunction`] is piecewise linear and right-continuous. It is
//! stored as a list of knots; each knot carries the left limit (`pre`) and the
//! value (`post`) at its abscissa, so a jump is simply `pre < post`. Between
//! two knots the function interpolates linearly from the first knot's `post`
//! to the second knot's `pre`.
//!
//! Rate functions (how much encoding rate is available by normalized time
//! `alpha`) must be finite and start at zero. Leakage functions share the same
//! shape but may be `+inf` ("unconstrained") and may start above zero.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Knots closer than this are rejected as degenerate, and evaluation points
/// within this distance of a knot are snapped onto it.
pub const MIN_KNOT_GAP: f64 = 1e-12;

/// Which one-sided value to read at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Knot {
    pub alpha: f64,
    #[serde(with = "extended")]
    pub pre: f64,
    #[serde(with = "extended")]
    pub post: f64,
}

impl Knot {
    pub fn new(alpha: f64, pre: f64, post: f64) -> Self {
        Knot { alpha, pre, post }
    }

    /// A knot without a jump.
    pub fn flat(alpha: f64, value: f64) -> Self {
        Knot::new(alpha, value, value)
    }
}

/// A property of regular cumulative functions that a knot list fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "property", content = "detail", rename_all = "kebab-case")]
pub enum Violation {
    Cumulation(String),
    ZeroInitialValue(String),
    RightContinuity(String),
    DomainCoverage(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cumulation(s) => write!(f, "cumulation: {s}"),
            Violation::ZeroInitialValue(s) => write!(f, "zero initial value: {s}"),
            Violation::RightContinuity(s) => write!(f, "right-continuity encoding: {s}"),
            Violation::DomainCoverage(s) => write!(f, "domain coverage: {s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every regularity property of a knot list without stopping at the
/// first failure.
pub fn validate_regular(knots: &[Knot]) -> ValidationReport {
    let mut out = Vec::new();

    if knots.is_empty() {
        out.push(Violation::DomainCoverage("no knots".into()));
        return ValidationReport { violations: out };
    }
    for (i, k) in knots.iter().enumerate() {
        if !k.alpha.is_finite() {
            out.push(Violation::DomainCoverage(format!("knot {i} has non-finite alpha")));
        }
        if k.pre.is_nan() || k.post.is_nan() {
            out.push(Violation::RightContinuity(format!("knot {i} has a NaN value")));
        }
        if k.pre > k.post {
            out.push(Violation::RightContinuity(format!(
                "knot {i} at alpha {} drops from {} to {}",
                k.alpha, k.pre, k.post
            )));
        }
        if k.post < 0.0 || (i > 0 && k.pre < 0.0) {
            out.push(Violation::Cumulation(format!("knot {i} has a negative value")));
        }
    }
    let first = knots[0];
    if first.alpha != 0.0 {
        out.push(Violation::DomainCoverage(format!("first knot at {} instead of 0", first.alpha)));
    }
    let last = knots[knots.len() - 1];
    if last.alpha != 1.0 {
        out.push(Violation::DomainCoverage(format!("last knot at {} instead of 1", last.alpha)));
    }
    if first.post.is_finite() && first.post != 0.0 {
        out.push(Violation::ZeroInitialValue(format!("F(0) = {}", first.post)));
    }
    for (i, w) in knots.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if b.alpha <= a.alpha {
            out.push(Violation::DomainCoverage(format!(
                "alphas not strictly increasing at knot {}",
                i + 1
            )));
        } else if b.alpha - a.alpha < MIN_KNOT_GAP {
            out.push(Violation::DomainCoverage(format!(
                "knots {i} and {} are closer than {MIN_KNOT_GAP}",
                i + 1
            )));
        }
        if a.post > b.pre {
            out.push(Violation::Cumulation(format!(
                "segment {i} decreases from {} to {}",
                a.post, b.pre
            )));
        }
        if a.post.is_finite() && b.pre.is_infinite() {
            out.push(Violation::RightContinuity(format!(
                "segment {i} interpolates from a finite value to +inf; use a jump"
            )));
        }
    }
    ValidationReport { violations: out }
}

/// A right-continuous, non-decreasing, piecewise-linear function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KnotList", into = "KnotList")]
pub struct CumulativeFunction {
    knots: Vec<Knot>,
}

/// Wire form: `{"knots":[{"alpha":0.0,"pre":0.0,"post":0.0}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotList {
    pub knots: Vec<Knot>,
}

impl TryFrom<KnotList> for CumulativeFunction {
    type Error = Error;
    fn try_from(list: KnotList) -> Result<Self> {
        CumulativeFunction::leakage(list.knots)
    }
}

impl From<CumulativeFunction> for KnotList {
    fn from(f: CumulativeFunction) -> Self {
        KnotList { knots: f.knots }
    }
}

impl CumulativeFunction {
    /// Builds a fully regular function (zero initial value, unless `+inf`).
    pub fn new(knots: Vec<Knot>) -> Result<Self> {
        let report = validate_regular(&knots);
        if !report.is_valid() {
            return Err(Error::InvalidFunction(report.violations));
        }
        Ok(CumulativeFunction { knots })
    }

    /// Builds a leakage function. Identical to [`new`](Self::new) except that
    /// a positive initial allowance is accepted.
    pub fn leakage(knots: Vec<Knot>) -> Result<Self> {
        let report = validate_regular(&knots);
        let violations: Vec<_> = report
            .violations
            .into_iter()
            .filter(|v| !matches!(v, Violation::ZeroInitialValue(_)))
            .collect();
        if !violations.is_empty() {
            return Err(Error::InvalidFunction(violations));
        }
        Ok(CumulativeFunction { knots })
    }

    /// Continuous interpolant through `(alpha, value)` points.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(points.iter().map(|&(a, v)| Knot::flat(a, v)).collect())
    }

    /// `alpha -> slope * alpha`.
    pub fn line(slope: f64) -> Self {
        Self::from_points(&[(0.0, 0.0), (1.0, slope)]).expect("non-negative slope")
    }

    /// Zero before `at`, `height` from `at` on.
    pub fn step(at: f64, height: f64) -> Result<Self> {
        if at <= 0.0 {
            return Err(Error::InvalidArgument("step position must be positive".into()));
        }
        if at >= 1.0 {
            return Self::new(vec![Knot::flat(0.0, 0.0), Knot::new(1.0, 0.0, height)]);
        }
        Self::new(vec![
            Knot::flat(0.0, 0.0),
            Knot::new(at, 0.0, height),
            Knot::flat(1.0, height),
        ])
    }

    /// Constant `value` on the whole domain; `f64::INFINITY` means no constraint.
    pub fn constant(value: f64) -> Result<Self> {
        Self::leakage(vec![Knot::flat(0.0, value), Knot::flat(1.0, value)])
    }

    pub fn unconstrained() -> Self {
        Self::constant(f64::INFINITY).expect("constant +inf is regular")
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    /// `F(1)`.
    pub fn final_value(&self) -> f64 {
        self.knots[self.knots.len() - 1].post
    }

    pub fn initial_value(&self) -> f64 {
        self.knots[0].post
    }

    pub fn is_finite(&self) -> bool {
        self.knots.iter().all(|k| k.pre.is_finite() && k.post.is_finite())
    }

    pub fn is_unconstrained(&self) -> bool {
        self.knots.iter().all(|k| k.post == f64::INFINITY)
    }

    /// Finite and zero at the origin, as required of a rate function.
    pub fn ensure_rate(&self, role: &'static str) -> Result<()> {
        if self.is_finite() && self.initial_value() == 0.0 {
            Ok(())
        } else {
            Err(Error::NotARateFunction { role })
        }
    }

    pub fn evaluate(&self, alpha: f64, side: Side) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::AlphaOutOfDomain(alpha));
        }
        match side {
            Side::Right => Ok(self.value(alpha)),
            Side::Left if alpha <= MIN_KNOT_GAP => Err(Error::LeftLimitAtZero),
            Side::Left => Ok(self.left_limit(alpha)),
        }
    }

    /// Right-continuous value. `alpha` is clamped into `[0, 1]`.
    pub fn value(&self, alpha: f64) -> f64 {
        match self.locate(alpha) {
            Location::Knot(i) => self.knots[i].post,
            Location::Segment(i, t) => self.interpolate(i, t),
        }
    }

    /// `lim F(beta)` as `beta` increases to `alpha`. At 0 this is `F(0)`.
    pub fn left_limit(&self, alpha: f64) -> f64 {
        match self.locate(alpha) {
            Location::Knot(0) => self.knots[0].post,
            Location::Knot(i) => self.knots[i].pre,
            Location::Segment(i, t) => self.interpolate(i, t),
        }
    }

    fn interpolate(&self, i: usize, t: f64) -> f64 {
        let a = self.knots[i].post;
        let b = self.knots[i + 1].pre;
        if a == b {
            a
        } else {
            a + (b - a) * t
        }
    }

    fn locate(&self, alpha: f64) -> Location {
        let alpha = alpha.clamp(0.0, 1.0);
        let idx = self.knots.partition_point(|k| k.alpha < alpha);
        if idx < self.knots.len() && (self.knots[idx].alpha - alpha).abs() <= MIN_KNOT_GAP {
            return Location::Knot(idx);
        }
        if idx > 0 && (alpha - self.knots[idx - 1].alpha).abs() <= MIN_KNOT_GAP {
            return Location::Knot(idx - 1);
        }
        let (a, b) = (self.knots[idx - 1], self.knots[idx]);
        Location::Segment(idx - 1, (alpha - a.alpha) / (b.alpha - a.alpha))
    }

    /// Every one-sided value at which a piecewise-linear comparison against
    /// this function can attain an extremum: right values at all knots and
    /// left limits at all knots except the origin.
    pub fn sides(&self) -> impl Iterator<Item = (f64, Side, f64)> + '_ {
        self.knots.iter().enumerate().flat_map(|(i, k)| {
            let left = (i > 0).then_some((k.alpha, Side::Left, k.pre));
            left.into_iter().chain(std::iter::once((k.alpha, Side::Right, k.post)))
        })
    }

    /// `alpha -> max{0, F(alpha) - c}`.
    pub fn clip_shift(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::NegativeShift(c));
        }
        if c == 0.0 {
            return Ok(self.clone());
        }
        let shift = |v: f64| (v - c).max(0.0);
        let mut knots = Vec::with_capacity(self.knots.len() + 2);
        for (i, k) in self.knots.iter().enumerate() {
            knots.push(Knot::new(k.alpha, shift(k.pre), shift(k.post)));
            if let Some(next) = self.knots.get(i + 1) {
                let (lo, hi) = (k.post, next.pre);
                if lo < c && c < hi && hi.is_finite() {
                    let cross = k.alpha + (c - lo) / (hi - lo) * (next.alpha - k.alpha);
                    if cross - k.alpha > MIN_KNOT_GAP && next.alpha - cross > MIN_KNOT_GAP {
                        knots.push(Knot::flat(cross, 0.0));
                    }
                }
            }
        }
        Ok(CumulativeFunction { knots }.simplified())
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let alphas = merged_alphas(&[self, other]);
        let mut knots = Vec::with_capacity(alphas.len());
        for (i, &a) in alphas.iter().enumerate() {
            let post = self.value(a) + other.value(a);
            let pre = if i == 0 {
                self.knots[0].pre + other.knots[0].pre
            } else {
                self.left_limit(a) + other.left_limit(a)
            };
            if pre.is_nan() || post.is_nan() {
                return Err(Error::IndeterminateInfinity("pointwise sum"));
            }
            knots.push(Knot::new(a, pre, post));
        }
        Self::leakage(knots).map(|f| f.simplified())
    }

    /// Removes interior knots that carry no jump and no change of slope.
    pub fn simplified(mut self) -> Self {
        let mut out: Vec<Knot> = Vec::with_capacity(self.knots.len());
        for (i, k) in self.knots.iter().enumerate() {
            let redundant = i > 0
                && i + 1 < self.knots.len()
                && k.pre == k.post
                && {
                    let prev = out[out.len() - 1];
                    let next = self.knots[i + 1];
                    collinear(prev, *k, next)
                };
            if !redundant {
                out.push(*k);
            }
        }
        self.knots = out;
        self
    }

    pub fn sample_grid(&self, k: usize) -> Result<StepFunction> {
        if k == 0 {
            return Err(Error::ZeroBlocks);
        }
        let levels = (0..=k).map(|j| self.value(j as f64 / k as f64)).collect();
        Ok(StepFunction { levels })
    }

    /// Compares both one-sided values at the union of knots.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        merged_alphas(&[self, other]).into_iter().all(|a| {
            let close = |x: f64, y: f64| x == y || (x - y).abs() <= tol;
            close(self.value(a), other.value(a))
                && (a == 0.0 || close(self.left_limit(a), other.left_limit(a)))
        })
    }
}

fn collinear(a: Knot, b: Knot, c: Knot) -> bool {
    if a.post.is_infinite() || c.pre.is_infinite() || b.post.is_infinite() {
        return a.post == b.post && b.post == c.pre;
    }
    let left = (b.pre - a.post) / (b.alpha - a.alpha);
    let right = (c.pre - b.post) / (c.alpha - b.alpha);
    (left - right).abs() <= 1e-12 * (1.0 + left.abs().max(right.abs()))
}

enum Location {
    Knot(usize),
    Segment(usize, f64),
}

/// Sorted union of knot abscissae, merging those within [`MIN_KNOT_GAP`].
pub fn merged_alphas(fs: &[&CumulativeFunction]) -> Vec<f64> {
    let mut all: Vec<f64> = fs.iter().flat_map(|f| f.knots.iter().map(|k| k.alpha)).collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    all.dedup_by(|b, a| (*b - *a).abs() <= MIN_KNOT_GAP);
    all
}

pub fn clip_shift(f: &CumulativeFunction, c: f64) -> Result<CumulativeFunction> {
    f.clip_shift(c)
}

pub fn sample_grid(f: &CumulativeFunction, k: usize) -> Result<StepFunction> {
    f.sample_grid(k)
}

/// How the withheld rate is determined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Withhold `sup (G - L)`.
    Lossy,
    /// Withhold `G(1) - H(X)`.
    Lossless { entropy: f64 },
}

/// Supremum of `G - L` and the smallest abscissa where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Supremum {
    pub value: f64,
    pub alpha: f64,
    pub side: Side,
}

/// `sup_beta (G(beta) - L(beta))`, evaluated exactly over both one-sided
/// values at the union of knots. `-inf` when `L` is unconstrained everywhere.
pub fn rate_leakage_gap(g: &CumulativeFunction, l: &CumulativeFunction) -> Result<Supremum> {
    g.ensure_rate("rate function")?;
    let mut best = Supremum { value: f64::NEG_INFINITY, alpha: 0.0, side: Side::Right };
    for (i, a) in merged_alphas(&[g, l]).into_iter().enumerate() {
        let mut candidates = vec![(Side::Right, g.value(a) - l.value(a))];
        if i > 0 {
            candidates.insert(0, (Side::Left, g.left_limit(a) - l.left_limit(a)));
        }
        for (side, d) in candidates {
            if d > best.value {
                best = Supremum { value: d, alpha: a, side };
            }
        }
    }
    Ok(best)
}

/// The portion of `G` usable without exceeding the leakage budget `L`
/// (lossy mode) or without exceeding the source entropy (lossless mode).
pub fn effective_crdf(
    g: &CumulativeFunction,
    l: &CumulativeFunction,
    mode: Mode,
) -> Result<CumulativeFunction> {
    g.ensure_rate("rate function")?;
    let c = match mode {
        Mode::Lossy => rate_leakage_gap(g, l)?.value.max(0.0),
        Mode::Lossless { entropy } => {
            if !(entropy >= 0.0) || !entropy.is_finite() {
                return Err(Error::InvalidArgument(format!("entropy {entropy}")));
            }
            (g.final_value() - entropy).max(0.0)
        }
    };
    g.clip_shift(c)
}

/// Levels of `F` on the grid `j / k`; the function is `levels[floor(alpha k)]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    levels: Vec<f64>,
}

impl StepFunction {
    pub fn blocks(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn value(&self, alpha: f64) -> f64 {
        let k = self.blocks();
        let j = ((alpha.clamp(0.0, 1.0) * k as f64).floor() as usize).min(k);
        self.levels[j]
    }

    /// Per-block increments `levels[j] - levels[j - 1]`.
    pub fn increments(&self) -> Vec<f64> {
        self.levels.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Serde adapter for numbers that may be `+inf`, written as the string `"inf"`.
pub mod extended {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = f64;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "inf" => Ok(f64::INFINITY),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

//! Sources, distortion measures, and distortion-rate curves.
//!
//! Curves come either from a closed form (linear `R(D) = c - D`, which covers
//! erasure and log-loss distortion, and the binary Hamming curve) or from a
//! Blahut–Arimoto sweep over a finite distortion matrix.

use serde::{Deserialize, Serialize};

use crate::cumfn::extended;
use crate::error::{Error, Result};

const PMF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfWire", into = "PmfWire")]
pub struct SourceModel {
    pmf: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmfWire {
    pub pmf: Vec<f64>,
}

impl TryFrom<PmfWire> for SourceModel {
    type Error = Error;
    fn try_from(w: PmfWire) -> Result<Self> {
        SourceModel::new(w.pmf)
    }
}

impl From<SourceModel> for PmfWire {
    fn from(s: SourceModel) -> Self {
        PmfWire { pmf: s.pmf }
    }
}

impl SourceModel {
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidPmf("empty alphabet".into()));
        }
        if let Some(p) = pmf.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidPmf(format!("entry {p} is not a probability")));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > PMF_TOL {
            return Err(Error::InvalidPmf(format!("entries sum to {total}")));
        }
        Ok(SourceModel { pmf })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPmf("empty alphabet".into()));
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn alphabet_size(&self) -> usize {
        self.pmf.len()
    }

    /// `H(X)` in bits, with `0 log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self
            .pmf
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>()
    }

    fn is_uniform_binary(&self) -> bool {
        self.pmf.len() == 2 && (self.pmf[0] - 0.5).abs() <= PMF_TOL
    }
}

pub fn entropy(source: &SourceModel) -> f64 {
    source.entropy()
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// `d(x, x_hat)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistortionSpec {
    Hamming,
    /// Binary source, reconstruction in `{0, 1, e}`: wrong symbol costs
    /// infinity, erasure costs 1.
    Erasure,
    /// Reconstruction is a pmf; only available in closed form.
    LogLoss,
    Matrix {
        #[serde(with = "matrix_wire")]
        values: Vec<Vec<f64>>,
    },
}

impl DistortionSpec {
    /// The distortion matrix over `X x X_hat`, checked against the source.
    pub fn matrix(&self, source: &SourceModel) -> Result<Vec<Vec<f64>>> {
        let n = source.alphabet_size();
        let m = match self {
            DistortionSpec::Hamming => (0..n)
                .map(|x| (0..n).map(|y| if x == y { 0.0 } else { 1.0 }).collect())
                .collect(),
            DistortionSpec::Erasure => {
                if n != 2 {
                    return Err(Error::InvalidDistortion(
                        "erasure distortion needs a binary source".into(),
                    ));
                }
                let inf = f64::INFINITY;
                vec![vec![0.0, inf, 1.0], vec![inf, 0.0, 1.0]]
            }
            DistortionSpec::LogLoss => {
                return Err(Error::InvalidDistortion(
                    "log-loss has no finite distortion matrix; use its closed form".into(),
                ))
            }
            DistortionSpec::Matrix { values } => values.clone(),
        };
        check_matrix(&m, source)?;
        Ok(m)
    }
}

fn check_matrix(m: &[Vec<f64>], source: &SourceModel) -> Result<()> {
    if m.len() != source.alphabet_size() {
        return Err(Error::InvalidDistortion(format!(
            "{} rows for an alphabet of {}",
            m.len(),
            source.alphabet_size()
        )));
    }
    let cols = m.first().map_or(0, Vec::len);
    if cols == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidDistortion("rows must be non-empty and equally long".into()));
    }
    for (x, row) in m.iter().enumerate() {
        if row.iter().any(|d| d.is_nan() || *d < 0.0) {
            return Err(Error::InvalidDistortion(format!("row {x} has a negative or NaN entry")));
        }
        if row.iter().all(|d| d.is_infinite()) {
            return Err(Error::InvalidDistortion(format!("row {x} has no finite entry")));
        }
    }
    if zero_rate_distortion(m, source).is_infinite() {
        return Err(Error::UnboundedDistortion);
    }
    Ok(())
}

/// `min_{x_hat} E[d(X, x_hat)]`, the distortion reachable at zero rate.
fn zero_rate_distortion(m: &[Vec<f64>], source: &SourceModel) -> f64 {
    let cols = m[0].len();
    (0..cols)
        .map(|y| {
            source
                .pmf()
                .iter()
                .zip(m)
                .filter(|(p, _)| **p > 0.0)
                .map(|(p, row)| p * row[y])
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// `E[min_{x_hat} d(X, x_hat)]`, the smallest distortion at any rate.
fn floor_distortion(m: &[Vec<f64>], source: &SourceModel) -> f64 {
    source
        .pmf()
        .iter()
        .zip(m)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, row)| p * row.iter().copied().fold(f64::INFINITY, f64::min))
        .sum()
}

mod matrix_wire {
    use super::extended;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry(#[serde(with = "extended")] f64);

    pub fn serialize<S: Serializer>(m: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let wire: Vec<Vec<Entry>> =
            m.iter().map(|r| r.iter().map(|&v| Entry(v)).collect()).collect();
        wire.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let wire: Vec<Vec<Entry>> = Vec::deserialize(d)?;
        Ok(wire.into_iter().map(|r| r.into_iter().map(|e| e.0).collect()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedForm {
    Erasure,
    LogLoss,
    HammingBinary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum CurveForm {
    /// `R(D) = max{0, c - D}`.
    AnalyticLinear { c: f64 },
    /// `R(D) = h(p) - h(D)` for `D <= p`, where `p <= 1/2` is the minority mass.
    AnalyticHammingBinary { p: f64 },
    /// Convex, non-increasing `(R, D)` table starting at `R = 0`.
    Sampled { points: Vec<(f64, f64)> },
}

/// A distortion-rate relation `D(R)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdCurve {
    form: CurveForm,
    d_max: f64,
}

impl RdCurve {
    pub fn linear(c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("linear curve needs finite c >= 0, got {c}")));
        }
        Ok(RdCurve { form: CurveForm::AnalyticLinear { c }, d_max: c })
    }

    pub fn hamming_binary(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("bernoulli parameter {p}")));
        }
        let p = p.min(1.0 - p);
        Ok(RdCurve { form: CurveForm::AnalyticHammingBinary { p }, d_max: p })
    }

    /// A tabulated curve. Points must start at `R = 0`, have strictly
    /// increasing rates, and be non-increasing and convex in `D`.
    pub fn sampled(points: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("sampled curve: {msg}")));
        if points.is_empty() {
            return bad("no points");
        }
        if points[0].0 != 0.0 {
            return bad("first point must have R = 0");
        }
        if points.iter().any(|&(r, d)| !(r.is_finite() && d.is_finite() && d >= 0.0)) {
            return bad("rates and distortions must be finite, distortions non-negative");
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return bad("rates must increase strictly");
            }
            if w[1].1 > w[0].1 + 1e-12 {
                return bad("distortion must be non-increasing");
            }
        }
        for w in points.windows(3) {
            let chord = w[0].1 + (w[2].1 - w[0].1) * (w[1].0 - w[0].0) / (w[2].0 - w[0].0);
            if w[1].1 > chord + 1e-9 {
                return bad("distortion must be convex in rate");
            }
        }
        let d_max = points[0].1;
        Ok(RdCurve { form: CurveForm::Sampled { points }, d_max })
    }

    pub fn form(&self) -> &CurveForm {
        &self.form
    }

    /// `D(0)`.
    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    /// `inf_R D(R)`.
    pub fn d_min(&self) -> f64 {
        match &self.form {
            CurveForm::AnalyticLinear { .. } | CurveForm::AnalyticHammingBinary { .. } => 0.0,
            CurveForm::Sampled { points } => points[points.len() - 1].1,
        }
    }

    pub fn distortion_at_rate(&self, rate: f64) -> Result<f64> {
        if rate.is_nan() || rate < 0.0 {
            return Err(Error::NegativeRate(rate));
        }
        Ok(self.distortion(rate))
    }

    /// `D(R)` for `R >= 0`; negative rates are treated as zero.
    pub fn distortion(&self, rate: f64) -> f64 {
        let rate = rate.max(0.0);
        match &self.form {
            CurveForm::AnalyticLinear { c } => (c - rate).max(0.0),
            CurveForm::AnalyticHammingBinary { p } => {
                let target = binary_entropy(*p) - rate;
                if target <= 0.0 {
                    0.0
                } else {
                    inverse_binary_entropy(target, *p)
                }
            }
            CurveForm::Sampled { points } => {
                let idx = points.partition_point(|&(r, _)| r <= rate);
                if idx == points.len() {
                    return points[idx - 1].1;
                }
                let (r0, d0) = points[idx - 1];
                let (r1, d1) = points[idx];
                d0 + (d1 - d0) * (rate - r0) / (r1 - r0)
            }
        }
    }
}

/// Solves `h(D) = target` for `D` in `[0, upper]` by bisection.
fn inverse_binary_entropy(target: f64, upper: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, upper.min(0.5));
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn closed_form_curve(kind: ClosedForm, source: &SourceModel) -> Result<RdCurve> {
    match kind {
        ClosedForm::Erasure if source.is_uniform_binary() => RdCurve::linear(1.0),
        ClosedForm::Erasure => Err(Error::UnsupportedClosedForm(
            "erasure closed form needs a uniform binary source".into(),
        )),
        ClosedForm::LogLoss => RdCurve::linear(source.entropy()),
        ClosedForm::HammingBinary if source.alphabet_size() == 2 => {
            RdCurve::hamming_binary(source.pmf()[0].min(source.pmf()[1]))
        }
        ClosedForm::HammingBinary => Err(Error::UnsupportedClosedForm(
            "binary Hamming closed form needs a binary source".into(),
        )),
    }
}

/// One converged point of the rate-distortion curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RdPoint {
    pub rate: f64,
    pub distortion: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Alternating minimization for a single Lagrangian slope.
#[derive(Debug, Clone)]
pub struct BlahutArimoto {
    pub max_iterations: usize,
    /// Stop once the Lagrangian value moves less than this.
    pub tolerance: f64,
    /// Reported as non-convergence if the cap is hit above this residual.
    pub acceptance: f64,
    /// Starting output marginal; uniform when `None`.
    pub initial_marginal: Option<Vec<f64>>,
}

impl Default for BlahutArimoto {
    fn default() -> Self {
        BlahutArimoto {
            max_iterations: 100_000,
            tolerance: 1e-13,
            acceptance: 1e-9,
            initial_marginal: None,
        }
    }
}

impl BlahutArimoto {
    /// Runs to convergence at slope `s <= 0` (bits per unit distortion).
    /// Transitions with infinite distortion get no conditional mass.
    pub fn run(&self, source: &SourceModel, matrix: &[Vec<f64>], s: f64) -> Result<RdPoint> {
        if !(s <= 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!("slope must be finite and <= 0, got {s}")));
        }
        check_matrix(matrix, source)?;
        let cols = matrix[0].len();
        let pmf = source.pmf();

        let mut q = match &self.initial_marginal {
            Some(q) if q.len() == cols && q.iter().all(|v| *v >= 0.0) => {
                let total: f64 = q.iter().sum();
                q.iter().map(|v| v / total).collect()
            }
            Some(q) => {
                return Err(Error::InvalidArgument(format!(
                    "initial marginal of length {} for {cols} reconstruction letters",
                    q.len()
                )))
            }
            None => vec![1.0 / cols as f64; cols],
        };

        // Row-shifted weights 2^{s (d - d_min(x))}; zero where d is infinite.
        let row_min: Vec<f64> =
            matrix.iter().map(|r| r.iter().copied().fold(f64::INFINITY, f64::min)).collect();
        let weights: Vec<Vec<f64>> = matrix
            .iter()
            .zip(&row_min)
            .map(|(row, &m)| {
                row.iter()
                    .map(|&d| if d.is_infinite() { 0.0 } else { (s * (d - m)).exp2() })
                    .collect()
            })
            .collect();

        let mut cond = vec![vec![0.0; cols]; pmf.len()];
        let mut previous = f64::INFINITY;
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        while iterations < self.max_iterations {
            iterations += 1;
            let mut value = 0.0;
            for (x, &p) in pmf.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let z: f64 = q.iter().zip(&weights[x]).map(|(a, w)| a * w).sum();
                if !(z > 0.0) {
                    return Err(Error::InvalidDistortion(format!(
                        "no reconstruction with finite distortion keeps mass for symbol {x}"
                    )));
                }
                for y in 0..cols {
                    cond[x][y] = q[y] * weights[x][y] / z;
                }
                value += p * (s * row_min[x] - z.log2());
            }
            let mut next = vec![0.0; cols];
            for (x, &p) in pmf.iter().enumerate() {
                for y in 0..cols {
                    next[y] += p * cond[x][y];
                }
            }
            q = next;
            residual = (previous - value).abs();
            previous = value;
            if residual <= self.tolerance {
                break;
            }
        }
        if residual > self.tolerance && residual > self.acceptance {
            return Err(Error::NonConvergence { iterations, residual });
        }

        let (mut rate, mut distortion) = (0.0, 0.0);
        for (x, &p) in pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for y in 0..cols {
                let c = cond[x][y];
                if c > 0.0 && q[y] > 0.0 {
                    rate += p * c * (c / q[y]).log2();
                    distortion += p * c * matrix[x][y];
                }
            }
        }
        Ok(RdPoint { rate: rate.max(0.0), distortion, iterations, residual })
    }
}

pub fn blahut_arimoto_point(
    source: &SourceModel,
    spec: &DistortionSpec,
    slope: f64,
) -> Result<RdPoint> {
    BlahutArimoto::default().run(source, &spec.matrix(source)?, slope)
}

/// Tabulates `D(R)` from `n_points` Blahut–Arimoto runs plus the zero-rate
/// point, keeping only the lower convex hull of the results.
pub fn build_rd_curve(
    source: &SourceModel,
    spec: &DistortionSpec,
    n_points: usize,
) -> Result<RdCurve> {
    if n_points < 2 {
        return Err(Error::InvalidArgument("a curve needs at least 2 slope points".into()));
    }
    let matrix = spec.matrix(source)?;
    let d_max = zero_rate_distortion(&matrix, source);
    let d_floor = floor_distortion(&matrix, source);
    if d_max - d_floor <= 1e-12 {
        return RdCurve::sampled(vec![(0.0, d_max)]);
    }

    // Slopes are in bits per distortion unit, so scale by the typical gap.
    let scale = d_max - d_floor;
    let (lo, hi) = (0.01 / scale, 40.0 / scale);
    let mut slopes: Vec<f64> = (0..n_points - 1)
        .map(|i| -lo * (hi / lo).powf(i as f64 / (n_points - 2).max(1) as f64))
        .collect();
    slopes.push(-64.0 / scale);

    let ba = BlahutArimoto::default();
    let mut points = vec![(0.0, d_max)];
    for s in slopes {
        let p = ba.run(source, &matrix, s)?;
        points.push((p.rate, p.distortion.min(d_max)));
    }
    RdCurve::sampled(lower_hull(points))
}

/// Lower convex hull of `(R, D)` points, cut at the first minimum of `D`.
fn lower_hull(mut points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    points.dedup_by(|later, kept| later.0 - kept.0 <= 1e-12);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in points {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    if let Some(cut) = hull
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
    {
        hull.truncate(cut + 1);
    }
    hull
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming_slope_for(d: f64) -> f64 {
        (d / (1.0 - d)).log2()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(SourceModel::uniform(2).unwrap().entropy(), 1.0);
        assert_eq!(SourceModel::uniform(4).unwrap().entropy(), 2.0);
        // Oracle through natural logs.
        let p = [0.11_f64, 0.89];
        let oracle = -(p[0] * p[0].ln() + p[1] * p[1].ln()) / std::f64::consts::LN_2;
        let h = SourceModel::new(p.to_vec()).unwrap().entropy();
        assert!((h - oracle).abs() < 1e-15);
        assert!((h - 0.499_915).abs() < 1e-6);
        assert_eq!(SourceModel::new(vec![1.0, 0.0]).unwrap().entropy(), 0.0);
    }

    #[test]
    fn invalid_pmfs() {
        assert!(SourceModel::new(vec![]).is_err());
        assert!(SourceModel::new(vec![0.5, 0.6]).is_err());
        assert!(SourceModel::new(vec![-0.5, 1.5]).is_err());
        assert!(SourceModel::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn closed_forms() {
        let u2 = SourceModel::uniform(2).unwrap();
        let erasure = closed_form_curve(ClosedForm::Erasure, &u2).unwrap();
        assert_eq!(erasure.form(), &CurveForm::AnalyticLinear { c: 1.0 });
        assert!((erasure.distortion(0.6) - 0.4).abs() < 1e-15);
        assert_eq!(erasure.distortion(2.0), 0.0);
        assert_eq!(erasure.distortion(0.0), 1.0);
        assert_eq!(erasure.distortion_at_rate(-0.1), Err(Error::NegativeRate(-0.1)));

        let u4 = SourceModel::uniform(4).unwrap();
        let ll = closed_form_curve(ClosedForm::LogLoss, &u4).unwrap();
        assert_eq!(ll.form(), &CurveForm::AnalyticLinear { c: 2.0 });

        let hb = closed_form_curve(ClosedForm::HammingBinary, &u2).unwrap();
        let r = 1.0 - binary_entropy(0.25);
        assert!((r - 0.188_722).abs() < 1e-6);
        assert!((hb.distortion(r) - 0.25).abs() < 1e-10);
        assert_eq!(hb.distortion(1.0), 0.0);
        assert_eq!(hb.d_max(), 0.5);

        let skewed = SourceModel::new(vec![0.3, 0.7]).unwrap();
        assert!(closed_form_curve(ClosedForm::Erasure, &skewed).is_err());
        assert!(closed_form_curve(ClosedForm::HammingBinary, &u4).is_err());
        assert_eq!(closed_form_curve(ClosedForm::HammingBinary, &skewed).unwrap().d_max(), 0.3);
    }

    #[test]
    fn ba_hamming_matches_closed_form() {
        let u2 = SourceModel::uniform(2).unwrap();
        let p = blahut_arimoto_point(&u2, &DistortionSpec::Hamming, hamming_slope_for(0.25)).unwrap();
        assert!((p.distortion - 0.25).abs() < 1e-9);
        assert!((p.rate - (1.0 - binary_entropy(0.25))).abs() < 1e-4);
        assert!(p.residual <= 1e-9);
    }

    #[test]
    fn ba_lossless_limit() {
        let u2 = SourceModel::uniform(2).unwrap();
        let p = blahut_arimoto_point(&u2, &DistortionSpec::Hamming, -60.0).unwrap();
        assert!((p.rate - 1.0).abs() < 1e-9);
        assert!(p.distortion < 1e-9);
    }

    #[test]
    fn ba_erasure_points_on_line() {
        let u2 = SourceModel::uniform(2).unwrap();
        for s in [-3.0, -1.0, -0.5] {
            let p = blahut_arimoto_point(&u2, &DistortionSpec::Erasure, s).unwrap();
            assert!((p.rate - (1.0 - p.distortion)).abs() < 1e-4, "s={s}: {p:?}");
        }
        // The whole segment has slope -1; the starting marginal selects the point.
        let ba = BlahutArimoto { initial_marginal: Some(vec![0.25, 0.25, 0.5]), ..Default::default() };
        let m = DistortionSpec::Erasure.matrix(&u2).unwrap();
        let p = ba.run(&u2, &m, -1.0).unwrap();
        assert!((p.distortion - 0.5).abs() < 1e-9);
        assert!((p.rate - 0.5).abs() < 1e-4);
    }

    #[test]
    fn ba_rejects_bad_input() {
        let u2 = SourceModel::uniform(2).unwrap();
        let all_inf = DistortionSpec::Matrix { values: vec![vec![f64::INFINITY; 2], vec![0.0, 1.0]] };
        assert!(blahut_arimoto_point(&u2, &all_inf, -1.0).is_err());
        assert!(blahut_arimoto_point(&u2, &DistortionSpec::Hamming, 0.5).is_err());
        assert!(blahut_arimoto_point(&u2, &DistortionSpec::LogLoss, -1.0).is_err());
        let unbounded = DistortionSpec::Matrix {
            values: vec![vec![0.0, f64::INFINITY], vec![f64::INFINITY, 0.0]],
        };
        assert_eq!(build_rd_curve(&u2, &unbounded, 8), Err(Error::UnboundedDistortion));
        let capped = BlahutArimoto { max_iterations: 1, tolerance: 0.0, acceptance: 0.0, ..Default::default() };
        let m = DistortionSpec::Hamming.matrix(&SourceModel::new(vec![0.2, 0.8]).unwrap()).unwrap();
        assert!(matches!(
            capped.run(&SourceModel::new(vec![0.2, 0.8]).unwrap(), &m, -2.0),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn built_hamming_curve() {
        let u2 = SourceModel::uniform(2).unwrap();
        let curve = build_rd_curve(&u2, &DistortionSpec::Hamming, 33).unwrap();
        let CurveForm::Sampled { points } = curve.form() else { panic!() };
        assert_eq!(points[0], (0.0, 0.5));
        let last = points[points.len() - 1];
        assert!((last.0 - 1.0).abs() < 1e-6 && last.1 < 1e-6, "{last:?}");
        assert!(curve.distortion(2.0) <= 1e-6);
        for &(r, d) in points {
            assert!((r - (1.0 - binary_entropy(d))).abs() < 1e-4);
        }
    }

    #[test]
    fn built_erasure_curve_is_the_line() {
        let u2 = SourceModel::uniform(2).unwrap();
        let curve = build_rd_curve(&u2, &DistortionSpec::Erasure, 17).unwrap();
        for i in 0..=20 {
            let r = i as f64 / 20.0;
            assert!((curve.distortion(r) - (1.0 - r)).abs() < 1e-4);
        }
    }

    #[test]
    fn degenerate_source_curve() {
        let one = SourceModel::new(vec![1.0]).unwrap();
        let curve = build_rd_curve(&one, &DistortionSpec::Hamming, 8).unwrap();
        assert_eq!(curve.form(), &CurveForm::Sampled { points: vec![(0.0, 0.0)] });
        assert_eq!(curve.distortion(3.0), 0.0);
    }

    #[test]
    fn sampled_curve_validation() {
        assert!(RdCurve::sampled(vec![(0.0, 1.0), (1.0, 0.0)]).is_ok());
        assert!(RdCurve::sampled(vec![(0.1, 1.0)]).is_err());
        assert!(RdCurve::sampled(vec![(0.0, 1.0), (1.0, 1.5)]).is_err());
        assert!(RdCurve::sampled(vec![(0.0, 1.0), (0.5, 0.9), (1.0, 0.0)]).is_err());
        let c = RdCurve::sampled(vec![(0.0, 1.0), (0.5, 0.25), (1.0, 0.0)]).unwrap();
        assert!((c.distortion(0.25) - 0.625).abs() < 1e-15);
        assert_eq!(c.distortion(5.0), 0.0);
        assert_eq!(c.d_min(), 0.0);
    }

    #[test]
    fn distortion_json() {
        let spec: DistortionSpec =
            serde_json::from_str(r#"{"kind":"matrix","values":[[0,"inf",1],["inf",0,1]]}"#).unwrap();
        let u2 = SourceModel::uniform(2).unwrap();
        assert_eq!(spec.matrix(&u2).unwrap(), DistortionSpec::Erasure.matrix(&u2).unwrap());
        let h: DistortionSpec = serde_json::from_str(r#"{"kind":"hamming"}"#).unwrap();
        assert_eq!(h, DistortionSpec::Hamming);
        let s: SourceModel = serde_json::from_str(r#"{"pmf":[0.25,0.75]}"#).unwrap();
        assert_eq!(s.pmf(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<SourceModel>(r#"{"pmf":[0.5,0.6]}"#).is_err());
    }
}

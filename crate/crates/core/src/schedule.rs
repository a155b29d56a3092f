//! Per-block rate profiles, majorization, and causal transmission plans.
//!
//! When one profile majorizes another, the descriptions produced at the first
//! profile's rates can be cut into chunks and sent later, so that what leaves
//! the encoder in each time slot follows the second profile.
//! [`split_rates`] computes the chunk sizes.

use serde::Serialize;

use crate::cumfn::{effective_crdf, CumulativeFunction, Mode};
use crate::envelope::{concave_envelope, segment_slopes, ConcaveEnvelope};
use crate::error::{Error, Result};
use crate::ratedist::RdCurve;

/// Prefix sums may trail by this much and totals may differ by this much.
pub const MAJORIZATION_TOL: f64 = 1e-12;

/// Non-negative rate per block, in bits per source symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RateProfile(Vec<f64>);

impl RateProfile {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::ZeroBlocks);
        }
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::NegativeRate(*r));
        }
        Ok(RateProfile(rates))
    }

    pub fn rates(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn prefix_sums(&self) -> Vec<f64> {
        self.0
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect()
    }
}

/// Increments of `G` on the grid `i / k`.
pub fn rate_profile(g: &CumulativeFunction, k: usize) -> Result<RateProfile> {
    let levels = g.sample_grid(k)?;
    RateProfile::new(levels.increments().into_iter().map(|r| r.max(0.0)).collect())
}

/// True iff every prefix sum of `x` is at least that of `y` and the totals
/// agree.
pub fn majorizes(x: &RateProfile, y: &RateProfile) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let (px, py) = (x.prefix_sums(), y.prefix_sums());
    let prefix_ok = px.iter().zip(&py).all(|(a, b)| *a >= b - MAJORIZATION_TOL);
    let totals_ok = (px[px.len() - 1] - py[py.len() - 1]).abs() <= MAJORIZATION_TOL;
    Ok(prefix_ok && totals_ok)
}

/// Lower-triangular `R[i][j]`, `j <= i`: the part of block `j`'s description
/// sent in time slot `i` (both 0-based here).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSplitMatrix {
    k: usize,
    /// Row-major, row `i` holds `i + 1` entries.
    entries: Vec<f64>,
}

impl RateSplitMatrix {
    fn zeros(k: usize) -> Self {
        RateSplitMatrix { k, entries: vec![0.0; k * (k + 1) / 2] }
    }

    fn index(i: usize, j: usize) -> usize {
        i * (i + 1) / 2 + j
    }

    pub fn blocks(&self) -> usize {
        self.k
    }

    /// Rate of block `block`'s description carried in slot `time`; zero above
    /// the diagonal.
    pub fn get(&self, time: usize, block: usize) -> f64 {
        if block > time || time >= self.k {
            0.0
        } else {
            self.entries[Self::index(time, block)]
        }
    }

    fn set(&mut self, time: usize, block: usize, v: f64) {
        self.entries[Self::index(time, block)] = v;
    }

    /// Row sums: total rate sent in each slot.
    pub fn sent_per_slot(&self) -> Vec<f64> {
        (0..self.k).map(|i| (0..=i).map(|j| self.get(i, j)).sum()).collect()
    }

    /// Column sums: total description rate of each block.
    pub fn description_rates(&self) -> Vec<f64> {
        (0..self.k).map(|j| (j..self.k).map(|i| self.get(i, j)).sum()).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.k).map(|i| (0..=i).map(|j| self.get(i, j)).collect()).collect()
    }
}

/// Splits descriptions produced at rates `descriptions` into chunks sent
/// under the per-slot budget `available`, which it must majorize.
///
/// The construction peels off the first block: it keeps `available[0]` of
/// block 0 in slot 0, carries the remainder `descriptions[0] - available[0]`
/// into block 1 of a `k - 1` problem, and afterwards divides that merged
/// column between blocks 0 and 1 in proportion to their shares. The peeling
/// is done in a forward pass and the proportional division in a backward pass.
pub fn split_rates(descriptions: &RateProfile, available: &RateProfile) -> Result<RateSplitMatrix> {
    if !majorizes(descriptions, available)? {
        return Err(Error::NotMajorizing);
    }
    let r1 = descriptions.rates();
    let r2 = available.rates();
    let k = r1.len();

    // merged[t]: first description rate of the sub-problem on blocks t..k.
    let mut merged = vec![0.0; k];
    merged[0] = r1[0];
    for t in 1..k {
        merged[t] = r1[t] + (merged[t - 1] - r2[t - 1]).max(0.0);
    }

    // first_col[t][i]: first column of the sub-problem on blocks t..k,
    // before the level above rescales it. Stored densely per row i >= t.
    let mut out = RateSplitMatrix::zeros(k);
    let mut first_col = vec![0.0; k];
    first_col[k - 1] = r2[k - 1];
    out.set(k - 1, k - 1, r2[k - 1]);
    for t in (0..k - 1).rev() {
        let carried = (merged[t] - r2[t]).max(0.0);
        let denom = merged[t + 1];
        let (w_keep, w_next) = if denom > 0.0 {
            (carried / denom, r1[t + 1] / denom)
        } else {
            (0.0, 0.0)
        };
        // Column t + 1 of the final matrix is the rescaled first column of
        // level t + 1; column t becomes level t's first column.
        for i in t + 1..k {
            out.set(i, t + 1, w_next * first_col[i]);
        }
        first_col[t] = r2[t];
        for i in t + 1..k {
            first_col[i] *= w_keep;
        }
    }
    for i in 0..k {
        out.set(i, 0, first_col[i]);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chunk {
    pub desc_block: usize,
    pub rate: f64,
}

/// What leaves the encoder in one time slot (1-based).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotPlan {
    pub time: usize,
    pub total_rate: f64,
    pub sent: Vec<Chunk>,
}

/// Target description of one block (1-based).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockDescription {
    pub block: usize,
    pub rate: f64,
    pub predicted_distortion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmissionPlan {
    pub blocks: Vec<SlotPlan>,
    pub descriptions: Vec<BlockDescription>,
    pub predicted_avg_distortion: f64,
}

impl TransmissionPlan {
    /// Cumulative rate sent up to and including each slot.
    pub fn cumulative_sent(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .scan(0.0, |acc, b| {
                *acc += b.total_rate;
                Some(*acc)
            })
            .collect()
    }
}

/// Plans a `k`-block schedule: each block is described at the rate of the
/// concave envelope of the effective rate function, and the chunks are sent
/// within the effective per-slot budget.
pub fn transmission_plan(
    g: &CumulativeFunction,
    l: &CumulativeFunction,
    curve: &RdCurve,
    k: usize,
) -> Result<TransmissionPlan> {
    if k == 0 {
        return Err(Error::ZeroBlocks);
    }
    if !curve.d_max().is_finite() {
        return Err(Error::UnboundedDistortion);
    }
    let g_eff = effective_crdf(g, l, Mode::Lossy)?;
    let env = concave_envelope(&g_eff)?;
    let targets = segment_slopes(&env, k)?;
    let available = rate_profile(&g_eff, k)?;
    let split = split_rates(&targets, &available)?;

    let blocks = (0..k)
        .map(|i| SlotPlan {
            time: i + 1,
            total_rate: available.rates()[i],
            sent: (0..=i)
                .filter_map(|j| {
                    let r = split.get(i, j);
                    (r > 0.0).then_some(Chunk { desc_block: j + 1, rate: r })
                })
                .collect(),
        })
        .collect();

    let descriptions: Vec<BlockDescription> = (0..k)
        .map(|j| BlockDescription {
            block: j + 1,
            rate: targets.rates()[j],
            predicted_distortion: block_distortion(&env, curve, j, k),
        })
        .collect();
    let predicted_avg_distortion =
        descriptions.iter().map(|d| d.predicted_distortion).sum::<f64>() / k as f64;
    Ok(TransmissionPlan { blocks, descriptions, predicted_avg_distortion })
}

/// `k * integral of D(envelope slope)` over block `j`.
fn block_distortion(env: &ConcaveEnvelope, curve: &RdCurve, j: usize, k: usize) -> f64 {
    let (lo, hi) = (j as f64 / k as f64, (j + 1) as f64 / k as f64);
    let integral: f64 = env
        .segments()
        .iter()
        .map(|s| {
            let overlap = (s.alpha_hi.min(hi) - s.alpha_lo.max(lo)).max(0.0);
            overlap * curve.distortion(s.slope)
        })
        .sum();
    integral * k as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumfn::Knot;

    fn profile(r: &[f64]) -> RateProfile {
        RateProfile::new(r.to_vec()).unwrap()
    }

    #[test]
    fn rate_profile_examples() {
        let p = rate_profile(&CumulativeFunction::line(1.0), 4).unwrap();
        assert_eq!(p.rates(), &[0.25; 4]);
        let p = rate_profile(&CumulativeFunction::step(0.5, 1.0).unwrap(), 2).unwrap();
        assert_eq!(p.rates(), &[1.0, 0.0]);
        let p = rate_profile(&CumulativeFunction::step(1.0, 0.6).unwrap(), 2).unwrap();
        assert_eq!(p.rates(), &[0.0, 0.6]);
        assert_eq!(rate_profile(&CumulativeFunction::line(1.0), 0), Err(Error::ZeroBlocks));
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&profile(&[1.0, 0.0]), &profile(&[0.5, 0.5])).unwrap());
        assert!(!majorizes(&profile(&[0.5, 0.5]), &profile(&[1.0, 0.0])).unwrap());
        assert!(majorizes(&profile(&[0.2, 0.3, 0.5]), &profile(&[0.2, 0.3, 0.5])).unwrap());
        assert!(!majorizes(&profile(&[1.0, 0.0]), &profile(&[0.5, 0.4])).unwrap());
        assert_eq!(
            majorizes(&profile(&[1.0]), &profile(&[0.5, 0.5])),
            Err(Error::LengthMismatch(1, 2))
        );
    }

    #[test]
    fn split_hand_traces() {
        let m = split_rates(&profile(&[1.0, 0.0]), &profile(&[0.5, 0.5])).unwrap();
        assert_eq!(m.rows(), vec![vec![0.5], vec![0.5, 0.0]]);
        let m = split_rates(&profile(&[0.3, 0.3]), &profile(&[0.0, 0.6])).unwrap();
        assert_eq!(m.rows(), vec![vec![0.0], vec![0.3, 0.3]]);
    }

    #[test]
    fn split_identical_is_diagonal() {
        let r = profile(&[0.4, 0.1, 0.0, 0.7]);
        let m = split_rates(&r, &r).unwrap();
        for i in 0..4 {
            for j in 0..=i {
                assert_eq!(m.get(i, j), if i == j { r.rates()[i] } else { 0.0 });
            }
        }
    }

    #[test]
    fn split_three_blocks() {
        let d = profile(&[0.9, 0.3, 0.0]);
        let a = profile(&[0.2, 0.4, 0.6]);
        let m = split_rates(&d, &a).unwrap();
        for (x, y) in m.description_rates().iter().zip(d.rates()) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in m.sent_per_slot().iter().zip(a.rates()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(m.rows().iter().flatten().all(|v| *v >= 0.0));
    }

    #[test]
    fn split_rejects_non_majorizing() {
        assert_eq!(
            split_rates(&profile(&[0.5, 0.5]), &profile(&[1.0, 0.0])),
            Err(Error::NotMajorizing)
        );
    }

    #[test]
    fn plan_deferred_rate() {
        let g = CumulativeFunction::step(1.0, 0.6).unwrap();
        let plan = transmission_plan(&g, &CumulativeFunction::unconstrained(), &RdCurve::linear(1.0).unwrap(), 2)
            .unwrap();
        assert!(plan.blocks[0].sent.is_empty());
        assert_eq!(plan.blocks[1].total_rate, 0.6);
        let rates: Vec<_> = plan.descriptions.iter().map(|d| d.rate).collect();
        assert!((rates[0] - 0.3).abs() < 1e-15 && (rates[1] - 0.3).abs() < 1e-15);
        assert!((plan.predicted_avg_distortion - 0.4).abs() < 1e-12);
        for d in &plan.descriptions {
            assert!((d.predicted_distortion - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn plan_under_leakage() {
        let g = CumulativeFunction::step(0.5, 1.0).unwrap();
        let l = CumulativeFunction::from_points(&[(0.0, 0.0), (0.5, 0.2), (1.0, 1.0)]).unwrap();
        let plan = transmission_plan(&g, &l, &RdCurve::linear(1.0).unwrap(), 2).unwrap();
        assert_eq!(plan.blocks[0].sent.len(), 1);
        assert_eq!(plan.blocks[0].sent[0].desc_block, 1);
        assert!((plan.blocks[0].sent[0].rate - 0.2).abs() < 1e-12);
        assert!(plan.blocks[1].sent.is_empty());
        let dist: Vec<_> = plan.descriptions.iter().map(|d| d.predicted_distortion).collect();
        assert!((dist[0] - 0.6).abs() < 1e-12 && (dist[1] - 1.0).abs() < 1e-12);
        assert!((plan.predicted_avg_distortion - 0.8).abs() < 1e-12);
        for (i, sent) in plan.cumulative_sent().iter().enumerate() {
            assert!(*sent <= l.value((i + 1) as f64 / 2.0) + 1e-12);
        }
    }

    #[test]
    fn plan_diagonal_for_line() {
        let plan = transmission_plan(
            &CumulativeFunction::line(1.0),
            &CumulativeFunction::unconstrained(),
            &RdCurve::hamming_binary(0.5).unwrap(),
            4,
        )
        .unwrap();
        for (i, slot) in plan.blocks.iter().enumerate() {
            assert_eq!(slot.sent, vec![Chunk { desc_block: i + 1, rate: 0.25 }]);
        }
    }

    #[test]
    fn plan_off_grid_kink_keeps_average() {
        // Envelope kink at 1/3, off the k = 2 grid.
        let g = CumulativeFunction::new(vec![
            Knot::flat(0.0, 0.0),
            Knot::new(1.0 / 3.0, 0.0, 0.9),
            Knot::flat(1.0, 1.0),
        ])
        .unwrap();
        let curve = RdCurve::linear(1.5).unwrap();
        let plan = transmission_plan(&g, &CumulativeFunction::unconstrained(), &curve, 2).unwrap();
        let env = concave_envelope(&g).unwrap();
        let exact: f64 = env.segments().iter().map(|s| s.width() * curve.distortion(s.slope)).sum();
        assert!((plan.predicted_avg_distortion - exact).abs() < 1e-12);
    }
}

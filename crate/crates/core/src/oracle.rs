//! Brute-force cross-checks that do not go through envelopes or the
//! effective rate function.
//!
//! [`brute_force_min_distortion`] searches the operational schedule space
//! directly for small `k`. In slot `i` the encoder may use `used[i]` of the
//! available `R[i]`; everything used so far counts as leakage and must stay
//! under `L(j / k)`; a description of block `j` can only travel in slots
//! `>= j`, so the descriptions of blocks `j..k` together may not exceed what
//! is used in slots `j..k`.

use serde::Serialize;

use crate::cumfn::CumulativeFunction;
use crate::error::{Error, Result};
use crate::ratedist::RdCurve;
use crate::schedule::{majorizes, rate_profile, RateProfile};

pub const MAX_SEARCH_STATES: u128 = 100_000_000;
pub const MAX_ORACLE_BLOCKS: usize = 4;
pub const MIN_GRID_STEP: f64 = 0.01;

const FEAS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// Enumerate `used`, allocate descriptions greedily on the grid.
    #[default]
    Greedy,
    /// Enumerate descriptions too. Only for `k <= 2`.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceResult {
    pub min_distortion: f64,
    pub used: Vec<f64>,
    pub descriptions: Vec<f64>,
    pub grid_step: f64,
}

impl BruteForceResult {
    /// Re-checks every constraint of the search on the reported argmin.
    pub fn satisfies_constraints(&self, available: &[f64], leakage_caps: &[f64]) -> bool {
        let k = self.used.len();
        if available.len() != k || leakage_caps.len() != k || self.descriptions.len() != k {
            return false;
        }
        let within = self.used.iter().zip(available).all(|(u, r)| *u >= 0.0 && *u <= r + FEAS_TOL);
        let mut prefix = 0.0;
        let leak_ok = self.used.iter().zip(leakage_caps).all(|(u, cap)| {
            prefix += u;
            prefix <= cap + FEAS_TOL
        });
        let causal_ok = (0..k).all(|j| {
            let sent: f64 = self.descriptions[j..].iter().sum();
            let supply: f64 = self.used[j..].iter().sum();
            sent <= supply + FEAS_TOL
        });
        within && leak_ok && causal_ok && self.descriptions.iter().all(|r| *r >= 0.0)
    }
}

/// Operational constraints of a `k`-block instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockInstance {
    pub available: Vec<f64>,
    pub leakage_caps: Vec<f64>,
}

impl BlockInstance {
    pub fn new(g: &CumulativeFunction, l: &CumulativeFunction, k: usize) -> Result<Self> {
        g.ensure_rate("rate function")?;
        let available = rate_profile(g, k)?.rates().to_vec();
        let leakage_caps = (1..=k).map(|j| l.value(j as f64 / k as f64)).collect();
        Ok(BlockInstance { available, leakage_caps })
    }
}

pub fn brute_force_min_distortion(
    g: &CumulativeFunction,
    l: &CumulativeFunction,
    curve: &RdCurve,
    k: usize,
    grid_step: f64,
) -> Result<BruteForceResult> {
    brute_force_with_mode(g, l, curve, k, grid_step, SearchMode::Greedy)
}

pub fn brute_force_with_mode(
    g: &CumulativeFunction,
    l: &CumulativeFunction,
    curve: &RdCurve,
    k: usize,
    grid_step: f64,
    mode: SearchMode,
) -> Result<BruteForceResult> {
    if k == 0 {
        return Err(Error::ZeroBlocks);
    }
    if k > MAX_ORACLE_BLOCKS {
        return Err(Error::InvalidArgument(format!(
            "oracle supports at most {MAX_ORACLE_BLOCKS} blocks, got {k}"
        )));
    }
    if !(grid_step >= MIN_GRID_STEP) || !grid_step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "grid step must be at least {MIN_GRID_STEP}, got {grid_step}"
        )));
    }
    if mode == SearchMode::Exhaustive && k > 2 {
        return Err(Error::InvalidArgument("exhaustive search is limited to k <= 2".into()));
    }
    if !curve.d_max().is_finite() {
        return Err(Error::UnboundedDistortion);
    }
    let inst = BlockInstance::new(g, l, k)?;

    // The last slot is always filled as far as allowed, so it is not enumerated.
    let mut states: u128 = 1;
    for r in &inst.available[..k - 1] {
        states = states.saturating_mul((r / grid_step).floor() as u128 + 2);
    }
    if mode == SearchMode::Exhaustive {
        let supply: f64 = inst.available.iter().sum();
        let per = (supply / grid_step).floor() as u128 + 2;
        states = states.saturating_mul(per.saturating_pow(k as u32));
    }
    if states > MAX_SEARCH_STATES {
        return Err(Error::SearchTooLarge(states));
    }

    let search = Search { inst: &inst, curve, k, step: grid_step, mode };
    let mut best = BruteForceResult {
        min_distortion: f64::INFINITY,
        used: vec![],
        descriptions: vec![],
        grid_step,
    };
    let mut used = Vec::with_capacity(k);
    search.enumerate_used(&mut used, 0.0, &mut best);
    Ok(best)
}

struct Search<'a> {
    inst: &'a BlockInstance,
    curve: &'a RdCurve,
    k: usize,
    step: f64,
    mode: SearchMode,
}

impl Search<'_> {
    /// Largest amount slot `i` may still use given the prefix already used.
    fn headroom(&self, i: usize, prefix: f64) -> f64 {
        let cap = self.inst.leakage_caps[i..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        (cap - prefix).min(self.inst.available[i]).max(0.0)
    }

    fn enumerate_used(&self, used: &mut Vec<f64>, prefix: f64, best: &mut BruteForceResult) {
        let i = used.len();
        if i == self.k {
            let (value, descriptions) = match self.mode {
                SearchMode::Greedy => self.allocate_greedy(used),
                SearchMode::Exhaustive => self.allocate_exhaustive(used),
            };
            if value < best.min_distortion - FEAS_TOL {
                best.min_distortion = value;
                best.used = used.clone();
                best.descriptions = descriptions;
            }
            return;
        }
        let top = self.headroom(i, prefix);
        if prefix > self.inst.leakage_caps[i] + FEAS_TOL {
            return;
        }
        if i == self.k - 1 {
            used.push(top);
            self.enumerate_used(used, prefix + top, best);
            used.pop();
            return;
        }
        // Largest first, so ties keep the fullest use of early slots.
        let mut candidates = vec![top];
        let steps = (top / self.step + FEAS_TOL).floor() as usize;
        for m in (0..=steps).rev() {
            let v = m as f64 * self.step;
            if v < top - FEAS_TOL {
                candidates.push(v);
            }
        }
        for v in candidates {
            used.push(v);
            self.enumerate_used(used, prefix + v, best);
            used.pop();
        }
    }

    fn objective(&self, r: &[f64]) -> f64 {
        let k = self.k as f64;
        r.iter().map(|x| self.curve.distortion(k * x)).sum::<f64>() / k
    }

    /// Water-filling in steps of the grid: repeatedly give one step to the
    /// block with the largest per-unit distortion reduction that the suffix
    /// supply constraints still allow.
    fn allocate_greedy(&self, used: &[f64]) -> (f64, Vec<f64>) {
        let k = self.k;
        let kf = k as f64;
        let supply: Vec<f64> = (0..k).map(|j| used[j..].iter().sum()).collect();
        let mut r = vec![0.0; k];
        loop {
            let suffix: Vec<f64> = (0..k).map(|j| r[j..].iter().sum()).collect();
            let mut pick: Option<(usize, f64, f64)> = None;
            let mut slack = f64::INFINITY;
            for j in 0..k {
                slack = slack.min(supply[j] - suffix[j]);
                let inc = self.step.min(slack);
                if inc <= FEAS_TOL {
                    continue;
                }
                let now = self.curve.distortion(kf * r[j]);
                let after = self.curve.distortion(kf * (r[j] + inc));
                let gain = (now - after) / inc;
                if gain <= 1e-15 {
                    continue;
                }
                let better = match pick {
                    None => true,
                    Some((p, g, _)) => {
                        gain > g + 1e-12 || ((gain - g).abs() <= 1e-12 && r[j] < r[p] - FEAS_TOL)
                    }
                };
                if better {
                    pick = Some((j, gain, inc));
                }
            }
            match pick {
                Some((j, _, inc)) => r[j] += inc,
                None => break,
            }
        }
        (self.objective(&r), r)
    }

    fn allocate_exhaustive(&self, used: &[f64]) -> (f64, Vec<f64>) {
        let supply: f64 = used.iter().sum();
        let tail: f64 = used[self.k - 1..].iter().sum();
        let steps = (supply / self.step + FEAS_TOL).floor() as usize;
        let grid = |cap: f64| -> Vec<f64> {
            let mut v: Vec<f64> =
                (0..=steps).map(|m| m as f64 * self.step).filter(|x| *x <= cap + FEAS_TOL).collect();
            v.push(cap.max(0.0));
            v
        };
        let mut best = (f64::INFINITY, vec![0.0; self.k]);
        if self.k == 1 {
            for a in grid(supply) {
                let v = self.objective(&[a]);
                if v < best.0 {
                    best = (v, vec![a]);
                }
            }
            return best;
        }
        for last in grid(tail) {
            for first in grid(supply - last) {
                let r = [first, last];
                let v = self.objective(&r);
                if v < best.0 - FEAS_TOL {
                    best = (v, r.to_vec());
                }
            }
        }
        best
    }
}

/// Convex test functions for the majorization inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvexFn {
    Square,
    Exp,
    /// `max(0, x - c)`.
    Hinge(f64),
}

impl ConvexFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ConvexFn::Square => x * x,
            ConvexFn::Exp => x.exp(),
            ConvexFn::Hinge(c) => (x - c).max(0.0),
        }
    }
}

fn sorted_decreasing(x: &RateProfile) -> Result<RateProfile> {
    let mut v = x.rates().to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    RateProfile::new(v)
}

/// `sum f(x) >= sum f(y)` for a pair where `x` majorizes `y`. Majorization is
/// checked on the decreasing rearrangements, the classical setting in which
/// the inequality holds for every convex `f`.
pub fn majorization_property_check(x: &RateProfile, y: &RateProfile, f: ConvexFn) -> Result<bool> {
    if !majorizes(&sorted_decreasing(x)?, &sorted_decreasing(y)?)? {
        return Err(Error::NotMajorizing);
    }
    let sx: f64 = x.rates().iter().map(|v| f.eval(*v)).sum();
    let sy: f64 = y.rates().iter().map(|v| f.eval(*v)).sum();
    Ok(sx >= sy - 1e-12 * (1.0 + sy.abs()))
}

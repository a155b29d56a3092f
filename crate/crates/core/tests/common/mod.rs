#![allow(dead_code)]

use cumrate::cumfn::Knot;
use cumrate::schedule::RateProfile;
use cumrate::{CumulativeFunction, SourceModel};
use rand::Rng;

/// Random rate function with 0..=4 interior knots, linear pieces, and jumps.
pub fn random_crdf<R: Rng>(rng: &mut R) -> CumulativeFunction {
    random_knots(rng, 2.5, false)
}

/// Random leakage function: sometimes unconstrained, sometimes jumping to +inf.
pub fn random_cldf<R: Rng>(rng: &mut R) -> CumulativeFunction {
    if rng.gen_bool(0.1) {
        return CumulativeFunction::unconstrained();
    }
    let tail = rng.gen_bool(0.15);
    random_knots(rng, 2.0, tail)
}

fn random_knots<R: Rng>(rng: &mut R, scale: f64, infinite_tail: bool) -> CumulativeFunction {
    let interior = rng.gen_range(0..=4);
    let mut alphas: Vec<f64> = (0..interior).map(|_| rng.gen_range(0.02..0.98)).collect();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup_by(|b, a| *b - *a < 0.01);
    alphas.insert(0, 0.0);
    alphas.push(1.0);

    let inf_from = if infinite_tail { Some(rng.gen_range(1..alphas.len())) } else { None };
    let mut knots = vec![Knot::flat(0.0, 0.0)];
    let mut level = 0.0;
    for (i, w) in alphas.windows(2).enumerate() {
        let slope = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..scale) };
        let pre = level + slope * (w[1] - w[0]);
        let jump = if rng.gen_bool(0.35) { rng.gen_range(0.0..scale * 0.6) } else { 0.0 };
        if inf_from == Some(i + 1) {
            knots.push(Knot::new(w[1], pre, f64::INFINITY));
            if w[1] < 1.0 {
                knots.push(Knot::flat(1.0, f64::INFINITY));
            }
            return CumulativeFunction::leakage(knots).unwrap();
        }
        level = pre + jump;
        knots.push(Knot::new(w[1], pre, level));
    }
    CumulativeFunction::new(knots).unwrap()
}

pub fn random_source<R: Rng>(rng: &mut R, max_size: usize) -> SourceModel {
    let n = rng.gen_range(2..=max_size);
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.01..1.0) })
        .collect();
    if w.iter().all(|v| *v == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    let mut pmf: Vec<f64> = w.iter().map(|v| v / total).collect();
    let rest: f64 = pmf[1..].iter().sum();
    pmf[0] = 1.0 - rest;
    SourceModel::new(pmf).unwrap()
}

/// A rate/leakage pair whose knots all lie on the grid `j / k`, built so that
/// the `k`-block problem and the continuous problem coincide: either both
/// functions are steps jumping at grid points, or `L` is continuous.
pub fn random_grid_instance<R: Rng>(rng: &mut R, k: usize) -> (CumulativeFunction, CumulativeFunction) {
    let g_levels = random_levels(rng, k, 1.6, 0.25);
    let l_levels = random_levels(rng, k, 1.4, 0.2);
    let g_step = rng.gen_bool(0.5);
    let l_step = g_step && rng.gen_bool(0.5);
    let g = grid_function(&g_levels, g_step);
    let l = if rng.gen_bool(0.1) { CumulativeFunction::unconstrained() } else { grid_function(&l_levels, l_step) };
    (g, l)
}

fn random_levels<R: Rng>(rng: &mut R, k: usize, max_inc: f64, zero_prob: f64) -> Vec<f64> {
    let mut levels = vec![0.0];
    for _ in 0..k {
        let inc = if rng.gen_bool(zero_prob) { 0.0 } else { rng.gen_range(0.0..max_inc) };
        let next = levels[levels.len() - 1] + inc;
        levels.push(next);
    }
    levels
}

fn grid_function(levels: &[f64], step: bool) -> CumulativeFunction {
    let k = levels.len() - 1;
    let knots = (0..=k)
        .map(|j| {
            let a = j as f64 / k as f64;
            if step && j > 0 {
                Knot::new(a, levels[j - 1], levels[j])
            } else {
                Knot::flat(a, levels[j])
            }
        })
        .collect();
    CumulativeFunction::new(knots).unwrap()
}

/// `(x, y)` with `x` majorizing `y` in time order: `y` is `x` with mass moved
/// from earlier blocks to later ones.
pub fn random_majorizing_pair<R: Rng>(rng: &mut R, max_k: usize) -> (RateProfile, RateProfile) {
    let k = rng.gen_range(1..=max_k);
    let x: Vec<f64> = (0..k)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..2.0) })
        .collect();
    let mut y = x.clone();
    for _ in 0..rng.gen_range(0..2 * k + 1) {
        let i = rng.gen_range(0..k);
        let j = rng.gen_range(i..k);
        let t = rng.gen_range(0.0..=1.0) * y[i];
        y[i] -= t;
        y[j] += t;
    }
    (RateProfile::new(x).unwrap(), RateProfile::new(y).unwrap())
}

/// `(x, y)`, both non-increasing, with `x` majorizing `y`: `x` is `y` with
/// mass moved toward larger entries, then re-sorted.
pub fn random_sorted_majorizing_pair<R: Rng>(rng: &mut R, max_k: usize) -> (RateProfile, RateProfile) {
    let k = rng.gen_range(1..=max_k);
    let mut y: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..2.0)).collect();
    y.sort_by(|a, b| b.total_cmp(a));
    let mut x = y.clone();
    for _ in 0..rng.gen_range(0..2 * k + 1) {
        let i = rng.gen_range(0..k);
        let j = rng.gen_range(i..k);
        let t = rng.gen_range(0.0..=1.0) * x[j];
        x[j] -= t;
        x[i] += t;
    }
    x.sort_by(|a, b| b.total_cmp(a));
    (RateProfile::new(x).unwrap(), RateProfile::new(y).unwrap())
}

/// Non-decreasing non-negative bump to add onto a function. With `lift`, the
/// bump may also start above zero (only meaningful for leakage functions).
pub fn random_raise<R: Rng>(rng: &mut R, lift: bool) -> CumulativeFunction {
    let f = random_knots(rng, 1.0, false);
    if lift && rng.gen_bool(0.3) {
        let lift = rng.gen_range(0.0..0.5);
        return f.add(&CumulativeFunction::constant(lift).unwrap()).unwrap();
    }
    f
}

/// Pure step function: flat between 1..=5 upward jumps at random positions.
pub fn random_step_function<R: Rng>(rng: &mut R) -> CumulativeFunction {
    let n = rng.gen_range(1..=5);
    let mut at: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..=1.0)).collect();
    at.sort_by(f64::total_cmp);
    at.dedup_by(|b, a| *b - *a < 0.01);
    let mut knots = vec![Knot::flat(0.0, 0.0)];
    let mut level = 0.0;
    for a in at {
        let next = level + rng.gen_range(0.05..2.0);
        knots.push(Knot::new(a, level, next));
        level = next;
    }
    if knots[knots.len() - 1].alpha < 1.0 {
        knots.push(Knot::flat(1.0, level));
    }
    CumulativeFunction::new(knots).unwrap()
}

/// One-sided evaluation of `f`.
pub fn at(f: &CumulativeFunction, alpha: f64, side: cumrate::Side) -> f64 {
    match side {
        cumrate::Side::Right => f.value(alpha),
        cumrate::Side::Left => f.left_limit(alpha),
    }
}

/// Both one-sided points at the union of the functions' knots.
pub fn side_points(fs: &[&CumulativeFunction]) -> Vec<(f64, cumrate::Side)> {
    let mut out = Vec::new();
    for (i, a) in cumrate::cumfn::merged_alphas(fs).into_iter().enumerate() {
        if i > 0 {
            out.push((a, cumrate::Side::Left));
        }
        out.push((a, cumrate::Side::Right));
    }
    out
}

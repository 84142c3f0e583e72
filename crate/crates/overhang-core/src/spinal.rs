//! Spinal stacks: one support block per level, balancing done by point
//! weights on the left edges of the spine blocks.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Float, One, Zero};

use crate::error::{Error, Result};
use crate::model::{Block, PointWeight, Stack};
use crate::scalar::{Rational, Scalar};

/// Spine listed from the top: `weights[i-1]` is w_i on block B_i.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinalDesign {
    pub k: usize,
    pub weights: Vec<f64>,
    /// t_0 = 0, ..., t_k
    pub loads: Vec<f64>,
    /// d_1..d_k
    pub displacements: Vec<f64>,
    pub total_weight: f64,
    pub overhang: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinalOptimum {
    pub design: SpinalDesign,
    pub value: f64,
    pub k_star: usize,
    /// Last index carrying the optimality recurrence; weights after it are zero.
    pub split: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SpinalOptions {
    /// Forbid a point weight on the topmost block.
    pub top_unloaded: bool,
}

pub fn balance_displacements(weights: &[f64]) -> Result<SpinalDesign> {
    if weights.is_empty() {
        return Err(Error::InvalidParameter("spine needs at least one block".into()));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidParameter("spine weights must be nonnegative".into()));
    }
    let mut loads = vec![0.0];
    for w in weights {
        let last = *loads.last().unwrap();
        loads.push(last + w + 1.0);
    }
    let displacements: Vec<f64> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| (w + 0.5) / loads[i + 1])
        .collect();
    Ok(SpinalDesign {
        k: weights.len(),
        weights: weights.to_vec(),
        total_weight: loads[weights.len()],
        overhang: displacements.iter().sum(),
        loads,
        displacements,
    })
}

/// t_0..t_j from the recurrence t_{i+1} = t_i² / (t_{i-1} + ½), started at
/// index `from` with t_from = `seed`.
fn head(prefix: &[f64], seed: f64, j: usize) -> Vec<f64> {
    let mut t = prefix.to_vec();
    t.push(seed);
    while t.len() <= j {
        let i = t.len() - 1;
        t.push(t[i] * t[i] / (t[i - 1] + 0.5));
    }
    t
}

/// t_j alone, or the first term past `cap`.
fn shoot(prev: f64, seed: f64, from: usize, j: usize, cap: f64) -> f64 {
    let (mut a, mut b) = (prev, seed);
    for _ in from..j {
        let next = b * b / (a + 0.5);
        if next > cap {
            return next;
        }
        a = b;
        b = next;
    }
    b
}

/// Largest x in [lo, hi] with f(x) <= target, for f increasing. Bisects
/// while f overflows, then runs Illinois false position on ln f.
fn find_seed(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, target: f64) -> f64 {
    let goal = Float::ln(target);
    let g = |x: f64| Float::ln(f(x)) - goal;
    let (mut glo, mut ghi) = (g(lo), g(hi));
    if glo >= 0.0 {
        return lo;
    }
    let mut side = 0i8;
    for _ in 0..300 {
        let x = if ghi.is_finite() {
            let x = hi - ghi * (hi - lo) / (ghi - glo);
            if x > lo && x < hi {
                x
            } else {
                0.5 * (lo + hi)
            }
        } else {
            0.5 * (lo + hi)
        };
        if x <= lo || x >= hi {
            break;
        }
        let gx = g(x);
        if gx.abs() <= 1e-15 {
            return x;
        }
        if gx > 0.0 {
            hi = x;
            ghi = gx;
            if side == 1 && glo.is_finite() {
                glo *= 0.5;
            }
            side = 1;
        } else {
            lo = x;
            glo = gx;
            if side == -1 && ghi.is_finite() {
                ghi *= 0.5;
            }
            side = -1;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo
}

fn design_from_loads(t: &[f64]) -> SpinalDesign {
    let weights: Vec<f64> = (1..t.len())
        .map(|i| (t[i] - t[i - 1] - 1.0).max(0.0))
        .collect();
    let mut d = balance_displacements(&weights).expect("nonnegative weights");
    // keep the requested total exactly
    d.total_weight = *t.last().unwrap();
    d
}

/// Best design for split index j, if the recurrence can reach it.
fn solve_split(w: f64, k: usize, j: usize, opts: SpinalOptions) -> Option<SpinalDesign> {
    let target = w - (k - j) as f64;
    if target < j as f64 {
        return None;
    }
    let (prefix, lo0): (&[f64], f64) = if opts.top_unloaded {
        if j == 1 {
            return if (target - 1.0).abs() <= 1e-12 {
                let t: Vec<f64> = (0..=k).map(|i| i as f64).collect();
                Some(design_from_loads(&t))
            } else {
                None
            };
        }
        (&[0.0, 1.0], 2.0)
    } else {
        (&[0.0], 1.0)
    };
    let from = prefix.len();
    let prev = prefix[from - 1];
    let seed = find_seed(|x| shoot(prev, x, from, j, target), lo0, target, target);
    let mut t = head(prefix, seed, j);
    if (t[j] - target).abs() > 1e-9 * target.max(1.0) {
        return None;
    }
    t.truncate(j + 1);
    t[j] = target;
    for _ in j + 1..=k {
        let last = *t.last().unwrap();
        t.push(last + 1.0);
    }
    t[k] = w;
    if (1..t.len()).any(|i| t[i] - t[i - 1] - 1.0 < -1e-9) {
        return None;
    }
    Some(design_from_loads(&t))
}

pub fn optimize_fixed_k(w: f64, k: usize, opts: SpinalOptions) -> Result<SpinalOptimum> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !(w >= k as f64) {
        return Err(Error::InsufficientWeight { w, k });
    }
    let mut best: Option<(SpinalDesign, usize)> = None;
    for j in 1..=k {
        if let Some(d) = solve_split(w, k, j, opts) {
            if best.as_ref().is_none_or(|b| d.overhang > b.0.overhang) {
                best = Some((d, j));
            }
        }
    }
    let (design, split) = best.ok_or(Error::InsufficientWeight { w, k })?;
    Ok(SpinalOptimum {
        value: design.overhang,
        design,
        k_star: k,
        split,
    })
}

/// S*(w): best spinal overhang over all spine lengths. The scan stops once
/// k exceeds twice the best k found so far plus ten.
pub fn optimize(w: f64, opts: SpinalOptions) -> Result<SpinalOptimum> {
    if !(w >= 1.0) {
        return Err(Error::InvalidParameter("total weight must be at least 1".into()));
    }
    let kmax = Float::floor(w) as usize;
    let mut best: Option<SpinalOptimum> = None;
    for k in 1..=kmax {
        if let Ok(o) = optimize_fixed_k(w, k, opts) {
            if best.as_ref().is_none_or(|b| o.value > b.value + 1e-15) {
                best = Some(o);
            }
        }
        if let Some(b) = &best {
            if k > 2 * b.k_star + 10 {
                break;
            }
        }
    }
    best.ok_or(Error::InsufficientWeight { w, k: 1 })
}

/// The design with w_i = 2(i − 1) on k = ⌊√w⌋ blocks; weight left over
/// goes on the bottom block.
pub fn sqrt_construction(w: f64) -> Result<SpinalDesign> {
    if !(w >= 1.0) {
        return Err(Error::InvalidParameter("total weight must be at least 1".into()));
    }
    let k = Float::floor(Float::sqrt(w)) as usize;
    let mut weights: Vec<f64> = (1..=k).map(|i| 2.0 * (i as f64 - 1.0)).collect();
    weights[k - 1] += w - (k * k) as f64;
    balance_displacements(&weights)
}

pub fn log_bounds(w: f64) -> (f64, f64) {
    (Float::ln(w) - 1.313, Float::ln(w) + 1.0)
}

/// Blocks a column on top of an m-diamond must contain at minimum.
pub fn diamond_column_deficit(m: u32) -> Result<u128> {
    if m == 0 || m > 127 {
        return Err(Error::InvalidParameter("m must be in 1..=127".into()));
    }
    let need = 1u128 << m;
    let have = (m as u128) * (m as u128) + 1;
    Ok(need.saturating_sub(have))
}

/// Spine blocks with their point weights at the left edges; B_k on the
/// table, overhang equal to the design's.
pub fn realize(design: &SpinalDesign) -> Stack {
    let k = design.k;
    let mut xs = vec![0.0; k + 1];
    xs[k] = design.displacements[k - 1] - 1.0;
    for i in (1..k).rev() {
        xs[i] = xs[i + 1] + design.displacements[i - 1];
    }
    let mut blocks = Vec::with_capacity(k);
    let mut weights = Vec::new();
    for level in 0..k {
        let i = k - level;
        blocks.push(Block::new(xs[i], level as u32));
        if design.weights[i - 1] > 0.0 {
            weights.push(PointWeight::new(level, xs[i], design.weights[i - 1]));
        }
    }
    Stack::new(blocks).with_weights(weights).named("spinal")
}

/// Exact spine: left edges x_1..x_k (index 0 unused) and the stack.
pub fn realize_exact(weights: &[Rational]) -> (Vec<Rational>, Stack) {
    let k = weights.len();
    let mut t = vec![Rational::zero()];
    for w in weights {
        let last = t.last().unwrap().clone();
        t.push(last + w + Rational::one());
    }
    let d: Vec<Rational> = (1..=k)
        .map(|i| (weights[i - 1].clone() + Rational::half()) / &t[i])
        .collect();
    let mut xs = vec![Rational::zero(); k + 1];
    xs[k] = d[k - 1].clone() - Rational::one();
    for i in (1..k).rev() {
        xs[i] = xs[i + 1].clone() + &d[i - 1];
    }
    let mut blocks = Vec::with_capacity(k);
    let mut pws = Vec::new();
    for level in 0..k {
        let i = k - level;
        blocks.push(Block::exact(xs[i].clone(), level as u32));
        if !weights[i - 1].is_zero() {
            pws.push(PointWeight::exact(level, xs[i].clone(), weights[i - 1].clone()));
        }
    }
    (xs, Stack::new(blocks).with_weights(pws).named("spinal"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{is_balanced, Mode};
    use crate::model::overhang;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn unloaded_spine_is_harmonic() {
        let d = balance_displacements(&[0.0; 5]).unwrap();
        for (i, di) in d.displacements.iter().enumerate() {
            assert!(close(*di, 0.5 / (i + 1) as f64, 1e-15));
        }
    }

    #[test]
    fn quadratic_profile() {
        let w: Vec<f64> = (1..=6).map(|i| 2.0 * (i as f64 - 1.0)).collect();
        let d = balance_displacements(&w).unwrap();
        for i in 1..=6 {
            let fi = i as f64;
            assert!(close(d.loads[i], fi * fi, 1e-12));
            assert!(close(d.displacements[i - 1], 2.0 / fi - 1.5 / (fi * fi), 1e-12));
        }
        assert!(balance_displacements(&[-1.0]).is_err());
    }

    #[test]
    fn small_optima() {
        let opts = SpinalOptions::default();
        assert!(close(optimize(1.0, opts).unwrap().value, 0.5, 1e-12));
        assert!(close(optimize(2.0, opts).unwrap().value, 0.75, 1e-9));
        let three = optimize_fixed_k(3.0, 2, opts).unwrap();
        assert!(close(three.value, (11.0 - 2.0 * 6f64.sqrt()) / 6.0, 1e-9));
        let four = optimize(4.0, opts).unwrap();
        assert!(close(four.value, (15.0 - 4.0 * 2f64.sqrt()) / 8.0, 1e-9));
    }

    #[test]
    fn no_spare_weight_gives_harmonic() {
        let o = optimize_fixed_k(6.0, 6, SpinalOptions::default()).unwrap();
        let h: f64 = (1..=6).map(|i| 0.5 / i as f64).sum();
        assert!(close(o.value, h, 1e-12));
        assert!(optimize_fixed_k(5.0, 6, SpinalOptions::default()).is_err());
    }

    #[test]
    fn hundred() {
        let o = optimize(100.0, SpinalOptions::default()).unwrap();
        assert!(close(o.value, 3.6979, 1e-3));
        assert_eq!(o.k_star, 17);
    }

    #[test]
    fn sqrt_design() {
        let d = sqrt_construction(100.0).unwrap();
        assert_eq!(d.k, 10);
        assert!(close(d.loads[10], 100.0, 1e-12));
        let expect: f64 = (1..=10).map(|i| 2.0 / i as f64 - 1.5 / (i * i) as f64).sum();
        assert!(close(d.overhang, expect, 1e-12));
        assert!(close(sqrt_construction(4.0).unwrap().overhang, 1.125, 1e-12));
        assert!(close(sqrt_construction(1.0).unwrap().overhang, 0.5, 1e-12));
    }

    #[test]
    fn bounds_and_deficit() {
        let (lo, hi) = log_bounds(core::f64::consts::E);
        assert!(close(lo, -0.313, 1e-12) && close(hi, 2.0, 1e-12));
        assert_eq!(diamond_column_deficit(4).unwrap(), 0);
        assert_eq!(diamond_column_deficit(5).unwrap(), 6);
        assert_eq!(diamond_column_deficit(6).unwrap(), 27);
    }

    #[test]
    fn realized_spine_balances() {
        let o = optimize(10.0, SpinalOptions::default()).unwrap();
        let s = realize(&o.design);
        assert!(close(overhang(&s).unwrap(), o.value, 1e-12));
        assert!(is_balanced(&s, Mode::default()).unwrap().balanced);
    }

    #[test]
    fn top_unloaded_flag() {
        let opts = SpinalOptions { top_unloaded: true };
        let o = optimize(5.0, opts).unwrap();
        assert_eq!(o.design.weights[0], 0.0);
        assert!(o.value <= optimize(5.0, SpinalOptions::default()).unwrap().value);
    }
}

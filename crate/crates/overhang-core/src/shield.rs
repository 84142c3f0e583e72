//! Turning a loaded spinal stack into a standard one. Shield blocks B'_i sit
//! left of the spine blocks, collect the spine's point weights into a chain
//! of forces (u_i at z_i) and whatever cannot be passed on becomes an
//! integral force v_i, realized by a pile of v_i blocks.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Float, One, Signed, Zero};

use crate::balance::{is_balanced, Mode};
use crate::error::{Error, Result};
use crate::model::{validate, Block, Stack};
use crate::scalar::{Rational, Scalar};
use crate::spinal::{realize_exact, SpinalDesign};

/// Extra layers above the stall point that the top search may rebuild.
const REDO_DEPTH: usize = 5;

/// Concrete spine: `xs[i]` and `weights[i]` for B_1 (top) ..B_k, index 0 unused.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinePlacement {
    pub k: usize,
    pub xs: Vec<Rational>,
    pub weights: Vec<Rational>,
    pub total_weight: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShieldLayer<S = Rational> {
    pub index: usize,
    /// Left edge of B'_i.
    pub y: S,
    /// Force B'_i passes down the chain, applied at `z`.
    pub u: S,
    pub z: Option<S>,
    /// External force wanted at the left edge of B'_i.
    pub v: u64,
}

/// Block B'_0 resting on top of B_1, carrying `v` blocks at `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopBlock<S = Rational> {
    pub y: S,
    pub v: u64,
    pub p: Option<S>,
}

impl ShieldLayer {
    fn to_float(&self) -> ShieldLayer<f64> {
        ShieldLayer {
            index: self.index,
            y: self.y.to_float(),
            u: self.u.to_float(),
            z: self.z.as_ref().map(Scalar::to_float),
            v: self.v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaceStatus {
    Complete,
    /// The shield at this index could not sit right of x_{i+1} - 1.
    Stalled(usize),
    /// The chain force would turn negative at this index.
    Exhausted(usize),
    /// A pile was added at this index and the chain still cannot continue.
    Stopped(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShieldPlan {
    pub layers: BTreeMap<usize, ShieldLayer>,
    pub status: PlaceStatus,
}

impl ShieldPlan {
    /// Index where the placement gave up, if it did.
    pub fn stop_index(&self) -> Option<usize> {
        match self.status {
            PlaceStatus::Complete => None,
            PlaceStatus::Stalled(i) | PlaceStatus::Exhausted(i) | PlaceStatus::Stopped(i) => Some(i),
        }
    }
}

/// A vertical pile. `x` is the left edge of its lowest block.
#[derive(Debug, Clone, PartialEq)]
pub struct Tower {
    pub layer: usize,
    pub x: Rational,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionResult {
    pub stack: Stack,
    pub placed_shields: usize,
    /// Piles on layers kept from the bottom-up placement.
    pub towers: Vec<Tower>,
    /// Piles on layers rebuilt by the top search, including the cap on B'_0.
    pub residual_top: Vec<Tower>,
    pub layers: Vec<ShieldLayer>,
    pub top: Option<TopBlock>,
    pub success: bool,
    pub diagnostics: String,
}

/// Common denominator of the exact spine weights. Small denominators keep
/// the exact balance check cheap.
const WEIGHT_DENOMINATOR: i64 = 1_000_000;

/// Exact spine for an integral total weight. Weights are rounded to
/// multiples of 1/WEIGHT_DENOMINATOR and the last loaded block absorbs the
/// rounding.
pub fn exact_spine(design: &SpinalDesign) -> Result<SpinePlacement> {
    let w = design.total_weight;
    if Float::abs(w - Float::round(w)) > 1e-9 || w < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "conversion needs an integral total weight, got {w}"
        )));
    }
    let n = Float::round(w) as u64;
    let k = design.k;
    let mut weights: Vec<Rational> = design
        .weights
        .iter()
        .map(|&v| {
            let scaled = Float::round(v * WEIGHT_DENOMINATOR as f64) as i64;
            Rational::new(scaled.into(), WEIGHT_DENOMINATOR.into())
        })
        .collect();
    let sum: Rational = weights.iter().sum();
    let excess = Rational::from_integer(n.into()) - Rational::from_integer(k.into()) - sum;
    if !excess.is_zero() {
        let last = weights.iter().rposition(|v| !v.is_zero()).unwrap_or(k - 1);
        weights[last] += excess;
        if weights[last].is_negative() {
            return Err(Error::InvalidParameter("spine weights do not add up".into()));
        }
    }
    let (xs, _) = realize_exact(&weights);
    let mut padded = vec![Rational::zero()];
    padded.extend(weights);
    Ok(SpinePlacement {
        k,
        xs,
        weights: padded,
        total_weight: n,
    })
}

/// Spine coordinates and weights in some number type, index 0 unused.
struct Spine<'a, S> {
    xs: &'a [S],
    ws: &'a [S],
}

impl SpinePlacement {
    fn view(&self) -> Spine<'_, Rational> {
        Spine {
            xs: &self.xs,
            ws: &self.weights,
        }
    }
}

fn moment_in<S: Scalar>(sp: &Spine<S>, i: usize, u_next: &S, z_next: &Option<S>) -> S {
    let carried = match z_next {
        Some(z) if !u_next.is_zero() => z.clone() * u_next,
        _ => S::zero(),
    };
    carried + sp.xs[i + 1].clone() * &sp.ws[i + 1]
}

fn floor_u64(v: &Rational) -> u64 {
    v.floor_count().unwrap_or(0)
}

/// Bottom-up shield placement, from B'_{k-1} up towards B'_1.
pub fn place_shields(sp: &SpinePlacement) -> ShieldPlan {
    let one = Rational::one();
    let half = Rational::half();
    let x = &sp.xs;
    let mut layers = BTreeMap::new();
    let mut u_next = Rational::zero();
    let mut z_next: Option<Rational> = None;
    let mut status = PlaceStatus::Complete;
    let mut i = sp.k.saturating_sub(1);
    while i >= 1 {
        let mut y = &x[i] - &one;
        if let Some(z) = &z_next {
            if *z < y {
                y = z.clone();
            }
        }
        if y <= &x[i + 1] - &one {
            status = PlaceStatus::Stalled(i);
            break;
        }
        let m = moment_in(&sp.view(), i, &u_next, &z_next);
        let mut u = &u_next + &sp.weights[i + 1] - &one;
        if u.is_negative() {
            status = PlaceStatus::Exhausted(i);
            break;
        }
        let at = |u: &Rational, v: &Rational| -> Option<Rational> {
            if u.is_positive() {
                Some((&m - &y * v - (&y + &half)) / u)
            } else {
                None
            }
        };
        let mut z = at(&u, &Rational::zero());
        let mut v = 0u64;
        if let Some(zv) = z.clone() {
            if zv <= &x[i] - &one && i >= 2 {
                v = floor_u64(&((&one - &zv + &y) * &u));
                if v > 0 {
                    let vr = Rational::from_integer(v.into());
                    u -= &vr;
                    z = at(&u, &vr);
                }
                if z.as_ref().is_none_or(|z| *z <= &x[i] - &one) {
                    layers.insert(i, ShieldLayer { index: i, y, u, z, v });
                    status = PlaceStatus::Stopped(i);
                    break;
                }
            }
        }
        layers.insert(
            i,
            ShieldLayer {
                index: i,
                y,
                u: u.clone(),
                z: z.clone(),
                v,
            },
        );
        u_next = u;
        z_next = z;
        i -= 1;
    }
    ShieldPlan { layers, status }
}

/// One (position, count) per nonzero external force.
pub fn realize_towers(layers: &[ShieldLayer]) -> Vec<(Rational, u64)> {
    layers
        .iter()
        .filter(|l| l.v > 0)
        .map(|l| (l.y.clone(), l.v))
        .collect()
}

/// Admissible left edges for B'_i: above x_{i+1} - 1, at most x_i - 1 and
/// not right of the force it has to pick up.
fn window<S: Scalar>(sp: &Spine<S>, i: usize, u_next: &S, z_next: &Option<S>) -> Option<(S, S)> {
    let lo = sp.xs[i + 1].clone() - S::one();
    let mut hi = sp.xs[i].clone() - S::one();
    if let Some(z) = z_next {
        if !u_next.is_zero() && *z < hi {
            hi = z.clone();
        }
    }
    (hi.clone() - &lo).is_pos().then_some((lo, hi))
}

/// Candidate `j` in the window: its right end, then the quarter points.
fn shield_y<S: Scalar>(lo: &S, hi: &S, j: u8) -> S {
    if j == 0 {
        hi.clone()
    } else {
        lo.clone() + (hi.clone() - lo) * S::from_ratio(j as i64, 4)
    }
}

fn step<S: Scalar>(
    sp: &Spine<S>,
    i: usize,
    y: &S,
    v: u64,
    u_next: &S,
    z_next: &Option<S>,
) -> Option<(S, Option<S>)> {
    let m = moment_in(sp, i, u_next, z_next);
    let vs = S::from_ratio(v as i64, 1);
    let u = u_next.clone() + &sp.ws[i + 1] - S::one() - &vs;
    if u.is_neg() {
        return None;
    }
    if u.is_negligible() {
        return Some((S::zero(), None));
    }
    let z = (m - y.clone() * &vs - (y.clone() + S::half())) / &u;
    if (z.clone() - y - S::one()).is_pos() {
        return None;
    }
    Some((u, Some(z)))
}

/// A chain force that lands on or left of x_i - 1 cannot be picked up
/// by the next shield.
fn dead_end<S: Scalar>(sp: &Spine<S>, i: usize, u: &S, z: &Option<S>) -> bool {
    match z {
        Some(z) => u.is_pos() && !(z.clone() - &sp.xs[i] + S::one()).is_pos(),
        None => false,
    }
}

/// B'_0 on top of B_1: its left edge, the cap it carries and where.
fn top_block<S: Scalar>(sp: &Spine<S>, u_next: &S, z_next: &Option<S>) -> Option<(S, u64, Option<S>)> {
    let one = S::one();
    let half = S::half();
    let m0 = moment_in(sp, 0, u_next, z_next);
    let v0 = u_next.clone() + &sp.ws[1] - &one;
    let count = v0.as_count()?;
    let floor = sp.xs[1].clone() - &one;
    let lo = S::max_of(floor.clone(), (m0.clone() - &half - &v0) / (v0.clone() + &one));
    let mut hi = (m0.clone() - &half) / (v0.clone() + &one);
    if let Some(z) = z_next {
        if !u_next.is_zero() && *z < hi {
            hi = z.clone();
        }
    }
    let gap = hi.clone() - &lo;
    if gap.is_neg() {
        return None;
    }
    if gap.is_negligible() && !(count == 0 && (lo.clone() - &floor).is_pos()) {
        return None;
    }
    let y = (lo + hi) * &half;
    if !(y.clone() - &floor).is_pos() {
        return None;
    }
    let p = (count > 0).then(|| (m0 - &y - half) / v0);
    Some((y, count, p))
}

/// One rebuilt layer: its index, window position and external force.
type Choice = (usize, u8, u64);

/// Every way to rebuild the layers below a kept one, in floats.
fn enumerate(
    sp: &Spine<f64>,
    i: usize,
    u_next: f64,
    z_next: Option<f64>,
    path: &mut Vec<Choice>,
    out: &mut Vec<Vec<Choice>>,
) {
    if i == 0 {
        if top_block(sp, &u_next, &z_next).is_some() {
            out.push(path.clone());
        }
        return;
    }
    let Some((lo, hi)) = window(sp, i, &u_next, &z_next) else {
        return;
    };
    let Some(vmax) = (u_next + sp.ws[i + 1] - 1.0).floor_count() else {
        return;
    };
    for j in 0..4 {
        let y = shield_y(&lo, &hi, j);
        for v in 0..=vmax {
            let Some((u, z)) = step(sp, i, &y, v, &u_next, &z_next) else {
                continue;
            };
            if dead_end(sp, i, &u, &z) {
                continue;
            }
            path.push((i, j, v));
            enumerate(sp, i - 1, u, z, path, out);
            path.pop();
        }
    }
}

type Layers<S> = BTreeMap<usize, ShieldLayer<S>>;

/// Rebuild the layers of a path on top of the kept ones, checking every
/// condition again in the given number type.
fn replay<S: Scalar>(sp: &Spine<S>, kept: &Layers<S>, h: usize, path: &[Choice]) -> Option<(Layers<S>, TopBlock<S>)> {
    let mut layers: Layers<S> = kept.range(h..).map(|(i, l)| (*i, l.clone())).collect();
    let (mut u, mut z) = match layers.get(&h) {
        Some(l) => (l.u.clone(), l.z.clone()),
        None => (S::zero(), None),
    };
    for &(i, j, v) in path {
        let (lo, hi) = window(sp, i, &u, &z)?;
        let y = shield_y(&lo, &hi, j);
        let (un, zn) = step(sp, i, &y, v, &u, &z)?;
        if dead_end(sp, i, &un, &zn) {
            return None;
        }
        layers.insert(
            i,
            ShieldLayer {
                index: i,
                y,
                u: un.clone(),
                z: zn.clone(),
                v,
            },
        );
        u = un;
        z = zn;
    }
    let (y, v, p) = top_block(sp, &u, &z)?;
    Some((layers, TopBlock { y, v, p }))
}

/// Blocks of a candidate: spine, shields, piles and the cap as (x, level),
/// with each pile as (layer, x of its lowest block, count).
fn assemble<S: Scalar>(
    xs: &[S],
    layers: &Layers<S>,
    top: &TopBlock<S>,
) -> Option<(Vec<(S, u32)>, Vec<(usize, S, u64)>)> {
    let k = xs.len() - 1;
    let half = S::half();
    let one = S::one();
    let mut blocks: Vec<(S, u32)> = (1..=k).map(|i| (xs[i].clone(), (k - i) as u32)).collect();
    for l in layers.values() {
        blocks.push((l.y.clone(), (k - l.index) as u32));
    }
    blocks.push((top.y.clone(), k as u32));
    let mut piles = Vec::new();
    for l in layers.values() {
        if l.v == 0 {
            continue;
        }
        let level = (k - l.index) as u32;
        let above = match layers.get(&(l.index - 1)) {
            Some(n) => n.y.clone(),
            None => top.y.clone(),
        };
        let gap = above.clone() - &l.y;
        if !(half.clone() - &gap).is_pos() {
            let x = l.y.clone() - &half;
            for h in 1..=l.v as u32 {
                blocks.push((x.clone(), level + h));
            }
            piles.push((l.index, x, l.v));
        } else {
            // Crank: the first block tucks left of the next shield and the
            // column above leans back so its weight lands on y.
            if l.v < 2 {
                return None;
            }
            let v = S::from_ratio(l.v as i64, 1);
            let s = (half.clone() - &gap) * &v / (v.clone() - &one);
            if (s.clone() - &half).is_pos() {
                return None;
            }
            let t = above - &one;
            blocks.push((t.clone(), level + 1));
            for h in 2..=l.v as u32 {
                blocks.push((t.clone() + &s, level + h));
            }
            piles.push((l.index, t, l.v));
        }
    }
    if top.v > 0 {
        let x = top.p.clone()? - &half;
        for h in 1..=top.v as u32 {
            blocks.push((x.clone(), k as u32 + h));
        }
        piles.push((0, x, top.v));
    }
    Some((blocks, piles))
}

/// Same-level overlap beyond rounding noise.
fn overlaps(blocks: &[(f64, u32)]) -> bool {
    let mut sorted: Vec<(u32, f64)> = blocks.iter().map(|(x, l)| (*l, *x)).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.windows(2).any(|w| w[0].0 == w[1].0 && w[1].1 - w[0].1 < 1.0 - 1e-9)
}

/// Float screen of a candidate: sound geometry and a balancing set.
fn plausible(sp: &Spine<f64>, kept: &Layers<f64>, h: usize, path: &[Choice], n: usize) -> bool {
    let Some((layers, top)) = replay(sp, kept, h, path) else {
        return false;
    };
    let Some((blocks, _)) = assemble(sp.xs, &layers, &top) else {
        return false;
    };
    if blocks.len() != n || overlaps(&blocks) {
        return false;
    }
    let stack = Stack::new(blocks.iter().map(|(x, l)| Block::new(*x, *l)).collect());
    is_balanced(&stack, Mode::default()).is_ok_and(|r| r.balanced)
}

fn to_stack(blocks: &[(Rational, u32)]) -> Stack {
    Stack::new(blocks.iter().map(|(x, l)| Block::exact(x.clone(), *l)).collect()).named("converted")
}

/// Search the top assembly: keep the placed layers from some h down, rebuild
/// the ones above it, and return the balanced candidate with the fewest
/// piles. Ties go to fewer piles kept from the placement, then to smaller h.
pub fn finish_top(sp: &SpinePlacement, plan: &ShieldPlan) -> ConversionResult {
    let k = sp.k;
    let n = sp.total_weight as usize;
    let exact = sp.view();
    let fxs: Vec<f64> = sp.xs.iter().map(Scalar::to_float).collect();
    let fws: Vec<f64> = sp.weights.iter().map(Scalar::to_float).collect();
    let float = Spine { xs: &fxs, ws: &fws };
    let last = plan.layers.keys().next().copied().unwrap_or(k);
    // (piles, piles kept from the placement, h, path)
    let mut cands: Vec<(usize, usize, usize, Vec<Choice>)> = Vec::new();
    for h in last..=k.min(last + REDO_DEPTH) {
        let (u, z) = match plan.layers.get(&h) {
            Some(l) => (l.u.to_float(), l.z.as_ref().map(Scalar::to_float)),
            None => (0.0, None),
        };
        let kept = plan.layers.range(h..).filter(|(_, l)| l.v > 0).count();
        let mut paths = Vec::new();
        enumerate(&float, h - 1, u, z, &mut Vec::new(), &mut paths);
        for p in paths {
            let piles = kept + p.iter().filter(|c| c.2 > 0).count();
            cands.push((piles, kept, h, p));
        }
    }
    cands.sort_by_key(|c| (c.0, c.1, c.2));
    let total = cands.len();
    let mut rejected = 0usize;
    let kept_exact: Layers<Rational> = plan.layers.clone();
    let kept_float: Layers<f64> = plan.layers.iter().map(|(i, l)| (*i, l.to_float())).collect();
    for (_, _, h, path) in cands {
        if !plausible(&float, &kept_float, h, &path, n) {
            rejected += 1;
            continue;
        }
        let Some((layers, top)) = replay(&exact, &kept_exact, h, &path) else {
            continue;
        };
        let Some((blocks, piles)) = assemble(&sp.xs, &layers, &top) else {
            continue;
        };
        let stack = to_stack(&blocks);
        if blocks.len() != n || validate(&stack).is_err() {
            continue;
        }
        if !is_balanced(&stack, Mode::Exact).is_ok_and(|r| r.balanced) {
            rejected += 1;
            continue;
        }
        let piles: Vec<Tower> = piles
            .into_iter()
            .map(|(layer, x, count)| Tower { layer, x, count })
            .collect();
        let settled = |t: &Tower| t.layer >= h;
        let (towers, residual_top): (Vec<Tower>, Vec<Tower>) = piles.into_iter().partition(settled);
        return ConversionResult {
            stack,
            placed_shields: layers.len() + 1,
            towers,
            residual_top,
            layers: layers.into_values().collect(),
            top: Some(top),
            success: true,
            diagnostics: format!("{total} top assemblies considered, {rejected} rejected"),
        };
    }
    let spine: Vec<(Rational, u32)> = (1..=k).map(|i| (sp.xs[i].clone(), (k - i) as u32)).collect();
    let point_weights = sp.weights.iter().filter(|w| w.is_positive()).count();
    ConversionResult {
        stack: to_stack(&spine),
        placed_shields: plan.layers.len(),
        towers: Vec::new(),
        residual_top: Vec::new(),
        layers: plan.layers.values().cloned().collect(),
        top: None,
        success: false,
        diagnostics: format!(
            "no balanced top assembly: {total} candidates, {rejected} rejected; \
             {point_weights} point weights cannot be supplied by {} spare blocks",
            n - k
        ),
    }
}

pub fn convert(design: &SpinalDesign) -> Result<ConversionResult> {
    let sp = exact_spine(design)?;
    if sp.weights.iter().all(|w| w.is_zero()) {
        let (_, stack) = realize_exact(&sp.weights[1..]);
        return Ok(ConversionResult {
            stack,
            placed_shields: 0,
            towers: Vec::new(),
            residual_top: Vec::new(),
            layers: Vec::new(),
            top: None,
            success: true,
            diagnostics: String::from("no point weights"),
        });
    }
    let plan = place_shields(&sp);
    Ok(finish_top(&sp, &plan))
}

/// Text report: one line per layer.
pub fn report(result: &ConversionResult) -> String {
    let mut s = String::new();
    for l in &result.layers {
        let z = l.z.as_ref().map_or(String::from("-"), |z| format!("{:.10}", z.to_float()));
        s += &format!(
            "layer {:>3}  y {:>14.10}  z {:>14}  u {:>14.10}  v {}\n",
            l.index,
            l.y.to_float(),
            z,
            l.u.to_float(),
            l.v
        );
    }
    if let Some(t) = &result.top {
        s += &format!("top        y {:>14.10}  cap {}\n", t.y.to_float(), t.v);
    }
    for t in &result.towers {
        s += &format!("tower at {:.10}: {} blocks\n", t.x.to_float(), t.count);
    }
    for t in &result.residual_top {
        s += &format!("top pile at {:.10}: {} blocks\n", t.x.to_float(), t.count);
    }
    s += &result.diagnostics;
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::exact_overhang;
    use crate::spinal::{optimize, sqrt_construction, SpinalOptions};

    fn spine_for(n: u64) -> SpinePlacement {
        let o = optimize(n as f64, SpinalOptions::default()).unwrap();
        exact_spine(&o.design).unwrap()
    }

    fn check_layer(sp: &SpinePlacement, l: &ShieldLayer, below: Option<&ShieldLayer>) {
        let i = l.index;
        let (u1, z1) = match below {
            Some(b) => (b.u.clone(), b.z.clone()),
            None => (Rational::zero(), None),
        };
        let v = Rational::from_integer(l.v.into());
        let lhs = &l.u + &v + Rational::one();
        assert_eq!(lhs, &u1 + &sp.weights[i + 1]);
        let zu = l.z.as_ref().map_or(Rational::zero(), |z| z * &l.u);
        let lhs = zu + &l.y * &v + &l.y + Rational::half();
        assert_eq!(lhs, moment_in(&sp.view(), i, &u1, &z1));
    }

    #[test]
    fn layers_balance_exactly() {
        for n in [25u64, 100] {
            let sp = spine_for(n);
            let plan = place_shields(&sp);
            for (i, l) in &plan.layers {
                check_layer(&sp, l, plan.layers.get(&(i + 1)));
                assert!(l.u >= Rational::zero());
            }
        }
        let sp = exact_spine(&sqrt_construction(25.0).unwrap()).unwrap();
        let plan = place_shields(&sp);
        for (i, l) in &plan.layers {
            check_layer(&sp, l, plan.layers.get(&(i + 1)));
        }
    }

    #[test]
    fn single_block_needs_nothing() {
        let o = optimize(1.0, SpinalOptions::default()).unwrap();
        let r = convert(&o.design).unwrap();
        assert!(r.success);
        assert_eq!(r.stack.len(), 1);
        assert_eq!(r.placed_shields, 0);
    }

    #[test]
    fn weight_ten_converts() {
        let o = optimize(10.0, SpinalOptions::default()).unwrap();
        let r = convert(&o.design).unwrap();
        assert!(r.success, "{}", r.diagnostics);
        assert_eq!(r.stack.len(), 10);
        let oh = exact_overhang(&r.stack).unwrap().to_float();
        assert!((oh - o.value).abs() < 1e-9);
    }

    #[test]
    fn weight_three_fails() {
        let o = optimize(3.0, SpinalOptions::default()).unwrap();
        let r = convert(&o.design).unwrap();
        assert!(!r.success);
    }

    #[test]
    fn fractional_weight_rejected() {
        let o = optimize(10.5, SpinalOptions::default()).unwrap();
        assert!(convert(&o.design).is_err());
    }

    #[test]
    fn towers_list_nonzero_forces() {
        let l = |v| ShieldLayer {
            index: 1,
            y: Rational::from_integer(2.into()),
            u: Rational::zero(),
            z: None,
            v,
        };
        assert!(realize_towers(&[l(0)]).is_empty());
        assert_eq!(realize_towers(&[l(3)]), vec![(Rational::from_integer(2.into()), 3)]);
    }
}

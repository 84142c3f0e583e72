//! Small stacks by brute force: every combinatorial structure of n blocks,
//! each optimized by sequential linear programming from many starts.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::balance::{is_balanced, Mode};
use crate::error::{Error, Result};
use crate::lp::{lp_solve, LpOutcome, LpProblem};
use crate::model::{Block, Lower, Stack};

pub const ENUMERATION_LIMIT: usize = 7;

/// Which blocks rest on which. Blocks are numbered level by level from the
/// bottom, left to right within a level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CombinatorialStructure {
    /// Block count per level, bottom first.
    pub levels: Vec<usize>,
    /// What each block rests on, left to right.
    pub below: Vec<Vec<Lower>>,
}

impl CombinatorialStructure {
    pub fn len(&self) -> usize {
        self.below.len()
    }

    pub fn is_empty(&self) -> bool {
        self.below.is_empty()
    }

    pub fn level_of(&self, i: usize) -> usize {
        let mut start = 0;
        for (l, &k) in self.levels.iter().enumerate() {
            if i < start + k {
                return l;
            }
            start += k;
        }
        panic!("block {i} out of range")
    }

    /// Blocks resting on block `i`, left to right.
    pub fn above(&self, i: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&u| self.below[u].contains(&Lower::Block(i)))
            .collect()
    }

    /// Every (upper, lower) pair that touches.
    pub fn contacts(&self) -> Vec<(usize, Lower)> {
        self.below
            .iter()
            .enumerate()
            .flat_map(|(u, ls)| ls.iter().map(move |&l| (u, l)))
            .collect()
    }

    fn starts(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.levels.len());
        let mut s = 0;
        for &k in &self.levels {
            out.push(s);
            s += k;
        }
        out
    }
}

/// All ways of putting `k` blocks on a row of `width` blocks: each rests on
/// one block or two neighbors, in left-to-right order, and no lower block
/// carries more than two.
fn placements(width: usize, k: usize) -> Vec<Vec<(usize, usize)>> {
    let mut runs = Vec::new();
    for a in 0..width {
        runs.push((a, a));
        if a + 1 < width {
            runs.push((a, a + 1));
        }
    }
    let mut out = Vec::new();
    let mut cur: Vec<(usize, usize)> = Vec::with_capacity(k);
    fn rec(
        runs: &[(usize, usize)],
        k: usize,
        width: usize,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if cur.len() == k {
            let mut load = vec![0u8; width];
            for &(a, b) in cur.iter() {
                for l in a..=b {
                    load[l] += 1;
                }
            }
            if load.iter().all(|&c| c <= 2) {
                out.push(cur.clone());
            }
            return;
        }
        for &(a, b) in runs {
            if let Some(&(pa, pb)) = cur.last() {
                // neighbors share at most one lower block, and two blocks
                // cannot both straddle the same gap
                if a < pb || ((pa, pb) == (a, b) && a != b) {
                    continue;
                }
            }
            cur.push((a, b));
            rec(runs, k, width, cur, out);
            cur.pop();
        }
    }
    rec(&runs, k, width, &mut cur, &mut out);
    out
}

fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every structure with `n` blocks, once each, in a fixed order. Mirror
/// images are distinct.
pub fn enumerate_structures(n: usize) -> Result<Vec<CombinatorialStructure>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one block".into()));
    }
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooManyBlocks {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut out = Vec::new();
    for levels in compositions(n) {
        let mut partial = vec![vec![Lower::Table]; levels[0]];
        extend(&levels, 1, 0, &mut partial, &mut out);
    }
    Ok(out)
}

fn extend(
    levels: &[usize],
    l: usize,
    prev_start: usize,
    partial: &mut Vec<Vec<Lower>>,
    out: &mut Vec<CombinatorialStructure>,
) {
    if l == levels.len() {
        out.push(CombinatorialStructure {
            levels: levels.to_vec(),
            below: partial.clone(),
        });
        return;
    }
    let width = levels[l - 1];
    let start = partial.len();
    for p in placements(width, levels[l]) {
        for &(a, b) in &p {
            partial.push((a..=b).map(|j| Lower::Block(prev_start + j)).collect());
        }
        extend(levels, l + 1, start, partial, out);
        partial.truncate(start);
    }
}

/// Best overhang found for one structure and the stack attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureOptimum {
    pub overhang: f64,
    pub stack: Stack,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub starts: usize,
    /// Scale of the random start perturbation, in block lengths.
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            starts: 20,
            perturbation: 0.25,
            seed: 0x5eed,
        }
    }
}

const PENALTY: f64 = 10.0;
const MAX_STEPS: usize = 400;

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// A start: table blocks packed left of the edge, each upper block over the
/// middle of what holds it, then jittered and pushed apart.
fn start_point(s: &CombinatorialStructure, rng: &mut ChaCha8Rng, scale: f64) -> Vec<f64> {
    let starts = s.starts();
    let mut x = vec![0.0; s.len()];
    for (l, &k) in s.levels.iter().enumerate() {
        for j in 0..k {
            let i = starts[l] + j;
            let base = if l == 0 {
                -0.5 - (k - 1 - j) as f64
            } else {
                let xs: Vec<f64> = s.below[i]
                    .iter()
                    .map(|b| match b {
                        Lower::Block(q) => x[*q],
                        Lower::Table => 0.0,
                    })
                    .collect();
                match xs.len() {
                    1 => xs[0],
                    _ => 0.5 * (xs[0] + xs[xs.len() - 1]),
                }
            };
            x[i] = base + scale * (2.0 * uniform(rng) - 1.0);
            if j > 0 && x[i] < x[i - 1] + 1.0 {
                x[i] = x[i - 1] + 1.0;
            }
        }
    }
    x
}

struct Slp<'a> {
    s: &'a CombinatorialStructure,
    contacts: Vec<(usize, Lower)>,
    starts: Vec<usize>,
}

/// Variables of the linearized problem: z (shifted positions), F and the two
/// halves of M per contact, then one slack per bilinear inequality.
struct Layout {
    n: usize,
    nc: usize,
}

impl Layout {
    fn z(&self, i: usize) -> usize {
        i
    }
    fn f(&self, c: usize) -> usize {
        self.n + 3 * c
    }
    fn mp(&self, c: usize) -> usize {
        self.n + 3 * c + 1
    }
    fn mm(&self, c: usize) -> usize {
        self.n + 3 * c + 2
    }
    fn vars(&self) -> usize {
        self.n + 3 * self.nc
    }
}

impl<'a> Slp<'a> {
    fn new(s: &'a CombinatorialStructure) -> Self {
        Slp {
            s,
            contacts: s.contacts(),
            starts: s.starts(),
        }
    }

    /// Violation of the interval conditions a·F <= M <= b·F and of the block
    /// equations at a point.
    fn violation(&self, x: &[f64], f: &[f64], m: &[f64]) -> f64 {
        let mut v = 0.0;
        for (c, &(u, l)) in self.contacts.iter().enumerate() {
            for (lo, hi) in self.bounds(u, l, x) {
                v += (f[c] * lo - m[c]).max(0.0);
                v += (m[c] - f[c] * hi).max(0.0);
            }
            if l == Lower::Table {
                v += m[c].max(0.0);
            }
        }
        let n = self.s.len();
        let mut force = vec![-1.0; n];
        let mut moment: Vec<f64> = x.iter().map(|xi| -(xi + 0.5)).collect();
        for (c, &(u, l)) in self.contacts.iter().enumerate() {
            force[u] += f[c];
            moment[u] += m[c];
            if let Lower::Block(q) = l {
                force[q] -= f[c];
                moment[q] -= m[c];
            }
        }
        v + force.iter().chain(&moment).map(|r| r.abs()).sum::<f64>()
    }

    /// Pairs (lower, upper) that bracket the resultant: each block's own
    /// span, and x ≤ 0 on the table.
    fn bounds(&self, u: usize, l: Lower, x: &[f64]) -> Vec<(f64, f64)> {
        match l {
            Lower::Block(q) => vec![(x[u], x[u] + 1.0), (x[q], x[q] + 1.0)],
            Lower::Table => vec![(x[u], x[u] + 1.0)],
        }
    }

    fn merit(&self, k: usize, x: &[f64], f: &[f64], m: &[f64]) -> f64 {
        -x[k] + PENALTY * self.violation(x, f, m)
    }

    /// One linearized step inside the box |x − x0| <= delta.
    fn step(&self, k: usize, x0: &[f64], f0: &[f64], delta: f64) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let n = self.s.len();
        let lay = Layout {
            n,
            nc: self.contacts.len(),
        };
        let mut lp: LpProblem<f64> = LpProblem::new(lay.vars());
        let mut obj = vec![(lay.z(k), -1.0)];
        for i in 0..n {
            lp.add_le(vec![(lay.z(i), 1.0)], 2.0 * delta);
        }
        // x_i = x0_i − delta + z_i
        let mut force_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut moment_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (c, &(u, l)) in self.contacts.iter().enumerate() {
            force_rows[u].push((lay.f(c), 1.0));
            moment_rows[u].push((lay.mp(c), 1.0));
            moment_rows[u].push((lay.mm(c), -1.0));
            if let Lower::Block(q) = l {
                force_rows[q].push((lay.f(c), -1.0));
                moment_rows[q].push((lay.mp(c), -1.0));
                moment_rows[q].push((lay.mm(c), 1.0));
            }
        }
        for i in 0..n {
            lp.add_eq(core::mem::take(&mut force_rows[i]), 1.0);
            let mut row = core::mem::take(&mut moment_rows[i]);
            row.push((lay.z(i), -1.0));
            lp.add_eq(row, x0[i] - delta + 0.5);
        }
        for (l, &width) in self.s.levels.iter().enumerate() {
            for j in 1..width {
                let (a, b) = (self.starts[l] + j - 1, self.starts[l] + j);
                // x_b − x_a >= 1
                lp.add_ge(vec![(lay.z(b), 1.0), (lay.z(a), -1.0)], 1.0 - (x0[b] - x0[a]));
            }
        }
        for (c, &(u, l)) in self.contacts.iter().enumerate() {
            let mut owners = vec![u];
            if let Lower::Block(q) = l {
                owners.push(q);
            }
            for &b in &owners {
                // F·x_b − M <= s  and  M − F·(x_b + 1) <= s, linearized in (F, x_b)
                for upper_side in [false, true] {
                    let s = lp.add_var();
                    obj.push((s, PENALTY));
                    let shift = if upper_side { 1.0 } else { 0.0 };
                    let sign = if upper_side { -1.0 } else { 1.0 };
                    let row = vec![
                        (lay.f(c), sign * (x0[b] + shift)),
                        (lay.z(b), sign * f0[c]),
                        (lay.mp(c), -sign),
                        (lay.mm(c), sign),
                        (s, -1.0),
                    ];
                    lp.add_le(row, sign * f0[c] * delta);
                }
            }
            if l == Lower::Table {
                lp.add_le(vec![(lay.mp(c), 1.0), (lay.mm(c), -1.0)], 0.0);
            }
        }
        lp.set_objective(obj);
        match lp_solve(&lp) {
            LpOutcome::Optimal(pt) => {
                let x = (0..n).map(|i| x0[i] - delta + pt.x[lay.z(i)]).collect();
                let f = (0..lay.nc).map(|c| pt.x[lay.f(c)]).collect();
                let m = (0..lay.nc).map(|c| pt.x[lay.mp(c)] - pt.x[lay.mm(c)]).collect();
                Some((x, f, m))
            }
            _ => None,
        }
    }

    /// Trust-region SLP from `x0`, pushing block `k` right.
    fn run(&self, k: usize, x0: Vec<f64>) -> Option<Vec<f64>> {
        let nc = self.contacts.len();
        let (mut x, mut f, mut m) = (x0, vec![0.0; nc], vec![0.0; nc]);
        let mut cur = self.merit(k, &x, &f, &m);
        let mut delta = 0.25;
        for _ in 0..MAX_STEPS {
            let Some((nx, nf, nm)) = self.step(k, &x, &f, delta) else {
                delta *= 0.25;
                if delta < 1e-12 {
                    break;
                }
                continue;
            };
            let next = self.merit(k, &nx, &nf, &nm);
            if next < cur - 1e-13 {
                let gain = cur - next;
                x = nx;
                f = nf;
                m = nm;
                cur = next;
                if gain < 1e-12 {
                    break;
                }
                delta = (delta * 2.0).min(0.5);
            } else {
                delta *= 0.25;
                if delta < 1e-12 {
                    break;
                }
            }
        }
        (self.violation(&x, &f, &m) < 1e-8).then_some(x)
    }
}

fn to_stack(s: &CombinatorialStructure, x: &[f64]) -> Stack {
    Stack::new(
        x.iter()
            .enumerate()
            .map(|(i, &xi)| Block::new(xi, s.level_of(i) as u32))
            .collect(),
    )
}

/// Multi-start SLP over block positions and contact forces. Every block
/// that is rightmost in its level is tried as the one pushed out.
pub fn optimize_structure(s: &CombinatorialStructure, opts: SearchOptions) -> Result<StructureOptimum> {
    let slp = Slp::new(s);
    let starts = s.starts();
    let mut best: Option<StructureOptimum> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for (l, &k) in s.levels.iter().enumerate() {
        let principal = starts[l] + k - 1;
        for _ in 0..opts.starts.max(1) {
            let x0 = start_point(s, &mut rng, opts.perturbation);
            let Some(x) = slp.run(principal, x0) else {
                continue;
            };
            let stack = to_stack(s, &x);
            let ok = is_balanced(&stack, Mode::Float { tol: 1e-7 })
                .map(|r| r.balanced)
                .unwrap_or(false);
            if !ok {
                continue;
            }
            let overhang = x.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) + 1.0;
            if best.as_ref().is_none_or(|b| overhang > b.overhang + 1e-12) {
                best = Some(StructureOptimum { overhang, stack });
            }
        }
    }
    best.ok_or(Error::InfeasibleStructure)
}

/// D(n) by trying every structure; ties keep the earlier structure.
pub fn exhaustive_d(n: usize, opts: SearchOptions) -> Result<(f64, Stack, CombinatorialStructure)> {
    let mut best: Option<(f64, Stack, CombinatorialStructure)> = None;
    for s in enumerate_structures(n)? {
        if let Ok(o) = optimize_structure(&s, opts) {
            if best.as_ref().is_none_or(|b| o.overhang > b.0 + 1e-9) {
                best = Some((o.overhang, o.stack, s));
            }
        }
    }
    best.ok_or(Error::InfeasibleStructure)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_structures(1).unwrap().len(), 1);
        let two = enumerate_structures(2).unwrap();
        // side by side on the table, a chain
        assert!(two.iter().any(|s| s.levels == vec![2]));
        assert!(two.iter().any(|s| s.levels == vec![1, 1]));
        let three = enumerate_structures(3).unwrap();
        let tri = CombinatorialStructure {
            levels: vec![1, 2],
            below: vec![vec![Lower::Table], vec![Lower::Block(0)], vec![Lower::Block(0)]],
        };
        assert!(three.contains(&tri));
        assert!(matches!(enumerate_structures(8), Err(Error::TooManyBlocks { .. })));
    }

    #[test]
    fn structures_are_distinct() {
        for n in 1..=5 {
            let mut all = enumerate_structures(n).unwrap();
            let len = all.len();
            all.sort();
            all.dedup();
            assert_eq!(all.len(), len);
        }
    }

    #[test]
    fn chain_reaches_harmonic() {
        let chain = CombinatorialStructure {
            levels: vec![1, 1, 1],
            below: vec![vec![Lower::Table], vec![Lower::Block(0)], vec![Lower::Block(1)]],
        };
        let o = optimize_structure(&chain, SearchOptions::default()).unwrap();
        assert!((o.overhang - 11.0 / 12.0).abs() < 1e-6, "{}", o.overhang);
    }

    #[test]
    fn triangle_reaches_one() {
        let tri = CombinatorialStructure {
            levels: vec![1, 2],
            below: vec![vec![Lower::Table], vec![Lower::Block(0)], vec![Lower::Block(0)]],
        };
        let o = optimize_structure(&tri, SearchOptions::default()).unwrap();
        assert!((o.overhang - 1.0).abs() < 1e-6, "{}", o.overhang);
    }
}

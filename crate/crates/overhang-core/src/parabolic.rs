//! Parabolic d-stacks: slabs of alternating r- and (r−1)-rows piled from
//! r = 2 up to r = d on a single block, their explicit balancing forces,
//! and the modified stacks that can be laid one block at a time.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{Block, Stack};
use crate::scalar::{rational, rational_int, Rational};

/// Rows of an r-slab from the bottom up: r, r−1, r, ..., r.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slab {
    pub r: u32,
    pub rows: Vec<u32>,
    pub base_level: u32,
}

impl Slab {
    pub fn len(&self) -> usize {
        self.rows.iter().map(|&w| w as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Blocks bottom row first, each row left to right, centered on x = 0.
    pub fn blocks(&self) -> Vec<Block> {
        let mut out = Vec::with_capacity(self.len());
        for (t, &w) in self.rows.iter().enumerate() {
            push_row(w, self.base_level + t as u32, &mut out);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlabForceSchedule {
    pub r: u32,
    /// Force at each upper edge of each block in the top row.
    pub g: Rational,
    /// Force at each lower edge of the row underneath.
    pub g_prime: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicStack {
    pub d: u32,
    pub stack: Stack,
    /// Slab d first, down to slab 2.
    pub schedule: Vec<SlabForceSchedule>,
}

/// A vertical force between two blocks, or between a block and the outside
/// world when one side is `None`. Pushes `upper` up and `lower` down.
#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub upper: Option<usize>,
    pub lower: Option<usize>,
    pub position: Rational,
    pub magnitude: Rational,
}

fn push_row(w: u32, level: u32, out: &mut Vec<Block>) {
    for j in 0..w as i64 {
        out.push(Block::exact(rational(2 * j - w as i64, 2), level));
    }
}

fn slab_rows(r: u32) -> Vec<u32> {
    (0..2 * r - 3).map(|t| if t % 2 == 0 { r } else { r - 1 }).collect()
}

pub fn build_slab(r: u32, base_level: u32) -> Result<Slab> {
    if r < 2 {
        return Err(Error::InvalidParameter("a slab needs r >= 2".into()));
    }
    Ok(Slab {
        r,
        rows: slab_rows(r),
        base_level,
    })
}

/// Number of blocks in a parabolic d-stack.
pub fn parabolic_size(d: u32) -> u64 {
    let d = d as u64;
    d * (d - 1) * (2 * d - 1) / 3 + 1
}

/// g(r) = (1/r) Σ_{i=r}^{d−1} i².
pub fn closed_form_g(d: u32, r: u32) -> Rational {
    let s: i64 = (r as i64..d as i64).map(|i| i * i).sum();
    rational(s, r as i64)
}

pub fn force_schedule(d: u32) -> Result<Vec<SlabForceSchedule>> {
    if d < 2 {
        return Err(Error::InvalidParameter("a parabolic stack needs d >= 2".into()));
    }
    let mut out = Vec::with_capacity(d as usize - 1);
    let mut g = Rational::zero();
    for r in (2..=d).rev() {
        let gp = rational(r as i64, r as i64 - 1) * &g + rational_int(r as i64 - 1);
        debug_assert_eq!(g, closed_form_g(d, r));
        out.push(SlabForceSchedule {
            r,
            g: g.clone(),
            g_prime: gp.clone(),
        });
        g = gp;
    }
    Ok(out)
}

/// Row index lists per level, bottom first, for a stack built by `parabolic_blocks`.
fn parabolic_blocks(d: u32) -> (Vec<Block>, Vec<Vec<usize>>) {
    let mut widths = vec![1u32, 2];
    for r in 3..=d {
        widths.extend(slab_rows(r));
    }
    let mut blocks = Vec::new();
    let mut rows = Vec::with_capacity(widths.len());
    for (level, &w) in widths.iter().enumerate() {
        let start = blocks.len();
        push_row(w, level as u32, &mut blocks);
        rows.push((start..blocks.len()).collect());
    }
    (blocks, rows)
}

pub fn build_parabolic(d: u32) -> Result<ParabolicStack> {
    let schedule = force_schedule(d)?;
    let (blocks, _) = parabolic_blocks(d);
    Ok(ParabolicStack {
        d,
        stack: Stack::new(blocks).named("parabolic"),
        schedule,
    })
}

/// Splits a force at edge `j` of a row of `w` blocks between the blocks that
/// share it: whole to an end block, half to each neighbor otherwise.
fn spread(upper: Option<usize>, row: &[usize], j: usize, pos: &Rational, mag: &Rational, out: &mut Vec<Load>) {
    let w = row.len();
    let targets: Vec<usize> = if j == 0 {
        vec![row[0]]
    } else if j == w {
        vec![row[w - 1]]
    } else {
        vec![row[j - 1], row[j]]
    };
    let share = mag / rational_int(targets.len() as i64);
    for t in targets {
        out.push(Load {
            upper,
            lower: Some(t),
            position: pos.clone(),
            magnitude: share.clone(),
        });
    }
}

/// Forces inside an s-slab whose top row already carries (s−1)f at every
/// upper edge. `grid` lists the rows top first. Returns the upward forces
/// its bottom row needs as (block, position, magnitude).
fn assign(s: usize, f: &Rational, grid: &[Vec<usize>], out: &mut Vec<Load>) -> Vec<(usize, Rational, Rational)> {
    let one = Rational::one();
    if s == 2 {
        let v = f * rational_int(2) + &one;
        return vec![
            (grid[0][0], rational(-1, 2), v.clone()),
            (grid[0][1], rational(1, 2), v),
        ];
    }
    let r = s - 1;
    let ri = r as i64;
    let c = |j: usize| rational(2 * j as i64 - ri, 2);
    let is_end = |j: usize| j == 0 || j == r;
    let bottom = 2 * r - 2;

    // top row: split each 2rf+1 into the inner slab's share and a column
    let mut column = Vec::with_capacity(r + 1);
    for j in 0..=r {
        let (s1, s2) = if is_end(j) {
            (f * rational_int(ri - 1), f * rational_int(ri + 1) + &one)
        } else {
            (f * rational_int(2 * (ri - 1)), f * rational_int(2) + &one)
        };
        let top = Some(grid[0][j]);
        spread(top, &grid[1], j, &c(j), &s1, out);
        spread(top, &grid[1], j, &c(j), &s2, out);
        column.push(s2);
    }

    // columns pass straight down; added end blocks add their weight
    for t in 1..bottom {
        for (j, p) in column.iter_mut().enumerate() {
            if t % 2 == 1 {
                let row = &grid[t];
                let uppers: Vec<usize> = if j == 0 {
                    vec![row[0]]
                } else if j == r {
                    vec![row[r - 1]]
                } else {
                    vec![row[j - 1], row[j]]
                };
                let share = &*p / rational_int(uppers.len() as i64);
                for u in uppers {
                    out.push(Load {
                        upper: Some(u),
                        lower: Some(grid[t + 1][j]),
                        position: c(j),
                        magnitude: share.clone(),
                    });
                }
            } else {
                if is_end(j) {
                    *p += &one;
                }
                spread(Some(grid[t][j]), &grid[t + 1], j, &c(j), p, out);
            }
        }
    }

    let inner: Vec<Vec<usize>> = (1..bottom)
        .map(|t| if t % 2 == 1 { grid[t].clone() } else { grid[t][1..r].to_vec() })
        .collect();
    let below = &grid[bottom];
    for (i, (u, pos, mag)) in assign(r, f, &inner, out).into_iter().enumerate() {
        let targets = if i == 0 {
            vec![below[1]]
        } else if i == r - 1 {
            vec![below[r - 1]]
        } else {
            vec![below[i], below[i + 1]]
        };
        let share = &mag / rational_int(targets.len() as i64);
        for t in targets {
            out.push(Load {
                upper: Some(u),
                lower: Some(t),
                position: pos.clone(),
                magnitude: share.clone(),
            });
        }
    }

    let sf = f * rational_int(ri + 1);
    (0..=r)
        .map(|j| {
            let m = if is_end(j) {
                &sf + rational_int(ri)
            } else {
                (&sf + rational_int(ri)) * rational_int(2)
            };
            (below[j], c(j), m)
        })
        .collect()
}

/// Every block in force and moment equilibrium under `loads` plus its own
/// unit weight, all forces nonnegative and inside the touching spans.
pub fn loads_balance(stack: &Stack, loads: &[Load]) -> bool {
    let xs: Vec<Rational> = match stack.exact_geometry() {
        Ok(g) => g.xs,
        Err(_) => return false,
    };
    let n = xs.len();
    let mut force = vec![-Rational::one(); n];
    let half = rational(1, 2);
    let mut moment: Vec<Rational> = xs.iter().map(|x| -(x + &half)).collect();
    let inside = |b: usize, p: &Rational| *p >= xs[b] && *p <= &xs[b] + Rational::one();
    for l in loads {
        if l.magnitude.is_negative() {
            return false;
        }
        if let (Some(u), Some(d)) = (l.upper, l.lower) {
            if stack.blocks[u].level != stack.blocks[d].level + 1 {
                return false;
            }
        }
        for (b, sign) in [(l.upper, 1i64), (l.lower, -1)] {
            if let Some(b) = b {
                if b >= n || !inside(b, &l.position) {
                    return false;
                }
                let m = &l.magnitude * rational_int(sign);
                moment[b] += &m * &l.position;
                force[b] += m;
            }
        }
    }
    force.iter().chain(&moment).all(Zero::is_zero)
}

fn top_down(rows: &[Vec<usize>]) -> Vec<Vec<usize>> {
    rows.iter().rev().cloned().collect()
}

/// The forces built by induction on r for a lone slab loaded with g at each
/// upper edge of its top row, plus the stack they act on.
pub fn slab_forces(slab: &Slab, g: &Rational) -> Result<(Stack, Vec<Load>)> {
    if slab.r < 2 || g.is_negative() {
        return Err(Error::InvalidParameter("slab needs r >= 2 and g >= 0".into()));
    }
    let blocks = slab.blocks();
    let mut rows = Vec::new();
    let mut start = 0;
    for &w in &slab.rows {
        rows.push((start..start + w as usize).collect::<Vec<_>>());
        start += w as usize;
    }
    let grid = top_down(&rows);
    let f = g / rational_int(slab.r as i64 - 1);
    let mut loads = Vec::new();
    for &b in &grid[0] {
        let x = blocks[b].exact.clone().expect("slab blocks are exact");
        for p in [x.clone(), x + Rational::one()] {
            loads.push(Load {
                upper: None,
                lower: Some(b),
                position: p,
                magnitude: g.clone(),
            });
        }
    }
    for (b, p, m) in assign(slab.r as usize, &f, &grid, &mut loads) {
        loads.push(Load {
            upper: Some(b),
            lower: None,
            position: p,
            magnitude: m,
        });
    }
    Ok((Stack::new(blocks), loads))
}

/// Builds the inductive force assignment for `slab` under top load `g` and
/// checks every block's equilibrium along with the g′ pattern underneath.
pub fn verify_slab_balance(slab: &Slab, g: &Rational) -> bool {
    let Ok((stack, loads)) = slab_forces(slab, g) else {
        return false;
    };
    let r = slab.r as i64;
    let gp = rational(r, r - 1) * g + rational_int(r - 1);
    let bottom: Vec<&Load> = loads.iter().filter(|l| l.lower.is_none()).collect();
    let pattern = bottom.iter().enumerate().all(|(i, l)| {
        let end = i == 0 || i + 1 == bottom.len();
        l.magnitude == if end { gp.clone() } else { &gp * rational_int(2) }
    });
    bottom.len() == slab.r as usize && pattern && loads_balance(&stack, &loads)
}

/// Forces for a whole parabolic stack from the schedule, slab by slab, with
/// the base block resting on the table edge.
pub fn schedule_forces(p: &ParabolicStack) -> Result<Vec<Load>> {
    let (_, rows) = parabolic_blocks(p.d);
    let mut loads = Vec::new();
    let mut top = rows.len();
    let mut carried: Vec<(usize, Rational, Rational)> = Vec::new();
    for sched in &p.schedule {
        let r = sched.r as usize;
        let first = top - (2 * r - 3);
        let grid = top_down(&rows[first..top]);
        // the slab above lands on the top row's edges
        for (i, (u, pos, mag)) in carried.drain(..).enumerate() {
            spread(Some(u), &grid[0], i, &pos, &mag, &mut loads);
        }
        let f = &sched.g / rational_int(r as i64 - 1);
        carried = assign(r, &f, &grid, &mut loads);
        top = first;
    }
    let base = rows[0][0];
    let mut total = Rational::one();
    for (u, pos, mag) in carried {
        total += &mag;
        loads.push(Load {
            upper: Some(u),
            lower: Some(base),
            position: pos,
            magnitude: mag,
        });
    }
    loads.push(Load {
        upper: Some(base),
        lower: None,
        position: Rational::zero(),
        magnitude: total,
    });
    Ok(loads)
}

/// Balance of the whole stack certified by the explicit schedule forces.
pub fn certify_by_schedule(p: &ParabolicStack) -> bool {
    let recurrence = p.schedule.first().is_some_and(|s| s.g.is_zero())
        && p.schedule.windows(2).all(|w| w[1].g == w[0].g_prime);
    recurrence
        && schedule_forces(p)
            .map(|l| loads_balance(&p.stack, &l))
            .unwrap_or(false)
}

/// The parabolic stack without its base block, moved half a block left, and
/// an order in which its blocks can be laid: row by row from the bottom,
/// center outward, left before right.
pub fn build_modified_parabolic(d: u32) -> Result<(Stack, Vec<usize>)> {
    if d < 2 {
        return Err(Error::InvalidParameter("a parabolic stack needs d >= 2".into()));
    }
    let (blocks, rows) = parabolic_blocks(d);
    let shift = rational(-1, 2);
    let moved: Vec<Block> = blocks[1..]
        .iter()
        .map(|b| Block::exact(b.exact.clone().unwrap() + &shift, b.level - 1))
        .collect();
    let mut order = Vec::with_capacity(moved.len());
    for row in &rows[1..] {
        let mut idx: Vec<usize> = row.iter().map(|&i| i - 1).collect();
        // row center sits at x = −½, so a block's offset is |x + 1|
        idx.sort_by_key(|&i| {
            let x = moved[i].exact.clone().unwrap();
            ((&x + Rational::one()).abs(), x)
        });
        order.extend(idx);
    }
    Ok((Stack::new(moved).named("modified-parabolic"), order))
}

/// The stack on the blocks of `order[..k]`, in that order.
pub fn laid_prefix(stack: &Stack, order: &[usize], k: usize) -> Stack {
    Stack::new(order[..k].iter().map(|&i| stack.blocks[i].clone()).collect())
}

/// Smallest d whose stack fits in n blocks with the next one not fitting.
pub fn depth_for_blocks(n: u64) -> Result<u32> {
    if n < 1 {
        return Err(Error::InvalidParameter("need at least one block".into()));
    }
    let mut d = 1u32;
    while (d as u64) * (d as u64 + 1) * (2 * d as u64 + 1) / 3 < n {
        d += 1;
    }
    Ok(d)
}

/// A stack of exactly n blocks: the deepest parabolic stack that fits, with
/// the rest piled in a column over the center of the top row.
pub fn build_for_blocks(n: u64) -> Result<(u32, Stack)> {
    let d = depth_for_blocks(n)?;
    let (mut blocks, used) = if d == 1 {
        (vec![Block::exact(rational(-1, 2), 0)], 1)
    } else {
        (parabolic_blocks(d).0, parabolic_size(d))
    };
    let mut level = blocks.iter().map(|b| b.level).max().unwrap() + 1;
    for _ in used..n {
        blocks.push(Block::exact(rational(-1, 2), level));
        level += 1;
    }
    Ok((d, Stack::new(blocks).named("parabolic-pile")))
}

/// The stack with a (d−1)-row laid centered on top.
pub fn with_top_row(p: &ParabolicStack) -> Stack {
    let mut blocks = p.stack.blocks.clone();
    let level = blocks.iter().map(|b| b.level).max().unwrap() + 1;
    push_row(p.d - 1, level, &mut blocks);
    Stack::new(blocks).named("parabolic-capped")
}

/// Only the bottom `rows` rows.
pub fn bottom_rows(stack: &Stack, rows: u32) -> Stack {
    Stack::new(stack.blocks.iter().filter(|b| b.level < rows).cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{is_balanced, is_strictly_stable, Mode};
    use crate::model::exact_overhang;

    #[test]
    fn slab_sizes() {
        assert_eq!(build_slab(2, 0).unwrap().len(), 2);
        assert_eq!(build_slab(2, 0).unwrap().rows, vec![2]);
        assert_eq!(build_slab(3, 0).unwrap().len(), 8);
        assert_eq!(build_slab(6, 0).unwrap().len(), 50);
        assert!(build_slab(1, 0).is_err());
    }

    #[test]
    fn stack_sizes() {
        let p = build_parabolic(6).unwrap();
        assert_eq!(p.stack.len(), 111);
        assert_eq!(exact_overhang(&p.stack).unwrap(), rational_int(3));
        assert_eq!(build_parabolic(2).unwrap().stack.len(), 3);
        let p3 = build_parabolic(3).unwrap();
        assert_eq!(p3.stack.len(), 11);
        assert_eq!(exact_overhang(&p3.stack).unwrap(), rational(3, 2));
    }

    #[test]
    fn schedule_for_six() {
        let s = force_schedule(6).unwrap();
        assert_eq!(s[0].g, Rational::zero());
        assert_eq!(s[1].g, rational_int(5));
        assert_eq!(s[2].g, rational(41, 4));
        for d in 2..=50 {
            for sc in force_schedule(d).unwrap() {
                assert_eq!(sc.g, closed_form_g(d, sc.r));
            }
        }
    }

    #[test]
    fn slab_forces_balance() {
        for r in 2..=7 {
            let slab = build_slab(r, 0).unwrap();
            for g in [Rational::zero(), rational(7, 3), rational_int(5)] {
                assert!(verify_slab_balance(&slab, &g), "r {r} g {g}");
            }
        }
    }

    #[test]
    fn two_row_forces() {
        let slab = build_slab(2, 0).unwrap();
        let g = rational(3, 2);
        let (_, loads) = slab_forces(&slab, &g).unwrap();
        let up: Vec<_> = loads.iter().filter(|l| l.lower.is_none()).collect();
        assert_eq!(up.len(), 2);
        assert!(up.iter().all(|l| l.magnitude == rational_int(4)));
        assert_eq!(up[0].position, rational(-1, 2));
    }

    #[test]
    fn tampered_loads_fail() {
        let slab = build_slab(4, 0).unwrap();
        let (stack, mut loads) = slab_forces(&slab, &Rational::one()).unwrap();
        assert!(loads_balance(&stack, &loads));
        loads[3].magnitude += rational(1, 1000);
        assert!(!loads_balance(&stack, &loads));
    }

    #[test]
    fn schedule_certifies_stacks() {
        for d in 2..=7 {
            assert!(certify_by_schedule(&build_parabolic(d).unwrap()), "d {d}");
        }
    }

    #[test]
    fn bottom_rows_unbalanced() {
        let p = build_parabolic(4).unwrap();
        let three = bottom_rows(&p.stack, 3);
        assert!(!is_balanced(&three, Mode::Exact).unwrap().balanced);
        // either block of the fourth row, laid first
        for x in [-1i64, 0] {
            let mut s = three.clone();
            s.blocks.push(Block::exact(rational_int(x), 3));
            assert!(!is_balanced(&s, Mode::Exact).unwrap().balanced);
        }
        let six = bottom_rows(&p.stack, 6);
        assert!(!is_balanced(&six, Mode::Exact).unwrap().balanced);
    }

    #[test]
    fn modified_order() {
        let (s, order) = build_modified_parabolic(2).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(order, vec![0, 1]);
        let (s3, order3) = build_modified_parabolic(3).unwrap();
        assert_eq!(s3.len(), 10);
        assert_eq!(s3.blocks[order3[0]].level, 0);
        // the 3-row goes center, left, right
        let xs: Vec<f64> = order3[2..5].iter().map(|&i| s3.blocks[i].x).collect();
        assert_eq!(xs, vec![-1.0, -2.0, 0.0]);
        for k in 1..=s3.len() {
            let prefix = laid_prefix(&s3, &order3, k);
            assert!(is_balanced(&prefix, Mode::Exact).unwrap().balanced, "prefix {k}");
        }
    }

    #[test]
    fn pile_for_n() {
        assert_eq!(depth_for_blocks(1).unwrap(), 1);
        assert_eq!(depth_for_blocks(3).unwrap(), 2);
        assert_eq!(depth_for_blocks(11).unwrap(), 3);
        assert_eq!(depth_for_blocks(10).unwrap(), 2);
        for n in [4u64, 12, 112, 1000] {
            let (d, s) = build_for_blocks(n).unwrap();
            assert_eq!(s.len() as u64, n);
            assert!(d as f64 / 2.0 > num_traits::Float::cbrt(3.0 * n as f64 / 16.0) - 0.25);
        }
        let (_, s) = build_for_blocks(14).unwrap();
        assert!(is_balanced(&s, Mode::Exact).unwrap().balanced);
    }

    #[test]
    fn capped_stack_is_stable() {
        for d in 2..=4 {
            let p = build_parabolic(d).unwrap();
            assert!(!is_strictly_stable(&p.stack, 1e-3).unwrap());
            assert!(is_strictly_stable(&with_top_row(&p), 1e-3).unwrap(), "d {d}");
        }
    }
}

//! Brick-wall profiles: rows of contiguous blocks, each row shifted half a
//! block against the one below. Coordinates here are in half-block units.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::balance::{is_balanced, min_stabilizing_weight, Mode, Placement};
use crate::error::{Error, Result};
use crate::model::{contacts_of, Block, Lower, PointWeight, Stack};
use crate::scalar::{rational, rational_int, Rational, Scalar};

/// Rows bottom first as (left, right) edges in half-block units. The bottom
/// row is always the single block (−1, 1), centered on the table edge.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BrickWallProfile {
    pub rows: Vec<(i64, i64)>,
    pub symmetric: bool,
    /// Per row: when its leftmost block sticks out on the left, carry a
    /// point weight at that left end instead of using the block as a prop.
    /// Ignored for symmetric profiles.
    pub splitters: Vec<bool>,
}

impl BrickWallProfile {
    /// Symmetric rows (−h, h), h blocks wide.
    pub fn symmetric(widths: &[i64]) -> Self {
        BrickWallProfile {
            rows: widths.iter().map(|&h| (-h, h)).collect(),
            symmetric: true,
            splitters: vec![false; widths.len()],
        }
    }

    pub fn asymmetric(rows: Vec<(i64, i64)>, splitters: Vec<bool>) -> Self {
        BrickWallProfile {
            rows,
            symmetric: false,
            splitters,
        }
    }

    /// Block counts per row, bottom first.
    pub fn widths(&self) -> Vec<i64> {
        self.rows.iter().map(|&(l, r)| (r - l) / 2).collect()
    }

    pub fn levels(&self) -> usize {
        self.rows.len()
    }

    pub fn blocks(&self) -> usize {
        self.widths().iter().sum::<i64>() as usize
    }

    /// Rightmost edge, in blocks.
    pub fn overhang(&self) -> Rational {
        let r = self.rows.iter().map(|r| r.1).max().unwrap_or(0);
        rational(r, 2)
    }

    /// Leftmost block's left edge in block units, per row.
    pub fn leftmost(&self) -> Vec<Rational> {
        self.rows.iter().map(|r| rational(r.0, 2)).collect()
    }

    fn splitter(&self, row: usize) -> bool {
        !self.symmetric && self.splitters.get(row).copied().unwrap_or(false)
    }

    /// Brick-wall shape: contiguous rows, each offset by half a block from
    /// the one beneath, no block hanging clear of the row below.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.rows.first() != Some(&(-1, 1)) {
            return bad("bottom row must be the single block centered on the table edge");
        }
        if self.splitters.len() != self.rows.len() {
            return bad("one splitter flag per row");
        }
        for (i, &(l, r)) in self.rows.iter().enumerate() {
            if r - l < 2 || (r - l) % 2 != 0 {
                return bad("rows hold a whole positive number of blocks");
            }
            if self.symmetric && l != -r {
                return bad("symmetric rows are centered on the table edge");
            }
            if i > 0 {
                let (pl, pr) = self.rows[i - 1];
                if (l - pl) % 2 == 0 || (r - pr) % 2 == 0 {
                    return bad("adjacent rows are offset by half a block");
                }
                if l < pl - 1 || r > pr + 1 {
                    return bad("a block overhangs the row below by more than half");
                }
            }
        }
        Ok(())
    }

    /// The unloaded block stack, exact coordinates.
    pub fn stack(&self) -> Stack {
        let mut blocks = Vec::with_capacity(self.blocks());
        for (i, &(l, r)) in self.rows.iter().enumerate() {
            for xl in (l..r).step_by(2) {
                blocks.push(Block::exact(rational(xl, 2), i as u32));
            }
        }
        Stack::new(blocks)
    }

    /// Index of the first block of each row.
    pub fn row_starts(&self) -> Vec<usize> {
        let mut s = 0;
        self.widths()
            .iter()
            .map(|&w| {
                let here = s;
                s += w as usize;
                here
            })
            .collect()
    }
}

/// The parabolic d-stack as a profile: one block, a 2-row, then slabs of
/// rows r, r − 1, ..., r for r = 3..d.
pub fn parabolic_profile(d: u32) -> Result<BrickWallProfile> {
    if d < 1 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    let mut h = vec![1i64];
    if d >= 2 {
        h.push(2);
    }
    for r in 3..=d as i64 {
        h.extend((0..2 * r - 3).map(|k| if k % 2 == 0 { r } else { r - 1 }));
    }
    Ok(BrickWallProfile::symmetric(&h))
}

/// `constant + slope · w`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine<S> {
    pub constant: S,
    pub slope: S,
}

impl<S: Scalar> Affine<S> {
    pub fn new(constant: S, slope: S) -> Self {
        Affine { constant, slope }
    }

    pub fn zero() -> Self {
        Affine::new(S::zero(), S::zero())
    }

    pub fn at(&self, w: &S) -> S {
        self.constant.clone() + self.slope.clone() * w.clone()
    }

    fn add(&self, o: &Self) -> Self {
        Affine::new(
            self.constant.clone() + o.constant.clone(),
            self.slope.clone() + o.slope.clone(),
        )
    }

    fn sub(&self, o: &Self) -> Self {
        Affine::new(
            self.constant.clone() - o.constant.clone(),
            self.slope.clone() - o.slope.clone(),
        )
    }

    fn scale(&self, k: &S) -> Self {
        Affine::new(self.constant.clone() * k.clone(), self.slope.clone() * k.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    /// Between two blocks, or a block and the table.
    Contact { upper: usize, lower: Lower },
    /// A point weight on top of a block.
    Weight { block: usize },
}

/// One force of a well-behaved assignment: its magnitude and its moment
/// about x = 0, both affine in the total weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WbForce<S> {
    pub carrier: Carrier,
    pub force: Affine<S>,
    pub moment: Affine<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WellBehavedAssignment<S> {
    pub profile: BrickWallProfile,
    pub forces: Vec<WbForce<S>>,
    /// Must all be nonnegative.
    pub constraints: Vec<Affine<S>>,
}

impl<S: Scalar> WellBehavedAssignment<S> {
    /// Total weights meeting every constraint: `lo` up to `hi`, with no
    /// upper end when `hi` is `None`. A prop whose load drifts off its
    /// support as the weight grows gives an upper end.
    pub fn weight_range(&self) -> Option<(S, Option<S>)> {
        let mut lo = S::zero();
        let mut hi: Option<S> = None;
        for c in &self.constraints {
            if c.slope.is_pos() {
                lo = S::max_of(lo, -c.constant.clone() / c.slope.clone());
            } else if c.slope.is_neg() {
                let b = -c.constant.clone() / c.slope.clone();
                hi = Some(match hi {
                    Some(h) => S::min_of(h, b),
                    None => b,
                });
            } else if c.constant.is_neg() {
                return None;
            }
        }
        match &hi {
            Some(h) if (h.clone() - lo.clone()).is_neg() => None,
            _ => Some((lo, hi)),
        }
    }

    /// Smallest total weight meeting every constraint; `None` when no
    /// weight does.
    pub fn min_weight(&self) -> Option<S> {
        self.weight_range().map(|(lo, _)| lo)
    }

    /// (block, position, magnitude) of every point weight at total weight w.
    pub fn point_weights(&self, w: &S) -> Vec<(usize, S, S)> {
        self.forces
            .iter()
            .filter_map(|f| match f.carrier {
                Carrier::Weight { block } => {
                    let m = f.force.at(w);
                    let p = if m.is_negligible() {
                        S::zero()
                    } else {
                        f.moment.at(w) / m.clone()
                    };
                    Some((block, p, m))
                }
                Carrier::Contact { .. } => None,
            })
            .collect()
    }

    pub fn most_negative(&self, w: &S) -> S {
        self.constraints
            .iter()
            .map(|c| c.at(w))
            .fold(S::zero(), S::min_of)
    }
}

impl WellBehavedAssignment<Rational> {
    /// The profile's blocks loaded with the (nonzero) point weights at w.
    pub fn loaded_stack(&self, w: &Rational) -> Stack {
        let weights = self
            .point_weights(w)
            .into_iter()
            .filter(|(_, _, m)| m.is_pos())
            .map(|(b, p, m)| PointWeight::exact(b, p, m))
            .collect();
        self.profile.stack().with_weights(weights)
    }

    /// The assignment at w as a vector for the full balance LP of
    /// `loaded_stack(w)`: two endpoint forces per contact, in contact order.
    pub fn balance_witness(&self, w: &Rational) -> Result<Vec<Rational>> {
        let stack = self.loaded_stack(w);
        let g = stack.exact_geometry()?;
        let contacts = contacts_of(&g)?;
        let mut x = Vec::with_capacity(2 * contacts.len());
        for c in &contacts {
            let f = self
                .forces
                .iter()
                .find(|f| f.carrier == Carrier::Contact { upper: c.upper, lower: c.lower })
                .ok_or_else(|| Error::ConversionFailed("contact without a force".into()))?;
            let (ff, mm) = (f.force.at(w), f.moment.at(w));
            let len = c.b.clone() - c.a.clone();
            x.push((ff.clone() * c.b.clone() - mm.clone()) / len.clone());
            x.push((mm - ff * c.a.clone()) / len);
        }
        Ok(x)
    }
}

/// Affine forces for every block of a brick-wall profile, derived row by row
/// from the table: each block passes on whatever its support exceeds its own
/// weight. A block with both upper corners in use (an upper block centered
/// there, or a point weight) splits its load between them; a block with
/// just one upper neighbor props it with a single force inside their
/// contact. On the top row both corners carry point weights.
pub fn propagate_well_behaved<S: Scalar>(profile: &BrickWallProfile) -> Result<WellBehavedAssignment<S>> {
    profile.validate()?;
    let rows = &profile.rows;
    let starts = profile.row_starts();
    let n = profile.blocks();
    let half = S::half();
    let mut support: Vec<(Affine<S>, Affine<S>)> = vec![(Affine::zero(), Affine::zero()); n];
    let mut forces = Vec::new();
    let mut constraints = Vec::new();
    // the table pushes w up at x = 0
    let table_force = Affine::new(S::zero(), S::one());
    support[0] = (table_force.clone(), Affine::zero());
    forces.push(WbForce {
        carrier: Carrier::Contact {
            upper: 0,
            lower: Lower::Table,
        },
        force: table_force,
        moment: Affine::zero(),
    });
    for (li, &(l, r)) in rows.iter().enumerate() {
        let top = li + 1 == rows.len();
        let upper_row = rows.get(li + 1).copied();
        // upper block centered at half-unit edge e, if any
        let upper_at = |e: i64| -> Option<usize> {
            let (ul, ur) = upper_row?;
            (ul < e && e < ur).then(|| starts[li + 1] + ((e - 1 - ul) / 2) as usize)
        };
        for (j, xl) in (l..r).step_by(2).enumerate() {
            let b = starts[li] + j;
            let (f_in, m_in) = support[b].clone();
            if f_in.slope.is_negligible() && f_in.constant.is_negligible() {
                return Err(Error::NotWellBehaved { level: li, block: b });
            }
            let x = S::from_ratio(xl, 2);
            let f = f_in.sub(&Affine::new(S::one(), S::zero()));
            let m = m_in.sub(&Affine::new(x.clone() + half.clone(), S::zero()));
            // corners in use, left then right
            let mut slots: Vec<(i64, Option<usize>)> = Vec::new();
            for e in [xl, xl + 2] {
                match upper_at(e) {
                    Some(u) => slots.push((e, Some(u))),
                    None if top => slots.push((e, None)),
                    None if e == l && profile.splitter(li) => slots.push((e, None)),
                    None => {}
                }
            }
            match slots.len() {
                2 => {
                    let right = m.sub(&f.scale(&x));
                    let left = f.sub(&right);
                    for ((e, u), v) in slots.into_iter().zip([left, right]) {
                        let pos = S::from_ratio(e, 2);
                        let mv = v.scale(&pos);
                        constraints.push(v.clone());
                        let carrier = match u {
                            Some(u) => {
                                support[u].0 = support[u].0.add(&v);
                                support[u].1 = support[u].1.add(&mv);
                                Carrier::Contact {
                                    upper: u,
                                    lower: Lower::Block(b),
                                }
                            }
                            None => Carrier::Weight { block: b },
                        };
                        forces.push(WbForce {
                            carrier,
                            force: v,
                            moment: mv,
                        });
                    }
                }
                1 => {
                    let (e, u) = slots[0];
                    let Some(u) = u else {
                        return Err(Error::NotWellBehaved { level: li, block: b });
                    };
                    let c = S::from_ratio(e, 2);
                    let (lo, hi) = if e == xl {
                        (c.clone(), c + half.clone())
                    } else {
                        (c.clone() - half.clone(), c)
                    };
                    constraints.push(f.clone());
                    constraints.push(m.sub(&f.scale(&lo)));
                    constraints.push(f.scale(&hi).sub(&m));
                    support[u].0 = support[u].0.add(&f);
                    support[u].1 = support[u].1.add(&m);
                    forces.push(WbForce {
                        carrier: Carrier::Contact {
                            upper: u,
                            lower: Lower::Block(b),
                        },
                        force: f,
                        moment: m,
                    });
                }
                _ => return Err(Error::NotWellBehaved { level: li, block: b }),
            }
        }
    }
    Ok(WellBehavedAssignment {
        profile: profile.clone(),
        forces,
        constraints,
    })
}

/// Smallest total weight for which the well-behaved forces are all
/// nonnegative; infinity when none is.
pub fn min_weight_for_profile(profile: &BrickWallProfile) -> Result<f64> {
    let a = propagate_well_behaved::<f64>(profile)?;
    Ok(a.min_weight().unwrap_or(f64::INFINITY))
}

/// The same, exactly; `None` when no weight works.
pub fn exact_min_weight(profile: &BrickWallProfile) -> Result<Option<Rational>> {
    Ok(propagate_well_behaved::<Rational>(profile)?.min_weight())
}

/// Profiles one move away, in a fixed order: widen or narrow a row by a
/// block per side (symmetric) or per end, insert or delete a pair of rows,
/// add or drop the top row, and flip a row's splitter flag.
pub fn neighbors(p: &BrickWallProfile) -> Vec<BrickWallProfile> {
    let mut out = Vec::new();
    let n = p.rows.len();
    let with_rows = |rows: Vec<(i64, i64)>, splitters: Vec<bool>| BrickWallProfile {
        rows,
        symmetric: p.symmetric,
        splitters,
    };
    let ends: &[(i64, i64)] = if p.symmetric {
        &[(-2, 2), (2, -2)]
    } else {
        &[(-2, 0), (2, 0), (0, 2), (0, -2)]
    };
    for i in 1..n {
        for &(dl, dr) in ends {
            let mut rows = p.rows.clone();
            rows[i] = (rows[i].0 + dl, rows[i].1 + dr);
            out.push(with_rows(rows, p.splitters.clone()));
        }
    }
    let steps: &[(i64, i64)] = if p.symmetric {
        &[(-1, 1), (1, -1)]
    } else {
        &[(-1, 1), (1, -1), (-1, -1), (1, 1)]
    };
    for i in 1..=n {
        let (l, r) = p.rows[i - 1];
        for &(dl, dr) in steps {
            let mut rows = p.rows.clone();
            rows.splice(i..i, [(l + dl, r + dr), (l, r)]);
            let mut sp = p.splitters.clone();
            sp.splice(i..i, [false, p.splitters[i - 1]]);
            out.push(with_rows(rows, sp));
        }
    }
    for i in 1..n.saturating_sub(1) {
        if p.rows[i + 1] == p.rows[i - 1] {
            let mut rows = p.rows.clone();
            rows.drain(i..i + 2);
            let mut sp = p.splitters.clone();
            sp.drain(i..i + 2);
            out.push(with_rows(rows, sp));
        }
    }
    let (l, r) = p.rows[n - 1];
    for &(dl, dr) in steps {
        let mut rows = p.rows.clone();
        rows.push((l + dl, r + dr));
        let mut sp = p.splitters.clone();
        sp.push(false);
        out.push(with_rows(rows, sp));
    }
    if n > 1 {
        out.push(with_rows(p.rows[..n - 1].to_vec(), p.splitters[..n - 1].to_vec()));
    }
    if !p.symmetric {
        for i in 0..n {
            let mut sp = p.splitters.clone();
            sp[i] = !sp[i];
            out.push(with_rows(p.rows.clone(), sp));
        }
    }
    out
}

/// Widths 1, 2, 1, 2, 3, 2, 3, 4, ... up to the target: a slowly widening
/// symmetric start.
pub fn slow_widening(target_half: i64) -> BrickWallProfile {
    let mut h = vec![1];
    while *h.last().unwrap() < target_half {
        let t = *h.last().unwrap();
        h.extend([t + 1, t, t + 1]);
    }
    let end = h.iter().position(|&v| v == target_half).unwrap_or(0);
    h.truncate(end + 1);
    BrickWallProfile::symmetric(&h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalSearchOutcome {
    pub profile: BrickWallProfile,
    pub weight: f64,
    /// Weight after each accepted move, starting with the seed's.
    pub trace: Vec<f64>,
}

fn target_half_units(target: &Rational) -> Result<i64> {
    let t = target.clone() * rational_int(2);
    match t.as_count() {
        Some(v) if v >= 1 => Ok(v as i64),
        _ => Err(Error::InvalidParameter("target overhang must be a positive multiple of ½".into())),
    }
}

fn reaches(p: &BrickWallProfile, t: i64) -> bool {
    p.rows.iter().map(|r| r.1).max() == Some(t)
}

/// Weight of a profile for the search: infinite unless it is a valid
/// brick wall with exactly the target overhang.
pub fn profile_weight(p: &BrickWallProfile, target_half: i64) -> f64 {
    if !reaches(p, target_half) || p.validate().is_err() {
        return f64::INFINITY;
    }
    min_weight_for_profile(p).unwrap_or(f64::INFINITY)
}

/// First-improvement descent over `neighbors`, lightest well-behaved loaded
/// profile with the given overhang.
pub fn local_search_brickwall(
    target: &Rational,
    symmetric: bool,
    seed: Option<BrickWallProfile>,
) -> Result<LocalSearchOutcome> {
    let t = target_half_units(target)?;
    let mut cur = match seed {
        Some(s) => s,
        None => slow_widening(t),
    };
    cur.symmetric = symmetric;
    if cur.splitters.len() != cur.rows.len() {
        cur.splitters = vec![false; cur.rows.len()];
    }
    let mut best = profile_weight(&cur, t);
    if !best.is_finite() {
        return Err(Error::InvalidParameter("seed profile is not stabilizable at the target".into()));
    }
    let mut trace = vec![best];
    let mut seen: BTreeMap<BrickWallProfile, f64> = BTreeMap::new();
    'outer: loop {
        for q in neighbors(&cur) {
            let v = *seen.entry(q.clone()).or_insert_with(|| profile_weight(&q, t));
            if v < best - 1e-9 * best.max(1.0) {
                cur = q;
                best = v;
                trace.push(v);
                continue 'outer;
            }
        }
        break;
    }
    Ok(LocalSearchOutcome {
        profile: cur,
        weight: best,
        trace,
    })
}

/// The symmetric optimum, then an asymmetric search from its shape with
/// every left-protruding block made a splitter.
pub fn asymmetric_from_symmetric(target: &Rational) -> Result<(LocalSearchOutcome, LocalSearchOutcome)> {
    let sym = local_search_brickwall(target, true, None)?;
    let mut seed = sym.profile.clone();
    seed.symmetric = false;
    seed.splitters = vec![true; seed.rows.len()];
    let asym = local_search_brickwall(target, false, Some(seed))?;
    Ok((sym, asym))
}

/// Extra point weight the top row needs to balance the bare stack; infinity
/// when no amount suffices.
pub fn top_weight_needed(p: &BrickWallProfile) -> f64 {
    let stack = p.stack();
    let top = p.row_starts()[p.rows.len() - 1];
    let blocks = (top..p.blocks()).collect();
    match min_stabilizing_weight(&stack, &Placement::UpperEdges(blocks)) {
        Ok((w, _)) => w.max(0.0),
        Err(_) => f64::INFINITY,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnloadedOptions {
    pub max_blocks: usize,
    /// Random restarts after the first descent.
    pub rounds: usize,
    /// Random moves per restart.
    pub kick: usize,
    pub seed: u64,
}

impl Default for UnloadedOptions {
    fn default() -> Self {
        UnloadedOptions {
            max_blocks: 95,
            rounds: 200,
            kick: 3,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnloadedOutcome {
    pub profile: BrickWallProfile,
    /// Top weight still missing; zero when the bare stack balances.
    pub missing: f64,
    /// Balance of the bare stack confirmed in exact arithmetic.
    pub exact: bool,
}

fn unloaded_neighbors(h: &[i64]) -> Vec<Vec<i64>> {
    let n = h.len();
    let mut out = Vec::new();
    for i in 1..n {
        for d in [2, -2] {
            let mut g = h.to_vec();
            g[i] += d;
            out.push(g);
        }
    }
    for d in [1, -1, 3, -3] {
        let mut g = h.to_vec();
        g.push(h[n - 1] + d);
        out.push(g);
    }
    if n > 1 {
        out.push(h[..n - 1].to_vec());
    }
    for i in 1..=n {
        for d in [1, -1] {
            let mut g = h.to_vec();
            g.splice(i..i, [h[i - 1] + d, h[i - 1]]);
            out.push(g);
        }
    }
    for i in 1..n.saturating_sub(1) {
        if h[i + 1] == h[i - 1] {
            let mut g = h.to_vec();
            g.remove(i);
            out.push(g);
        }
    }
    for i in 1..n {
        for j in 1..n {
            if i != j {
                let mut g = h.to_vec();
                g[i] += 2;
                g[j] -= 2;
                out.push(g);
            }
        }
    }
    out
}

/// Bare symmetric stacks (no point weights) with the given overhang and at
/// most `max_blocks` blocks. Rows may also step by three half-blocks. The
/// search drives the top weight a stack still lacks to zero, by descent
/// plus random restarts, starting from the loaded optimum capped with two
/// rows.
pub fn search_unloaded(target: &Rational, opts: UnloadedOptions) -> Result<UnloadedOutcome> {
    let t = target_half_units(target)?;
    let loaded = local_search_brickwall(target, true, None)?;
    let mut h = loaded.profile.widths();
    h.extend([t - 1, t]);
    let ok = |g: &[i64]| {
        g.first() == Some(&1)
            && g.iter().all(|&v| v >= 1)
            && g.iter().max() == Some(&t)
            && g.windows(2).all(|p| matches!((p[1] - p[0]).abs(), 1 | 3))
            && g.iter().sum::<i64>() as usize <= opts.max_blocks
    };
    let mut memo: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    let mut eval = |g: &[i64]| -> f64 {
        if !ok(g) {
            return f64::INFINITY;
        }
        *memo
            .entry(g.to_vec())
            .or_insert_with(|| top_weight_needed(&BrickWallProfile::symmetric(g)))
    };
    let descend = |mut h: Vec<i64>, eval: &mut dyn FnMut(&[i64]) -> f64| -> (Vec<i64>, f64) {
        let mut best = eval(&h);
        'outer: while best > 1e-9 {
            for g in unloaded_neighbors(&h) {
                let v = eval(&g);
                if v < best - 1e-9 {
                    h = g;
                    best = v;
                    continue 'outer;
                }
            }
            break;
        }
        (h, best)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (mut h, mut best) = descend(h, &mut eval);
    let mut round = 0;
    let mut exact = false;
    loop {
        if best <= 1e-9 {
            let stack = BrickWallProfile::symmetric(&h).stack();
            exact = is_balanced(&stack, Mode::Exact).map(|r| r.balanced).unwrap_or(false);
            if exact {
                break;
            }
        }
        if round >= opts.rounds {
            break;
        }
        round += 1;
        let mut g = h.clone();
        for _ in 0..opts.kick {
            let nb: Vec<Vec<i64>> = unloaded_neighbors(&g).into_iter().filter(|q| ok(q)).collect();
            if nb.is_empty() {
                break;
            }
            g = nb[(rng.next_u64() % nb.len() as u64) as usize].clone();
        }
        let (g, v) = descend(g, &mut eval);
        if v < best - 1e-9 {
            h = g;
            best = v;
        }
    }
    Ok(UnloadedOutcome {
        profile: BrickWallProfile::symmetric(&h),
        missing: best,
        exact,
    })
}

/// The boundary of a profile as a closed polygon, counterclockwise from the
/// bottom left, with both axes divided by the overhang.
pub fn scaled_outline(p: &BrickWallProfile) -> Result<Vec<(f64, f64)>> {
    if p.rows.is_empty() {
        return Err(Error::EmptyStack);
    }
    let scale = p.overhang().to_float();
    if scale <= 0.0 {
        return Err(Error::InvalidParameter("profile has no overhang".into()));
    }
    let n = p.rows.len();
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(4 * n);
    for (i, &(_, r)) in p.rows.iter().enumerate() {
        pts.push((r as f64 / 2.0, i as f64));
        pts.push((r as f64 / 2.0, (i + 1) as f64));
    }
    for (i, &(l, _)) in p.rows.iter().enumerate().rev() {
        pts.push((l as f64 / 2.0, (i + 1) as f64));
        pts.push((l as f64 / 2.0, i as f64));
    }
    // drop repeated and collinear vertices, cyclically
    let mut out: Vec<(f64, f64)> = Vec::new();
    for pt in pts {
        if out.last() != Some(&pt) {
            out.push(pt);
        }
    }
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    loop {
        let k = out.len();
        let idx = (0..k).find(|&i| {
            let (a, b, c) = (out[(i + k - 1) % k], out[i], out[(i + 1) % k]);
            (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0) == 0.0
        });
        match idx {
            Some(i) if k > 3 => {
                out.remove(i);
            }
            _ => break,
        }
    }
    Ok(out.into_iter().map(|(x, y)| (x / scale, y / scale)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::balance_lp_of;

    fn sym(h: &[i64]) -> BrickWallProfile {
        BrickWallProfile::symmetric(h)
    }

    #[test]
    fn single_block_needs_its_own_weight() {
        let a = propagate_well_behaved::<Rational>(&sym(&[1])).unwrap();
        assert_eq!(a.min_weight(), Some(rational_int(1)));
        let table = &a.forces[0];
        assert_eq!(table.force.slope, rational_int(1));
    }

    #[test]
    fn flat_top_toy_uses_perfect_splitters() {
        // 1, 2, 3: the middle row's blocks each rest on one corner below and
        // hold two corners above
        let p = sym(&[1, 2, 3]);
        let a = propagate_well_behaved::<Rational>(&p).unwrap();
        let w = a.min_weight().unwrap();
        assert!(w >= rational_int(6));
        let onto = |b: usize| {
            a.forces
                .iter()
                .filter(|f| matches!(f.carrier, Carrier::Contact { lower: Lower::Block(l), .. } if l == b))
                .count()
        };
        assert_eq!(onto(0), 2);
        assert_eq!(onto(1), 2);
        assert_eq!(onto(2), 2);
        // hand solution: base splits w − 1 evenly, each middle block keeps
        // one unit and passes (w − 3)/2 on
        let base_up: Vec<_> = a
            .forces
            .iter()
            .filter(|f| matches!(f.carrier, Carrier::Contact { lower: Lower::Block(0), .. }))
            .collect();
        for f in base_up {
            assert_eq!(f.force, Affine::new(rational(-1, 2), rational(1, 2)));
        }
    }

    #[test]
    fn min_weight_is_sharp() {
        for h in [vec![1, 2, 3, 4], vec![1, 2, 3, 2, 3, 4, 3, 4], vec![1, 2, 1, 2, 3, 2, 3]] {
            let a = propagate_well_behaved::<f64>(&sym(&h)).unwrap();
            let w = a.min_weight().unwrap();
            assert!(a.most_negative(&w) >= -1e-9);
            assert!(a.most_negative(&(w - 1e-6)) < 0.0);
        }
    }

    #[test]
    fn witness_satisfies_full_lp() {
        let p = sym(&[1, 2, 3, 2, 3, 4, 3, 4]);
        let a = propagate_well_behaved::<Rational>(&p).unwrap();
        let wstar = a.min_weight().unwrap();
        for extra in [0, 1, 7] {
            let w = wstar.clone() + rational_int(extra);
            let stack = a.loaded_stack(&w);
            let x = a.balance_witness(&w).unwrap();
            let g = stack.exact_geometry().unwrap();
            let lp = balance_lp_of(&g, &contacts_of(&g).unwrap());
            assert!(lp.residuals(&x).iter().all(|r| r.is_negligible()));
            assert!(x.iter().all(|v| !v.is_neg()));
        }
    }

    #[test]
    fn validation() {
        assert!(sym(&[1, 2, 3]).validate().is_ok());
        assert!(sym(&[2]).validate().is_err());
        assert!(sym(&[1, 3]).validate().is_err());
        assert!(sym(&[1, 2, 2]).validate().is_err());
        let a = BrickWallProfile::asymmetric(vec![(-1, 1), (-2, 2), (-3, 1)], vec![false; 3]);
        assert!(a.validate().is_ok());
        assert_eq!(a.blocks(), 5);
    }

    #[test]
    fn outline_of_rectangle() {
        let p = BrickWallProfile {
            rows: vec![(-2, 2); 3],
            symmetric: true,
            splitters: vec![false; 3],
        };
        let o = scaled_outline(&p).unwrap();
        assert_eq!(o, vec![(1.0, 0.0), (1.0, 3.0), (-1.0, 3.0), (-1.0, 0.0)]);
    }

    #[test]
    fn parabolic_profile_matches_stack() {
        for d in 1..=6 {
            let p = parabolic_profile(d).unwrap();
            assert!(p.validate().is_ok());
            assert_eq!(p.blocks() as u64, crate::parabolic::parabolic_size(d));
        }
    }

    #[test]
    fn half_block_target_is_one_block() {
        let o = local_search_brickwall(&rational(1, 2), true, None).unwrap();
        assert_eq!(o.profile.rows, vec![(-1, 1)]);
        assert_eq!(o.weight, 1.0);
    }

    #[test]
    fn neighbors_stay_in_mode() {
        let p = slow_widening(4);
        assert!(neighbors(&p).iter().all(|q| q.symmetric));
        let mut a = p.clone();
        a.symmetric = false;
        let nb = neighbors(&a);
        assert!(nb.iter().any(|q| q.splitters.iter().any(|&s| s)));
        assert!(nb.iter().all(|q| q.splitters.len() == q.rows.len()));
    }
}

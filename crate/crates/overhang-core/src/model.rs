//! Blocks, stacks, contacts and the named stack families.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::scalar::{rational, Rational, Scalar};

/// A unit-length block. `x` is the left edge, `level` the row it sits in.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub x: f64,
    pub level: u32,
    /// Exact left edge, when known.
    pub exact: Option<Rational>,
}

impl Block {
    pub fn new(x: f64, level: u32) -> Self {
        Block {
            x,
            level,
            exact: None,
        }
    }

    pub fn exact(x: Rational, level: u32) -> Self {
        Block {
            x: x.to_float(),
            level,
            exact: Some(x),
        }
    }
}

/// External downward force applied to the upper edge of a block.
#[derive(Debug, Clone, PartialEq)]
pub struct PointWeight {
    pub block: usize,
    pub position: f64,
    pub magnitude: f64,
    /// Exact (position, magnitude), when known.
    pub exact: Option<(Rational, Rational)>,
}

impl PointWeight {
    pub fn new(block: usize, position: f64, magnitude: f64) -> Self {
        PointWeight {
            block,
            position,
            magnitude,
            exact: None,
        }
    }

    pub fn exact(block: usize, position: Rational, magnitude: Rational) -> Self {
        PointWeight {
            block,
            position: position.to_float(),
            magnitude: magnitude.to_float(),
            exact: Some((position, magnitude)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stack {
    pub blocks: Vec<Block>,
    pub weights: Vec<PointWeight>,
    pub name: Option<String>,
    /// Block height, used only for drawing.
    pub height: f64,
}

impl Default for Stack {
    fn default() -> Self {
        Stack {
            blocks: Vec::new(),
            weights: Vec::new(),
            name: None,
            height: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lower {
    Table,
    Block(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactOf<S> {
    pub upper: usize,
    pub lower: Lower,
    pub a: S,
    pub b: S,
}

pub type Contact = ContactOf<f64>;

/// Coordinates of a stack in a chosen number type.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry<S> {
    pub xs: Vec<S>,
    pub levels: Vec<u32>,
    /// (block, position, magnitude)
    pub weights: Vec<(usize, S, S)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPartition {
    pub principal: usize,
    pub support: Vec<usize>,
    pub balancing: Vec<usize>,
}

impl Stack {
    pub fn new(blocks: Vec<Block>) -> Self {
        Stack {
            blocks,
            ..Stack::default()
        }
    }

    pub fn with_weights(mut self, weights: Vec<PointWeight>) -> Self {
        self.weights = weights;
        self
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Block count plus attached point weight.
    pub fn total_weight(&self) -> f64 {
        self.blocks.len() as f64 + self.weights.iter().map(|w| w.magnitude).sum::<f64>()
    }

    /// True when every coordinate carries an exact value.
    pub fn is_exact(&self) -> bool {
        self.blocks.iter().all(|b| b.exact.is_some())
            && self.weights.iter().all(|w| w.exact.is_some())
    }

    pub fn geometry(&self) -> Geometry<f64> {
        Geometry {
            xs: self.blocks.iter().map(|b| b.x).collect(),
            levels: self.blocks.iter().map(|b| b.level).collect(),
            weights: self
                .weights
                .iter()
                .map(|w| (w.block, w.position, w.magnitude))
                .collect(),
        }
    }

    pub fn exact_geometry(&self) -> Result<Geometry<Rational>> {
        let mut xs = Vec::with_capacity(self.blocks.len());
        for (i, b) in self.blocks.iter().enumerate() {
            xs.push(b.exact.clone().ok_or(Error::InexactCoordinates { block: i })?);
        }
        let mut weights = Vec::with_capacity(self.weights.len());
        for w in &self.weights {
            let (p, m) = w
                .exact
                .clone()
                .ok_or(Error::InexactCoordinates { block: w.block })?;
            weights.push((w.block, p, m));
        }
        Ok(Geometry {
            xs,
            levels: self.blocks.iter().map(|b| b.level).collect(),
            weights,
        })
    }

    /// Shift every coordinate by `dx`, keeping exact values exact.
    pub fn translated(&self, dx: &Rational) -> Stack {
        let dxf = dx.to_float();
        let mut s = self.clone();
        for b in &mut s.blocks {
            b.x += dxf;
            if let Some(e) = &mut b.exact {
                *e = e.clone() + dx;
                b.x = e.to_float();
            }
        }
        for w in &mut s.weights {
            w.position += dxf;
            if let Some((p, _)) = &mut w.exact {
                *p = p.clone() + dx;
                w.position = p.to_float();
            }
        }
        s
    }
}

/// Checks the geometric invariants and returns the contacts, ordered by
/// upper block and then left to right.
pub fn contacts_of<S: Scalar>(g: &Geometry<S>) -> Result<Vec<ContactOf<S>>> {
    let n = g.xs.len();
    let mut by_level: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        by_level.entry(g.levels[i]).or_default().push(i);
    }
    for ids in by_level.values_mut() {
        ids.sort_by(|&p, &q| g.xs[p].partial_cmp(&g.xs[q]).expect("comparable coordinates"));
    }
    for (level, ids) in &by_level {
        for w in ids.windows(2) {
            let (p, q) = (w[0], w[1]);
            if (g.xs[p].clone() + S::one() - &g.xs[q]).is_pos() {
                return Err(Error::Overlap {
                    first: p.min(q),
                    second: p.max(q),
                    level: *level,
                });
            }
        }
    }
    for (idx, &(block, ref pos, ref mag)) in g.weights.iter().enumerate() {
        if block >= n {
            return Err(Error::NoSuchBlock { index: idx, block });
        }
        if !(*mag > S::zero()) {
            return Err(Error::NonPositiveWeight { index: idx });
        }
        if *pos < g.xs[block] || *pos > g.xs[block].clone() + S::one() {
            return Err(Error::WeightOffBlock { index: idx, block });
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        let xi = &g.xs[i];
        let level = g.levels[i];
        let mut found = false;
        if level == 0 {
            if *xi < S::zero() {
                let b = S::min_of(xi.clone() + S::one(), S::zero());
                out.push(ContactOf {
                    upper: i,
                    lower: Lower::Table,
                    a: xi.clone(),
                    b,
                });
            }
            continue;
        }
        if let Some(below) = by_level.get(&(level - 1)) {
            // first lower block whose right edge passes xi
            let start = below.partition_point(|&j| !(*xi < g.xs[j].clone() + S::one()));
            for &j in &below[start..] {
                let xj = &g.xs[j];
                if !(*xj < xi.clone() + S::one()) {
                    break;
                }
                found = true;
                out.push(ContactOf {
                    upper: i,
                    lower: Lower::Block(j),
                    a: S::max_of(xi.clone(), xj.clone()),
                    b: S::min_of(xi.clone(), xj.clone()) + S::one(),
                });
            }
        }
        if !found {
            return Err(Error::Unsupported { block: i, level });
        }
    }
    Ok(out)
}

/// Contacts of a stack. Topology is decided exactly when exact coordinates
/// are available.
pub fn contacts(stack: &Stack) -> Result<Vec<Contact>> {
    if stack.is_exact() {
        let g = stack.exact_geometry()?;
        Ok(contacts_of(&g)?
            .into_iter()
            .map(|c| Contact {
                upper: c.upper,
                lower: c.lower,
                a: c.a.to_float(),
                b: c.b.to_float(),
            })
            .collect())
    } else {
        contacts_of(&stack.geometry())
    }
}

pub fn validate(stack: &Stack) -> Result<()> {
    contacts(stack).map(|_| ())
}

pub fn overhang(stack: &Stack) -> Result<f64> {
    if stack.is_empty() {
        return Err(Error::EmptyStack);
    }
    if stack.is_exact() {
        return Ok(exact_overhang(stack)?.to_float());
    }
    Ok(1.0 + stack.blocks.iter().map(|b| b.x).fold(f64::NEG_INFINITY, f64::max))
}

pub fn exact_overhang(stack: &Stack) -> Result<Rational> {
    let g = stack.exact_geometry()?;
    let max = g.xs.into_iter().reduce(Rational::max_of).ok_or(Error::EmptyStack)?;
    Ok(max + Rational::one())
}

fn partition_with<S: Scalar>(g: &Geometry<S>, contacts: &[ContactOf<S>]) -> SupportPartition {
    let n = g.xs.len();
    let mut principal = 0;
    for i in 1..n {
        let better = g.xs[i] > g.xs[principal]
            || (g.xs[i] == g.xs[principal] && g.levels[i] < g.levels[principal]);
        if better {
            principal = i;
        }
    }
    let mut below: Vec<Vec<usize>> = vec![Vec::new(); n];
    for c in contacts {
        if let Lower::Block(j) = c.lower {
            below[c.upper].push(j);
        }
    }
    let mut in_support = vec![false; n];
    let mut stack = vec![principal];
    in_support[principal] = true;
    while let Some(i) = stack.pop() {
        for &j in &below[i] {
            if !in_support[j] {
                in_support[j] = true;
                stack.push(j);
            }
        }
    }
    SupportPartition {
        principal,
        support: (0..n).filter(|&i| in_support[i]).collect(),
        balancing: (0..n).filter(|&i| !in_support[i]).collect(),
    }
}

pub fn support_partition(stack: &Stack) -> Result<SupportPartition> {
    if stack.is_empty() {
        return Err(Error::EmptyStack);
    }
    if stack.is_exact() {
        let g = stack.exact_geometry()?;
        let c = contacts_of(&g)?;
        Ok(partition_with(&g, &c))
    } else {
        let g = stack.geometry();
        let c = contacts_of(&g)?;
        Ok(partition_with(&g, &c))
    }
}

/// Harmonic stack of `n` blocks, bottom block first. Exact coordinates use a
/// common denominator so that large `n` stays cheap.
pub fn make_harmonic(n: usize) -> Result<Stack> {
    if n < 1 {
        return Err(Error::InvalidParameter("harmonic stack needs n >= 1".into()));
    }
    // common denominator 2·lcm(1..n)
    let mut l = BigInt::one();
    for i in 1..=n as u64 {
        let g = num_integer::Integer::gcd(&l, &BigInt::from(i));
        l = l * BigInt::from(i) / g;
    }
    let den = l * 2u32;
    let step = |i: usize| &den / BigInt::from(2 * i as u64);
    // x of the bottom block (block n from the top) is 1/(2n) − 1
    let mut num = step(n) - &den;
    let mut xf = 0.5 / n as f64 - 1.0;
    let mut blocks = Vec::with_capacity(n);
    for level in 0..n {
        let i = n - level;
        blocks.push(Block {
            x: xf,
            level: level as u32,
            exact: Some(Rational::new_raw(num.clone(), den.clone())),
        });
        if i > 1 {
            num += step(i - 1);
            xf += 0.5 / (i - 1) as f64;
        }
    }
    Ok(Stack::new(blocks).named("harmonic"))
}

fn centered_row(r: usize, level: u32, out: &mut Vec<Block>) {
    for j in 0..r {
        out.push(Block::exact(rational(2 * j as i64 - r as i64, 2), level));
    }
}

/// Rows of 1, 2, ..., m blocks from the bottom up, each centered on x = 0.
pub fn make_inverted_triangle(m: usize) -> Result<Stack> {
    if m < 1 {
        return Err(Error::InvalidParameter("triangle needs m >= 1".into()));
    }
    let mut blocks = Vec::new();
    for r in 1..=m {
        centered_row(r, (r - 1) as u32, &mut blocks);
    }
    Ok(Stack::new(blocks).named("inverted-triangle"))
}

/// Rows of 1, ..., m, ..., 1 blocks, each centered on x = 0.
pub fn make_diamond(m: usize) -> Result<Stack> {
    if m < 1 {
        return Err(Error::InvalidParameter("diamond needs m >= 1".into()));
    }
    let mut blocks = Vec::new();
    let widths = (1..=m).chain((1..m).rev());
    for (level, r) in widths.enumerate() {
        centered_row(r, level as u32, &mut blocks);
    }
    Ok(Stack::new(blocks).named("diamond"))
}

/// Rational helper for callers building exact stacks.
pub fn half_integer(twice: i64) -> Rational {
    rational(twice, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: f64, level: u32) -> Block {
        Block::exact(<Rational as Scalar>::from_float(x), level)
    }

    #[test]
    fn straddling_block_has_two_contacts() {
        let s = Stack::new(vec![b(0.0, 0), b(1.0, 0), b(0.5, 1)]);
        let c = contacts(&s).unwrap();
        let up: Vec<_> = c.iter().filter(|c| c.upper == 2).collect();
        assert_eq!(up.len(), 2);
        assert_eq!((up[0].a, up[0].b), (0.5, 1.0));
        assert_eq!((up[1].a, up[1].b), (1.0, 1.5));
        // no table contact for blocks at x >= 0
        assert!(c.iter().all(|c| c.lower != Lower::Table));
    }

    #[test]
    fn lower_and_upper_pair() {
        let s = Stack::new(vec![b(-0.75, 0), b(-0.25, 1)]);
        let c = contacts(&s).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].lower, c[0].a, c[0].b), (Lower::Table, -0.75, 0.0));
        assert_eq!((c[1].lower, c[1].a, c[1].b), (Lower::Block(0), -0.25, 0.25));
    }

    #[test]
    fn unit_distance_is_not_a_contact() {
        let s = Stack::new(vec![b(-1.0, 0), b(-2.0, 0), b(-1.5, 1), b(0.0, 1)]);
        assert_eq!(
            contacts(&s),
            Err(Error::Unsupported { block: 3, level: 1 })
        );
    }

    #[test]
    fn overlap_and_touching() {
        let touching = Stack::new(vec![b(-2.0, 0), b(-1.0, 0)]);
        assert!(validate(&touching).is_ok());
        let overlapping = Stack::new(vec![b(-2.0, 0), b(-1.25, 0)]);
        assert_eq!(
            validate(&overlapping),
            Err(Error::Overlap { first: 0, second: 1, level: 0 })
        );
    }

    #[test]
    fn harmonic_overhang() {
        let h10: f64 = (1..=10).map(|i| 0.5 / i as f64).sum();
        let s = make_harmonic(10).unwrap();
        assert!((overhang(&s).unwrap() - h10).abs() < 1e-12);
        assert_eq!(overhang(&make_harmonic(1).unwrap()).unwrap(), 0.5);
        assert_eq!(exact_overhang(&make_harmonic(2).unwrap()).unwrap(), rational(3, 4));
    }

    #[test]
    fn harmonic_partition_is_all_support() {
        let p = support_partition(&make_harmonic(7).unwrap()).unwrap();
        assert_eq!(p.support.len(), 7);
        assert!(p.balancing.is_empty());
        assert_eq!(p.principal, 6);
    }

    #[test]
    fn inverted_two_triangle_partition() {
        let s = make_inverted_triangle(2).unwrap();
        let p = support_partition(&s).unwrap();
        assert_eq!(p.principal, 2);
        assert_eq!(p.support, vec![0, 2]);
        assert_eq!(p.balancing, vec![1]);
        assert_eq!(overhang(&s).unwrap(), 1.0);
    }

    #[test]
    fn family_sizes() {
        assert_eq!(make_inverted_triangle(3).unwrap().len(), 6);
        assert_eq!(make_diamond(4).unwrap().len(), 16);
        assert_eq!(make_diamond(5).unwrap().len(), 25);
        assert_eq!(make_diamond(1).unwrap().len(), 1);
        assert!(make_harmonic(0).is_err());
    }

    #[test]
    fn translation_keeps_exactness() {
        let s = make_diamond(2).unwrap().translated(&rational(-1, 4));
        assert!(s.is_exact());
        assert_eq!(s.blocks[0].x, -0.75);
    }
}

//! Two-phase simplex on sparse rows, generic over the number type.
//!
//! Problems are `A x = b, x >= 0` with an optional linear objective to
//! minimize. Artificial columns stay in the tableau through phase I so an
//! infeasible system comes back with a Farkas multiplier vector `y`
//! satisfying `yᵀA <= 0` and `yᵀb > 0`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow<S> {
    pub coeffs: Vec<(usize, S)>,
    pub rhs: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem<S> {
    pub num_vars: usize,
    pub rows: Vec<LpRow<S>>,
    /// Minimized when present.
    pub objective: Option<Vec<(usize, S)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    Bland,
    Dantzig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpPoint<S> {
    pub x: Vec<S>,
    pub objective: S,
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Farkas<S> {
    /// One multiplier per row.
    pub y: Vec<S>,
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<S> {
    Optimal(LpPoint<S>),
    Infeasible(Farkas<S>),
    Unbounded,
}

impl<S> LpOutcome<S> {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible(_))
    }
}

fn normalize<S: Scalar>(mut coeffs: Vec<(usize, S)>) -> Vec<(usize, S)> {
    coeffs.sort_by_key(|c| c.0);
    let mut out: Vec<(usize, S)> = Vec::with_capacity(coeffs.len());
    for (j, v) in coeffs {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 = last.1.clone() + v,
            _ => out.push((j, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

impl<S: Scalar> LpProblem<S> {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            num_vars,
            rows: Vec::new(),
            objective: None,
        }
    }

    pub fn add_var(&mut self) -> usize {
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn add_eq(&mut self, coeffs: Vec<(usize, S)>, rhs: S) {
        debug_assert!(coeffs.iter().all(|c| c.0 < self.num_vars));
        self.rows.push(LpRow {
            coeffs: normalize(coeffs),
            rhs,
        });
    }

    /// `coeffs · x <= rhs`; returns the slack variable.
    pub fn add_le(&mut self, mut coeffs: Vec<(usize, S)>, rhs: S) -> usize {
        let s = self.add_var();
        coeffs.push((s, S::one()));
        self.add_eq(coeffs, rhs);
        s
    }

    /// `coeffs · x >= rhs`; returns the surplus variable.
    pub fn add_ge(&mut self, mut coeffs: Vec<(usize, S)>, rhs: S) -> usize {
        let s = self.add_var();
        coeffs.push((s, -S::one()));
        self.add_eq(coeffs, rhs);
        s
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, S)>) {
        self.objective = Some(normalize(coeffs));
    }

    /// `A x − b`, row by row.
    pub fn residuals(&self, x: &[S]) -> Vec<S> {
        self.rows
            .iter()
            .map(|r| {
                let mut acc = -r.rhs.clone();
                for (j, v) in &r.coeffs {
                    acc = acc + v.clone() * &x[*j];
                }
                acc
            })
            .collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LpProblem<T> {
        let conv = |c: &Vec<(usize, S)>| c.iter().map(|(j, v)| (*j, f(v))).collect();
        LpProblem {
            num_vars: self.num_vars,
            rows: self
                .rows
                .iter()
                .map(|r| LpRow {
                    coeffs: conv(&r.coeffs),
                    rhs: f(&r.rhs),
                })
                .collect(),
            objective: self.objective.as_ref().map(conv),
        }
    }
}

impl<S: fmt::Display> fmt::Display for LpProblem<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars {}", self.num_vars)?;
        if let Some(obj) = &self.objective {
            write!(f, "min")?;
            for (j, v) in obj {
                write!(f, " {}*x{}", v, j)?;
            }
            writeln!(f)?;
        }
        for (i, r) in self.rows.iter().enumerate() {
            write!(f, "r{}:", i)?;
            for (j, v) in &r.coeffs {
                write!(f, " {}*x{}", v, j)?;
            }
            writeln!(f, " = {}", r.rhs)?;
        }
        writeln!(f, "bounds x >= 0")
    }
}

pub fn lp_solve<S: Scalar>(p: &LpProblem<S>) -> LpOutcome<S> {
    let rule = if S::EXACT {
        PivotRule::Bland
    } else {
        PivotRule::Dantzig
    };
    lp_solve_with(p, rule, None)
}

/// Solve with an explicit pivot rule, optionally seeding the basis with the
/// given columns (typically the final basis of a float solve). A hint that
/// does not give a nonnegative basic solution is ignored.
pub fn lp_solve_with<S: Scalar>(
    p: &LpProblem<S>,
    rule: PivotRule,
    hint: Option<&[usize]>,
) -> LpOutcome<S> {
    if !S::EXACT {
        let mut r = Revised::new(p);
        if let Some(h) = hint {
            r.seed(h);
        }
        return r.run(rule);
    }
    if let Some(h) = hint {
        let mut t = Tableau::new(p);
        if t.seed(h) {
            return t.run(p, rule);
        }
    }
    Tableau::new(p).run(p, rule)
}

struct Tableau<S> {
    n: usize,
    m: usize,
    rows: Vec<Vec<(usize, S)>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    flipped: Vec<bool>,
    cost: Vec<S>,
    obj: S,
}

const DROP: f64 = 1e-14;
const PIVOT_TOL: f64 = 1e-9;

fn positive_pivot<S: Scalar>(v: &S) -> bool {
    if S::EXACT {
        v.is_pos()
    } else {
        v.to_float() > PIVOT_TOL
    }
}

fn usable_pivot<S: Scalar>(v: &S) -> bool {
    if S::EXACT {
        !v.is_zero()
    } else {
        v.to_float().abs() > PIVOT_TOL
    }
}

impl<S: Scalar> Tableau<S> {
    fn new(p: &LpProblem<S>) -> Self {
        let n = p.num_vars;
        let m = p.rows.len();
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut flipped = Vec::with_capacity(m);
        for (i, r) in p.rows.iter().enumerate() {
            let flip = r.rhs < S::zero();
            let mut row: Vec<(usize, S)> = r
                .coeffs
                .iter()
                .map(|(j, v)| (*j, if flip { -v.clone() } else { v.clone() }))
                .collect();
            row.push((n + i, S::one()));
            rows.push(row);
            rhs.push(if flip { -r.rhs.clone() } else { r.rhs.clone() });
            flipped.push(flip);
        }
        Tableau {
            n,
            m,
            rows,
            rhs,
            basis: (n..n + m).collect(),
            flipped,
            cost: alloc::vec![S::zero(); n + m],
            obj: S::zero(),
        }
    }

    fn get(&self, i: usize, j: usize) -> Option<&S> {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |e| e.0).ok().map(|k| &row[k].1)
    }

    fn is_art(&self, j: usize) -> bool {
        j >= self.n
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let piv = self.get(r, q).cloned().expect("pivot entry");
        let inv = S::one() / piv;
        let mut prow = core::mem::take(&mut self.rows[r]);
        for e in prow.iter_mut() {
            e.1 = e.1.clone() * &inv;
        }
        // keep the pivot exactly one
        if let Ok(k) = prow.binary_search_by_key(&q, |e| e.0) {
            prow[k].1 = S::one();
        }
        self.rhs[r] = self.rhs[r].clone() * &inv;
        let prhs = self.rhs[r].clone();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = match self.get(i, q) {
                Some(f) => f.clone(),
                None => continue,
            };
            let row = core::mem::take(&mut self.rows[i]);
            self.rows[i] = axpy(row, &f, &prow, q);
            self.rhs[i] = self.rhs[i].clone() - f.clone() * &prhs;
            if !S::EXACT && self.rhs[i].is_negligible() {
                self.rhs[i] = S::zero();
            }
        }
        let dq = self.cost[q].clone();
        if !dq.is_zero() {
            for (j, v) in &prow {
                self.cost[*j] = self.cost[*j].clone() - dq.clone() * v;
            }
            self.cost[q] = S::zero();
            self.obj = self.obj.clone() + dq * &prhs;
        }
        self.rows[r] = prow;
        self.basis[r] = q;
    }

    /// Pivot the hinted columns into the basis; false if the result is not
    /// a nonnegative basic solution.
    fn seed(&mut self, hint: &[usize]) -> bool {
        for &q in hint {
            if q >= self.n || self.basis.contains(&q) {
                continue;
            }
            let mut best: Option<(usize, usize, f64)> = None;
            for i in 0..self.m {
                if !self.is_art(self.basis[i]) {
                    continue;
                }
                if let Some(v) = self.get(i, q) {
                    if !usable_pivot(v) {
                        continue;
                    }
                    let len = self.rows[i].len();
                    let mag = v.to_float().abs();
                    let better = match best {
                        None => true,
                        Some((_, bl, bm)) => {
                            if S::EXACT {
                                len < bl
                            } else {
                                mag > bm
                            }
                        }
                    };
                    if better {
                        best = Some((i, len, mag));
                    }
                }
            }
            if let Some((r, _, _)) = best {
                self.pivot(r, q);
            }
        }
        self.rhs.iter().all(|v| !v.is_neg())
    }

    fn price(&mut self, costs: &dyn Fn(usize) -> S) {
        self.cost = (0..self.n + self.m).map(costs).collect();
        self.obj = S::zero();
        for i in 0..self.m {
            let cb = costs(self.basis[i]);
            if cb.is_zero() {
                continue;
            }
            for (j, v) in &self.rows[i] {
                self.cost[*j] = self.cost[*j].clone() - cb.clone() * v;
            }
            self.obj = self.obj.clone() + cb * &self.rhs[i];
        }
    }

    fn entering(&self, rule: PivotRule, allow_art: bool) -> Option<usize> {
        let limit = if allow_art { self.n + self.m } else { self.n };
        match rule {
            PivotRule::Bland => (0..limit).find(|&j| self.cost[j].is_neg()),
            PivotRule::Dantzig => {
                let mut best: Option<usize> = None;
                for j in 0..limit {
                    if self.cost[j].is_neg()
                        && best.is_none_or(|b| self.cost[j] < self.cost[b])
                    {
                        best = Some(j);
                    }
                }
                best
            }
        }
    }

    fn leaving(&self, q: usize, rule: PivotRule) -> Option<usize> {
        let mut best: Option<(usize, S)> = None;
        for i in 0..self.m {
            let a = match self.get(i, q) {
                Some(a) if positive_pivot(a) => a,
                _ => continue,
            };
            let ratio = self.rhs[i].clone() / a.clone();
            best = match best {
                None => Some((i, ratio)),
                Some((b, br)) => {
                    let take = if S::EXACT {
                        ratio < br || (ratio == br && self.basis[i] < self.basis[b])
                    } else {
                        let d = ratio.to_float() - br.to_float();
                        if d < -1e-12 {
                            true
                        } else if d > 1e-12 {
                            false
                        } else if rule == PivotRule::Bland {
                            self.basis[i] < self.basis[b]
                        } else {
                            a.to_float() > self.get(b, q).map_or(0.0, |v| v.to_float())
                        }
                    };
                    if take {
                        Some((i, ratio))
                    } else {
                        Some((b, br))
                    }
                }
            };
        }
        best.map(|b| b.0)
    }

    /// Runs simplex iterations; false when the objective is unbounded.
    fn iterate(&mut self, rule: PivotRule, allow_art: bool) -> bool {
        let mut current = rule;
        let mut degenerate = 0usize;
        loop {
            let q = match self.entering(current, allow_art) {
                Some(q) => q,
                None => return true,
            };
            let r = match self.leaving(q, current) {
                Some(r) => r,
                None => return false,
            };
            if self.rhs[r].is_negligible() {
                degenerate += 1;
                if degenerate > 50 {
                    current = PivotRule::Bland;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, q);
        }
    }

    fn farkas(&self) -> Farkas<S> {
        let y = (0..self.m)
            .map(|i| {
                let yi = S::one() - self.cost[self.n + i].clone();
                if self.flipped[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect();
        Farkas {
            y,
            basis: self.basis.clone(),
        }
    }

    fn run(mut self, p: &LpProblem<S>, rule: PivotRule) -> LpOutcome<S> {
        let n = self.n;
        self.price(&|j| if j >= n { S::one() } else { S::zero() });
        self.iterate(rule, false);
        let scale = p
            .rows
            .iter()
            .fold(1.0f64, |acc, r| acc.max(r.rhs.to_float().abs()));
        let infeasible = if S::EXACT {
            self.obj.is_pos()
        } else {
            self.obj.to_float() > 1e-9 * scale
        };
        if infeasible {
            return LpOutcome::Infeasible(self.farkas());
        }
        // drive zero-level artificials out of the basis
        for i in 0..self.m {
            if !self.is_art(self.basis[i]) {
                continue;
            }
            let mut pick: Option<(usize, f64)> = None;
            for (j, v) in &self.rows[i] {
                if *j < n && usable_pivot(v) {
                    let mag = v.to_float().abs();
                    if pick.is_none_or(|p| !S::EXACT && mag > p.1) {
                        pick = Some((*j, mag));
                    }
                }
            }
            if let Some((j, _)) = pick {
                self.rhs[i] = S::zero();
                self.pivot(i, j);
            }
        }
        if let Some(obj) = &p.objective {
            let mut c = alloc::vec![S::zero(); n];
            for (j, v) in obj {
                c[*j] = v.clone();
            }
            self.price(&|j| if j < n { c[j].clone() } else { S::zero() });
            if !self.iterate(rule, false) {
                return LpOutcome::Unbounded;
            }
        }
        let mut x = alloc::vec![S::zero(); n];
        for i in 0..self.m {
            if self.basis[i] < n {
                let v = self.rhs[i].clone();
                x[self.basis[i]] = if v.is_neg() && !S::EXACT { S::zero() } else { v };
            }
        }
        let objective = match &p.objective {
            Some(obj) => obj
                .iter()
                .fold(S::zero(), |acc, (j, v)| acc + v.clone() * &x[*j]),
            None => S::zero(),
        };
        LpOutcome::Optimal(LpPoint {
            x,
            objective,
            basis: self.basis,
        })
    }
}

/// Sparse LU of a square matrix given by columns: row operations `ops`
/// reduce it to rows that are triangular in pivot order.
struct Lu<S> {
    /// (target row, source row, factor): `row[target] −= factor · row[source]`.
    ops: Vec<(usize, usize, S)>,
    upper: Vec<Vec<(usize, S)>>,
    /// (row, column, pivot) in elimination order.
    order: Vec<(usize, usize, S)>,
}

impl<S: Scalar> Lu<S> {
    /// Pivots on the sparsest remaining column; `None` when singular.
    fn factor(cols: &[Vec<(usize, S)>], m: usize) -> Option<Self> {
        if cols.len() != m {
            return None;
        }
        let mut rows: Vec<Vec<(usize, S)>> = alloc::vec![Vec::new(); m];
        for (k, col) in cols.iter().enumerate() {
            for (i, v) in col {
                if !v.is_zero() {
                    rows[*i].push((k, v.clone()));
                }
            }
        }
        let mut in_col: Vec<BTreeSet<usize>> = alloc::vec![BTreeSet::new(); m];
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|e| e.0);
            for (k, _) in row.iter() {
                in_col[*k].insert(i);
            }
        }
        let entry = |row: &[(usize, S)], q: usize| {
            row.binary_search_by_key(&q, |e| e.0).ok().map(|k| row[k].1.clone())
        };
        let mut col_done = alloc::vec![false; m];
        let mut ops = Vec::new();
        let mut order = Vec::with_capacity(m);
        for _ in 0..m {
            let q = (0..m)
                .filter(|&k| !col_done[k])
                .min_by_key(|&k| in_col[k].len())?;
            let mut best: Option<(usize, f64)> = None;
            for &i in &in_col[q] {
                let v = entry(&rows[i], q)?;
                let score = if S::EXACT {
                    -(rows[i].len() as f64)
                } else {
                    v.to_float().abs()
                };
                if best.is_none_or(|b| score > b.1) {
                    best = Some((i, score));
                }
            }
            let (p, _) = best?;
            let prow = core::mem::take(&mut rows[p]);
            let piv = entry(&prow, q)?;
            if !S::EXACT && piv.to_float().abs() <= 1e-13 {
                return None;
            }
            for (k, _) in &prow {
                in_col[*k].remove(&p);
            }
            let others: Vec<usize> = in_col[q].iter().copied().collect();
            for i in others {
                let row = core::mem::take(&mut rows[i]);
                let f = entry(&row, q)? / piv.clone();
                for (k, _) in &row {
                    in_col[*k].remove(&i);
                }
                let new = axpy(row, &f, &prow, q);
                for (k, _) in &new {
                    in_col[*k].insert(i);
                }
                rows[i] = new;
                ops.push((i, p, f));
            }
            col_done[q] = true;
            rows[p] = prow;
            order.push((p, q, piv));
        }
        Some(Lu {
            ops,
            upper: rows,
            order,
        })
    }

    /// x with B x = b; b by row, x by column.
    fn solve(&self, mut b: Vec<S>) -> Vec<S> {
        for (i, p, f) in &self.ops {
            if !b[*p].is_zero() {
                b[*i] = b[*i].clone() - f.clone() * &b[*p];
            }
        }
        let mut x = alloc::vec![S::zero(); b.len()];
        for (p, q, piv) in self.order.iter().rev() {
            let mut acc = b[*p].clone();
            for (k, v) in &self.upper[*p] {
                if k != q && !x[*k].is_zero() {
                    acc = acc - v.clone() * &x[*k];
                }
            }
            x[*q] = acc / piv.clone();
        }
        x
    }

    /// y with yᵀB = cᵀ; c by column, y by row.
    fn solve_transpose(&self, mut c: Vec<S>) -> Vec<S> {
        let mut z = alloc::vec![S::zero(); c.len()];
        for (p, q, piv) in &self.order {
            let zp = c[*q].clone() / piv.clone();
            if !zp.is_zero() {
                for (k, v) in &self.upper[*p] {
                    if k != q {
                        c[*k] = c[*k].clone() - v.clone() * &zp;
                    }
                }
            }
            z[*p] = zp;
        }
        for (i, p, f) in self.ops.iter().rev() {
            if !z[*i].is_zero() {
                z[*p] = z[*p].clone() - f.clone() * &z[*i];
            }
        }
        z
    }
}

/// Solves the square system whose `k`th column is `cols[k]` (sparse, by row
/// index), or `None` when it is singular.
pub fn solve_square<S: Scalar>(cols: &[Vec<(usize, S)>], b: &[S]) -> Option<Vec<S>> {
    Some(Lu::factor(cols, b.len())?.solve(b.to_vec()))
}

const REFACTOR: usize = 64;

/// Revised simplex over an LU of the basis with product-form updates, used
/// for floats where a dense tableau fills in.
struct Revised<'a, S> {
    p: &'a LpProblem<S>,
    n: usize,
    m: usize,
    /// Structural columns with row signs flipped to make `b` nonnegative,
    /// then one unit artificial per row.
    cols: Vec<Vec<(usize, S)>>,
    b: Vec<S>,
    flipped: Vec<bool>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    x: Vec<S>,
    lu: Lu<S>,
    /// (position, column, pivot value)
    etas: Vec<(usize, Vec<(usize, S)>, S)>,
}

impl<'a, S: Scalar> Revised<'a, S> {
    fn new(p: &'a LpProblem<S>) -> Self {
        let n = p.num_vars;
        let m = p.rows.len();
        let flipped: Vec<bool> = p.rows.iter().map(|r| r.rhs < S::zero()).collect();
        let mut cols: Vec<Vec<(usize, S)>> = alloc::vec![Vec::new(); n + m];
        for (i, r) in p.rows.iter().enumerate() {
            for (j, v) in &r.coeffs {
                cols[*j].push((i, if flipped[i] { -v.clone() } else { v.clone() }));
            }
            cols[n + i].push((i, S::one()));
        }
        let b: Vec<S> = p.rows.iter().map(|r| r.rhs.clone().abs()).collect();
        let basis: Vec<usize> = (n..n + m).collect();
        let mut in_basis = alloc::vec![false; n + m];
        for &j in &basis {
            in_basis[j] = true;
        }
        let lu = Lu::factor(&basis_cols(&cols, &basis), m).expect("identity basis");
        Revised {
            p,
            n,
            m,
            cols,
            x: b.clone(),
            b,
            flipped,
            basis,
            in_basis,
            lu,
            etas: Vec::new(),
        }
    }

    /// Adopts `hint` as the starting basis when it factors and is feasible.
    fn seed(&mut self, hint: &[usize]) -> bool {
        if hint.len() != self.m || hint.iter().any(|&j| j >= self.n + self.m) {
            return false;
        }
        let lu = match Lu::factor(&basis_cols(&self.cols, hint), self.m) {
            Some(lu) => lu,
            None => return false,
        };
        let x = lu.solve(self.b.clone());
        if x.iter().any(|v| v.is_neg()) {
            return false;
        }
        self.lu = lu;
        self.etas.clear();
        self.x = x.into_iter().map(|v| if v.is_neg() { S::zero() } else { v }).collect();
        self.in_basis.iter_mut().for_each(|f| *f = false);
        for &j in hint {
            self.in_basis[j] = true;
        }
        self.basis = hint.to_vec();
        true
    }

    fn ftran(&self, col: &[(usize, S)]) -> Vec<S> {
        let mut b = alloc::vec![S::zero(); self.m];
        for (i, v) in col {
            b[*i] = v.clone();
        }
        let mut x = self.lu.solve(b);
        for (r, alpha, ar) in &self.etas {
            let xr = x[*r].clone() / ar.clone();
            if !xr.is_zero() {
                for (i, a) in alpha {
                    if i != r {
                        x[*i] = x[*i].clone() - a.clone() * &xr;
                    }
                }
            }
            x[*r] = xr;
        }
        x
    }

    fn btran(&self, mut c: Vec<S>) -> Vec<S> {
        for (r, alpha, ar) in self.etas.iter().rev() {
            let mut acc = c[*r].clone();
            for (i, a) in alpha {
                if i != r {
                    acc = acc - c[*i].clone() * a;
                }
            }
            c[*r] = acc / ar.clone();
        }
        self.lu.solve_transpose(c)
    }

    fn refactor(&mut self) {
        if let Some(lu) = Lu::factor(&basis_cols(&self.cols, &self.basis), self.m) {
            self.lu = lu;
            self.etas.clear();
            self.x = self
                .lu
                .solve(self.b.clone())
                .into_iter()
                .map(|v| if v.is_negligible() { S::zero() } else { v })
                .collect();
        }
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: Vec<S>) {
        let ar = alpha[r].clone();
        let theta = self.x[r].clone() / ar.clone();
        for (i, a) in alpha.iter().enumerate() {
            if i != r && !a.is_zero() {
                self.x[i] = self.x[i].clone() - a.clone() * &theta;
                if self.x[i].is_negligible() {
                    self.x[i] = S::zero();
                }
            }
        }
        self.x[r] = theta;
        self.in_basis[self.basis[r]] = false;
        self.in_basis[q] = true;
        self.basis[r] = q;
        let sparse = alpha
            .into_iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .collect();
        self.etas.push((r, sparse, ar));
        if self.etas.len() >= REFACTOR {
            self.refactor();
        }
    }

    fn duals(&self, cost: &[S]) -> Vec<S> {
        self.btran(self.basis.iter().map(|&j| cost[j].clone()).collect())
    }

    fn reduced(&self, cost: &[S], y: &[S], j: usize) -> S {
        self.cols[j]
            .iter()
            .fold(cost[j].clone(), |acc, (i, v)| acc - y[*i].clone() * v)
    }

    /// Minimizes `cost` from the current basis; false when unbounded.
    fn iterate(&mut self, cost: &[S], rule: PivotRule, allow_art: bool) -> bool {
        let limit = if allow_art { self.n + self.m } else { self.n };
        let mut current = rule;
        let mut degenerate = 0usize;
        loop {
            let y = self.duals(cost);
            let mut q: Option<(usize, S)> = None;
            for j in 0..limit {
                if self.in_basis[j] {
                    continue;
                }
                let d = self.reduced(cost, &y, j);
                if !d.is_neg() {
                    continue;
                }
                if current == PivotRule::Bland {
                    q = Some((j, d));
                    break;
                }
                if q.as_ref().is_none_or(|b| d < b.1) {
                    q = Some((j, d));
                }
            }
            let q = match q {
                Some((q, _)) => q,
                None => return true,
            };
            let alpha = self.ftran(&self.cols[q]);
            let mut best: Option<(usize, S)> = None;
            for (i, a) in alpha.iter().enumerate() {
                if !positive_pivot(a) {
                    continue;
                }
                let ratio = self.x[i].clone() / a.clone();
                let take = match &best {
                    None => true,
                    Some((b, br)) => {
                        let d = ratio.to_float() - br.to_float();
                        if d < -1e-12 {
                            true
                        } else if d > 1e-12 {
                            false
                        } else if current == PivotRule::Bland {
                            self.basis[i] < self.basis[*b]
                        } else {
                            a.to_float() > alpha[*b].to_float()
                        }
                    }
                };
                if take {
                    best = Some((i, ratio));
                }
            }
            let r = match best {
                Some((r, _)) => r,
                None => return false,
            };
            if self.x[r].is_negligible() {
                degenerate += 1;
                if degenerate > 50 {
                    current = PivotRule::Bland;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, q, alpha);
        }
    }

    fn objective(&self, cost: &[S]) -> S {
        self.basis
            .iter()
            .zip(&self.x)
            .fold(S::zero(), |acc, (&j, v)| acc + cost[j].clone() * v)
    }

    fn run(mut self, rule: PivotRule) -> LpOutcome<S> {
        let (n, m) = (self.n, self.m);
        let phase1: Vec<S> = (0..n + m)
            .map(|j| if j >= n { S::one() } else { S::zero() })
            .collect();
        self.iterate(&phase1, rule, false);
        self.refactor();
        let scale = self
            .b
            .iter()
            .fold(1.0f64, |acc, v| acc.max(v.to_float()));
        if self.objective(&phase1).to_float() > 1e-9 * scale {
            let y = self.duals(&phase1);
            let y = y
                .into_iter()
                .zip(&self.flipped)
                .map(|(v, &f)| if f { -v } else { v })
                .collect();
            return LpOutcome::Infeasible(Farkas {
                y,
                basis: self.basis,
            });
        }
        // drive zero-level artificials out of the basis
        for r in 0..m {
            if self.basis[r] < n {
                continue;
            }
            let mut unit = alloc::vec![S::zero(); m];
            unit[r] = S::one();
            let rho = self.btran(unit);
            let mut pick: Option<(usize, f64)> = None;
            for j in 0..n {
                if self.in_basis[j] {
                    continue;
                }
                let v = self.cols[j]
                    .iter()
                    .fold(S::zero(), |acc, (i, a)| acc + rho[*i].clone() * a);
                let mag = v.to_float().abs();
                if usable_pivot(&v) && pick.is_none_or(|p| mag > p.1) {
                    pick = Some((j, mag));
                }
            }
            if let Some((j, _)) = pick {
                let alpha = self.ftran(&self.cols[j]);
                self.x[r] = S::zero();
                self.pivot(r, j, alpha);
            }
        }
        if let Some(obj) = &self.p.objective {
            let mut c = alloc::vec![S::zero(); n + m];
            for (j, v) in obj {
                c[*j] = v.clone();
            }
            if !self.iterate(&c, rule, false) {
                return LpOutcome::Unbounded;
            }
            self.refactor();
        }
        let mut x = alloc::vec![S::zero(); n];
        for (&j, v) in self.basis.iter().zip(&self.x) {
            if j < n {
                x[j] = if v.is_neg() { S::zero() } else { v.clone() };
            }
        }
        let objective = match &self.p.objective {
            Some(obj) => obj
                .iter()
                .fold(S::zero(), |acc, (j, v)| acc + v.clone() * &x[*j]),
            None => S::zero(),
        };
        LpOutcome::Optimal(LpPoint {
            x,
            objective,
            basis: self.basis,
        })
    }
}

fn basis_cols<S: Scalar>(cols: &[Vec<(usize, S)>], basis: &[usize]) -> Vec<Vec<(usize, S)>> {
    basis.iter().map(|&j| cols[j].clone()).collect()
}

/// Basis columns of `p` with one artificial unit column per row after the
/// structural ones; row signs follow the right-hand sides as in the tableau.
fn basis_columns<S: Scalar>(p: &LpProblem<S>, basis: &[usize]) -> Vec<Vec<(usize, S)>> {
    let n = p.num_vars;
    let mut by_var: Vec<Vec<(usize, S)>> = alloc::vec![Vec::new(); n];
    for (i, r) in p.rows.iter().enumerate() {
        let flip = r.rhs < S::zero();
        for (j, v) in &r.coeffs {
            by_var[*j].push((i, if flip { -v.clone() } else { v.clone() }));
        }
    }
    basis
        .iter()
        .map(|&j| {
            if j < n {
                by_var[j].clone()
            } else {
                alloc::vec![(j - n, S::one())]
            }
        })
        .collect()
}

/// The basic solution of `basis`, solved directly. `None` unless it is a
/// feasible point with every basic artificial at zero.
pub fn basic_point<S: Scalar>(p: &LpProblem<S>, basis: &[usize]) -> Option<Vec<S>> {
    let n = p.num_vars;
    if basis.len() != p.rows.len() {
        return None;
    }
    let cols = basis_columns(p, basis);
    let b: Vec<S> = p.rows.iter().map(|r| r.rhs.clone().abs()).collect();
    let xb = solve_square(&cols, &b)?;
    let mut x = alloc::vec![S::zero(); n];
    for (&j, v) in basis.iter().zip(xb) {
        if v.is_neg() || (j >= n && !v.is_zero()) {
            return None;
        }
        if j < n {
            x[j] = v;
        }
    }
    Some(x)
}

/// Row multipliers of the phase-one dual for `basis`, signed for the
/// original rows. Callers check them as a Farkas certificate.
pub fn basic_farkas<S: Scalar>(p: &LpProblem<S>, basis: &[usize]) -> Option<Vec<S>> {
    let n = p.num_vars;
    let m = p.rows.len();
    if basis.len() != m {
        return None;
    }
    let cols = basis_columns(p, basis);
    let c: Vec<S> = basis
        .iter()
        .map(|&j| if j >= n { S::one() } else { S::zero() })
        .collect();
    let y = Lu::factor(&cols, m)?.solve_transpose(c);
    Some(
        y.into_iter()
            .zip(&p.rows)
            .map(|(v, r)| if r.rhs < S::zero() { -v } else { v })
            .collect(),
    )
}

/// `row − f · prow`, skipping column `q` (which cancels to zero).
fn axpy<S: Scalar>(row: Vec<(usize, S)>, f: &S, prow: &[(usize, S)], q: usize) -> Vec<(usize, S)> {
    let mut out = Vec::with_capacity(row.len() + prow.len());
    let mut a = row.into_iter().peekable();
    let mut b = prow.iter().peekable();
    loop {
        let take_a = match (a.peek(), b.peek()) {
            (None, None) => break,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(x), Some(y)) => {
                if x.0 == y.0 {
                    let (j, va) = a.next().unwrap();
                    let (_, vb) = b.next().unwrap();
                    if j == q {
                        continue;
                    }
                    let v = va - f.clone() * vb;
                    if keep(&v) {
                        out.push((j, v));
                    }
                    continue;
                }
                x.0 < y.0
            }
        };
        if take_a {
            let e = a.next().unwrap();
            if e.0 != q {
                out.push(e);
            }
        } else {
            let &(j, ref vb) = b.next().unwrap();
            if j == q {
                continue;
            }
            let v = -(f.clone() * vb);
            if keep(&v) {
                out.push((j, v));
            }
        }
    }
    out
}

fn keep<S: Scalar>(v: &S) -> bool {
    if S::EXACT {
        !v.is_zero()
    } else {
        v.to_float().abs() > DROP
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational, Rational};
    use alloc::vec;

    #[test]
    fn empty_system_is_feasible() {
        let p: LpProblem<f64> = LpProblem::new(0);
        assert!(matches!(lp_solve(&p), LpOutcome::Optimal(_)));
    }

    #[test]
    fn negative_equality_has_certificate() {
        let mut p: LpProblem<Rational> = LpProblem::new(1);
        p.add_eq(vec![(0, rational(1, 1))], rational(-1, 1));
        match lp_solve(&p) {
            LpOutcome::Infeasible(f) => {
                // yᵀA <= 0 and yᵀb > 0
                assert!(f.y[0].clone() * rational(1, 1) <= rational(0, 1));
                assert!(f.y[0].clone() * rational(-1, 1) > rational(0, 1));
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn small_minimization() {
        // min x0 + 2 x1 s.t. x0 + x1 >= 3, x0 <= 1
        let mut p: LpProblem<f64> = LpProblem::new(2);
        p.add_ge(vec![(0, 1.0), (1, 1.0)], 3.0);
        p.add_le(vec![(0, 1.0)], 1.0);
        p.set_objective(vec![(0, 1.0), (1, 2.0)]);
        match lp_solve(&p) {
            LpOutcome::Optimal(pt) => {
                assert!((pt.objective - 5.0).abs() < 1e-12);
                assert!((pt.x[0] - 1.0).abs() < 1e-12);
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn unbounded_is_reported() {
        let mut p: LpProblem<f64> = LpProblem::new(2);
        p.add_eq(vec![(0, 1.0), (1, -1.0)], 0.0);
        p.set_objective(vec![(0, -1.0)]);
        assert_eq!(lp_solve(&p), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let mut p: LpProblem<Rational> = LpProblem::new(2);
        p.add_eq(vec![(0, rational(1, 1)), (1, rational(1, 1))], rational(2, 1));
        p.add_eq(vec![(0, rational(2, 1)), (1, rational(2, 1))], rational(4, 1));
        p.set_objective(vec![(0, rational(1, 1))]);
        match lp_solve(&p) {
            LpOutcome::Optimal(pt) => {
                assert_eq!(pt.x[1], rational(2, 1));
                assert!(p.residuals(&pt.x).iter().all(|r| *r == rational(0, 1)));
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn hinted_basis_matches_cold_start() {
        let mut p: LpProblem<f64> = LpProblem::new(3);
        p.add_eq(vec![(0, 1.0), (1, 1.0), (2, 1.0)], 1.0);
        p.add_eq(vec![(0, 1.0), (1, -1.0)], 0.25);
        let cold = match lp_solve(&p) {
            LpOutcome::Optimal(pt) => pt,
            other => panic!("{:?}", other),
        };
        let warm = match lp_solve_with(&p, PivotRule::Dantzig, Some(&cold.basis)) {
            LpOutcome::Optimal(pt) => pt,
            other => panic!("{:?}", other),
        };
        assert_eq!(cold.x, warm.x);
    }

    #[test]
    fn square_solves_both_ways() {
        // columns of [[2, 1, 0], [0, 3, 1], [1, 0, 4]]
        let cols = vec![
            vec![(0, rational(2, 1)), (2, rational(1, 1))],
            vec![(0, rational(1, 1)), (1, rational(3, 1))],
            vec![(1, rational(1, 1)), (2, rational(4, 1))],
        ];
        let b = vec![rational(3, 1), rational(4, 1), rational(5, 1)];
        let x = solve_square(&cols, &b).unwrap();
        assert_eq!(x, vec![rational(1, 1); 3]);
        let y = Lu::factor(&cols, 3).unwrap().solve_transpose(b.clone());
        // yᵀB = bᵀ
        for (k, col) in cols.iter().enumerate() {
            let s = col.iter().fold(rational(0, 1), |acc, (i, v)| acc + v * &y[*i]);
            assert_eq!(s, b[k]);
        }
        let singular = vec![vec![(0, rational(1, 1))], vec![(0, rational(2, 1))]];
        assert!(solve_square(&singular, &[rational(1, 1), rational(1, 1)]).is_none());
    }

    #[test]
    fn revised_agrees_with_exact_tableau() {
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut small = |k: u64| (rng.next_u64() % k) as i64;
        for _ in 0..200 {
            let (n, m) = (2 + small(6) as usize, 1 + small(4) as usize);
            let mut p: LpProblem<Rational> = LpProblem::new(n);
            for _ in 0..m {
                let coeffs = (0..n).map(|j| (j, rational(small(7) - 3, 1))).collect();
                p.add_eq(coeffs, rational(small(9) - 4, 1));
            }
            let exact = lp_solve(&p);
            let float = lp_solve(&p.map(|v| v.to_float()));
            assert_eq!(exact.is_feasible(), float.is_feasible(), "{}", p);
            if let LpOutcome::Optimal(pt) = float {
                let fp = p.map(|v| v.to_float());
                assert!(fp.residuals(&pt.x).iter().all(|r| r.abs() < 1e-9));
                assert!(basic_point(&p, &pt.basis).is_some());
            }
        }
    }
}

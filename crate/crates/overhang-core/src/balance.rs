//! Balance as LP feasibility: two endpoint forces per contact, a force row
//! and a moment row per block, the table exempt.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lp::{
    basic_farkas, basic_point, lp_solve, lp_solve_with, Farkas, LpOutcome, LpPoint, LpProblem, PivotRule,
};
use crate::model::{contacts_of, Contact, ContactOf, Geometry, Lower, PointWeight, Stack};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Float { tol: f64 },
    Exact,
}

impl Default for Mode {
    fn default() -> Self {
        Mode::Float { tol: DEFAULT_TOL }
    }
}

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceVar {
    pub contact: Contact,
    pub end: End,
    pub magnitude: f64,
}

/// Farkas multipliers over the block equations: `force[i]` and `moment[i]`
/// weight block i's two rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub force: Vec<f64>,
    pub moment: Vec<f64>,
    /// Checked in exact arithmetic.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceResult {
    pub balanced: bool,
    pub witness: Vec<ForceVar>,
    pub certificate: Option<Certificate>,
    /// Largest equation residual of the witness (zero in exact mode).
    pub max_residual: f64,
}

/// Variables 2c and 2c+1 are the forces at a and b of contact c; rows 2i
/// and 2i+1 are the force and moment equations of block i.
pub fn balance_lp_of<S: Scalar>(g: &Geometry<S>, contacts: &[ContactOf<S>]) -> LpProblem<S> {
    let n = g.xs.len();
    let mut rows: Vec<Vec<(usize, S)>> = vec![Vec::new(); 2 * n];
    for (c, ct) in contacts.iter().enumerate() {
        let (f0, f1) = (2 * c, 2 * c + 1);
        let u = ct.upper;
        rows[2 * u].push((f0, S::one()));
        rows[2 * u].push((f1, S::one()));
        rows[2 * u + 1].push((f0, ct.a.clone()));
        rows[2 * u + 1].push((f1, ct.b.clone()));
        if let Lower::Block(l) = ct.lower {
            rows[2 * l].push((f0, -S::one()));
            rows[2 * l].push((f1, -S::one()));
            rows[2 * l + 1].push((f0, -ct.a.clone()));
            rows[2 * l + 1].push((f1, -ct.b.clone()));
        }
    }
    let mut rhs: Vec<S> = Vec::with_capacity(2 * n);
    for x in &g.xs {
        rhs.push(S::one());
        rhs.push(x.clone() + S::half());
    }
    for (blk, p, m) in &g.weights {
        rhs[2 * blk] = rhs[2 * blk].clone() + m.clone();
        rhs[2 * blk + 1] = rhs[2 * blk + 1].clone() + m.clone() * p;
    }
    let mut lp = LpProblem::new(2 * contacts.len());
    for (coeffs, b) in rows.into_iter().zip(rhs) {
        lp.add_eq(coeffs, b);
    }
    lp
}

pub fn build_balance_lp(stack: &Stack) -> Result<LpProblem<f64>> {
    let g = stack.geometry();
    let c = contacts_of(&g)?;
    Ok(balance_lp_of(&g, &c))
}

fn to_contact<S: Scalar>(c: &ContactOf<S>) -> Contact {
    Contact {
        upper: c.upper,
        lower: c.lower,
        a: c.a.to_float(),
        b: c.b.to_float(),
    }
}

fn witness_of<S: Scalar>(contacts: &[ContactOf<S>], x: &[S]) -> Vec<ForceVar> {
    let mut out = Vec::with_capacity(x.len());
    for (c, ct) in contacts.iter().enumerate() {
        let contact = to_contact(ct);
        out.push(ForceVar {
            contact: contact.clone(),
            end: End::A,
            magnitude: x[2 * c].to_float(),
        });
        out.push(ForceVar {
            contact,
            end: End::B,
            magnitude: x[2 * c + 1].to_float(),
        });
    }
    out
}

fn certificate_of<S: Scalar>(y: &[S], exact: bool) -> Certificate {
    Certificate {
        force: y.iter().step_by(2).map(|v| v.to_float()).collect(),
        moment: y.iter().skip(1).step_by(2).map(|v| v.to_float()).collect(),
        exact,
    }
}

/// Checks a Farkas vector: `yᵀA <= 0` for every column and `yᵀb > 0`.
pub fn verify_farkas<S: Scalar>(lp: &LpProblem<S>, y: &[S]) -> bool {
    let mut cols = vec![S::zero(); lp.num_vars];
    let mut yb = S::zero();
    for (row, yi) in lp.rows.iter().zip(y) {
        for (j, v) in &row.coeffs {
            cols[*j] = cols[*j].clone() + v.clone() * yi;
        }
        yb = yb + row.rhs.clone() * yi;
    }
    yb.is_pos() && cols.iter().all(|c| !c.is_pos())
}

pub fn is_balanced(stack: &Stack, mode: Mode) -> Result<BalanceResult> {
    match mode {
        Mode::Float { tol } => balanced_float(stack, tol),
        Mode::Exact => balanced_exact(stack),
    }
}

fn balanced_float(stack: &Stack, tol: f64) -> Result<BalanceResult> {
    let g = stack.geometry();
    let contacts = contacts_of(&g)?;
    let lp = balance_lp_of(&g, &contacts);
    Ok(match lp_solve(&lp) {
        LpOutcome::Optimal(pt) => {
            let max_residual = lp
                .residuals(&pt.x)
                .iter()
                .fold(0.0f64, |m, r| m.max(r.abs()));
            let balanced = max_residual <= tol;
            BalanceResult {
                balanced,
                witness: witness_of(&contacts, &pt.x),
                certificate: None,
                max_residual,
            }
        }
        LpOutcome::Infeasible(f) => BalanceResult {
            balanced: false,
            witness: Vec::new(),
            certificate: Some(certificate_of(&f.y, false)),
            max_residual: f64::INFINITY,
        },
        LpOutcome::Unbounded => unreachable!("feasibility problem has no objective"),
    })
}

/// Exact LP outcome for a balance system. The float solve's final basis is
/// checked first by solving it directly in rationals; the exact simplex only
/// runs when that check fails.
fn solve_exact(lp: &LpProblem<Rational>) -> LpOutcome<Rational> {
    let hint = match lp_solve(&lp.map(|v| v.to_float())) {
        LpOutcome::Optimal(pt) => {
            if let Some(x) = basic_point(lp, &pt.basis) {
                return LpOutcome::Optimal(LpPoint {
                    x,
                    objective: Rational::zero(),
                    basis: pt.basis,
                });
            }
            Some(pt.basis)
        }
        LpOutcome::Infeasible(f) => {
            if let Some(y) = basic_farkas(lp, &f.basis) {
                if verify_farkas(lp, &y) {
                    return LpOutcome::Infeasible(Farkas { y, basis: f.basis });
                }
            }
            Some(f.basis)
        }
        LpOutcome::Unbounded => None,
    };
    lp_solve_with(lp, PivotRule::Bland, hint.as_deref())
}

fn balanced_exact(stack: &Stack) -> Result<BalanceResult> {
    let g = stack.exact_geometry()?;
    let contacts = contacts_of(&g)?;
    let lp = balance_lp_of(&g, &contacts);
    Ok(match solve_exact(&lp) {
        LpOutcome::Optimal(pt) => {
            debug_assert!(lp.residuals(&pt.x).iter().all(|r| r.is_zero()));
            BalanceResult {
                balanced: true,
                witness: witness_of(&contacts, &pt.x),
                certificate: None,
                max_residual: 0.0,
            }
        }
        LpOutcome::Infeasible(f) => {
            let ok = verify_farkas(&lp, &f.y);
            BalanceResult {
                balanced: false,
                witness: Vec::new(),
                certificate: Some(certificate_of(&f.y, ok)),
                max_residual: f64::INFINITY,
            }
        }
        LpOutcome::Unbounded => unreachable!("feasibility problem has no objective"),
    })
}

/// Exact witness forces, two per contact, for callers that need rationals.
pub fn exact_witness(stack: &Stack) -> Result<Option<(Vec<ContactOf<Rational>>, Vec<Rational>)>> {
    let g = stack.exact_geometry()?;
    let contacts = contacts_of(&g)?;
    let lp = balance_lp_of(&g, &contacts);
    Ok(match solve_exact(&lp) {
        LpOutcome::Optimal(pt) => Some((contacts, pt.x)),
        _ => None,
    })
}

/// Residual of every block equation under the given witness, in row order.
pub fn witness_residuals(stack: &Stack, witness: &[ForceVar]) -> Result<Vec<f64>> {
    let lp = build_balance_lp(stack)?;
    let x: Vec<f64> = witness.iter().map(|f| f.magnitude).collect();
    if x.len() != lp.num_vars {
        return Err(Error::InvalidParameter("witness does not match stack".into()));
    }
    Ok(lp.residuals(&x))
}

/// Where extra point weight may go.
#[derive(Debug, Clone, PartialEq)]
pub enum Placement {
    /// Any part of an upper edge not covered by a block resting there.
    UpperEdgesOutsideContacts,
    /// Anywhere on the upper edges of the listed blocks.
    UpperEdges(Vec<usize>),
    /// Exactly these (block, position) points.
    Positions(Vec<(usize, f64)>),
}

fn candidate_points(stack: &Stack, contacts: &[Contact], placement: &Placement) -> Vec<(usize, f64)> {
    match placement {
        Placement::Positions(p) => p.clone(),
        Placement::UpperEdges(blocks) => blocks
            .iter()
            .flat_map(|&b| {
                let x = stack.blocks[b].x;
                [(b, x), (b, x + 1.0)]
            })
            .collect(),
        Placement::UpperEdgesOutsideContacts => {
            let mut out = Vec::new();
            for (b, blk) in stack.blocks.iter().enumerate() {
                let mut covered: Vec<(f64, f64)> = contacts
                    .iter()
                    .filter(|c| c.lower == Lower::Block(b))
                    .map(|c| (c.a, c.b))
                    .collect();
                covered.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
                // free sub-intervals of [x, x+1]; a weight inside one can be
                // split between its endpoints, so endpoints suffice
                let mut cursor = blk.x;
                for (a, bb) in covered.into_iter().chain([(blk.x + 1.0, blk.x + 1.0)]) {
                    if a > cursor {
                        out.push((b, cursor));
                        out.push((b, a));
                    }
                    cursor = cursor.max(bb);
                }
            }
            out
        }
    }
}

/// Minimum total point weight that balances the stack, with one optimal
/// placement.
pub fn min_stabilizing_weight(stack: &Stack, placement: &Placement) -> Result<(f64, Vec<PointWeight>)> {
    let g = stack.geometry();
    let contacts = contacts_of(&g)?;
    let mut lp = balance_lp_of(&g, &contacts);
    let points = candidate_points(stack, &contacts, placement);
    let first = lp.num_vars;
    lp.num_vars += points.len();
    for (k, &(b, p)) in points.iter().enumerate() {
        if b >= stack.len() {
            return Err(Error::InvalidParameter("placement names a missing block".into()));
        }
        lp.rows[2 * b].coeffs.push((first + k, -1.0));
        lp.rows[2 * b + 1].coeffs.push((first + k, -p));
    }
    lp.set_objective((0..points.len()).map(|k| (first + k, 1.0)).collect());
    match lp_solve(&lp) {
        LpOutcome::Optimal(pt) => {
            let weights = points
                .iter()
                .enumerate()
                .filter(|(k, _)| pt.x[first + k] > 1e-12)
                .map(|(k, &(b, p))| PointWeight::new(b, p, pt.x[first + k]))
                .collect();
            Ok((pt.objective, weights))
        }
        LpOutcome::Infeasible(_) => Err(Error::Unstabilizable),
        LpOutcome::Unbounded => unreachable!("weights are bounded below by zero"),
    }
}

/// Balance with every contact resultant kept off the block edges: each
/// endpoint force that sits on a block edge carries at least `margin` of
/// its contact's total. The table's own edge at 0 is not a block edge.
pub fn is_strictly_stable(stack: &Stack, margin: f64) -> Result<bool> {
    if !(margin > 0.0 && margin <= 0.5) {
        return Err(Error::InvalidParameter("margin must lie in (0, 1/2]".into()));
    }
    let g = stack.geometry();
    let contacts = contacts_of(&g)?;
    let mut lp = balance_lp_of(&g, &contacts);
    for (c, contact) in contacts.iter().enumerate() {
        let (f0, f1) = (2 * c, 2 * c + 1);
        // away from a, always a block edge
        lp.add_ge(vec![(f1, 1.0 - margin), (f0, -margin)], 0.0);
        let table_edge = contact.lower == Lower::Table && contact.b == 0.0 && g.xs[contact.upper] + 1.0 > 0.0;
        if !table_edge {
            lp.add_ge(vec![(f0, 1.0 - margin), (f1, -margin)], 0.0);
        }
    }
    Ok(match lp_solve(&lp) {
        LpOutcome::Optimal(pt) => {
            let n = 2 * g.xs.len();
            let res = lp.residuals(&pt.x);
            res[..n].iter().all(|r| r.abs() <= DEFAULT_TOL)
        }
        _ => false,
    })
}

/// Replace the balancing set by the point weights its witness forces exert
/// on the support set.
pub fn collapse_balancing_set(stack: &Stack, witness: &[ForceVar]) -> Result<Stack> {
    let part = crate::model::support_partition(stack)?;
    let mut index = vec![usize::MAX; stack.len()];
    let mut blocks = Vec::new();
    for &s in &part.support {
        index[s] = blocks.len();
        let mut b = stack.blocks[s].clone();
        b.exact = None;
        blocks.push(b);
    }
    let mut weights: Vec<PointWeight> = stack
        .weights
        .iter()
        .filter(|w| index[w.block] != usize::MAX)
        .map(|w| PointWeight::new(index[w.block], w.position, w.magnitude))
        .collect();
    for f in witness {
        if let Lower::Block(l) = f.contact.lower {
            if index[l] != usize::MAX && index[f.contact.upper] == usize::MAX && f.magnitude > 0.0 {
                let pos = match f.end {
                    End::A => f.contact.a,
                    End::B => f.contact.b,
                };
                weights.push(PointWeight::new(index[l], pos, f.magnitude));
            }
        }
    }
    let mut s = Stack::new(blocks).with_weights(weights);
    s.name = stack.name.clone();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_diamond, make_harmonic, make_inverted_triangle, Block};
    use crate::scalar::rational;

    fn exact(s: &Stack) -> bool {
        is_balanced(s, Mode::Exact).unwrap().balanced
    }

    #[test]
    fn single_block_lp_shape() {
        let s = Stack::new(vec![Block::new(-0.5, 0)]);
        let lp = build_balance_lp(&s).unwrap();
        assert_eq!(lp.num_vars, 2);
        assert_eq!(lp.rows.len(), 2);
    }

    #[test]
    fn point_weight_rows() {
        let s = Stack::new(vec![Block::new(-0.25, 0)])
            .with_weights(vec![PointWeight::new(0, -0.25, 1.0)]);
        let lp = build_balance_lp(&s).unwrap();
        assert_eq!(lp.rows[0].rhs, 2.0);
        assert_eq!(lp.rows[1].rhs, 0.0);
        assert!(is_balanced(&s, Mode::default()).unwrap().balanced);
    }

    #[test]
    fn family_verdicts() {
        assert!(exact(&make_harmonic(10).unwrap()));
        assert!(exact(&make_inverted_triangle(2).unwrap()));
        assert!(!exact(&make_inverted_triangle(3).unwrap()));
        assert!(exact(&make_diamond(4).unwrap()));
        assert!(!exact(&make_diamond(5).unwrap()));
    }

    #[test]
    fn certificates_are_checked_exactly() {
        let r = is_balanced(&make_inverted_triangle(3).unwrap(), Mode::Exact).unwrap();
        assert!(r.certificate.unwrap().exact);
    }

    #[test]
    fn exact_needs_rationals() {
        let s = Stack::new(vec![Block::new(-0.3, 0)]);
        assert_eq!(
            is_balanced(&s, Mode::Exact),
            Err(Error::InexactCoordinates { block: 0 })
        );
    }

    #[test]
    fn min_weight_single_block() {
        let centered = Stack::new(vec![Block::new(-0.5, 0)]);
        let (w, _) = min_stabilizing_weight(&centered, &Placement::UpperEdgesOutsideContacts).unwrap();
        assert!(w.abs() < 1e-12);
        let out = Stack::new(vec![Block::new(-0.25, 0)]);
        let (w, pw) = min_stabilizing_weight(&out, &Placement::Positions(vec![(0, -0.25)])).unwrap();
        assert!((w - 1.0).abs() < 1e-12);
        assert_eq!(pw.len(), 1);
    }

    #[test]
    fn hopeless_block_is_unstabilizable() {
        // resting on the table only at a sliver, weights allowed at its right edge only
        let s = Stack::new(vec![Block::new(-0.25, 0)]);
        assert_eq!(
            min_stabilizing_weight(&s, &Placement::Positions(vec![(0, 0.75)])),
            Err(Error::Unstabilizable)
        );
    }

    #[test]
    fn strict_stability() {
        assert!(!is_strictly_stable(&make_harmonic(5).unwrap(), 1e-3).unwrap());
        // centered over the table edge: the reaction sits mid-block
        let centered = Stack::new(vec![Block::new(-0.5, 0)]);
        assert!(is_strictly_stable(&centered, 0.25).unwrap());
        assert!(is_strictly_stable(&centered, 0.5).unwrap());
        assert!(is_strictly_stable(&centered, 0.6).is_err());
        let inside = Stack::new(vec![Block::exact(rational(-1, 1), 0)]);
        assert!(is_strictly_stable(&inside, 0.5).unwrap());
        assert!(is_strictly_stable(&inside, 0.25).unwrap());
        assert!(is_strictly_stable(&Stack::new(vec![Block::new(-1.0, 0)]), 0.5).unwrap());
        assert!(is_strictly_stable(&inside, 0.0).is_err());
    }

    #[test]
    fn collapsing_keeps_balance() {
        let s = make_inverted_triangle(2).unwrap();
        let r = is_balanced(&s, Mode::default()).unwrap();
        let c = collapse_balancing_set(&s, &r.witness).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c.total_weight() - 3.0).abs() < 1e-9);
        assert!(is_balanced(&c, Mode::default()).unwrap().balanced);
        assert_eq!(crate::model::overhang(&c).unwrap(), 1.0);
    }
}

//! Searching for good stacks: exhaustively for a handful of blocks, by local
//! moves for brick walls.

mod brickwall;
mod structure;

pub use brickwall::*;
pub use structure::*;

use alloc::vec::Vec;

use crate::balance::build_balance_lp;
use crate::error::Result;
use crate::lp::{lp_solve, LpOutcome};
use crate::model::Stack;

/// Whether the balancing forces of a stack are unique: every force
/// variable has the same minimum and maximum over all balancing solutions,
/// up to `tol`. `None` when the stack is not balanced.
pub fn witness_is_unique(stack: &Stack, tol: f64) -> Result<Option<bool>> {
    let mut lp = build_balance_lp(stack)?;
    let n = lp.num_vars;
    for j in 0..n {
        let mut range: Vec<f64> = Vec::with_capacity(2);
        for sign in [1.0, -1.0] {
            lp.set_objective(alloc::vec![(j, sign)]);
            match lp_solve(&lp) {
                LpOutcome::Optimal(pt) => range.push(pt.x[j]),
                LpOutcome::Infeasible(_) => return Ok(None),
                LpOutcome::Unbounded => return Ok(Some(false)),
            }
        }
        if (range[0] - range[1]).abs() > tol {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_harmonic, make_inverted_triangle, Block};

    #[test]
    fn uniqueness_probe() {
        assert_eq!(witness_is_unique(&make_harmonic(4).unwrap(), 1e-9).unwrap(), Some(true));
        let t = make_inverted_triangle(2).unwrap();
        assert_eq!(witness_is_unique(&t, 1e-9).unwrap(), Some(true));
        // one block bridging two: the split between them is free
        let bridge = Stack::new(alloc::vec![
            Block::new(-2.0, 0),
            Block::new(-1.0, 0),
            Block::new(-1.5, 1),
        ]);
        assert_eq!(witness_is_unique(&bridge, 1e-9).unwrap(), Some(false));
    }
}

//! Dense solves with residual verification and rate-graph reachability.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative residual threshold for accepted direct solves.
pub(crate) const SOLVE_RESIDUAL: f64 = 1e-10;

/// Solves `a x = b` by partial-pivot LU and rejects solutions whose relative
/// residual exceeds [`SOLVE_RESIDUAL`].
pub(crate) fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() == 0 {
        return Ok(DVector::zeros(0));
    }
    let x = a.clone().lu().solve(b).ok_or(Error::SingularSystem {
        residual: f64::INFINITY,
    })?;
    let residual = (a * &x - b).amax();
    let a_norm = a.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let bound = SOLVE_RESIDUAL * a_norm.max(1.0) * x.amax().max(1.0);
    if !residual.is_finite() || residual > bound || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem { residual });
    }
    Ok(x)
}

/// `reach[x]` is true when some positive-rate path leads from `x` into `targets`.
pub(crate) fn reaches(rates: &DMatrix<f64>, targets: &[bool]) -> Vec<bool> {
    let n = rates.nrows();
    let mut reach = targets.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&x| reach[x]).collect();
    // Walk edges backwards from the target set.
    while let Some(y) = stack.pop() {
        for x in 0..n {
            if !reach[x] && x != y && rates[(x, y)] > 0.0 {
                reach[x] = true;
                stack.push(x);
            }
        }
    }
    reach
}

/// Strong connectivity of the positive-rate digraph.
pub(crate) fn strongly_connected(rates: &DMatrix<f64>) -> bool {
    let n = rates.nrows();
    if n <= 1 {
        return true;
    }
    let mut root = vec![false; n];
    root[0] = true;
    if !reaches(rates, &root).iter().all(|&r| r) {
        return false;
    }
    // Forward reachability from 0 is backward reachability in the transpose.
    reaches(&rates.transpose(), &root).iter().all(|&r| r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_rejects_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        assert!(matches!(solve(&a, &b), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn reachability_follows_positive_edges() {
        // 0 -> 1 -> 2, nothing comes back
        let r = DMatrix::from_row_slice(3, 3, &[-1.0, 1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(reaches(&r, &[false, false, true]), vec![true, true, true]);
        assert_eq!(reaches(&r, &[true, false, false]), vec![true, false, false]);
        assert!(!strongly_connected(&r));
    }
}

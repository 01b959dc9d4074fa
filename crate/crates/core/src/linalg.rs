//! Small dense matrices over symbolic expressions.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::multiindex::permutations_with_parity;
use crate::ratio::rat_int;

/// Determinant by signed permutation expansion; fine at the `n <= 3` scales
/// of this crate.
pub fn det(mat: &[Vec<Expr>]) -> Expr {
    let n = mat.len();
    if n == 0 {
        return Expr::one();
    }
    let mut acc = Expr::zero();
    for (perm, parity) in permutations_with_parity(n) {
        let mut term = Expr::from_rat(rat_int(parity));
        for (row, &col) in perm.iter().enumerate() {
            term = &term * &mat[row][col];
            if term.is_zero() {
                break;
            }
        }
        acc = &acc + &term;
    }
    acc
}

/// Inverse via adjugate over the rational-function field.
#[allow(clippy::needless_range_loop)]
pub fn inverse(mat: &[Vec<Expr>]) -> Result<Vec<Vec<Expr>>> {
    let n = mat.len();
    let d = det(mat);
    if d.is_zero() {
        return Err(Error::Singular("determinant is identically zero".into()));
    }
    let mut out = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            // cofactor C_ji / det
            let minor: Vec<Vec<Expr>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(|c| mat[r][c].clone())
                        .collect()
                })
                .collect();
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            let cof = &det(&minor) * &Expr::from_int(sign);
            out[i][j] = cof.div_checked(&d)?;
        }
    }
    Ok(out)
}

/// Matrix-matrix product.
pub fn matmul(a: &[Vec<Expr>], b: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![Expr::zero(); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = Expr::zero();
            for l in 0..k {
                acc = &acc + &(&a[i][l] * &b[l][j]);
            }
            out[i][j] = acc;
        }
    }
    out
}

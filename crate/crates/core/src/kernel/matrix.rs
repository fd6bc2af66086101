//! Small dense matrices of expressions: determinant, adjugate, inverse.

use super::calculus::equals_zero;
use super::expr::Expr;
use super::registry;
use crate::error::{Error, Result};

pub type Matrix = Vec<Vec<Expr>>;

/// Determinant by cofactor expansion along the first row.
pub fn determinant(a: &Matrix) -> Expr {
    match a.len() {
        0 => Expr::one(),
        1 => a[0][0].clone(),
        2 => &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0]),
        n => {
            let mut out = Expr::zero();
            for j in 0..n {
                if a[0][j].is_zero() {
                    continue;
                }
                let minor = &a[0][j] * &determinant(&minor(a, 0, j));
                out = if j % 2 == 0 { &out + &minor } else { &out - &minor };
            }
            out
        }
    }
}

fn minor(a: &Matrix, row: usize, col: usize) -> Matrix {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, e)| e.clone()).collect())
        .collect()
}

/// Transposed cofactor matrix, so `a · adj(a) = det(a) · I`.
pub fn adjugate(a: &Matrix) -> Matrix {
    let n = a.len();
    if n == 1 {
        return vec![vec![Expr::one()]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = determinant(&minor(a, j, i));
                    if (i + j) % 2 == 0 { c } else { -c }
                })
                .collect()
        })
        .collect()
}

/// Registers `det(a)` nonvanishing and returns `(det(a), a^{-1})`.
pub fn inverse(a: &Matrix) -> Result<(Expr, Matrix)> {
    let det = determinant(a);
    if equals_zero(&det) {
        return Err(Error::SingularJacobian);
    }
    let inv_det = registry::register_nonvanishing(&det)?;
    let adj = adjugate(a);
    let inv = adj.iter().map(|row| row.iter().map(|e| e * &inv_det).collect()).collect();
    Ok((det, inv))
}

pub fn product(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|l| &a[i][l] * &b[l][j]).sum()).collect())
        .collect()
}

pub fn is_identity(a: &Matrix) -> bool {
    a.iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, e)| if i == j { equals_zero(&(e - &Expr::one())) } else { equals_zero(e) })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_symbolic_matrix() {
        let a = vec![vec![Expr::x(1), Expr::int(1)], vec![Expr::x(2), Expr::int(2)]];
        let (det, inv) = inverse(&a).unwrap();
        assert_eq!(det.to_string(), "2*x1 - x2");
        assert!(is_identity(&product(&a, &inv)));
        assert!(is_identity(&product(&inv, &a)));
    }

    #[test]
    fn three_by_three_determinant() {
        let m: Matrix = (0..3).map(|i| (0..3).map(|j| Expr::int(((i * 3 + j) * (i + 1)) as i64 % 7)).collect()).collect();
        // rows (0,1,2), (6,8,10)%7=(6,1,3), (18,21,24)%7=(4,0,3)
        assert_eq!(determinant(&m).to_string(), "-14");
        assert!(inverse(&vec![vec![Expr::int(1), Expr::int(2)], vec![Expr::int(2), Expr::int(4)]]).is_err());
    }
}

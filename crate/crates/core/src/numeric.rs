//! Dense f64 linear algebra for probe evaluations: LU determinant and
//! numeric rank with partial pivoting. Matrices here are tiny (block
//! sizes), so no external solver is warranted.

/// Determinant by LU with partial pivoting. Returns 0.0 on a structurally
/// empty pivot column.
pub fn lu_det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if a[i][k].abs() > a[piv][k].abs() {
                piv = i;
            }
        }
        if a[piv][k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k + 1..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// Numeric rank: row echelon with partial pivoting, counting pivots above
/// `tol_rel` times the largest absolute entry of the input.
pub fn lu_rank(mut a: Vec<Vec<f64>>, tol_rel: f64) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = tol_rel * scale;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let mut piv = row;
        for i in row + 1..rows {
            if a[i][col].abs() > a[piv][col].abs() {
                piv = i;
            }
        }
        if a[piv][col].abs() <= tol {
            continue;
        }
        a.swap(piv, row);
        for i in row + 1..rows {
            let f = a[i][col] / a[row][col];
            for j in col..cols {
                a[i][j] -= f * a[row][j];
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_known_matrix() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        assert!((lu_det(a) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rank_of_dependent_rows() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(lu_rank(a, 1e-9), 1);
        let b = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(lu_rank(b, 1e-9), 2);
    }
}

//! Plain-text exports of meshes and assembled matrices.

use deltaprime_core::sparse::CsrMatrix;

use crate::report::num;

/// One `i j value` line per stored entry, 1-based, sorted by row then column.
pub fn matrix_text(a: &CsrMatrix) -> String {
    let mut out = String::new();
    for (i, j, v) in a.triplets() {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, num(v)));
    }
    out
}

/// Eigenvalue table with the columns `index,value,residual`.
pub fn eigen_csv(values: &[f64], residuals: &[f64]) -> String {
    let mut out = String::from("index,value,residual\n");
    for (i, (v, r)) in values.iter().zip(residuals).enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, num(*v), num(*r)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_based_sorted() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(1, 1, 2.5), (0, 1, -1.0), (0, 0, 4.0), (1, 0, -1.0)]);
        assert_eq!(matrix_text(&a), "1 1 4\n1 2 -1\n2 1 -1\n2 2 2.5\n");
        assert_eq!(eigen_csv(&[-0.25], &[1e-9]), "index,value,residual\n1,-0.25,1e-9\n");
    }
}

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError, ONE};

pub const MAX_CHAR_POLY_ORDER: usize = 8;

/// Monic characteristic polynomial `det(λI − m)`, highest degree first.
///
/// Faddeev–LeVerrier recursion. Only exact for small orders, hence the cap.
pub fn char_poly(m: &ComplexMatrix) -> Result<Vec<Complex64>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n > MAX_CHAR_POLY_ORDER {
        return Err(LinalgError::OrderTooLarge {
            order: n,
            max: MAX_CHAR_POLY_ORDER,
        });
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    // coeffs[i] multiplies λ^(n−i)
    let mut coeffs = vec![ONE; n + 1];
    let mut mk = ComplexMatrix::zeros(n, n);
    let id = ComplexMatrix::identity(n);
    for k in 1..=n {
        mk = m.matmul(&mk).add(&id.scale(coeffs[k - 1]));
        let amk = m.matmul(&mk);
        coeffs[k] = -amk.trace() / k as f64;
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn real(n: usize, v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_row_major(n, n, v.iter().map(|&x| c(x)).collect())
    }

    #[test]
    fn identity_two() {
        assert_eq!(char_poly(&ComplexMatrix::identity(2)).unwrap(), vec![c(1.0), c(-2.0), c(1.0)]);
    }

    #[test]
    fn rotation() {
        assert_eq!(char_poly(&real(2, &[0.0, 1.0, -1.0, 0.0])).unwrap(), vec![c(1.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn goldstein_kac_reaction() {
        assert_eq!(char_poly(&real(2, &[-1.0, 1.0, 1.0, -1.0])).unwrap(), vec![c(1.0), c(2.0), c(0.0)]);
    }

    #[test]
    fn cubic_matches_cofactor_expansion() {
        let m = real(3, &[-6.0, 2.0, -9.0, 4.0, -10.0, -5.0, 8.0, 10.0, 2.0]);
        let p = char_poly(&m).unwrap();
        let tr = -14.0;
        let minors = (-6.0 * -10.0 - 2.0 * 4.0) + (-6.0 * 2.0 - (-9.0 * 8.0)) + (-10.0 * 2.0 - (-5.0 * 10.0));
        let det = m.determinant().unwrap();
        assert!((p[1] - c(-tr)).norm() < 1e-12);
        assert!((p[2] - c(minors)).norm() < 1e-12);
        assert!((p[3] + det).norm() < 1e-10);
    }

    #[test]
    fn order_cap() {
        assert_eq!(
            char_poly(&ComplexMatrix::identity(9)),
            Err(LinalgError::OrderTooLarge { order: 9, max: 8 })
        );
        assert!(matches!(char_poly(&ComplexMatrix::zeros(2, 1)), Err(LinalgError::NonSquare { .. })));
    }
}

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

/// Matrix exponential `e^{t·m}` by scaling and squaring around a Taylor core.
pub fn expm(m: &ComplexMatrix, t: f64) -> Result<ComplexMatrix, LinalgError> {
    m.check_square_finite()?;
    if !t.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = m.rows();
    let a = m.scale(Complex64::new(t, 0.0));
    let norm = a.norm_one();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm *= 0.5;
        squarings += 1;
    }
    let a = a.scale(Complex64::new(libm::ldexp(1.0, -(squarings as i32)), 0.0));

    // With ‖A‖ ≤ 1/2 the tail after term j is below 2·(1/2)^j / j!.
    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for j in 1..=40u32 {
        term = term.matmul(&a).scale(Complex64::new(1.0 / j as f64, 0.0));
        result = result.add(&term);
        if term.norm_one() <= f64::EPSILON * 1e-3 * result.norm_one() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    Ok(result)
}

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{solve_regularized, vec_norm, ComplexMatrix, LinalgError, ZERO};

const EPS: f64 = f64::EPSILON;

/// Eigenvalues of a square matrix together with per-value backward-error
/// estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSet {
    pub values: Vec<Complex64>,
    pub residuals: Vec<f64>,
}

impl EigenSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest real part.
    pub fn spectral_abscissa(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// All eigenvalues of `m`, repeated by algebraic multiplicity.
///
/// Householder reduction to Hessenberg form followed by single-shift complex
/// QR with Wilkinson shifts. Values come out in deflation order, which is
/// not meaningful; callers sort as they need.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<EigenSet, LinalgError> {
    m.check_square_finite()?;
    let mut h = m.clone();
    hessenberg(&mut h);
    let values = hessenberg_qr(&mut h)?;
    debug_assert_eq!(values.len(), m.rows());
    let residuals = values.iter().map(|&l| residual(m, l)).collect();
    Ok(EigenSet { values, residuals })
}

fn hessenberg(a: &mut ComplexMatrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let alpha_sq: f64 = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum();
        let alpha = libm::sqrt(alpha_sq);
        if alpha == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        // v = x + phase·‖x‖·e₁, reflector I − 2vvᴴ/(vᴴv)
        for i in 0..n {
            v[i] = if i > k { a[(i, k)] } else { ZERO };
        }
        v[k + 1] += phase * alpha;
        let vnorm_sq: f64 = v[k + 1..].iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;
        // left: A ← (I − βvvᴴ)A
        for j in k..n {
            let s: Complex64 = (k + 1..n).map(|i| v[i].conj() * a[(i, j)]).sum();
            let s = s * beta;
            for i in k + 1..n {
                a[(i, j)] -= v[i] * s;
            }
        }
        // right: A ← A(I − βvvᴴ)
        for i in 0..n {
            let s: Complex64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum();
            let s = s * beta;
            for j in k + 1..n {
                a[(i, j)] -= s * v[j].conj();
            }
        }
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

/// Rotation `[[c, s], [−s̄, c]]` with real `c` that maps `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let nu = libm::hypot(an, bn);
    (an / nu, (a / an) * b.conj() / nu)
}

fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let mean = (a + d) * 0.5;
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let p = mean + disc;
    let q = mean - disc;
    let l1 = if p.norm() >= q.norm() { p } else { q };
    if l1.norm() == 0.0 {
        return (ZERO, ZERO);
    }
    let det = a * d - b * c;
    (l1, det / l1)
}

fn hessenberg_qr(h: &mut ComplexMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let n = h.rows();
    let cap = 100 * n;
    let hnorm = h.norm_fro();
    let mut values = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            values.push(h[(0, 0)]);
            break;
        }
        let mut l = hi;
        while l > 0 {
            let mut tst = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if tst == 0.0 {
                tst = hnorm;
            }
            if h[(l, l - 1)].norm() <= EPS * tst || h[(l, l - 1)].norm() < f64::MIN_POSITIVE {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            values.push(h[(hi, hi)]);
            hi -= 1;
            its = 0;
            continue;
        }
        if l + 1 == hi {
            let (x, y) = eig2(h[(l, l)], h[(l, hi)], h[(hi, l)], h[(hi, hi)]);
            values.push(x);
            values.push(y);
            if l == 0 {
                break;
            }
            hi = l - 1;
            its = 0;
            continue;
        }
        if total >= cap {
            return Err(LinalgError::NoConvergence { iterations: total });
        }
        its += 1;
        total += 1;
        let shift = if its == 10 {
            h[(l, l)] + 0.75 * h[(l + 1, l)].re.abs()
        } else if its == 20 {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].re.abs()
        } else {
            let (x, y) = eig2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let d = h[(hi, hi)];
            if (x - d).norm() <= (y - d).norm() {
                x
            } else {
                y
            }
        };
        qr_step(h, l, hi, shift);
    }
    Ok(values)
}

/// One explicit shifted QR sweep on the active window `l..=hi`.
fn qr_step(h: &mut ComplexMatrix, l: usize, hi: usize, shift: Complex64) {
    for i in l..=hi {
        h[(i, i)] -= shift;
    }
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - l);
    for k in l..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        h[(k + 1, k)] = ZERO;
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = l + idx;
        let top = (k + 2).min(hi);
        for i in l..=top {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
    }
    for i in l..=hi {
        h[(i, i)] += shift;
    }
}

/// `‖(A − λI)y‖ / ‖y‖` after two steps of inverse iteration.
fn residual(a: &ComplexMatrix, lambda: Complex64) -> f64 {
    let n = a.rows();
    let shifted = ComplexMatrix::from_fn(n, n, |i, j| if i == j { a[(i, j)] - lambda } else { a[(i, j)] });
    let scale = a.norm_inf().max(lambda.norm());
    let floor = if scale > 0.0 { EPS * scale } else { f64::MIN_POSITIVE };
    let mut y = vec![Complex64::new(1.0 / libm::sqrt(n as f64), 0.0); n];
    for _ in 0..2 {
        let z = solve_regularized(&shifted, &y, floor);
        let nz = vec_norm(&z);
        if !(nz.is_finite() && nz > 0.0) {
            break;
        }
        y = z.iter().map(|w| w / nz).collect();
    }
    let r = shifted.mul_vec(&y);
    vec_norm(&r) / vec_norm(&y)
}

//! Large-|k| eigenvalue asymptotics in one dimension.
//!
//! Writing `M(k) = −2πik·(V + zB)` with `z = i/(2πk)`, the eigenvalues of
//! `V + zB` near `v_j` are analytic in `z` for `|z| < min-gap / (2‖B‖∞)` and
//! their Taylor coefficients `λ̂_j⁽ⁿ⁾` give
//!
//! ```text
//! λ_j(k) = b_jj − 2πikv_j + Σ_{n≥1} (i/2πk)ⁿ λ̂_j⁽ⁿ⁺¹⁾
//! ```
//!
//! All quantities refer to the model rescaled to the unit torus.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::linalg::RealMatrix;
use crate::{Error, ModelSpec, Result};

/// Highest coefficient order available.
pub const MAX_ORDER: usize = 13;
/// Default cap on `n*` (tests `λ̂⁽³⁾`, `λ̂⁽⁵⁾`, `λ̂⁽⁷⁾`).
pub const DEFAULT_N_STAR_CAP: usize = 3;
/// Largest `n*` cap; needs order `2·6 + 1 = 13`.
pub const MAX_N_STAR_CAP: usize = 6;

/// Relative gap below which velocities count as equal.
const GAP_TOL: f64 = 1e-12;

/// Velocities of the rescaled model, checked for pairwise distinctness.
fn distinct_velocities(spec: &ModelSpec) -> Result<Vec<f64>> {
    let unit = spec.rescale_to_unit_torus();
    let v = unit.velocities_1d()?.to_vec();
    if let Some(gap) = unit.velocity_gap() {
        let vmax = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if gap == 0.0 || gap < GAP_TOL * vmax {
            return Err(Error::DegenerateVelocities { gap });
        }
    }
    Ok(v)
}

/// Diagonals of the reduced resolvents `S_j = Σ_{i≠j} (v_i − v_j)⁻¹ e_i⊗e_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedResolvents {
    diagonals: Vec<Vec<f64>>,
}

impl ReducedResolvents {
    pub fn diagonal(&self, j: usize) -> &[f64] {
        &self.diagonals[j]
    }

    pub fn s_matrix(&self, j: usize) -> RealMatrix {
        let d = &self.diagonals[j];
        RealMatrix::from_fn(d.len(), d.len(), |a, b| if a == b { d[a] } else { 0.0 })
    }

    /// `P_j = e_j⊗e_j`.
    pub fn p_matrix(&self, j: usize) -> RealMatrix {
        let n = self.diagonals.len();
        RealMatrix::from_fn(n, n, |a, b| if a == j && b == j { 1.0 } else { 0.0 })
    }

    /// Diagonal of `S_j⁽ᵐ⁾`: `−P_j` for `m = 0`, `S_jᵐ` otherwise.
    fn power_diagonal(&self, j: usize, m: usize) -> Vec<f64> {
        let d = &self.diagonals[j];
        if m == 0 {
            return (0..d.len()).map(|i| if i == j { -1.0 } else { 0.0 }).collect();
        }
        d.iter().map(|&x| libm::pow(x, m as f64)).collect()
    }
}

pub fn reduced_resolvents(spec: &ModelSpec) -> Result<ReducedResolvents> {
    let v = distinct_velocities(spec)?;
    let n = v.len();
    let diagonals = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 0.0 } else { 1.0 / (v[i] - v[j]) }).collect())
        .collect();
    Ok(ReducedResolvents { diagonals })
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::OrderTooLarge { order: n, max: MAX_ORDER });
    }
    Ok(())
}

/// `λ̂_j⁽ⁿ⁾ = ((−1)ⁿ/n) Σ_{k₁+…+kₙ = n−1} tr(B S_j⁽ᵏ¹⁾ ⋯ B S_j⁽ᵏⁿ⁾)`.
///
/// Every `S_j⁽ᵐ⁾` is diagonal, so the sum over compositions is a dynamic
/// program over (factor position, partial sum) carrying a row vector.
pub fn coefficient(spec: &ModelSpec, j: usize, n: usize) -> Result<f64> {
    check_order(n)?;
    let res = reduced_resolvents(spec)?;
    Ok(coefficient_with(spec.reaction(), &res, j, n))
}

/// `λ̂_j⁽¹⁾ … λ̂_j⁽ⁿᵐᵃˣ⁾`.
pub fn coefficients(spec: &ModelSpec, j: usize, n_max: usize) -> Result<Vec<f64>> {
    check_order(n_max)?;
    let res = reduced_resolvents(spec)?;
    Ok((1..=n_max).map(|n| coefficient_with(spec.reaction(), &res, j, n)).collect())
}

fn coefficient_with(b: &RealMatrix, res: &ReducedResolvents, j: usize, n: usize) -> f64 {
    let dim = b.rows();
    let target = n - 1;
    let powers: Vec<Vec<f64>> = (0..=target).map(|m| res.power_diagonal(j, m)).collect();
    let mut trace = 0.0;
    for start in 0..dim {
        // layer[s][i]: row vector after some factors with partial sum s
        let mut layer = vec![vec![0.0; dim]; target + 1];
        layer[0][start] = 1.0;
        for _ in 0..n {
            let mut next = vec![vec![0.0; dim]; target + 1];
            for (s, x) in layer.iter().enumerate() {
                if x.iter().all(|&e| e == 0.0) {
                    continue;
                }
                let xb: Vec<f64> = (0..dim).map(|c| (0..dim).map(|r| x[r] * b[(r, c)]).sum()).collect();
                for (m, d) in powers.iter().enumerate().take(target - s + 1) {
                    for c in 0..dim {
                        next[s + m][c] += xb[c] * d[c];
                    }
                }
            }
            layer = next;
        }
        trace += layer[target][start];
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign * trace / n as f64
}

/// Closed forms for `n ≤ 3`.
pub fn closed_form_coefficient(spec: &ModelSpec, j: usize, n: usize) -> Result<f64> {
    let v = distinct_velocities(spec)?;
    let b = spec.reaction();
    let dim = v.len();
    let inv = |i: usize| 1.0 / (v[i] - v[j]);
    let others = || (0..dim).filter(move |&i| i != j);
    match n {
        1 => Ok(b[(j, j)]),
        2 => Ok(-others().map(|i| inv(i) * b[(j, i)] * b[(i, j)]).sum::<f64>()),
        3 => {
            let mut s = 0.0;
            for i in others() {
                for l in others() {
                    s += inv(l) * inv(i) * b[(j, l)] * b[(l, i)] * b[(i, j)];
                }
            }
            let t: f64 = others()
                .map(|i| inv(i) * inv(i) * b[(i, j)] * b[(j, i)] * b[(j, j)])
                .sum();
            Ok(s - t)
        }
        _ => Err(Error::OrderTooLarge { order: n, max: 3 }),
    }
}

/// `K_pert = max(1, ⌈2‖B‖∞ / (π·min-gap)⌉)`: from this mode on `|z|` is at
/// most half the convergence radius.
pub fn validity_threshold(spec: &ModelSpec) -> Result<u64> {
    let unit = spec.rescale_to_unit_torus();
    distinct_velocities(&unit)?;
    let Some(gap) = unit.velocity_gap() else {
        return Ok(1);
    };
    let k = libm::ceil(2.0 * unit.norm_b() / (PI * gap));
    Ok(if k.is_finite() { (k as u64).max(1) } else { u64::MAX })
}

/// `max-gap` and `2‖B‖∞ / min-gap` of the coefficient bound
/// `|λ̂⁽ⁿ⁾| ≤ max-gap · (2‖B‖∞/min-gap)ⁿ`. Both zero for `N = 1`.
pub fn cauchy_bound_parts(spec: &ModelSpec) -> Result<(f64, f64)> {
    let unit = spec.rescale_to_unit_torus();
    distinct_velocities(&unit)?;
    match (unit.velocity_gap(), unit.max_velocity_gap()) {
        (Some(min), Some(max)) => Ok((max, 2.0 * unit.norm_b() / min)),
        _ => Ok((0.0, 0.0)),
    }
}

pub fn cauchy_bound(spec: &ModelSpec, n: usize) -> Result<f64> {
    let (c, rho) = cauchy_bound_parts(spec)?;
    Ok(c * libm::pow(rho, n as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    /// Bound on the truncation error from the geometric coefficient tail.
    pub remainder_bound: f64,
}

/// Truncated series `b_jj − 2πikv_j + Σ_{n=1}^{n_max} (i/2πk)ⁿ λ̂_j⁽ⁿ⁺¹⁾`.
pub fn eigenvalue_series(spec: &ModelSpec, j: usize, k: i64, n_max: usize) -> Result<SeriesValue> {
    check_order(n_max + 1)?;
    let k_pert = validity_threshold(spec)?;
    if k.unsigned_abs() < k_pert {
        return Err(Error::BelowThreshold { k, k_pert });
    }
    let v = distinct_velocities(spec)?;
    let coeffs = coefficients(spec, j, n_max + 1)?;
    let kf = k as f64;
    let z = Complex64::new(0.0, 1.0 / (TAU * kf));
    let mut value = Complex64::new(spec.reaction()[(j, j)], -TAU * kf * v[j]);
    let mut zp = Complex64::new(1.0, 0.0);
    for c in &coeffs[1..] {
        zp *= z;
        value += zp * *c;
    }
    let (c, rho) = cauchy_bound_parts(spec)?;
    let q = rho * z.norm();
    let remainder_bound = if c == 0.0 || rho == 0.0 {
        0.0
    } else {
        c * rho * libm::pow(q, (n_max + 1) as f64) / (1.0 - q)
    };
    Ok(SeriesValue { value, remainder_bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
    Constant,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Increasing => "inc",
            Direction::Decreasing => "dec",
            Direction::Constant => "const",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchReport {
    /// `λ̂_j⁽¹⁾ … λ̂_j⁽²ᶜᵃᵖ⁺¹⁾`.
    pub coeffs: Vec<f64>,
    /// First `n ≤ cap` with `λ̂_j⁽²ⁿ⁺¹⁾ ≠ 0`.
    pub n_star: Option<usize>,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationReport {
    pub branches: Vec<BranchReport>,
    pub k_pert: u64,
    /// `2‖B‖∞ / min-gap`.
    pub coeff_bound_base: f64,
}

/// Eventual direction of `Re λ_j(k)` as `|k| → ∞` for every branch, with the
/// default `n*` cap.
pub fn monotonicity(spec: &ModelSpec) -> Result<PerturbationReport> {
    monotonicity_with_cap(spec, DEFAULT_N_STAR_CAP)
}

pub fn monotonicity_with_cap(spec: &ModelSpec, cap: usize) -> Result<PerturbationReport> {
    if cap == 0 || cap > MAX_N_STAR_CAP {
        return Err(Error::OrderTooLarge {
            order: 2 * cap + 1,
            max: MAX_ORDER,
        });
    }
    let k_pert = validity_threshold(spec)?;
    let (_, rho) = cauchy_bound_parts(spec)?;
    let b = spec.reaction();
    let n = spec.components();
    let n2_constant = n == 2 && (b[(0, 1)] == 0.0 || b[(1, 0)] == 0.0 || b[(0, 0)] == b[(1, 1)]);
    let mut branches = Vec::with_capacity(n);
    for j in 0..n {
        let coeffs = coefficients(spec, j, 2 * cap + 1)?;
        let mut n_star = None;
        if !n2_constant {
            for m in 1..=cap {
                let c = coeffs[2 * m];
                if c.abs() > 1e-12 * cauchy_bound(spec, 2 * m + 1)? {
                    n_star = Some(m);
                    break;
                }
            }
        }
        let direction = match n_star {
            None => Direction::Constant,
            Some(m) => {
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                if sign * coeffs[2 * m] > 0.0 {
                    Direction::Increasing
                } else {
                    Direction::Decreasing
                }
            }
        };
        branches.push(BranchReport {
            coeffs,
            n_star,
            direction,
        });
    }
    Ok(PerturbationReport {
        branches,
        k_pert,
        coeff_bound_base: rho,
    })
}

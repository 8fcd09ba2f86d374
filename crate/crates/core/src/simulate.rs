//! Exact evolution in Fourier space: `û(t, k) = exp(t·M(k))·û(0, k)`.
//!
//! Coefficients live on the box `|k|∞ ≤ K` in the window order of
//! [`crate::modes::window`]. In that order `−k` sits at the mirrored
//! position, which makes the conjugate-symmetry bookkeeping cheap.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::classify::goldstein_kac_model;
use crate::linalg::{expm, ComplexMatrix};
use crate::model::{block::check_state, NeumannState, SymmetricBlockModel};
use crate::modes::{mode_matrix, spectrum_at};
use crate::{Error, ModelSpec, Result};

/// Default amplitude of random initial data.
pub const DEFAULT_AMPLITUDE: f64 = 1e-4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Truncated Fourier coefficients `{û(k)}_{|k|∞ ≤ K}` of a real field.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierState {
    d: usize,
    n: usize,
    cutoff: usize,
    coeffs: Vec<Complex64>,
}

fn side(cutoff: usize) -> usize {
    2 * cutoff + 1
}

impl FourierState {
    pub fn zeros(d: usize, n: usize, cutoff: usize) -> Self {
        let modes = side(cutoff).pow(d as u32);
        Self {
            d,
            n,
            cutoff,
            coeffs: vec![ZERO; modes * n],
        }
    }

    /// Builds a state from explicit coefficients; modes not listed are zero.
    ///
    /// Fails unless `û(−k) = conj(û(k))` within `1e−12` of the largest
    /// coefficient, which includes `û(0)` being real.
    pub fn from_coefficients(
        d: usize,
        n: usize,
        cutoff: usize,
        entries: &[(Vec<i64>, Vec<Complex64>)],
    ) -> Result<Self> {
        let mut s = Self::zeros(d, n, cutoff);
        for (k, values) in entries {
            if k.len() != d {
                return Err(Error::DimensionMismatch {
                    field: "mode index",
                    expected: d,
                    got: k.len(),
                });
            }
            if values.len() != n {
                return Err(Error::DimensionMismatch {
                    field: "coefficient vector",
                    expected: n,
                    got: values.len(),
                });
            }
            if k.iter().any(|c| c.unsigned_abs() as usize > cutoff) {
                return Err(Error::DimensionMismatch {
                    field: "mode outside cutoff",
                    expected: cutoff,
                    got: k.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0),
                });
            }
            if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::NonFinite("coefficients"));
            }
            let idx = s.index(k);
            s.coeffs[idx * n..(idx + 1) * n].copy_from_slice(values);
        }
        let scale = s.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tol = 1e-12 * scale;
        let total = s.mode_count();
        for idx in 0..total {
            let mirror = total - 1 - idx;
            for j in 0..n {
                if (s.coeffs[idx * n + j] - s.coeffs[mirror * n + j].conj()).norm() > tol {
                    let k = s.mode_at(idx);
                    return Err(Error::RealityViolation(alloc::format!("{k:?}")));
                }
            }
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn components(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn mode_count(&self) -> usize {
        self.coeffs.len() / self.n.max(1)
    }

    /// Position of mode `k` in window order.
    ///
    /// # Panics
    ///
    /// Panics if `k` lies outside the cutoff box.
    pub fn index(&self, k: &[i64]) -> usize {
        let c = self.cutoff as i64;
        k.iter().fold(0usize, |acc, &ki| {
            assert!(ki.abs() <= c, "mode {ki} outside cutoff {c}");
            acc * side(self.cutoff) + (ki + c) as usize
        })
    }

    pub fn mode_at(&self, mut idx: usize) -> Vec<i64> {
        let s = side(self.cutoff);
        let mut k = vec![0i64; self.d];
        for axis in (0..self.d).rev() {
            k[axis] = (idx % s) as i64 - self.cutoff as i64;
            idx /= s;
        }
        k
    }

    pub fn get(&self, k: &[i64]) -> &[Complex64] {
        let i = self.index(k);
        &self.coeffs[i * self.n..(i + 1) * self.n]
    }

    /// Coefficient vectors in window order.
    pub fn modes(&self) -> impl Iterator<Item = (Vec<i64>, &[Complex64])> {
        self.coeffs
            .chunks(self.n)
            .enumerate()
            .map(move |(i, c)| (self.mode_at(i), c))
    }

    /// `ℓ²` norm of the coefficients, equal to the `L²` norm of the field
    /// with respect to normalized Lebesgue measure.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    /// Spatial averages `û(0)`.
    pub fn averages(&self) -> Vec<f64> {
        self.get(&vec![0; self.d]).iter().map(|z| z.re).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|z| *z *= s);
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        for (field, a, b) in [
            ("d", self.d, other.d),
            ("N", self.n, other.n),
            ("cutoff", self.cutoff, other.cutoff),
        ] {
            if a != b {
                return Err(Error::DimensionMismatch {
                    field,
                    expected: a,
                    got: b,
                });
            }
        }
        Ok(())
    }

    /// Multiplies `û(k)` by `exp(−|k|²/(2w²))`.
    pub fn smoothed(&self, width: f64) -> Self {
        let mut out = self.clone();
        for idx in 0..self.mode_count() {
            let k = self.mode_at(idx);
            let k2: f64 = k.iter().map(|&x| (x * x) as f64).sum();
            let f = libm::exp(-0.5 * k2 / (width * width));
            out.coeffs[idx * self.n..(idx + 1) * self.n].iter_mut().for_each(|z| *z *= f);
        }
        out
    }

    /// Field value at a point of the unit circle (one dimension only).
    pub fn evaluate_1d(&self, x: f64) -> Vec<f64> {
        debug_assert_eq!(self.d, 1);
        let mut out = vec![0.0; self.n];
        for (idx, c) in self.coeffs.chunks(self.n).enumerate() {
            let k = idx as f64 - self.cutoff as f64;
            let (s, co) = libm::sincos(TAU * k * x);
            let w = Complex64::new(co, s);
            for (o, z) in out.iter_mut().zip(c) {
                *o += (z * w).re;
            }
        }
        out
    }
}

/// Random real initial data with `û_j(k) ~ 𝒩(0, amplitude·(|k|∞+1)⁻²)`.
///
/// For `k ≠ 0` the variance is split equally between real and imaginary
/// parts; `û(0)` is real. Modes of one half-space are drawn in window order,
/// component by component, and the other half is set by conjugation.
pub fn sample_random_ic(spec: &ModelSpec, cutoff: usize, seed: u64, amplitude: f64) -> Result<FourierState> {
    if cutoff == 0 {
        return Err(Error::PreconditionUnmet("cutoff must be at least 1"));
    }
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::NonFinite("amplitude"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = FourierState::zeros(spec.dim(), spec.components(), cutoff);
    let n = s.n;
    let total = s.mode_count();
    let center = total / 2;
    let draw = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    for idx in center..total {
        let k = s.mode_at(idx);
        let kinf = k.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as f64;
        let var = amplitude / ((kinf + 1.0) * (kinf + 1.0));
        for j in 0..n {
            let z = if idx == center {
                Complex64::new(libm::sqrt(var) * draw(&mut rng), 0.0)
            } else {
                let sd = libm::sqrt(0.5 * var);
                let re = sd * draw(&mut rng);
                let im = sd * draw(&mut rng);
                Complex64::new(re, im)
            };
            s.coeffs[idx * n + j] = z;
            s.coeffs[(total - 1 - idx) * n + j] = z.conj();
        }
    }
    Ok(s)
}

fn check_compatible(spec: &ModelSpec, state: &FourierState) -> Result<()> {
    if spec.dim() != state.d {
        return Err(Error::DimensionMismatch {
            field: "d",
            expected: spec.dim(),
            got: state.d,
        });
    }
    if spec.components() != state.n {
        return Err(Error::DimensionMismatch {
            field: "N",
            expected: spec.components(),
            got: state.n,
        });
    }
    Ok(())
}

/// `û(k) ↦ exp(t·M(k))·û(k)` for every mode; any finite `t`, including
/// negative times.
pub fn evolve(spec: &ModelSpec, state: &FourierState, t: f64) -> Result<FourierState> {
    check_compatible(spec, state)?;
    let n = state.n;
    let total = state.mode_count();
    let center = total / 2;
    let mut out = state.clone();
    for idx in center..total {
        let k = state.mode_at(idx);
        let e = expm(&mode_matrix(spec, &k), t)?;
        let v = e.mul_vec(&state.coeffs[idx * n..(idx + 1) * n]);
        for j in 0..n {
            let z = if idx == center { Complex64::new(v[j].re, 0.0) } else { v[j] };
            out.coeffs[idx * n + j] = z;
            out.coeffs[(total - 1 - idx) * n + j] = z.conj();
        }
    }
    Ok(out)
}

/// Real samples of an `N`-component field on a uniform grid of the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub d: usize,
    /// Points per axis; `x_i = i·L/grid`.
    pub grid: usize,
    /// `values[j][p]` with `p` row-major over the axes.
    pub values: Vec<Vec<f64>>,
}

impl Field {
    /// `L²` norm for normalized measure, by the trapezoidal (exact) rule.
    pub fn l2_norm(&self) -> f64 {
        let pts = self.grid.pow(self.d as u32) as f64;
        libm::sqrt(self.values.iter().flatten().map(|x| x * x).sum::<f64>() / pts)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn extrema(&self) -> Vec<(f64, f64)> {
        self.values
            .iter()
            .map(|c| {
                c.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
            })
            .collect()
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field {
            d: self.d,
            grid: self.grid,
            values: self.values.iter().map(|c| c.iter().map(|x| x * s).collect()).collect(),
        }
    }
}

/// `2·(2K+2)` rounded up to a power of two.
pub fn default_grid(cutoff: usize) -> usize {
    (2 * (2 * cutoff + 2)).next_power_of_two()
}

/// `u(x) = Σ_k û(k)·e^{2πik·x/L}` on `grid` points per axis.
pub fn synthesize(state: &FourierState, grid: usize) -> Result<Field> {
    let need = 2 * state.cutoff + 2;
    if grid < need {
        return Err(Error::GridTooCoarse {
            got: grid,
            need,
            k: state.cutoff,
        });
    }
    let roots: Vec<Complex64> = (0..grid)
        .map(|m| {
            let (s, c) = libm::sincos(TAU * m as f64 / grid as f64);
            Complex64::new(c, s)
        })
        .collect();
    let points = grid.pow(state.d as u32);
    let n = state.n;
    let modes: Vec<(Vec<i64>, &[Complex64])> = state
        .modes()
        .filter(|(_, c)| c.iter().any(|z| *z != ZERO))
        .collect();
    let mut values = vec![vec![0.0; points]; n];
    let mut residue: f64 = 0.0;
    let mut x = vec![0usize; state.d];
    for p in 0..points {
        let mut acc = vec![ZERO; n];
        for (k, c) in &modes {
            let phase: i64 = k.iter().zip(&x).map(|(&ki, &xi)| ki * xi as i64).sum();
            let w = roots[phase.rem_euclid(grid as i64) as usize];
            for (a, z) in acc.iter_mut().zip(c.iter()) {
                *a += z * w;
            }
        }
        for j in 0..n {
            values[j][p] = acc[j].re;
            residue = residue.max(acc[j].im.abs());
        }
        for axis in (0..state.d).rev() {
            x[axis] += 1;
            if x[axis] < grid {
                break;
            }
            x[axis] = 0;
        }
    }
    if residue > 1e-10 * state.norm() {
        return Err(Error::ImaginaryResidue { residue });
    }
    Ok(Field {
        d: state.d,
        grid,
        values,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observables {
    pub t: f64,
    /// Spatial means `∫u_j dx / Lᵈ`.
    pub averages: Vec<f64>,
    pub l2_norm: f64,
    pub min_value: f64,
    /// `(min, max)` per component on the synthesis grid.
    pub extrema: Vec<(f64, f64)>,
}

/// Observables of `state` viewed as the solution at time `t`, with extrema
/// taken on the default grid.
pub fn observables(spec: &ModelSpec, state: &FourierState, t: f64) -> Result<Observables> {
    check_compatible(spec, state)?;
    let field = synthesize(state, default_grid(state.cutoff))?;
    Ok(Observables {
        t,
        averages: state.averages(),
        l2_norm: state.norm(),
        min_value: field.min(),
        extrema: field.extrema(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rate {
    Fixed(f64),
    /// `sup Σ(k)` over the cutoff box, so the output stays of order one.
    Auto,
}

/// Resolves [`Rate::Auto`] to the sampled growth bound.
pub fn resolve_rate(spec: &ModelSpec, cutoff: usize, rate: Rate) -> Result<f64> {
    match rate {
        Rate::Fixed(c) => Ok(c),
        Rate::Auto => {
            let mut sup = f64::NEG_INFINITY;
            for k in crate::modes::window(spec.dim(), cutoff as u64) {
                sup = sup.max(spectrum_at(spec, &k)?[0].re);
            }
            Ok(sup)
        }
    }
}

/// `e^{−ct}·u(t)` on the grid for each time; times must ascend.
pub fn rescaled_trajectory(
    spec: &ModelSpec,
    state: &FourierState,
    times: &[f64],
    rate: Rate,
    grid: usize,
) -> Result<Vec<(f64, Field)>> {
    if times.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::PreconditionUnmet("times must be sorted ascending"));
    }
    let c = resolve_rate(spec, state.cutoff, rate)?;
    times
        .iter()
        .map(|&t| {
            let f = synthesize(&evolve(spec, state, t)?, grid)?;
            Ok((t, f.scaled(libm::exp(-c * t))))
        })
        .collect()
}

/// Least-squares slope of `log ‖u(t) − P u(t)‖` for the Goldstein-Kac model,
/// where `P` projects onto the constant state `((ū₁+ū₂)/2)(1, 1)`.
pub fn goldstein_kac_convergence_fit(
    lambda: f64,
    v: f64,
    length: f64,
    state: &FourierState,
    t_grid: &[f64],
) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(Error::NonPositiveLambda(lambda));
    }
    let spec = goldstein_kac_model(lambda, v, length)?;
    check_compatible(&spec, state)?;
    if t_grid.len() < 2 {
        return Err(Error::DegenerateData("need at least two times"));
    }
    let mut pts = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut u = evolve(&spec, state, t)?;
        let idx = u.index(&[0]);
        let mean = 0.5 * (u.coeffs[2 * idx] + u.coeffs[2 * idx + 1]);
        u.coeffs[2 * idx] -= mean;
        u.coeffs[2 * idx + 1] -= mean;
        let r = u.norm();
        if !(r.is_finite() && r > f64::MIN_POSITIVE) {
            return Err(Error::DegenerateData("distance to the mean state underflows"));
        }
        pts.push((t, libm::log(r)));
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateData("all times coincide"));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    Ok(sxy / sxx)
}

/// Fourier coefficients (cutoff `n`) of the reflected extension of a
/// cell-centred state on `(0, L)` with `n` cells, as a state of the periodic
/// model on `(0, 2L)`. The Nyquist mode is split evenly between `±n`.
pub fn neumann_fourier_state(block: &SymmetricBlockModel, state: &NeumannState) -> Result<(ModelSpec, FourierState)> {
    let ext = block.neumann_extend(state)?;
    let spec = block.periodic_spec()?;
    let species = block.species();
    let n = state.grid_len();
    let m = 2 * n;
    let rows: Vec<&Vec<f64>> = ext.alpha.iter().chain(ext.beta.iter()).collect();
    let mut out = FourierState::zeros(1, 2 * species, n);
    let roots: Vec<Complex64> = (0..2 * m)
        .map(|r| {
            let (s, c) = libm::sincos(-TAU * r as f64 / (2 * m) as f64);
            Complex64::new(c, s)
        })
        .collect();
    let ncomp = 2 * species;
    for k in -(n as i64)..=(n as i64) {
        let idx = out.index(&[k]);
        for (j, row) in rows.iter().enumerate() {
            // x_i/(2L) = (2i+1)/(2m): phase index k·(2i+1) modulo 2m
            let mut acc = ZERO;
            for (i, &u) in row.iter().enumerate() {
                let ph = (k * (2 * i as i64 + 1)).rem_euclid(2 * m as i64) as usize;
                acc += roots[ph] * u;
            }
            acc /= m as f64;
            if k.unsigned_abs() as usize == n {
                acc *= 0.5;
            }
            out.coeffs[idx * ncomp + j] = acc;
        }
    }
    Ok((spec, out))
}

/// Samples the periodic extension state back on the cell centres of `(0, L)`.
pub fn restrict_to_interval(state: &FourierState, species: usize, cells: usize) -> NeumannState {
    let m = 2 * cells;
    let mut alpha = vec![vec![0.0; cells]; species];
    let mut beta = vec![vec![0.0; cells]; species];
    for i in 0..cells {
        let x = (2 * i + 1) as f64 / (2 * m) as f64;
        let u = state.evaluate_1d(x);
        for s in 0..species {
            alpha[s][i] = u[s];
            beta[s][i] = u[species + s];
        }
    }
    NeumannState { alpha, beta }
}

/// Evolves reflecting-boundary data on `(0, L)` through the periodic model
/// on `(0, 2L)`.
pub fn simulate_neumann(block: &SymmetricBlockModel, state: &NeumannState, t: f64) -> Result<NeumannState> {
    check_state(state, block.species())?;
    let (spec, fs) = neumann_fourier_state(block, state)?;
    let evolved = evolve(&spec, &fs, t)?;
    Ok(restrict_to_interval(&evolved, block.species(), state.grid_len()))
}

/// Number of strict local maxima of periodic samples. Plateaus count once.
pub fn local_maxima_periodic(values: &[f64]) -> usize {
    let n = values.len();
    if n < 3 {
        return 0;
    }
    // compress runs of equal values, then compare cyclic neighbours
    let mut runs: Vec<f64> = Vec::with_capacity(n);
    for &x in values {
        if runs.last() != Some(&x) {
            runs.push(x);
        }
    }
    if runs.len() > 1 && runs.first() == runs.last() {
        runs.pop();
    }
    let m = runs.len();
    if m < 2 {
        return 0;
    }
    (0..m)
        .filter(|&i| runs[i] > runs[(i + m - 1) % m] && runs[i] > runs[(i + 1) % m])
        .count()
}

/// Sign changes of mean-subtracted periodic samples; exact zeros are skipped.
pub fn zero_crossings_periodic(values: &[f64]) -> usize {
    let n = values.len();
    if n == 0 {
        return 0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let signs: Vec<bool> = values.iter().map(|x| x - mean).filter(|x| *x != 0.0).map(|x| x > 0.0).collect();
    let m = signs.len();
    (0..m).filter(|&i| signs[i] != signs[(i + 1) % m]).count()
}

/// Applies `exp(t·M(k))` to a single coefficient vector.
pub fn propagate_mode(spec: &ModelSpec, k: &[i64], t: f64, u: &[Complex64]) -> Result<Vec<Complex64>> {
    let e: ComplexMatrix = expm(&mode_matrix(spec, k), t)?;
    Ok(e.mul_vec(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{goldstein_kac_eigenvalues, goldstein_kac_rate};
    use crate::linalg::RealMatrix;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spec_rows<R: AsRef<[f64]>>(v: &[f64], b: &[R]) -> ModelSpec {
        ModelSpec::one_dim_rows(v, b).unwrap()
    }

    fn max_diff(a: &FourierState, b: &FourierState) -> f64 {
        a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn index_round_trip_and_mirror() {
        let s = FourierState::zeros(2, 1, 3);
        for idx in 0..s.mode_count() {
            let k = s.mode_at(idx);
            assert_eq!(s.index(&k), idx);
            let neg: Vec<i64> = k.iter().map(|x| -x).collect();
            assert_eq!(s.index(&neg), s.mode_count() - 1 - idx);
        }
    }

    #[test]
    fn random_ic_properties() {
        let spec = spec_rows(&[0.1, -0.2], &[[0.0, 0.0], [0.0, 0.0]]);
        let a = sample_random_ic(&spec, 10, 7, 1e-4).unwrap();
        let b = sample_random_ic(&spec, 10, 7, 1e-4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_random_ic(&spec, 10, 8, 1e-4).unwrap());
        for (k, v) in a.modes() {
            let neg: Vec<i64> = k.iter().map(|x| -x).collect();
            for (x, y) in v.iter().zip(a.get(&neg)) {
                assert_eq!(*x, y.conj());
            }
        }
        assert!(a.get(&[0]).iter().all(|z| z.im == 0.0));
        let z = sample_random_ic(&spec, 10, 7, 0.0).unwrap();
        assert_eq!(z, FourierState::zeros(1, 2, 10));
        assert!(matches!(sample_random_ic(&spec, 0, 7, 1.0), Err(Error::PreconditionUnmet(_))));
    }

    #[test]
    fn random_ic_variance() {
        let spec = spec_rows(&[0.0], &[[0.0]]);
        let mut acc = [0.0f64; 3];
        let trials = 4000;
        for seed in 0..trials {
            let s = sample_random_ic(&spec, 2, seed, 1.0).unwrap();
            for k in 0..3 {
                acc[k] += s.get(&[k as i64])[0].norm_sqr();
            }
        }
        for (k, a) in acc.iter().enumerate() {
            let want = 1.0 / ((k + 1) * (k + 1)) as f64;
            assert!((a / trials as f64 - want).abs() < 0.1 * want, "k={k}");
        }
    }

    #[test]
    fn explicit_coefficients_must_be_real() {
        let ok = FourierState::from_coefficients(
            1,
            1,
            2,
            &[(vec![1], vec![c(1.0, 2.0)]), (vec![-1], vec![c(1.0, -2.0)]), (vec![0], vec![c(3.0, 0.0)])],
        );
        assert!(ok.is_ok());
        let missing = FourierState::from_coefficients(1, 1, 2, &[(vec![1], vec![c(1.0, 2.0)])]);
        assert!(matches!(missing, Err(Error::RealityViolation(_))));
        let complex_mean = FourierState::from_coefficients(1, 1, 2, &[(vec![0], vec![c(1.0, 1.0)])]);
        assert!(matches!(complex_mean, Err(Error::RealityViolation(_))));
        let outside = FourierState::from_coefficients(1, 1, 2, &[(vec![3], vec![c(1.0, 0.0)])]);
        assert!(matches!(outside, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn evolve_at_zero_time_is_identity() {
        let spec = spec_rows(&[0.1, -0.2, 0.2], &[[-8.0, 2.0, -9.0], [-5.0, -3.0, -10.0], [9.0, -9.0, -1.0]]);
        let s = sample_random_ic(&spec, 6, 1, 1.0).unwrap();
        assert_eq!(evolve(&spec, &s, 0.0).unwrap(), s);
    }

    #[test]
    fn pure_transport_multiplies_by_phase() {
        let spec = spec_rows(&[1.0], &[[0.0]]);
        let s = FourierState::from_coefficients(1, 1, 1, &[(vec![1], vec![c(1.0, 0.0)]), (vec![-1], vec![c(1.0, 0.0)])])
            .unwrap();
        let t = 0.3;
        let e = evolve(&spec, &s, t).unwrap();
        assert!((e.get(&[1])[0] - c(0.0, -TAU * t).exp()).norm() < 1e-14);
    }

    #[test]
    fn pure_transport_shifts_grid_exactly() {
        let spec = spec_rows(&[0.5], &[[0.0]]);
        let s = sample_random_ic(&spec, 12, 3, 1.0).unwrap();
        let grid = 32;
        // t·v·grid = 3 grid cells
        let t = 3.0 / (0.5 * grid as f64);
        let f0 = synthesize(&s, grid).unwrap();
        let f1 = synthesize(&evolve(&spec, &s, t).unwrap(), grid).unwrap();
        for i in 0..grid {
            assert!((f1.values[0][(i + 3) % grid] - f0.values[0][i]).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_reaction_factorizes() {
        let spec = spec_rows(&[0.3, -0.4], &[[-0.5, 0.0], [0.0, 0.25]]);
        let pure = spec_rows(&[0.3, -0.4], &[[0.0, 0.0], [0.0, 0.0]]);
        let s = sample_random_ic(&spec, 5, 11, 1.0).unwrap();
        let t = 1.7;
        let a = evolve(&spec, &s, t).unwrap();
        let b = evolve(&pure, &s, t).unwrap();
        for (k, v) in a.modes() {
            let w = b.get(&k);
            assert!((v[0] - w[0] * (-0.5 * t).exp()).norm() < 1e-12);
            assert!((v[1] - w[1] * (0.25 * t).exp()).norm() < 1e-12);
        }
    }

    #[test]
    fn synthesis_of_single_mode() {
        let s = FourierState::from_coefficients(
            1,
            2,
            1,
            &[(vec![1], vec![c(1.0, 0.0), ZERO]), (vec![-1], vec![c(1.0, 0.0), ZERO])],
        )
        .unwrap();
        let f = synthesize(&s, 8).unwrap();
        for i in 0..8 {
            let x = i as f64 / 8.0;
            assert!((f.values[0][i] - 2.0 * (TAU * x).cos()).abs() < 1e-14);
            assert_eq!(f.values[1][i], 0.0);
        }
        let z = synthesize(&FourierState::zeros(1, 2, 3), 8).unwrap();
        assert!(z.values.iter().flatten().all(|x| *x == 0.0));
        assert!(matches!(synthesize(&s, 3), Err(Error::GridTooCoarse { need: 4, .. })));
    }

    #[test]
    fn default_grid_sizes() {
        assert_eq!(default_grid(100), 512);
        assert_eq!(default_grid(1), 8);
        assert_eq!(default_grid(8), 64);
    }

    #[test]
    fn parseval_two_dimensions() {
        let spec = ModelSpec::new(2, &[[0.1, 0.2], [0.0, -0.3]], RealMatrix::zeros(2, 2), 1.0).unwrap();
        let s = sample_random_ic(&spec, 4, 5, 1.0).unwrap();
        let f = synthesize(&s, 10).unwrap();
        assert!((f.l2_norm() - s.norm()).abs() <= 1e-9 * s.norm());
    }

    #[test]
    fn goldstein_kac_fit_on_eigenmode() {
        for (lambda, v) in [(1.0, 1.0), (10.0, 0.5)] {
            let spec = goldstein_kac_model(lambda, v, 1.0).unwrap();
            let m = mode_matrix(&spec, &[1]);
            let top = goldstein_kac_eigenvalues(lambda, v, 1.0, 1)[0];
            let z = [m[(0, 1)], top - m[(0, 0)]];
            let s = FourierState::from_coefficients(
                1,
                2,
                1,
                &[(vec![1], z.to_vec()), (vec![-1], z.iter().map(|x| x.conj()).collect())],
            )
            .unwrap();
            let ts: Vec<f64> = (0..9).map(|i| 2.0 + i as f64).collect();
            let w = goldstein_kac_rate(lambda, v, 1.0).unwrap();
            let fit = goldstein_kac_convergence_fit(lambda, v, 1.0, &s, &ts).unwrap();
            assert!((fit - w).abs() < 1e-6, "{fit} vs {w}");
        }
    }

    #[test]
    fn goldstein_kac_fit_constant_data() {
        let s = FourierState::from_coefficients(1, 2, 1, &[(vec![0], vec![c(1.0, 0.0), c(0.0, 0.0)])]).unwrap();
        let fit = goldstein_kac_convergence_fit(1.5, 1.0, 1.0, &s, &[0.0, 1.0, 2.0]).unwrap();
        assert!((fit + 3.0).abs() < 1e-9);
        let z = FourierState::zeros(1, 2, 1);
        assert!(matches!(
            goldstein_kac_convergence_fit(1.5, 1.0, 1.0, &z, &[0.0, 1.0]),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn averages_follow_reaction_flow() {
        let spec = spec_rows(&[0.1, -0.2], &[[-1.0, 1.0], [1.0, -1.0]]);
        let s = sample_random_ic(&spec, 6, 2, 1.0).unwrap();
        let a0 = s.averages();
        for t in [0.0, 0.5, 3.0] {
            let o = observables(&spec, &evolve(&spec, &s, t).unwrap(), t).unwrap();
            let e = expm(&spec.reaction().to_complex(), t).unwrap();
            let want = e.mul_vec(&[c(a0[0], 0.0), c(a0[1], 0.0)]);
            for j in 0..2 {
                assert!((o.averages[j] - want[j].re).abs() < 1e-9);
            }
            assert!((o.averages.iter().sum::<f64>() - a0.iter().sum::<f64>()).abs() < 1e-12);
        }
    }

    #[test]
    fn rescaled_trajectory_rates() {
        let spec = goldstein_kac_model(1.0, 1.0, 1.0).unwrap();
        assert!(resolve_rate(&spec, 8, Rate::Auto).unwrap().abs() < 1e-12);
        let s = sample_random_ic(&spec, 4, 9, 1.0).unwrap();
        let raw = rescaled_trajectory(&spec, &s, &[0.0, 1.0], Rate::Fixed(0.0), 16).unwrap();
        assert_eq!(raw[1].1, synthesize(&evolve(&spec, &s, 1.0).unwrap(), 16).unwrap());
        assert!(rescaled_trajectory(&spec, &s, &[1.0, 0.0], Rate::Fixed(0.0), 16).is_err());
    }

    #[test]
    fn neumann_round_trip_at_zero_time() {
        let block = SymmetricBlockModel::new(
            vec![1.0],
            RealMatrix::from_rows(&[[-1.0]]).unwrap(),
            RealMatrix::from_rows(&[[1.0]]).unwrap(),
            1.0,
        )
        .unwrap();
        let n = 16;
        let st = NeumannState {
            alpha: vec![(0..n).map(|i| (i as f64 * 0.7).sin()).collect()],
            beta: vec![(0..n).map(|i| (i as f64 * 0.3).cos()).collect()],
        };
        let back = simulate_neumann(&block, &st, 0.0).unwrap();
        for i in 0..n {
            assert!((back.alpha[0][i] - st.alpha[0][i]).abs() < 1e-12);
            assert!((back.beta[0][i] - st.beta[0][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn counting_helpers() {
        assert_eq!(local_maxima_periodic(&[0.0, 1.0, 0.0, 1.0]), 2);
        assert_eq!(local_maxima_periodic(&[1.0, 1.0, 0.0, 0.0]), 1);
        assert_eq!(local_maxima_periodic(&[2.0; 5]), 0);
        let wave: Vec<f64> = (0..64).map(|i| (TAU * 4.0 * i as f64 / 64.0 + 0.1).sin()).collect();
        assert_eq!(local_maxima_periodic(&wave), 4);
        assert_eq!(zero_crossings_periodic(&wave), 8);
    }

    fn rk4_oracle(spec: &ModelSpec, state: &FourierState, t: f64, h: f64) -> FourierState {
        let mut out = state.clone();
        let steps = (t / h).round() as usize;
        let n = state.n;
        for idx in 0..state.mode_count() {
            let m = mode_matrix(spec, &state.mode_at(idx));
            let mut u: Vec<Complex64> = state.coeffs[idx * n..(idx + 1) * n].to_vec();
            let f = |x: &[Complex64]| m.mul_vec(x);
            let axpy = |a: &[Complex64], s: f64, b: &[Complex64]| -> Vec<Complex64> {
                a.iter().zip(b).map(|(x, y)| x + y * s).collect()
            };
            for _ in 0..steps {
                let k1 = f(&u);
                let k2 = f(&axpy(&u, h / 2.0, &k1));
                let k3 = f(&axpy(&u, h / 2.0, &k2));
                let k4 = f(&axpy(&u, h, &k3));
                for j in 0..n {
                    u[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
                }
            }
            out.coeffs[idx * n..(idx + 1) * n].copy_from_slice(&u);
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn matches_rk4(b in proptest::collection::vec(-2.0f64..2.0, 4), seed in any::<u64>(), t in 0.1f64..1.0) {
            let spec = ModelSpec::one_dim(&[0.3, -0.2], RealMatrix::from_row_major(2, 2, b)).unwrap();
            let s = sample_random_ic(&spec, 4, seed, 1.0).unwrap();
            let exact = evolve(&spec, &s, t).unwrap();
            let h = t / (t / 1e-3).round();
            let rk = rk4_oracle(&spec, &s, t, h);
            prop_assert!(max_diff(&exact, &rk) < 1e-6);
        }

        #[test]
        fn group_law(b in proptest::collection::vec(-2.0f64..2.0, 9), seed in any::<u64>(), s1 in -1.5f64..1.5, s2 in -1.5f64..1.5) {
            let spec = ModelSpec::one_dim(&[0.1, -0.3, 0.25], RealMatrix::from_row_major(3, 3, b)).unwrap();
            let u = sample_random_ic(&spec, 6, seed, 1.0).unwrap();
            let a = evolve(&spec, &u, s1 + s2).unwrap();
            let b = evolve(&spec, &evolve(&spec, &u, s1).unwrap(), s2).unwrap();
            prop_assert!(max_diff(&a, &b) <= 1e-9 * (1.0 + a.norm()));
            let back = evolve(&spec, &evolve(&spec, &u, s1).unwrap(), -s1).unwrap();
            prop_assert!(max_diff(&back, &u) <= 1e-9 * (1.0 + u.norm()));
        }

        #[test]
        fn parseval(seed in any::<u64>(), cutoff in 1usize..20) {
            let spec = ModelSpec::one_dim_rows(&[0.1, 0.2], &[[0.0, 0.0], [0.0, 0.0]]).unwrap();
            let s = sample_random_ic(&spec, cutoff, seed, 1.0).unwrap();
            let f = synthesize(&s, 2 * cutoff + 2).unwrap();
            prop_assert!((f.l2_norm() - s.norm()).abs() <= 1e-9 * s.norm());
        }

        #[test]
        fn killing_factorizes(seed in any::<u64>(), delta in 0.01f64..2.0, t in -1.0f64..2.0) {
            let spec = ModelSpec::one_dim_rows(&[0.5, -0.1], &[[-2.0, 3.0], [-1.0, -1.0]]).unwrap();
            let killed = spec.apply_killing(delta).unwrap();
            let u = sample_random_ic(&spec, 5, seed, 1.0).unwrap();
            let a = evolve(&killed, &u, t).unwrap();
            let b = evolve(&spec, &u, t).unwrap().scaled((-delta * t).exp());
            prop_assert!(max_diff(&a, &b) <= 1e-10 * (1.0 + b.norm()));
        }

        #[test]
        fn positive_semigroup_keeps_sign(seed in any::<u64>(), t in 0.0f64..2.0) {
            // non-negative smooth data: 1 + small perturbation, positive off-diagonals
            let spec = ModelSpec::one_dim_rows(&[0.4, -0.4], &[[-1.0, 1.0], [0.5, -0.5]]).unwrap();
            prop_assert!(spec.positivity_check().positive);
            let mut u = sample_random_ic(&spec, 6, seed, 1e-3).unwrap();
            let idx = u.index(&[0]);
            u.coeffs[2 * idx] += 1.0;
            u.coeffs[2 * idx + 1] += 1.0;
            let f0 = synthesize(&u, 64).unwrap();
            prop_assume!(f0.min() >= 0.0);
            let f = synthesize(&evolve(&spec, &u, t).unwrap(), 64).unwrap();
            prop_assert!(f.min() >= -1e-8);
        }
    }
}

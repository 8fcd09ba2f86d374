//! Model definition, validation, transforms and structural predicates.

pub(crate) mod block;
mod periodicity;

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::RealMatrix;
use crate::{Error, Result};

pub use block::{NeumannState, SymmetricBlockModel};
pub use periodicity::{ComponentPeriodicity, Periodicity, Rational};

/// A linear transport-reaction model `∂ₜu + diag(v)·∇u = Bu` on the torus of
/// side length `L` in `d` dimensions with `N` components.
///
/// Immutable once constructed; every constructor validates.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    d: usize,
    n: usize,
    length: f64,
    /// `N × d`, row-major by component.
    velocities: Vec<f64>,
    b: RealMatrix,
    exact: Option<Vec<Rational>>,
    norm_b: f64,
}

impl ModelSpec {
    /// Builds and validates a model. `velocities[j]` is the velocity vector of
    /// component `j`.
    pub fn new<V: AsRef<[f64]>>(d: usize, velocities: &[V], b: RealMatrix, length: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::DimensionMismatch {
                field: "d",
                expected: 1,
                got: 0,
            });
        }
        let n = b.rows();
        if n == 0 {
            return Err(Error::DimensionMismatch {
                field: "N",
                expected: 1,
                got: 0,
            });
        }
        if b.cols() != n {
            return Err(Error::DimensionMismatch {
                field: "B",
                expected: n,
                got: b.cols(),
            });
        }
        if velocities.len() != n {
            return Err(Error::DimensionMismatch {
                field: "velocities",
                expected: n,
                got: velocities.len(),
            });
        }
        let mut flat = Vec::with_capacity(n * d);
        for v in velocities {
            let v = v.as_ref();
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    field: "velocity vector",
                    expected: d,
                    got: v.len(),
                });
            }
            flat.extend_from_slice(v);
        }
        if !b.is_finite() {
            return Err(Error::NonFinite("B"));
        }
        if flat.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("velocities"));
        }
        if !length.is_finite() {
            return Err(Error::NonFinite("L"));
        }
        if length <= 0.0 {
            return Err(Error::NonPositiveLength(length));
        }
        let norm_b = b.norm_inf();
        Ok(Self {
            d,
            n,
            length,
            velocities: flat,
            b,
            exact: None,
            norm_b,
        })
    }

    /// One-dimensional model on the unit torus.
    pub fn one_dim(velocities: &[f64], b: RealMatrix) -> Result<Self> {
        let vs: Vec<[f64; 1]> = velocities.iter().map(|&v| [v]).collect();
        Self::new(1, &vs, b, 1.0)
    }

    /// Convenience for literal matrices in one dimension.
    ///
    /// # Panics
    ///
    /// Panics if the rows are ragged.
    pub fn one_dim_rows<R: AsRef<[f64]>>(velocities: &[f64], rows: &[R]) -> Result<Self> {
        Self::one_dim(velocities, RealMatrix::from_rows(rows).expect("ragged matrix rows"))
    }

    pub fn with_length(mut self, length: f64) -> Result<Self> {
        if !length.is_finite() {
            return Err(Error::NonFinite("L"));
        }
        if length <= 0.0 {
            return Err(Error::NonPositiveLength(length));
        }
        self.length = length;
        Ok(self)
    }

    /// Attaches exact rational velocities, component-major like the float
    /// ones. They must agree with the float velocities to 1e−12 relative.
    pub fn with_exact_velocities(mut self, exact: &[Vec<Rational>]) -> Result<Self> {
        if exact.len() != self.n {
            return Err(Error::DimensionMismatch {
                field: "velocities_exact",
                expected: self.n,
                got: exact.len(),
            });
        }
        let mut flat = Vec::with_capacity(self.n * self.d);
        for row in exact {
            if row.len() != self.d {
                return Err(Error::DimensionMismatch {
                    field: "velocities_exact entry",
                    expected: self.d,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        for (q, &v) in flat.iter().zip(&self.velocities) {
            let x = q.to_f64();
            if (x - v).abs() > 1e-12 * v.abs().max(1.0) {
                return Err(Error::IrrationalInputUnsupported(alloc::format!(
                    "exact velocity {q} disagrees with {v}"
                )));
            }
        }
        self.exact = Some(flat);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn components(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn reaction(&self) -> &RealMatrix {
        &self.b
    }

    pub fn velocity(&self, j: usize) -> &[f64] {
        &self.velocities[j * self.d..(j + 1) * self.d]
    }

    pub fn velocities(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|j| self.velocity(j).to_vec()).collect()
    }

    pub fn exact_velocities(&self) -> Option<Vec<Vec<Rational>>> {
        self.exact
            .as_ref()
            .map(|e| e.chunks(self.d).map(<[Rational]>::to_vec).collect())
    }

    /// Scalar velocities of a one-dimensional model.
    pub fn velocities_1d(&self) -> Result<&[f64]> {
        if self.d != 1 {
            return Err(Error::UnsupportedDimension(self.d));
        }
        Ok(&self.velocities)
    }

    /// `‖B‖∞`, the maximum absolute row sum.
    pub fn norm_b(&self) -> f64 {
        self.norm_b
    }

    /// `min_{i≠j} |v_i − v_j|` for one-dimensional models with `N ≥ 2`.
    pub fn velocity_gap(&self) -> Option<f64> {
        self.pairwise_gaps().map(|(min, _)| min)
    }

    /// `max_{i≠j} |v_i − v_j|` for one-dimensional models with `N ≥ 2`.
    pub fn max_velocity_gap(&self) -> Option<f64> {
        self.pairwise_gaps().map(|(_, max)| max)
    }

    fn pairwise_gaps(&self) -> Option<(f64, f64)> {
        if self.d != 1 || self.n < 2 {
            return None;
        }
        let v = &self.velocities;
        let mut min = f64::INFINITY;
        let mut max: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let g = (v[i] - v[j]).abs();
                min = min.min(g);
                max = max.max(g);
            }
        }
        Some((min, max))
    }

    /// Same dynamics on the unit torus: velocities divided by `L`.
    pub fn rescale_to_unit_torus(&self) -> ModelSpec {
        let l = self.length;
        let mut out = self.clone();
        out.velocities = self.velocities.iter().map(|v| v / l).collect();
        out.length = 1.0;
        if l != 1.0 {
            out.exact = None;
        }
        out
    }

    /// `B ← B − δI`.
    pub fn apply_killing(&self, delta: f64) -> Result<ModelSpec> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::NonPositiveDelta(delta));
        }
        let mut b = self.b.clone();
        for i in 0..self.n {
            b[(i, i)] -= delta;
        }
        let mut out = self.clone();
        out.norm_b = b.norm_inf();
        out.b = b;
        Ok(out)
    }

    /// Positivity of the generated semigroup: every off-diagonal entry of
    /// `B` is non-negative. Offending entries are 0-based `(row, col)`.
    pub fn positivity_check(&self) -> Positivity {
        let mut offending = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self.b[(i, j)] < 0.0 {
                    offending.push((i, j));
                }
            }
        }
        Positivity {
            positive: offending.is_empty(),
            offending,
        }
    }

    /// Basis of `ker(Bᵀ)`, the conserved linear functionals of the averages.
    pub fn conservation_basis(&self) -> ConservationBasis {
        let n = self.n;
        let tol = 1e-12 * self.norm_b;
        let mut a = self.b.transpose();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..n {
            if row == n {
                break;
            }
            let p = (row..n)
                .max_by(|&x, &y| a[(x, col)].abs().total_cmp(&a[(y, col)].abs()))
                .unwrap_or(row);
            if a[(p, col)].abs() <= tol {
                continue;
            }
            for j in 0..n {
                let tmp = a[(p, j)];
                a[(p, j)] = a[(row, j)];
                a[(row, j)] = tmp;
            }
            let pivot = a[(row, col)];
            for j in 0..n {
                a[(row, j)] /= pivot;
            }
            for i in 0..n {
                if i != row {
                    let f = a[(i, col)];
                    if f != 0.0 {
                        for j in 0..n {
                            let arj = a[(row, j)];
                            a[(i, j)] -= f * arj;
                        }
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        let mut vectors = Vec::new();
        for free in (0..n).filter(|c| !pivots.contains(c)) {
            let mut y = vec![0.0; n];
            y[free] = 1.0;
            for (r, &pc) in pivots.iter().enumerate() {
                y[pc] = -a[(r, free)];
            }
            vectors.push(y);
        }
        let column_sums = (0..n).map(|j| (0..n).map(|i| self.b[(i, j)]).sum::<f64>());
        let mass_conserving = column_sums
            .into_iter()
            .all(|s: f64| s.abs() <= 1e-10 * self.norm_b.max(f64::MIN_POSITIVE));
        ConservationBasis {
            vectors,
            mass_conserving,
        }
    }

    /// Transport periodicity from exact rational velocities.
    pub fn transport_periodicity(&self) -> Result<Periodicity> {
        let exact = self.exact.as_ref().ok_or_else(|| {
            Error::IrrationalInputUnsupported("model carries no exact rational velocities".into())
        })?;
        periodicity::analyze(exact, self.n, self.d, self.length)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Positivity {
    pub positive: bool,
    pub offending: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConservationBasis {
    pub vectors: Vec<Vec<f64>>,
    pub mass_conserving: bool,
}

use alloc::vec::Vec;

use crate::linalg::RealMatrix;
use crate::{Error, ModelSpec, Result};

/// Left/right moving pairs on an interval with reflecting ends:
/// `α` moves with speeds `Γ`, `β` with `−Γ`, coupled by
/// `∂ₜα = B₁α + B₂β`, `∂ₜβ = B₂α + B₁β`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricBlockModel {
    gamma: Vec<f64>,
    b1: RealMatrix,
    b2: RealMatrix,
    length: f64,
}

/// Cell-centred samples of `(α, β)` on `(0, L)`, indexed `[species][cell]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NeumannState {
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
}

impl NeumannState {
    pub fn grid_len(&self) -> usize {
        self.alpha.first().map_or(0, Vec::len)
    }
}

impl SymmetricBlockModel {
    pub fn new(gamma: Vec<f64>, b1: RealMatrix, b2: RealMatrix, length: f64) -> Result<Self> {
        let n = gamma.len();
        if n == 0 {
            return Err(Error::DimensionMismatch {
                field: "Gamma",
                expected: 1,
                got: 0,
            });
        }
        for (name, m) in [("B1", &b1), ("B2", &b2)] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch {
                    field: name,
                    expected: n,
                    got: if m.rows() != n { m.rows() } else { m.cols() },
                });
            }
            if !m.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        if gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("Gamma"));
        }
        if gamma.iter().any(|&g| g <= 0.0) {
            return Err(Error::NonPositiveRates);
        }
        if !length.is_finite() {
            return Err(Error::NonFinite("L"));
        }
        if length <= 0.0 {
            return Err(Error::NonPositiveLength(length));
        }
        Ok(Self { gamma, b1, b2, length })
    }

    pub fn species(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn b1(&self) -> &RealMatrix {
        &self.b1
    }

    pub fn b2(&self) -> &RealMatrix {
        &self.b2
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// `[[B₁, B₂], [B₂, B₁]]`.
    pub fn block_matrix(&self) -> RealMatrix {
        let n = self.species();
        RealMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let m = if (i < n) == (j < n) { &self.b1 } else { &self.b2 };
            m[(i % n, j % n)]
        })
    }

    /// The `2N`-component model with velocities `(Γ, −Γ)` on a torus of
    /// side length `length`.
    pub fn embed(&self, length: f64) -> Result<ModelSpec> {
        let v: Vec<f64> = self
            .gamma
            .iter()
            .copied()
            .chain(self.gamma.iter().map(|g| -g))
            .collect();
        ModelSpec::one_dim(&v, self.block_matrix())?.with_length(length)
    }

    /// Periodic model on `(0, 2L)` whose restriction solves the reflecting
    /// problem on `(0, L)`.
    pub fn periodic_spec(&self) -> Result<ModelSpec> {
        self.embed(2.0 * self.length)
    }

    /// Reflects `(α, β)` on the cell-centred grid of `(0, L)` onto `(0, 2L)`:
    /// `α̃(x) = β(2L − x)` and `β̃(x) = α(2L − x)` on the second half.
    pub fn neumann_extend(&self, state: &NeumannState) -> Result<NeumannState> {
        let n = state.grid_len();
        check_state(state, self.species())?;
        if n % 2 != 0 {
            return Err(Error::OddGrid(n));
        }
        let reflect = |first: &[f64], second: &[f64]| -> Vec<f64> {
            first.iter().copied().chain(second.iter().rev().copied()).collect()
        };
        Ok(NeumannState {
            alpha: state
                .alpha
                .iter()
                .zip(&state.beta)
                .map(|(a, b)| reflect(a, b))
                .collect(),
            beta: state
                .beta
                .iter()
                .zip(&state.alpha)
                .map(|(b, a)| reflect(b, a))
                .collect(),
        })
    }
}

pub(crate) fn check_state(state: &NeumannState, species: usize) -> Result<()> {
    let n = state.grid_len();
    for (field, rows) in [("alpha", &state.alpha), ("beta", &state.beta)] {
        if rows.len() != species {
            return Err(Error::DimensionMismatch {
                field,
                expected: species,
                got: rows.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                field,
                expected: n,
                got: bad.len(),
            });
        }
    }
    if n == 0 {
        return Err(Error::DimensionMismatch {
            field: "grid",
            expected: 2,
            got: 0,
        });
    }
    Ok(())
}

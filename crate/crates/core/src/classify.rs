//! Stability verdicts for one-dimensional models and closed-form criteria
//! for special model classes.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::linalg::{eigenvalues, RealMatrix};
use crate::model::SymmetricBlockModel;
use crate::modes::{default_window, spectrum_at};
use crate::perturb::{self, Direction};
use crate::{Error, ModelSpec, Result};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Stable,
    /// `σ(B)` reaches the closed right half-plane.
    UnstableReaction,
    TuringPattern,
    HyperbolicInstability,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "Stable",
            Verdict::UnstableReaction => "UnstableReaction",
            Verdict::TuringPattern => "TuringPattern",
            Verdict::HyperbolicInstability => "HyperbolicInstability",
            Verdict::Indeterminate => "Indeterminate",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// Velocities coincide; the tail test used a heuristic window.
    DegenerateVelocities { gap: f64 },
    /// Branch (0-based) whose real part is eventually constant in `k`.
    EventuallyConstant { branch: usize },
    /// The two largest diagonal entries of `B` agree within tolerance.
    TiedDiagonal { b1: f64, b2: f64 },
    /// `max Re σ(B)` is zero within tolerance.
    MarginalReaction { abscissa: f64 },
    /// The window stops short of the perturbation threshold.
    WindowBelowThreshold { k_max: u64, k_pert: u64 },
    /// The maximum of `Σ` sits on the window edge.
    MaximumAtWindowEdge { k: i64 },
    /// Some sampled `Σ(k)` lies in `[b, b + tol]`.
    SigmaNearLimit { k: i64 },
    /// `Σ` is not strictly increasing on the tail window.
    TailNotMonotone { k: i64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DegenerateVelocities { gap } => {
                write!(f, "degenerate velocities (min gap {gap:e}); heuristic tail window used")
            }
            Warning::EventuallyConstant { branch } => {
                write!(f, "branch {} has eventually constant real part", branch + 1)
            }
            Warning::TiedDiagonal { b1, b2 } => {
                write!(f, "largest diagonal entries {b1} and {b2} agree within tolerance")
            }
            Warning::MarginalReaction { abscissa } => {
                write!(f, "reaction matrix is marginal (spectral abscissa {abscissa:e})")
            }
            Warning::WindowBelowThreshold { k_max, k_pert } => {
                write!(f, "window {k_max} is below the perturbation threshold {k_pert}")
            }
            Warning::MaximumAtWindowEdge { k } => write!(f, "maximum of Sigma at window edge k = {k}"),
            Warning::SigmaNearLimit { k } => write!(f, "Sigma({k}) lies within tolerance of the limit b"),
            Warning::TailNotMonotone { k } => write!(f, "Sigma not strictly increasing at k = {k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    /// `max_j B_jj`, the limit of `Σ(k)` as `|k| → ∞`.
    pub b: f64,
    /// Modes attaining the supremum of `Σ` (Turing verdicts only).
    pub dominant_modes: Vec<i64>,
    pub k_max: u64,
    pub k_pert: Option<u64>,
    /// `(k, Σ(k))` for `k = −K_max..=K_max`; empty for closed-form verdicts.
    pub sigma_profile: Vec<(i64, f64)>,
    pub warnings: Vec<Warning>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyOptions {
    /// Window radius; `None` picks [`default_window`].
    pub k_max: Option<u64>,
    /// Relative tolerance, scaled by `‖B‖∞`.
    pub tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            k_max: None,
            tol: DEFAULT_TOL,
        }
    }
}

fn abs_tol(spec: &ModelSpec, tol: f64) -> f64 {
    tol * spec.norm_b().max(f64::MIN_POSITIVE)
}

/// `(k, Σ(k))` for `k = −k_max..=k_max`.
pub fn sigma_profile(spec: &ModelSpec, k_max: u64) -> Result<Vec<(i64, f64)>> {
    let r = k_max as i64;
    (-r..=r)
        .map(|k| {
            let s = spectrum_at(spec, &[k])?;
            Ok((k, s[0].re))
        })
        .collect()
}

/// Classifies a one-dimensional model by sampling `Σ(k)`.
pub fn classify(spec: &ModelSpec, opts: &ClassifyOptions) -> Result<ClassificationReport> {
    if spec.dim() != 1 {
        return Err(Error::UnsupportedDimension(spec.dim()));
    }
    let k_max = opts.k_max.unwrap_or_else(|| default_window(spec));
    let profile = sigma_profile(spec, k_max)?;
    classify_profile(spec, opts.tol, k_max, profile)
}

/// Classification from a precomputed profile, as produced by
/// [`sigma_profile`].
pub fn classify_profile(
    spec: &ModelSpec,
    tol: f64,
    k_max: u64,
    profile: Vec<(i64, f64)>,
) -> Result<ClassificationReport> {
    let thr = abs_tol(spec, tol);
    let b_mat = spec.reaction();
    let mut warnings = Vec::new();
    let diag = b_mat.diag();
    let b = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut sorted = diag.clone();
    sorted.sort_by(|x, y| y.total_cmp(x));
    if sorted.len() >= 2 && (sorted[0] - sorted[1]).abs() < thr {
        warnings.push(Warning::TiedDiagonal {
            b1: sorted[0],
            b2: sorted[1],
        });
    }

    let k_pert = match perturb::monotonicity(spec) {
        Ok(report) => {
            for (j, br) in report.branches.iter().enumerate() {
                if br.direction == Direction::Constant && spec.components() > 1 {
                    warnings.push(Warning::EventuallyConstant { branch: j });
                }
            }
            Some(report.k_pert)
        }
        Err(Error::DegenerateVelocities { gap }) => {
            warnings.push(Warning::DegenerateVelocities { gap });
            None
        }
        Err(e) => return Err(e),
    };

    let abscissa = eigenvalues(&b_mat.to_complex())?.spectral_abscissa();
    if abscissa.abs() < thr {
        warnings.push(Warning::MarginalReaction { abscissa });
    }
    let report = |verdict, dominant_modes, warnings| ClassificationReport {
        verdict,
        b,
        dominant_modes,
        k_max,
        k_pert,
        sigma_profile: profile.clone(),
        warnings,
    };
    if abscissa >= thr {
        return Ok(report(Verdict::UnstableReaction, Vec::new(), warnings));
    }

    let sup = profile.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if sup < -thr && b < 0.0 {
        return Ok(report(Verdict::Stable, Vec::new(), warnings));
    }

    if profile.iter().any(|&(_, s)| s > b + thr && s > thr) {
        let dominant: Vec<i64> = profile.iter().filter(|p| p.1 >= sup - thr).map(|p| p.0).collect();
        if let Some(&edge) = dominant.iter().find(|k| k.unsigned_abs() == k_max) {
            warnings.push(Warning::MaximumAtWindowEdge { k: edge });
            return Ok(report(Verdict::Indeterminate, Vec::new(), warnings));
        }
        return Ok(report(Verdict::TuringPattern, dominant, warnings));
    }

    if b > thr {
        let tail_start = match k_pert {
            Some(kp) if kp <= k_max => kp,
            Some(kp) => {
                warnings.push(Warning::WindowBelowThreshold { k_max, k_pert: kp });
                k_max / 4
            }
            None => k_max / 4,
        } as i64;
        let kmax = k_max as i64;
        let sigma = |k: i64| profile[(k + kmax) as usize].1;
        if let Some(&(k, _)) = profile.iter().find(|p| p.1 >= b) {
            warnings.push(Warning::SigmaNearLimit { k });
            return Ok(report(Verdict::Indeterminate, Vec::new(), warnings));
        }
        let mut monotone = tail_start < kmax;
        for k in tail_start..kmax {
            if !(sigma(k + 1) > sigma(k)) {
                warnings.push(Warning::TailNotMonotone { k: k + 1 });
                monotone = false;
                break;
            }
            if !(sigma(-k - 1) > sigma(-k)) {
                warnings.push(Warning::TailNotMonotone { k: -k - 1 });
                monotone = false;
                break;
            }
        }
        if monotone {
            return Ok(report(Verdict::HyperbolicInstability, Vec::new(), warnings));
        }
    }
    Ok(report(Verdict::Indeterminate, Vec::new(), warnings))
}

/// Closed-form verdict for two components.
///
/// Stable `B` with distinct speeds is transport-unstable exactly when a
/// diagonal entry is positive, and then the instability is hyperbolic.
pub fn classify_n2(spec: &ModelSpec) -> Result<ClassificationReport> {
    if spec.components() != 2 {
        return Err(Error::DimensionMismatch {
            field: "N",
            expected: 2,
            got: spec.components(),
        });
    }
    let v = spec.velocities_1d()?;
    let m = spec.reaction();
    let (a, bb, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let b = a.max(d);
    let verdict = if !(a + d < 0.0 && a * d - bb * c > 0.0) {
        Verdict::UnstableReaction
    } else if v[0] == v[1] {
        Verdict::Stable
    } else if a > 0.0 || d > 0.0 {
        Verdict::HyperbolicInstability
    } else {
        Verdict::Stable
    };
    Ok(ClassificationReport {
        verdict,
        b,
        dominant_modes: Vec::new(),
        k_max: 0,
        k_pert: perturb::validity_threshold(spec).ok(),
        sigma_profile: Vec::new(),
        warnings: Vec::new(),
    })
}

/// Sufficient condition for Turing patterns: at `j* = argmax_j B_jj`, the
/// coefficient `λ̂_{j*}⁽³⁾` is negative. `false` means no conclusion.
pub fn turing_criterion(spec: &ModelSpec, tol: f64) -> Result<bool> {
    if spec.dim() != 1 {
        return Err(Error::UnsupportedDimension(spec.dim()));
    }
    let k_max = default_window(spec);
    perturb::validity_threshold(spec)?;
    let thr = abs_tol(spec, tol);
    let abscissa = eigenvalues(&spec.reaction().to_complex())?.spectral_abscissa();
    if abscissa >= thr {
        return Err(Error::PreconditionUnmet("reaction matrix is not stable"));
    }
    let profile = sigma_profile(spec, k_max)?;
    if !profile.iter().any(|p| p.1 > thr) {
        return Err(Error::PreconditionUnmet("model is stable on the sampled window"));
    }
    let diag = spec.reaction().diag();
    let j_star = (0..diag.len())
        .max_by(|&x, &y| diag[x].total_cmp(&diag[y]).then(y.cmp(&x)))
        .unwrap_or(0);
    let c3 = perturb::coefficient(spec, j_star, 3)?;
    Ok(c3 < -tol * perturb::cauchy_bound(spec, 3)?)
}

/// Parameters of the two-species reaction random walk with turning rates
/// `μ`, speeds `v` and net reaction matrix `ν = [[ν₁, ν₂], [ν₃, ν₄]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomWalkParams {
    pub v: [f64; 2],
    pub mu: [f64; 2],
    pub nu: [[f64; 2]; 2],
    pub length: f64,
}

impl RandomWalkParams {
    fn check(&self) -> Result<()> {
        let all = [self.v[0], self.v[1], self.mu[0], self.mu[1], self.length];
        if all.iter().chain(self.nu.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("random walk parameters"));
        }
        if self.length <= 0.0 {
            return Err(Error::NonPositiveLength(self.length));
        }
        if self.v.iter().chain(&self.mu).any(|&x| x <= 0.0) {
            return Err(Error::NonPositiveRates);
        }
        Ok(())
    }

    /// Right movers `α`, left movers `β`, with `B₁ = −diag(μ) + ν/2` and
    /// `B₂ = diag(μ) + ν/2`.
    pub fn block_model(&self) -> Result<SymmetricBlockModel> {
        self.check()?;
        let half = |i: usize, j: usize| 0.5 * self.nu[i][j];
        let b1 = RealMatrix::from_fn(2, 2, |i, j| half(i, j) - if i == j { self.mu[i] } else { 0.0 });
        let b2 = RealMatrix::from_fn(2, 2, |i, j| half(i, j) + if i == j { self.mu[i] } else { 0.0 });
        SymmetricBlockModel::new(self.v.to_vec(), b1, b2, self.length)
    }

    /// The four-component periodic model on the torus of side length `L`.
    pub fn spec(&self) -> Result<ModelSpec> {
        self.block_model()?.embed(self.length)
    }
}

/// Coefficients of `λ⁴ + a₃λ³ + a₂λ² + a₁λ + a₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuarticCoefficients {
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

/// Characteristic polynomial of the random-walk mode matrix at mode `k`.
pub fn random_walk_quartic(p: &RandomWalkParams, k: i64) -> Result<QuarticCoefficients> {
    p.check()?;
    let [v1, v2] = p.v;
    let [m1, m2] = p.mu;
    let [[n1, n2], [n3, n4]] = p.nu;
    let det_n = n1 * n4 - n2 * n3;
    let l = p.length;
    let kk = 4.0 * PI * PI * (k as f64) * (k as f64) / (l * l);
    let (v1s, v2s) = (v1 * v1, v2 * v2);
    let a3 = 2.0 * (m1 + m2) - (n1 + n4);
    let a2 = kk * (v1s + v2s) - 2.0 * (m1 + m2) * (n1 + n4) + 4.0 * m1 * m2 + det_n;
    let a1 = kk * (v1s * (2.0 * m2 - n4) + v2s * (2.0 * m1 - n1)) - 4.0 * (n1 + n4) * m1 * m2
        + 2.0 * (m1 + m2) * det_n;
    let a0 = kk * kk * v1s * v2s - 2.0 * kk * (v1s * n4 * m2 + v2s * n1 * m1) + 4.0 * m1 * m2 * det_n;
    Ok(QuarticCoefficients { a3, a2, a1, a0 })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RouthHurwitz {
    pub stable: bool,
    /// `a₃`, `a₂a₃ − a₁`, `(a₂a₃ − a₁)a₁ − a₃²a₀` and `a₀` times the third.
    pub margins: [f64; 4],
}

/// All roots in the open left half-plane iff all four margins are positive.
pub fn routh_hurwitz_quartic(c: &QuarticCoefficients) -> RouthHurwitz {
    let m1 = c.a3;
    let m2 = c.a2 * c.a3 - c.a1;
    let m3 = m2 * c.a1 - c.a3 * c.a3 * c.a0;
    let m4 = c.a0 * m3;
    let margins = [m1, m2, m3, m4];
    RouthHurwitz {
        stable: margins.iter().all(|&m| m > 0.0),
        margins,
    }
}

/// Two-speed model `v, −v` with symmetric switching at rate `Λ`.
pub fn goldstein_kac_model(lambda: f64, v: f64, length: f64) -> Result<ModelSpec> {
    ModelSpec::one_dim_rows(&[v, -v], &[[-lambda, lambda], [lambda, -lambda]])?.with_length(length)
}

/// `−Λ ± √(Λ² − 4π²k²v²/L²)`, the larger real part first.
pub fn goldstein_kac_eigenvalues(lambda: f64, v: f64, length: f64, k: i64) -> [Complex64; 2] {
    let w = 2.0 * PI * k as f64 * v / length;
    let root = Complex64::new(lambda * lambda - w * w, 0.0).sqrt();
    [Complex64::new(-lambda, 0.0) + root, Complex64::new(-lambda, 0.0) - root]
}

/// Optimal exponential rate towards the mean state:
/// `ω = −Λ` if `Λ² ≤ 4π²v²/L²`, else `−Λ + √(Λ² − 4π²v²/L²)`.
pub fn goldstein_kac_rate(lambda: f64, v: f64, length: f64) -> Result<f64> {
    if !(lambda.is_finite() && v.is_finite() && length.is_finite()) {
        return Err(Error::NonFinite("Goldstein-Kac parameters"));
    }
    if lambda <= 0.0 {
        return Err(Error::NonPositiveLambda(lambda));
    }
    if v <= 0.0 {
        return Err(Error::NonPositiveRates);
    }
    if length <= 0.0 {
        return Err(Error::NonPositiveLength(length));
    }
    let w2 = 4.0 * PI * PI * v * v / (length * length);
    let l2 = lambda * lambda;
    Ok(if l2 <= w2 { -lambda } else { -lambda + libm::sqrt(l2 - w2) })
}

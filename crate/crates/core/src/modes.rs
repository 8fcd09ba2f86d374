//! Mode matrices, spectrum sampling over a window of Fourier modes, and
//! branch tracking in one dimension.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::linalg::{eigenvalues, ComplexMatrix};
use crate::{perturb, Error, ModelSpec, Result};

/// Smallest window radius used when none is given.
pub const MIN_DEFAULT_WINDOW: u64 = 64;

/// `M(k) = −2πi·diag(k·v_j/L) + B`.
///
/// # Panics
///
/// Panics if `k.len()` differs from the model dimension.
pub fn mode_matrix(spec: &ModelSpec, k: &[i64]) -> ComplexMatrix {
    assert_eq!(k.len(), spec.dim(), "mode index has wrong dimension");
    let n = spec.components();
    let l = spec.length();
    let b = spec.reaction();
    let mut m = b.to_complex();
    for j in 0..n {
        let kv: f64 = k
            .iter()
            .zip(spec.velocity(j))
            .map(|(&ki, &vi)| ki as f64 * (vi / l))
            .sum();
        m[(j, j)] = Complex64::new(b[(j, j)], -TAU * kv);
    }
    m
}

/// `max(64, 4·K_pert)`, or 64 when the perturbation threshold is undefined.
pub fn default_window(spec: &ModelSpec) -> u64 {
    match perturb::validity_threshold(spec) {
        Ok(k) => MIN_DEFAULT_WINDOW.max(4 * k),
        Err(_) => MIN_DEFAULT_WINDOW,
    }
}

/// Every mode in the box `|k|∞ ≤ k_max`, ascending lexicographically.
pub fn window(d: usize, k_max: u64) -> Vec<Vec<i64>> {
    let r = k_max as i64;
    let side = (2 * k_max + 1) as usize;
    let total = side.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    let mut k = vec![-r; d];
    for _ in 0..total {
        out.push(k.clone());
        for axis in (0..d).rev() {
            if k[axis] < r {
                k[axis] += 1;
                break;
            }
            k[axis] = -r;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRecord {
    pub k: Vec<i64>,
    /// 0-based branch label.
    pub branch: usize,
    pub lambda: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTable {
    pub d: usize,
    pub n: usize,
    pub k_max: u64,
    /// `n` consecutive records per mode, modes in window order.
    pub records: Vec<SpectrumRecord>,
    pub tracked: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrackingWarning {
    /// Two assignments between consecutive modes tied within 1e−12; the
    /// first was kept.
    AmbiguousMatch { k: i64 },
    /// Velocities are not distinct, so no asymptotic anchor exists.
    Unanchored,
}

impl SpectrumTable {
    pub fn modes(&self) -> impl Iterator<Item = &[SpectrumRecord]> {
        self.records.chunks(self.n)
    }

    /// Eigenvalues at mode `k`, in branch order when tracked.
    pub fn at(&self, k: &[i64]) -> Option<Vec<Complex64>> {
        let mut recs: Vec<&SpectrumRecord> = self.records.iter().filter(|r| r.k == k).collect();
        if recs.is_empty() {
            return None;
        }
        recs.sort_by_key(|r| r.branch);
        Some(recs.iter().map(|r| r.lambda).collect())
    }

    /// Points of the generator's limit lines `Re λ = b_jj`, which belong to
    /// the closure of the spectrum but never appear in a finite sample.
    pub fn accumulation_abscissas(spec: &ModelSpec) -> Vec<f64> {
        spec.reaction().diag()
    }
}

/// Eigenvalues of `M(k)`, sorted by descending real part then imaginary part.
pub fn spectrum_at(spec: &ModelSpec, k: &[i64]) -> Result<Vec<Complex64>> {
    let mut v = eigenvalues(&mode_matrix(spec, k))?.values;
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    Ok(v)
}

pub fn spectrum_table(spec: &ModelSpec, k_max: u64) -> Result<SpectrumTable> {
    let modes = window(spec.dim(), k_max);
    let mut per_mode = Vec::with_capacity(modes.len());
    for k in &modes {
        per_mode.push(spectrum_at(spec, k)?);
    }
    Ok(assemble(spec, k_max, modes, per_mode))
}

/// Builds a table from eigenvalues computed elsewhere (for example in
/// parallel), one list per mode of [`window`].
pub fn assemble(spec: &ModelSpec, k_max: u64, modes: Vec<Vec<i64>>, per_mode: Vec<Vec<Complex64>>) -> SpectrumTable {
    let n = spec.components();
    let mut records = Vec::with_capacity(modes.len() * n);
    for (k, values) in modes.into_iter().zip(per_mode) {
        debug_assert_eq!(values.len(), n);
        for (branch, lambda) in values.into_iter().enumerate() {
            records.push(SpectrumRecord {
                k: k.clone(),
                branch,
                lambda,
            });
        }
    }
    SpectrumTable {
        d: spec.dim(),
        n,
        k_max,
        records,
        tracked: false,
    }
}

/// `Σ(k) = max Re σ(M(k))` over a sampled window.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaProfile {
    pub entries: Vec<(Vec<i64>, f64)>,
    pub sup: f64,
}

impl SigmaProfile {
    /// Modes whose `Σ` lies within `tol` of the supremum.
    pub fn argmax(&self, tol: f64) -> Vec<Vec<i64>> {
        self.entries
            .iter()
            .filter(|(_, s)| *s >= self.sup - tol)
            .map(|(k, _)| k.clone())
            .collect()
    }

    /// `Σ` at a one-dimensional mode.
    pub fn get(&self, k: i64) -> Option<f64> {
        self.entries.iter().find(|(m, _)| m.as_slice() == [k]).map(|(_, s)| *s)
    }
}

pub fn sigma_max(table: &SpectrumTable) -> SigmaProfile {
    let entries: Vec<(Vec<i64>, f64)> = table
        .modes()
        .map(|recs| {
            let s = recs.iter().map(|r| r.lambda.re).fold(f64::NEG_INFINITY, f64::max);
            (recs[0].k.clone(), s)
        })
        .collect();
    let sup = entries.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    SigmaProfile { entries, sup }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupSpectrumSample {
    pub t: f64,
    pub points: Vec<Complex64>,
}

/// `e^{tλ}` for every eigenvalue in the table.
pub fn semigroup_spectrum(table: &SpectrumTable, t: f64) -> SemigroupSpectrumSample {
    SemigroupSpectrumSample {
        t,
        points: table.records.iter().map(|r| (r.lambda * t).exp()).collect(),
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    // Heap's algorithm, iterative
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            out.push(p.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Largest component count for which tracking uses exact assignment;
/// above it a greedy nearest-neighbour match is used.
pub const EXACT_MATCH_MAX: usize = 8;

/// Reorders `next` so that `next[j]` continues `prev[j]`. Returns whether the
/// optimum was ambiguous.
fn match_step(prev: &[Complex64], next: &mut Vec<Complex64>, perms: &[Vec<usize>]) -> bool {
    let n = prev.len();
    if n > EXACT_MATCH_MAX {
        let mut taken = vec![false; n];
        let mut out = Vec::with_capacity(n);
        for p in prev {
            let (idx, _) = next
                .iter()
                .enumerate()
                .filter(|(i, _)| !taken[*i])
                .map(|(i, q)| (i, (p - q).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("unmatched eigenvalue");
            taken[idx] = true;
            out.push(next[idx]);
        }
        *next = out;
        return false;
    }
    let mut best = f64::INFINITY;
    let mut second = f64::INFINITY;
    let mut best_perm = 0;
    for (pi, perm) in perms.iter().enumerate() {
        let cost: f64 = (0..n).map(|j| (prev[j] - next[perm[j]]).norm()).sum();
        if cost < best {
            second = best;
            best = cost;
            best_perm = pi;
        } else if cost < second {
            second = cost;
        }
    }
    let perm = &perms[best_perm];
    *next = (0..n).map(|j| next[perm[j]]).collect();
    n > 1 && second - best <= 1e-12 * (1.0 + best)
}

/// Relabels branches so that each branch varies continuously in `k`.
///
/// When the window reaches the perturbation regime, branch `j` is anchored at
/// `±K_max` to the leading term `b_jj − 2πikv_j/L` and followed inward;
/// otherwise labels start from the ordering at `k = 0` and are followed
/// outward.
pub fn track_branches(spec: &ModelSpec, table: &SpectrumTable) -> Result<(SpectrumTable, Vec<TrackingWarning>)> {
    if table.d != 1 || spec.dim() != 1 {
        return Err(Error::UnsupportedDimension(table.d));
    }
    let n = table.n;
    let kmax = table.k_max as i64;
    let mut values: Vec<Vec<Complex64>> = table.modes().map(|r| r.iter().map(|x| x.lambda).collect()).collect();
    let idx = |k: i64| (k + kmax) as usize;
    let perms = if n <= EXACT_MATCH_MAX { permutations(n) } else { Vec::new() };
    let mut warnings = Vec::new();

    let anchored = match perturb::validity_threshold(spec) {
        Ok(k_pert) => kmax > 0 && table.k_max >= k_pert,
        Err(_) => {
            if n > 1 {
                warnings.push(TrackingWarning::Unanchored);
            }
            false
        }
    };
    let step = |from: i64, to: i64, values: &mut Vec<Vec<Complex64>>, warnings: &mut Vec<TrackingWarning>| {
        let prev = values[idx(from)].clone();
        if match_step(&prev, &mut values[idx(to)], &perms) {
            warnings.push(TrackingWarning::AmbiguousMatch { k: to });
        }
    };
    if anchored {
        let b = spec.reaction();
        let v = spec.velocities_1d()?;
        let l = spec.length();
        for edge in [kmax, -kmax] {
            let lead: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new(b[(j, j)], -TAU * edge as f64 * v[j] / l))
                .collect();
            if match_step(&lead, &mut values[idx(edge)], &perms) {
                warnings.push(TrackingWarning::AmbiguousMatch { k: edge });
            }
        }
        for k in (0..kmax).rev() {
            step(k + 1, k, &mut values, &mut warnings);
        }
        for k in -kmax + 1..0 {
            step(k - 1, k, &mut values, &mut warnings);
        }
    } else {
        for k in 1..=kmax {
            step(k - 1, k, &mut values, &mut warnings);
        }
        for k in (-kmax..0).rev() {
            step(k + 1, k, &mut values, &mut warnings);
        }
    }
    let modes: Vec<Vec<i64>> = (-kmax..=kmax).map(|k| vec![k]).collect();
    let mut out = assemble(spec, table.k_max, modes, values);
    out.tracked = true;
    Ok((out, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RealMatrix;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gk(lambda: f64, v: f64) -> ModelSpec {
        ModelSpec::one_dim_rows(&[v, -v], &[[-lambda, lambda], [lambda, -lambda]]).unwrap()
    }

    fn multiset_close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        let mut used = vec![false; b.len()];
        a.iter().all(|x| {
            match b
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .min_by(|p, q| (x - p.1).norm().total_cmp(&(x - q.1).norm()))
            {
                Some((i, y)) if (x - y).norm() <= tol => {
                    used[i] = true;
                    true
                }
                _ => false,
            }
        })
    }

    #[test]
    fn zero_mode_is_reaction_matrix() {
        let s = gk(1.0, 1.0);
        assert_eq!(mode_matrix(&s, &[0]), s.reaction().to_complex());
    }

    #[test]
    fn goldstein_kac_mode_matrix() {
        let m = mode_matrix(&gk(1.0, 0.5), &[3]);
        let w = TAU * 3.0 * 0.5;
        assert_eq!(m[(0, 0)], c(-1.0, -w));
        assert_eq!(m[(1, 1)], c(-1.0, w));
        assert_eq!(m[(0, 1)], c(1.0, 0.0));
    }

    #[test]
    fn two_dimensional_dot_product() {
        let s = ModelSpec::new(2, &[[1.0, 0.0], [0.5, 0.5]], RealMatrix::from_rows(&[[7.0, 0.0], [0.0, 0.0]]).unwrap(), 1.0)
            .unwrap();
        let m = mode_matrix(&s, &[2, 3]);
        assert_eq!(m[(0, 0)], c(7.0, -TAU * 2.0));
        assert_eq!(m[(1, 1)], c(0.0, -TAU * 2.5));
    }

    #[test]
    fn window_order() {
        assert_eq!(window(1, 1), vec![vec![-1], vec![0], vec![1]]);
        let w = window(2, 1);
        assert_eq!(w.len(), 9);
        assert_eq!(w[0], vec![-1, -1]);
        assert_eq!(w[1], vec![-1, 0]);
        assert_eq!(w[8], vec![1, 1]);
        assert_eq!(window(1, 0), vec![vec![0]]);
    }

    #[test]
    fn goldstein_kac_spectrum() {
        let t = spectrum_table(&gk(1.0, 1.0), 3).unwrap();
        let z = t.at(&[0]).unwrap();
        assert!(multiset_close(&z, &[c(0.0, 0.0), c(-2.0, 0.0)], 1e-12));
        let root = (TAU * TAU - 1.0f64).sqrt();
        assert!((root - 6.2031).abs() < 1e-4);
        let one = t.at(&[1]).unwrap();
        assert!(multiset_close(&one, &[c(-1.0, root), c(-1.0, -root)], 1e-10));
        let s = sigma_max(&t);
        assert!(s.get(0).unwrap().abs() < 1e-12);
        for k in [-3, -2, -1, 1, 2, 3] {
            assert!((s.get(k).unwrap() + 1.0).abs() < 1e-10);
        }
        assert_eq!(s.argmax(1e-9), vec![vec![0]]);
    }

    #[test]
    fn pure_transport_is_imaginary() {
        let s = ModelSpec::one_dim_rows(&[0.3, -1.2], &[[0.0, 0.0], [0.0, 0.0]]).unwrap();
        let t = spectrum_table(&s, 5).unwrap();
        for r in &t.records {
            assert_eq!(r.lambda.re, 0.0);
        }
        assert!(multiset_close(&t.at(&[2]).unwrap(), &[c(0.0, -TAU * 0.6), c(0.0, TAU * 2.4)], 1e-12));
        assert_eq!(sigma_max(&t).sup, 0.0);
    }

    #[test]
    fn scalar_branch() {
        let s = ModelSpec::one_dim_rows(&[0.7], &[[-0.4]]).unwrap();
        let t = spectrum_table(&s, 4).unwrap();
        for r in &t.records {
            assert!((r.lambda - c(-0.4, -TAU * r.k[0] as f64 * 0.7)).norm() < 1e-12);
        }
        let (tracked, w) = track_branches(&s, &t).unwrap();
        assert!(w.is_empty());
        assert_eq!(tracked.records, t.records);
    }

    #[test]
    fn semigroup_points() {
        let s = gk(1.0, 1.0);
        let t = spectrum_table(&s, 2).unwrap();
        assert!(semigroup_spectrum(&t, 0.0).points.iter().all(|p| *p == c(1.0, 0.0)));
        let single = SpectrumTable {
            d: 1,
            n: 1,
            k_max: 0,
            records: vec![SpectrumRecord { k: vec![0], branch: 0, lambda: c(-1.0, core::f64::consts::PI) }],
            tracked: false,
        };
        let p = semigroup_spectrum(&single, 1.0).points[0];
        assert!((p - c(-(-1.0f64).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rational_transport_lands_on_roots_of_unity() {
        // t·v = 3/5 with B = 0, N = 1
        let s = ModelSpec::one_dim_rows(&[0.6], &[[0.0]]).unwrap();
        let sample = semigroup_spectrum(&spectrum_table(&s, 20).unwrap(), 1.0);
        for p in sample.points {
            assert!((p.powu(5) - c(1.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn tracking_follows_velocities() {
        let s = ModelSpec::one_dim_rows(&[0.1, -0.1, 0.2], &[[-1.0, 2.0, -4.0], [-2.0, -2.0, 2.0], [-6.0, -7.0, -8.0]])
            .unwrap();
        let kmax = default_window(&s);
        let (t, _) = track_branches(&s, &spectrum_table(&s, kmax).unwrap()).unwrap();
        assert!(t.tracked);
        let v = [0.1, -0.1, 0.2];
        let k = kmax as i64;
        let top = t.at(&[k]).unwrap();
        for j in 0..3 {
            assert!((top[j].im / (-TAU * k as f64) - v[j]).abs() < 1e-2);
            assert!((top[j].re - s.reaction()[(j, j)]).abs() < 0.5);
        }
    }

    #[test]
    fn goldstein_kac_tracking_keeps_sign() {
        let s = gk(1.0, 1.0);
        let (t, _) = track_branches(&s, &spectrum_table(&s, 80).unwrap()).unwrap();
        for k in 1..=80 {
            let v = t.at(&[k]).unwrap();
            assert!(v[0].im < 0.0 && v[1].im > 0.0, "k = {k}: {v:?}");
        }
    }

    #[test]
    fn rescaling_leaves_spectrum_bit_identical() {
        let s = ModelSpec::one_dim_rows(&[0.3, -0.7], &[[1.0, 2.0], [-3.0, 0.5]]).unwrap().with_length(2.5).unwrap();
        let r = s.rescale_to_unit_torus();
        assert_eq!(spectrum_table(&s, 10).unwrap(), spectrum_table(&r, 10).unwrap());
        let u = ModelSpec::one_dim_rows(&[0.3, -0.7], &[[1.0, 2.0], [-3.0, 0.5]]).unwrap();
        assert_eq!(spectrum_table(&u, 10).unwrap(), spectrum_table(&u.rescale_to_unit_torus(), 10).unwrap());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(1).len(), 1);
        assert_eq!(permutations(4).len(), 24);
        let mut all = permutations(3);
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 6);
    }

    proptest! {
        #[test]
        fn conjugate_symmetry(
            b in proptest::collection::vec(-10.0f64..10.0, 9),
            v in proptest::collection::vec(-1.0f64..1.0, 3),
            k in 0i64..64,
        ) {
            let spec = ModelSpec::one_dim(&v, RealMatrix::from_row_major(3, 3, b)).unwrap();
            let plus: Vec<Complex64> = spectrum_at(&spec, &[k]).unwrap().iter().map(|z| z.conj()).collect();
            let minus = spectrum_at(&spec, &[-k]).unwrap();
            prop_assert!(multiset_close(&plus, &minus, 1e-10));
        }

        #[test]
        fn killing_shifts_each_mode(
            b in proptest::collection::vec(-5.0f64..5.0, 4),
            delta in 0.01f64..3.0,
            k in -20i64..20,
        ) {
            let spec = ModelSpec::one_dim(&[0.4, -0.2], RealMatrix::from_row_major(2, 2, b)).unwrap();
            let killed = spec.apply_killing(delta).unwrap();
            let a: Vec<Complex64> = spectrum_at(&spec, &[k]).unwrap().iter().map(|z| z - delta).collect();
            let b = spectrum_at(&killed, &[k]).unwrap();
            prop_assert!(multiset_close(&a, &b, 1e-10));
        }
    }
}

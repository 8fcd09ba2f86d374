//! CSV and JSON output, with readers for the round-trip tests.
//!
//! Floats are written in their shortest round-trip form. Branch and
//! component labels are 1-based.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use trspec_core::classify::ClassificationReport;
use trspec_core::modes::{SemigroupSpectrumSample, SpectrumTable};
use trspec_core::perturb::PerturbationReport;
use trspec_core::simulate::{Field, FourierState, Observables};
use trspec_core::Complex64;

use crate::error::{AppError, AppResult, ModelContext};

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn mode_header(prefix: &str, d: usize) -> Vec<String> {
    if d == 1 {
        vec![prefix.to_string()]
    } else {
        (0..d).map(|a| format!("{prefix}{a}")).collect()
    }
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

fn parse_err(what: &str) -> impl Fn(String) -> AppError + '_ {
    move |msg| AppError::Input(format!("{what}: {msg}"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub k: Vec<i64>,
    /// 1-based.
    pub branch: usize,
    pub value: Complex64,
}

pub fn spectrum_rows(table: &SpectrumTable) -> Vec<SpectrumRow> {
    table
        .records
        .iter()
        .map(|r| SpectrumRow {
            k: r.k.clone(),
            branch: r.branch + 1,
            value: r.lambda,
        })
        .collect()
}

/// Header `k, branch, re, im` (`k0, k1, …` for `d ≥ 2`).
pub fn write_spectrum_csv<W: Write>(w: W, d: usize, rows: &[SpectrumRow]) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = mode_header("k", d);
    header.extend(["branch", "re", "im"].map(String::from));
    out.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec: Vec<String> = r.k.iter().map(i64::to_string).collect();
        rec.push(r.branch.to_string());
        rec.push(fmt_f64(r.value.re));
        rec.push(fmt_f64(r.value.im));
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()
}

pub fn read_spectrum_csv<R: Read>(r: R) -> AppResult<(usize, Vec<SpectrumRow>)> {
    let err = parse_err("spectrum CSV");
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(|e| err(e.to_string()))?.clone();
    if header.len() < 4 {
        return Err(err("too few columns".into()));
    }
    let d = header.len() - 3;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let num = |i: usize| -> AppResult<f64> { rec[i].parse().map_err(|_| err(format!("bad number {:?}", &rec[i]))) };
        let k = (0..d)
            .map(|i| rec[i].parse::<i64>().map_err(|_| err(format!("bad mode {:?}", &rec[i]))))
            .collect::<AppResult<Vec<_>>>()?;
        rows.push(SpectrumRow {
            k,
            branch: rec[d].parse().map_err(|_| err(format!("bad branch {:?}", &rec[d])))?,
            value: Complex64::new(num(d + 1)?, num(d + 2)?),
        });
    }
    Ok((d, rows))
}

/// Header `k, branch, t, re, im` for the points `e^{tλ}`.
pub fn write_semigroup_csv<W: Write>(
    w: W,
    table: &SpectrumTable,
    sample: &SemigroupSpectrumSample,
) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = mode_header("k", table.d);
    header.extend(["branch", "t", "re", "im"].map(String::from));
    out.write_record(&header).map_err(csv_err)?;
    for (r, z) in table.records.iter().zip(&sample.points) {
        let mut rec: Vec<String> = r.k.iter().map(i64::to_string).collect();
        rec.push((r.branch + 1).to_string());
        rec.push(fmt_f64(sample.t));
        rec.push(fmt_f64(z.re));
        rec.push(fmt_f64(z.im));
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()
}

/// Header `k, sigma`.
pub fn write_sigma_csv<W: Write>(w: W, profile: &[(i64, f64)]) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["k", "sigma"]).map_err(csv_err)?;
    for (k, s) in profile {
        out.write_record([k.to_string(), fmt_f64(*s)]).map_err(csv_err)?;
    }
    out.flush()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationJson {
    pub verdict: String,
    pub b: f64,
    pub dominant_modes: Vec<i64>,
    #[serde(rename = "K_max")]
    pub k_max: u64,
    #[serde(rename = "K_pert")]
    pub k_pert: Option<u64>,
    pub warnings: Vec<String>,
    pub sigma_profile_csv: Option<String>,
}

impl ClassificationJson {
    pub fn from_report(r: &ClassificationReport, sigma_csv: Option<String>) -> Self {
        Self {
            verdict: r.verdict.as_str().to_string(),
            b: r.b,
            dominant_modes: r.dominant_modes.clone(),
            k_max: r.k_max,
            k_pert: r.k_pert,
            warnings: r.warnings.iter().map(|w| w.to_string()).collect(),
            sigma_profile_csv: sigma_csv,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientJson {
    /// 1-based.
    pub branch: usize,
    /// `λ̂⁽¹⁾, λ̂⁽²⁾, …`.
    pub coeffs: Vec<f64>,
    pub n_star: Option<usize>,
    pub direction: String,
    #[serde(rename = "K_pert")]
    pub k_pert: u64,
}

pub fn coefficient_json(report: &PerturbationReport, coeffs: Vec<Vec<f64>>) -> Vec<CoefficientJson> {
    report
        .branches
        .iter()
        .zip(coeffs)
        .enumerate()
        .map(|(j, (b, c))| CoefficientJson {
            branch: j + 1,
            coeffs: c,
            n_star: b.n_star,
            direction: b.direction.as_str().to_string(),
            k_pert: report.k_pert,
        })
        .collect()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn from_json<T: for<'de> Deserialize<'de>>(what: &str, text: &str) -> AppResult<T> {
    serde_json::from_str(text).map_err(|e| AppError::Input(format!("{what}: {e}")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: Vec<f64>,
    /// 1-based.
    pub component: usize,
    pub value: f64,
}

/// Header `t, x, component, value` (`x0, x1, …` for `d ≥ 2`); grid points
/// in row-major order, components innermost.
pub fn write_trajectory_csv<W: Write>(w: W, length: f64, snapshots: &[(f64, Field)]) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let d = snapshots.first().map_or(1, |s| s.1.d);
    let mut header = vec!["t".to_string()];
    header.extend(mode_header("x", d));
    header.extend(["component", "value"].map(String::from));
    out.write_record(&header).map_err(csv_err)?;
    for (t, f) in snapshots {
        let points = f.grid.pow(f.d as u32);
        let coord = |i: usize| fmt_f64(i as f64 * length / f.grid as f64);
        for p in 0..points {
            let mut idx = vec![0usize; f.d];
            let mut rest = p;
            for axis in (0..f.d).rev() {
                idx[axis] = rest % f.grid;
                rest /= f.grid;
            }
            for (j, comp) in f.values.iter().enumerate() {
                let mut rec = vec![fmt_f64(*t)];
                rec.extend(idx.iter().map(|&i| coord(i)));
                rec.push((j + 1).to_string());
                rec.push(fmt_f64(comp[p]));
                out.write_record(&rec).map_err(csv_err)?;
            }
        }
    }
    out.flush()
}

pub fn read_trajectory_csv<R: Read>(r: R) -> AppResult<Vec<TrajectoryRow>> {
    let err = parse_err("trajectory CSV");
    let mut rdr = csv::Reader::from_reader(r);
    let n = rdr.headers().map_err(|e| err(e.to_string()))?.len();
    if n < 4 {
        return Err(err("too few columns".into()));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let num = |i: usize| -> AppResult<f64> { rec[i].parse().map_err(|_| err(format!("bad number {:?}", &rec[i]))) };
        rows.push(TrajectoryRow {
            t: num(0)?,
            x: (1..n - 2).map(num).collect::<AppResult<_>>()?,
            component: rec[n - 2].parse().map_err(|_| err(format!("bad component {:?}", &rec[n - 2])))?,
            value: num(n - 1)?,
        });
    }
    Ok(rows)
}

pub fn write_trajectory_rows<W: Write>(w: W, d: usize, rows: &[TrajectoryRow]) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    header.extend(mode_header("x", d));
    header.extend(["component", "value"].map(String::from));
    out.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![fmt_f64(r.t)];
        rec.extend(r.x.iter().map(|&x| fmt_f64(x)));
        rec.push(r.component.to_string());
        rec.push(fmt_f64(r.value));
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()
}

/// Header `t, l2_norm, min_value, mean1…meanN, min1…minN, max1…maxN`.
pub fn write_observables_csv<W: Write>(w: W, n: usize, obs: &[Observables]) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = ["t", "l2_norm", "min_value"].map(String::from).to_vec();
    for prefix in ["mean", "min", "max"] {
        header.extend((1..=n).map(|j| format!("{prefix}{j}")));
    }
    out.write_record(&header).map_err(csv_err)?;
    for o in obs {
        let mut rec = vec![fmt_f64(o.t), fmt_f64(o.l2_norm), fmt_f64(o.min_value)];
        rec.extend(o.averages.iter().map(|&x| fmt_f64(x)));
        rec.extend(o.extrema.iter().map(|e| fmt_f64(e.0)));
        rec.extend(o.extrema.iter().map(|e| fmt_f64(e.1)));
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()
}

pub fn read_observables_csv<R: Read>(r: R) -> AppResult<Vec<Observables>> {
    let err = parse_err("observables CSV");
    let mut rdr = csv::Reader::from_reader(r);
    let cols = rdr.headers().map_err(|e| err(e.to_string()))?.len();
    if cols < 6 || (cols - 3) % 3 != 0 {
        return Err(err(format!("unexpected column count {cols}")));
    }
    let n = (cols - 3) / 3;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let v = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| err(format!("bad number {s:?}"))))
            .collect::<AppResult<Vec<f64>>>()?;
        out.push(Observables {
            t: v[0],
            l2_norm: v[1],
            min_value: v[2],
            averages: v[3..3 + n].to_vec(),
            extrema: (0..n).map(|j| (v[3 + n + j], v[3 + 2 * n + j])).collect(),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IcMode {
    pub k: Vec<i64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Initial data as Fourier coefficients. Modes not listed are zero; the
/// list must be closed under `k ↦ −k` with conjugate values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcFile {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub cutoff: usize,
    pub modes: Vec<IcMode>,
}

impl IcFile {
    pub fn from_state(s: &FourierState) -> Self {
        Self {
            d: s.dim(),
            n: s.components(),
            cutoff: s.cutoff(),
            modes: s
                .modes()
                .filter(|(_, c)| c.iter().any(|z| z.re != 0.0 || z.im != 0.0))
                .map(|(k, c)| IcMode {
                    k,
                    re: c.iter().map(|z| z.re).collect(),
                    im: c.iter().map(|z| z.im).collect(),
                })
                .collect(),
        }
    }

    pub fn to_state(&self) -> AppResult<FourierState> {
        let mut entries = Vec::with_capacity(self.modes.len());
        for m in &self.modes {
            if m.re.len() != m.im.len() {
                return Err(AppError::Input(format!("initial data: mode {:?} has mismatched re/im lengths", m.k)));
            }
            let z = m.re.iter().zip(&m.im).map(|(&a, &b)| Complex64::new(a, b)).collect();
            entries.push((m.k.clone(), z));
        }
        FourierState::from_coefficients(self.d, self.n, self.cutoff, &entries).context("initial data")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for x in [0.1, 1.0, -0.0, 1e-300, 123456789.123, f64::MAX, 2.0f64.sqrt()] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt_f64(0.1), "0.1");
    }

    #[test]
    fn spectrum_csv_round_trip() {
        let rows = vec![
            SpectrumRow {
                k: vec![-1],
                branch: 1,
                value: Complex64::new(-0.5, 0.25),
            },
            SpectrumRow {
                k: vec![-1],
                branch: 2,
                value: Complex64::new(1e-20, -3.0),
            },
        ];
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, 1, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,branch,re,im\n"));
        let (d, back) = read_spectrum_csv(buf.as_slice()).unwrap();
        assert_eq!((d, &back), (1, &rows));
        let mut again = Vec::new();
        write_spectrum_csv(&mut again, d, &back).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn ic_rejects_missing_partner() {
        let ic = IcFile {
            d: 1,
            n: 1,
            cutoff: 2,
            modes: vec![IcMode {
                k: vec![1],
                re: vec![1.0],
                im: vec![0.5],
            }],
        };
        assert_eq!(ic.to_state().unwrap_err().exit_code(), 2);
    }
}

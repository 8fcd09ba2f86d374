//! Parameter sweeps over scalar fields of a model template.
//!
//! ```json
//! {"template": {...model...},
//!  "axes": [{"path": "B[0][0]", "start": -5, "stop": 5, "step": 1}],
//!  "output": "sweep_out"}
//! ```
//!
//! Axis paths are `L`, `B[i][j]` or `velocities[i][a]` (0-based).

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use trspec_core::classify::{classify_profile, ClassifyOptions, DEFAULT_TOL};
use trspec_core::modes::default_window;

use crate::error::{output_err, AppError, AppResult, ModelContext};
use crate::formats::{fmt_f64, to_json, ClassificationJson};
use crate::io::ModelFile;

pub const MAX_AXES: usize = 3;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisFile {
    pub path: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub template: ModelFile,
    #[serde(default)]
    pub axes: Vec<AxisFile>,
    pub output: Option<PathBuf>,
    pub kmax: Option<u64>,
    pub tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisPath {
    Length,
    B(usize, usize),
    Velocity(usize, usize),
}

impl AxisPath {
    pub fn parse(s: &str, template: &ModelFile) -> AppResult<Self> {
        let bad = |why: &str| AppError::Input(format!("invalid axis path {s:?}: {why}"));
        if s == "L" {
            return Ok(AxisPath::Length);
        }
        let (name, rest) = s.split_at(s.find('[').ok_or_else(|| bad("expected L, B[i][j] or velocities[i][a]"))?);
        let idx: Vec<usize> = rest
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| bad("malformed index"))?
            .split("][")
            .map(|p| p.parse::<usize>().map_err(|_| bad("indices must be non-negative integers")))
            .collect::<AppResult<_>>()?;
        if idx.len() != 2 {
            return Err(bad("expected two indices"));
        }
        let (i, j) = (idx[0], idx[1]);
        match name {
            "B" if i < template.b.len() && j < template.b[i].len() => Ok(AxisPath::B(i, j)),
            "velocities" if i < template.velocities.len() && j < template.velocities[i].len() => {
                Ok(AxisPath::Velocity(i, j))
            }
            "B" | "velocities" => Err(bad("index out of range")),
            _ => Err(bad("unknown field")),
        }
    }

    fn apply(self, m: &mut ModelFile, value: f64) {
        match self {
            AxisPath::Length => m.length = value,
            AxisPath::B(i, j) => m.b[i][j] = value,
            AxisPath::Velocity(i, a) => {
                m.velocities[i][a] = value;
                // exact values would no longer match
                m.velocities_exact = None;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Axis {
    pub label: String,
    pub path: AxisPath,
    pub values: Vec<f64>,
}

/// `start, start + step, …` up to `stop`, cleaned to 12 significant digits so
/// that `0.1·3` prints as `0.3`.
pub fn axis_values(start: f64, stop: f64, step: f64) -> AppResult<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(AppError::Input("axis bounds must be finite".into()));
    }
    if step <= 0.0 {
        return Err(AppError::Input(format!("axis step must be positive, got {step}")));
    }
    if stop < start {
        return Err(AppError::Input(format!("axis stop {stop} is below start {start}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| {
            let v = start + i as f64 * step;
            format!("{v:.11e}").parse::<f64>().expect("formatted float parses")
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub template: ModelFile,
    pub axes: Vec<Axis>,
    pub output: PathBuf,
    pub opts: ClassifyOptions,
}

impl SweepPlan {
    pub fn from_file(file: SweepFile, output_override: Option<PathBuf>) -> AppResult<Self> {
        if file.axes.len() > MAX_AXES {
            return Err(AppError::Input(format!("at most {MAX_AXES} axes, got {}", file.axes.len())));
        }
        let axes = file
            .axes
            .iter()
            .map(|a| {
                Ok(Axis {
                    label: a.path.clone(),
                    path: AxisPath::parse(&a.path, &file.template)?,
                    values: axis_values(a.start, a.stop, a.step)?,
                })
            })
            .collect::<AppResult<Vec<_>>>()?;
        let output = output_override
            .or(file.output)
            .ok_or_else(|| AppError::Input("no output directory: set `output` or pass --out".into()))?;
        Ok(Self {
            template: file.template,
            axes,
            output,
            opts: ClassifyOptions {
                k_max: file.kmax,
                tol: file.tol.unwrap_or(DEFAULT_TOL),
            },
        })
    }

    /// Grid points in row-major order over the axes.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }

    pub fn file_name(&self, point: &[f64]) -> String {
        if self.axes.is_empty() {
            return "report.json".into();
        }
        let parts: Vec<String> = self
            .axes
            .iter()
            .zip(point)
            .map(|(a, v)| format!("{}={}", a.label, fmt_f64(*v)))
            .collect();
        format!("{}.json", parts.join("_"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub point: Vec<f64>,
    pub file: String,
    pub report: ClassificationJson,
}

fn classify_point(plan: &SweepPlan, point: &[f64]) -> AppResult<SweepRow> {
    let mut model = plan.template.clone();
    for (axis, &v) in plan.axes.iter().zip(point) {
        axis.path.apply(&mut model, v);
    }
    let file = plan.file_name(point);
    let spec = model.to_spec().map_err(|e| AppError::Input(format!("sweep point {file}: {e}")))?;
    let k_max = plan.opts.k_max.unwrap_or_else(|| default_window(&spec));
    let profile = trspec_core::classify::sigma_profile(&spec, k_max).context(&file)?;
    let report = classify_profile(&spec, plan.opts.tol, k_max, profile).context(&file)?;
    Ok(SweepRow {
        point: point.to_vec(),
        file,
        report: ClassificationJson::from_report(&report, None),
    })
}

/// Classifies every grid point in parallel, then writes one JSON per point
/// and `summary.csv`.
pub fn run(plan: &SweepPlan) -> AppResult<Vec<SweepRow>> {
    let rows = plan
        .points()
        .par_iter()
        .map(|p| classify_point(plan, p))
        .collect::<AppResult<Vec<_>>>()?;
    fs::create_dir_all(&plan.output).map_err(output_err(&plan.output))?;
    rows.par_iter().try_for_each(|r| {
        let path = plan.output.join(&r.file);
        fs::write(&path, to_json(&r.report)).map_err(output_err(path))
    })?;
    write_summary(&plan.output.join("summary.csv"), plan, &rows)?;
    Ok(rows)
}

fn write_summary(path: &Path, plan: &SweepPlan, rows: &[SweepRow]) -> AppResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| AppError::Output {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    let io = |e: csv::Error| AppError::Output {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    };
    let mut header: Vec<String> = plan.axes.iter().map(|a| a.label.clone()).collect();
    header.extend(["verdict", "b", "dominant_modes", "file"].map(String::from));
    w.write_record(&header).map_err(io)?;
    for r in rows {
        let mut rec: Vec<String> = r.point.iter().map(|&v| fmt_f64(v)).collect();
        rec.push(r.report.verdict.clone());
        rec.push(fmt_f64(r.report.b));
        rec.push(r.report.dominant_modes.len().to_string());
        rec.push(r.file.clone());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(output_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template() -> ModelFile {
        ModelFile {
            d: 1,
            n: 2,
            length: 1.0,
            velocities: vec![vec![0.5], vec![-0.1]],
            b: vec![vec![-2.0, 3.0], vec![-1.0, -1.0]],
            velocities_exact: None,
        }
    }

    #[test]
    fn axis_paths() {
        let t = template();
        assert_eq!(AxisPath::parse("B[0][1]", &t).unwrap(), AxisPath::B(0, 1));
        assert_eq!(AxisPath::parse("velocities[1][0]", &t).unwrap(), AxisPath::Velocity(1, 0));
        assert_eq!(AxisPath::parse("L", &t).unwrap(), AxisPath::Length);
        for bad in ["B[2][0]", "B[0]", "C[0][0]", "B[x][0]", "velocities[0][1]", "B0][0]"] {
            assert!(AxisPath::parse(bad, &t).is_err(), "{bad}");
        }
    }

    #[test]
    fn axis_value_grid() {
        assert_eq!(axis_values(-5.0, 5.0, 1.0).unwrap().len(), 11);
        assert_eq!(axis_values(0.0, 0.3, 0.1).unwrap(), vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(axis_values(1.0, 1.0, 0.5).unwrap(), vec![1.0]);
        assert!(axis_values(0.0, 1.0, 0.0).is_err());
        assert!(axis_values(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn points_and_names() {
        let file = SweepFile {
            template: template(),
            axes: vec![
                AxisFile {
                    path: "B[0][0]".into(),
                    start: 0.0,
                    stop: 1.0,
                    step: 1.0,
                },
                AxisFile {
                    path: "L".into(),
                    start: 1.0,
                    stop: 2.0,
                    step: 0.5,
                },
            ],
            output: Some("out".into()),
            kmax: None,
            tol: None,
        };
        let plan = SweepPlan::from_file(file, None).unwrap();
        let pts = plan.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1], vec![0.0, 1.5]);
        assert_eq!(plan.file_name(&pts[1]), "B[0][0]=0.0_L=1.5.json");
    }
}

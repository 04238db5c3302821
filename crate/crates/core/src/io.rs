//! File formats: profile CSV with a JSON sidecar, curvature and diagnostics
//! CSV, JSON reports, and the JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::ExperimentReport;
use crate::curvature::{min_sec_thorpe, FrameCurvature};
use crate::error::{Error, Result};
use crate::flow::{FlowOptions, FlowTrace};
use crate::grid::Grid;
use crate::manifold::ManifoldSpec;
use crate::profiles::ProfileSet;
use crate::stencil::GhostMode;

pub const PROFILE_HEADER: [&str; 5] = ["r", "zeta", "phi", "psi", "xi"];
pub const CURVATURE_HEADER: [&str; 12] = [
    "r", "sec01", "sec02", "sec03", "sec23", "sec31", "sec12", "ric00", "ric11", "ric22", "ric33", "minsec",
];
pub const DIAGNOSTICS_HEADER: [&str; 6] = ["t", "dt", "max_rhs", "minsec", "slope_res_minus", "slope_res_plus"];

/// Seventeen significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Metadata stored next to a profile CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSidecar {
    pub spec: ManifoldSpec,
    pub t: f64,
    #[serde(rename = "N")]
    pub nodes: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_profiles(path: &Path, p: &ProfileSet) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(PROFILE_HEADER)?;
    for i in 0..p.grid.len() {
        w.write_record([
            fmt_f64(p.grid.node(i)),
            fmt_f64(p.zeta[i]),
            fmt_f64(p.phi[i]),
            fmt_f64(p.psi[i]),
            fmt_f64(p.xi[i]),
        ])?;
    }
    w.flush()?;
    let meta = ProfileSidecar {
        spec: p.spec,
        t: p.t,
        nodes: p.grid.len(),
        length: p.grid.length(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_profiles(path: &Path) -> Result<ProfileSet> {
    let meta: ProfileSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != PROFILE_HEADER {
        return Err(Error::Format(format!("unexpected profile header {header:?}")));
    }
    let mut cols: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(meta.nodes));
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        for j in 0..4 {
            let field = rec.get(j + 1).ok_or_else(|| Error::Format(format!("row {row} is short")))?;
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("row {row}: `{field}` is not a number")))?;
            cols[j].push(v);
        }
    }
    let grid = Grid::new(meta.nodes, meta.length)?;
    ProfileSet::new(meta.spec, grid, meta.t, cols)
}

/// One row per node; `minsec` is the exact four-dimensional minimum.
pub fn write_curvature(path: &Path, p: &ProfileSet, curv: &[FrameCurvature]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CURVATURE_HEADER)?;
    for fc in curv {
        let mut row = vec![fmt_f64(p.grid.node(fc.node))];
        row.extend(fc.coordinate_secs().iter().map(|&x| fmt_f64(x)));
        row.extend(fc.ricci.iter().map(|&x| fmt_f64(x)));
        row.push(fmt_f64(min_sec_thorpe(fc)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diagnostics(path: &Path, trace: &FlowTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(DIAGNOSTICS_HEADER)?;
    let first = trace.snapshot_min_sec.first().copied();
    w.write_record([
        fmt_f64(trace.initial().t),
        String::new(),
        String::new(),
        fmt_opt(first),
        fmt_opt(trace.initial_smoothness.minus.map(|r| r.slope)),
        fmt_opt(trace.initial_smoothness.plus.map(|r| r.slope)),
    ])?;
    for s in &trace.steps {
        w.write_record([
            fmt_f64(s.t),
            fmt_f64(s.dt),
            fmt_f64(s.max_rhs),
            fmt_opt(s.min_sec),
            fmt_opt(s.smoothness.minus.map(|r| r.slope)),
            fmt_opt(s.smoothness.plus.map(|r| r.slope)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Snapshot CSVs and `diagnostics.csv` under `dir`. Returns the files written.
pub fn write_trace(dir: &Path, trace: &FlowTrace) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for (k, snap) in trace.snapshots.iter().enumerate() {
        let path = dir.join(format!("profiles_{k:05}.csv"));
        write_profiles(&path, snap)?;
        out.push(path);
    }
    let diag = dir.join("diagnostics.csv");
    write_diagnostics(&diag, trace)?;
    out.push(diag);
    Ok(out)
}

pub fn write_report(path: &Path, report: &ExperimentReport) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(report)? + "\n")?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Slopes to use at the poles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SlopeSetting {
    /// `"default"` or `"calibrate"`.
    Keyword(String),
    /// `[minus, plus]`.
    Values([f64; 2]),
}

impl Default for SlopeSetting {
    fn default() -> Self {
        SlopeSetting::Keyword("default".into())
    }
}

/// JSON run configuration. Every field is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: String,
    pub n: Option<u32>,
    pub c: f64,
    pub plateau: f64,
    pub width: Option<f64>,
    pub slopes: SlopeSetting,
    #[serde(rename = "N")]
    pub nodes: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub output_stride: usize,
    pub ghost_mode: GhostMode,
    pub max_steps: usize,
    pub experiment: Option<String>,
    pub model: Option<String>,
    /// Constant profile of the product cylinder.
    pub cylinder_k: f64,
    pub cylinder_length: f64,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let flow = FlowOptions::default();
        RunConfig {
            manifold: "s4".into(),
            n: None,
            c: 2.0,
            plateau: 1.0,
            width: None,
            slopes: SlopeSetting::default(),
            nodes: 400,
            cfl: flow.cfl,
            t_end: flow.t_end,
            output_stride: flow.output_stride,
            ghost_mode: flow.ghost_mode,
            max_steps: flow.max_steps,
            experiment: None,
            model: None,
            cylinder_k: 1.0,
            cylinder_length: 1.0,
            out_dir: None,
            seed: 0,
            samples: 20_000,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidSpec(format!("config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &'static str, ok: bool, reason: String| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason })
            }
        };
        field("c", self.c > 0.0 && self.c.is_finite(), format!("{} must be positive", self.c))?;
        field("plateau", self.plateau > 0.0, format!("{} must be positive", self.plateau))?;
        if let Some(w) = self.width {
            field("width", w > 0.0, format!("{w} must be positive"))?;
        }
        field("N", self.nodes >= 6, format!("{} is below the minimum of 6", self.nodes))?;
        field("cylinder_k", self.cylinder_k > 0.0, format!("{} must be positive", self.cylinder_k))?;
        field(
            "cylinder_length",
            self.cylinder_length > 0.0,
            format!("{} must be positive", self.cylinder_length),
        )?;
        field("samples", self.samples >= 1, "must be at least 1".into())?;
        match &self.slopes {
            SlopeSetting::Keyword(k) => field(
                "slopes",
                k == "default" || k == "calibrate",
                format!("`{k}` is neither \"default\", \"calibrate\" nor [minus, plus]"),
            )?,
            SlopeSetting::Values([a, b]) => field("slopes", *a > 0.0 && *b > 0.0, "slopes must be positive".into())?,
        }
        self.flow_options().validate()?;
        ManifoldSpec::from_label(&self.manifold, self.n, self.c).map(|_| ())
    }

    pub fn flow_options(&self) -> FlowOptions {
        FlowOptions {
            cfl: self.cfl,
            t_end: self.t_end,
            output_stride: self.output_stride,
            ghost_mode: self.ghost_mode,
            max_steps: self.max_steps,
        }
    }
}

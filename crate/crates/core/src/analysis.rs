//! Experiments on flow traces: the first variation of initially flat radial
//! planes, the headline check that they turn negative, the vanishing of the
//! integrated first variation along the geodesic, and Einstein regressions.

use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_profile, min_sec_global, min_sec_thorpe, MinSecOptions, TangentPlane};
use crate::error::{invalid, Error, Result};
use crate::flow::{evolve, FlowOptions, FlowTrace};
use crate::grid::Grid;
use crate::manifold::{Family, ManifoldSpec, Side};
use crate::profiles::{build_model_metric, GroveZiller, ModelMetric, ProfileSet};
use crate::stencil::{boundary_extend, derivatives, node_jet, GhostMode};

/// Negativity threshold for the theorem check, in units of `K⁻²`.
pub const NEGATIVE_THRESHOLD: f64 = 1e-8;
/// Allowed violation of `sec ≥ 0` in the initial data, in units of `K⁻²`.
pub const NONNEGATIVE_TOLERANCE: f64 = 1e-6;
/// Relative agreement required between the numeric and analytic rates.
pub const SLOPE_TOLERANCE: f64 = 0.1;
/// Homothety deviation allowed by the Einstein regression.
pub const HOMOTHETY_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// A named number together with the bound it is judged against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ScalarResult {
    /// `value ≤ tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        ScalarResult {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    /// `value ≥ tolerance`.
    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        ScalarResult {
            name: name.into(),
            value,
            tolerance,
            passed: value >= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub manifold: String,
    pub n: Option<u32>,
    pub c: f64,
    #[serde(rename = "N")]
    pub grid_nodes: usize,
    pub t_end: f64,
    pub r0: Option<f64>,
    pub sec_slope_numeric: Option<f64>,
    pub sec_slope_analytic: Option<f64>,
    pub min_sec_t0: Option<f64>,
    pub first_negative_t: Option<f64>,
    pub verdict: Verdict,
    #[serde(default)]
    pub results: Vec<ScalarResult>,
    #[serde(default)]
    pub artifacts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, spec: &ManifoldSpec, grid_nodes: usize, t_end: f64) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            manifold: spec.family.label(),
            n: match spec.family {
                Family::Mn { n } => Some(n),
                _ => None,
            },
            c: spec.c,
            grid_nodes,
            t_end,
            r0: None,
            sec_slope_numeric: None,
            sec_slope_analytic: None,
            min_sec_t0: None,
            first_negative_t: None,
            verdict: Verdict::Inconclusive,
            results: Vec::new(),
            artifacts: Vec::new(),
            note: None,
        }
    }

    /// Pass iff every scalar result passes.
    pub fn settle(&mut self) {
        self.verdict = if self.results.iter().all(|r| r.passed) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
    }
}

/// Rate of change at `t = 0` from a one-sided series: fits the forward
/// quotients `(v_k − v_0)/t_k`, `k = 1..=count`, by a line in `t` and returns
/// its intercept (a Richardson-style extrapolation of the difference quotient).
pub fn initial_rate(times: &[f64], values: &[f64], count: usize) -> Result<f64> {
    let m = count.min(times.len().saturating_sub(1)).min(values.len().saturating_sub(1));
    if m < 2 {
        return Err(Error::ShortTrace(format!(
            "need at least 3 snapshots for an initial rate, have {}",
            times.len().min(values.len())
        )));
    }
    let (t0, v0) = (times[0], values[0]);
    let pts: Vec<(f64, f64)> = (1..=m)
        .map(|k| {
            let dt = times[k] - t0;
            (dt, (values[k] - v0) / dt)
        })
        .collect();
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / m as f64;
    let mean_d = pts.iter().map(|p| p.1).sum::<f64>() / m as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_d)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Ok(mean_d - slope * mean_t)
}

/// Number of snapshots used by [`initial_rate`] in the experiments.
pub const RATE_POINTS: usize = 8;

fn other_noncollapsing(spec: &ManifoldSpec, node_side: Side, axis: usize) -> Option<(usize, usize)> {
    let pole = spec.pole(node_side)?;
    let [a, b] = pole.noncollapsing();
    if axis == a {
        Some((b, pole.collapse))
    } else if axis == b {
        Some((a, pole.collapse))
    } else {
        None
    }
}

/// `d/dt sec(e₀∧e_axis)` at `t = 0` and node `i`, for data with `ζ ≡ 1` whose
/// axis profile and its partner are equal and constant (`≡ K`) near the node:
/// `−c²(χ_r² + χχ_rr)/K⁴`, where `χ` is the profile collapsing at the nearer
/// pole. Derivatives of `χ` are taken by the grid stencils.
pub fn first_variation_radial(p0: &ProfileSet, i: usize, axis: usize) -> Result<f64> {
    let n = p0.grid.len();
    if i >= n {
        return Err(invalid("node", format!("{i} is outside a grid of {n} nodes")));
    }
    if !(1..=3).contains(&axis) {
        return Err(invalid("axis", format!("{axis} is not in 1..=3")));
    }
    let side = if p0.grid.node(i) <= 0.5 * p0.grid.length() {
        Side::Minus
    } else {
        Side::Plus
    };
    let (partner, collapse) = other_noncollapsing(&p0.spec, side, axis).ok_or_else(|| Error::Window {
        node: i,
        reason: format!("axis {axis} collapses at the {} pole or there is no pole", side.name()),
    })?;
    let k = p0.profile(axis)[i];
    let lo = i.saturating_sub(5);
    let hi = (i + 5).min(n - 1);
    for m in lo..=hi {
        let tol = 1e-12 * k;
        if (p0.zeta[m] - 1.0).abs() > 1e-12 {
            return Err(Error::Window {
                node: m,
                reason: format!("zeta = {} is not 1", p0.zeta[m]),
            });
        }
        for j in [axis, partner] {
            if (p0.profile(j)[m] - k).abs() > tol {
                return Err(Error::Window {
                    node: m,
                    reason: format!("profile {j} is not constant and equal to {k} within 5 nodes"),
                });
            }
        }
    }
    let jet = node_jet(p0, i, GhostMode::Reflect)?;
    let (chi, chi_r, chi_rr) = (jet.v[collapse], jet.d1[collapse], jet.d2[collapse]);
    let c = p0.spec.c;
    Ok(-c * c * (chi_r * chi_r + chi * chi_rr) / k.powi(4))
}

/// Starting metric for [`theorem_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialMetric {
    GroveZiller,
    Model { model: ModelMetric },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TheoremParams {
    pub plateau: f64,
    /// Transition width; the default layout is used when absent.
    pub width: Option<f64>,
    pub nodes: usize,
    pub t_end: f64,
    pub cfl: f64,
    pub min_sec: MinSecOptions,
}

impl Default for TheoremParams {
    fn default() -> Self {
        TheoremParams {
            plateau: 1.0,
            width: None,
            nodes: 400,
            t_end: 1e-3,
            cfl: 0.5,
            min_sec: MinSecOptions::default(),
        }
    }
}

pub fn build_initial(spec: ManifoldSpec, initial: InitialMetric, params: &TheoremParams) -> Result<ProfileSet> {
    match initial {
        InitialMetric::GroveZiller => {
            let gz = match params.width {
                Some(w) => GroveZiller::new(spec.with_length(4.0 * w), params.plateau, w)?,
                None => GroveZiller::with_defaults(spec, params.plateau)?,
            };
            gz.sample(Grid::new(params.nodes, gz.spec.length)?)
        }
        InitialMetric::Model { model } => {
            let length = model.length().unwrap_or(spec.length);
            build_model_metric(model, Grid::new(params.nodes, length)?, spec.c)
        }
    }
}

/// Everything [`theorem_check`] computed.
#[derive(Clone, Debug)]
pub struct TheoremOutcome {
    pub report: ExperimentReport,
    pub trace: Option<FlowTrace>,
    pub node: usize,
    pub axis: usize,
    /// `(t, sec(e₀∧e_axis))` at the chosen node.
    pub sec_series: Vec<(f64, f64)>,
    pub min_sec_plane: TangentPlane,
}

/// Select `r₀`: the first node from the minus pole with `χ < 0.1K` and
/// `χ_r > 0.5 s₀`.
pub fn select_r0(p: &ProfileSet, plateau: f64) -> Option<usize> {
    let pole = p.spec.pole(Side::Minus)?;
    let d = derivatives(p, GhostMode::Reflect);
    let chi = p.profile(pole.collapse);
    (0..p.grid.len()).find(|&i| chi[i] < 0.1 * plateau && d.d1[pole.collapse][i] > 0.5 * pole.slope)
}

/// Build the initial metric, certify `sec ≥ 0`, flow, and test whether the
/// initially flat radial plane at `r₀` turns negative at the predicted rate.
pub fn theorem_check(spec: ManifoldSpec, initial: InitialMetric, params: &TheoremParams) -> Result<TheoremOutcome> {
    let p0 = build_initial(spec, initial, params)?;
    let k = params.plateau;
    let unit = 1.0 / (k * k);
    let mut report = ExperimentReport::new("check-theorem", &p0.spec, params.nodes, params.t_end);

    let (min0, _, plane) = min_sec_global(&p0, &params.min_sec);
    report.min_sec_t0 = Some(min0);
    report
        .results
        .push(ScalarResult::at_least("min_sec_t0", min0, -NONNEGATIVE_TOLERANCE * unit));

    let pole = *p0
        .spec
        .pole(Side::Minus)
        .ok_or_else(|| Error::InvalidSpec("theorem check needs a pole at r = 0".into()))?;
    let axis = pole.noncollapsing()[0];
    let node = select_r0(&p0, k).unwrap_or(0);
    report.r0 = Some(p0.grid.node(node));
    let analytic = first_variation_radial(&p0, node, axis).ok();
    report.sec_slope_analytic = analytic;
    if analytic.is_none() {
        report.note = Some("first-variation window does not hold at r0".into());
    }

    let opts = FlowOptions {
        cfl: params.cfl,
        output_stride: 1,
        ..FlowOptions::until(params.t_end)
    };
    let trace = match evolve(&p0, &opts) {
        Ok(t) => t,
        Err(e) => {
            report.note = Some(format!("flow failed: {e}"));
            return Ok(TheoremOutcome {
                report,
                trace: None,
                node,
                axis,
                sec_series: Vec::new(),
                min_sec_plane: plane,
            });
        }
    };
    let secs = trace.sec_series(node, 0, axis)?;
    let times = trace.times();
    let sec_series: Vec<(f64, f64)> = times.iter().copied().zip(secs.iter().copied()).collect();
    report.first_negative_t = sec_series
        .iter()
        .find(|&&(_, s)| s < -NEGATIVE_THRESHOLD * unit)
        .map(|&(t, _)| t);
    let numeric = initial_rate(&times, &secs, RATE_POINTS).ok();
    report.sec_slope_numeric = numeric;

    let sec_min = secs.iter().copied().fold(f64::INFINITY, f64::min);
    report
        .results
        .push(ScalarResult::at_most("sec_r0_min", sec_min, -NEGATIVE_THRESHOLD * unit));
    let mismatch = match (numeric, analytic) {
        (Some(a), Some(b)) if b != 0.0 => ((a - b) / b).abs(),
        _ => f64::INFINITY,
    };
    report
        .results
        .push(ScalarResult::at_most("slope_relative_mismatch", mismatch, SLOPE_TOLERANCE));
    report.settle();
    if !trace.completed() {
        report.verdict = Verdict::Inconclusive;
        report.note = Some(format!("flow stopped early: {:?}", trace.stop));
    }
    Ok(TheoremOutcome {
        report,
        trace: Some(trace),
        node,
        axis,
        sec_series,
        min_sec_plane: plane,
    })
}

/// `d/dt sec(e₀∧e_axis)` at `t = 0` for every node of a trace.
pub fn radial_rates(trace: &FlowTrace, axis: usize) -> Result<Vec<f64>> {
    if !(1..=3).contains(&axis) {
        return Err(invalid("axis", format!("{axis} is not in 1..=3")));
    }
    let used = RATE_POINTS.min(trace.snapshots.len().saturating_sub(1));
    if used < 2 {
        return Err(Error::ShortTrace(format!("{} snapshots", trace.snapshots.len())));
    }
    let mode = trace.options.ghost_mode;
    let times: Vec<f64> = trace.snapshots[..=used].iter().map(|s| s.t).collect();
    let secs: Vec<Vec<f64>> = trace.snapshots[..=used]
        .iter()
        .map(|s| curvature_profile(s, mode).iter().map(|fc| fc.sec(0, axis)).collect())
        .collect();
    let n = trace.initial().grid.len();
    (0..n)
        .map(|i| {
            let series: Vec<f64> = secs.iter().map(|row| row[i]).collect();
            initial_rate(&times, &series, used)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub axis: usize,
    /// `|∫ rate ζ dr| / ∫ |rate| ζ dr`.
    pub residual: f64,
    pub integral: f64,
    pub absolute: f64,
}

/// Integrated first variation of `sec(e₀∧e_axis)` along the geodesic,
/// normalized by the integral of its absolute value.
pub fn integral_identity(trace: &FlowTrace, axis: usize) -> Result<IdentityResult> {
    let spec = trace.initial().spec;
    for side in [Side::Minus, Side::Plus] {
        if spec.pole(side).is_some_and(|p| p.collapse == axis) {
            return Err(Error::CollapsingAxis {
                axis,
                end: side.name(),
            });
        }
    }
    let rates = radial_rates(trace, axis)?;
    let p0 = trace.initial();
    let h = p0.grid.h();
    let mut integral = 0.0;
    let mut absolute = 0.0;
    for (i, r) in rates.iter().enumerate() {
        let w = p0.zeta[i] * h;
        integral += r * w;
        absolute += r.abs() * w;
    }
    let residual = if absolute > 0.0 { integral.abs() / absolute } else { 0.0 };
    Ok(IdentityResult {
        axis,
        residual,
        integral,
        absolute,
    })
}

/// Largest identity residual accepted by [`identity_check`].
pub const IDENTITY_TOLERANCE: f64 = 1e-2;

/// Snapshot stride for rate fits over a whole profile; the fitting window
/// is `O(h)`.
pub fn identity_stride(nodes: usize) -> usize {
    (nodes / 100).max(1)
}

/// Grove–Ziller flow and [`integral_identity`] for every axis that stays
/// noncollapsing at both poles.
pub fn identity_check(spec: ManifoldSpec, params: &TheoremParams) -> Result<(ExperimentReport, FlowTrace, Vec<IdentityResult>)> {
    let p0 = build_initial(spec, InitialMetric::GroveZiller, params)?;
    let mut report = ExperimentReport::new("check-identity", &p0.spec, params.nodes, params.t_end);
    let opts = FlowOptions {
        cfl: params.cfl,
        output_stride: identity_stride(params.nodes),
        ..FlowOptions::until(params.t_end)
    };
    let trace = evolve(&p0, &opts)?;
    let mut results = Vec::new();
    for axis in p0.spec.globally_noncollapsing() {
        let id = integral_identity(&trace, axis)?;
        report.results.push(ScalarResult::at_most(
            &format!("identity_residual_axis{axis}"),
            id.residual,
            IDENTITY_TOLERANCE,
        ));
        results.push(id);
    }
    report.settle();
    if results.is_empty() {
        report.verdict = Verdict::Inconclusive;
        report.note = Some("no axis is noncollapsing at both poles".into());
    }
    Ok((report, trace, results))
}

/// Observed early-time behaviour of one initially flat radial plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialPlaneReport {
    pub axis: usize,
    /// Nodes where `sec(e₀∧e_axis)` vanishes at `t = 0`.
    pub flat_nodes: usize,
    /// Largest and smallest initial rate over flat nodes away from the poles.
    pub max_rate: f64,
    pub r_max_rate: f64,
    pub min_rate: f64,
    pub r_min_rate: f64,
    /// Rate and final curvature at the node nearest `L/2`.
    pub mid_rate: f64,
    pub mid_sec_end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MidregionReport {
    pub planes: Vec<RadialPlaneReport>,
    /// Half-width of the excluded pole windows, in units of `r`.
    pub pole_window: [f64; 2],
}

/// Early-time sign of the initially flat radial planes away from the poles.
///
/// Pole windows are where a collapsing profile is below half its plateau.
/// No verdict.
pub fn midregion_sign(trace: &FlowTrace) -> Result<MidregionReport> {
    let p0 = trace.initial();
    let n = p0.grid.len();
    let mode = trace.options.ghost_mode;
    let plateau = p0.phi.iter().chain(&p0.psi).chain(&p0.xi).copied().fold(0.0, f64::max);
    let mut window = [0.0f64; 2];
    let mut outside = vec![true; n];
    for (slot, side) in [Side::Minus, Side::Plus].into_iter().enumerate() {
        let Some(pole) = p0.spec.pole(side) else { continue };
        let col = p0.profile(pole.collapse);
        for i in 0..n {
            let near = match side {
                Side::Minus => p0.grid.node(i) < 0.5 * p0.grid.length(),
                Side::Plus => p0.grid.node(i) >= 0.5 * p0.grid.length(),
            };
            if near && col[i] < 0.5 * plateau {
                outside[i] = false;
                let dist = match side {
                    Side::Minus => p0.grid.node(i),
                    Side::Plus => p0.grid.length() - p0.grid.node(i),
                };
                window[slot] = window[slot].max(dist);
            }
        }
    }
    let initial = curvature_profile(p0, mode);
    let last = curvature_profile(trace.last(), mode);
    let mid = p0.grid.nearest(0.5 * p0.grid.length());
    let mut planes = Vec::new();
    for axis in 1..4 {
        let rates = radial_rates(trace, axis)?;
        let flat: Vec<usize> = (0..n).filter(|&i| initial[i].sec(0, axis).abs() < 1e-10).collect();
        let mut rep = RadialPlaneReport {
            axis,
            flat_nodes: flat.len(),
            max_rate: f64::NEG_INFINITY,
            r_max_rate: f64::NAN,
            min_rate: f64::INFINITY,
            r_min_rate: f64::NAN,
            mid_rate: rates[mid],
            mid_sec_end: last[mid].sec(0, axis),
        };
        for &i in flat.iter().filter(|&&i| outside[i]) {
            if rates[i] > rep.max_rate {
                rep.max_rate = rates[i];
                rep.r_max_rate = p0.grid.node(i);
            }
            if rates[i] < rep.min_rate {
                rep.min_rate = rates[i];
                rep.r_min_rate = p0.grid.node(i);
            }
        }
        planes.push(rep);
    }
    Ok(MidregionReport {
        planes,
        pole_window: window,
    })
}

/// Flow an Einstein model (or the product cylinder) and compare with the
/// exact solution.
pub fn einstein_regression(
    model: ModelMetric,
    c: f64,
    t_end: f64,
    nodes: usize,
    cylinder_length: f64,
) -> Result<(ExperimentReport, FlowTrace)> {
    let length = model.length().unwrap_or(cylinder_length);
    let p0 = build_model_metric(model, Grid::new(nodes, length)?, c)?;
    let mut report = ExperimentReport::new("check-einstein", &p0.spec, nodes, t_end);
    let h = p0.grid.h();
    let lambda = model.einstein_constant(c);

    let curv = curvature_profile(&p0, GhostMode::Reflect);
    if !matches!(model, ModelMetric::ProductCylinder { .. }) {
        let ric_err = curv
            .iter()
            .flat_map(|fc| fc.ricci.iter().map(move |r| (r - lambda).abs()))
            .fold(0.0, f64::max);
        report
            .results
            .push(ScalarResult::at_most("ricci_minus_lambda", ric_err, 10.0 * h * h));
    }
    let min0 = curv.iter().map(min_sec_thorpe).fold(f64::INFINITY, f64::min);
    report.min_sec_t0 = Some(min0);

    let stride = 1000;
    let trace = evolve(
        &p0,
        &FlowOptions {
            output_stride: stride,
            ..FlowOptions::until(t_end)
        },
    )?;
    let last = trace.last();
    let t = last.t;
    let deviation = match model {
        ModelMetric::ProductCylinder { k } => {
            let exact = (k * k - c * c * t).sqrt();
            let mut worst: f64 = 0.0;
            for i in 0..nodes {
                worst = worst.max((last.zeta[i] - 1.0).abs());
                for j in 1..4 {
                    worst = worst.max((last.profile(j)[i] / exact - 1.0).abs());
                }
            }
            worst
        }
        _ => {
            let factor = (1.0 - 2.0 * lambda * t).sqrt();
            let mut worst: f64 = 0.0;
            for j in 0..4 {
                for i in 0..nodes {
                    worst = worst.max((last.profile(j)[i] / (factor * p0.profile(j)[i]) - 1.0).abs());
                }
            }
            worst
        }
    };
    report
        .results
        .push(ScalarResult::at_most("homothety_deviation", deviation, HOMOTHETY_TOLERANCE));
    if !matches!(model, ModelMetric::ProductCylinder { .. }) {
        let mut worst: f64 = 0.0;
        for (s, m) in trace.snapshots.iter().zip(&trace.snapshot_min_sec) {
            let expect = min0 / (1.0 - 2.0 * lambda * s.t);
            worst = worst.max((m / expect - 1.0).abs());
        }
        report
            .results
            .push(ScalarResult::at_most("min_sec_homothety", worst, HOMOTHETY_TOLERANCE));
    }
    report.settle();
    if !trace.completed() {
        report.verdict = Verdict::Inconclusive;
        report.note = Some(format!("flow stopped early: {:?}", trace.stop));
    }
    Ok((report, trace))
}

/// Resample a profile of a grid `2^k` times finer onto the coarse nodes.
/// Each coarse node is the midpoint of two fine nodes; six-point Lagrange
/// interpolation uses the ghost extension near the poles.
pub fn restrict_to_coarse(fine: &ProfileSet, j: usize, coarse: &Grid) -> Result<Vec<f64>> {
    let ratio = fine.grid.len() / coarse.len();
    if ratio < 2 || ratio * coarse.len() != fine.grid.len() || ratio % 2 != 0 {
        return Err(invalid(
            "N",
            format!("{} nodes do not refine {} by an even factor", fine.grid.len(), coarse.len()),
        ));
    }
    const W: [f64; 6] = [3.0, -25.0, 150.0, 150.0, -25.0, 3.0];
    let ext = boundary_extend(fine, 3);
    Ok((0..coarse.len())
        .map(|i| {
            let left = (ratio * i + ratio / 2 - 1) as isize;
            (0..6).map(|k| W[k] * ext.at(j, left - 2 + k as isize)).sum::<f64>() / 256.0
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub nodes: [usize; 3],
    /// Max-norm differences `|φ_N − φ_2N|` and `|φ_2N − φ_4N|` on the coarse nodes.
    pub differences: [f64; 2],
    pub order: f64,
}

/// Observed order of `φ(·, t_end)` from runs on `N`, `2N`, `4N` nodes.
pub fn refinement_study(
    spec: ManifoldSpec,
    initial: InitialMetric,
    params: &TheoremParams,
    coarse_nodes: usize,
) -> Result<RefinementStudy> {
    let nodes = [coarse_nodes, 2 * coarse_nodes, 4 * coarse_nodes];
    let mut finals = Vec::new();
    for &n in &nodes {
        let p0 = build_initial(spec, initial, &TheoremParams { nodes: n, ..*params })?;
        let opts = FlowOptions {
            cfl: params.cfl,
            output_stride: usize::MAX,
            ..FlowOptions::until(params.t_end)
        };
        let trace = evolve(&p0, &opts)?;
        if !trace.completed() {
            return Err(Error::ShortTrace(format!("flow on {n} nodes stopped early: {:?}", trace.stop)));
        }
        finals.push(trace.last().clone());
    }
    let grid = finals[0].grid;
    let mid = restrict_to_coarse(&finals[1], 1, &grid)?;
    let fine = restrict_to_coarse(&finals[2], 1, &grid)?;
    let d1 = finals[0].phi.iter().zip(&mid).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let d2 = mid.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(RefinementStudy {
        nodes,
        differences: [d1, d2],
        order: (d1 / d2).log2(),
    })
}

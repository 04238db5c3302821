//! Method-of-lines integration of `∂g/∂t = −2 Ric` for diagonal metrics:
//! each profile obeys `f_t = −f · Ric_ff` in the orthonormal frame, with `r`
//! held fixed.

use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_profile, min_sec_thorpe, ricci_closed_form, riemann_frame_with};
use crate::error::{invalid, Error, Result};
use crate::profiles::{check_smoothness, ProfileSet, SmoothnessReport, PROFILE_NAMES};
use crate::stencil::{derivatives, GhostMode};

pub use crate::stencil::boundary_extend;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowOptions {
    pub cfl: f64,
    pub t_end: f64,
    /// Keep a snapshot every this many steps (the initial and final states
    /// are always kept).
    pub output_stride: usize,
    pub ghost_mode: GhostMode,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            cfl: 0.5,
            t_end: 1e-3,
            output_stride: 1,
            ghost_mode: GhostMode::Reflect,
            max_steps: 2_000_000,
        }
    }
}

impl FlowOptions {
    pub fn until(t_end: f64) -> Self {
        FlowOptions {
            t_end,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(invalid("cfl", format!("{} must lie in (0, 1]", self.cfl)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(invalid("t_end", format!("{} must be positive", self.t_end)));
        }
        if self.output_stride == 0 {
            return Err(invalid("output_stride", "must be at least 1"));
        }
        if self.max_steps == 0 {
            return Err(invalid("max_steps", "must be at least 1"));
        }
        Ok(())
    }
}

/// Time derivatives `(ζ_t, φ_t, ψ_t, ξ_t)` at every node.
pub fn flow_rhs(p: &ProfileSet) -> Result<[Vec<f64>; 4]> {
    flow_rhs_with(p, GhostMode::Reflect)
}

pub fn flow_rhs_with(p: &ProfileSet, mode: GhostMode) -> Result<[Vec<f64>; 4]> {
    let n = p.grid.len();
    let d = derivatives(p, mode);
    let mut out: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
    for i in 0..n {
        let jet = d.jet(p, i);
        let ric = ricci_closed_form(&jet, p.spec.c);
        for j in 0..4 {
            let v = -jet.v[j] * ric[j];
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    field: PROFILE_NAMES[j],
                    node: i,
                    t: p.t,
                });
            }
            out[j][i] = v;
        }
    }
    Ok(out)
}

/// Stable step size: `cfl · min[h²ζ²/8, (φψξ / (c·max(φ,ψ,ξ)))² / 8]`.
pub fn stable_dt(p: &ProfileSet, cfl: f64) -> f64 {
    let h = p.grid.h();
    let c = p.spec.c;
    let mut cap = f64::INFINITY;
    for i in 0..p.grid.len() {
        let z = p.zeta[i];
        let (a, b, e) = (p.phi[i], p.psi[i], p.xi[i]);
        let diffusion = h * h * z * z / 8.0;
        let reaction = (a * b * e / (c * a.max(b).max(e))).powi(2) / 8.0;
        cap = cap.min(diffusion).min(reaction);
    }
    cfl * cap
}

/// Why the integration ended.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    /// A profile dropped below `10⁻³·h·slope` somewhere.
    NearCollapse { profile: String, node: usize },
    NonFinite { message: String },
}

/// Diagnostics of one accepted step, taken after the step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub max_rhs: f64,
    /// Only filled at snapshot steps.
    pub min_sec: Option<f64>,
    pub smoothness: SmoothnessReport,
}

#[derive(Clone, Debug)]
pub struct FlowTrace {
    pub snapshots: Vec<ProfileSet>,
    /// Thorpe minimum of sectional curvature for each snapshot.
    pub snapshot_min_sec: Vec<f64>,
    pub steps: Vec<StepRecord>,
    pub initial_smoothness: SmoothnessReport,
    pub stop: StopReason,
    pub options: FlowOptions,
}

impl FlowTrace {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn initial(&self) -> &ProfileSet {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &ProfileSet {
        self.snapshots.last().expect("trace has the initial snapshot")
    }

    pub fn completed(&self) -> bool {
        self.stop == StopReason::Completed
    }

    /// Sectional curvature of the coordinate plane `e_a∧e_b` at `node` for
    /// every snapshot.
    pub fn sec_series(&self, node: usize, a: usize, b: usize) -> Result<Vec<f64>> {
        self.snapshots
            .iter()
            .map(|s| Ok(riemann_frame_with(s, node, self.options.ghost_mode)?.sec(a, b)))
            .collect()
    }
}

fn snapshot_min_sec(p: &ProfileSet, mode: GhostMode) -> f64 {
    curvature_profile(p, mode)
        .iter()
        .map(min_sec_thorpe)
        .fold(f64::INFINITY, f64::min)
}

fn axpy(base: &ProfileSet, k: &[Vec<f64>; 4], scale: f64) -> ProfileSet {
    let mut out = base.clone();
    for j in 0..4 {
        for (o, dv) in out.profile_mut(j).iter_mut().zip(&k[j]) {
            *o += scale * dv;
        }
    }
    out
}

fn collapse_check(p: &ProfileSet, floor: f64) -> Option<StopReason> {
    for j in 1..4 {
        if let Some(node) = p.profile(j).iter().position(|&v| v < floor) {
            return Some(StopReason::NearCollapse {
                profile: PROFILE_NAMES[j].to_string(),
                node,
            });
        }
    }
    None
}

/// Classical RK4 from `p0` to `opts.t_end`.
pub fn evolve(p0: &ProfileSet, opts: &FlowOptions) -> Result<FlowTrace> {
    opts.validate()?;
    for j in 0..4 {
        if let Some(node) = p0.profile(j).iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                field: PROFILE_NAMES[j],
                node,
                t: p0.t,
            });
        }
    }
    let mode = opts.ghost_mode;
    let floor = 1e-3 * p0.grid.h() * p0.spec.min_slope().unwrap_or(1.0);
    let initial_smoothness = check_smoothness(p0);
    let mut trace = FlowTrace {
        snapshots: vec![p0.clone()],
        snapshot_min_sec: vec![snapshot_min_sec(p0, mode)],
        steps: Vec::new(),
        initial_smoothness,
        stop: StopReason::Completed,
        options: *opts,
    };
    let mut state = p0.clone();
    let mut step = 0usize;
    // Relative slack so that roundoff in t does not produce a sliver step.
    let t_stop = opts.t_end * (1.0 - 1e-12);
    while state.t < t_stop {
        if step >= opts.max_steps {
            return Err(Error::MaxSteps {
                max_steps: opts.max_steps,
                t: state.t,
            });
        }
        let dt = stable_dt(&state, opts.cfl).min(opts.t_end - state.t);
        let stages = (|| -> Result<_> {
            let k1 = flow_rhs_with(&state, mode)?;
            let mut s2 = axpy(&state, &k1, 0.5 * dt);
            s2.t += 0.5 * dt;
            let k2 = flow_rhs_with(&s2, mode)?;
            let mut s3 = axpy(&state, &k2, 0.5 * dt);
            s3.t += 0.5 * dt;
            let k3 = flow_rhs_with(&s3, mode)?;
            let mut s4 = axpy(&state, &k3, dt);
            s4.t += dt;
            let k4 = flow_rhs_with(&s4, mode)?;
            Ok([k1, k2, k3, k4])
        })();
        let [k1, k2, k3, k4] = match stages {
            Ok(k) => k,
            Err(e) => {
                trace.stop = StopReason::NonFinite { message: e.to_string() };
                break;
            }
        };
        let mut max_rhs: f64 = 0.0;
        let mut next = state.clone();
        for j in 0..4 {
            let col = next.profile_mut(j);
            for i in 0..col.len() {
                let slope = (k1[j][i] + 2.0 * k2[j][i] + 2.0 * k3[j][i] + k4[j][i]) / 6.0;
                max_rhs = max_rhs.max(k1[j][i].abs());
                col[i] += dt * slope;
            }
        }
        next.t = if opts.t_end - (state.t + dt) <= 1e-12 * opts.t_end {
            opts.t_end
        } else {
            state.t + dt
        };
        state = next;
        step += 1;

        let finished = state.t >= t_stop;
        let halt = collapse_check(&state, floor);
        let snapshot = finished || halt.is_some() || step % opts.output_stride == 0;
        let min_sec = snapshot.then(|| snapshot_min_sec(&state, mode));
        trace.steps.push(StepRecord {
            t: state.t,
            dt,
            max_rhs,
            min_sec,
            smoothness: check_smoothness(&state),
        });
        if let Some(m) = min_sec {
            trace.snapshots.push(state.clone());
            trace.snapshot_min_sec.push(m);
        }
        if let Some(reason) = halt {
            trace.stop = reason;
            break;
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::profiles::{build_model_metric, ModelMetric};
    use std::f64::consts::PI;

    #[test]
    fn cylinder_rhs_is_homogeneous() {
        let p = build_model_metric(ModelMetric::ProductCylinder { k: 1.0 }, Grid::new(30, 1.0).unwrap(), 2.0).unwrap();
        let rhs = flow_rhs(&p).unwrap();
        assert!(rhs[0].iter().all(|&v| v == 0.0));
        for j in 1..4 {
            assert!(rhs[j].iter().all(|&v| (v + 2.0).abs() < 1e-14));
        }
    }

    #[test]
    fn round_sphere_rhs_is_homothetic() {
        let p = build_model_metric(ModelMetric::RoundS4, Grid::new(400, PI / 3.0).unwrap(), 1.0).unwrap();
        let rhs = flow_rhs(&p).unwrap();
        let h = p.grid.h();
        for j in 0..4 {
            for i in 0..p.grid.len() {
                let f = p.profile(j)[i];
                assert!((rhs[j][i] / f + 3.0).abs() < 10.0 * h * h, "profile {j} node {i}");
            }
        }
    }

    #[test]
    fn options_validated() {
        let mut o = FlowOptions::until(1.0);
        o.cfl = 1.5;
        assert!(o.validate().is_err());
        assert!(FlowOptions::until(-1.0).validate().is_err());
    }

    #[test]
    fn cylinder_evolves_by_ode() {
        let (k, c) = (1.0, 2.0);
        let p = build_model_metric(ModelMetric::ProductCylinder { k }, Grid::new(20, 1.0).unwrap(), c).unwrap();
        let t_end = 0.1;
        let trace = evolve(&p, &FlowOptions { output_stride: 50, ..FlowOptions::until(t_end) }).unwrap();
        assert!(trace.completed());
        let last = trace.last();
        assert_eq!(last.t, t_end);
        let exact = (k * k - c * c * t_end).sqrt();
        assert!(last.phi.iter().all(|&v| (v - exact).abs() < 1e-9));
        assert!(last.zeta.iter().all(|&v| v == 1.0));
        let times = trace.times();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn max_steps_is_an_error() {
        let p = build_model_metric(ModelMetric::RoundS4, Grid::new(50, PI / 3.0).unwrap(), 1.0).unwrap();
        let opts = FlowOptions {
            max_steps: 3,
            ..FlowOptions::until(0.01)
        };
        assert!(matches!(evolve(&p, &opts), Err(Error::MaxSteps { .. })));
    }
}

//! Metric state `g = ζ²dr² + φ²dx₁² + ψ²dx₂² + ξ²dx₃²` sampled on a grid,
//! and the initial data used in the experiments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::manifold::{End, Family, ManifoldSpec, Pole, Side};
use crate::stencil::boundary_extend;
use crate::transition::{Jet3, TransitionProfile};

/// Profiles `(ζ, φ, ψ, ξ)` at one instant of flow time.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileSet {
    pub spec: ManifoldSpec,
    pub grid: Grid,
    pub t: f64,
    pub zeta: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub xi: Vec<f64>,
}

impl ProfileSet {
    pub fn new(spec: ManifoldSpec, grid: Grid, t: f64, profiles: [Vec<f64>; 4]) -> Result<Self> {
        spec.validate()?;
        if profiles.iter().any(|p| p.len() != grid.len()) {
            return Err(Error::Format(format!(
                "profile lengths {:?} do not match {} nodes",
                profiles.iter().map(Vec::len).collect::<Vec<_>>(),
                grid.len()
            )));
        }
        let [zeta, phi, psi, xi] = profiles;
        Ok(ProfileSet {
            spec,
            grid,
            t,
            zeta,
            phi,
            psi,
            xi,
        })
    }

    /// Profile `j`: 0 = ζ, 1 = φ, 2 = ψ, 3 = ξ.
    pub fn profile(&self, j: usize) -> &[f64] {
        match j {
            0 => &self.zeta,
            1 => &self.phi,
            2 => &self.psi,
            3 => &self.xi,
            _ => panic!("profile index {j} out of range"),
        }
    }

    pub fn profile_mut(&mut self, j: usize) -> &mut Vec<f64> {
        match j {
            0 => &mut self.zeta,
            1 => &mut self.phi,
            2 => &mut self.psi,
            3 => &mut self.xi,
            _ => panic!("profile index {j} out of range"),
        }
    }

    /// Positivity of every sample and the collapse pattern at the poles.
    pub fn validate(&self) -> Result<()> {
        for j in 0..4 {
            if let Some(i) = self.profile(j).iter().position(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(Error::Format(format!(
                    "profile {} is not positive at node {i} ({})",
                    PROFILE_NAMES[j],
                    self.profile(j)[i]
                )));
            }
        }
        let h = self.grid.h();
        for side in [Side::Minus, Side::Plus] {
            let Some(pole) = self.spec.pole(side) else { continue };
            let (near, next) = edge_pair(self.profile(pole.collapse), side);
            // Distance from the outermost node to the zero of the secant.
            let drop = near - next;
            let dist = if drop < 0.0 { near * h / -drop } else { f64::INFINITY };
            if (dist - 0.5 * h).abs() > h {
                return Err(Error::Format(format!(
                    "collapsing profile {} does not vanish at the {} pole",
                    PROFILE_NAMES[pole.collapse],
                    side.name()
                )));
            }
        }
        Ok(())
    }
}

pub const PROFILE_NAMES: [&str; 4] = ["zeta", "phi", "psi", "xi"];

/// Outermost sample and its inward neighbour at one end.
fn edge_pair(col: &[f64], side: Side) -> (f64, f64) {
    let n = col.len();
    match side {
        Side::Minus => (col[0], col[1]),
        Side::Plus => (col[n - 1], col[n - 2]),
    }
}

fn edge_triple(col: &[f64], side: Side) -> [f64; 3] {
    let n = col.len();
    match side {
        Side::Minus => [col[0], col[1], col[2]],
        Side::Plus => [col[n - 1], col[n - 2], col[n - 3]],
    }
}

/// Quadratic extrapolation to the pole from the three outermost nodes.
fn extrapolate_quadratic(v: [f64; 3]) -> f64 {
    (15.0 * v[0] - 10.0 * v[1] + 3.0 * v[2]) / 8.0
}

/// Closed-form model metrics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelMetric {
    /// Round unit `S⁴` on `[0, π/3]`.
    RoundS4,
    /// Fubini–Study `ℂP²` on `[0, π/4]`.
    FubiniStudy,
    /// `I × S³` with constant profiles `φ = ψ = ξ = K`.
    ProductCylinder { k: f64 },
}

impl ModelMetric {
    pub fn name(&self) -> &'static str {
        match self {
            ModelMetric::RoundS4 => "round-s4",
            ModelMetric::FubiniStudy => "fubini-study",
            ModelMetric::ProductCylinder { .. } => "cylinder",
        }
    }

    pub fn from_name(name: &str, k: f64) -> Result<Self> {
        match name {
            "round-s4" | "round" | "s4" => Ok(ModelMetric::RoundS4),
            "fubini-study" | "fs" | "cp2" => Ok(ModelMetric::FubiniStudy),
            "cylinder" | "product-cylinder" => Ok(ModelMetric::ProductCylinder { k }),
            other => Err(invalid("model", format!("unknown model `{other}`"))),
        }
    }

    /// Required interval length, if any.
    pub fn length(&self) -> Option<f64> {
        match self {
            ModelMetric::RoundS4 => Some(PI / 3.0),
            ModelMetric::FubiniStudy => Some(PI / 4.0),
            ModelMetric::ProductCylinder { .. } => None,
        }
    }

    /// Einstein constant `Λ` with `Ric = Λg`, for bracket constant `c`.
    pub fn einstein_constant(&self, c: f64) -> f64 {
        match self {
            ModelMetric::RoundS4 => 3.0,
            ModelMetric::FubiniStudy => 6.0,
            // Not Einstein; Ric = diag(0, c²/(2K²), …).
            ModelMetric::ProductCylinder { k } => c * c / (2.0 * k * k),
        }
    }

    pub fn spec(&self, c: f64, length: f64) -> ManifoldSpec {
        match self {
            ModelMetric::RoundS4 => ManifoldSpec::s4(c),
            ModelMetric::FubiniStudy => ManifoldSpec::cp2(c),
            ModelMetric::ProductCylinder { .. } => ManifoldSpec::cylinder(c, length),
        }
    }

    /// Exact `(value, d1, d2)` of `(ζ, φ, ψ, ξ)` at `r`. The tabulated
    /// profiles are those of bracket constant 1 and scale linearly with `c`.
    pub fn exact(&self, r: f64, c: f64) -> [[f64; 3]; 4] {
        let (s, co) = r.sin_cos();
        let s3 = 3f64.sqrt();
        let zeta = [1.0, 0.0, 0.0];
        let raw = match self {
            ModelMetric::RoundS4 => [
                [2.0 * s, 2.0 * co, -2.0 * s],
                [s3 * co + s, -s3 * s + co, -s3 * co - s],
                [s3 * co - s, -s3 * s - co, -s3 * co + s],
            ],
            ModelMetric::FubiniStudy => {
                let (s2, c2) = (2.0 * r).sin_cos();
                [[s, co, -s], [c2, -2.0 * s2, -4.0 * c2], [co, -s, -co]]
            }
            ModelMetric::ProductCylinder { k } => return [zeta, [*k, 0.0, 0.0], [*k, 0.0, 0.0], [*k, 0.0, 0.0]],
        };
        let scale = |v: [f64; 3]| v.map(|x| c * x);
        [zeta, scale(raw[0]), scale(raw[1]), scale(raw[2])]
    }
}

/// Sample a model metric. `grid.length()` must match the model's interval.
pub fn build_model_metric(model: ModelMetric, grid: Grid, c: f64) -> Result<ProfileSet> {
    if !(c > 0.0) {
        return Err(invalid("c", format!("{c} must be positive")));
    }
    if let Some(expected) = model.length() {
        if (grid.length() - expected).abs() > 1e-12 * expected {
            return Err(Error::WrongLength {
                model: model.name(),
                expected,
                actual: grid.length(),
            });
        }
    }
    let spec = model.spec(c, grid.length());
    let mut cols: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(grid.len()));
    for r in grid.nodes() {
        let e = model.exact(r, c);
        for j in 0..4 {
            cols[j].push(e[j][0]);
        }
    }
    ProfileSet::new(spec, grid, 0.0, cols)
}

/// Length of the action field that collapses at a Grove–Ziller pole.
///
/// The profile is the Cheeger quotient `A f / √(A² + f²)` of a concave
/// transition `f` of the disk factor: the orbit metric before the quotient
/// stretches the collapsing direction to `A = 2K/√3` (the largest stretch with
/// `sec ≥ 0`), and `f` plateaus at `2K` so that the quotient plateaus at `K`.
#[derive(Clone, Copy, Debug)]
pub struct CheegerProfile {
    disk: TransitionProfile,
    stretch: f64,
}

impl CheegerProfile {
    pub fn new(plateau: f64, slope: f64, width: f64) -> Result<Self> {
        let stretch = 2.0 * plateau / 3f64.sqrt();
        let disk_height = plateau * stretch / (stretch * stretch - plateau * plateau).sqrt();
        let disk = TransitionProfile::with_height(slope, width, disk_height)?;
        Ok(CheegerProfile { disk, stretch })
    }

    pub fn disk(&self) -> &TransitionProfile {
        &self.disk
    }

    /// Value and derivatives at distance `x` from the pole.
    pub fn eval(&self, x: f64) -> Jet3 {
        let f = self.disk.eval(x);
        let a = self.stretch;
        let a3 = a * a * a;
        let q = a * a + f.value * f.value;
        let h0 = a * f.value / q.sqrt();
        let h1 = a3 / q.powf(1.5);
        let h2 = -3.0 * a3 * f.value / q.powf(2.5);
        let h3 = -3.0 * a3 / q.powf(2.5) + 15.0 * a3 * f.value * f.value / q.powf(3.5);
        Jet3 {
            value: h0,
            d1: h1 * f.d1,
            d2: h2 * f.d1 * f.d1 + h1 * f.d2,
            d3: h3 * f.d1.powi(3) + 3.0 * h2 * f.d1 * f.d2 + h1 * f.d3,
        }
    }
}

/// Grove–Ziller plateau metric: `ζ ≡ 1`; the noncollapsing profiles are
/// equal to `plateau` near each pole; the collapsing profile at each pole is a
/// [`CheegerProfile`] with that pole's slope, reaching `plateau` at distance
/// `transition_width` and staying there.
#[derive(Clone, Debug)]
pub struct GroveZiller {
    pub spec: ManifoldSpec,
    pub plateau: f64,
    pub width: f64,
    minus: CheegerProfile,
    plus: CheegerProfile,
}

impl GroveZiller {
    pub fn new(spec: ManifoldSpec, plateau: f64, transition_width: f64) -> Result<Self> {
        spec.validate()?;
        let (Some(pm), Some(pp)) = (spec.pole(Side::Minus), spec.pole(Side::Plus)) else {
            return Err(Error::InvalidSpec("Grove–Ziller metrics need a singular orbit at each end".into()));
        };
        if !matches!(spec.family, Family::S4 | Family::Cp2 | Family::Mn { .. }) {
            return Err(Error::InvalidSpec(format!("no Grove–Ziller pattern for {}", spec.family)));
        }
        if !(plateau > 0.0) {
            return Err(invalid("plateau", format!("{plateau} must be positive")));
        }
        if !(transition_width > 0.0 && transition_width < 0.5 * spec.length) {
            return Err(invalid(
                "transition_width",
                format!("{transition_width} must lie in (0, L/2 = {})", 0.5 * spec.length),
            ));
        }
        let minus = CheegerProfile::new(plateau, pm.slope, transition_width)?;
        let plus = CheegerProfile::new(plateau, pp.slope, transition_width)?;
        Ok(GroveZiller {
            spec,
            plateau,
            width: transition_width,
            minus,
            plus,
        })
    }

    /// Default layout: transition width `5·K / s_min` and interval length
    /// four times that.
    pub fn with_defaults(spec: ManifoldSpec, plateau: f64) -> Result<Self> {
        let slope = spec
            .min_slope()
            .ok_or_else(|| Error::InvalidSpec("Grove–Ziller metrics need poles".into()))?;
        let width = 5.0 * plateau / slope;
        Self::new(spec.with_length(4.0 * width), plateau, width)
    }

    pub fn pole_profile(&self, side: Side) -> &CheegerProfile {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    /// Exact `(value, d1, d2)` of `(ζ, φ, ψ, ξ)` at `r`.
    pub fn exact(&self, r: f64) -> [[f64; 3]; 4] {
        let mut out = [[1.0, 0.0, 0.0], [self.plateau, 0.0, 0.0], [self.plateau, 0.0, 0.0], [self.plateau, 0.0, 0.0]];
        let half = 0.5 * self.spec.length;
        let pole = |side: Side| -> &Pole { self.spec.pole(side).expect("validated") };
        if r < half {
            let j = self.minus.eval(r);
            out[pole(Side::Minus).collapse] = [j.value, j.d1, j.d2];
        } else {
            let j = self.plus.eval(self.spec.length - r);
            out[pole(Side::Plus).collapse] = [j.value, -j.d1, j.d2];
        }
        out
    }

    pub fn sample(&self, grid: Grid) -> Result<ProfileSet> {
        if (grid.length() - self.spec.length).abs() > 1e-12 * self.spec.length {
            return Err(Error::WrongLength {
                model: "grove-ziller",
                expected: self.spec.length,
                actual: grid.length(),
            });
        }
        let mut cols: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(grid.len()));
        for r in grid.nodes() {
            let e = self.exact(r);
            for j in 0..4 {
                cols[j].push(e[j][0]);
            }
        }
        ProfileSet::new(self.spec, grid, 0.0, cols)
    }
}

/// Build the Grove–Ziller initial metric on `grid`.
pub fn build_grove_ziller(spec: ManifoldSpec, plateau: f64, transition_width: f64, grid: Grid) -> Result<ProfileSet> {
    GroveZiller::new(spec, plateau, transition_width)?.sample(grid)
}

/// Smoothness residuals at one pole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleResiduals {
    /// `|extrapolated slope of the collapsing profile − slope·ζ(pole)|`, `O(h⁴)`.
    pub slope: f64,
    /// `|difference of the noncollapsing pair extrapolated to the pole|`, `O(h³)`.
    pub pole_equality: f64,
    /// Largest jump in first derivative across the pole of the
    /// ghost-extended profiles, `O(h²)`.
    pub parity: f64,
    /// Threshold used by [`PoleResiduals::flagged`].
    pub tolerance: f64,
}

impl PoleResiduals {
    pub const SLOPE_ORDER: u32 = 4;
    pub const EQUALITY_ORDER: u32 = 3;
    pub const PARITY_ORDER: u32 = 2;

    pub fn flagged(&self) -> bool {
        self.slope > self.tolerance || self.pole_equality > self.tolerance || self.parity > self.tolerance
    }

    pub fn max(&self) -> f64 {
        self.slope.max(self.pole_equality).max(self.parity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub h: f64,
    pub minus: Option<PoleResiduals>,
    pub plus: Option<PoleResiduals>,
}

impl SmoothnessReport {
    pub fn get(&self, side: Side) -> Option<&PoleResiduals> {
        match side {
            Side::Minus => self.minus.as_ref(),
            Side::Plus => self.plus.as_ref(),
        }
    }

    pub fn flagged(&self) -> bool {
        self.minus.is_some_and(|r| r.flagged()) || self.plus.is_some_and(|r| r.flagged())
    }
}

fn pole_residuals(p: &ProfileSet, side: Side, pole: &Pole) -> PoleResiduals {
    let h = p.grid.h();
    // The collapsing profile is odd and ζ is even about the pole: fit
    // `s·x + a·x³` and `z₀ + b·x²` through the two outermost nodes.
    let (near, next) = edge_pair(p.profile(pole.collapse), side);
    let fitted = (27.0 * near - next) / (12.0 * h);
    let z = edge_pair(&p.zeta, side);
    let zeta_pole = (9.0 * z.0 - z.1) / 8.0;
    let slope = (fitted - pole.slope * zeta_pole).abs();

    let [a, b] = pole.noncollapsing();
    let pole_equality = (extrapolate_quadratic(edge_triple(p.profile(a), side))
        - extrapolate_quadratic(edge_triple(p.profile(b), side)))
    .abs();

    // One-sided derivative at the pole from both sides of the extension.
    let ext = boundary_extend(p, 3);
    let n = p.grid.len() as isize;
    let mut parity: f64 = 0.0;
    for j in 0..4 {
        let (inside, outside): ([f64; 3], [f64; 3]) = match side {
            Side::Minus => (
                std::array::from_fn(|k| ext.at(j, k as isize)),
                std::array::from_fn(|k| ext.at(j, -1 - k as isize)),
            ),
            Side::Plus => (
                std::array::from_fn(|k| ext.at(j, n + k as isize)),
                std::array::from_fn(|k| ext.at(j, n - 1 - k as isize)),
            ),
        };
        let slope_in = (-2.0 * inside[0] + 3.0 * inside[1] - inside[2]) / h;
        let slope_out = -(-2.0 * outside[0] + 3.0 * outside[1] - outside[2]) / h;
        parity = parity.max((slope_in - slope_out).abs());
    }
    PoleResiduals {
        slope,
        pole_equality,
        parity,
        tolerance: 10.0 * h * h * pole.slope.max(1.0),
    }
}

/// Discrete smoothness conditions at both poles.
pub fn check_smoothness(p: &ProfileSet) -> SmoothnessReport {
    let at = |side: Side| match p.spec.end(side) {
        End::Pole(pole) => Some(pole_residuals(p, side, pole)),
        End::Mirror => None,
    };
    SmoothnessReport {
        h: p.grid.h(),
        minus: at(Side::Minus),
        plus: at(Side::Plus),
    }
}

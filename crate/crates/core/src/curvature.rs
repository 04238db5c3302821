//! Levi-Civita connection and Riemann tensor on the orthonormal adapted frame
//! `e₀ = ζ⁻¹∂r`, `eᵢ = fᵢ⁻¹Xᵢ`.
//!
//! Connection coefficients depend on `r` only. They are carried as dual
//! numbers so that `e₀(Γ)` is exact given the profile jets.

use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::{Matrix6, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::ProfileSet;
use crate::stencil::{derivatives, node_jet, GhostMode, NodeJet};

/// `a + b·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub const fn new(v: f64, d: f64) -> Self {
        Dual { v, d }
    }

    pub const fn constant(v: f64) -> Self {
        Dual { v, d: 0.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, s: f64) -> Dual {
        Dual::new(self.v * s, self.d * s)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual::new(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

const CYCLIC: [(usize, usize, usize); 3] = [(1, 2, 3), (2, 3, 1), (3, 1, 2)];

type Tensor3 = [[[Dual; 4]; 4]; 4];

/// Structure coefficients `C_abc = ⟨[e_a, e_b], e_c⟩`.
fn structure(jet: &NodeJet, c: f64) -> Tensor3 {
    let zeta = Dual::new(jet.v[0], jet.d1[0]);
    let f: [Dual; 4] = std::array::from_fn(|j| Dual::new(jet.v[j], jet.d1[j]));
    let fr: [Dual; 4] = std::array::from_fn(|j| Dual::new(jet.d1[j], jet.d2[j]));
    let mut cs = [[[Dual::default(); 4]; 4]; 4];
    for i in 1..4 {
        let w = fr[i] / (zeta * f[i]);
        cs[0][i][i] = -w;
        cs[i][0][i] = w;
    }
    for (i, j, k) in CYCLIC {
        let w = f[k] / (f[i] * f[j]) * c;
        cs[i][j][k] = w;
        cs[j][i][k] = -w;
    }
    cs
}

/// Connection coefficients `Γ_abc = ⟨∇_{e_a} e_b, e_c⟩` at one node, with
/// their `r`-derivatives.
#[derive(Clone, Debug)]
pub struct Connection {
    gamma: Tensor3,
    bracket: Tensor3,
    zeta: f64,
}

impl Connection {
    pub fn from_jet(jet: &NodeJet, c: f64) -> Self {
        let cs = structure(jet, c);
        let mut gamma = [[[Dual::default(); 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for k in 0..4 {
                    gamma[a][b][k] = (cs[a][b][k] - cs[b][k][a] + cs[k][a][b]) * 0.5;
                }
            }
        }
        Connection {
            gamma,
            bracket: cs,
            zeta: jet.v[0],
        }
    }

    /// `⟨∇_{e_a} e_b, e_c⟩`.
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.gamma[a][b][c].v
    }

    /// All 64 coefficients, indexed `[a][b][c]`.
    pub fn coefficients(&self) -> [[[f64; 4]; 4]; 4] {
        std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|c| self.gamma[a][b][c].v)))
    }

    /// `e_a(Γ_bcd)`: only `e₀` differentiates functions of `r`.
    fn directional(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        if a == 0 {
            self.gamma[b][c][d].d / self.zeta
        } else {
            0.0
        }
    }

    /// `Rm_abcd = ⟨R(e_a, e_b) e_c, e_d⟩`.
    pub fn riemann(&self) -> Riemann {
        let g = |a: usize, b: usize, c: usize| self.gamma[a][b][c].v;
        let mut rm = [[[[0.0; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                if a == b {
                    continue;
                }
                for c in 0..4 {
                    for d in 0..4 {
                        let mut acc = self.directional(a, b, c, d) - self.directional(b, a, c, d);
                        for f in 0..4 {
                            acc += g(b, c, f) * g(a, f, d) - g(a, c, f) * g(b, f, d);
                            acc -= self.bracket[a][b][f].v * g(f, c, d);
                        }
                        rm[a][b][c][d] = acc;
                    }
                }
            }
        }
        Riemann(rm)
    }
}

/// Full Riemann tensor `Rm[a][b][c][d] = ⟨R(e_a, e_b) e_c, e_d⟩`.
#[derive(Clone, Copy, Debug)]
pub struct Riemann(pub [[[[f64; 4]; 4]; 4]; 4]);

/// Ordered 2-form basis `e₀∧e₁, e₀∧e₂, e₀∧e₃, e₂∧e₃, e₃∧e₁, e₁∧e₂`.
pub const PLANES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)];

/// Column labels matching [`PLANES`].
pub const PLANE_LABELS: [&str; 6] = ["sec01", "sec02", "sec03", "sec23", "sec31", "sec12"];

impl Riemann {
    pub fn sec(&self, a: usize, b: usize) -> f64 {
        self.0[a][b][b][a]
    }

    pub fn ricci(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|b| std::array::from_fn(|c| (0..4).map(|a| self.0[a][b][c][a]).sum()))
    }

    /// Largest `|R_abcd + R_bcad + R_cabd|`.
    pub fn bianchi_defect(&self) -> f64 {
        let r = &self.0;
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        worst = worst.max((r[a][b][c][d] + r[b][c][a][d] + r[c][a][b][d]).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn operator(&self) -> Matrix6<f64> {
        Matrix6::from_fn(|i, j| {
            let (a, b) = PLANES[i];
            let (c, d) = PLANES[j];
            self.0[a][b][d][c]
        })
    }
}

/// Curvature operator at one node on the basis [`PLANES`].
#[derive(Clone, Debug)]
pub struct FrameCurvature {
    pub node: usize,
    pub operator: Matrix6<f64>,
    pub ricci: [f64; 4],
}

impl FrameCurvature {
    pub fn from_jet(node: usize, jet: &NodeJet, c: f64) -> Self {
        let rm = Connection::from_jet(jet, c).riemann();
        let ric = rm.ricci();
        FrameCurvature {
            node,
            operator: rm.operator(),
            ricci: std::array::from_fn(|a| ric[a][a]),
        }
    }

    /// Sectional curvature of the coordinate plane `e_a∧e_b`.
    pub fn sec(&self, a: usize, b: usize) -> f64 {
        let (i, sign) = plane_index(a, b);
        sign * sign * self.operator[(i, i)]
    }

    /// The six coordinate-plane curvatures in [`PLANES`] order.
    pub fn coordinate_secs(&self) -> [f64; 6] {
        std::array::from_fn(|i| self.operator[(i, i)])
    }

    pub fn scalar(&self) -> f64 {
        self.ricci.iter().sum()
    }

    /// `⟨R(ω), ω⟩` for a 2-form in the basis [`PLANES`].
    pub fn quadratic(&self, w: &[f64; 6]) -> f64 {
        let mut acc = 0.0;
        for i in 0..6 {
            let mut row = 0.0;
            for j in 0..6 {
                row += self.operator[(i, j)] * w[j];
            }
            acc += w[i] * row;
        }
        acc
    }

    pub fn eigenvalues(&self) -> [f64; 6] {
        let e = SymmetricEigen::new(self.operator).eigenvalues;
        let mut v: [f64; 6] = std::array::from_fn(|i| e[i]);
        v.sort_by(f64::total_cmp);
        v
    }

    /// Largest off-diagonal entry outside the three `e₀∧eᵢ / e_j∧e_k` pairs.
    pub fn block_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                if i != j && (i + 3) % 6 != j {
                    worst = worst.max(self.operator[(i, j)].abs());
                }
            }
        }
        worst
    }

    pub fn asymmetry(&self) -> f64 {
        (self.operator - self.operator.transpose()).abs().max()
    }

    pub fn norm(&self) -> f64 {
        self.operator.abs().max().max(f64::MIN_POSITIVE)
    }
}

fn plane_index(a: usize, b: usize) -> (usize, f64) {
    for (i, &(x, y)) in PLANES.iter().enumerate() {
        if (x, y) == (a, b) {
            return (i, 1.0);
        }
        if (y, x) == (a, b) {
            return (i, -1.0);
        }
    }
    panic!("({a}, {b}) is not a plane");
}

/// Connection coefficients at node `i`.
pub fn frame_connection(p: &ProfileSet, i: usize) -> Result<Connection> {
    Ok(Connection::from_jet(&node_jet(p, i, GhostMode::Reflect)?, p.spec.c))
}

pub fn riemann_frame(p: &ProfileSet, i: usize) -> Result<FrameCurvature> {
    riemann_frame_with(p, i, GhostMode::Reflect)
}

pub fn riemann_frame_with(p: &ProfileSet, i: usize, mode: GhostMode) -> Result<FrameCurvature> {
    Ok(FrameCurvature::from_jet(i, &node_jet(p, i, mode)?, p.spec.c))
}

/// Curvature at every node, sharing one derivative evaluation.
pub fn curvature_profile(p: &ProfileSet, mode: GhostMode) -> Vec<FrameCurvature> {
    let d = derivatives(p, mode);
    (0..p.grid.len())
        .into_par_iter()
        .map(|i| FrameCurvature::from_jet(i, &d.jet(p, i), p.spec.c))
        .collect()
}

/// Ricci diagonal by the explicit reduced formulas,
///
/// ```text
/// Ric₀₀ = −Σ f_ss / f
/// Ricᵢᵢ = −fᵢ,ss/fᵢ − (fᵢ,s/fᵢ)·Σ_{j≠i} f_j,s/f_j + (c²/2)(fᵢ⁴ − (f_j² − f_k²)²)/(fᵢ²f_j²f_k²)
/// ```
///
/// with `∂_s = ζ⁻¹∂_r`. Differences of squares are factored.
pub fn ricci_closed_form(jet: &NodeJet, c: f64) -> [f64; 4] {
    let z = jet.v[0];
    let zr = jet.d1[0];
    let mut log_s = [0.0; 4];
    let mut ss_over = [0.0; 4];
    for j in 1..4 {
        let f = jet.v[j];
        log_s[j] = jet.d1[j] / (z * f);
        ss_over[j] = (jet.d2[j] * z - jet.d1[j] * zr) / (z * z * z * f);
    }
    let mut ric = [0.0; 4];
    ric[0] = -(ss_over[1] + ss_over[2] + ss_over[3]);
    for (i, j, k) in CYCLIC {
        let (fi, fj, fk) = (jet.v[i], jet.v[j], jet.v[k]);
        let d = (fj - fk) * (fj + fk);
        let fi2 = fi * fi;
        let homogeneous = 0.5 * c * c * ((fi2 - d) / (fj * fj)) * ((fi2 + d) / (fk * fk)) / fi2;
        ric[i] = -ss_over[i] - log_s[i] * (log_s[j] + log_s[k]) + homogeneous;
    }
    ric
}

/// Ricci diagonal from contracting the Koszul curvature.
pub fn ricci_diag(p: &ProfileSet, i: usize) -> Result<[f64; 4]> {
    Ok(riemann_frame(p, i)?.ricci)
}

/// A 2-plane at a node, spanned by orthonormal frame-coefficient vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentPlane {
    pub node: usize,
    pub v: [f64; 4],
    pub w: [f64; 4],
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(a: [f64; 4]) -> Option<[f64; 4]> {
    let n = dot(&a, &a).sqrt();
    (n > 1e-300).then(|| a.map(|x| x / n))
}

impl TangentPlane {
    /// Plane spanned by `v` and `w`, orthonormalized.
    pub fn span(node: usize, v: [f64; 4], w: [f64; 4]) -> Result<Self> {
        let scale = dot(&v, &v).sqrt().max(dot(&w, &w).sqrt());
        let v = normalize(v).ok_or_else(|| Error::DegeneratePlane("first vector is zero".into()))?;
        let p = dot(&v, &w);
        let w_perp: [f64; 4] = std::array::from_fn(|k| w[k] - p * v[k]);
        if dot(&w_perp, &w_perp).sqrt() <= 1e-12 * scale {
            return Err(Error::DegeneratePlane("vectors are parallel".into()));
        }
        let w = normalize(w_perp).expect("nonzero");
        Ok(TangentPlane { node, v, w })
    }

    /// Coordinate plane `e_a∧e_b`.
    pub fn coordinate(node: usize, a: usize, b: usize) -> Self {
        let mut v = [0.0; 4];
        let mut w = [0.0; 4];
        v[a] = 1.0;
        w[b] = 1.0;
        TangentPlane { node, v, w }
    }

    /// Largest deviation from orthonormality.
    pub fn orthonormality_defect(&self) -> f64 {
        (dot(&self.v, &self.v) - 1.0)
            .abs()
            .max((dot(&self.w, &self.w) - 1.0).abs())
            .max(dot(&self.v, &self.w).abs())
    }

    /// Plücker coordinates in the basis [`PLANES`].
    pub fn bivector(&self) -> [f64; 6] {
        let (v, w) = (&self.v, &self.w);
        PLANES.map(|(a, b)| v[a] * w[b] - v[b] * w[a])
    }
}

/// Sectional curvature of `plane` at node `i`.
pub fn sec_plane(p: &ProfileSet, i: usize, plane: &TangentPlane) -> Result<f64> {
    if plane.orthonormality_defect() > 1e-12 {
        return Err(Error::DegeneratePlane(format!(
            "frame vectors are not orthonormal (defect {:.3e})",
            plane.orthonormality_defect()
        )));
    }
    Ok(riemann_frame(p, i)?.quadratic(&plane.bivector()))
}

/// Search settings for the minimum sectional curvature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinSecOptions {
    pub samples: usize,
    pub seed: u64,
    /// Coordinate-descent sweeps from the best sample.
    pub sweeps: usize,
}

impl Default for MinSecOptions {
    fn default() -> Self {
        MinSecOptions {
            samples: 20_000,
            seed: 0,
            sweeps: 200,
        }
    }
}

fn gram_schmidt(vs: &mut [[f64; 4]; 4]) {
    for k in 0..4 {
        for m in 0..k {
            let p = dot(&vs[k], &vs[m]);
            let prev = vs[m];
            for (x, y) in vs[k].iter_mut().zip(prev) {
                *x -= p * y;
            }
        }
        vs[k] = normalize(vs[k]).unwrap_or([0.0; 4]);
    }
}

fn complete_basis(v: [f64; 4], w: [f64; 4]) -> [[f64; 4]; 4] {
    // Pick the two coordinate axes least aligned with the plane.
    let mut axes: Vec<usize> = (0..4).collect();
    axes.sort_by(|&a, &b| (v[a] * v[a] + w[a] * w[a]).total_cmp(&(v[b] * v[b] + w[b] * w[b])));
    let mut e1 = [0.0; 4];
    let mut e2 = [0.0; 4];
    e1[axes[0]] = 1.0;
    e2[axes[1]] = 1.0;
    let mut basis = [v, w, e1, e2];
    gram_schmidt(&mut basis);
    basis
}

fn wedge(v: &[f64; 4], w: &[f64; 4]) -> [f64; 6] {
    PLANES.map(|(a, b)| v[a] * w[b] - v[b] * w[a])
}

fn bilinear(fc: &FrameCurvature, x: &[f64; 6], y: &[f64; 6]) -> f64 {
    let mut acc = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            acc += x[i] * fc.operator[(i, j)] * y[j];
        }
    }
    acc
}

/// Rotate one spanning vector toward a complement vector by the angle that
/// minimizes the curvature exactly: along such a rotation the curvature is a
/// quadratic form in `(cos θ, sin θ)`.
fn descend(fc: &FrameCurvature, mut basis: [[f64; 4]; 4], sweeps: usize) -> (f64, [[f64; 4]; 4]) {
    let mut value = fc.quadratic(&wedge(&basis[0], &basis[1]));
    for _ in 0..sweeps {
        let start = value;
        for moving in 0..2 {
            let fixed = 1 - moving;
            for other in 2..4 {
                let x = wedge(&basis[moving], &basis[fixed]);
                let y = wedge(&basis[other], &basis[fixed]);
                let (a, b, d) = (fc.quadratic(&x), bilinear(fc, &x, &y), fc.quadratic(&y));
                let half = 0.5 * (a - d);
                let rad = half.hypot(b);
                let lowest = 0.5 * (a + d) - rad;
                if lowest < value {
                    // Eigenvector of [[a, b], [b, d]] for the lower eigenvalue.
                    let (cs, sn) = if rad == 0.0 {
                        (1.0, 0.0)
                    } else if half <= 0.0 {
                        let t = (rad - half, -b);
                        let n = t.0.hypot(t.1);
                        (t.0 / n, t.1 / n)
                    } else {
                        let t = (-b, rad + half);
                        let n = t.0.hypot(t.1);
                        (t.0 / n, t.1 / n)
                    };
                    let (u, o) = (basis[moving], basis[other]);
                    basis[moving] = std::array::from_fn(|k| cs * u[k] + sn * o[k]);
                    basis[other] = std::array::from_fn(|k| -sn * u[k] + cs * o[k]);
                    value = fc.quadratic(&wedge(&basis[0], &basis[1]));
                }
            }
        }
        if start - value <= 1e-15 * fc.norm() {
            break;
        }
    }
    (value, basis)
}

fn node_rng(seed: u64, node: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(node as u64);
    rng
}

/// Random samples kept as descent starts. Coordinate planes can be saddle
/// points of single rotations, so descent only starts from generic planes.
const DESCENT_STARTS: usize = 4;

/// Minimum sectional curvature of an operator by random planes plus descent.
pub fn min_sec_operator(fc: &FrameCurvature, opts: &MinSecOptions) -> (f64, TangentPlane) {
    let mut rng = node_rng(opts.seed, fc.node);
    let mut best = f64::INFINITY;
    let mut best_plane = TangentPlane::coordinate(fc.node, 0, 1);
    for &(a, b) in &PLANES {
        let pl = TangentPlane::coordinate(fc.node, a, b);
        let q = fc.quadratic(&pl.bivector());
        if q < best {
            best = q;
            best_plane = pl;
        }
    }
    // Lowest samples, ascending.
    let mut starts: Vec<(f64, TangentPlane)> = Vec::with_capacity(DESCENT_STARTS + 1);
    for _ in 0..opts.samples {
        let v: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let w: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let Ok(pl) = TangentPlane::span(fc.node, v, w) else { continue };
        let q = fc.quadratic(&pl.bivector());
        if starts.len() < DESCENT_STARTS || q < starts[starts.len() - 1].0 {
            let at = starts.partition_point(|s| s.0 <= q);
            starts.insert(at, (q, pl));
            starts.truncate(DESCENT_STARTS);
        }
    }
    for (q, pl) in starts {
        let (value, basis) = descend(fc, complete_basis(pl.v, pl.w), opts.sweeps);
        let (value, plane) = match TangentPlane::span(fc.node, basis[0], basis[1]) {
            Ok(found) if value <= q => (value, found),
            _ => (q, pl),
        };
        if value < best {
            best = value;
            best_plane = plane;
        }
    }
    (best, best_plane)
}

/// Minimum sectional curvature over all planes at node `i`.
pub fn min_sec_point(p: &ProfileSet, i: usize, opts: &MinSecOptions) -> Result<(f64, TangentPlane)> {
    Ok(min_sec_operator(&riemann_frame(p, i)?, opts))
}

/// Minimum over all nodes: `(value, node, plane)`.
pub fn min_sec_global(p: &ProfileSet, opts: &MinSecOptions) -> (f64, usize, TangentPlane) {
    curvature_profile(p, GhostMode::Reflect)
        .par_iter()
        .map(|fc| {
            let (v, pl) = min_sec_operator(fc, opts);
            (v, fc.node, pl)
        })
        .reduce_with(|a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("grid is nonempty")
}

/// Minimum sectional curvature via `min sec = max_λ λ_min(R + λ⋆)`, valid in
/// dimension four. With the block structure `R + λ⋆` splits into three 2×2
/// blocks, so the inner minimum is explicit; the outer maximum is concave.
pub fn min_sec_thorpe(fc: &FrameCurvature) -> f64 {
    let m = &fc.operator;
    let blocks: [(f64, f64, f64); 3] = std::array::from_fn(|k| {
        let j = k + 3;
        (m[(k, k)], 0.5 * (m[(k, j)] + m[(j, k)]), m[(j, j)])
    });
    // Entries not covered by the blocks are ignored; diagonal metrics have none.
    let lowest = |lam: f64| {
        blocks
            .iter()
            .map(|&(a, b, d)| 0.5 * (a + d) - (0.5 * (a - d)).hypot(b + lam))
            .fold(f64::INFINITY, f64::min)
    };
    let bound = 2.0 * fc.norm() + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (lowest(x1), lowest(x2));
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = lowest(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = lowest(x1);
        }
        if hi - lo < 1e-14 * bound {
            break;
        }
    }
    f1.max(f2)
}

/// Thorpe minimum at every node.
pub fn min_sec_profile(p: &ProfileSet, mode: GhostMode) -> Vec<f64> {
    curvature_profile(p, mode).iter().map(min_sec_thorpe).collect()
}

//! Ghost extension across the poles and fourth-order finite differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::End;
use crate::profiles::ProfileSet;

/// How derivatives are closed at the ends of the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GhostMode {
    /// Mirror through the pole using the reflection permutation.
    #[default]
    Reflect,
    /// No ghosts; one-sided fourth-order stencils at the two outermost nodes.
    OneSided,
}

pub const MAX_GHOSTS: usize = 4;

/// Profiles `(ζ, φ, ψ, ξ)` padded with `width` ghost nodes beyond each pole.
/// Node `i` of the grid lives at index `i + width`.
#[derive(Clone, Debug)]
pub struct Extended {
    pub width: usize,
    pub profiles: [Vec<f64>; 4],
}

impl Extended {
    /// Value of profile `j` at (possibly negative) node index `i`.
    pub fn at(&self, j: usize, i: isize) -> f64 {
        self.profiles[j][(i + self.width as isize) as usize]
    }
}

fn extend_one(src: &[&[f64]; 4], minus: &End, plus: &End, width: usize, j: usize) -> Vec<f64> {
    let n = src[0].len();
    let mut out = vec![0.0; n + 2 * width];
    let (sj, sign) = minus.ghost_source(j);
    for k in 0..width {
        out[width - 1 - k] = sign * src[sj][k];
    }
    out[width..width + n].copy_from_slice(src[j]);
    let (sj, sign) = plus.ghost_source(j);
    for k in 0..width {
        out[width + n + k] = sign * src[sj][n - 1 - k];
    }
    out
}

/// Pad every profile with `width ≤ 4` mirrored ghost nodes at both ends.
///
/// The ghost of profile `j` at `-r` is `sign · profile_{π(j)}(r)`, where `π`
/// is the reflection at that pole; the collapsing profile is continued oddly
/// and `ζ` evenly.
pub fn boundary_extend(p: &ProfileSet, width: usize) -> Extended {
    let width = width.min(MAX_GHOSTS).min(p.grid.len());
    let src = [&p.zeta[..], &p.phi[..], &p.psi[..], &p.xi[..]];
    let profiles = std::array::from_fn(|j| extend_one(&src, &p.spec.minus, &p.spec.plus, width, j));
    Extended { width, profiles }
}

/// Value, first and second `r`-derivative of each profile at one node.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NodeJet {
    pub v: [f64; 4],
    pub d1: [f64; 4],
    pub d2: [f64; 4],
}

/// First and second derivatives of all profiles at every node.
#[derive(Clone, Debug)]
pub struct Derivatives {
    pub d1: [Vec<f64>; 4],
    pub d2: [Vec<f64>; 4],
}

#[inline]
fn central(f: impl Fn(isize) -> f64, h: f64) -> (f64, f64) {
    let (m2, m1, c, p1, p2) = (f(-2), f(-1), f(0), f(1), f(2));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
    (d1, d2)
}

/// One-sided stencils for the outermost node (`offset = 0`) and its
/// neighbour (`offset = 1`), reading `f(0..6)` inward.
#[inline]
fn one_sided(f: &[f64; 6], offset: usize, h: f64) -> (f64, f64) {
    let [f0, f1, f2, f3, f4, f5] = *f;
    if offset == 0 {
        (
            (-25.0 * f0 + 48.0 * f1 - 36.0 * f2 + 16.0 * f3 - 3.0 * f4) / (12.0 * h),
            (45.0 * f0 - 154.0 * f1 + 214.0 * f2 - 156.0 * f3 + 61.0 * f4 - 10.0 * f5) / (12.0 * h * h),
        )
    } else {
        (
            (-3.0 * f0 - 10.0 * f1 + 18.0 * f2 - 6.0 * f3 + f4) / (12.0 * h),
            (10.0 * f0 - 15.0 * f1 - 4.0 * f2 + 14.0 * f3 - 6.0 * f4 + f5) / (12.0 * h * h),
        )
    }
}

pub fn derivatives(p: &ProfileSet, mode: GhostMode) -> Derivatives {
    let n = p.grid.len();
    let h = p.grid.h();
    let mut d1: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
    let mut d2: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
    match mode {
        GhostMode::Reflect => {
            let ext = boundary_extend(p, 2);
            for j in 0..4 {
                let col = &ext.profiles[j];
                for i in 0..n {
                    let base = i + 2;
                    let (a, b) = central(|k| col[(base as isize + k) as usize], h);
                    d1[j][i] = a;
                    d2[j][i] = b;
                }
            }
        }
        GhostMode::OneSided => {
            for j in 0..4 {
                let col = p.profile(j);
                for i in 2..n - 2 {
                    let (a, b) = central(|k| col[(i as isize + k) as usize], h);
                    d1[j][i] = a;
                    d2[j][i] = b;
                }
                let head: [f64; 6] = std::array::from_fn(|k| col[k]);
                let tail: [f64; 6] = std::array::from_fn(|k| col[n - 1 - k]);
                for off in 0..2 {
                    let (a, b) = one_sided(&head, off, h);
                    d1[j][off] = a;
                    d2[j][off] = b;
                    // Reading inward from the right end reverses the sign of odd derivatives.
                    let (a, b) = one_sided(&tail, off, h);
                    d1[j][n - 1 - off] = -a;
                    d2[j][n - 1 - off] = b;
                }
            }
        }
    }
    Derivatives { d1, d2 }
}

impl Derivatives {
    pub fn jet(&self, p: &ProfileSet, i: usize) -> NodeJet {
        NodeJet {
            v: [p.zeta[i], p.phi[i], p.psi[i], p.xi[i]],
            d1: std::array::from_fn(|j| self.d1[j][i]),
            d2: std::array::from_fn(|j| self.d2[j][i]),
        }
    }
}

/// Jet of all profiles at node `i`, ghost-filled near the poles.
pub fn node_jet(p: &ProfileSet, i: usize, mode: GhostMode) -> Result<NodeJet> {
    let n = p.grid.len();
    if i >= n {
        return Err(Error::InvalidParameter {
            name: "node",
            reason: format!("{i} is outside a grid of {n} nodes"),
        });
    }
    let h = p.grid.h();
    let mut jet = NodeJet::default();
    match mode {
        GhostMode::Reflect => {
            let ext = boundary_extend(p, 2);
            if ext.width < 2 {
                return Err(Error::MissingGhost { node: i });
            }
            for j in 0..4 {
                let (a, b) = central(|k| ext.at(j, i as isize + k), h);
                jet.v[j] = p.profile(j)[i];
                jet.d1[j] = a;
                jet.d2[j] = b;
            }
        }
        GhostMode::OneSided => {
            let d = derivatives(p, mode);
            jet = d.jet(p, i);
        }
    }
    Ok(jet)
}

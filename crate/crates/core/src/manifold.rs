//! Group-diagram metadata for the cohomogeneity-one 4-manifolds.
//!
//! A manifold is described by what happens at the two ends of the orbit
//! interval `[0, L]`: which of the three action-field profiles collapses, the
//! slope it must leave the pole with, and how the adapted frame continues
//! across the pole (the reflection permutation). Profiles are indexed
//! `1 = φ`, `2 = ψ`, `3 = ξ`; index `0` is reserved for the radial profile `ζ`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The manifold families admitting a cohomogeneity-one structure with
/// codimension-two singular orbits, plus the pole-free cylinder used for
/// homogeneous cross-checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Family {
    S4,
    Cp2,
    /// `M_n`: `S²×S²` for even `n`, `ℂP²#-ℂP²` for odd `n`.
    Mn { n: u32 },
    Cylinder,
}

impl Family {
    pub fn label(&self) -> String {
        match self {
            Family::S4 => "s4".into(),
            Family::Cp2 => "cp2".into(),
            Family::Mn { n } => format!("m{n}"),
            Family::Cylinder => "cylinder".into(),
        }
    }

    /// Topological type, for reports.
    pub fn topology(&self) -> &'static str {
        match self {
            Family::S4 => "S^4",
            Family::Cp2 => "CP^2",
            Family::Mn { n } if n % 2 == 0 => "S^2 x S^2",
            Family::Mn { .. } => "CP^2 # -CP^2",
            Family::Cylinder => "I x S^3",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Permutation of the action-field indices `{1, 2, 3}` describing how the
/// frame extends across a pole. Either the identity or a transposition of the
/// two noncollapsing indices; the collapsing index carries the sign `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reflection {
    map: [usize; 3],
}

impl Reflection {
    pub const IDENTITY: Reflection = Reflection { map: [1, 2, 3] };

    pub fn swap(a: usize, b: usize) -> Result<Self> {
        if !(1..=3).contains(&a) || !(1..=3).contains(&b) || a == b {
            return Err(Error::InvalidSpec(format!("cannot swap axes {a} and {b}")));
        }
        let mut map = [1, 2, 3];
        map[a - 1] = b;
        map[b - 1] = a;
        Ok(Reflection { map })
    }

    /// Image of axis `j` (1-based).
    pub fn apply(&self, j: usize) -> usize {
        self.map[j - 1]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn is_involution(&self) -> bool {
        (1..=3).all(|j| self.apply(self.apply(j)) == j)
    }
}

/// Boundary data at a singular orbit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    /// Axis (1..=3) whose profile vanishes at this end.
    pub collapse: usize,
    /// Magnitude of the collapsing profile's derivative at the pole, per unit `ζ`.
    pub slope: f64,
    pub reflection: Reflection,
}

impl Pole {
    /// The two axes that stay nondegenerate at this pole, in increasing order.
    pub fn noncollapsing(&self) -> [usize; 2] {
        match self.collapse {
            1 => [2, 3],
            2 => [1, 3],
            _ => [1, 2],
        }
    }
}

/// What sits at an end of the orbit interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum End {
    Pole(Pole),
    /// No singular orbit: every profile is continued evenly.
    Mirror,
}

impl End {
    pub fn pole(&self) -> Option<&Pole> {
        match self {
            End::Pole(p) => Some(p),
            End::Mirror => None,
        }
    }

    /// Source axis and sign for the ghost value of profile `j` (0 = ζ).
    pub fn ghost_source(&self, j: usize) -> (usize, f64) {
        match self {
            End::Mirror => (j, 1.0),
            End::Pole(_) if j == 0 => (0, 1.0),
            End::Pole(p) if j == p.collapse => (j, -1.0),
            End::Pole(p) => (p.reflection.apply(j), 1.0),
        }
    }
}

/// Which end of the interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn name(&self) -> &'static str {
        match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub family: Family,
    /// Bracket constant: `[X_i, X_j] = ±c X_k` on the action fields.
    pub c: f64,
    pub minus: End,
    pub plus: End,
    /// Length of the orbit interval in the initial arclength parameter.
    pub length: f64,
}

impl ManifoldSpec {
    /// `S⁴` with the `SO(3)` conjugation action. `φ` collapses at `r = 0`,
    /// `ξ` at `r = L`; the slopes are those of the round metric.
    pub fn s4(c: f64) -> Self {
        ManifoldSpec {
            family: Family::S4,
            c,
            minus: End::Pole(Pole {
                collapse: 1,
                slope: 2.0 * c,
                reflection: Reflection { map: [1, 3, 2] },
            }),
            plus: End::Pole(Pole {
                collapse: 3,
                slope: 2.0 * c,
                reflection: Reflection { map: [2, 1, 3] },
            }),
            length: PI / 3.0,
        }
    }

    /// `ℂP²` with the `SO(3)` subaction of `SU(3)`: `φ` collapses over the
    /// real `ℝP²`, `ψ` over the quadric.
    pub fn cp2(c: f64) -> Self {
        ManifoldSpec {
            family: Family::Cp2,
            c,
            minus: End::Pole(Pole {
                collapse: 1,
                slope: c,
                reflection: Reflection::IDENTITY,
            }),
            plus: End::Pole(Pole {
                collapse: 2,
                slope: 2.0 * c,
                reflection: Reflection { map: [3, 2, 1] },
            }),
            length: PI / 4.0,
        }
    }

    /// `M_n = (S³×S²)/S¹` with the `Sp(1)` action; `φ` collapses at both ends.
    /// The default slope `c` is the bounded-curvature slope found by
    /// [`calibrate_slope`](crate::calibrate_slope). The isotropy weight
    /// suggests `n·c/2` instead; the two agree at `n = 2`.
    pub fn mn(n: u32, c: f64) -> Self {
        let pole = Pole {
            collapse: 1,
            slope: c,
            reflection: Reflection::IDENTITY,
        };
        ManifoldSpec {
            family: Family::Mn { n },
            c,
            minus: End::Pole(pole),
            plus: End::Pole(pole),
            length: PI / 2.0,
        }
    }

    pub fn cylinder(c: f64, length: f64) -> Self {
        ManifoldSpec {
            family: Family::Cylinder,
            c,
            minus: End::Mirror,
            plus: End::Mirror,
            length,
        }
    }

    /// Parse a manifold label such as `s4`, `cp2`, `m1`, `m2`, `mn` (with `n`).
    pub fn from_label(label: &str, n: Option<u32>, c: f64) -> Result<Self> {
        let lower = label.to_ascii_lowercase();
        match lower.as_str() {
            "s4" => Ok(Self::s4(c)),
            "cp2" => Ok(Self::cp2(c)),
            "mn" => {
                let n = n.ok_or_else(|| Error::InvalidSpec("`mn` needs n".into()))?;
                Ok(Self::mn(n, c))
            }
            "s2xs2" => Ok(Self::mn(n.unwrap_or(2), c)),
            "cp2#cp2" => Ok(Self::mn(n.unwrap_or(1), c)),
            other => match other.strip_prefix('m').map(str::parse::<u32>) {
                Some(Ok(n)) => Ok(Self::mn(n, c)),
                _ => Err(Error::InvalidSpec(format!("unknown manifold `{label}`"))),
            },
        }
    }

    pub fn with_length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }

    pub fn with_slopes(mut self, minus: f64, plus: f64) -> Self {
        if let End::Pole(p) = &mut self.minus {
            p.slope = minus;
        }
        if let End::Pole(p) = &mut self.plus {
            p.slope = plus;
        }
        self
    }

    pub fn end(&self, side: Side) -> &End {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    pub fn pole(&self, side: Side) -> Option<&Pole> {
        self.end(side).pole()
    }

    /// Smallest collapsing slope over both poles, if any pole exists.
    pub fn min_slope(&self) -> Option<f64> {
        [self.minus.pole(), self.plus.pole()]
            .into_iter()
            .flatten()
            .map(|p| p.slope)
            .reduce(f64::min)
    }

    /// Axes that do not collapse at either end.
    pub fn globally_noncollapsing(&self) -> Vec<usize> {
        (1..=3)
            .filter(|&j| {
                [self.minus.pole(), self.plus.pole()]
                    .into_iter()
                    .flatten()
                    .all(|p| p.collapse != j)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidSpec(format!("structure constant {} must be positive", self.c)));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidSpec(format!("length {} must be positive", self.length)));
        }
        for side in [Side::Minus, Side::Plus] {
            let Some(p) = self.pole(side) else { continue };
            if !(1..=3).contains(&p.collapse) {
                return Err(Error::InvalidSpec(format!(
                    "collapse index {} at the {} pole is not an axis",
                    p.collapse,
                    side.name()
                )));
            }
            if !(p.slope > 0.0 && p.slope.is_finite()) {
                return Err(Error::InvalidSpec(format!(
                    "slope {} at the {} pole must be positive",
                    p.slope,
                    side.name()
                )));
            }
            if p.reflection.apply(p.collapse) != p.collapse {
                return Err(Error::InvalidSpec(format!(
                    "reflection at the {} pole moves the collapsing axis",
                    side.name()
                )));
            }
            if !p.reflection.is_involution() {
                return Err(Error::InvalidSpec(format!(
                    "reflection at the {} pole is not an involution",
                    side.name()
                )));
            }
        }
        Ok(())
    }
}

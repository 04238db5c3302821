use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Cell-centred grid on `(0, L)`: `r_i = (i + ½)·h`, `h = L/N`. No node sits
/// on a pole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 6 {
            return Err(invalid("N", format!("need at least 6 nodes, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(invalid("L", format!("{length} must be positive")));
        }
        Ok(Grid { n, length })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn h(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.node(i))
    }

    /// Node closest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        let i = (r / self.h() - 0.5).round();
        (i.max(0.0) as usize).min(self.n - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staggered_nodes_are_interior() {
        let g = Grid::new(10, 2.0).unwrap();
        assert_eq!(g.h(), 0.2);
        assert!((g.node(0) - 0.1).abs() < 1e-15);
        assert!(g.node(9) < 2.0 && g.node(0) > 0.0);
        assert_eq!(g.nearest(1.0), 5);
        assert_eq!(g.nearest(-3.0), 0);
        assert_eq!(g.nodes().count(), 10);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(3, 1.0).is_err());
        assert!(Grid::new(10, 0.0).is_err());
    }
}

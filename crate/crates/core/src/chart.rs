//! Chart descriptions: which jet coordinates exist at a given order.

use crate::error::{Error, Result};
use crate::expr::Var;
use crate::multiindex::MultiIndex;
use crate::ratio::binomial_usize;

/// Which coordinate system a chart uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartSide {
    /// Velocity coordinates `x^A_I`, `A = 1..=N`, `|I| <= r`.
    Homogeneous,
    /// Grassmann coordinates `x^i`, `y^σ_I`, `σ = 1..=m`, `|I| <= r`.
    Adapted,
    /// The intermediate coordinates `(x^i, x^i_I, y^σ_I)` on the regular
    /// velocity manifold.
    Mixed,
}

/// A chart at a fixed base arity `n`, fibre arity `m` and jet order `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChartSpec {
    pub n: u16,
    pub m: u16,
    pub r: usize,
    pub side: ChartSide,
}

impl ChartSpec {
    pub fn homogeneous(n: u16, m: u16, r: usize) -> Self {
        ChartSpec { n, m, r, side: ChartSide::Homogeneous }
    }

    pub fn adapted(n: u16, m: u16, r: usize) -> Self {
        ChartSpec { n, m, r, side: ChartSide::Adapted }
    }

    pub fn mixed(n: u16, m: u16, r: usize) -> Self {
        ChartSpec { n, m, r, side: ChartSide::Mixed }
    }

    /// Total label count `N = n + m` of the velocity chart.
    pub fn big_n(&self) -> u16 {
        self.n + self.m
    }

    /// Same chart at a higher order.
    pub fn promoted(&self, extra: usize) -> ChartSpec {
        ChartSpec { r: self.r + extra, ..*self }
    }

    /// The full (finite) variable universe of the chart.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        match self.side {
            ChartSide::Homogeneous => {
                for a in 1..=self.big_n() {
                    for idx in MultiIndex::all(self.n, 0, self.r) {
                        out.push(Var::X { a, idx });
                    }
                }
            }
            ChartSide::Adapted => {
                for k in 1..=self.n {
                    out.push(Var::XBase { k });
                }
                for s in 1..=self.m {
                    for idx in MultiIndex::all(self.n, 0, self.r) {
                        out.push(Var::Y { s, idx });
                    }
                }
            }
            ChartSide::Mixed => {
                for k in 1..=self.n {
                    out.push(Var::XBase { k });
                }
                for a in 1..=self.n {
                    for idx in MultiIndex::all(self.n, 1, self.r) {
                        out.push(Var::X { a, idx });
                    }
                }
                for s in 1..=self.m {
                    for idx in MultiIndex::all(self.n, 0, self.r) {
                        out.push(Var::Y { s, idx });
                    }
                }
            }
        }
        out
    }

    /// Whether a variable belongs to this chart.
    pub fn contains(&self, v: &Var) -> bool {
        match (self.side, v) {
            (ChartSide::Homogeneous, Var::X { a, idx }) => {
                *a >= 1 && *a <= self.big_n() && idx.n() == self.n && idx.degree() <= self.r
            }
            (ChartSide::Adapted, Var::XBase { k }) => *k >= 1 && *k <= self.n,
            (ChartSide::Adapted, Var::Y { s, idx }) => {
                *s >= 1 && *s <= self.m && idx.n() == self.n && idx.degree() <= self.r
            }
            (ChartSide::Mixed, Var::XBase { k }) => *k >= 1 && *k <= self.n,
            (ChartSide::Mixed, Var::X { a, idx }) => {
                *a >= 1
                    && *a <= self.n
                    && idx.n() == self.n
                    && idx.degree() >= 1
                    && idx.degree() <= self.r
            }
            (ChartSide::Mixed, Var::Y { s, idx }) => {
                *s >= 1 && *s <= self.m && idx.n() == self.n && idx.degree() <= self.r
            }
            _ => false,
        }
    }

    /// Checks that every variable of an expression lies in the chart.
    pub fn admits(&self, e: &crate::expr::Expr) -> Result<()> {
        for v in e.vars() {
            // parameters and opaque symbols are chart-independent scalars
            if matches!(v, Var::Param(_) | Var::XiJet { .. }) {
                continue;
            }
            if !self.contains(&v) {
                return Err(Error::ShapeMismatch(format!(
                    "variable {v} does not belong to the chart {self:?}"
                )));
            }
        }
        Ok(())
    }

    /// Number of adapted coordinates: `m·C(n+r, n) + n`.
    pub fn adapted_coordinate_count(&self) -> usize {
        self.m as usize * binomial_usize(self.n as usize + self.r, self.n as usize)
            + self.n as usize
    }
}

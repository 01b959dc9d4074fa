//! Deterministic random sampling for the identity suites.
//!
//! A small splitmix64 generator keeps the suites reproducible across
//! platforms and independent of external RNG crates. Rationals are drawn
//! with small numerators and denominators so that exact arithmetic stays
//! fast; first-order blocks are resampled until their determinant has
//! absolute value at least 1/4, which keeps inverse-jet denominators
//! bounded.

use crate::chart::ChartSpec;
use crate::expr::{Expr, Var};
use crate::jetgroup::{GroupElement, VelocityJet};
use crate::multiindex::MultiIndex;
use crate::ratio::{rat, rat_int, well_conditioned, Rat};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct Sampler {
    state: u64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { state: seed.wrapping_add(0x9E3779B97F4A7C15) }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }

    /// A small rational in roughly `[-6, 6]` with denominator `1..=4`.
    pub fn rat(&mut self) -> Rat {
        rat(self.int_in(-24, 24), self.int_in(1, 4))
    }

    pub fn nonzero_rat(&mut self) -> Rat {
        loop {
            let v = self.rat();
            if (!v.is_integer() || v != rat_int(0))
                && v != rat_int(0) {
                    return v;
                }
        }
    }

    /// Group element with a well-conditioned first-order block.
    pub fn group_element(&mut self, n: u16, r: usize) -> GroupElement {
        loop {
            let entries: Vec<((u16, MultiIndex), Expr)> = (1..=n)
                .flat_map(|k| {
                    MultiIndex::all(n, 1, r)
                        .into_iter()
                        .map(move |idx| (k, idx))
                })
                .map(|(k, idx)| ((k, idx), Expr::from_rat(self.rat())))
                .collect();
            let g = GroupElement::new(n, r, entries).expect("valid shape");
            if let Some(d) = g.det().as_constant() {
                if well_conditioned(&d) {
                    return g;
                }
            }
        }
    }

    /// Unconstrained velocity jet.
    pub fn velocity_jet(&mut self, n: u16, big_n: u16, r: usize) -> VelocityJet {
        let mut jet = VelocityJet::zeroed(n, big_n, r);
        for a in 1..=big_n {
            for idx in MultiIndex::all(n, 0, r) {
                jet.set(a, idx, Expr::from_rat(self.rat()));
            }
        }
        jet
    }

    /// Velocity jet regular with respect to the split `(1..n)`, with a
    /// well-conditioned first-order block `x^i_j`.
    pub fn regular_velocity_jet(&mut self, n: u16, big_n: u16, r: usize) -> VelocityJet {
        loop {
            let jet = self.velocity_jet(n, big_n, r);
            let block: Vec<Vec<Expr>> = (1..=n)
                .map(|i| {
                    (1..=n)
                        .map(|j| jet.coeff(i, &MultiIndex::of(n, &[j])))
                        .collect()
                })
                .collect();
            if let Some(d) = crate::linalg::det(&block).as_constant() {
                if well_conditioned(&d) {
                    return jet;
                }
            }
        }
    }

    /// Random polynomial over the full variable universe of a chart.
    pub fn poly_on_chart(&mut self, chart: &ChartSpec, degree: usize, terms: usize) -> Expr {
        let vars = chart.variables();
        self.poly_in_vars(&vars, degree, terms)
    }

    pub fn poly_in_vars(&mut self, vars: &[Var], degree: usize, terms: usize) -> Expr {
        let mut acc = Expr::zero();
        for _ in 0..terms {
            let mut term = Expr::from_rat(self.nonzero_rat());
            let deg = self.int_in(0, degree as i64) as usize;
            for _ in 0..deg {
                let v = &vars[self.int_in(0, vars.len() as i64 - 1) as usize];
                term = &term * &Expr::var(v.clone());
            }
            acc = &acc + &term;
        }
        acc
    }

    /// Random quadratic in the base coordinates `x^1..x^N`.
    pub fn base_quadratic(&mut self, n: u16, big_n: u16) -> Expr {
        let vars: Vec<Var> = (1..=big_n)
            .map(|a| Var::X { a, idx: MultiIndex::empty(n) })
            .collect();
        self.poly_in_vars(&vars, 2, 4)
    }

    /// Random polynomial curve component in the parameters `t^1..t^n`.
    pub fn t_polynomial(&mut self, n: u16, degree: usize) -> Expr {
        let vars: Vec<Var> = (1..=n).map(|k| Var::T { k }).collect();
        self.poly_in_vars(&vars, degree, 4)
    }

    /// A reparametrization germ `α(t)` with `α(0) = 0` and `α'(0)` bounded
    /// away from zero (n = 1).
    pub fn t_reparametrization(&mut self, n: u16, degree: usize) -> Expr {
        assert_eq!(n, 1, "reparametrization sampler is one-dimensional");
        let t = Expr::var(Var::T { k: 1 });
        loop {
            let lin = self.rat();
            if !well_conditioned(&lin) {
                continue;
            }
            let mut acc = &t * &Expr::from_rat(lin);
            let mut p = t.clone();
            for _ in 2..=degree {
                p = &p * &t;
                acc = &acc + &(&p * &Expr::from_rat(self.rat()));
            }
            return acc;
        }
    }

    /// Full rational assignment for a set of variables.
    pub fn point_for(&mut self, vars: impl IntoIterator<Item = Var>) -> BTreeMap<Var, Rat> {
        vars.into_iter().map(|v| (v, self.rat())).collect()
    }
}

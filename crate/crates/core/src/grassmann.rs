//! Regular velocities, the complete invariant system `y^σ_I`, adapted
//! coordinates on the Grassmann bundle and chart transitions.
//!
//! For a velocity jet regular with respect to the split `(1..n)`, the first
//! `n` rows of jet coefficients form a group element `𝐱 ∈ L^r_n`; its group
//! inverse is `𝐳`. The reparametrization invariants are `y^σ_I = (x·𝐳)^σ_I`,
//! and they satisfy (and are cross-checked against) the recurrence
//! `y^σ_{iI} = z^j_i d_j y^σ_I`. Conversely `x^σ_I = (y·𝐱)^σ_I` reconstructs
//! the fibre rows from the invariants and the frame block.
//!
//! General splits are handled by pre-permuting velocity labels; all the code
//! below fixes the split to `(1,...,n)`.

use crate::error::{Error, Result};
use crate::expr::{formal_derivative_n, total_derivative, Expr, Var};
use crate::jetgroup::{GroupElement, VelocityJet};
use crate::linalg;
use crate::multiindex::MultiIndex;
use crate::ratio::Rat;
use std::collections::BTreeMap;

/// A point of the Grassmann bundle in adapted coordinates `(x^i, y^σ_I)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AdaptedPoint {
    n: u16,
    m: u16,
    r: usize,
    x: Vec<Expr>,
    y: BTreeMap<(u16, MultiIndex), Expr>,
}

impl AdaptedPoint {
    pub fn new(n: u16, m: u16, r: usize) -> Self {
        let mut y = BTreeMap::new();
        for s in 1..=m {
            for idx in MultiIndex::all(n, 0, r) {
                y.insert((s, idx), Expr::zero());
            }
        }
        AdaptedPoint { n, m, r, x: vec![Expr::zero(); n as usize], y }
    }

    pub fn n(&self) -> u16 {
        self.n
    }

    pub fn m(&self) -> u16 {
        self.m
    }

    pub fn order(&self) -> usize {
        self.r
    }

    pub fn x(&self, i: u16) -> Expr {
        self.x[(i - 1) as usize].clone()
    }

    pub fn set_x(&mut self, i: u16, e: Expr) {
        self.x[(i - 1) as usize] = e;
    }

    pub fn y(&self, s: u16, idx: &MultiIndex) -> Expr {
        self.y
            .get(&(s, idx.clone()))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    pub fn set_y(&mut self, s: u16, idx: MultiIndex, e: Expr) {
        self.y.insert((s, idx), e);
    }

    pub fn ys(&self) -> impl Iterator<Item = (&(u16, MultiIndex), &Expr)> {
        self.y.iter()
    }

    /// Total coordinate count `m·C(n+r, n) + n`.
    pub fn coordinate_count(&self) -> usize {
        self.y.len() + self.x.len()
    }

    /// Substitution map assigning adapted chart variables their values here.
    pub fn substitution(&self) -> BTreeMap<Var, Expr> {
        let mut map = BTreeMap::new();
        for (i, e) in self.x.iter().enumerate() {
            map.insert(Var::XBase { k: (i + 1) as u16 }, e.clone());
        }
        for ((s, idx), e) in &self.y {
            map.insert(Var::Y { s: *s, idx: idx.clone() }, e.clone());
        }
        map
    }

    /// Rational-point view; errors on symbolic entries.
    pub fn point(&self) -> Result<BTreeMap<Var, Rat>> {
        self.substitution()
            .into_iter()
            .map(|(v, e)| {
                let c = e
                    .as_constant()
                    .ok_or_else(|| Error::Unevaluable(format!("coordinate {v} is symbolic")))?;
                Ok((v, c))
            })
            .collect()
    }
}

/// Determinant of the first-order block `x^{i_k}_j` for a given split.
pub fn regularity_det(jet: &VelocityJet, split: &[u16]) -> Result<Expr> {
    let n = jet.n();
    if split.len() != n as usize {
        return Err(Error::ShapeMismatch(format!(
            "split of length {} on an n = {n} velocity",
            split.len()
        )));
    }
    let block: Vec<Vec<Expr>> = split
        .iter()
        .map(|&lbl| {
            (1..=n)
                .map(|j| jet.coeff(lbl, &MultiIndex::of(n, &[j])))
                .collect()
        })
        .collect();
    Ok(linalg::det(&block))
}

/// Whether the `n×n` first-order block selected by `split` is invertible;
/// for symbolic jets this asks that the determinant is not identically zero
/// (use [`regularity_det`] for the symbolic nonvanishing condition itself).
pub fn is_regular(jet: &VelocityJet, split: &[u16]) -> Result<bool> {
    Ok(!regularity_det(jet, split)?.is_zero())
}

/// The group element `𝐱 = (x^i_I)` formed by the first `n` rows of a jet.
pub fn x_element(jet: &VelocityJet) -> GroupElement {
    let n = jet.n();
    let mut g = GroupElement::zeroed(n, jet.order());
    for k in 1..=n {
        for idx in MultiIndex::all(n, 1, jet.order()) {
            g.set(k, idx.clone(), jet.coeff(k, &idx));
        }
    }
    g
}

/// The inverse `𝐳 = 𝐱^{-1}`; errors on non-regular jets.
pub fn z_element(jet: &VelocityJet) -> Result<GroupElement> {
    let det = regularity_det(jet, &(1..=jet.n()).collect::<Vec<_>>())?;
    if det.is_zero() {
        return Err(Error::NotRegular("first-order block is singular".into()));
    }
    x_element(jet).inverse()
}

/// The invariants of a regular jet: `y^σ = x^σ`, `y^σ_I = (x·𝐳)^σ_I`.
pub fn invariants(jet: &VelocityJet) -> Result<AdaptedPoint> {
    let n = jet.n();
    let m = jet.fibre_arity();
    let r = jet.order();
    let z = z_element(jet)?;
    let moved = jet.act(&z)?;
    let mut out = AdaptedPoint::new(n, m, r);
    for i in 1..=n {
        out.set_x(i, jet.coeff(i, &MultiIndex::empty(n)));
    }
    for s in 1..=m {
        for idx in MultiIndex::all(n, 0, r) {
            out.set_y(s, idx.clone(), moved.coeff(n + s, &idx));
        }
    }
    Ok(out)
}

/// Inverse of [`invariants`] for a fixed frame block: `x^σ_I = (y·𝐱)^σ_I`.
pub fn reconstruct(point: &AdaptedPoint, xblock: &GroupElement) -> Result<VelocityJet> {
    let n = point.n();
    let m = point.m();
    let r = point.order();
    if xblock.n() != n || xblock.order() != r {
        return Err(Error::ShapeMismatch(format!(
            "frame block L^{}_{} against adapted point of (n, r) = ({n}, {r})",
            xblock.order(),
            xblock.n()
        )));
    }
    // treat the invariants as a velocity over the fibre labels and act
    let mut yjet = VelocityJet::zeroed(n, m, r);
    for s in 1..=m {
        for idx in MultiIndex::all(n, 0, r) {
            yjet.set(s, idx.clone(), point.y(s, &idx));
        }
    }
    let moved = yjet.act(xblock)?;
    let mut out = VelocityJet::zeroed(n, n + m, r);
    for i in 1..=n {
        out.set(i, MultiIndex::empty(n), point.x(i));
        for idx in MultiIndex::all(n, 1, r) {
            out.set(i, idx.clone(), xblock.coeff(i, &idx));
        }
    }
    for s in 1..=m {
        for idx in MultiIndex::all(n, 0, r) {
            out.set(n + s, idx.clone(), moved.coeff(s, &idx));
        }
    }
    Ok(out)
}

/// The symbolic invariant table `y^σ_I` as rational expressions in the
/// velocity coordinates, built by the group action route; the defining
/// recurrence `y^σ_{iI} = z^j_i d_j y^σ_I` is available as a second route
/// for the consistency check.
pub struct InvariantTable {
    n: u16,
    m: u16,
    r: usize,
    exprs: BTreeMap<(u16, MultiIndex), Expr>,
}

impl InvariantTable {
    /// Builds the table by acting with `𝐳` on the symbolic jet.
    pub fn new(n: u16, m: u16, r: usize) -> Result<Self> {
        let jet = VelocityJet::symbolic(n, n + m, r);
        let adapted = invariants(&jet)?;
        let exprs = adapted.ys().map(|(k, e)| (k.clone(), e.clone())).collect();
        Ok(InvariantTable { n, m, r, exprs })
    }

    pub fn n(&self) -> u16 {
        self.n
    }

    pub fn m(&self) -> u16 {
        self.m
    }

    pub fn order(&self) -> usize {
        self.r
    }

    pub fn expr(&self, s: u16, idx: &MultiIndex) -> Expr {
        self.exprs
            .get(&(s, idx.clone()))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    /// The same table built by the recurrence `y^σ_{iI} = z^j_i d_j y^σ_I`
    /// with the first entry of the canonical index split off.
    pub fn by_recurrence(n: u16, m: u16, r: usize) -> Result<BTreeMap<(u16, MultiIndex), Expr>> {
        let jet = VelocityJet::symbolic(n, n + m, r);
        let z = z_element(&jet)?;
        let mut table: BTreeMap<(u16, MultiIndex), Expr> = BTreeMap::new();
        for s in 1..=m {
            table.insert(
                (s, MultiIndex::empty(n)),
                Expr::var(Var::X { a: n + s, idx: MultiIndex::empty(n) }),
            );
        }
        for deg in 1..=r {
            for idx in MultiIndex::of_degree(n, deg) {
                let i = idx.entries()[0];
                let rest = idx.remove_one(i).expect("nonempty");
                for s in 1..=m {
                    let prev = table[&(s, rest.clone())].clone();
                    let mut acc = Expr::zero();
                    for j in 1..=n {
                        let dj = formal_derivative_n(&prev, j, n)?;
                        acc = &acc + &(&z.coeff(j, &MultiIndex::of(n, &[i])) * &dj);
                    }
                    table.insert((s, idx.clone()), acc);
                }
            }
        }
        Ok(table)
    }

    /// Verifies that the action route and the recurrence route agree
    /// identically.
    pub fn consistency_check(&self) -> Result<()> {
        let rec = Self::by_recurrence(self.n, self.m, self.r)?;
        for (key, e) in &self.exprs {
            let other = &rec[key];
            if !e.equivalent(other) {
                return Err(Error::Inconsistent(format!(
                    "invariant y^{}_{:?}: action route differs from recurrence",
                    key.0, key.1
                )));
            }
        }
        Ok(())
    }

    /// Pullback along the quotient projection: substitutes the invariant
    /// expressions for the fibre variables and base coordinates for `x^i`,
    /// turning an adapted-chart function into a velocity-chart one.
    pub fn rho_pullback(&self, f: &Expr) -> Result<Expr> {
        let mut map: BTreeMap<Var, Expr> = BTreeMap::new();
        for i in 1..=self.n {
            map.insert(
                Var::XBase { k: i },
                Expr::var(Var::X { a: i, idx: MultiIndex::empty(self.n) }),
            );
        }
        for ((s, idx), e) in &self.exprs {
            map.insert(Var::Y { s: *s, idx: idx.clone() }, e.clone());
        }
        f.subst(&map)
    }
}

/// The normalized-frame substitution: `x^i_j -> δ^i_j`, higher frame rows to
/// zero, `x^{n+σ}_I -> y^σ_I`, `x^i -> x^i`. Applying it to a homogeneous
/// function evaluates it along the canonical section of the quotient.
pub fn section_substitution(n: u16, m: u16, r: usize) -> BTreeMap<Var, Expr> {
    let mut map = BTreeMap::new();
    for i in 1..=n {
        map.insert(
            Var::X { a: i, idx: MultiIndex::empty(n) },
            Expr::var(Var::XBase { k: i }),
        );
        for idx in MultiIndex::all(n, 1, r) {
            let val = if idx.degree() == 1 && idx.entries()[0] == i {
                Expr::one()
            } else {
                Expr::zero()
            };
            map.insert(Var::X { a: i, idx }, val);
        }
    }
    for s in 1..=m {
        for idx in MultiIndex::all(n, 0, r) {
            map.insert(
                Var::X { a: n + s, idx: idx.clone() },
                Expr::var(Var::Y { s, idx }),
            );
        }
    }
    map
}

/// Chart-transition data for an adapted chart map `(x̄, ȳ) = F(x, y)`.
#[derive(Clone, Debug)]
pub struct TransitionData {
    /// `Q^l_p = D_p x̄^l` (row `l`, column `p`).
    pub q: Vec<Vec<Expr>>,
    /// `P = Q^{-1}`.
    pub p: Vec<Vec<Expr>>,
    /// `𝒥 = det Q`.
    pub jac: Expr,
    /// `P^σ_ν = Δ_ν ȳ^σ - ȳ^σ_i Δ_ν x̄^i` (row `σ`, column `ν`).
    pub p_fib: Vec<Vec<Expr>>,
    /// The full table `ȳ^σ_I`, `|I| <= r`, as unbarred-chart expressions.
    ybar: BTreeMap<(u16, MultiIndex), Expr>,
    /// The barred base coordinates `x̄^i = F^i(x, y)`.
    xbar: Vec<Expr>,
    n: u16,
    m: u16,
    r: usize,
}

/// Builds the transition for a chart map whose components `F^i`, `F^σ`
/// depend on `(x^i, y^σ)` only, via the recurrence `ȳ^σ_{iI} = P^j_i D_j ȳ^σ_I`
/// seeded with `ȳ^σ = F^σ(x, y)`.
pub fn transition(
    f_base: &[Expr],
    f_fibre: &[Expr],
    n: u16,
    m: u16,
    r: usize,
) -> Result<TransitionData> {
    for f in f_base.iter().chain(f_fibre) {
        for v in f.vars() {
            match v {
                Var::XBase { .. } => {}
                Var::Y { ref idx, .. } if idx.is_empty() => {}
                other => {
                    return Err(Error::ShapeMismatch(format!(
                        "transition component depends on {other}; only (x^i, y^σ) allowed"
                    )))
                }
            }
        }
    }
    if f_base.len() != n as usize || f_fibre.len() != m as usize {
        return Err(Error::ShapeMismatch(
            "transition components must split as (n base, m fibre)".into(),
        ));
    }
    let q: Vec<Vec<Expr>> = (0..n as usize)
        .map(|l| {
            (1..=n)
                .map(|p| total_derivative(&f_base[l], p))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let jac = linalg::det(&q);
    if jac.is_zero() {
        return Err(Error::Singular(
            "transition matrix Q = (D_p x̄^l) is identically singular".into(),
        ));
    }
    let p = linalg::inverse(&q)?;
    let mut ybar: BTreeMap<(u16, MultiIndex), Expr> = BTreeMap::new();
    for s in 1..=m {
        ybar.insert((s, MultiIndex::empty(n)), f_fibre[(s - 1) as usize].clone());
    }
    for deg in 1..=r {
        for idx in MultiIndex::of_degree(n, deg) {
            let i = idx.entries()[0];
            let rest = idx.remove_one(i).expect("nonempty");
            for s in 1..=m {
                let prev = ybar[&(s, rest.clone())].clone();
                let mut acc = Expr::zero();
                for j in 1..=n {
                    let dj = total_derivative(&prev, j)?;
                    acc = &acc + &(&p[(j - 1) as usize][(i - 1) as usize] * &dj);
                }
                ybar.insert((s, idx.clone()), acc);
            }
        }
    }
    // P^σ_ν = Δ_ν ȳ^σ − ȳ^σ_i Δ_ν x̄^i
    let mut p_fib = vec![vec![Expr::zero(); m as usize]; m as usize];
    for s in 1..=m {
        for nu in 1..=m {
            let dnu = |f: &Expr| f.plain_partial(&Var::Y { s: nu, idx: MultiIndex::empty(n) });
            let mut v = dnu(&f_fibre[(s - 1) as usize]);
            for i in 1..=n {
                let ybar_i = &ybar[&(s, MultiIndex::of(n, &[i]))];
                v = &v - &(ybar_i * &dnu(&f_base[(i - 1) as usize]));
            }
            p_fib[(s - 1) as usize][(nu - 1) as usize] = v;
        }
    }
    Ok(TransitionData { q, p, jac, p_fib, ybar, xbar: f_base.to_vec(), n, m, r })
}

impl TransitionData {
    pub fn n(&self) -> u16 {
        self.n
    }

    pub fn m(&self) -> u16 {
        self.m
    }

    pub fn order(&self) -> usize {
        self.r
    }

    pub fn xbar(&self, i: u16) -> Expr {
        self.xbar[(i - 1) as usize].clone()
    }

    pub fn ybar(&self, s: u16, idx: &MultiIndex) -> Expr {
        self.ybar
            .get(&(s, idx.clone()))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    /// The substitution expressing barred adapted coordinates through
    /// unbarred ones.
    pub fn barred_substitution(&self) -> BTreeMap<Var, Expr> {
        let mut map = BTreeMap::new();
        for i in 1..=self.n {
            map.insert(Var::XBase { k: i }, self.xbar[(i - 1) as usize].clone());
        }
        for ((s, idx), e) in &self.ybar {
            map.insert(Var::Y { s: *s, idx: idx.clone() }, e.clone());
        }
        map
    }

    /// Pulls a barred-chart function back to the unbarred chart.
    pub fn pullback(&self, f_barred: &Expr) -> Result<Expr> {
        f_barred.subst(&self.barred_substitution())
    }
}

/// The swap chart `(x, y) -> (y, x)` for `n = m = 1`, the running two-chart
/// example of the covariance suites.
pub fn swap_chart(r: usize) -> Result<TransitionData> {
    let x = Expr::var(Var::XBase { k: 1 });
    let y = Expr::var(Var::Y { s: 1, idx: MultiIndex::empty(1) });
    transition(&[y], &[x], 1, 1, r)
}

/// The orbit solver behind the Weyl completeness statement: the unique
/// candidate `a = 𝐱^{-1}·𝐱̄` with `x·a = x̄` whenever the invariants agree.
pub fn orbit_element(jet: &VelocityJet, other: &VelocityJet) -> Result<GroupElement> {
    z_element(jet)?.compose(&x_element(other))
}

/// The separating functions `Φ^σ_I(x, x̄) = ((ȳ - y)·𝐱̄)^σ_I`; all zero iff
/// the two regular jets have the same invariants.
pub fn phi_criterion(jet: &VelocityJet, other: &VelocityJet) -> Result<Vec<Expr>> {
    let n = jet.n();
    let m = jet.fibre_arity();
    let r = jet.order();
    let y = invariants(jet)?;
    let ybar = invariants(other)?;
    let mut diff = VelocityJet::zeroed(n, m, r);
    for s in 1..=m {
        for idx in MultiIndex::all(n, 0, r) {
            diff.set(s, idx.clone(), &ybar.y(s, &idx) - &y.y(s, &idx));
        }
    }
    let moved = diff.act(&x_element(other))?;
    let mut out = Vec::new();
    for s in 1..=m {
        for idx in MultiIndex::all(n, 1, r) {
            out.push(moved.coeff(s, &idx));
        }
    }
    Ok(out)
}

/// Exactly checks `d̄_i = d_i` (formal derivatives commute with prolonged
/// chart maps) and `d_i(f∘ρ) = x^j_i (D_j f)∘ρ` by evaluation along the
/// prolonged immersion `γ`.
pub fn dd_relation_check(
    gamma: &[Expr],
    chart_map: &[Expr],
    n: u16,
    m: u16,
    r: usize,
    sampler: &mut crate::sample::Sampler,
    samples: usize,
) -> Result<bool> {
    use crate::chart::ChartSpec;
    let hom = ChartSpec::homogeneous(n, m, r);
    let table = crate::jetgroup::prolong_chart_map(chart_map, n, r + 1)?;
    let jet_subst: BTreeMap<Var, Expr> = table
        .iter()
        .map(|((a, idx), e)| (Var::X { a: *a, idx: idx.clone() }, e.clone()))
        .collect();
    let inv_table = InvariantTable::new(n, m, r + 1)?;
    for _ in 0..samples {
        // (dd): d_i(ḡ ∘ F^{r+1}) = (d̄_i ḡ) ∘ F^{r+1}
        let g = sampler.poly_on_chart(&hom, 2, 5);
        for i in 1..=n {
            let lhs = formal_derivative_n(&g.subst(&jet_subst)?, i, n)?;
            let rhs = formal_derivative_n(&g, i, n)?.subst(&jet_subst)?;
            if !exact_on_curve(&(&lhs - &rhs), gamma, n, r + 2, sampler)? {
                return Ok(false);
            }
        }
        // (dD): d_i(f∘ρ) = x^j_i (D_j f)∘ρ
        let adapted = ChartSpec::adapted(n, m, r);
        let f = sampler.poly_on_chart(&adapted, 2, 5);
        let f_rho = inv_table.rho_pullback(&f)?;
        for i in 1..=n {
            let lhs = formal_derivative_n(&f_rho, i, n)?;
            let mut rhs = Expr::zero();
            for j in 1..=n {
                let djf = total_derivative(&f, j)?;
                let pulled = inv_table.rho_pullback(&djf)?;
                let xji = Expr::var(Var::X { a: j, idx: MultiIndex::of(n, &[i]) });
                rhs = &rhs + &(&xji * &pulled);
            }
            if !exact_on_curve(&(&lhs - &rhs), gamma, n, r + 2, sampler)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Evaluates a homogeneous-chart expression along jets of `γ` at a few
/// rational base points; true when all values vanish. Points where some
/// denominator degenerates are skipped.
fn exact_on_curve(
    residual: &Expr,
    gamma: &[Expr],
    n: u16,
    order: usize,
    sampler: &mut crate::sample::Sampler,
) -> Result<bool> {
    for _ in 0..3 {
        let t0: Vec<Rat> = (0..n).map(|_| sampler.rat()).collect();
        let jet = crate::jetgroup::prolong_immersion(gamma, n, order, &t0)?;
        let point = jet.point()?;
        match residual.evaluate(&point) {
            Ok(v) => {
                if !num_traits::Zero::is_zero(&v) {
                    return Ok(false);
                }
            }
            Err(Error::DivisionByZero(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{rat, rat_int};
    use crate::sample::Sampler;

    fn worked_jet() -> VelocityJet {
        // (x¹_1, x¹_11, x²_1, x²_11) = (2, 4, 6, 10), the jet of
        // γ(t) = (2t + 2t², 6t + 5t²) at the origin
        VelocityJet::new(
            1,
            2,
            2,
            [
                ((1u16, MultiIndex::of(1, &[1])), Expr::from_int(2)),
                ((1u16, MultiIndex::of(1, &[1, 1])), Expr::from_int(4)),
                ((2u16, MultiIndex::of(1, &[1])), Expr::from_int(6)),
                ((2u16, MultiIndex::of(1, &[1, 1])), Expr::from_int(10)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn regularity_detection() {
        let mut jet = VelocityJet::zeroed(1, 2, 1);
        jet.set(1, MultiIndex::of(1, &[1]), Expr::zero());
        jet.set(2, MultiIndex::of(1, &[1]), Expr::one());
        assert!(!is_regular(&jet, &[1]).unwrap());
        assert!(is_regular(&jet, &[2]).unwrap());
        // graph jet x¹_1 = 1
        let mut graph = VelocityJet::zeroed(1, 2, 1);
        graph.set(1, MultiIndex::of(1, &[1]), Expr::one());
        assert!(is_regular(&graph, &[1]).unwrap());
        // symbolic jet: the determinant expression is the side artifact
        let sym = VelocityJet::symbolic(2, 3, 1);
        let det = regularity_det(&sym, &[1, 2]).unwrap();
        assert!(!det.is_zero());
    }

    #[test]
    fn z_element_worked_examples() {
        // scalar inverse at order 1
        let mut jet = VelocityJet::zeroed(1, 2, 1);
        jet.set(1, MultiIndex::of(1, &[1]), Expr::from_int(2));
        let z = z_element(&jet).unwrap();
        assert_eq!(z.coeff(1, &MultiIndex::of(1, &[1])), Expr::from_rat(rat(1, 2)));
        // order 2: group inverse of (2, 4) is (1/2, -1/2)
        let z = z_element(&worked_jet()).unwrap();
        assert_eq!(z.coeff(1, &MultiIndex::of(1, &[1])), Expr::from_rat(rat(1, 2)));
        assert_eq!(
            z.coeff(1, &MultiIndex::of(1, &[1, 1])),
            Expr::from_rat(rat(-1, 2))
        );
        // inverse law on random regular jets
        let mut s = Sampler::new(5);
        for _ in 0..5 {
            let jet = s.regular_velocity_jet(2, 3, 2);
            let z = z_element(&jet).unwrap();
            assert_eq!(
                x_element(&jet).compose(&z).unwrap(),
                GroupElement::identity(2, 2)
            );
        }
        // non-regular jets are rejected
        let mut bad = VelocityJet::zeroed(1, 2, 1);
        bad.set(2, MultiIndex::of(1, &[1]), Expr::one());
        assert!(matches!(z_element(&bad), Err(Error::NotRegular(_))));
    }

    #[test]
    fn z_recurrence_holds_symbolically() {
        // z^i_{j1..jk} = z^p_{j1} d_p z^i_{j2..jk} on the symbolic chart
        for (n, r) in [(1u16, 3usize), (2, 2)] {
            let jet = VelocityJet::symbolic(n, n + 1, r);
            let z = z_element(&jet).unwrap();
            for idx in MultiIndex::all(n, 2, r) {
                let j1 = idx.entries()[0];
                let rest = idx.remove_one(j1).unwrap();
                for i in 1..=n {
                    let mut rhs = Expr::zero();
                    for p in 1..=n {
                        let d = formal_derivative_n(&z.coeff(i, &rest), p, n).unwrap();
                        rhs = &rhs + &(&z.coeff(p, &MultiIndex::of(n, &[j1])) * &d);
                    }
                    let lhs = z.coeff(i, &idx);
                    assert!(
                        lhs.equivalent(&rhs),
                        "z recurrence fails at z^{i}_{idx:?} (n={n}, r={r})"
                    );
                }
            }
        }
    }

    #[test]
    fn invariants_worked_example() {
        // y_1 = 3, y_11 = -1/2 for the jet (2, 4, 6, 10)
        let y = invariants(&worked_jet()).unwrap();
        assert_eq!(y.y(1, &MultiIndex::of(1, &[1])), Expr::from_int(3));
        assert_eq!(y.y(1, &MultiIndex::of(1, &[1, 1])), Expr::from_rat(rat(-1, 2)));
    }

    #[test]
    fn invariance_under_the_action() {
        let mut s = Sampler::new(9);
        for (n, m, r) in [(1u16, 1u16, 2usize), (2, 1, 2), (1, 2, 3)] {
            for _ in 0..5 {
                let x = s.regular_velocity_jet(n, n + m, r);
                let a = s.group_element(n, r);
                let xa = x.act(&a).unwrap();
                assert_eq!(invariants(&x).unwrap(), invariants(&xa).unwrap());
            }
        }
    }

    #[test]
    fn reconstruct_round_trips() {
        // explicit inverse of the worked example
        let mut y = AdaptedPoint::new(1, 1, 2);
        y.set_y(1, MultiIndex::of(1, &[1]), Expr::from_int(3));
        y.set_y(1, MultiIndex::of(1, &[1, 1]), Expr::from_rat(rat(-1, 2)));
        let xblock = GroupElement::line(2, &[rat_int(2), rat_int(4)]).unwrap();
        let jet = reconstruct(&y, &xblock).unwrap();
        assert_eq!(jet.coeff(2, &MultiIndex::of(1, &[1])), Expr::from_int(6));
        assert_eq!(jet.coeff(2, &MultiIndex::of(1, &[1, 1])), Expr::from_int(10));
        // identity frame: x^σ_I = y^σ_I
        let e = GroupElement::identity(1, 2);
        let jet_e = reconstruct(&y, &e).unwrap();
        assert_eq!(jet_e.coeff(2, &MultiIndex::of(1, &[1])), Expr::from_int(3));
        assert_eq!(
            jet_e.coeff(2, &MultiIndex::of(1, &[1, 1])),
            Expr::from_rat(rat(-1, 2))
        );
        // section property on random regular jets
        let mut s = Sampler::new(21);
        for _ in 0..5 {
            let jet = s.regular_velocity_jet(2, 3, 2);
            let round = reconstruct(&invariants(&jet).unwrap(), &x_element(&jet)).unwrap();
            assert_eq!(round, jet);
        }
    }

    #[test]
    fn invariant_table_routes_agree() {
        for (n, m, r) in [(1u16, 1u16, 3usize), (2, 1, 2), (1, 2, 2)] {
            let table = InvariantTable::new(n, m, r).unwrap();
            table.consistency_check().unwrap();
        }
    }

    #[test]
    fn completeness_surrogate() {
        let mut s = Sampler::new(31);
        for _ in 0..5 {
            let x = s.regular_velocity_jet(2, 3, 2);
            let a = s.group_element(2, 2);
            let xp = x.act(&a).unwrap();
            let found = orbit_element(&x, &xp).unwrap();
            assert_eq!(x.act(&found).unwrap(), xp);
            // and the separating functions vanish
            for phi in phi_criterion(&x, &xp).unwrap() {
                assert!(phi.is_zero());
            }
        }
        // different invariants -> some Φ nonzero
        let x = s.regular_velocity_jet(1, 2, 2);
        let mut other = x.clone();
        other.set(
            2,
            MultiIndex::of(1, &[1]),
            &x.coeff(2, &MultiIndex::of(1, &[1])) + &Expr::one(),
        );
        let phis = phi_criterion(&x, &other).unwrap();
        assert!(phis.iter().any(|p| !p.is_zero()));
    }

    #[test]
    fn swap_chart_transition() {
        let t = swap_chart(2).unwrap();
        let y1 = Expr::var(Var::Y { s: 1, idx: MultiIndex::of(1, &[1]) });
        let y11 = Expr::var(Var::Y { s: 1, idx: MultiIndex::of(1, &[1, 1]) });
        // ȳ_1 = 1/y_1
        assert!(t
            .ybar(1, &MultiIndex::of(1, &[1]))
            .equivalent(&y1.recip().unwrap()));
        // ȳ_11 = -y_11/y_1³
        let expect = &(-&y11) / &y1.pow(3).unwrap();
        assert!(t.ybar(1, &MultiIndex::of(1, &[1, 1])).equivalent(&expect));
        // Q = 𝒥 = y_1
        assert!(t.jac.equivalent(&y1));
    }

    #[test]
    fn identity_transition() {
        let n = 2;
        let m = 1;
        let f_base: Vec<Expr> = (1..=n).map(|k| Expr::var(Var::XBase { k })).collect();
        let f_fib = vec![Expr::var(Var::Y { s: 1, idx: MultiIndex::empty(n) })];
        let t = transition(&f_base, &f_fib, n, m, 2).unwrap();
        assert!(t.jac.is_one());
        for idx in MultiIndex::all(n, 0, 2) {
            assert_eq!(t.ybar(1, &idx), Expr::var(Var::Y { s: 1, idx: idx.clone() }));
        }
    }

    #[test]
    fn second_order_transition_matches_closed_display() {
        // ȳ^σ_{i1 i2} = P^{j1}_{i1} P^{j2}_{i2} [D_{j1}D_{j2}ȳ^σ
        //               - P^m_l (D_{j1}D_{j2} x̄^l)(D_m ȳ^σ)]
        let mut s = Sampler::new(71);
        let n = 1u16;
        let m = 1u16;
        let mut done = 0;
        while done < 3 {
            let base_vars = [Var::XBase { k: 1 }, Var::Y { s: 1, idx: MultiIndex::empty(1) }];
            let fx = s.poly_in_vars(&base_vars, 2, 3);
            let fy = s.poly_in_vars(&base_vars, 2, 3);
            let t = match transition(std::slice::from_ref(&fx), std::slice::from_ref(&fy), n, m, 2) {
                Ok(t) => t,
                Err(Error::Singular(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            let d = |f: &Expr| total_derivative(f, 1).unwrap();
            let p11 = &t.p[0][0];
            let closed =
                &(p11 * p11) * &(&d(&d(&fy)) - &(&(p11 * &d(&d(&fx))) * &d(&fy)));
            assert!(t.ybar(1, &MultiIndex::of(1, &[1, 1])).equivalent(&closed));
            done += 1;
        }
    }

    #[test]
    fn q_identity_on_the_swap_chart() {
        // Q^l_p ∘ ρ = z^j_p x̄^l_j with x̄ the prolonged velocity chart map
        let t = swap_chart(1).unwrap();
        let n = 1;
        let m = 1;
        let f = vec![
            Expr::var(Var::X { a: 2, idx: MultiIndex::empty(1) }),
            Expr::var(Var::X { a: 1, idx: MultiIndex::empty(1) }),
        ];
        let table = crate::jetgroup::prolong_chart_map(&f, n, 1).unwrap();
        let inv = InvariantTable::new(n, m, 1).unwrap();
        let jet = VelocityJet::symbolic(n, 2, 1);
        let z = z_element(&jet).unwrap();
        let q_pulled = inv.rho_pullback(&t.q[0][0]).unwrap();
        let rhs =
            &z.coeff(1, &MultiIndex::of(1, &[1])) * &table[&(1u16, MultiIndex::of(1, &[1]))];
        assert!(q_pulled.equivalent(&rhs));
    }

    #[test]
    fn dd_relations_along_curves() {
        let mut s = Sampler::new(99);
        let t = Expr::var(Var::T { k: 1 });
        // a curve staying regular in both swap-chart factors
        let gamma = vec![
            &t + &(&(&t * &t) * &Expr::from_rat(rat(1, 8))),
            &(&t * &Expr::from_int(2)) + &(&(&t * &t) * &Expr::from_rat(rat(1, 4))),
        ];
        let f = vec![
            Expr::var(Var::X { a: 2, idx: MultiIndex::empty(1) }),
            Expr::var(Var::X { a: 1, idx: MultiIndex::empty(1) }),
        ];
        assert!(dd_relation_check(&gamma, &f, 1, 1, 2, &mut s, 2).unwrap());
    }

    #[test]
    fn transition_table_is_symmetric_in_the_recurrence_choice() {
        // ȳ^σ_{iI} = P^j_i D_j ȳ^σ_I must not depend on which entry of the
        // canonical index is split off
        let mut s = Sampler::new(137);
        let n = 2u16;
        let base_vars: Vec<Var> = vec![
            Var::XBase { k: 1 },
            Var::XBase { k: 2 },
            Var::Y { s: 1, idx: MultiIndex::empty(2) },
        ];
        let mut done = 0;
        while done < 2 {
            let f_base = vec![
                &Expr::var(base_vars[0].clone()) + &s.poly_in_vars(&base_vars, 2, 2),
                &Expr::var(base_vars[1].clone()) + &s.poly_in_vars(&base_vars, 2, 2),
            ];
            let f_fib = vec![s.poly_in_vars(&base_vars, 2, 3)];
            let t = match transition(&f_base, &f_fib, n, 1, 2) {
                Ok(t) => t,
                Err(_) => continue,
            };
            let idx12 = MultiIndex::of(n, &[1, 2]);
            // split i = 2, rest {1}
            let mut other = Expr::zero();
            for j in 1..=n {
                let dj = total_derivative(&t.ybar(1, &MultiIndex::of(n, &[1])), j).unwrap();
                other = &other + &(&t.p[(j - 1) as usize][1] * &dj);
            }
            assert!(t.ybar(1, &idx12).equivalent(&other));
            done += 1;
        }
    }

    #[test]
    fn symbolically_singular_transitions_are_rejected() {
        // x̄ constant makes Q = D x̄ identically zero
        let f_base = vec![Expr::one()];
        let f_fib = vec![Expr::var(Var::XBase { k: 1 })];
        assert!(matches!(
            transition(&f_base, &f_fib, 1, 1, 1),
            Err(Error::Singular(_))
        ));
        // components may only depend on (x, y)
        let bad = vec![Expr::var(Var::Y { s: 1, idx: MultiIndex::of(1, &[1]) })];
        let ok = vec![Expr::var(Var::XBase { k: 1 })];
        assert!(matches!(
            transition(&bad, &ok, 1, 1, 1),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn dd_relations_at_two_base_directions() {
        let mut s = Sampler::new(131);
        let t1 = Expr::var(Var::T { k: 1 });
        let t2 = Expr::var(Var::T { k: 2 });
        // immersion with a dominant identity block stays regular at small t
        let gamma = vec![
            &t1 + &(&(&t1 * &t2) * &Expr::from_rat(rat(1, 16))),
            &t2 + &(&(&t2 * &t2) * &Expr::from_rat(rat(1, 16))),
            &(&t1 * &t2) + &t1,
        ];
        // a curved chart map on X (invertibility is not needed for the
        // prolongation functoriality being checked)
        let b = |a: u16| Expr::var(Var::X { a, idx: MultiIndex::empty(2) });
        let f = vec![
            &b(1) + &(&b(3) * &b(3)),
            &b(2) - &b(1),
            &b(3) + &(&b(1) * &b(2)),
        ];
        assert!(dd_relation_check(&gamma, &f, 2, 1, 2, &mut s, 1).unwrap());
    }

    #[test]
    fn dimension_formula() {
        let pt = AdaptedPoint::new(2, 1, 2);
        assert_eq!(pt.coordinate_count(), 8);
    }
}

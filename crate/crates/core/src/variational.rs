//! Euler-Lagrange and Helmholtz-Sonin operators on both sides of the
//! quotient, homogeneity reduction, and the correspondence checks between
//! homogeneous and adapted objects.
//!
//! The Lie-Euler operators are
//!
//! `ℰ^I_A(f) = Σ_{|J| <= r-|I|} (-1)^{|J|} C(|I|+|J|, |I|) d_J ∂^{IJ}_A f`,
//!
//! with `d -> D`, `∂ -> Δ`, labels `A -> σ` on the adapted side; `I = ∅`
//! gives the Euler-Lagrange expressions, `|I| = r` the top case `∂^I_A`.
//! A homogeneous Lagrangian (`𝓛(x·a) = det(a)𝓛(x)`) reduces to its adapted
//! representative by evaluation along the normalized frame, and the
//! correspondence theorems relate the two sides through the inverse-frame
//! coefficients `z^j_I`; those partition sums live here too.

use crate::error::{Error, Result};
use crate::expr::{
    delta_adapted, formal_derivative_multi, opaque_component, partial_hom,
    total_derivative_multi, Expr, Var,
};
use crate::grassmann::{invariants, section_substitution, z_element, InvariantTable};
use crate::jetgroup::{GroupElement, VelocityJet};
use crate::multiindex::{partitions, symmetrized, MultiIndex, Sign};
use crate::ratio::{binomial, rat_int, Rat};
use crate::report::Report;
use crate::sample::Sampler;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Which side of the quotient an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Velocity chart: labels `A = 1..=N`, operators `d_i`, `∂^I_A`.
    Homogeneous,
    /// Grassmann chart: labels `σ = 1..=m`, operators `D_i`, `Δ^I_σ`.
    Adapted,
}

fn d_multi(side: Side, f: &Expr, idx: &MultiIndex, n: u16) -> Result<Expr> {
    match side {
        Side::Homogeneous => formal_derivative_multi(f, idx, n),
        Side::Adapted => total_derivative_multi(f, idx),
    }
}

fn wpartial(side: Side, f: &Expr, label: u16, idx: &MultiIndex) -> Expr {
    match side {
        Side::Homogeneous => partial_hom(f, label, idx),
        Side::Adapted => delta_adapted(f, label, idx),
    }
}

/// The Lie-Euler operator `ℰ^I_A(f)`; `|I| <= r` required. Collapsing the
/// implied ordered summation over `J` to canonical indices introduces the
/// orderings count of each `J`.
pub fn lie_euler(
    f: &Expr,
    label: u16,
    idx: &MultiIndex,
    r: usize,
    side: Side,
    n: u16,
) -> Result<Expr> {
    if idx.degree() > r {
        return Err(Error::OrderCap { needed: idx.degree(), cap: r });
    }
    let mut acc = Expr::zero();
    for j in MultiIndex::all(n, 0, r - idx.degree()) {
        let inner = wpartial(side, f, label, &idx.juxtapose(&j)?);
        if inner.is_zero() {
            continue;
        }
        let term = d_multi(side, &inner, &j, n)?;
        let coeff = binomial(idx.degree() + j.degree(), idx.degree())
            * rat_int(j.orderings() as i64)
            * if j.degree() % 2 == 0 { rat_int(1) } else { rat_int(-1) };
        acc = &acc + &(term * coeff);
    }
    Ok(acc)
}

/// Euler-Lagrange expression `ℰ_A = Σ (-1)^{|J|} d_J ∂^J_A f`: the `I = ∅`
/// Lie-Euler operator.
pub fn euler_lagrange_expr(f: &Expr, label: u16, r: usize, side: Side, n: u16) -> Result<Expr> {
    lie_euler(f, label, &MultiIndex::empty(n), r, side, n)
}

/// A Lagrangian on the velocity chart.
#[derive(Clone, Debug)]
pub struct HomLagrangian {
    pub expr: Expr,
    pub n: u16,
    pub m: u16,
    pub r: usize,
}

/// A Lagrangian on the adapted chart.
#[derive(Clone, Debug)]
pub struct AdaptedLagrangian {
    pub expr: Expr,
    pub n: u16,
    pub m: u16,
    pub r: usize,
}

/// A source equation `𝒯 = 𝒯_A dx^A` (velocity side, N components) or
/// `T = T_σ ω^σ ∧ θ_0` (adapted side, m components).
#[derive(Clone, Debug)]
pub struct SourceEquation {
    pub side: Side,
    pub n: u16,
    pub m: u16,
    /// Jet order of the components.
    pub order: usize,
    pub components: Vec<Expr>,
}

impl SourceEquation {
    pub fn adapted(components: Vec<Expr>, n: u16, m: u16, order: usize) -> Self {
        SourceEquation { side: Side::Adapted, n, m, order, components }
    }

    pub fn homogeneous(components: Vec<Expr>, n: u16, m: u16, order: usize) -> Self {
        SourceEquation { side: Side::Homogeneous, n, m, order, components }
    }

    fn labels(&self) -> u16 {
        match self.side {
            Side::Homogeneous => self.n + self.m,
            Side::Adapted => self.m,
        }
    }

    pub fn component(&self, label: u16) -> &Expr {
        &self.components[(label - 1) as usize]
    }
}

/// Euler-Lagrange expressions of an adapted Lagrangian, as a source
/// equation of order `<= 2r`.
pub fn euler_lagrange(lag: &AdaptedLagrangian) -> Result<SourceEquation> {
    let comps = (1..=lag.m)
        .map(|s| euler_lagrange_expr(&lag.expr, s, lag.r, Side::Adapted, lag.n))
        .collect::<Result<Vec<_>>>()?;
    Ok(SourceEquation::adapted(comps, lag.n, lag.m, 2 * lag.r))
}

/// Euler-Lagrange expressions of a velocity-chart Lagrangian.
pub fn euler_lagrange_hom(lag: &HomLagrangian) -> Result<SourceEquation> {
    let comps = (1..=lag.n + lag.m)
        .map(|a| euler_lagrange_expr(&lag.expr, a, lag.r, Side::Homogeneous, lag.n))
        .collect::<Result<Vec<_>>>()?;
    Ok(SourceEquation::homogeneous(comps, lag.n, lag.m, 2 * lag.r))
}

/// Integration by parts of a total differential operator with canonical
/// coefficient table `P^I_A`:
///
/// `Q^I_A = Σ_J (-1)^{|J|} C(|I|+|J|, |I|) (o(I)o(J)/o(IJ)) d_J P^{IJ}_A`
///
/// in canonical indices, where `o` counts index orderings. The defining
/// contract `P(ξ) = Σ_I d_I (ξ^A Q^I_A)` holds symbolically in the ξ-jets
/// (see [`ibp_residual`]) and determines `Q` uniquely; `Q^∅_A` is the Euler
/// operator of `P`.
pub fn integrate_by_parts(
    table: &BTreeMap<(u16, MultiIndex), Expr>,
    r: usize,
    n: u16,
    big_n: u16,
) -> Result<BTreeMap<(u16, MultiIndex), Expr>> {
    let mut out = BTreeMap::new();
    for a in 1..=big_n {
        for idx in MultiIndex::all(n, 0, r) {
            let mut acc = Expr::zero();
            for j in MultiIndex::all(n, 0, r - idx.degree()) {
                let ij = idx.juxtapose(&j)?;
                let Some(p) = table.get(&(a, ij.clone())) else {
                    continue;
                };
                if p.is_zero() {
                    continue;
                }
                let term = formal_derivative_multi(p, &j, n)?;
                let weight = rat_int((idx.orderings() * j.orderings()) as i64)
                    / rat_int(ij.orderings() as i64);
                let coeff = binomial(idx.degree() + j.degree(), idx.degree())
                    * weight
                    * if j.degree() % 2 == 0 { rat_int(1) } else { rat_int(-1) };
                acc = &acc + &(term * coeff);
            }
            out.insert((a, idx), acc);
        }
    }
    Ok(out)
}

/// Residual of the integration-by-parts identity
/// `Σ_I (d_I ξ^A) P^I_A - Σ_I d_I (ξ^A Q^I_A)` with opaque base-only ξ;
/// identically zero.
pub fn ibp_residual(
    table: &BTreeMap<(u16, MultiIndex), Expr>,
    q_table: &BTreeMap<(u16, MultiIndex), Expr>,
    r: usize,
    n: u16,
    big_n: u16,
) -> Result<Expr> {
    let mut lhs = Expr::zero();
    let mut rhs = Expr::zero();
    for a in 1..=big_n {
        let xi = opaque_component(0, a, big_n);
        for idx in MultiIndex::all(n, 0, r) {
            let d_xi = formal_derivative_multi(&xi, &idx, n)?;
            if let Some(p) = table.get(&(a, idx.clone())) {
                lhs = &lhs + &(&d_xi * p);
            }
            if let Some(q) = q_table.get(&(a, idx.clone())) {
                if !q.is_zero() {
                    rhs = &rhs + &formal_derivative_multi(&(&xi * q), &idx, n)?;
                }
            }
        }
    }
    Ok(&lhs - &rhs)
}

/// Residual of the product rule for Lie-Euler operators,
///
/// `ℰ^I_A(fg) - Σ_J (-1)^{|J|} C(|I|+|J|, |J|) [(d_J f) ℰ^{IJ}_A(g) +
///  (d_J g) ℰ^{IJ}_A(f)]`;
///
/// identically zero. (The alternating sign is required; without it the
/// two sides already disagree on `f = g = x^2_1`.)
pub fn product_rule_residual(
    f: &Expr,
    g: &Expr,
    label: u16,
    idx: &MultiIndex,
    r: usize,
    side: Side,
    n: u16,
) -> Result<Expr> {
    let lhs = lie_euler(&(f * g), label, idx, r, side, n)?;
    let mut rhs = Expr::zero();
    for j in MultiIndex::all(n, 0, r - idx.degree()) {
        let ij = idx.juxtapose(&j)?;
        let df = d_multi(side, f, &j, n)?;
        let dg = d_multi(side, g, &j, n)?;
        let ef = lie_euler(f, label, &ij, r, side, n)?;
        let eg = lie_euler(g, label, &ij, r, side, n)?;
        let coeff = binomial(idx.degree() + j.degree(), j.degree())
            * rat_int(j.orderings() as i64)
            * if j.degree() % 2 == 0 { rat_int(1) } else { rat_int(-1) };
        rhs = &rhs + &((&(&df * &eg) + &(&dg * &ef)) * coeff);
    }
    Ok(&lhs - &rhs)
}

/// Whether `𝓛(x·a) = det(a^i_j) 𝓛(x)` for the fully symbolic group element.
pub fn is_homogeneous(lag: &Expr, n: u16, m: u16, r: usize) -> Result<bool> {
    let x = VelocityJet::symbolic(n, n + m, r);
    let a = GroupElement::symbolic(n, r);
    let moved = x.act(&a)?;
    let lhs = lag.subst(&moved.substitution())?;
    let rhs = &a.det() * lag;
    Ok(lhs.equivalent(&rhs))
}

/// Reduction of a homogeneous Lagrangian to its adapted representative:
/// evaluation along the normalized frame (`x^i_j = δ`, higher frame rows
/// zero, fibre rows replaced by the invariants).
pub fn reduce(lag: &HomLagrangian) -> Result<AdaptedLagrangian> {
    if !is_homogeneous(&lag.expr, lag.n, lag.m, lag.r)? {
        return Err(Error::NotHomogeneous);
    }
    let expr = lag
        .expr
        .subst(&section_substitution(lag.n, lag.m, lag.r))?;
    Ok(AdaptedLagrangian { expr, n: lag.n, m: lag.m, r: lag.r })
}

/// The converse of [`reduce`]: `𝓛 = det(𝐱) L∘ρ`, always homogeneous.
pub fn homogenize(lag: &AdaptedLagrangian) -> Result<HomLagrangian> {
    let table = InvariantTable::new(lag.n, lag.m, lag.r)?;
    let jet = VelocityJet::symbolic(lag.n, lag.n + lag.m, lag.r);
    let det = crate::grassmann::regularity_det(&jet, &(1..=lag.n).collect::<Vec<_>>())?;
    let expr = &det * &table.rho_pullback(&lag.expr)?;
    Ok(HomLagrangian { expr, n: lag.n, m: lag.m, r: lag.r })
}

/// Helmholtz-Sonin expressions `𝓗^J_{AB} = ∂^J_B 𝒯_A - (-1)^{|J|} ℰ^J_A(𝒯_B)`
/// (or the `Δ/D`-analogue on the adapted side), stored at canonical `J`.
#[derive(Clone, Debug)]
pub struct HelmholtzTensor {
    pub side: Side,
    pub n: u16,
    pub m: u16,
    pub order: usize,
    pub components: BTreeMap<(u16, u16, MultiIndex), Expr>,
}

impl HelmholtzTensor {
    pub fn component(&self, a: u16, b: u16, idx: &MultiIndex) -> Expr {
        self.components
            .get(&(a, b, idx.clone()))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(|e| e.is_zero())
    }

    /// The nonzero terms of the 2-form `Σ 𝓗^J_{AB} dx^B_J ∧ dx^A`, rendered
    /// as `(coefficient, covector description)` pairs.
    pub fn two_form_terms(&self) -> Vec<(String, Expr)> {
        self.components
            .iter()
            .filter(|(_, e)| !e.is_zero())
            .map(|((a, b, idx), e)| {
                let base = match self.side {
                    Side::Homogeneous => ("X", "X"),
                    Side::Adapted => ("y", "y"),
                };
                let digits: String = idx.entries().iter().map(|d| d.to_string()).collect();
                let sub = if digits.is_empty() { String::new() } else { format!("_{digits}") };
                (format!("d{}{b}{sub} ^ d{}{a}", base.0, base.1), e.clone())
            })
            .collect()
    }
}

/// Builds the Helmholtz-Sonin tensor of a source equation.
pub fn helmholtz(eq: &SourceEquation) -> Result<HelmholtzTensor> {
    let s = eq.order;
    let n = eq.n;
    let mut components = BTreeMap::new();
    for a in 1..=eq.labels() {
        for b in 1..=eq.labels() {
            for idx in MultiIndex::all(n, 0, s) {
                let first = wpartial(eq.side, eq.component(a), b, &idx);
                let second = lie_euler(eq.component(b), a, &idx, s, eq.side, n)?;
                let sign = if idx.degree() % 2 == 0 { rat_int(1) } else { rat_int(-1) };
                let value = &first - &(second * sign);
                components.insert((a, b, idx), value);
            }
        }
    }
    Ok(HelmholtzTensor { side: eq.side, n, m: eq.m, order: s, components })
}

/// A source equation is locally variational iff every Helmholtz-Sonin
/// expression vanishes identically.
pub fn is_locally_variational(eq: &SourceEquation) -> Result<bool> {
    Ok(helmholtz(eq)?.is_zero())
}

/// Builds the homogeneous differential equation of an adapted one:
/// `𝒯_σ = det(𝐱) T_σ∘ρ`, `𝒯_i = -det(𝐱) y^σ_i T_σ∘ρ`.
pub fn homogenize_equation(eq: &SourceEquation) -> Result<SourceEquation> {
    if eq.side != Side::Adapted {
        return Err(Error::ShapeMismatch("expected an adapted equation".into()));
    }
    let (n, m, s) = (eq.n, eq.m, eq.order);
    let table = InvariantTable::new(n, m, s)?;
    let jet = VelocityJet::symbolic(n, n + m, s);
    let det = crate::grassmann::regularity_det(&jet, &(1..=n).collect::<Vec<_>>())?;
    let pulled: Vec<Expr> = eq
        .components
        .iter()
        .map(|t| table.rho_pullback(t))
        .collect::<Result<Vec<_>>>()?;
    let mut comps = Vec::new();
    for i in 1..=n {
        let mut acc = Expr::zero();
        for s_lbl in 1..=m {
            let y_i = table.expr(s_lbl, &MultiIndex::of(n, &[i]));
            acc = &acc + &(&y_i * &pulled[(s_lbl - 1) as usize]);
        }
        comps.push(&(-&det) * &acc);
    }
    for s_lbl in 1..=m {
        comps.push(&det * &pulled[(s_lbl - 1) as usize]);
    }
    Ok(SourceEquation::homogeneous(comps, n, m, s))
}

/// Extracts the adapted equation from a homogeneous one, after verifying
/// both homogeneity conditions: det-scaling under the symbolic group action
/// and `Σ_A 𝒯_A x^A_j = 0`. The frame components are cross-checked against
/// `𝒯_i = -det(𝐱) y^σ_i T_σ∘ρ`.
pub fn hom_equation_reduce(eq: &SourceEquation) -> Result<SourceEquation> {
    if eq.side != Side::Homogeneous {
        return Err(Error::ShapeMismatch("expected a homogeneous equation".into()));
    }
    let (n, m, s) = (eq.n, eq.m, eq.order);
    for t in &eq.components {
        if !is_homogeneous(t, n, m, s)? {
            return Err(Error::NotHomogeneousEquation(
                "component fails det-scaling".into(),
            ));
        }
    }
    for j in 1..=n {
        let mut acc = Expr::zero();
        for a in 1..=n + m {
            let xaj = Expr::var(Var::X { a, idx: MultiIndex::of(n, &[j]) });
            acc = &acc + &(&xaj * eq.component(a));
        }
        if !acc.is_zero() {
            return Err(Error::NotHomogeneousEquation(format!(
                "Σ_A 𝒯_A x^A_{j} does not vanish"
            )));
        }
    }
    let section = section_substitution(n, m, s);
    let comps: Vec<Expr> = (1..=m)
        .map(|s_lbl| eq.component(n + s_lbl).subst(&section))
        .collect::<Result<Vec<_>>>()?;
    // cross-check the frame components
    let rebuilt = homogenize_equation(&SourceEquation::adapted(comps.clone(), n, m, s))?;
    for i in 1..=n {
        if !rebuilt.component(i).equivalent(eq.component(i)) {
            return Err(Error::Inconsistent(format!(
                "𝒯_{i} does not match -det(𝐱) y^σ_{i} T_σ∘ρ"
            )));
        }
    }
    Ok(SourceEquation::adapted(comps, n, m, s))
}

// ---------------------------------------------------------------------------
// partition sums with inverse-frame coefficients
// ---------------------------------------------------------------------------

/// `Σ_{(I_1..I_k)} S⁺_{tuple} z^{j_1}_{I_1} ··· z^{j_k}_{I_k}` over the
/// unordered partitions of `idx` into exactly `k` nonempty blocks.
pub fn z_partition_sum(z: &GroupElement, tuple: &[u16], idx: &MultiIndex) -> Expr {
    let k = tuple.len();
    let mut acc = Expr::zero();
    for part in partitions(idx) {
        if part.block_count() != k {
            continue;
        }
        let blocks = part.block_indices(idx);
        let sym: Expr = symmetrized(Sign::Plus, tuple, |perm: &[u16]| {
            let mut term = Expr::one();
            for (block, &j) in blocks.iter().zip(perm) {
                term = &term * &z.coeff(j, block);
                if term.is_zero() {
                    break;
                }
            }
            term
        });
        acc = &acc + &sym;
    }
    acc
}

/// Like [`z_partition_sum`] but with a distinguished, possibly empty rest
/// block `I_0`; calls `body(I_0, z-product)` for every split.
pub fn z_partition_sum_with_rest(
    z: &GroupElement,
    tuple: &[u16],
    idx: &MultiIndex,
    mut body: impl FnMut(&MultiIndex, &Expr),
) {
    let k = tuple.len();
    let deg = idx.degree();
    let n = idx.n();
    // choose the positions of I_0 as a bitmask, partition the complement
    for mask in 0..(1u32 << deg) {
        let mut rest_entries = Vec::new();
        let mut live_entries = Vec::new();
        for (pos, &e) in idx.entries().iter().enumerate() {
            if mask & (1 << pos) != 0 {
                rest_entries.push(e);
            } else {
                live_entries.push(e);
            }
        }
        if live_entries.len() < k {
            continue;
        }
        let rest = MultiIndex::of(n, &rest_entries);
        let live = MultiIndex::of(n, &live_entries);
        let sum = z_partition_sum(z, tuple, &live);
        if !sum.is_zero() {
            body(&rest, &sum);
        }
    }
}

// ---------------------------------------------------------------------------
// numeric sampling of both sides of the quotient
// ---------------------------------------------------------------------------

fn mark(fails: &mut BTreeMap<&'static str, (usize, usize)>, key: &'static str, sample: usize) {
    fails.entry(key).or_insert((0, sample)).0 += 1;
}

/// One random regular jet with every view the correspondence checks need.
pub struct HomSample {
    pub jet: VelocityJet,
    pub hom_point: BTreeMap<Var, Rat>,
    pub adapted_point: BTreeMap<Var, Rat>,
    pub z: GroupElement,
    pub det: Rat,
}

/// Draws a regular jet of the given order and assembles the sample views.
pub fn hom_sample(n: u16, m: u16, order: usize, sampler: &mut Sampler) -> Result<HomSample> {
    let jet = sampler.regular_velocity_jet(n, n + m, order);
    let hom_point = jet.point()?;
    let adapted = invariants(&jet)?;
    let adapted_point = adapted.point()?;
    let z = z_element(&jet)?;
    let det = crate::grassmann::regularity_det(&jet, &(1..=n).collect::<Vec<_>>())?
        .as_constant()
        .expect("numeric jet");
    Ok(HomSample { jet, hom_point, adapted_point, z, det })
}

fn z_num(sample: &HomSample, j: u16, idx: &MultiIndex) -> Rat {
    sample
        .z
        .coeff(j, idx)
        .as_constant()
        .expect("numeric inverse frame")
}

fn y_num(sample: &HomSample, s: u16, idx: &MultiIndex) -> Rat {
    sample.adapted_point[&Var::Y { s, idx: idx.clone() }].clone()
}

/// `Σ_{(I_1..I_k)} S⁺ z...z` evaluated at a numeric sample.
fn z_partition_sum_num(sample: &HomSample, tuple: &[u16], idx: &MultiIndex) -> Rat {
    let k = tuple.len();
    let mut acc = Rat::zero();
    for part in partitions(idx) {
        if part.block_count() != k {
            continue;
        }
        let blocks = part.block_indices(idx);
        let sym: Rat = symmetrized(Sign::Plus, tuple, |perm: &[u16]| {
            let mut term = rat_int(1);
            for (block, &j) in blocks.iter().zip(perm) {
                term *= z_num(sample, j, block);
            }
            term
        });
        acc += sym;
    }
    acc
}

// ---------------------------------------------------------------------------
// the homogeneous correspondence checks
// ---------------------------------------------------------------------------

/// Exactly evaluates the correspondence between the Lie-Euler expressions of
/// a homogeneous Lagrangian and those of its adapted reduction at random
/// regular jets; also checks the det-scaling of `ℰ_A(𝓛)` and the vanishing
/// of the pulled-back Euler-Lagrange form along immersions.
pub fn hom_correspondence_check(
    lag: &HomLagrangian,
    sampler: &mut Sampler,
    samples: usize,
) -> Result<Report> {
    let (n, m, r) = (lag.n, lag.m, lag.r);
    let big_n = n + m;
    let reduced = reduce(lag)?;
    let mut report = Report::new();

    // adapted Lie-Euler tables E^I_σ(L) and the homogeneous ones
    let mut adapted_table: BTreeMap<(u16, MultiIndex), Expr> = BTreeMap::new();
    for s in 1..=m {
        for idx in MultiIndex::all(n, 0, r) {
            adapted_table.insert(
                (s, idx.clone()),
                lie_euler(&reduced.expr, s, &idx, r, Side::Adapted, n)?,
            );
        }
    }
    let mut hom_table: BTreeMap<(u16, MultiIndex), Expr> = BTreeMap::new();
    for a in 1..=big_n {
        for idx in MultiIndex::all(n, 0, r) {
            hom_table.insert(
                (a, idx.clone()),
                lie_euler(&lag.expr, a, &idx, r, Side::Homogeneous, n)?,
            );
        }
    }

    let eval_adapted = |sample: &HomSample, s: u16, idx: &MultiIndex| -> Result<Rat> {
        adapted_table[&(s, idx.clone())].evaluate(&sample.adapted_point)
    };

    let mut fails: BTreeMap<&'static str, (usize, usize)> = BTreeMap::new();
    let names = ["e1", "e2", "e3", "e4", "e5"];
    for sample_idx in 0..samples {
        let sample = hom_sample(n, m, 2 * r, sampler)?;
        // (e1): ℰ_σ(𝓛) = det(𝐱) E_σ(L)∘ρ
        for s in 1..=m {
            let lhs = hom_table[&(n + s, MultiIndex::empty(n))].evaluate(&sample.hom_point)?;
            let rhs = &sample.det * &eval_adapted(&sample, s, &MultiIndex::empty(n))?;
            if lhs != rhs {
                mark(&mut fails, "e1", sample_idx);
            }
        }
        // (e3): ℰ_p(𝓛) = -det(𝐱) y^σ_p E_σ(L)∘ρ
        for p in 1..=n {
            let lhs = hom_table[&(p, MultiIndex::empty(n))].evaluate(&sample.hom_point)?;
            let mut rhs = Rat::zero();
            for s in 1..=m {
                rhs += y_num(&sample, s, &MultiIndex::of(n, &[p]))
                    * eval_adapted(&sample, s, &MultiIndex::empty(n))?;
            }
            rhs = -&sample.det * rhs;
            if lhs != rhs {
                mark(&mut fails, "e3", sample_idx);
            }
        }
        // (e2): ℰ^{j..}_σ(𝓛) = (-1)^k det(𝐱) Σ_{|I| >= k} (-1)^{|I|}
        //        Σ_{(I_1..I_k)} S⁺ z..z E^I_σ(L)∘ρ, k >= 1
        for k in 1..=r {
            for tuple_idx in MultiIndex::of_degree(n, k) {
                let tuple = tuple_idx.entries().to_vec();
                for s in 1..=m {
                    let lhs =
                        hom_table[&(n + s, tuple_idx.clone())].evaluate(&sample.hom_point)?;
                    let mut rhs = Rat::zero();
                    for i_idx in MultiIndex::all(n, k, r) {
                        let zsum = z_partition_sum_num(&sample, &tuple, &i_idx);
                        if zsum.is_zero() {
                            continue;
                        }
                        let sign = if i_idx.degree() % 2 == 0 { rat_int(1) } else { rat_int(-1) };
                        // the implied summation over I runs over ordered
                        // tuples: canonical indices carry their orderings
                        rhs += sign
                            * rat_int(i_idx.orderings() as i64)
                            * zsum
                            * eval_adapted(&sample, s, &i_idx)?;
                    }
                    let ksign = if k % 2 == 0 { rat_int(1) } else { rat_int(-1) };
                    rhs = ksign * &sample.det * rhs;
                    if lhs != rhs {
                        mark(&mut fails, "e2", sample_idx);
                    }
                }
            }
        }
        // (e4), k = 1 frame labels: ℰ^j_p(𝓛) = det(𝐱)[z^j_p L +
        //        y^σ_p Σ_{1<=|I|<=r} (-1)^{|I|} z^j_I E^I_σ(L)]∘ρ
        let l_val = reduced.expr.evaluate(&sample.adapted_point)?;
        for p in 1..=n {
            for j in 1..=n {
                let lhs =
                    hom_table[&(p, MultiIndex::of(n, &[j]))].evaluate(&sample.hom_point)?;
                let mut inner = Rat::zero();
                for s in 1..=m {
                    let mut acc = Rat::zero();
                    for i_idx in MultiIndex::all(n, 1, r) {
                        let sign = if i_idx.degree() % 2 == 0 { rat_int(1) } else { rat_int(-1) };
                        acc += sign
                            * rat_int(i_idx.orderings() as i64)
                            * z_num(&sample, j, &i_idx)
                            * eval_adapted(&sample, s, &i_idx)?;
                    }
                    inner += y_num(&sample, s, &MultiIndex::of(n, &[p])) * acc;
                }
                let rhs = &sample.det
                    * (z_num(&sample, j, &MultiIndex::of(n, &[p])) * &l_val + inner);
                if lhs != rhs {
                    mark(&mut fails, "e4", sample_idx);
                }
            }
        }
        // (e5), k >= 2 frame labels
        for k in 2..=r {
            for tuple_idx in MultiIndex::of_degree(n, k) {
                let tuple = tuple_idx.entries().to_vec();
                for p in 1..=n {
                    let lhs = hom_table[&(p, tuple_idx.clone())].evaluate(&sample.hom_point)?;
                    let mut rhs = Rat::zero();
                    for s in 1..=m {
                        let mut acc = Rat::zero();
                        for i_idx in MultiIndex::all(n, k, r) {
                            let zsum = z_partition_sum_num(&sample, &tuple, &i_idx);
                            if zsum.is_zero() {
                                continue;
                            }
                            let sign =
                                if i_idx.degree() % 2 == 0 { rat_int(1) } else { rat_int(-1) };
                            acc += sign
                                * rat_int(i_idx.orderings() as i64)
                                * zsum
                                * eval_adapted(&sample, s, &i_idx)?;
                        }
                        rhs += y_num(&sample, s, &MultiIndex::of(n, &[p])) * acc;
                    }
                    let ksign = if (k + 1) % 2 == 0 { rat_int(1) } else { rat_int(-1) };
                    rhs = ksign * &sample.det * rhs;
                    if lhs != rhs {
                        mark(&mut fails, "e5", sample_idx);
                    }
                }
            }
        }
    }
    for name in names {
        match fails.get(name) {
            None => report.check(format!("hom-correspondence {name}"), true, String::new()),
            Some((count, first)) => report.check(
                format!("hom-correspondence {name}"),
                false,
                format!("{count} sample failures, first at sample {first}"),
            ),
        }
    }

    // det-scaling of the Euler-Lagrange expressions at order 2r
    {
        let mut bad = 0;
        for _ in 0..samples.min(20) {
            let sample = hom_sample(n, m, 2 * r, sampler)?;
            let a = sampler.group_element(n, 2 * r);
            let moved = sample.jet.act(&a)?;
            let moved_point = moved.point()?;
            let det_a = a.det().as_constant().expect("numeric");
            for lbl in 1..=big_n {
                let lhs = hom_table[&(lbl, MultiIndex::empty(n))].evaluate(&moved_point)?;
                let rhs = &det_a
                    * &hom_table[&(lbl, MultiIndex::empty(n))].evaluate(&sample.hom_point)?;
                if lhs != rhs {
                    bad += 1;
                }
            }
        }
        report.check(
            "hom-correspondence det-scaling of ℰ_A",
            bad == 0,
            if bad == 0 { String::new() } else { format!("{bad} failures") },
        );
    }

    // (j^s γ)* ℰ(𝓛) = 0: Σ_A ℰ_A x^A_j vanishes along prolonged immersions
    {
        let mut bad = 0;
        for _ in 0..samples.min(20) {
            let gamma: Vec<Expr> = (0..big_n).map(|_| sampler.t_polynomial(n, 2)).collect();
            let t0: Vec<Rat> = (0..n).map(|_| sampler.rat()).collect();
            let jet = crate::jetgroup::prolong_immersion(&gamma, n, 2 * r, &t0)?;
            let point = match jet.point() {
                Ok(p) => p,
                Err(_) => continue,
            };
            for j in 1..=n {
                let mut acc = Rat::zero();
                let mut defined = true;
                for a in 1..=big_n {
                    let e_a = match hom_table[&(a, MultiIndex::empty(n))].evaluate(&point) {
                        Ok(v) => v,
                        Err(Error::DivisionByZero(_)) => {
                            defined = false;
                            break;
                        }
                        Err(e) => return Err(e),
                    };
                    acc += e_a * &point[&Var::X { a, idx: MultiIndex::of(n, &[j]) }];
                }
                if defined && !acc.is_zero() {
                    bad += 1;
                }
            }
        }
        report.check(
            "hom-correspondence pullback of ℰ(𝓛) along immersions",
            bad == 0,
            if bad == 0 { String::new() } else { format!("{bad} failures") },
        );
    }
    Ok(report)
}

/// Exactly evaluates the Helmholtz-Sonin correspondence (the eight relations
/// between `𝓗^J_{AB}(𝒯)` and `H^I_{σν}(T)`) for the homogeneous equation
/// built from an adapted one, plus the variationality equivalence.
pub fn hom_helmholtz_correspondence_check(
    adapted_eq: &SourceEquation,
    sampler: &mut Sampler,
    samples: usize,
) -> Result<Report> {
    let (n, m, s) = (adapted_eq.n, adapted_eq.m, adapted_eq.order);
    let hom_eq = homogenize_equation(adapted_eq)?;
    let hom_h = helmholtz(&hom_eq)?;
    let adapted_h = helmholtz(adapted_eq)?;
    let mut report = Report::new();

    let mut fails: BTreeMap<&'static str, (usize, usize)> = BTreeMap::new();
    let names = ["hs1", "hs2", "hs3", "hs4", "hs5", "hs6", "hs7", "hs8"];
    for sample_idx in 0..samples {
        let sample = hom_sample(n, m, 2 * s, sampler)?;
        let eval_h = |s1: u16, s2: u16, idx: &MultiIndex| -> Result<Rat> {
            adapted_h
                .component(s1, s2, idx)
                .evaluate(&sample.adapted_point)
        };
        // (hs1) and (hs2)
        for sg in 1..=m {
            for nu in 1..=m {
                let lhs =
                    hom_h.component(n + sg, n + nu, &MultiIndex::empty(n)).evaluate(&sample.hom_point)?;
                let rhs = &sample.det * &eval_h(sg, nu, &MultiIndex::empty(n))?;
                if lhs != rhs {
                    mark(&mut fails, "hs1", sample_idx);
                }
                for k in 1..=s.min(2) {
                    for tuple_idx in MultiIndex::of_degree(n, k) {
                        let tuple = tuple_idx.entries().to_vec();
                        let lhs = hom_h
                            .component(n + sg, n + nu, &tuple_idx)
                            .evaluate(&sample.hom_point)?;
                        let mut rhs = Rat::zero();
                        for i_idx in MultiIndex::all(n, k, s) {
                            let zsum = z_partition_sum_num(&sample, &tuple, &i_idx);
                            if zsum.is_zero() {
                                continue;
                            }
                            rhs += rat_int(i_idx.orderings() as i64)
                                * zsum
                                * eval_h(sg, nu, &i_idx)?;
                        }
                        rhs = &sample.det * rhs;
                        if lhs != rhs {
                            mark(&mut fails, "hs2", sample_idx);
                        }
                    }
                }
            }
        }
        // (hs3) and (hs4)
        for sg in 1..=m {
            for p in 1..=n {
                let lhs =
                    hom_h.component(n + sg, p, &MultiIndex::empty(n)).evaluate(&sample.hom_point)?;
                let mut rhs = Rat::zero();
                for nu in 1..=m {
                    for i0 in MultiIndex::all(n, 0, s) {
                        rhs += rat_int(i0.orderings() as i64)
                            * y_num(&sample, nu, &i0.prepend(p))
                            * eval_h(sg, nu, &i0)?;
                    }
                }
                rhs = -&sample.det * rhs;
                if lhs != rhs {
                    mark(&mut fails, "hs3", sample_idx);
                }
                for k in 1..=s.min(2) {
                    for tuple_idx in MultiIndex::of_degree(n, k) {
                        let tuple = tuple_idx.entries().to_vec();
                        let lhs = hom_h
                            .component(n + sg, p, &tuple_idx)
                            .evaluate(&sample.hom_point)?;
                        let mut rhs = Rat::zero();
                        for nu in 1..=m {
                            for i0 in MultiIndex::all(n, 0, s) {
                                for i_idx in MultiIndex::all(n, k, s - i0.degree()) {
                                    let zsum = z_partition_sum_num(&sample, &tuple, &i_idx);
                                    if zsum.is_zero() {
                                        continue;
                                    }
                                    let c = binomial(
                                        i_idx.degree() + i0.degree(),
                                        i_idx.degree(),
                                    );
                                    rhs += c
                                        * rat_int(
                                            (i_idx.orderings() * i0.orderings()) as i64,
                                        )
                                        * zsum
                                        * y_num(&sample, nu, &i0.prepend(p))
                                        * eval_h(sg, nu, &i_idx.juxtapose(&i0)?)?;
                                }
                            }
                        }
                        rhs = -&sample.det * rhs;
                        if lhs != rhs {
                            mark(&mut fails, "hs4", sample_idx);
                        }
                    }
                }
            }
        }
        // (hs5) and (hs6)
        for p in 1..=n {
            for nu in 1..=m {
                let lhs =
                    hom_h.component(p, n + nu, &MultiIndex::empty(n)).evaluate(&sample.hom_point)?;
                let mut rhs = Rat::zero();
                for sg in 1..=m {
                    rhs += y_num(&sample, sg, &MultiIndex::of(n, &[p]))
                        * eval_h(sg, nu, &MultiIndex::empty(n))?;
                }
                rhs = -&sample.det * rhs;
                if lhs != rhs {
                    mark(&mut fails, "hs5", sample_idx);
                }
                for k in 1..=s.min(2) {
                    for tuple_idx in MultiIndex::of_degree(n, k) {
                        let tuple = tuple_idx.entries().to_vec();
                        let lhs = hom_h
                            .component(p, n + nu, &tuple_idx)
                            .evaluate(&sample.hom_point)?;
                        let mut rhs = Rat::zero();
                        for sg in 1..=m {
                            let mut acc = Rat::zero();
                            for i_idx in MultiIndex::all(n, k, s) {
                                let zsum = z_partition_sum_num(&sample, &tuple, &i_idx);
                                if zsum.is_zero() {
                                    continue;
                                }
                                acc += rat_int(i_idx.orderings() as i64)
                                    * zsum
                                    * eval_h(sg, nu, &i_idx)?;
                            }
                            rhs += y_num(&sample, sg, &MultiIndex::of(n, &[p])) * acc;
                        }
                        rhs = -&sample.det * rhs;
                        if lhs != rhs {
                            mark(&mut fails, "hs6", sample_idx);
                        }
                    }
                }
            }
        }
        // (hs7) and (hs8)
        for p in 1..=n {
            for q in 1..=n {
                let lhs =
                    hom_h.component(p, q, &MultiIndex::empty(n)).evaluate(&sample.hom_point)?;
                let mut rhs = Rat::zero();
                for sg in 1..=m {
                    for nu in 1..=m {
                        for i0 in MultiIndex::all(n, 0, s) {
                            rhs += rat_int(i0.orderings() as i64)
                                * y_num(&sample, sg, &MultiIndex::of(n, &[p]))
                                * y_num(&sample, nu, &i0.prepend(q))
                                * eval_h(sg, nu, &i0)?;
                        }
                    }
                }
                rhs = &sample.det * rhs;
                if lhs != rhs {
                    mark(&mut fails, "hs7", sample_idx);
                }
                for k in 1..=s.min(2) {
                    for tuple_idx in MultiIndex::of_degree(n, k) {
                        let tuple = tuple_idx.entries().to_vec();
                        let lhs =
                            hom_h.component(p, q, &tuple_idx).evaluate(&sample.hom_point)?;
                        let mut rhs = Rat::zero();
                        for sg in 1..=m {
                            for nu in 1..=m {
                                for i0 in MultiIndex::all(n, 0, s) {
                                    for i_idx in MultiIndex::all(n, k, s - i0.degree()) {
                                        let zsum =
                                            z_partition_sum_num(&sample, &tuple, &i_idx);
                                        if zsum.is_zero() {
                                            continue;
                                        }
                                        let c = binomial(
                                            i_idx.degree() + i0.degree(),
                                            i_idx.degree(),
                                        );
                                        rhs += c
                                            * rat_int(
                                                (i_idx.orderings() * i0.orderings()) as i64,
                                            )
                                            * zsum
                                            * y_num(&sample, sg, &MultiIndex::of(n, &[p]))
                                            * y_num(&sample, nu, &i0.prepend(q))
                                            * eval_h(sg, nu, &i_idx.juxtapose(&i0)?)?;
                                    }
                                }
                            }
                        }
                        rhs = &sample.det * rhs;
                        if lhs != rhs {
                            mark(&mut fails, "hs8", sample_idx);
                        }
                    }
                }
            }
        }
    }
    for name in names {
        match fails.get(name) {
            None => report.check(format!("hs-correspondence {name}"), true, String::new()),
            Some((count, first)) => report.check(
                format!("hs-correspondence {name}"),
                false,
                format!("{count} sample failures, first at sample {first}"),
            ),
        }
    }
    // (HSHS): the two variationality verdicts agree
    let hom_zero = hom_h.is_zero();
    let adapted_zero = adapted_h.is_zero();
    report.check(
        "hs-correspondence variationality equivalence",
        hom_zero == adapted_zero,
        format!("hom {hom_zero}, adapted {adapted_zero}"),
    );
    Ok(report)
}

//! The differential group `L^r_n` and its action on velocity jets.
//!
//! A group element is the truncated jet at 0 of a diffeomorphism of ℝⁿ
//! fixing 0, stored through its canonical coordinates `a^k_I`, `1 <= |I| <= r`.
//! Multiplication is jet composition, `(a·b) = j^r(α∘β)` with `a` the outer
//! factor; its chart expression is the partition sum
//!
//! `(a·b)^k_I = Σ_p Σ_{(I_1..I_p)} b^{j_1}_{I_1} ··· b^{j_p}_{I_p} a^k_{j_1..j_p}`.
//!
//! Velocity jets `x^A_I` carry the induced right action by the same sum, and
//! this module also provides the jet prolongations of chart maps, polynomial
//! immersions and evolution vector fields.

use crate::error::{Error, Result};
use crate::expr::{formal_derivative_multi, Expr, Var};
use crate::linalg;
use crate::multiindex::{ordered_tuples, partitions, MultiIndex};
use crate::ratio::Rat;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Element of `L^r_n` with symbolic (or constant) coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupElement {
    n: u16,
    r: usize,
    coeffs: BTreeMap<(u16, MultiIndex), Expr>,
}

impl GroupElement {
    /// The identity `e = (δ^i_j, 0, ..., 0)`.
    pub fn identity(n: u16, r: usize) -> Self {
        let mut g = Self::zeroed(n, r);
        for k in 1..=n {
            g.coeffs.insert((k, MultiIndex::of(n, &[k])), Expr::one());
        }
        g
    }

    pub(crate) fn zeroed(n: u16, r: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        for k in 1..=n {
            for idx in MultiIndex::all(n, 1, r) {
                coeffs.insert((k, idx), Expr::zero());
            }
        }
        GroupElement { n, r, coeffs }
    }

    /// Builds an element from explicit coefficients; unspecified entries are
    /// zero.
    pub fn new(
        n: u16,
        r: usize,
        entries: impl IntoIterator<Item = ((u16, MultiIndex), Expr)>,
    ) -> Result<Self> {
        let mut g = Self::zeroed(n, r);
        for ((k, idx), e) in entries {
            if k == 0 || k > n || idx.n() != n || idx.is_empty() || idx.degree() > r {
                return Err(Error::ShapeMismatch(format!(
                    "coefficient a^{k}_{idx:?} outside L^{r}_{n}"
                )));
            }
            g.coeffs.insert((k, idx), e);
        }
        Ok(g)
    }

    /// The fully symbolic element with coordinates `a^k_I`.
    pub fn symbolic(n: u16, r: usize) -> Self {
        let mut g = Self::zeroed(n, r);
        for ((k, idx), e) in g.coeffs.iter_mut() {
            *e = Expr::var(Var::GroupA { k: *k, idx: idx.clone() });
        }
        g
    }

    /// Convenience for `n = 1`: coefficients `(a_1, a_11, ...)`.
    pub fn line(r: usize, values: &[Rat]) -> Result<Self> {
        if values.len() != r {
            return Err(Error::ShapeMismatch(format!(
                "expected {r} coefficients, got {}",
                values.len()
            )));
        }
        Self::new(
            1,
            r,
            values.iter().enumerate().map(|(k, v)| {
                (
                    (1u16, MultiIndex::of(1, &vec![1; k + 1])),
                    Expr::from_rat(v.clone()),
                )
            }),
        )
    }

    pub fn n(&self) -> u16 {
        self.n
    }

    pub fn order(&self) -> usize {
        self.r
    }

    pub fn coeff(&self, k: u16, idx: &MultiIndex) -> Expr {
        self.coeffs
            .get(&(k, idx.clone()))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    pub(crate) fn set(&mut self, k: u16, idx: MultiIndex, e: Expr) {
        self.coeffs.insert((k, idx), e);
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&(u16, MultiIndex), &Expr)> {
        self.coeffs.iter()
    }

    /// The first-order block `a^i_j` as a matrix.
    pub fn linear_block(&self) -> Vec<Vec<Expr>> {
        (1..=self.n)
            .map(|i| {
                (1..=self.n)
                    .map(|j| self.coeff(i, &MultiIndex::of(self.n, &[j])))
                    .collect()
            })
            .collect()
    }

    /// `det(a^i_j)`.
    pub fn det(&self) -> Expr {
        linalg::det(&self.linear_block())
    }

    /// Group multiplication `(a·b) = j^r(α∘β)`; `self` is the outer factor.
    pub fn compose(&self, b: &GroupElement) -> Result<GroupElement> {
        if self.n != b.n || self.r != b.r {
            return Err(Error::ShapeMismatch(format!(
                "composing L^{}_{} with L^{}_{}",
                self.r, self.n, b.r, b.n
            )));
        }
        let mut out = Self::zeroed(self.n, self.r);
        if let (Some(ca), Some(cb)) = (self.constants(), b.constants()) {
            // numeric kernel: plain rational arithmetic
            for k in 1..=self.n {
                for idx in MultiIndex::all(self.n, 1, self.r) {
                    let v = partition_action_rat(&idx, self.n, |blocks, tuple| {
                        let mut term = ca[&(k, MultiIndex::of(self.n, tuple))].clone();
                        if term.is_zero() {
                            return term;
                        }
                        for (block, &j) in blocks.iter().zip(tuple) {
                            term *= &cb[&(j, block.clone())];
                            if term.is_zero() {
                                break;
                            }
                        }
                        term
                    });
                    out.coeffs.insert((k, idx), Expr::from_rat(v));
                }
            }
            return Ok(out);
        }
        for k in 1..=self.n {
            for idx in MultiIndex::all(self.n, 1, self.r) {
                let v = partition_action(&idx, self.n, |blocks, tuple| {
                    let mut term = self.coeff(k, &MultiIndex::of(self.n, tuple));
                    if term.is_zero() {
                        return term;
                    }
                    for (block, &j) in blocks.iter().zip(tuple) {
                        term = &term * &b.coeff(j, block);
                        if term.is_zero() {
                            break;
                        }
                    }
                    term
                });
                out.coeffs.insert((k, idx), v);
            }
        }
        Ok(out)
    }

    /// Group inverse by triangular order-by-order solve: the unknown `b^j_I`
    /// appears only in the single-block term `b^j_I a^k_j` of `(a·b)^k_I = 0`.
    pub fn inverse(&self) -> Result<GroupElement> {
        let inv1 = linalg::inverse(&self.linear_block())
            .map_err(|_| Error::Singular("first-order block of the group element".into()))?;
        let mut b = Self::zeroed(self.n, self.r);
        for i in 1..=self.n {
            for j in 1..=self.n {
                b.coeffs.insert(
                    (i, MultiIndex::of(self.n, &[j])),
                    inv1[(i - 1) as usize][(j - 1) as usize].clone(),
                );
            }
        }
        for deg in 2..=self.r {
            for idx in MultiIndex::of_degree(self.n, deg) {
                // known part: every partition with at least two blocks only
                // involves b-coefficients of lower degree
                let mut known = vec![Expr::zero(); self.n as usize];
                for k in 1..=self.n {
                    known[(k - 1) as usize] = partition_action(&idx, self.n, |blocks, tuple| {
                        if blocks.len() == 1 {
                            return Expr::zero();
                        }
                        let mut term = self.coeff(k, &MultiIndex::of(self.n, tuple));
                        if term.is_zero() {
                            return term;
                        }
                        for (block, &j) in blocks.iter().zip(tuple) {
                            term = &term * &b.coeff(j, block);
                            if term.is_zero() {
                                break;
                            }
                        }
                        term
                    });
                }
                // 0 = b^j_I a^k_j + known_k  =>  b^i_I = -Σ_k (a^{-1})^i_k known_k
                for i in 1..=self.n {
                    let mut v = Expr::zero();
                    for k in 1..=self.n {
                        v = &v
                            + &(&inv1[(i - 1) as usize][(k - 1) as usize]
                                * &known[(k - 1) as usize]);
                    }
                    b.coeffs.insert((i, idx.clone()), -v);
                }
            }
        }
        Ok(b)
    }

    /// All coefficients as rationals, when the element is numeric.
    fn constants(&self) -> Option<BTreeMap<(u16, MultiIndex), Rat>> {
        self.coeffs
            .iter()
            .map(|(k, e)| e.as_constant().map(|c| (k.clone(), c)))
            .collect()
    }

    /// Applies a map to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&Expr) -> Result<Expr>) -> Result<GroupElement> {
        let mut out = self.clone();
        for e in out.coeffs.values_mut() {
            *e = f(e)?;
        }
        Ok(out)
    }

    pub fn evaluate(&self, point: &BTreeMap<Var, Rat>) -> Result<GroupElement> {
        self.map_coeffs(|e| Ok(Expr::from_rat(e.evaluate(point)?)))
    }
}

/// [`partition_action`] over plain rationals.
pub(crate) fn partition_action_rat(
    idx: &MultiIndex,
    n: u16,
    term: impl Fn(&[MultiIndex], &[u16]) -> Rat,
) -> Rat {
    let mut acc = Rat::zero();
    for part in partitions(idx) {
        let blocks = part.block_indices(idx);
        for tuple in ordered_tuples(n, blocks.len()) {
            acc += term(&blocks, &tuple);
        }
    }
    acc
}

/// The shared partition sum `Σ_p Σ_{(I_1..I_p)} Σ_{j-tuples} term(blocks, j)`.
pub(crate) fn partition_action(
    idx: &MultiIndex,
    n: u16,
    term: impl Fn(&[MultiIndex], &[u16]) -> Expr,
) -> Expr {
    let mut acc = Expr::zero();
    for part in partitions(idx) {
        let blocks = part.block_indices(idx);
        for tuple in ordered_tuples(n, blocks.len()) {
            let t = term(&blocks, &tuple);
            if !t.is_zero() {
                acc = &acc + &t;
            }
        }
    }
    acc
}

/// A point of `T^r_n X` in one velocity chart: coefficients `x^A_I`,
/// `0 <= |I| <= r`, rational or symbolic.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VelocityJet {
    n: u16,
    big_n: u16,
    r: usize,
    coeffs: BTreeMap<(u16, MultiIndex), Expr>,
}

impl VelocityJet {
    pub fn zeroed(n: u16, big_n: u16, r: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        for a in 1..=big_n {
            for idx in MultiIndex::all(n, 0, r) {
                coeffs.insert((a, idx), Expr::zero());
            }
        }
        VelocityJet { n, big_n, r, coeffs }
    }

    pub fn new(
        n: u16,
        big_n: u16,
        r: usize,
        entries: impl IntoIterator<Item = ((u16, MultiIndex), Expr)>,
    ) -> Result<Self> {
        let mut jet = Self::zeroed(n, big_n, r);
        for ((a, idx), e) in entries {
            if a == 0 || a > big_n || idx.n() != n || idx.degree() > r {
                return Err(Error::ShapeMismatch(format!(
                    "coefficient x^{a}_{idx:?} outside T^{r}_{n} with N={big_n}"
                )));
            }
            jet.coeffs.insert((a, idx), e);
        }
        Ok(jet)
    }

    /// The symbolic jet whose coefficients are the chart coordinates.
    pub fn symbolic(n: u16, big_n: u16, r: usize) -> Self {
        let mut jet = Self::zeroed(n, big_n, r);
        for ((a, idx), e) in jet.coeffs.iter_mut() {
            *e = Expr::var(Var::X { a: *a, idx: idx.clone() });
        }
        jet
    }

    pub fn n(&self) -> u16 {
        self.n
    }

    pub fn big_n(&self) -> u16 {
        self.big_n
    }

    pub fn fibre_arity(&self) -> u16 {
        self.big_n - self.n
    }

    pub fn order(&self) -> usize {
        self.r
    }

    pub fn coeff(&self, a: u16, idx: &MultiIndex) -> Expr {
        self.coeffs
            .get(&(a, idx.clone()))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    pub fn set(&mut self, a: u16, idx: MultiIndex, e: Expr) {
        self.coeffs.insert((a, idx), e);
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&(u16, MultiIndex), &Expr)> {
        self.coeffs.iter()
    }

    /// Right action `x·a` of the differential group; fixes the order-0 block.
    pub fn act(&self, a: &GroupElement) -> Result<VelocityJet> {
        if self.n != a.n() || self.r != a.order() {
            return Err(Error::ShapeMismatch(format!(
                "acting with L^{}_{} on T^{}_{}",
                a.order(),
                a.n(),
                self.r,
                self.n
            )));
        }
        let mut out = Self::zeroed(self.n, self.big_n, self.r);
        let numeric_jet: Option<BTreeMap<(u16, MultiIndex), Rat>> = self
            .coeffs
            .iter()
            .map(|(k, e)| e.as_constant().map(|c| (k.clone(), c)))
            .collect();
        if let (Some(cx), Some(ca)) = (numeric_jet, a.constants()) {
            for lbl in 1..=self.big_n {
                out.coeffs.insert(
                    (lbl, MultiIndex::empty(self.n)),
                    self.coeff(lbl, &MultiIndex::empty(self.n)),
                );
                for idx in MultiIndex::all(self.n, 1, self.r) {
                    let v = partition_action_rat(&idx, self.n, |blocks, tuple| {
                        let mut term = cx[&(lbl, MultiIndex::of(self.n, tuple))].clone();
                        if term.is_zero() {
                            return term;
                        }
                        for (block, &j) in blocks.iter().zip(tuple) {
                            term *= &ca[&(j, block.clone())];
                            if term.is_zero() {
                                break;
                            }
                        }
                        term
                    });
                    out.coeffs.insert((lbl, idx), Expr::from_rat(v));
                }
            }
            return Ok(out);
        }
        for lbl in 1..=self.big_n {
            out.coeffs.insert(
                (lbl, MultiIndex::empty(self.n)),
                self.coeff(lbl, &MultiIndex::empty(self.n)),
            );
            for idx in MultiIndex::all(self.n, 1, self.r) {
                let v = partition_action(&idx, self.n, |blocks, tuple| {
                    let mut term = self.coeff(lbl, &MultiIndex::of(self.n, tuple));
                    if term.is_zero() {
                        return term;
                    }
                    for (block, &j) in blocks.iter().zip(tuple) {
                        term = &term * &a.coeff(j, block);
                        if term.is_zero() {
                            break;
                        }
                    }
                    term
                });
                out.coeffs.insert((lbl, idx), v);
            }
        }
        Ok(out)
    }

    /// Truncates to a lower order.
    pub fn truncated(&self, s: usize) -> VelocityJet {
        let mut out = Self::zeroed(self.n, self.big_n, s.min(self.r));
        for ((a, idx), e) in &self.coeffs {
            if idx.degree() <= out.r {
                out.coeffs.insert((*a, idx.clone()), e.clone());
            }
        }
        out
    }

    /// The substitution `x^A_I -> coefficient` sending a symbolic expression
    /// on this chart to its value along the jet.
    pub fn substitution(&self) -> BTreeMap<Var, Expr> {
        self.coeffs
            .iter()
            .map(|((a, idx), e)| (Var::X { a: *a, idx: idx.clone() }, e.clone()))
            .collect()
    }

    /// Rational-point view for exact evaluation; errors on symbolic entries.
    pub fn point(&self) -> Result<BTreeMap<Var, Rat>> {
        self.coeffs
            .iter()
            .map(|((a, idx), e)| {
                let c = e.as_constant().ok_or_else(|| {
                    Error::Unevaluable(format!("jet coefficient x^{a}_{idx:?} is symbolic"))
                })?;
                Ok((Var::X { a: *a, idx: idx.clone() }, c))
            })
            .collect()
    }

    pub fn map_coeffs(&self, f: impl Fn(&Expr) -> Result<Expr>) -> Result<VelocityJet> {
        let mut out = self.clone();
        for e in out.coeffs.values_mut() {
            *e = f(e)?;
        }
        Ok(out)
    }
}

/// Prolongs the components of a chart map `F: ℝ^N -> ℝ^N` to the jet tables
/// `F^A_I`, `|I| <= r`, computing them both by the recurrence
/// `F^A_{jI} = d_j F^A_I` and by the closed partition formula; the two must
/// agree identically.
pub fn prolong_chart_map(
    components: &[Expr],
    n: u16,
    r: usize,
) -> Result<BTreeMap<(u16, MultiIndex), Expr>> {
    let big_n = components.len() as u16;
    for f in components {
        for v in f.vars() {
            match v {
                Var::X { ref idx, .. } if idx.is_empty() => {}
                other => {
                    return Err(Error::ShapeMismatch(format!(
                        "chart map component depends on non-base variable {other}"
                    )))
                }
            }
        }
    }
    let mut table = BTreeMap::new();
    for (a0, f) in components.iter().enumerate() {
        let a = (a0 + 1) as u16;
        table.insert((a, MultiIndex::empty(n)), f.clone());
    }
    // recurrence route
    for deg in 1..=r {
        for idx in MultiIndex::of_degree(n, deg) {
            let j = idx.entries()[0];
            let rest = idx.remove_one(j).expect("nonempty");
            for a in 1..=big_n {
                let prev = table
                    .get(&(a, rest.clone()))
                    .expect("lower degree filled")
                    .clone();
                let v = formal_derivative_multi(&prev, &MultiIndex::of(n, &[j]), n)?;
                table.insert((a, idx.clone()), v);
            }
        }
    }
    // closed partition formula, checked against the recurrence
    for idx in MultiIndex::all(n, 1, r) {
        for a in 1..=big_n {
            let closed = partition_action(&idx, big_n, |blocks, labels| {
                // labels run over 1..=N: x^{B_1}_{I_1}···x^{B_p}_{I_p} ∂_{B_1..B_p} F^A
                let mut deriv = components[(a - 1) as usize].clone();
                for &b in labels {
                    deriv = deriv.plain_partial(&Var::X { a: b, idx: MultiIndex::empty(n) });
                    if deriv.is_zero() {
                        break;
                    }
                }
                if deriv.is_zero() {
                    return deriv;
                }
                let mut term = deriv;
                for (block, &b) in blocks.iter().zip(labels) {
                    term = &term * &Expr::var(Var::X { a: b, idx: block.clone() });
                }
                term
            });
            let rec = &table[&(a, idx.clone())];
            if !closed.equivalent(rec) {
                return Err(Error::Inconsistent(format!(
                    "chart prolongation F^{a}_{idx:?}: closed formula differs from recurrence"
                )));
            }
        }
    }
    Ok(table)
}

/// Jet of a polynomial immersion `γ: ℝ^n -> ℝ^N` at the base point `t0`:
/// `x^A_I = ∂_I γ^A (t0)`.
pub fn prolong_immersion(components: &[Expr], n: u16, r: usize, t0: &[Rat]) -> Result<VelocityJet> {
    let symbolic = prolong_immersion_symbolic(components, n, r)?;
    let point: BTreeMap<Var, Rat> = (1..=n)
        .map(|k| (Var::T { k }, t0[(k - 1) as usize].clone()))
        .collect();
    symbolic.map_coeffs(|e| Ok(Expr::from_rat(e.evaluate(&point)?)))
}

/// Jet of an immersion at a symbolic base point: coefficients are
/// expressions in the curve parameters `t^k`.
pub fn prolong_immersion_symbolic(components: &[Expr], n: u16, r: usize) -> Result<VelocityJet> {
    let big_n = components.len() as u16;
    for f in components {
        for v in f.vars() {
            if !matches!(v, Var::T { .. } | Var::Param(_)) {
                return Err(Error::ShapeMismatch(format!(
                    "immersion component depends on non-parameter variable {v}"
                )));
            }
        }
    }
    let mut jet = VelocityJet::zeroed(n, big_n, r);
    for a in 1..=big_n {
        for idx in MultiIndex::all(n, 0, r) {
            let mut d = components[(a - 1) as usize].clone();
            for &i in idx.entries() {
                d = d.plain_partial(&Var::T { k: i });
            }
            jet.set(a, idx, d);
        }
    }
    Ok(jet)
}

/// An evolution `ξ = ξ^A ∂_A` with base-only components.
#[derive(Clone, Debug)]
pub struct Evolution {
    components: Vec<Expr>,
    n: u16,
}

impl Evolution {
    pub fn new(components: Vec<Expr>, n: u16) -> Result<Self> {
        for f in &components {
            for v in f.vars() {
                match v {
                    Var::X { ref idx, .. } if idx.is_empty() => {}
                    Var::XiJet { ref d, .. } if d.is_empty() => {}
                    Var::Param(_) => {}
                    other => {
                        return Err(Error::ShapeMismatch(format!(
                            "evolution component depends on non-base variable {other}"
                        )))
                    }
                }
            }
        }
        Ok(Evolution { components, n })
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }
}

/// The prolonged evolution `j^s ξ = Σ_{|J| <= s} (d_J ξ^A) ∂^J_A` as a ready
/// first-order operator; a derivation on expressions of order `<= s`.
pub struct ProlongedEvolution {
    terms: Vec<(u16, MultiIndex, Expr)>,
}

impl ProlongedEvolution {
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for (a, idx, coeff) in &self.terms {
            let df = f.plain_partial(&Var::X { a: *a, idx: idx.clone() });
            if !df.is_zero() {
                acc = &acc + &(coeff * &df);
            }
        }
        acc
    }
}

/// Builds `j^s ξ`. In canonical indices the coefficient of the plain partial
/// `∂/∂x^A_J` is `d_J ξ^A`: the weight of `∂^J_A` cancels against the number
/// of orderings of `J` in the implied summation.
pub fn prolong_evolution(xi: &Evolution, s: usize) -> Result<ProlongedEvolution> {
    let big_n = xi.components.len() as u16;
    let mut terms = Vec::new();
    for a in 1..=big_n {
        for idx in MultiIndex::all(xi.n, 0, s) {
            let coeff = formal_derivative_multi(&xi.components[(a - 1) as usize], &idx, xi.n)?;
            if !coeff.is_zero() {
                terms.push((a, idx, coeff));
            }
        }
    }
    Ok(ProlongedEvolution { terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::{rat, rat_int};
    use crate::sample::Sampler;

    fn line_elt(values: &[i64]) -> GroupElement {
        GroupElement::line(
            values.len(),
            &values.iter().map(|&v| rat_int(v)).collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn identity_laws() {
        let e = GroupElement::identity(2, 3);
        let mut s = Sampler::new(7);
        let a = s.group_element(2, 3);
        assert_eq!(a.compose(&e).unwrap(), a);
        assert_eq!(e.compose(&a).unwrap(), a);
        assert_eq!(e.inverse().unwrap(), e);
    }

    #[test]
    fn worked_composition_order_two() {
        // α(t) = 2t + 3t²/2, β(t) = 5t + 7t²/2: (α∘β)''(0) = 7·2 + 25·3 = 89
        let a = line_elt(&[2, 3]);
        let b = line_elt(&[5, 7]);
        let ab = a.compose(&b).unwrap();
        assert_eq!(ab.coeff(1, &MultiIndex::of(1, &[1])), Expr::from_int(10));
        assert_eq!(ab.coeff(1, &MultiIndex::of(1, &[1, 1])), Expr::from_int(89));
    }

    #[test]
    fn worked_inverse_order_two() {
        // 0 = 2·b_{11} + b_1²·3 with b_1 = 1/2  =>  b_{11} = -3/8
        let a = line_elt(&[2, 3]);
        let inv = a.inverse().unwrap();
        assert_eq!(inv.coeff(1, &MultiIndex::of(1, &[1])), Expr::from_rat(rat(1, 2)));
        assert_eq!(
            inv.coeff(1, &MultiIndex::of(1, &[1, 1])),
            Expr::from_rat(rat(-3, 8))
        );
        assert_eq!(a.compose(&inv).unwrap(), GroupElement::identity(1, 2));
        assert_eq!(inv.compose(&a).unwrap(), GroupElement::identity(1, 2));
    }

    #[test]
    fn associativity_and_inverse_random() {
        let mut s = Sampler::new(11);
        for (n, r) in [(1u16, 3usize), (2, 2), (2, 3)] {
            for _ in 0..10 {
                let a = s.group_element(n, r);
                let b = s.group_element(n, r);
                let c = s.group_element(n, r);
                let ab_c = a.compose(&b).unwrap().compose(&c).unwrap();
                let a_bc = a.compose(&b.compose(&c).unwrap()).unwrap();
                assert_eq!(ab_c, a_bc);
                let inv = a.inverse().unwrap();
                assert_eq!(a.compose(&inv).unwrap(), GroupElement::identity(n, r));
                assert_eq!(inv.compose(&a).unwrap(), GroupElement::identity(n, r));
            }
        }
    }

    #[test]
    fn action_fixes_base_and_is_right_action() {
        let mut s = Sampler::new(23);
        let n = 2;
        let r = 2;
        for _ in 0..10 {
            let x = s.velocity_jet(n, 3, r);
            let a = s.group_element(n, r);
            let b = s.group_element(n, r);
            let e = GroupElement::identity(n, r);
            assert_eq!(x.act(&e).unwrap(), x);
            let xa_b = x.act(&a).unwrap().act(&b).unwrap();
            let x_ab = x.act(&a.compose(&b).unwrap()).unwrap();
            assert_eq!(xa_b, x_ab);
            for lbl in 1..=3u16 {
                assert_eq!(
                    xa_b.coeff(lbl, &MultiIndex::empty(n)),
                    x.coeff(lbl, &MultiIndex::empty(n))
                );
            }
        }
    }

    #[test]
    fn first_order_action_is_linear_scaling() {
        // n=1, N=2, r=1: x = (2, 6), a = (3) -> (6, 18)
        let x = VelocityJet::new(
            1,
            2,
            1,
            [
                ((1u16, MultiIndex::of(1, &[1])), Expr::from_int(2)),
                ((2u16, MultiIndex::of(1, &[1])), Expr::from_int(6)),
            ],
        )
        .unwrap();
        let a = line_elt(&[3]);
        let xa = x.act(&a).unwrap();
        assert_eq!(xa.coeff(1, &MultiIndex::of(1, &[1])), Expr::from_int(6));
        assert_eq!(xa.coeff(2, &MultiIndex::of(1, &[1])), Expr::from_int(18));
    }

    #[test]
    fn identity_map_prolongs_to_identity() {
        let n = 2;
        let big_n = 3u16;
        let comps: Vec<Expr> = (1..=big_n)
            .map(|a| Expr::var(Var::X { a, idx: MultiIndex::empty(n) }))
            .collect();
        let table = prolong_chart_map(&comps, n, 2).unwrap();
        for a in 1..=big_n {
            for idx in MultiIndex::all(n, 1, 2) {
                assert_eq!(
                    table[&(a, idx.clone())],
                    Expr::var(Var::X { a, idx: idx.clone() })
                );
            }
        }
    }

    #[test]
    fn second_order_prolongation_display() {
        // F^A_{i1,i2} = x^B_{i1,i2} ∂_B F^A + x^{B1}_{i1} x^{B2}_{i2} ∂_{B1}∂_{B2} F^A
        let n = 2;
        let x1 = Expr::var(Var::X { a: 1, idx: MultiIndex::empty(n) });
        let x2 = Expr::var(Var::X { a: 2, idx: MultiIndex::empty(n) });
        let f = vec![&x1 * &x2, &x2 * &x2];
        let table = prolong_chart_map(&f, n, 2).unwrap();
        let idx12 = MultiIndex::of(n, &[1, 2]);
        let expect = {
            let d_b = |b: u16, i: &[u16]| Expr::var(Var::X { a: b, idx: MultiIndex::of(n, i) });
            // ∂_1 F^1 = x^2, ∂_2 F^1 = x^1, ∂_1∂_2 F^1 = 1
            &(&(&d_b(1, &[1, 2]) * &x2) + &(&d_b(2, &[1, 2]) * &x1))
                + &(&(&d_b(1, &[1]) * &d_b(2, &[2])) + &(&d_b(2, &[1]) * &d_b(1, &[2])))
        };
        assert!(table[&(1u16, idx12)].equivalent(&expect));
    }

    #[test]
    fn chart_prolongation_functoriality() {
        // (G∘F)^A_I agrees with substituting the prolonged F into the
        // prolonged G, for random quadratic maps, n = 1, N = 2, r = 2
        let mut s = Sampler::new(101);
        let n = 1;
        let big_n = 2u16;
        for _ in 0..5 {
            let f: Vec<Expr> = (0..big_n).map(|_| s.base_quadratic(n, big_n)).collect();
            let g: Vec<Expr> = (0..big_n).map(|_| s.base_quadratic(n, big_n)).collect();
            let base_subst: BTreeMap<Var, Expr> = (1..=big_n)
                .map(|a| {
                    (
                        Var::X { a, idx: MultiIndex::empty(n) },
                        f[(a - 1) as usize].clone(),
                    )
                })
                .collect();
            let gf: Vec<Expr> = g.iter().map(|c| c.subst(&base_subst).unwrap()).collect();
            let table_f = prolong_chart_map(&f, n, 2).unwrap();
            let table_g = prolong_chart_map(&g, n, 2).unwrap();
            let table_gf = prolong_chart_map(&gf, n, 2).unwrap();
            let jet_subst: BTreeMap<Var, Expr> = table_f
                .iter()
                .map(|((a, idx), e)| (Var::X { a: *a, idx: idx.clone() }, e.clone()))
                .collect();
            for a in 1..=big_n {
                for idx in MultiIndex::all(n, 1, 2) {
                    let composed = table_g[&(a, idx.clone())].subst(&jet_subst).unwrap();
                    assert!(
                        composed.equivalent(&table_gf[&(a, idx.clone())]),
                        "functoriality fails at F^{a}_{idx:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn immersion_jets() {
        // γ(t) = (t, 3t) at r = 1
        let n = 1;
        let t = Expr::var(Var::T { k: 1 });
        let jet =
            prolong_immersion(&[t.clone(), &t * &Expr::from_int(3)], n, 1, &[rat_int(0)]).unwrap();
        assert_eq!(jet.coeff(1, &MultiIndex::of(1, &[1])), Expr::one());
        assert_eq!(jet.coeff(2, &MultiIndex::of(1, &[1])), Expr::from_int(3));

        // γ(t) = (2t + 2t², 6t + 5t²) at r = 2, base point 0
        let g1 = &(&t * &Expr::from_int(2)) + &(&(&t * &t) * &Expr::from_int(2));
        let g2 = &(&t * &Expr::from_int(6)) + &(&(&t * &t) * &Expr::from_int(5));
        let jet = prolong_immersion(&[g1, g2], n, 2, &[rat_int(0)]).unwrap();
        assert_eq!(jet.coeff(1, &MultiIndex::of(1, &[1])), Expr::from_int(2));
        assert_eq!(jet.coeff(1, &MultiIndex::of(1, &[1, 1])), Expr::from_int(4));
        assert_eq!(jet.coeff(2, &MultiIndex::of(1, &[1])), Expr::from_int(6));
        assert_eq!(jet.coeff(2, &MultiIndex::of(1, &[1, 1])), Expr::from_int(10));
    }

    #[test]
    fn reparametrized_jet_matches_action() {
        // j^r(γ∘α) = act(j^r γ, j^r α) — the action is jet composition
        let mut s = Sampler::new(55);
        let n = 1;
        let r = 3;
        for _ in 0..5 {
            let gamma: Vec<Expr> = (0..2).map(|_| s.t_polynomial(n, r)).collect();
            let alpha = s.t_reparametrization(n, r);
            let jet_alpha = {
                let sym = prolong_immersion_symbolic(std::slice::from_ref(&alpha), n, r).unwrap();
                let point: BTreeMap<Var, Rat> = [(Var::T { k: 1 }, rat_int(0))].into();
                let mut g = GroupElement::zeroed(n, r);
                for idx in MultiIndex::all(n, 1, r) {
                    let v = sym.coeff(1, &idx).evaluate(&point).unwrap();
                    g.set(1, idx, Expr::from_rat(v));
                }
                g
            };
            let t_subst: BTreeMap<Var, Expr> = [(Var::T { k: 1 }, alpha.clone())].into();
            let gamma_alpha: Vec<Expr> =
                gamma.iter().map(|c| c.subst(&t_subst).unwrap()).collect();
            let lhs = prolong_immersion(&gamma_alpha, n, r, &[rat_int(0)]).unwrap();
            let rhs = prolong_immersion(&gamma, n, r, &[rat_int(0)])
                .unwrap()
                .act(&jet_alpha)
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn evolution_prolongation() {
        let n = 1;
        let big_n = 2u16;
        // constant field ∂_1 applied to x^1
        let xi = Evolution::new(vec![Expr::one(), Expr::zero()], n).unwrap();
        let op = prolong_evolution(&xi, 1).unwrap();
        let x1 = Expr::var(Var::X { a: 1, idx: MultiIndex::empty(n) });
        assert_eq!(op.apply(&x1), Expr::one());

        // dilation ξ^A = x^A on f = x^B_1 gives x^B_1
        let xi = Evolution::new(
            (1..=big_n)
                .map(|a| Expr::var(Var::X { a, idx: MultiIndex::empty(n) }))
                .collect(),
            n,
        )
        .unwrap();
        let op = prolong_evolution(&xi, 1).unwrap();
        let xb1 = Expr::var(Var::X { a: 2, idx: MultiIndex::of(n, &[1]) });
        assert_eq!(op.apply(&xb1), xb1);
    }

    #[test]
    fn evolution_prolongation_is_a_derivation() {
        let mut s = Sampler::new(77);
        let n = 2;
        let big_n = 3u16;
        let chart = crate::chart::ChartSpec::homogeneous(n, 1, 2);
        let xi =
            Evolution::new((0..big_n).map(|_| s.base_quadratic(n, big_n)).collect(), n).unwrap();
        let op = prolong_evolution(&xi, 2).unwrap();
        for _ in 0..5 {
            let f = s.poly_on_chart(&chart, 2, 4);
            let g = s.poly_on_chart(&chart, 2, 4);
            let lhs = op.apply(&(&f * &g));
            let rhs = &(&op.apply(&f) * &g) + &(&f * &op.apply(&g));
            assert!(lhs.equivalent(&rhs));
        }
    }
}

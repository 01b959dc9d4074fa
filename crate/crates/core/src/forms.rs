//! Exterior calculus in the contact-adapted cobasis of a Grassmann chart.
//!
//! The cobasis at order `r` is `dx^i`, the contact forms
//! `ω^σ_J = dy^σ_J - y^σ_{iJ} dx^i` for `|J| <= r-1`, and the top
//! differentials `dy^σ_I`, `|I| = r`. A [`Form`] is a graded sum of wedge
//! monomials of these covectors with expression coefficients; antisymmetry
//! is structural (monomials keep strictly increasing covector lists).
//!
//! The exterior derivative uses the contact decomposition of `df` — the
//! `dx`-component is the order-`r` truncation of the total derivative, the
//! `ω`/`dy`-components are plain fibre partials — together with
//! `dω^σ_J = -ω^σ_{Ji} ∧ dx^i` (and its top-order variant through `dy`).

use crate::error::{Error, Result};
use crate::expr::{total_derivative_truncated, Expr, Var};
use crate::grassmann::TransitionData;
use crate::jetgroup::{prolong_immersion_symbolic, VelocityJet};
use crate::multiindex::MultiIndex;
use crate::ratio::Rat;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};

/// One cobasis covector of the adapted chart.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Covector {
    /// `dx^i`
    Dx(u16),
    /// `ω^σ_J`, `|J| <= r-1`
    Omega(u16, MultiIndex),
    /// `dy^σ_I`, `|I| = r`
    DyTop(u16, MultiIndex),
}

impl std::fmt::Display for Covector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Covector::Dx(i) => write!(f, "dx{i}"),
            Covector::Omega(s, idx) => {
                if idx.is_empty() {
                    write!(f, "w{s}")
                } else {
                    let digits: String = idx.entries().iter().map(|d| d.to_string()).collect();
                    write!(f, "w{s}_{digits}")
                }
            }
            Covector::DyTop(s, idx) => {
                let digits: String = idx.entries().iter().map(|d| d.to_string()).collect();
                write!(f, "dy{s}_{digits}")
            }
        }
    }
}

/// The full cobasis of a chart; its length equals the adapted coordinate
/// count `m·C(n+r, n) + n`.
pub struct Cobasis;

impl Cobasis {
    pub fn for_chart(n: u16, m: u16, r: usize) -> Vec<Covector> {
        let mut out = Vec::new();
        for i in 1..=n {
            out.push(Covector::Dx(i));
        }
        for s in 1..=m {
            for idx in MultiIndex::all(n, 0, r.saturating_sub(1)) {
                out.push(Covector::Omega(s, idx));
            }
            for idx in MultiIndex::of_degree(n, r) {
                out.push(Covector::DyTop(s, idx));
            }
        }
        out
    }
}

/// Merges two strictly increasing covector lists, returning the sign of the
/// shuffle or `None` when a covector repeats.
fn merge_signed<T: Ord + Clone>(a: &[T], b: &[T]) -> Option<(Vec<T>, i64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut sign = 1i64;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                // b[j] jumps over the remaining a-factors
                if (a.len() - i) % 2 == 1 {
                    sign = -sign;
                }
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => return None,
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, sign))
}

/// A graded exterior form on one adapted chart.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Form {
    n: u16,
    m: u16,
    r: usize,
    terms: BTreeMap<Vec<Covector>, Expr>,
}

impl Form {
    pub fn zero(n: u16, m: u16, r: usize) -> Self {
        Form { n, m, r, terms: BTreeMap::new() }
    }

    /// A 0-form.
    pub fn function(n: u16, m: u16, r: usize, f: Expr) -> Self {
        let mut form = Self::zero(n, m, r);
        form.add_term(Vec::new(), f);
        form
    }

    /// A single cobasis covector as a 1-form.
    pub fn covector(n: u16, m: u16, r: usize, c: Covector) -> Self {
        let mut form = Self::zero(n, m, r);
        form.add_term(vec![c], Expr::one());
        form
    }

    pub fn dx(n: u16, m: u16, r: usize, i: u16) -> Self {
        Self::covector(n, m, r, Covector::Dx(i))
    }

    pub fn omega(n: u16, m: u16, r: usize, s: u16, idx: MultiIndex) -> Self {
        Self::covector(n, m, r, Covector::Omega(s, idx))
    }

    pub fn dy_top(n: u16, m: u16, r: usize, s: u16, idx: MultiIndex) -> Self {
        Self::covector(n, m, r, Covector::DyTop(s, idx))
    }

    /// The horizontal volume `θ_0 = dx^1 ∧ ... ∧ dx^n`.
    pub fn theta0(n: u16, m: u16, r: usize) -> Self {
        let mut form = Self::zero(n, m, r);
        form.add_term((1..=n).map(Covector::Dx).collect(), Expr::one());
        form
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

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Covector>, &Expr)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree when homogeneous.
    pub fn degree(&self) -> Option<usize> {
        let mut deg = None;
        for k in self.terms.keys() {
            match deg {
                None => deg = Some(k.len()),
                Some(d) if d == k.len() => {}
                _ => return None,
            }
        }
        deg.or(Some(0))
    }

    pub fn add_term(&mut self, mono: Vec<Covector>, coeff: Expr) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn coeff(&self, mono: &[Covector]) -> Expr {
        self.terms
            .get(mono)
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    fn same_chart(&self, other: &Form) -> Result<()> {
        if self.n != other.n || self.m != other.m || self.r != other.r {
            return Err(Error::ShapeMismatch("forms on different charts".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        self.same_chart(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        Form {
            n: self.n,
            m: self.m,
            r: self.r,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, f: &Expr) -> Form {
        if f.is_zero() {
            return Form::zero(self.n, self.m, self.r);
        }
        let mut out = Form::zero(self.n, self.m, self.r);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c * f);
        }
        out
    }

    /// Graded-commutative wedge product.
    pub fn wedge(&self, other: &Form) -> Result<Form> {
        self.same_chart(other)?;
        let mut out = Form::zero(self.n, self.m, self.r);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                if let Some((mono, sign)) = merge_signed(ka, kb) {
                    out.add_term(mono, &(ca * cb) * &Expr::from_int(sign));
                }
            }
        }
        Ok(out)
    }

    /// Whether every monomial avoids the top differentials, i.e. the form is
    /// annihilated by the interior products with the top `Δ`-fields.
    pub fn is_horizontal(&self) -> bool {
        self.terms
            .keys()
            .all(|k| k.iter().all(|c| !matches!(c, Covector::DyTop(..))))
    }

    /// Exterior derivative of a coefficient function, decomposed in the
    /// contact cobasis: the `dx`-component is the truncated total
    /// derivative.
    fn d_function(&self, f: &Expr) -> Result<Form> {
        if f.jet_order() > self.r {
            return Err(Error::OrderCap { needed: f.jet_order(), cap: self.r });
        }
        let mut out = Form::zero(self.n, self.m, self.r);
        for i in 1..=self.n {
            out.add_term(vec![Covector::Dx(i)], total_derivative_truncated(f, i, self.r)?);
        }
        for s in 1..=self.m {
            for idx in MultiIndex::all(self.n, 0, self.r) {
                let df = f.plain_partial(&Var::Y { s, idx: idx.clone() });
                if df.is_zero() {
                    continue;
                }
                let cov = if idx.degree() == self.r {
                    Covector::DyTop(s, idx)
                } else {
                    Covector::Omega(s, idx)
                };
                out.add_term(vec![cov], df);
            }
        }
        Ok(out)
    }

    /// `d` of one covector.
    fn d_covector(&self, c: &Covector) -> Form {
        let mut out = Form::zero(self.n, self.m, self.r);
        if let Covector::Omega(s, idx) = c {
            // dω^σ_J = -ω^σ_{Ji} ∧ dx^i, through the top differentials when
            // J has maximal contact degree
            for i in 1..=self.n {
                let up = idx.prepend(i);
                let lead = if up.degree() == self.r {
                    Covector::DyTop(*s, up)
                } else {
                    Covector::Omega(*s, up)
                };
                if let Some((mono, sign)) = merge_signed(&[lead], &[Covector::Dx(i)]) {
                    out.add_term(mono, Expr::from_int(-sign));
                }
            }
        }
        out
    }

    /// Exterior derivative; `d∘d = 0`.
    pub fn exterior_derivative(&self) -> Result<Form> {
        let mut out = Form::zero(self.n, self.m, self.r);
        for (mono, coeff) in &self.terms {
            // df ∧ M
            let df = self.d_function(coeff)?;
            for (one, c1) in &df.terms {
                if let Some((merged, sign)) = merge_signed(one, mono) {
                    out.add_term(merged, c1 * &Expr::from_int(sign));
                }
            }
            // f · dM
            for (pos, c) in mono.iter().enumerate() {
                let dc = self.d_covector(c);
                if dc.is_zero() {
                    continue;
                }
                let sign0 = if pos % 2 == 0 { 1 } else { -1 };
                let before = &mono[..pos];
                let after = &mono[pos + 1..];
                for (two, c2) in &dc.terms {
                    if let Some((merged1, s1)) = merge_signed(two, after) {
                        if let Some((merged, s2)) = merge_signed(before, &merged1) {
                            out.add_term(
                                merged,
                                &(coeff * c2) * &Expr::from_int(sign0 * s1 * s2),
                            );
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// A tangent field spanned by the contact frame `D_i`, `Δ^J_σ`.
#[derive(Clone, Debug)]
pub struct TangentField {
    parts: Vec<(FrameVector, Expr)>,
}

/// One frame vector of the contact-adapted frame.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FrameVector {
    /// The total derivative `D_i`, dual to `dx^i` (all contact pairings
    /// vanish).
    D(u16),
    /// The weighted fibre derivative `Δ^J_σ`.
    Delta(u16, MultiIndex),
}

impl TangentField {
    pub fn d(i: u16) -> Self {
        TangentField { parts: vec![(FrameVector::D(i), Expr::one())] }
    }

    pub fn delta(s: u16, idx: MultiIndex) -> Self {
        TangentField { parts: vec![(FrameVector::Delta(s, idx), Expr::one())] }
    }

    pub fn scaled(self, f: Expr) -> Self {
        TangentField {
            parts: self
                .parts
                .into_iter()
                .map(|(v, c)| (v, &c * &f))
                .collect(),
        }
    }

    pub fn plus(mut self, other: TangentField) -> Self {
        self.parts.extend(other.parts);
        self
    }
}

/// The frame/cobasis duality: `<D_i, dx^j> = δ`, `<Δ^J_σ, ω^ν_K> = δ δ w(J)`,
/// `<Δ^I_σ, dy^ν_K> = δ δ w(I)` at top order, everything else zero.
fn pairing(v: &FrameVector, c: &Covector) -> Expr {
    match (v, c) {
        (FrameVector::D(i), Covector::Dx(j)) => {
            if i == j {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        (FrameVector::Delta(s, idx), Covector::Omega(nu, k))
        | (FrameVector::Delta(s, idx), Covector::DyTop(nu, k)) => {
            if s == nu && idx == k {
                Expr::from_rat(idx.weight())
            } else {
                Expr::zero()
            }
        }
        _ => Expr::zero(),
    }
}

/// Interior product `i_V α`; a graded antiderivation.
pub fn interior(v: &TangentField, form: &Form) -> Form {
    let mut out = Form::zero(form.n, form.m, form.r);
    for (frame, coeff) in &v.parts {
        for (mono, c) in &form.terms {
            for (pos, cv) in mono.iter().enumerate() {
                let p = pairing(frame, cv);
                if p.is_zero() {
                    continue;
                }
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                let mut rest = mono.clone();
                rest.remove(pos);
                out.add_term(rest, &(&(c * &p) * coeff) * &Expr::from_int(sign));
            }
        }
    }
    out
}

/// The globally defined operator
/// `Kα = i_{D_{j_1}} i_{Δ^{j_1..j_{r-1}}_σ} (ω^σ_{j_2..j_{r-1}} ∧ α)` on
/// horizontal forms (implied summation over all repeated indices); requires
/// `r >= 2`.
pub fn k_operator(form: &Form) -> Result<Form> {
    let (n, m, r) = (form.n, form.m, form.r);
    if r < 2 {
        return Err(Error::ShapeMismatch(
            "the K operator needs a chart of order at least 2".into(),
        ));
    }
    if !form.is_horizontal() {
        return Err(Error::NotHorizontal);
    }
    let mut out = Form::zero(n, m, r);
    for tuple in crate::multiindex::ordered_tuples(n, r - 1) {
        let delta_idx = MultiIndex::of(n, &tuple);
        let omega_idx = MultiIndex::of(n, &tuple[1..]);
        let j1 = tuple[0];
        for s in 1..=m {
            let inner = Form::omega(n, m, r, s, omega_idx.clone()).wedge(form)?;
            let step1 = interior(&TangentField::delta(s, delta_idx.clone()), &inner);
            let step2 = interior(&TangentField::d(j1), &step1);
            out = out.add(&step2)?;
        }
    }
    Ok(out)
}

/// Witness of the contact structure theorem: `ρ = Σ ω^σ_J ∧ Φ^J_σ +
/// Σ dω^σ_I ∧ Ψ^I_σ`.
#[derive(Clone, Debug)]
pub struct ContactWitness {
    pub phi: Vec<((u16, MultiIndex), Form)>,
    pub psi: Vec<((u16, MultiIndex), Form)>,
}

/// Decides contactness of a form of degree `1 <= q <= n` and returns the
/// structure-theorem decomposition when it exists. In the contact cobasis
/// the question reduces to a constant-coefficient linear solve on the
/// `ω`-free sector.
pub fn is_contact(form: &Form) -> Result<(bool, Option<ContactWitness>)> {
    let (n, m, r) = (form.n, form.m, form.r);
    let q = form
        .degree()
        .ok_or_else(|| Error::ShapeMismatch("contact test needs a homogeneous degree".into()))?;
    if q < 1 || q > n as usize {
        return Err(Error::ShapeMismatch(format!(
            "contact test defined for degree 1..=n, got {q}"
        )));
    }
    // split off the monomials carrying at least one ω: they are manifestly
    // in the ideal and directly give Φ-terms
    let mut pure = Form::zero(n, m, r);
    let mut phi: BTreeMap<(u16, MultiIndex), Form> = BTreeMap::new();
    for (mono, coeff) in &form.terms {
        let omega_pos = mono
            .iter()
            .position(|c| matches!(c, Covector::Omega(..)));
        match omega_pos {
            None => pure.add_term(mono.clone(), coeff.clone()),
            Some(pos) => {
                let Covector::Omega(s, idx) = mono[pos].clone() else {
                    unreachable!()
                };
                let mut rest = mono.clone();
                rest.remove(pos);
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                let entry = phi
                    .entry((s, idx))
                    .or_insert_with(|| Form::zero(n, m, r));
                entry.add_term(rest, coeff * &Expr::from_int(sign));
            }
        }
    }
    if q == 1 {
        let ok = pure.is_zero();
        let witness = ok.then(|| ContactWitness {
            phi: phi.into_iter().collect(),
            psi: Vec::new(),
        });
        return Ok((ok, witness));
    }
    // the ω-free part must be Σ dω^σ_I ∧ Ψ^I_σ with ω-free Ψ
    let mut generators: Vec<((u16, MultiIndex), Vec<Covector>, Form)> = Vec::new();
    for s in 1..=m {
        for idx in MultiIndex::of_degree(n, r.saturating_sub(1)) {
            if r == 0 {
                continue;
            }
            let d_omega = Form::zero(n, m, r).d_covector(&Covector::Omega(s, idx.clone()));
            for mono in pure_monomials(n, m, r, q - 2) {
                let mut product = Form::zero(n, m, r);
                for (dm, dc) in &d_omega.terms {
                    if let Some((merged, sign)) = merge_signed(dm, &mono) {
                        product.add_term(merged, dc * &Expr::from_int(sign));
                    }
                }
                if !product.is_zero() {
                    generators.push(((s, idx.clone()), mono.clone(), product));
                }
            }
        }
    }
    let solution = solve_in_span(
        &generators.iter().map(|(_, _, g)| g.clone()).collect::<Vec<_>>(),
        &pure,
    );
    match solution {
        None => Ok((false, None)),
        Some(coeffs) => {
            let mut psi: BTreeMap<(u16, MultiIndex), Form> = BTreeMap::new();
            for ((key, mono, _), c) in generators.iter().zip(coeffs) {
                if c.is_zero() {
                    continue;
                }
                let entry = psi
                    .entry(key.clone())
                    .or_insert_with(|| Form::zero(n, m, r));
                entry.add_term(mono.clone(), c);
            }
            Ok((
                true,
                Some(ContactWitness {
                    phi: phi.into_iter().collect(),
                    psi: psi.into_iter().collect(),
                }),
            ))
        }
    }
}

/// All strictly increasing ω-free wedge monomials of a given degree.
fn pure_monomials(n: u16, m: u16, r: usize, degree: usize) -> Vec<Vec<Covector>> {
    let mut basis: Vec<Covector> = Vec::new();
    for i in 1..=n {
        basis.push(Covector::Dx(i));
    }
    for s in 1..=m {
        for idx in MultiIndex::of_degree(n, r) {
            basis.push(Covector::DyTop(s, idx));
        }
    }
    basis.sort();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(
        basis: &[Covector],
        start: usize,
        left: usize,
        cur: &mut Vec<Covector>,
        out: &mut Vec<Vec<Covector>>,
    ) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for k in start..basis.len() {
            cur.push(basis[k].clone());
            rec(basis, k + 1, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(&basis, 0, degree, &mut cur, &mut out);
    out
}

/// Pattern test for strongly contact forms of degree `q > n`: membership in
/// the span of wedge products of `q - n + 1` contact generators (ω's and
/// dω's) with arbitrary cobasis monomials.
pub fn is_strongly_contact(form: &Form) -> Result<bool> {
    let (n, m, r) = (form.n, form.m, form.r);
    let q = form
        .degree()
        .ok_or_else(|| Error::ShapeMismatch("strong-contact test needs a homogeneous degree".into()))?;
    if q <= n as usize {
        return Err(Error::ShapeMismatch(format!(
            "strongly contact forms have degree above n, got {q}"
        )));
    }
    let need = q - n as usize + 1;
    // contact generators: ω^σ_J (degree 1), dω^σ_I for |I| = r-1 (degree 2)
    let mut gen1: Vec<Form> = Vec::new();
    let mut gen2: Vec<Form> = Vec::new();
    for s in 1..=m {
        for idx in MultiIndex::all(n, 0, r.saturating_sub(1)) {
            gen1.push(Form::covector(n, m, r, Covector::Omega(s, idx.clone())));
            if idx.degree() == r - 1 {
                let mut d = Form::zero(n, m, r);
                let dc = Form::zero(n, m, r).d_covector(&Covector::Omega(s, idx.clone()));
                for (k, c) in &dc.terms {
                    d.add_term(k.clone(), c.clone());
                }
                gen2.push(d);
            }
        }
    }
    // all products of `need` generators with total degree <= q
    let mut products: Vec<Form> = vec![Form::function(n, m, r, Expr::one())];
    for _ in 0..need {
        let mut next = Vec::new();
        for p in &products {
            for g in gen1.iter().chain(gen2.iter()) {
                let w = p.wedge(g)?;
                if !w.is_zero() && w.degree().map(|d| d <= q).unwrap_or(false) {
                    next.push(w);
                }
            }
        }
        products = next;
    }
    let mut generators = Vec::new();
    let mut seen = BTreeSet::new();
    for p in products {
        let d = p.degree().unwrap_or(0);
        if q < d {
            continue;
        }
        for mono in all_monomials(n, m, r, q - d) {
            let mut g = Form::zero(n, m, r);
            for (k, c) in &p.terms {
                if let Some((merged, sign)) = merge_signed(k, &mono) {
                    g.add_term(merged, c * &Expr::from_int(sign));
                }
            }
            if !g.is_zero() {
                let key: Vec<(Vec<Covector>, String)> = g
                    .terms
                    .iter()
                    .map(|(k, c)| (k.clone(), format!("{c}")))
                    .collect();
                if seen.insert(key) {
                    generators.push(g);
                }
            }
        }
    }
    Ok(solve_in_span(&generators, form).is_some())
}

/// All strictly increasing wedge monomials of a degree over the full cobasis.
fn all_monomials(n: u16, m: u16, r: usize, degree: usize) -> Vec<Vec<Covector>> {
    let mut basis = Cobasis::for_chart(n, m, r);
    basis.sort();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(
        basis: &[Covector],
        start: usize,
        left: usize,
        cur: &mut Vec<Covector>,
        out: &mut Vec<Vec<Covector>>,
    ) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for k in start..basis.len() {
            cur.push(basis[k].clone());
            rec(basis, k + 1, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(&basis, 0, degree, &mut cur, &mut out);
    out
}

/// Solves `Σ c_k g_k = target` for expression coefficients `c_k` when the
/// generators have rational coefficients; Gaussian elimination with the
/// expression-valued right-hand side.
#[allow(clippy::needless_range_loop)]
fn solve_in_span(generators: &[Form], target: &Form) -> Option<Vec<Expr>> {
    // collect the row space
    let mut rows: BTreeSet<Vec<Covector>> = BTreeSet::new();
    for g in generators {
        for k in g.terms.keys() {
            rows.insert(k.clone());
        }
    }
    for k in target.terms.keys() {
        rows.insert(k.clone());
    }
    let rows: Vec<Vec<Covector>> = rows.into_iter().collect();
    let mut a: Vec<Vec<Rat>> = rows
        .iter()
        .map(|row| {
            generators
                .iter()
                .map(|g| g.coeff(row).as_constant().expect("constant generator"))
                .collect()
        })
        .collect();
    let mut rhs: Vec<Expr> = rows.iter().map(|row| target.coeff(row)).collect();
    let ncols = generators.len();
    let nrows = rows.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut row = 0usize;
    for col in 0..ncols {
        let Some(p) = (row..nrows).find(|&ri| !a[ri][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        rhs.swap(row, p);
        let inv = a[row][col].clone().recip();
        for c in col..ncols {
            a[row][c] = &a[row][c] * &inv;
        }
        rhs[row] = rhs[row].clone() * inv.clone();
        for ri in 0..nrows {
            if ri != row && !a[ri][col].is_zero() {
                let f = a[ri][col].clone();
                for c in col..ncols {
                    a[ri][c] = &a[ri][c] - &(&f * &a[row][c]);
                }
                rhs[ri] = &rhs[ri] - &(rhs[row].clone() * Expr::from_rat(f));
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
        if row == nrows {
            break;
        }
    }
    // consistency: zero rows must have zero right-hand side
    for ri in row..nrows {
        if !rhs[ri].is_zero() {
            return None;
        }
    }
    let mut solution = vec![Expr::zero(); ncols];
    for (col, pv) in pivot_of_col.iter().enumerate() {
        if let Some(ri) = pv {
            solution[col] = rhs[*ri].clone();
        }
    }
    Some(solution)
}

/// A form on the curve-parameter space: wedge monomials of `dt^k` with
/// coefficients polynomial in the parameters.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParamForm {
    n: u16,
    terms: BTreeMap<Vec<u16>, Expr>,
}

impl ParamForm {
    pub fn zero(n: u16) -> Self {
        ParamForm { n, terms: BTreeMap::new() }
    }

    pub fn function(n: u16, f: Expr) -> Self {
        let mut out = Self::zero(n);
        out.add_term(Vec::new(), f);
        out
    }

    /// The differential of a parameter-space function.
    pub fn differential(n: u16, f: &Expr) -> Self {
        let mut out = Self::zero(n);
        for k in 1..=n {
            out.add_term(vec![k], f.plain_partial(&Var::T { k }));
        }
        out
    }

    pub fn add_term(&mut self, mono: Vec<u16>, coeff: Expr) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &ParamForm) -> ParamForm {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn wedge(&self, other: &ParamForm) -> ParamForm {
        let mut out = ParamForm::zero(self.n);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                if let Some((mono, sign)) = merge_signed(ka, kb) {
                    out.add_term(mono, &(ca * cb) * &Expr::from_int(sign));
                }
            }
        }
        out
    }

    pub fn scale(&self, f: &Expr) -> ParamForm {
        let mut out = ParamForm::zero(self.n);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c * f);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &Expr)> {
        self.terms.iter()
    }
}

/// Pullback `[j^r γ]^* α` along the prolonged immersion of `γ`: substitutes
/// the invariants of the symbolic jet for the fibre coordinates and the
/// parameter differentials for the cobasis.
pub fn pullback_immersion(form: &Form, gamma: &[Expr]) -> Result<ParamForm> {
    let (n, m, r) = (form.n, form.m, form.r);
    if gamma.len() != (n + m) as usize {
        return Err(Error::ShapeMismatch(format!(
            "immersion has {} components, chart expects {}",
            gamma.len(),
            n + m
        )));
    }
    let jet: VelocityJet = prolong_immersion_symbolic(gamma, n, r)?;
    let det = crate::grassmann::regularity_det(&jet, &(1..=n).collect::<Vec<_>>())?;
    if det.is_zero() {
        return Err(Error::NotRegular(
            "immersion is singular with respect to the chart split".into(),
        ));
    }
    let adapted = crate::grassmann::invariants(&jet)?;
    // coefficient substitution x^i -> γ^i(t), y^σ_J -> y^σ_J(t)
    let mut subst: BTreeMap<Var, Expr> = BTreeMap::new();
    for i in 1..=n {
        subst.insert(Var::XBase { k: i }, adapted.x(i));
    }
    for ((s, idx), e) in adapted.ys() {
        subst.insert(Var::Y { s: *s, idx: idx.clone() }, e.clone());
    }
    let covector_pullback = |c: &Covector| -> Result<ParamForm> {
        match c {
            Covector::Dx(i) => Ok(ParamForm::differential(n, &adapted.x(*i))),
            Covector::Omega(s, j) => {
                let dyj = ParamForm::differential(n, &adapted.y(*s, j));
                let mut out = dyj;
                for i in 1..=n {
                    let yij = adapted.y(*s, &j.prepend(i));
                    let dxi = ParamForm::differential(n, &adapted.x(i));
                    out = out.add(&dxi.scale(&(-&yij)));
                }
                Ok(out)
            }
            Covector::DyTop(s, idx) => Ok(ParamForm::differential(n, &adapted.y(*s, idx))),
        }
    };
    let mut out = ParamForm::zero(n);
    for (mono, coeff) in &form.terms {
        let mut acc = ParamForm::function(n, coeff.subst(&subst)?);
        for c in mono {
            acc = acc.wedge(&covector_pullback(c)?);
            if acc.is_zero() {
                break;
            }
        }
        out = out.add(&acc);
    }
    Ok(out)
}

/// Pullback of a form through the projection dropping jet orders above `r`:
/// re-expresses an order-`r` form on the order-`r+extra` chart, writing each
/// former top differential `dy^σ_I` as `ω^σ_I + y^σ_{jI} dx^j`.
pub fn promote(form: &Form, extra: usize) -> Result<Form> {
    let (n, m, r) = (form.n, form.m, form.r);
    let r2 = r + extra;
    let mut out = Form::zero(n, m, r2);
    for (mono, coeff) in &form.terms {
        let mut acc = Form::function(n, m, r2, coeff.clone());
        for c in mono {
            let promoted = match c {
                Covector::Dx(i) => Form::dx(n, m, r2, *i),
                Covector::Omega(s, j) => Form::omega(n, m, r2, *s, j.clone()),
                Covector::DyTop(s, idx) => {
                    let mut f = Form::omega(n, m, r2, *s, idx.clone());
                    for j in 1..=n {
                        let y = Expr::var(Var::Y { s: *s, idx: idx.prepend(j) });
                        f = f.add(&Form::dx(n, m, r2, j).scale(&y))?;
                    }
                    f
                }
            };
            acc = acc.wedge(&promoted)?;
        }
        out = out.add(&acc)?;
    }
    Ok(out)
}

/// Pullback of a barred-chart form to the unbarred chart of a transition:
/// coefficients are substituted and each barred covector is expanded through
/// the exterior derivative of its defining functions.
pub fn transition_pullback(form: &Form, t: &TransitionData) -> Result<Form> {
    let (n, m, r) = (form.n, form.m, form.r);
    if t.n() != n || t.m() != m || t.order() < r {
        return Err(Error::ShapeMismatch(
            "transition data does not cover the form's chart".into(),
        ));
    }
    let subst = t.barred_substitution();
    let model = Form::zero(n, m, r);
    let covector_pullback = |c: &Covector| -> Result<Form> {
        match c {
            Covector::Dx(i) => model.d_function(&t.xbar(*i)),
            Covector::Omega(s, j) => {
                let mut f = model.d_function(&t.ybar(*s, j))?;
                for i in 1..=n {
                    let yij = t.ybar(*s, &j.prepend(i));
                    f = f.add(&model.d_function(&t.xbar(i))?.scale(&(-&yij)))?;
                }
                Ok(f)
            }
            Covector::DyTop(s, idx) => model.d_function(&t.ybar(*s, idx)),
        }
    };
    let mut out = Form::zero(n, m, r);
    for (mono, coeff) in &form.terms {
        let mut acc = Form::function(n, m, r, coeff.subst(&subst)?);
        for c in mono {
            acc = acc.wedge(&covector_pullback(c)?)?;
            if acc.is_zero() {
                break;
            }
        }
        out = out.add(&acc)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartSpec;
    use crate::expr::parse;
    use crate::ratio::rat;
    use crate::sample::Sampler;

    fn mi(n: u16, e: &[u16]) -> MultiIndex {
        MultiIndex::of(n, e)
    }

    #[test]
    fn cobasis_count_matches_coordinate_count() {
        for n in 1..=3u16 {
            for m in 1..=2u16 {
                for r in 1..=3usize {
                    let chart = ChartSpec::adapted(n, m, r);
                    assert_eq!(
                        Cobasis::for_chart(n, m, r).len(),
                        chart.adapted_coordinate_count()
                    );
                }
            }
        }
    }

    #[test]
    fn wedge_antisymmetry() {
        let (n, m, r) = (2u16, 1u16, 2usize);
        let dx1 = Form::dx(n, m, r, 1);
        assert!(dx1.wedge(&dx1).unwrap().is_zero());
        let w = Form::omega(n, m, r, 1, MultiIndex::empty(n));
        let lhs = w.wedge(&dx1).unwrap();
        let rhs = dx1.wedge(&w).unwrap().neg();
        assert_eq!(lhs, rhs);
        assert_eq!(Form::theta0(n, m, r).degree(), Some(2));
    }

    #[test]
    fn wedge_is_associative_on_random_forms() {
        let (n, m, r) = (2u16, 1u16, 2usize);
        let chart = ChartSpec::adapted(n, m, r);
        let mut s = Sampler::new(13);
        let random_form = |s: &mut Sampler| {
            let mut f = Form::zero(n, m, r);
            f.add_term(vec![Covector::Dx(1)], s.poly_on_chart(&chart, 1, 2));
            f.add_term(
                vec![Covector::Omega(1, MultiIndex::empty(n))],
                s.poly_on_chart(&chart, 1, 2),
            );
            f
        };
        for _ in 0..3 {
            let a = random_form(&mut s);
            let b = random_form(&mut s);
            let c = random_form(&mut s);
            let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
            let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn d_of_fibre_coordinate() {
        // d(y¹) = ω¹ + y¹_1 dx¹ on the n = m = r = 1 chart
        let (n, m, r) = (1u16, 1u16, 1usize);
        let y = Form::function(n, m, r, Expr::var(Var::Y { s: 1, idx: MultiIndex::empty(1) }));
        let d = y.exterior_derivative().unwrap();
        let mut expect = Form::omega(n, m, r, 1, MultiIndex::empty(1));
        expect = expect
            .add(&Form::dx(n, m, r, 1).scale(&Expr::var(Var::Y { s: 1, idx: mi(1, &[1]) })))
            .unwrap();
        assert_eq!(d, expect);
    }

    #[test]
    fn d_of_contact_covector() {
        // dω¹ = -ω¹_1 ∧ dx¹ at r = 2, n = 1
        let (n, m, r) = (1u16, 1u16, 2usize);
        let w = Form::omega(n, m, r, 1, MultiIndex::empty(1));
        let d = w.exterior_derivative().unwrap();
        let expect = Form::omega(n, m, r, 1, mi(1, &[1]))
            .wedge(&Form::dx(n, m, r, 1))
            .unwrap()
            .neg();
        assert_eq!(d, expect);
    }

    #[test]
    fn dd_vanishes() {
        let (n, m, r) = (2u16, 2u16, 2usize);
        let chart = ChartSpec::adapted(n, m, r);
        let mut s = Sampler::new(17);
        for _ in 0..5 {
            let f = Form::function(n, m, r, s.poly_on_chart(&chart, 2, 5));
            let dd = f
                .exterior_derivative()
                .unwrap()
                .exterior_derivative()
                .unwrap();
            assert!(dd.is_zero(), "dd f != 0: {dd:?}");
        }
        // and on covectors
        for s_lbl in 1..=m {
            for idx in MultiIndex::all(n, 0, r - 1) {
                let w = Form::omega(n, m, r, s_lbl, idx);
                let dd = w
                    .exterior_derivative()
                    .unwrap()
                    .exterior_derivative()
                    .unwrap();
                assert!(dd.is_zero());
            }
        }
    }

    #[test]
    fn interior_duality() {
        let (n, m, r) = (2u16, 1u16, 2usize);
        // i_{D_1} dx¹ = 1
        let got = interior(&TangentField::d(1), &Form::dx(n, m, r, 1));
        assert_eq!(got, Form::function(n, m, r, Expr::one()));
        // i_{D_1} dx² = 0, i_{D_1} ω¹ = 0
        assert!(interior(&TangentField::d(1), &Form::dx(n, m, r, 2)).is_zero());
        assert!(interior(
            &TangentField::d(1),
            &Form::omega(n, m, r, 1, MultiIndex::empty(n))
        )
        .is_zero());
        // i_{Δ¹_1} ω¹ = 0 (index degrees differ); i_{Δ¹_1} ω¹_1 = 1
        assert!(interior(
            &TangentField::delta(1, mi(n, &[1])),
            &Form::omega(n, m, r, 1, MultiIndex::empty(n))
        )
        .is_zero());
        assert_eq!(
            interior(
                &TangentField::delta(1, mi(n, &[1])),
                &Form::omega(n, m, r, 1, mi(n, &[1]))
            ),
            Form::function(n, m, r, Expr::one())
        );
        // weighted pairing at a mixed index
        assert_eq!(
            interior(
                &TangentField::delta(1, mi(n, &[1, 2])),
                &Form::dy_top(n, m, r, 1, mi(n, &[1, 2]))
            ),
            Form::function(n, m, r, Expr::from_rat(rat(1, 2)))
        );
    }

    #[test]
    fn interior_is_an_antiderivation() {
        let (n, m, r) = (2u16, 1u16, 2usize);
        let chart = ChartSpec::adapted(n, m, r);
        let mut s = Sampler::new(19);
        let rand_one_form = |s: &mut Sampler| {
            let mut f = Form::zero(n, m, r);
            f.add_term(vec![Covector::Dx(1)], s.poly_on_chart(&chart, 1, 2));
            f.add_term(vec![Covector::Dx(2)], s.poly_on_chart(&chart, 1, 2));
            f.add_term(
                vec![Covector::Omega(1, MultiIndex::empty(n))],
                s.poly_on_chart(&chart, 1, 2),
            );
            f
        };
        for field in [TangentField::d(1), TangentField::delta(1, mi(n, &[2]))] {
            let a = rand_one_form(&mut s);
            let b = rand_one_form(&mut s);
            let ab = a.wedge(&b).unwrap();
            let lhs = interior(&field, &ab);
            let rhs = interior(&field, &a)
                .wedge(&b)
                .unwrap()
                .sub(&a.wedge(&interior(&field, &b)).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn k_operator_on_horizontal_forms() {
        // n = m = 1, r = 2: the K images of f θ0 and ω_1 ∧ ω vanish
        let (n, m, r) = (1u16, 1u16, 2usize);
        let chart = ChartSpec::adapted(n, m, 1);
        let mut s = Sampler::new(29);
        let f = s.poly_on_chart(&chart, 2, 4);
        let alpha = Form::theta0(n, m, r).scale(&f);
        assert!(k_operator(&alpha).unwrap().is_zero());
        let w1w = Form::omega(n, m, r, 1, mi(1, &[1]))
            .wedge(&Form::omega(n, m, r, 1, MultiIndex::empty(1)))
            .unwrap();
        assert!(k_operator(&w1w).unwrap().is_zero());
        // non-horizontal input is rejected
        let bad = Form::dy_top(n, m, r, 1, mi(1, &[1, 1]));
        assert!(matches!(k_operator(&bad), Err(Error::NotHorizontal)));
        // r = 1 charts have no K operator
        let low = Form::theta0(1, 1, 1);
        assert!(k_operator(&low).is_err());
    }

    #[test]
    fn k_operator_detects_asymmetry() {
        // n = 2, m = 2, r = 2: K of F^{i0,i1}_{σ0,σ1} ω^{σ0}_{i0} ∧ ω^{σ1} ∧ θ_{i1}
        // vanishes for the symmetric F but not for an asymmetric one
        let (n, m, r) = (2u16, 2u16, 2usize);
        let theta = |i1: u16| -> Form {
            // θ_{i1} ~ ε_{i1 i2} dx^{i2} (n = 2)
            let mut f = Form::zero(n, m, r);
            let other = if i1 == 1 { 2 } else { 1 };
            let sign = if i1 == 1 { 1 } else { -1 };
            f.add_term(vec![Covector::Dx(other)], Expr::from_int(sign));
            f
        };
        let block = |f: i64, g: i64| -> Form {
            // F^{12}_{12} ω^1_1∧ω^2∧θ_2 + F^{12}_{21} ω^2_1∧ω^1∧θ_2: K gives
            // (F^{12}_{12} - F^{12}_{21}) ω^1∧ω^2
            let t1 = Form::omega(n, m, r, 1, mi(n, &[1]))
                .wedge(&Form::omega(n, m, r, 2, MultiIndex::empty(n)))
                .unwrap()
                .wedge(&theta(2))
                .unwrap()
                .scale(&Expr::from_int(f));
            let t2 = Form::omega(n, m, r, 2, mi(n, &[1]))
                .wedge(&Form::omega(n, m, r, 1, MultiIndex::empty(n)))
                .unwrap()
                .wedge(&theta(2))
                .unwrap()
                .scale(&Expr::from_int(g));
            t1.add(&t2).unwrap()
        };
        // the (σ0, σ1)-symmetric combination is in the kernel of K, the
        // asymmetric one is not
        assert!(k_operator(&block(3, 3)).unwrap().is_zero());
        assert!(!k_operator(&block(3, -3)).unwrap().is_zero());
    }

    #[test]
    fn contact_classification_degree_one() {
        let (n, m, r) = (1u16, 1u16, 2usize);
        let w = Form::omega(n, m, r, 1, MultiIndex::empty(1));
        assert!(is_contact(&w).unwrap().0);
        let dx = Form::dx(n, m, r, 1);
        assert!(!is_contact(&dx).unwrap().0);
        let dy_top = Form::dy_top(n, m, r, 1, mi(1, &[1, 1]));
        assert!(!is_contact(&dy_top).unwrap().0);
    }

    #[test]
    fn contact_classification_degree_two() {
        // n = 2 so that 2-forms are within the structure theorem's range
        let (n, m, r) = (2u16, 1u16, 2usize);
        // ω ∧ dx is contact
        let a = Form::omega(n, m, r, 1, MultiIndex::empty(n))
            .wedge(&Form::dx(n, m, r, 1))
            .unwrap();
        let (ok, witness) = is_contact(&a).unwrap();
        assert!(ok);
        assert!(witness.unwrap().psi.is_empty());
        // dω^1_j (pure part made of dy∧dx) is contact with a Ψ witness
        let w = Form::omega(n, m, r, 1, mi(n, &[1]));
        let dw = w.exterior_derivative().unwrap();
        let (ok, witness) = is_contact(&dw).unwrap();
        assert!(ok);
        assert!(!witness.unwrap().psi.is_empty());
        // dx¹ ∧ dx² is not
        let hor = Form::dx(n, m, r, 1).wedge(&Form::dx(n, m, r, 2)).unwrap();
        assert!(!is_contact(&hor).unwrap().0);
        // reconstruct the form from its witness
        let (_, witness) = is_contact(&dw).unwrap();
        let w = witness.unwrap();
        let mut rebuilt = Form::zero(n, m, r);
        for ((s, idx), phi) in &w.phi {
            rebuilt = rebuilt
                .add(&Form::omega(n, m, r, *s, idx.clone()).wedge(phi).unwrap())
                .unwrap();
        }
        for ((s, idx), psi) in &w.psi {
            let d_omega = Form::omega(n, m, r, *s, idx.clone())
                .exterior_derivative()
                .unwrap();
            rebuilt = rebuilt.add(&d_omega.wedge(psi).unwrap()).unwrap();
        }
        assert_eq!(rebuilt, dw);
    }

    #[test]
    fn contact_forms_vanish_on_holonomic_jets() {
        // pullback of ω^σ_J along graph immersions is identically zero
        let (n, m, r) = (1u16, 1u16, 2usize);
        let t = Expr::var(Var::T { k: 1 });
        let phi = parse("3", &ChartSpec::adapted(1, 1, 1)).unwrap();
        let gamma = vec![t.clone(), &(&t * &t) * &phi + &t];
        for idx in MultiIndex::all(1, 0, 1) {
            let w = Form::omega(n, m, r, 1, idx);
            let pulled = pullback_immersion(&w, &gamma).unwrap();
            assert!(pulled.is_zero());
        }
        // dx pulls back to dt
        let dx = Form::dx(n, m, r, 1);
        let pulled = pullback_immersion(&dx, &gamma).unwrap();
        assert_eq!(pulled, ParamForm::differential(1, &t));
    }

    #[test]
    fn action_integrand_pullback() {
        // λ = ½ y_1² dx pulled back along the graph of y = t² is ½(2t)² dt
        let (n, m, r) = (1u16, 1u16, 1usize);
        let chart = ChartSpec::adapted(n, m, r);
        let lag = parse("y1_1^2/2", &chart).unwrap();
        let lambda = Form::theta0(n, m, r).scale(&lag);
        let t = Expr::var(Var::T { k: 1 });
        let gamma = vec![t.clone(), &t * &t];
        let pulled = pullback_immersion(&lambda, &gamma).unwrap();
        let mut expect = ParamForm::zero(1);
        expect.add_term(vec![1], &(&t * &t) * &Expr::from_int(2));
        assert_eq!(pulled, expect);
    }

    #[test]
    fn contact_ideal_is_d_stable() {
        // d of the contact generators stays contact (degree within 1..=n)
        let (n, m, r) = (2u16, 1u16, 2usize);
        for idx in MultiIndex::all(n, 0, r - 1) {
            let w = Form::omega(n, m, r, 1, idx);
            let dw = w.exterior_derivative().unwrap();
            assert!(is_contact(&dw).unwrap().0);
        }
    }

    #[test]
    fn strong_contact_pattern() {
        // q = 2 > n = 1: ω ∧ ω_1 matches, ω_1 ∧ dx does not
        let (n, m, r) = (1u16, 1u16, 2usize);
        let w = Form::omega(n, m, r, 1, MultiIndex::empty(1));
        let w1 = Form::omega(n, m, r, 1, mi(1, &[1]));
        let good = w.wedge(&w1).unwrap();
        assert!(is_strongly_contact(&good).unwrap());
        let bad = w1.wedge(&Form::dx(n, m, r, 1)).unwrap();
        assert!(!is_strongly_contact(&bad).unwrap());
    }

    #[test]
    fn promote_rewrites_top_differentials() {
        // on the promoted chart, dy^σ_1 = ω^σ_1 + y^σ_{1j} dx^j
        let (n, m) = (1u16, 1u16);
        let dy = Form::dy_top(n, m, 1, 1, mi(1, &[1]));
        let promoted = promote(&dy, 1).unwrap();
        let mut expect = Form::omega(n, m, 2, 1, mi(1, &[1]));
        expect = expect
            .add(
                &Form::dx(n, m, 2, 1).scale(&Expr::var(Var::Y { s: 1, idx: mi(1, &[1, 1]) })),
            )
            .unwrap();
        assert_eq!(promoted, expect);
    }

    #[test]
    fn transition_law_for_contact_forms() {
        // ω̄^σ = P^σ_ν ω^ν on the swap chart
        let t = crate::grassmann::swap_chart(1).unwrap();
        let (n, m, r) = (1u16, 1u16, 1usize);
        let barred_omega = Form::omega(n, m, r, 1, MultiIndex::empty(1));
        let pulled = transition_pullback(&barred_omega, &t).unwrap();
        let expect =
            Form::omega(n, m, r, 1, MultiIndex::empty(1)).scale(&t.p_fib[0][0]);
        assert!(pulled.sub(&expect).unwrap().is_zero());
    }

    #[test]
    fn transition_pullback_commutes_with_d() {
        // naturality of the exterior derivative under chart transitions
        let t = crate::grassmann::swap_chart(2).unwrap();
        let (n, m, r) = (1u16, 1u16, 2usize);
        let chart = ChartSpec::adapted(n, m, 2);
        let mut s = Sampler::new(139);
        for _ in 0..3 {
            let f = s.poly_on_chart(&chart, 2, 3);
            let alpha = Form::omega(n, m, r, 1, mi(1, &[1]))
                .scale(&f)
                .add(&Form::dx(n, m, r, 1).scale(&s.poly_on_chart(&chart, 2, 2)))
                .unwrap();
            let lhs = transition_pullback(&alpha, &t)
                .unwrap()
                .exterior_derivative()
                .unwrap();
            let rhs =
                transition_pullback(&alpha.exterior_derivative().unwrap(), &t).unwrap();
            assert!(lhs.sub(&rhs).unwrap().is_zero());
        }
    }

    #[test]
    fn horizontality_is_chart_independent() {
        // a horizontal form stays horizontal after the swap transition
        let t = crate::grassmann::swap_chart(2).unwrap();
        let (n, m, r) = (1u16, 1u16, 2usize);
        let alpha = Form::omega(n, m, r, 1, mi(1, &[1]))
            .wedge(&Form::dx(n, m, r, 1))
            .unwrap();
        assert!(alpha.is_horizontal());
        let pulled = transition_pullback(&alpha, &t).unwrap();
        assert!(pulled.is_horizontal());
    }
}

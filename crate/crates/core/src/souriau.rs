//! Second-order specialization: the Poincaré-Cartan form `β`, the
//! Lagrange-Souriau form `α = d(ρ^{2,1})*β`, its defining conditions, the
//! coefficient recurrences, and extraction of the first-order form `σ`.
//!
//! Coefficients are stored at strictly increasing index tuples; the
//! antisymmetries of the `F`/`E`-blocks fill in the rest. Assembly into a
//! [`Form`] and extraction back are inverse basis changes, with the
//! horizontal basis `θ_{i_1..i_k} = i_{∂_{i_k}} ... i_{∂_{i_1}} θ_0`; this
//! is the normalization under which the degree-zero `E`-coefficient of `α`
//! is exactly the Euler-Lagrange expression.
//!
//! `build_alpha` computes the form twice — through the exterior derivative
//! of the pulled-back `β` and through the closed coefficient formulas — and
//! insists the two agree.

use crate::error::{Error, Result};
use crate::expr::{delta_adapted, total_derivative, Expr, Var};
use crate::forms::{
    interior, k_operator, promote, pullback_immersion, Covector, Form, ParamForm, TangentField,
};
use crate::jetgroup::prolong_immersion_symbolic;
use crate::multiindex::{ordered_tuples, permutations_with_parity, MultiIndex};
use crate::ratio::{factorial, rat_int, Rat};
use crate::report::Report;
use crate::variational::{euler_lagrange, helmholtz, AdaptedLagrangian, SourceEquation};
use num_traits::Zero;
use std::collections::BTreeMap;

/// Sorts an index tuple, returning the parity of the sort or `None` when an
/// entry repeats (the antisymmetric coefficient vanishes).
fn sort_parity(tuple: &[u16]) -> Option<(Vec<u16>, i64)> {
    let mut v = tuple.to_vec();
    let mut parity = 1i64;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            parity = -parity;
            j -= 1;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((v, parity))
}

/// Strictly increasing tuples of the given length with entries `1..=max`.
fn increasing_tuples(max: u16, len: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(max: u16, len: usize, start: u16, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in start..=max {
            cur.push(v);
            rec(max, len, v + 1, cur, out);
            cur.pop();
        }
    }
    rec(max, len, 1, &mut cur, &mut out);
    out
}

/// `θ_{i_1..i_k} = i_{∂_{i_k}} ... i_{∂_{i_1}} θ_0` as a form on the chart.
fn theta(n: u16, m: u16, r: usize, tuple: &[u16]) -> Form {
    let mut acc = Form::theta0(n, m, r);
    for &i in tuple {
        acc = interior(&TangentField::d(i), &acc);
    }
    acc
}

/// The Poincaré-Cartan form of a first-order Lagrangian, with its
/// antisymmetrized coefficient table
/// `L^{i_1..i_k}_{σ_1..σ_k} = S⁻ S⁻ ∂^{i_1}_{σ_1} ... ∂^{i_k}_{σ_k} L`.
#[derive(Clone, Debug)]
pub struct PoincareCartanForm {
    pub n: u16,
    pub m: u16,
    l_table: BTreeMap<(Vec<u16>, Vec<u16>), Expr>,
    /// The assembled n-form on the first-order chart.
    pub form: Form,
}

impl PoincareCartanForm {
    /// Coefficient at arbitrary tuples, via antisymmetry.
    pub fn l(&self, i: &[u16], s: &[u16]) -> Expr {
        let (Some((i_sorted, pi)), Some((s_sorted, ps))) = (sort_parity(i), sort_parity(s))
        else {
            return Expr::zero();
        };
        match self.l_table.get(&(i_sorted, s_sorted)) {
            Some(e) => e * &Expr::from_int(pi * ps),
            None => Expr::zero(),
        }
    }
}

/// Builds `β` for a first-order Lagrangian.
pub fn build_beta(lag: &AdaptedLagrangian) -> Result<PoincareCartanForm> {
    if lag.r != 1 {
        return Err(Error::NotFirstOrder(lag.r));
    }
    let (n, m) = (lag.n, lag.m);
    if lag.expr.jet_order() > 1 {
        return Err(Error::NotFirstOrder(lag.expr.jet_order()));
    }
    let mut l_table = BTreeMap::new();
    let kmax = (n as usize).min(m as usize);
    for k in 0..=kmax {
        for i in increasing_tuples(n, k) {
            for s in increasing_tuples(m, k) {
                // S⁻_i S⁻_σ ∂^{i_1}_{σ_1} ... ∂^{i_k}_{σ_k} L over the tuples
                let mut acc = Expr::zero();
                for (pi, par_i) in permutations_with_parity(k) {
                    for (ps, par_s) in permutations_with_parity(k) {
                        let mut d = lag.expr.clone();
                        for l in 0..k {
                            d = d.plain_partial(&Var::Y {
                                s: s[ps[l]],
                                idx: MultiIndex::of(n, &[i[pi[l]]]),
                            });
                            if d.is_zero() {
                                break;
                            }
                        }
                        acc = &acc + &(d * rat_int(par_i * par_s));
                    }
                }
                let norm = Rat::new(1.into(), factorial(k) * factorial(k));
                l_table.insert((i.clone(), s.clone()), acc * norm);
            }
        }
    }
    // assemble over increasing keys with unit weight: the 1/k! of the
    // ordered-sum display cancels against the orderings of each tuple pair
    let mut form = Form::zero(n, m, 1);
    for ((i, s), coeff) in &l_table {
        if coeff.is_zero() {
            continue;
        }
        let mut pattern = Form::function(n, m, 1, Expr::one());
        for &sig in s {
            pattern = pattern.wedge(&Form::omega(n, m, 1, sig, MultiIndex::empty(n)))?;
        }
        pattern = pattern.wedge(&theta(n, m, 1, i))?;
        form = form.add(&pattern.scale(coeff))?;
    }
    Ok(PoincareCartanForm { n, m, l_table, form })
}

/// Key of an `F`-coefficient: `(i_0, increasing rest i, σ_0, increasing rest σ)`.
pub type FKey = (u16, Vec<u16>, u16, Vec<u16>);

/// `F`-coefficient table.
pub type FTable = BTreeMap<FKey, Expr>;

/// `E`-coefficients keyed by `(increasing i-tuple, increasing σ-tuple)`.
pub type ETable = BTreeMap<(Vec<u16>, Vec<u16>), Expr>;

/// The Lagrange-Souriau form with its `F`/`E` coefficient tables on the
/// second-order chart.
#[derive(Clone, Debug)]
pub struct LagrangeSouriauForm {
    pub n: u16,
    pub m: u16,
    /// `F^{i_0; i_1..i_k}_{σ_0; σ_1..σ_k}` at increasing rest-tuples.
    f_table: FTable,
    /// `E^{i_1..i_k}_{σ_0..σ_k}` at increasing tuples.
    e_table: ETable,
    /// The assembled (n+1)-form on the second-order chart.
    pub form: Form,
}

impl LagrangeSouriauForm {
    /// `F`-coefficient at arbitrary rest-tuples, via the antisymmetries.
    pub fn f(&self, i0: u16, i: &[u16], s0: u16, s: &[u16]) -> Expr {
        let (Some((i_sorted, pi)), Some((s_sorted, ps))) = (sort_parity(i), sort_parity(s))
        else {
            return Expr::zero();
        };
        match self.f_table.get(&(i0, i_sorted, s0, s_sorted)) {
            Some(e) => e * &Expr::from_int(pi * ps),
            None => Expr::zero(),
        }
    }

    /// `E`-coefficient at arbitrary tuples.
    pub fn e(&self, i: &[u16], s: &[u16]) -> Expr {
        let (Some((i_sorted, pi)), Some((s_sorted, ps))) = (sort_parity(i), sort_parity(s))
        else {
            return Expr::zero();
        };
        match self.e_table.get(&(i_sorted, s_sorted)) {
            Some(e) => e * &Expr::from_int(pi * ps),
            None => Expr::zero(),
        }
    }

    /// The Euler-Lagrange components `E_σ` (the k = 0 block).
    pub fn euler_lagrange_components(&self) -> Vec<Expr> {
        (1..=self.m).map(|s| self.e(&[], &[s])).collect()
    }

    pub fn f_entries(&self) -> impl Iterator<Item = (&FKey, &Expr)> {
        self.f_table.iter()
    }

    pub fn e_entries(&self) -> impl Iterator<Item = (&(Vec<u16>, Vec<u16>), &Expr)> {
        self.e_table.iter()
    }

    /// Builds a form directly from coefficient tables (keys must use
    /// strictly increasing rest-tuples); no Lagrangian is involved, so none
    /// of the defining conditions is implied.
    pub fn from_tables(n: u16, m: u16, f_table: FTable, e_table: ETable) -> Result<Self> {
        let form = assemble(n, m, &f_table, &e_table)?;
        Ok(LagrangeSouriauForm { n, m, f_table, e_table, form })
    }
}

/// Extracts the `F`/`E` tables of an LS-patterned horizontal (n+1)-form.
fn extract_tables(form: &Form) -> Result<(FTable, ETable)> {
    let (n, m) = (form.n(), form.m());
    let mut f_table = BTreeMap::new();
    let mut e_table = BTreeMap::new();
    for (mono, coeff) in form.terms() {
        let mut dx_set = Vec::new();
        let mut omega0 = Vec::new();
        let mut omega1 = Vec::new();
        for c in mono {
            match c {
                Covector::Dx(i) => dx_set.push(*i),
                Covector::Omega(s, idx) if idx.is_empty() => omega0.push(*s),
                Covector::Omega(s, idx) if idx.degree() == 1 => {
                    omega1.push((*s, idx.entries()[0]))
                }
                _ => {
                    return Err(Error::ShapeMismatch(format!(
                        "monomial {mono:?} outside the Lagrange-Souriau pattern"
                    )))
                }
            }
        }
        if omega1.len() > 1 {
            return Err(Error::ShapeMismatch(
                "two first-order contact factors in one monomial".into(),
            ));
        }
        let complement: Vec<u16> = (1..=n).filter(|i| !dx_set.contains(i)).collect();
        if let Some((s0, i0)) = omega1.first().copied() {
            let k = omega0.len();
            if complement.len() != k {
                return Err(Error::ShapeMismatch(
                    "dx-degree does not match the F-pattern".into(),
                ));
            }
            // pattern ω^{σ0}_{i0} ∧ ω^Σ ∧ θ_{(i)} has a single monomial;
            // divide out its sign and the k! of the ordered summation
            let mut pattern = Form::covector(n, m, 2, Covector::Omega(s0, MultiIndex::of(n, &[i0])));
            for &sig in &omega0 {
                pattern = pattern.wedge(&Form::omega(n, m, 2, sig, MultiIndex::empty(n)))?;
            }
            pattern = pattern.wedge(&theta(n, m, 2, &complement))?;
            let p = pattern
                .coeff(mono)
                .as_constant()
                .expect("constant pattern");
            if p.is_zero() {
                return Err(Error::Inconsistent("pattern does not cover its monomial".into()));
            }
            let value = coeff.clone() * p.recip();
            f_table.insert((i0, complement, s0, omega0), value);
        } else {
            let k = omega0.len().saturating_sub(1);
            if complement.len() != k {
                return Err(Error::ShapeMismatch(
                    "dx-degree does not match the E-pattern".into(),
                ));
            }
            let mut pattern = Form::function(n, m, 2, Expr::one());
            for &sig in &omega0 {
                pattern = pattern.wedge(&Form::omega(n, m, 2, sig, MultiIndex::empty(n)))?;
            }
            pattern = pattern.wedge(&theta(n, m, 2, &complement))?;
            let p = pattern
                .coeff(mono)
                .as_constant()
                .expect("constant pattern");
            if p.is_zero() {
                return Err(Error::Inconsistent("pattern does not cover its monomial".into()));
            }
            let value = coeff.clone() * p.recip();
            e_table.insert((complement, omega0), value);
        }
    }
    Ok((f_table, e_table))
}

/// Assembles a form from `F`/`E` tables (the inverse of [`extract_tables`]).
pub(crate) fn assemble(n: u16, m: u16, f_table: &FTable, e_table: &ETable) -> Result<Form> {
    let mut form = Form::zero(n, m, 2);
    for ((i0, i, s0, s), coeff) in f_table {
        if coeff.is_zero() {
            continue;
        }
        let mut pattern =
            Form::covector(n, m, 2, Covector::Omega(*s0, MultiIndex::of(n, &[*i0])));
        for &sig in s {
            pattern = pattern.wedge(&Form::omega(n, m, 2, sig, MultiIndex::empty(n)))?;
        }
        pattern = pattern.wedge(&theta(n, m, 2, i))?;
        form = form.add(&pattern.scale(coeff))?;
    }
    for ((i, s), coeff) in e_table {
        if coeff.is_zero() {
            continue;
        }
        let mut pattern = Form::function(n, m, 2, Expr::one());
        for &sig in s {
            pattern = pattern.wedge(&Form::omega(n, m, 2, sig, MultiIndex::empty(n)))?;
        }
        pattern = pattern.wedge(&theta(n, m, 2, i))?;
        form = form.add(&pattern.scale(coeff))?;
    }
    Ok(form)
}

/// Builds the Lagrange-Souriau form of a first-order Lagrangian twice — as
/// `d` of the pulled-back Poincaré-Cartan form and from the closed
/// coefficient formulas — and verifies the two agree coefficient for
/// coefficient.
pub fn build_alpha(lag: &AdaptedLagrangian) -> Result<LagrangeSouriauForm> {
    let (n, m) = (lag.n, lag.m);
    let beta = build_beta(lag)?;
    let alpha_form = promote(&beta.form, 1)?.exterior_derivative()?;
    let (f_table, e_table) = extract_tables(&alpha_form)?;

    // closed formulas: F = ∂^{i0}_{σ0} L^{(i)}_{(σ)} - L^{i0(i)}_{σ0(σ)};
    // E = Σ_j (-1)^j Δ_{σ_j} L^{(i)}_{(σ without j)} - D_{i_0} L^{i_0(i)}_{(σ)}
    let kmax = (n as usize).min(m as usize);
    let mut fails = Vec::new();
    for k in 0..=kmax {
        for i in increasing_tuples(n, k) {
            for s in increasing_tuples(m, k) {
                for i0 in 1..=n {
                    for s0 in 1..=m {
                        let d = beta
                            .l(&i, &s)
                            .plain_partial(&Var::Y { s: s0, idx: MultiIndex::of(n, &[i0]) });
                        let mut full_i = vec![i0];
                        full_i.extend_from_slice(&i);
                        let mut full_s = vec![s0];
                        full_s.extend_from_slice(&s);
                        let closed = &d - &beta.l(&full_i, &full_s);
                        let extracted = lookup_f(&f_table, i0, &i, s0, &s);
                        if !closed.equivalent(&extracted) {
                            fails.push(format!("F^{i0:?},{i:?}_{s0:?},{s:?}"));
                        }
                    }
                }
            }
        }
        // E at k-level: i-tuple of length k, σ-tuple of length k+1
        for i in increasing_tuples(n, k) {
            for s_full in increasing_tuples(m, k + 1) {
                let mut first = Expr::zero();
                for (j, &sj) in s_full.iter().enumerate() {
                    let rest: Vec<u16> = s_full
                        .iter()
                        .enumerate()
                        .filter(|(l, _)| *l != j)
                        .map(|(_, &v)| v)
                        .collect();
                    let sign = if j % 2 == 0 { 1 } else { -1 };
                    let term = beta
                        .l(&i, &rest)
                        .plain_partial(&Var::Y { s: sj, idx: MultiIndex::empty(n) });
                    first = &first + &(term * rat_int(sign));
                }
                let mut second = Expr::zero();
                for i0 in 1..=n {
                    let mut full_i = vec![i0];
                    full_i.extend_from_slice(&i);
                    second = &second + &total_derivative(&beta.l(&full_i, &s_full), i0)?;
                }
                let closed = &first - &second;
                let extracted = lookup_e(&e_table, &i, &s_full);
                if !closed.equivalent(&extracted) {
                    fails.push(format!("E^{i:?}_{s_full:?}"));
                }
            }
        }
    }
    if !fails.is_empty() {
        return Err(Error::Inconsistent(format!(
            "Lagrange-Souriau dual construction disagrees at {}",
            fails.join(", ")
        )));
    }
    Ok(LagrangeSouriauForm { n, m, f_table, e_table, form: alpha_form })
}

fn lookup_f(table: &FTable, i0: u16, i: &[u16], s0: u16, s: &[u16]) -> Expr {
    let (Some((i_sorted, pi)), Some((s_sorted, ps))) = (sort_parity(i), sort_parity(s)) else {
        return Expr::zero();
    };
    match table.get(&(i0, i_sorted, s0, s_sorted)) {
        Some(e) => e * &Expr::from_int(pi * ps),
        None => Expr::zero(),
    }
}

fn lookup_e(table: &ETable, i: &[u16], s: &[u16]) -> Expr {
    let (Some((i_sorted, pi)), Some((s_sorted, ps))) = (sort_parity(i), sort_parity(s)) else {
        return Expr::zero();
    };
    match table.get(&(i_sorted, s_sorted)) {
        Some(e) => e * &Expr::from_int(pi * ps),
        None => Expr::zero(),
    }
}

/// Checks the local form of `Kα = 0`:
/// `S⁻_{i_0..i_k} S⁻_{σ_0..σ_k} F^{i_0..i_k}_{σ_0..σ_k} = 0` for
/// `k = 1..n`, and confirms that the form-level operator agrees (both zero
/// or both nonzero).
pub fn check_ls(alpha: &LagrangeSouriauForm) -> Result<Report> {
    let (n, m) = (alpha.n, alpha.m);
    let mut report = Report::new();
    let mut all_zero = true;
    for k in 1..=n as usize {
        let mut level_zero = true;
        for i_full in ordered_tuples(n, k + 1) {
            for s_full in ordered_tuples(m, k + 1) {
                // S⁻ S⁻ F over both full tuples (i_0..i_k), (σ_0..σ_k)
                let mut acc = Expr::zero();
                for (pi, par_i) in permutations_with_parity(k + 1) {
                    for (ps, par_s) in permutations_with_parity(k + 1) {
                        let iperm: Vec<u16> = pi.iter().map(|&l| i_full[l]).collect();
                        let sperm: Vec<u16> = ps.iter().map(|&l| s_full[l]).collect();
                        let f = alpha.f(iperm[0], &iperm[1..], sperm[0], &sperm[1..]);
                        acc = &acc + &(f * rat_int(par_i * par_s));
                    }
                }
                if !acc.is_zero() {
                    level_zero = false;
                }
            }
        }
        report.check(
            format!("LS antisymmetrized F vanishes at k = {k}"),
            level_zero,
            String::new(),
        );
        all_zero &= level_zero;
    }
    let k_image = k_operator(&alpha.form)?;
    report.check(
        "LS condition agrees with the K operator",
        k_image.is_zero() == all_zero,
        format!("Kα zero: {}, S⁻S⁻F zero: {all_zero}", k_image.is_zero()),
    );
    Ok(report)
}

/// Verifies `dα = 0`, the four componentwise closedness identities, and the
/// derived Helmholtz conditions (h1)-(h3) for the `E_σ` block, confirming
/// they amount to the vanishing of the Helmholtz-Sonin tensor of `E`.
pub fn check_closedness(alpha: &LagrangeSouriauForm) -> Result<Report> {
    let (n, m) = (alpha.n, alpha.m);
    let mut report = Report::new();
    let d_alpha = alpha.form.exterior_derivative()?;
    report.check("dα = 0", d_alpha.is_zero(), String::new());

    let delta = |f: &Expr, s: u16, idx: &MultiIndex| delta_adapted(f, s, idx);
    let e0 = |s: u16| alpha.e(&[], &[s]);
    // (HSa): D_j E^j_{σ0 σ1} + Δ_{σ0} E_{σ1} - Δ_{σ1} E_{σ0} = 0
    {
        let mut ok = true;
        for s0 in 1..=m {
            for s1 in 1..=m {
                let mut acc = Expr::zero();
                for j in 1..=n {
                    acc = &acc + &total_derivative(&alpha.e(&[j], &[s0, s1]), j)?;
                }
                acc = &acc + &delta(&e0(s1), s0, &MultiIndex::empty(n));
                acc = &acc - &delta(&e0(s0), s1, &MultiIndex::empty(n));
                if !acc.is_zero() {
                    ok = false;
                }
            }
        }
        report.check("closedness (HSa)", ok, String::new());
    }
    // (HSb): D_l F^{jl}_{ν,σ} - Δ_σ F^j_ν + Δ^j_ν E_σ + E^j_{ν,σ} = 0
    {
        let mut ok = true;
        for j in 1..=n {
            for nu in 1..=m {
                for sg in 1..=m {
                    let mut acc = Expr::zero();
                    for l in 1..=n {
                        acc = &acc + &total_derivative(&alpha.f(j, &[l], nu, &[sg]), l)?;
                    }
                    acc = &acc - &delta(&alpha.f(j, &[], nu, &[]), sg, &MultiIndex::empty(n));
                    acc = &acc + &delta(&e0(sg), nu, &MultiIndex::of(n, &[j]));
                    acc = &acc + &alpha.e(&[j], &[nu, sg]);
                    if !acc.is_zero() {
                        ok = false;
                    }
                }
            }
        }
        report.check("closedness (HSb)", ok, String::new());
    }
    // (HSc): Δ^{jk}_ν E_σ + ½ (F^{jk}_{ν,σ} + F^{kj}_{ν,σ}) = 0
    {
        let mut ok = true;
        for j in 1..=n {
            for k in 1..=n {
                for nu in 1..=m {
                    for sg in 1..=m {
                        let lhs = delta(&e0(sg), nu, &MultiIndex::of(n, &[j, k]));
                        let sym = &(&alpha.f(j, &[k], nu, &[sg]) + &alpha.f(k, &[j], nu, &[sg]))
                            * &Expr::from_rat(crate::ratio::rat(1, 2));
                        if !(&lhs + &sym).is_zero() {
                            ok = false;
                        }
                    }
                }
            }
        }
        report.check("closedness (HSc)", ok, String::new());
    }
    // (HSd): F^{jl}_{σ,ν} - F^{lj}_{ν,σ} = Δ^l_ν F^j_σ - Δ^j_σ F^l_ν
    {
        let mut ok = true;
        for j in 1..=n {
            for l in 1..=n {
                for sg in 1..=m {
                    for nu in 1..=m {
                        let lhs = &alpha.f(j, &[l], sg, &[nu]) - &alpha.f(l, &[j], nu, &[sg]);
                        let rhs = &delta(&alpha.f(j, &[], sg, &[]), nu, &MultiIndex::of(n, &[l]))
                            - &delta(&alpha.f(l, &[], nu, &[]), sg, &MultiIndex::of(n, &[j]));
                        if !lhs.equivalent(&rhs) {
                            ok = false;
                        }
                    }
                }
            }
        }
        report.check("closedness (HSd)", ok, String::new());
    }
    // (h1)-(h3): the second-order Helmholtz conditions for E_σ
    {
        let mut h1 = true;
        let mut h2 = true;
        let mut h3 = true;
        for s0 in 1..=m {
            for s1 in 1..=m {
                let lhs = &delta(&e0(s1), s0, &MultiIndex::empty(n))
                    - &delta(&e0(s0), s1, &MultiIndex::empty(n));
                let mut rhs = Expr::zero();
                for j in 1..=n {
                    rhs = &rhs + &total_derivative(&delta(&e0(s1), s0, &MultiIndex::of(n, &[j])), j)?;
                    for l in 1..=n {
                        let dd = total_derivative(
                            &total_derivative(
                                &delta(&e0(s1), s0, &MultiIndex::of(n, &[j, l])),
                                l,
                            )?,
                            j,
                        )?;
                        rhs = &rhs - &dd;
                    }
                }
                if !lhs.equivalent(&rhs) {
                    h1 = false;
                }
                for j in 1..=n {
                    let lhs = &delta(&e0(s1), s0, &MultiIndex::of(n, &[j]))
                        + &delta(&e0(s0), s1, &MultiIndex::of(n, &[j]));
                    let mut rhs = Expr::zero();
                    for l in 1..=n {
                        rhs = &rhs
                            + &total_derivative(
                                &delta(&e0(s1), s0, &MultiIndex::of(n, &[j, l])),
                                l,
                            )?;
                    }
                    rhs = &rhs * &Expr::from_int(2);
                    if !lhs.equivalent(&rhs) {
                        h2 = false;
                    }
                    for k in 1..=n {
                        let a = delta(&e0(s1), s0, &MultiIndex::of(n, &[j, k]));
                        let b = delta(&e0(s0), s1, &MultiIndex::of(n, &[j, k]));
                        if !a.equivalent(&b) {
                            h3 = false;
                        }
                    }
                }
            }
        }
        report.check("Helmholtz condition (h1)", h1, String::new());
        report.check("Helmholtz condition (h2)", h2, String::new());
        report.check("Helmholtz condition (h3)", h3, String::new());
        // and they are exactly the Helmholtz-Sonin equations for E_σ
        let eq = SourceEquation::adapted(
            (1..=m).map(|s| alpha.e(&[], &[s])).collect(),
            n,
            m,
            2,
        );
        let h = helmholtz(&eq)?;
        report.check(
            "E_σ satisfies the Helmholtz-Sonin equations",
            h.is_zero() == (h1 && h2 && h3),
            String::new(),
        );
    }
    Ok(report)
}

/// Verifies the E-recurrence
/// `E^{i_1..i_k} = -S⁻_i S⁻_σ (Δ^{i_1}_{σ_0} + D_l Δ^{l i_1}_{σ_0}) E^{i_2..i_k}`
/// and solves for the undetermined constant of the F-recurrence
/// `F^{i_0..i_k} = const · S⁻_σ S⁻_i Δ^{i_0}_{σ_0} F^{i_1..i_k}`, reporting
/// the value found on the first nonvanishing instance.
pub fn check_recurrences(alpha: &LagrangeSouriauForm) -> Result<Report> {
    let (n, m) = (alpha.n, alpha.m);
    let mut report = Report::new();
    for k in 1..=n as usize {
        let mut ok = true;
        let mut seen = false;
        for i_full in ordered_tuples(n, k) {
            for s_full in ordered_tuples(m, k + 1) {
                let lhs = alpha.e(&i_full, &s_full);
                // S⁻ over (i_1..i_k) and (σ_0..σ_k) of
                // (Δ^{i_1}_{σ_0} + D_l Δ^{l i_1}_{σ_0}) E^{(i_2..)}_{(σ_1..)}
                let mut acc = Expr::zero();
                for (pi, par_i) in permutations_with_parity(k) {
                    for (ps, par_s) in permutations_with_parity(k + 1) {
                        let iperm: Vec<u16> = pi.iter().map(|&l| i_full[l]).collect();
                        let sperm: Vec<u16> = ps.iter().map(|&l| s_full[l]).collect();
                        let inner = alpha.e(&iperm[1..], &sperm[1..]);
                        let mut term =
                            delta_adapted(&inner, sperm[0], &MultiIndex::of(n, &[iperm[0]]));
                        for l in 1..=n {
                            let d = delta_adapted(
                                &inner,
                                sperm[0],
                                &MultiIndex::of(n, &[l, iperm[0]]),
                            );
                            term = &term + &total_derivative(&d, l)?;
                        }
                        acc = &acc + &(term * rat_int(par_i * par_s));
                    }
                }
                let norm = Rat::new(1.into(), factorial(k) * factorial(k + 1));
                let rhs = -(acc * norm);
                if !lhs.is_zero() || !rhs.is_zero() {
                    seen = true;
                }
                if !lhs.equivalent(&rhs) {
                    ok = false;
                }
            }
        }
        report.check(
            format!("E-recurrence at k = {k}"),
            ok,
            if seen { String::new() } else { "all instances vanish".into() },
        );
    }
    // F-recurrence, k = 2..n. Both sides carry the full (k+1)-index
    // antisymmetrizations, so the relation only constrains the
    // antisymmetrized blocks; expanding the closed coefficient formulas
    // shows the constant is -1, and on a Lagrange-Souriau form both sides
    // vanish separately (they are the LS condition at levels k, k-1). The
    // check verifies the const = -1 identity and solves for the constant on
    // any nonvanishing instance encountered.
    for k in 2..=n as usize {
        let mut constant: Option<Rat> = None;
        let mut consistent = true;
        let mut seen_nonzero = false;
        for i_full in ordered_tuples(n, k + 1) {
            for s_full in ordered_tuples(m, k + 1) {
                let mut lhs = Expr::zero();
                let mut rhs = Expr::zero();
                for (pi, par_i) in permutations_with_parity(k + 1) {
                    for (ps, par_s) in permutations_with_parity(k + 1) {
                        let iperm: Vec<u16> = pi.iter().map(|&l| i_full[l]).collect();
                        let sperm: Vec<u16> = ps.iter().map(|&l| s_full[l]).collect();
                        let sign = rat_int(par_i * par_s);
                        lhs = &lhs
                            + &(alpha.f(iperm[0], &iperm[1..], sperm[0], &sperm[1..]) * sign.clone());
                        let inner = alpha.f(iperm[1], &iperm[2..], sperm[1], &sperm[2..]);
                        let term =
                            delta_adapted(&inner, sperm[0], &MultiIndex::of(n, &[iperm[0]]));
                        rhs = &rhs + &(term * sign);
                    }
                }
                let norm = Rat::new(1.into(), factorial(k + 1) * factorial(k + 1));
                let lhs = lhs * norm.clone();
                let rhs = rhs * norm;
                if rhs.is_zero() {
                    if !lhs.is_zero() {
                        consistent = false;
                    }
                    continue;
                }
                seen_nonzero = true;
                let ratio = lhs.div_checked(&rhs)?;
                match ratio.as_constant() {
                    Some(c) => match &constant {
                        None => constant = Some(c),
                        Some(prev) if *prev == c => {}
                        _ => consistent = false,
                    },
                    None => consistent = false,
                }
            }
        }
        if let Some(c) = &constant {
            if *c != rat_int(-1) {
                consistent = false;
            }
        }
        let detail = if seen_nonzero {
            format!("const = {}", constant.as_ref().expect("nonzero instance"))
        } else {
            "const = -1; all instances vanish (the LS condition)".to_string()
        };
        report.check(format!("F-recurrence at k = {k}"), consistent, detail);
    }
    Ok(report)
}

/// Extracts the first-order form `σ` with `(ρ^{2,1})*σ = α`: replaces the
/// `E`-coefficients by `G = E + y^ν_{jl} F^{j;l,...}_{ν;...}`, checks `G` is
/// independent of the second-order coordinates, and verifies the pullback
/// identity.
pub fn extract_sigma(alpha: &LagrangeSouriauForm) -> Result<Form> {
    let (n, m) = (alpha.n, alpha.m);
    if !alpha.form.exterior_derivative()?.is_zero() {
        return Err(Error::ShapeMismatch("σ extraction needs dα = 0".into()));
    }
    // G-tables on the increasing keys of E
    let mut g_table: ETable = BTreeMap::new();
    for ((i, s), e_val) in alpha.e_entries() {
        let mut g = e_val.clone();
        for j in 1..=n {
            for l in 1..=n {
                for nu in 1..=m {
                    let y = Expr::var(Var::Y { s: nu, idx: MultiIndex::of(n, &[j, l]) });
                    let mut rest_i = vec![l];
                    rest_i.extend_from_slice(i);
                    g = &g + &(&y * &alpha.f(j, &rest_i, nu, s));
                }
            }
        }
        g_table.insert((i.clone(), s.clone()), g);
    }
    // second-order independence
    for ((i, s), g) in &g_table {
        for idx in MultiIndex::of_degree(n, 2) {
            for nu in 1..=m {
                if !g.plain_partial(&Var::Y { s: nu, idx: idx.clone() }).is_zero() {
                    return Err(Error::Inconsistent(format!(
                        "G^{i:?}_{s:?} depends on the second-order coordinate y^{nu}_{idx:?}"
                    )));
                }
            }
        }
    }
    // assemble σ on the first-order chart: the F-part uses dy^{σ0}_{i0}
    let mut sigma = Form::zero(n, m, 1);
    for ((i0, i, s0, s), coeff) in alpha.f_entries() {
        if coeff.is_zero() {
            continue;
        }
        let mut pattern =
            Form::covector(n, m, 1, Covector::DyTop(*s0, MultiIndex::of(n, &[*i0])));
        for &sig in s {
            pattern = pattern.wedge(&Form::omega(n, m, 1, sig, MultiIndex::empty(n)))?;
        }
        pattern = pattern.wedge(&theta(n, m, 1, i))?;
        sigma = sigma.add(&pattern.scale(coeff))?;
    }
    for ((i, s), coeff) in &g_table {
        if coeff.is_zero() {
            continue;
        }
        let mut pattern = Form::function(n, m, 1, Expr::one());
        for &sig in s {
            pattern = pattern.wedge(&Form::omega(n, m, 1, sig, MultiIndex::empty(n)))?;
        }
        pattern = pattern.wedge(&theta(n, m, 1, i))?;
        sigma = sigma.add(&pattern.scale(coeff))?;
    }
    // pullback identity
    let pulled = promote(&sigma, 1)?;
    if !pulled.sub(&alpha.form)?.is_zero() {
        return Err(Error::Inconsistent("(ρ^{2,1})*σ does not reproduce α".into()));
    }
    Ok(sigma)
}

/// The Euler-Lagrange test along a curve: `γ` solves the equations iff the
/// pullbacks `[j²γ]^* (i_Z α)` vanish for every frame field `Z`. Returns
/// those residual forms together with `E_σ ∘ [j²γ]`, whose vanishing must
/// agree for regular curves.
pub fn solve_el_on_curve(
    alpha: &LagrangeSouriauForm,
    gamma: &[Expr],
) -> Result<(Vec<ParamForm>, Vec<Expr>)> {
    let (n, m) = (alpha.n, alpha.m);
    let mut fields: Vec<TangentField> = (1..=n).map(TangentField::d).collect();
    for s in 1..=m {
        for idx in MultiIndex::all(n, 0, 2) {
            fields.push(TangentField::delta(s, idx));
        }
    }
    let mut residuals = Vec::new();
    for z in &fields {
        let contracted = interior(z, &alpha.form);
        residuals.push(pullback_immersion(&contracted, gamma)?);
    }
    let jet = prolong_immersion_symbolic(gamma, n, 2)?;
    let adapted = crate::grassmann::invariants(&jet)?;
    let subst = adapted.substitution();
    let e_values: Vec<Expr> = (1..=m)
        .map(|s| alpha.e(&[], &[s]).subst(&subst))
        .collect::<Result<Vec<_>>>()?;
    let residual_zero = residuals.iter().all(|r| r.is_zero());
    let e_zero = e_values.iter().all(|e| e.is_zero());
    if residual_zero != e_zero {
        return Err(Error::Inconsistent(format!(
            "curve residual vanishing ({residual_zero}) disagrees with E_σ∘[j²γ] ({e_zero})"
        )));
    }
    Ok((residuals, e_values))
}

/// The four defining conditions of a Lagrange-Souriau form for `build_alpha`
/// output: horizontality, closedness, `Kα = 0`, and the vanishing of double
/// vertical contractions (fields vertical over the first-order bundle).
pub fn check_defining_conditions(alpha: &LagrangeSouriauForm) -> Result<Report> {
    let (n, m) = (alpha.n, alpha.m);
    let mut report = Report::new();
    report.check("α is horizontal", alpha.form.is_horizontal(), String::new());
    report.check(
        "dα = 0",
        alpha.form.exterior_derivative()?.is_zero(),
        String::new(),
    );
    report.check("Kα = 0", k_operator(&alpha.form)?.is_zero(), String::new());
    let mut ok = true;
    for idx1 in MultiIndex::of_degree(n, 2) {
        for idx2 in MultiIndex::of_degree(n, 2) {
            for s1 in 1..=m {
                for s2 in 1..=m {
                    let v1 = TangentField::delta(s1, idx1.clone());
                    let v2 = TangentField::delta(s2, idx2.clone());
                    if !interior(&v1, &interior(&v2, &alpha.form)).is_zero() {
                        ok = false;
                    }
                }
            }
        }
    }
    report.check("i_{V1} i_{V2} α = 0 for vertical fields", ok, String::new());
    Ok(report)
}

/// Convenience wrapper: the Euler-Lagrange components of `build_alpha`
/// agree with the variational module's operator.
pub fn el_consistency(lag: &AdaptedLagrangian, alpha: &LagrangeSouriauForm) -> Result<bool> {
    let eq = euler_lagrange(lag)?;
    for s in 1..=lag.m {
        if !alpha.e(&[], &[s]).equivalent(eq.component(s)) {
            return Ok(false);
        }
    }
    // and the k = 0 F-block vanishes
    for i0 in 1..=lag.n {
        for s0 in 1..=lag.m {
            if !alpha.f(i0, &[], s0, &[]).is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartSpec;
    use crate::expr::parse;
    use crate::sample::Sampler;

    fn free_particle() -> AdaptedLagrangian {
        let chart = ChartSpec::adapted(1, 1, 1);
        AdaptedLagrangian { expr: parse("y1_1^2/2", &chart).unwrap(), n: 1, m: 1, r: 1 }
    }

    #[test]
    fn beta_of_the_free_particle() {
        // β = ½y_1² dx + y_1 ω = y_1 dy - ½y_1² dx
        let beta = build_beta(&free_particle()).unwrap();
        let (n, m, r) = (1u16, 1u16, 1usize);
        let y1 = Expr::var(Var::Y { s: 1, idx: MultiIndex::of(1, &[1]) });
        let half = Expr::from_rat(crate::ratio::rat(1, 2));
        let expect = Form::theta0(n, m, r)
            .scale(&(&half * &(&y1 * &y1)))
            .add(&Form::omega(n, m, r, 1, MultiIndex::empty(1)).scale(&y1))
            .unwrap();
        assert_eq!(beta.form, expect);
        // equivalently y_1 dy - ½ y_1² dx with dy = ω + y_1 dx
        let dy = Form::dy_top(n, m, r, 1, MultiIndex::of(1, &[1]));
        let _ = dy; // dy^1_1 is the top differential; dy^1 = ω + y_1 dx at r = 1
    }

    #[test]
    fn beta_without_velocity_dependence_is_horizontal() {
        let chart = ChartSpec::adapted(1, 1, 1);
        let lag = AdaptedLagrangian { expr: parse("x1^2 + y1^3", &chart).unwrap(), n: 1, m: 1, r: 1 };
        let beta = build_beta(&lag).unwrap();
        let expect = Form::theta0(1, 1, 1).scale(&lag.expr);
        assert_eq!(beta.form, expect);
    }

    #[test]
    fn beta_rejects_higher_order() {
        let chart = ChartSpec::adapted(1, 1, 2);
        let lag = AdaptedLagrangian { expr: parse("y1_11^2", &chart).unwrap(), n: 1, m: 1, r: 2 };
        assert!(matches!(build_beta(&lag), Err(Error::NotFirstOrder(_))));
    }

    #[test]
    fn alpha_of_the_free_particle() {
        // α = ω_1 ∧ ω - y_11 ω ∧ dx; F^{11}_{11} = 1, E_1 = -y_11
        let alpha = build_alpha(&free_particle()).unwrap();
        let (n, m, r) = (1u16, 1u16, 2usize);
        let w = Form::omega(n, m, r, 1, MultiIndex::empty(1));
        let w1 = Form::omega(n, m, r, 1, MultiIndex::of(1, &[1]));
        let y11 = Expr::var(Var::Y { s: 1, idx: MultiIndex::of(1, &[1, 1]) });
        let expect = w1
            .wedge(&w)
            .unwrap()
            .add(&w.wedge(&Form::dx(n, m, r, 1)).unwrap().scale(&(-&y11)))
            .unwrap();
        assert_eq!(alpha.form, expect);
        assert!(alpha.f(1, &[1], 1, &[1]).is_one());
        assert!(alpha.e(&[], &[1]).equivalent(&(-&y11)));
        // F^j_σ = 0 at k = 0
        assert!(alpha.f(1, &[], 1, &[]).is_zero());
        assert!(el_consistency(&free_particle(), &alpha).unwrap());
    }

    #[test]
    fn linear_lagrangians_have_no_f_block() {
        // L linear in y_1 with y-independent coefficient: ∂¹∂¹L = 0
        let chart = ChartSpec::adapted(1, 1, 1);
        let lag = AdaptedLagrangian {
            expr: parse("x1^2*y1_1", &chart).unwrap(),
            n: 1,
            m: 1,
            r: 1,
        };
        let alpha = build_alpha(&lag).unwrap();
        assert!(alpha.f(1, &[1], 1, &[1]).is_zero());
        // E reduces to a first-order expression
        assert!(alpha.e(&[], &[1]).jet_order() <= 1);
    }

    #[test]
    fn defining_conditions_and_checks_free_particle() {
        let alpha = build_alpha(&free_particle()).unwrap();
        let report = check_defining_conditions(&alpha).unwrap();
        assert!(report.all_passed(), "{report}");
        let report = check_ls(&alpha).unwrap();
        assert!(report.all_passed(), "{report}");
        let report = check_closedness(&alpha).unwrap();
        assert!(report.all_passed(), "{report}");
        let report = check_recurrences(&alpha).unwrap();
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn hand_made_asymmetric_f_fails_ls() {
        // n = m = 2: F^{12}_{12} and F^{12}_{21} with a broken symmetry; the
        // antisymmetrized combination survives and K detects it
        let (n, m) = (2u16, 2u16);
        let mut f_table = BTreeMap::new();
        f_table.insert((1u16, vec![2u16], 1u16, vec![2u16]), Expr::from_int(3));
        f_table.insert((1u16, vec![2u16], 2u16, vec![1u16]), Expr::from_int(-3));
        let alpha = LagrangeSouriauForm::from_tables(n, m, f_table, BTreeMap::new()).unwrap();
        let report = check_ls(&alpha).unwrap();
        assert!(!report.all_passed(), "{report}");
        // the symmetric counterpart passes at every level
        let mut f_table = BTreeMap::new();
        f_table.insert((1u16, vec![2u16], 1u16, vec![2u16]), Expr::from_int(3));
        f_table.insert((1u16, vec![2u16], 2u16, vec![1u16]), Expr::from_int(3));
        let alpha = LagrangeSouriauForm::from_tables(n, m, f_table, BTreeMap::new()).unwrap();
        // only the k = 1 level is populated; higher levels vanish
        let report = check_ls(&alpha).unwrap();
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn sigma_extraction_free_particle() {
        // G_1 = E_1 + y_11 F^{11}_{11} = 0: σ has only the dy-block
        let alpha = build_alpha(&free_particle()).unwrap();
        let sigma = extract_sigma(&alpha).unwrap();
        let (n, m) = (1u16, 1u16);
        let dy1 = Form::dy_top(n, m, 1, 1, MultiIndex::of(1, &[1]));
        let w = Form::omega(n, m, 1, 1, MultiIndex::empty(1));
        let expect = dy1.wedge(&w).unwrap();
        assert_eq!(sigma, expect);
    }

    #[test]
    fn sigma_round_trips_for_random_first_order_lagrangians() {
        let mut s = Sampler::new(83);
        for (n, m) in [(1u16, 1u16), (1, 2), (2, 1)] {
            let chart = ChartSpec::adapted(n, m, 1);
            let lag = AdaptedLagrangian { expr: s.poly_on_chart(&chart, 2, 4), n, m, r: 1 };
            let alpha = build_alpha(&lag).unwrap();
            // extract_sigma validates G-independence and the pullback
            // identity internally
            let sigma = extract_sigma(&alpha).unwrap();
            assert_eq!(promote(&sigma, 1).unwrap(), alpha.form);
        }
    }

    #[test]
    fn curve_solutions_of_the_free_particle() {
        let alpha = build_alpha(&free_particle()).unwrap();
        let t = Expr::var(Var::T { k: 1 });
        // straight line y = 3x + 5 solves the equations
        let line = vec![t.clone(), &(&t * &Expr::from_int(3)) + &Expr::from_int(5)];
        let (residuals, _) = solve_el_on_curve(&alpha, &line).unwrap();
        assert!(residuals.iter().all(|r| r.is_zero()));
        // y = x² does not: E∘[j²γ] = -2
        let parabola = vec![t.clone(), &t * &t];
        let (residuals, e_vals) = solve_el_on_curve(&alpha, &parabola).unwrap();
        assert!(residuals.iter().any(|r| !r.is_zero()));
        assert!(e_vals[0].equivalent(&Expr::from_int(-2)));
        // a reparametrized line still solves them
        let reparam = &t + &(&(&(&t * &t) * &t) * &Expr::from_rat(crate::ratio::rat(1, 100)));
        let curve = vec![
            reparam.clone(),
            &(&reparam * &Expr::from_int(3)) + &Expr::from_int(5),
        ];
        let (residuals, _) = solve_el_on_curve(&alpha, &curve).unwrap();
        assert!(residuals.iter().all(|r| r.is_zero()));
    }

    #[test]
    fn closedness_identities_random_sweep() {
        let mut s = Sampler::new(89);
        for (n, m) in [(1u16, 2u16), (2, 1), (2, 2)] {
            let chart = ChartSpec::adapted(n, m, 1);
            let lag = AdaptedLagrangian { expr: s.poly_on_chart(&chart, 2, 4), n, m, r: 1 };
            let alpha = build_alpha(&lag).unwrap();
            let report = check_closedness(&alpha).unwrap();
            assert!(report.all_passed(), "(n, m) = ({n}, {m}):\n{report}");
            let report = check_ls(&alpha).unwrap();
            assert!(report.all_passed(), "(n, m) = ({n}, {m}):\n{report}");
        }
    }

    #[test]
    fn recurrences_random_sweep() {
        let mut s = Sampler::new(97);
        for (n, m) in [(1u16, 1u16), (2, 2)] {
            let chart = ChartSpec::adapted(n, m, 1);
            let lag = AdaptedLagrangian { expr: s.poly_on_chart(&chart, 2, 4), n, m, r: 1 };
            let alpha = build_alpha(&lag).unwrap();
            let report = check_recurrences(&alpha).unwrap();
            assert!(report.all_passed(), "(n, m) = ({n}, {m}):\n{report}");
        }
    }

    #[test]
    fn second_order_specialization_tables() {
        // the general-order machinery at r = 2 reproduces the hand displays
        // for composition, the invariants, and their inverse
        use crate::grassmann::{invariants, reconstruct, x_element, z_element};
        use crate::jetgroup::{GroupElement, VelocityJet};
        let n = 2u16;
        let m = 1u16;
        // composition: (a·b)^k_{i1 i2} = a^k_j b^j_{i1 i2} + a^k_{j1 j2} b^{j1}_{i1} b^{j2}_{i2}
        {
            let a = GroupElement::symbolic(n, 2);
            // a second symbolic element needs its own namespace: build it
            // from shifted velocity variables
            let jet = VelocityJet::symbolic(n, n + m, 2);
            let b = x_element(&jet);
            let ab = a.compose(&b).unwrap();
            for i1 in 1..=n {
                for i2 in i1..=n {
                    let idx = MultiIndex::of(n, &[i1, i2]);
                    for k in 1..=n {
                        let mut expect = Expr::zero();
                        for j in 1..=n {
                            expect = &expect
                                + &(&a.coeff(k, &MultiIndex::of(n, &[j])) * &b.coeff(j, &idx));
                        }
                        for j1 in 1..=n {
                            for j2 in 1..=n {
                                let prod = &b.coeff(j1, &MultiIndex::of(n, &[i1]))
                                    * &b.coeff(j2, &MultiIndex::of(n, &[i2]));
                                expect = &expect
                                    + &(&a.coeff(k, &MultiIndex::of(n, &[j1, j2])) * &prod);
                            }
                        }
                        assert!(ab.coeff(k, &idx).equivalent(&expect));
                    }
                }
            }
        }
        // invariants at second order: expanding the inverse-frame recurrence
        // gives y^σ_{i1 i2} = z^{j1}_{i1} z^{j2}_{i2} (x^σ_{j1 j2}
        //   - y^σ_p x^p_{j1 j2})
        {
            let jet = VelocityJet::symbolic(n, n + m, 2);
            let z = z_element(&jet).unwrap();
            let y = invariants(&jet).unwrap();
            for i1 in 1..=n {
                for i2 in i1..=n {
                    let idx = MultiIndex::of(n, &[i1, i2]);
                    let mut expect = Expr::zero();
                    for j1 in 1..=n {
                        for j2 in 1..=n {
                            let mut inner =
                                jet.coeff(n + 1, &MultiIndex::of(n, &[j1, j2]));
                            for pp in 1..=n {
                                let corr = &y.y(1, &MultiIndex::of(n, &[pp]))
                                    * &jet.coeff(pp, &MultiIndex::of(n, &[j1, j2]));
                                inner = &inner - &corr;
                            }
                            let zz = &z.coeff(j1, &MultiIndex::of(n, &[i1]))
                                * &z.coeff(j2, &MultiIndex::of(n, &[i2]));
                            expect = &expect + &(&zz * &inner);
                        }
                    }
                    assert!(
                        y.y(1, &idx).equivalent(&expect),
                        "xy2 fails at ({i1}, {i2})"
                    );
                }
            }
            // inverse (yx2): x^σ_{i1 i2} = x^{j1}_{i1} x^{j2}_{i2} y^σ_{j1 j2}
            //   + y^σ_k x^k_{i1 i2}
            let back = reconstruct(&y, &x_element(&jet)).unwrap();
            for i1 in 1..=n {
                for i2 in i1..=n {
                    let idx = MultiIndex::of(n, &[i1, i2]);
                    let mut expect = Expr::zero();
                    for j1 in 1..=n {
                        for j2 in 1..=n {
                            let xx = &jet.coeff(j1, &MultiIndex::of(n, &[i1]))
                                * &jet.coeff(j2, &MultiIndex::of(n, &[i2]));
                            expect =
                                &expect + &(&xx * &y.y(1, &MultiIndex::of(n, &[j1, j2])));
                        }
                    }
                    for k in 1..=n {
                        expect = &expect
                            + &(&y.y(1, &MultiIndex::of(n, &[k])) * &jet.coeff(k, &idx));
                    }
                    assert!(back.coeff(n + 1, &idx).equivalent(&expect));
                    assert!(jet.coeff(n + 1, &idx).equivalent(&expect));
                }
            }
        }
    }

    #[test]
    fn alpha_vanishes_iff_el_vanishes() {
        // total-divergence Lagrangian: E ≡ 0 and α ≡ 0
        let chart = ChartSpec::adapted(1, 1, 1);
        let g = parse("x1*y1^2", &chart).unwrap();
        let lag = AdaptedLagrangian {
            expr: total_derivative(&g, 1).unwrap(),
            n: 1,
            m: 1,
            r: 1,
        };
        let alpha = build_alpha(&lag).unwrap();
        assert!(alpha.form.is_zero());
        assert!(alpha.euler_lagrange_components().iter().all(|e| e.is_zero()));
        // and a non-trivial Lagrangian gives a non-zero α
        let alpha = build_alpha(&free_particle()).unwrap();
        assert!(!alpha.form.is_zero());
    }
}

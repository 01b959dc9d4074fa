//! Exact symbolic expressions over jet variables.
//!
//! An [`Expr`] is a quotient of two multivariate polynomials over ℚ in a
//! fixed universe of atoms: jet coordinates of the two chart families, group
//! coordinates, curve parameters, opaque function-symbol jets and registered
//! function applications. Polynomials are kept in expanded distributed form
//! with a graded-lexicographic monomial order, so polynomial equality is
//! structural and rational equality is decided by cross-multiplication.
//!
//! Every derivative operator of the calculus (plain partials, the weighted
//! partials `∂^I_A`, formal derivatives `d_i`, total derivatives `D_i`, jet
//! prolongations of vector fields) is a derivation and is routed through one
//! engine, [`Expr::derivation`], parametrised by its action on variables.

mod calculus;
mod parse;

pub use calculus::*;
pub use parse::{parse, parse_params};

use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::ratio::Rat;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// A symbolic variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Var {
    /// Velocity-chart jet coordinate `x^A_I`; the empty index is the base
    /// point coordinate `x^A`.
    X { a: u16, idx: MultiIndex },
    /// Adapted-chart base coordinate `x^k`.
    XBase { k: u16 },
    /// Adapted-chart fibre coordinate `y^σ_I`.
    Y { s: u16, idx: MultiIndex },
    /// Differential-group coordinate `a^k_I`, `|I| >= 1`.
    GroupA { k: u16, idx: MultiIndex },
    /// Curve parameter `t^k`.
    T { k: u16 },
    /// Jet of an opaque base-only function symbol: `∂_d ξ^a` with `d` a
    /// multi-index over the labels `1..=N`.
    XiJet { fam: u16, a: u16, d: MultiIndex },
    /// Free named constant.
    Param(Arc<str>),
}

impl Var {
    pub fn x(a: u16, idx: MultiIndex) -> Self {
        Var::X { a, idx }
    }

    pub fn y(s: u16, idx: MultiIndex) -> Self {
        Var::Y { s, idx }
    }

    /// Jet order contributed by this variable.
    pub fn order(&self) -> usize {
        match self {
            Var::X { idx, .. } | Var::Y { idx, .. } | Var::GroupA { idx, .. } => idx.degree(),
            _ => 0,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn idx_suffix(idx: &MultiIndex) -> String {
            if idx.is_empty() {
                String::new()
            } else if idx.entries().iter().all(|&d| d <= 9) {
                let digits: String = idx.entries().iter().map(|d| d.to_string()).collect();
                format!("_{digits}")
            } else {
                let list: Vec<String> = idx.entries().iter().map(|d| d.to_string()).collect();
                format!("_[{}]", list.join(","))
            }
        }
        match self {
            Var::X { a, idx } => write!(f, "X{a}{}", idx_suffix(idx)),
            Var::XBase { k } => write!(f, "x{k}"),
            Var::Y { s, idx } => write!(f, "y{s}{}", idx_suffix(idx)),
            Var::GroupA { k, idx } => write!(f, "a{k}{}", idx_suffix(idx)),
            Var::T { k } => write!(f, "t{k}"),
            Var::XiJet { fam, a, d } => {
                if d.is_empty() {
                    write!(f, "Xi{fam}_{a}")
                } else {
                    let list: Vec<String> = d.entries().iter().map(|x| x.to_string()).collect();
                    write!(f, "Xi{fam}_{a}[{}]", list.join(","))
                }
            }
            Var::Param(name) => write!(f, "{name}"),
        }
    }
}

/// Registered function symbols with known derivative rules.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Func {
    Sqrt,
}

impl Func {
    pub fn name(&self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
        }
    }

    pub fn by_name(name: &str) -> Option<Func> {
        match name {
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    /// `∂ f(u) / ∂u`.
    pub fn derivative(&self, arg: &Expr) -> Expr {
        match self {
            // d sqrt(u)/du = 1 / (2 sqrt(u))
            Func::Sqrt => Expr::one().div_checked(&(Expr::from_int(2) * Expr::apply(*self, arg.clone()))).expect("sqrt argument nonzero"),
        }
    }
}

/// A multiplicative atom: a variable or a function application.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    V(Var),
    App(Func, Arc<Expr>),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::V(v) => write!(f, "{v}"),
            Atom::App(func, arg) => write!(f, "{}({})", func.name(), arg),
        }
    }
}

/// A power product of atoms; factors sorted by atom, exponents >= 1.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    factors: Vec<(Atom, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { factors: Vec::new() }
    }

    pub fn atom(a: Atom) -> Self {
        Monomial { factors: vec![(a, 1)] }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.factors
    }

    pub fn total_degree(&self) -> u64 {
        self.factors.iter().map(|(_, e)| *e as u64).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            match self.factors[i].0.cmp(&other.factors[j].0) {
                Ordering::Less => {
                    factors.push(self.factors[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    factors.push(other.factors[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    factors.push((self.factors[i].0.clone(), self.factors[i].1 + other.factors[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        factors.extend_from_slice(&self.factors[i..]);
        factors.extend_from_slice(&other.factors[j..]);
        Monomial { factors }
    }

    /// Componentwise quotient, when `other` divides `self`.
    pub fn try_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut factors = Vec::with_capacity(self.factors.len());
        let mut j = 0;
        for (a, e) in &self.factors {
            let mut rem = *e;
            if j < other.factors.len() && other.factors[j].0 == *a {
                if other.factors[j].1 > *e {
                    return None;
                }
                rem = e - other.factors[j].1;
                j += 1;
            }
            if rem > 0 {
                factors.push((a.clone(), rem));
            }
        }
        if j < other.factors.len() {
            return None;
        }
        Some(Monomial { factors })
    }

    /// Componentwise minimum.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut factors = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            match self.factors[i].0.cmp(&other.factors[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    factors.push((self.factors[i].0.clone(), self.factors[i].1.min(other.factors[j].1)));
                    i += 1;
                    j += 1;
                }
            }
        }
        Monomial { factors }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    /// Graded-lexicographic order: total degree first, then lexicographic on
    /// aligned exponent vectors with smaller atoms more significant. This is
    /// a genuine monomial order, so leading-term division is sound.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.factors.get(i), other.factors.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((a, ea)), Some((b, eb))) => match a.cmp(b) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        match ea.cmp(eb) {
                            Ordering::Equal => {}
                            ord => return ord,
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

/// Multivariate polynomial over ℚ in expanded form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Poly { terms }
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn atom(a: Atom) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::atom(a), Rat::one());
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Monomial::one())
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Monomial::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    fn insert_add(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_add(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert_add(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn mul_term(&self, m: &Monomial, c: &Rat) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            out.insert_add(ma.mul(m), ca * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    /// Exact polynomial division; `None` when the remainder is nonzero.
    pub fn exact_div(&self, divisor: &Poly) -> Option<Poly> {
        let (lt_m, lt_c) = divisor.leading()?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while !rem.is_zero() {
            let (rm, rc) = rem.leading().expect("nonzero");
            let qm = rm.try_div(lt_m)?;
            let qc = rc / lt_c;
            quot.insert_add(qm.clone(), qc.clone());
            rem = rem.sub(&divisor.mul_term(&qm, &qc));
        }
        Some(quot)
    }

    /// Per-atom minimum exponent over all terms (the monomial content).
    pub fn monomial_content(&self) -> Monomial {
        let mut iter = self.terms.keys();
        let mut acc = match iter.next() {
            Some(m) => m.clone(),
            None => return Monomial::one(),
        };
        for m in iter {
            if acc.is_one() {
                break;
            }
            acc = acc.gcd(m);
        }
        acc
    }

    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(mm, c)| (mm.try_div(m).expect("content divides"), c.clone()))
                .collect(),
        }
    }

    fn atoms(&self) -> BTreeSet<&Atom> {
        let mut set = BTreeSet::new();
        for m in self.terms.keys() {
            for (a, _) in &m.factors {
                set.insert(a);
            }
        }
        set
    }
}

/// Quotient of a polynomial by a product of polynomial factors. The
/// denominator is kept factored — `den` is a sorted list of distinct,
/// non-constant, leading-monic factors with positive powers — so that the
/// quotient rule of iterated derivatives raises factor powers by one
/// instead of squaring an expanded denominator. An empty factor list is
/// the denominator 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

impl Expr {
    fn make(num: Poly, raw_den: Vec<(Poly, u32)>) -> Expr {
        if num.is_zero() {
            return Expr { num, den: Vec::new() };
        }
        // normalize factors: split off monomial content, make the rest
        // leading-monic, merge equal factors
        let mut scalar = Rat::one();
        let mut factors: Vec<(Poly, u32)> = Vec::new();
        let mut mono_exps: BTreeMap<Atom, u32> = BTreeMap::new();
        for (f, k) in raw_den {
            if k == 0 {
                continue;
            }
            assert!(!f.is_zero(), "zero denominator factor");
            let content = f.monomial_content();
            for (a, e) in content.factors() {
                *mono_exps.entry(a.clone()).or_default() += e * k;
            }
            let stripped = if content.is_one() { f } else { f.div_monomial(&content) };
            let lead = stripped.leading().expect("nonzero").1.clone();
            let mut p = Rat::one();
            for _ in 0..k {
                p *= &lead;
            }
            scalar *= p;
            if stripped.as_constant().is_some() {
                continue;
            }
            let monic = if lead.is_one() {
                stripped
            } else {
                stripped.scale(&lead.clone().recip())
            };
            match factors.iter_mut().find(|(g, _)| *g == monic) {
                Some((_, kk)) => *kk += k,
                None => factors.push((monic, k)),
            }
        }
        let mut num = if scalar.is_one() { num } else { num.scale(&scalar.recip()) };
        // cancel the accumulated denominator monomial against the numerator
        // content
        if !mono_exps.is_empty() {
            let content = num.monomial_content();
            let mut cancel = Vec::new();
            for (a, e) in content.factors() {
                if let Some(me) = mono_exps.get_mut(a) {
                    let d = (*me).min(*e);
                    if d > 0 {
                        cancel.push((a.clone(), d));
                        *me -= d;
                    }
                }
            }
            if !cancel.is_empty() {
                num = num.div_monomial(&Monomial { factors: cancel });
            }
            for (a, e) in mono_exps {
                if e > 0 {
                    factors.push((Poly::atom(a), e));
                }
            }
        }
        // cancel factors that divide the numerator outright
        for (f, k) in factors.iter_mut() {
            while *k > 0 {
                match num.exact_div(f) {
                    Some(q) => {
                        num = q;
                        *k -= 1;
                    }
                    None => break,
                }
            }
        }
        factors.retain(|(_, k)| *k > 0);
        factors.sort();
        Expr { num, den: factors }
    }

    pub fn zero() -> Expr {
        Expr { num: Poly::zero(), den: Vec::new() }
    }

    pub fn one() -> Expr {
        Expr { num: Poly::one(), den: Vec::new() }
    }

    pub fn from_int(v: i64) -> Expr {
        Expr::from_rat(crate::ratio::rat_int(v))
    }

    pub fn from_rat(c: Rat) -> Expr {
        Expr { num: Poly::constant(c), den: Vec::new() }
    }

    pub fn var(v: Var) -> Expr {
        Expr { num: Poly::atom(Atom::V(v)), den: Vec::new() }
    }

    pub fn apply(f: Func, arg: Expr) -> Expr {
        Expr { num: Poly::atom(Atom::App(f, Arc::new(arg))), den: Vec::new() }
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr { num: p, den: Vec::new() }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    /// The denominator factors (empty for polynomials).
    pub fn den_factors(&self) -> &[(Poly, u32)] {
        &self.den
    }

    /// The denominator expanded to a single polynomial.
    pub fn den_expanded(&self) -> Poly {
        let mut acc = Poly::one();
        for (f, k) in &self.den {
            for _ in 0..*k {
                acc = acc.mul(f);
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if !self.den.is_empty() {
            return None;
        }
        self.num.as_constant()
    }

    /// Mathematical equality, decided by cross-multiplication.
    pub fn equivalent(&self, other: &Expr) -> bool {
        if self == other {
            return true;
        }
        if self.den == other.den {
            return self.num == other.num;
        }
        self.num.mul(&other.den_expanded()) == other.num.mul(&self.den_expanded())
    }

    pub fn recip(&self) -> Result<Expr> {
        if self.is_zero() {
            return Err(Error::DivisionByZero("reciprocal of zero".into()));
        }
        Ok(Expr::make(self.den_expanded(), vec![(self.num.clone(), 1)]))
    }

    pub fn div_checked(&self, other: &Expr) -> Result<Expr> {
        if other.is_zero() {
            return Err(Error::DivisionByZero("division by zero expression".into()));
        }
        let mut den = self.den.clone();
        den.push((other.num.clone(), 1));
        Ok(Expr::make(self.num.mul(&other.den_expanded()), den))
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, e: i64) -> Result<Expr> {
        if e < 0 {
            return self.recip()?.pow(-e);
        }
        if e == 0 {
            return Ok(Expr::one());
        }
        let mut num = Poly::one();
        let base = &self.num;
        for _ in 0..e {
            num = num.mul(base);
        }
        let den = self
            .den
            .iter()
            .map(|(f, k)| (f.clone(), k * e as u32))
            .collect();
        Ok(Expr::make(num, den))
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut acc = Expr::zero();
        for e in items {
            acc = &acc + &e;
        }
        acc
    }

    pub fn product<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut acc = Expr::one();
        for e in items {
            if acc.is_zero() {
                return acc;
            }
            acc = &acc * &e;
        }
        acc
    }

    /// Every variable occurring in the expression, including inside
    /// function-application arguments.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        fn from_poly(poly: &Poly, out: &mut BTreeSet<Var>) {
            for atom in poly.atoms() {
                match atom {
                    Atom::V(v) => {
                        out.insert(v.clone());
                    }
                    Atom::App(_, arg) => arg.collect_vars(out),
                }
            }
        }
        from_poly(&self.num, out);
        for (f, _) in &self.den {
            from_poly(f, out);
        }
    }

    /// Highest jet order among the variables of the expression.
    pub fn jet_order(&self) -> usize {
        self.vars().iter().map(|v| v.order()).max().unwrap_or(0)
    }

    pub fn has_apps(&self) -> bool {
        let check = |poly: &Poly| poly.atoms().iter().any(|a| matches!(a, Atom::App(..)));
        check(&self.num) || self.den.iter().any(|(f, _)| check(f))
    }

    /// Plain partial derivative with respect to one variable.
    pub fn plain_partial(&self, v: &Var) -> Expr {
        self.derivation(&|w: &Var| {
            Ok(if w == v { Expr::one() } else { Expr::zero() })
        })
        .expect("plain partial cannot fail")
    }

    /// Applies the derivation determined by `rule` on variables. Function
    /// applications are handled by the chain rule with the registered
    /// derivative of the symbol. For a factored denominator `Π f_i^{k_i}`
    /// the quotient rule only raises each factor power by one:
    /// `(n/Πf^k)' = [n' Πf - n Σ k_i f_i' Π_{j≠i} f_j] / Π f^{k+1}`.
    pub fn derivation(&self, rule: &dyn Fn(&Var) -> Result<Expr>) -> Result<Expr> {
        let dn = self.num.derive(rule)?;
        if self.den.is_empty() {
            return Ok(dn);
        }
        let dfs: Vec<Expr> = self
            .den
            .iter()
            .map(|(f, _)| f.derive(rule))
            .collect::<Result<Vec<_>>>()?;
        if dn.is_polynomial() && dfs.iter().all(|d| d.is_polynomial()) {
            // radical product Π f_i (first powers only)
            let radical: Vec<&Poly> = self.den.iter().map(|(f, _)| f).collect();
            let mut full = Poly::one();
            for f in &radical {
                full = full.mul(f);
            }
            let mut num = dn.num.mul(&full);
            for (i, (_, k)) in self.den.iter().enumerate() {
                if dfs[i].is_zero() {
                    continue;
                }
                let mut cof = Poly::constant(Rat::from_integer((*k).into()));
                for (j, f) in radical.iter().enumerate() {
                    if j != i {
                        cof = cof.mul(f);
                    }
                }
                num = num.sub(&self.num.mul(&cof).mul(&dfs[i].num));
            }
            let den = self.den.iter().map(|(f, k)| (f.clone(), k + 1)).collect();
            return Ok(Expr::make(num, den));
        }
        // rare general path: expand the denominator once
        let d = Expr::from_poly(self.den_expanded());
        let dd = d.num.derive(rule)?;
        let num = &(&dn * &d) - &(&dd * &Expr::from_poly(self.num.clone()));
        num.div_checked(&(&d * &d))
    }

    /// Substitutes variables by expressions; variables absent from the map
    /// are left in place. Errors when a denominator collapses to zero.
    pub fn subst(&self, map: &BTreeMap<Var, Expr>) -> Result<Expr> {
        let mut acc = self.num.subst(map)?;
        for (f, k) in &self.den {
            let fs = f.subst(map)?;
            if fs.is_zero() {
                return Err(Error::DivisionByZero(
                    "substitution sent a denominator factor to zero".into(),
                ));
            }
            acc = acc.div_checked(&fs.pow(*k as i64)?)?;
        }
        Ok(acc)
    }

    /// Exact rational value at a full assignment of the variables.
    pub fn evaluate(&self, point: &BTreeMap<Var, Rat>) -> Result<Rat> {
        let mut acc = self.num.evaluate(point)?;
        for (f, k) in &self.den {
            let v = f.evaluate(point)?;
            if v.is_zero() {
                return Err(Error::DivisionByZero(
                    "denominator factor vanishes at the evaluation point".into(),
                ));
            }
            for _ in 0..*k {
                acc /= &v;
            }
        }
        Ok(acc)
    }
}

impl Poly {
    fn derive(&self, rule: &dyn Fn(&Var) -> Result<Expr>) -> Result<Expr> {
        // polynomial contributions accumulate into one map; only rational
        // atom derivatives (through registered function rules) fall back to
        // expression addition
        let mut acc_poly = Poly::zero();
        let mut acc_expr = Expr::zero();
        let mut atom_cache: BTreeMap<Atom, Expr> = BTreeMap::new();
        for (m, c) in &self.terms {
            for (pos, (atom, e)) in m.factors.iter().enumerate() {
                let datom = match atom_cache.get(atom) {
                    Some(d) => d.clone(),
                    None => {
                        let d = match atom {
                            Atom::V(v) => rule(v)?,
                            Atom::App(f, arg) => {
                                let inner = arg.derivation(rule)?;
                                if inner.is_zero() {
                                    Expr::zero()
                                } else {
                                    &f.derivative(arg) * &inner
                                }
                            }
                        };
                        atom_cache.insert(atom.clone(), d.clone());
                        d
                    }
                };
                if datom.is_zero() {
                    continue;
                }
                // c * e * (m / atom) * datom
                let mut rest = Monomial { factors: m.factors.clone() };
                if *e == 1 {
                    rest.factors.remove(pos);
                } else {
                    rest.factors[pos].1 = e - 1;
                }
                let coeff = c * Rat::from_integer((*e).into());
                if datom.is_polynomial() {
                    for (dm, dc) in &datom.num.terms {
                        acc_poly.insert_add(rest.mul(dm), &coeff * dc);
                    }
                } else {
                    let mut single = Poly::zero();
                    single.insert_add(rest, coeff);
                    acc_expr = &acc_expr + &(&Expr::from_poly(single) * &datom);
                }
            }
        }
        if acc_expr.is_zero() {
            Ok(Expr::from_poly(acc_poly))
        } else {
            Ok(&Expr::from_poly(acc_poly) + &acc_expr)
        }
    }

    fn subst(&self, map: &BTreeMap<Var, Expr>) -> Result<Expr> {
        // replacements and their powers are cached; polynomial terms
        // accumulate into a single map, rational replacements (rare) fall
        // back to expression addition
        let mut replaced: BTreeMap<Atom, Expr> = BTreeMap::new();
        let mut powers: BTreeMap<(Atom, u32), Expr> = BTreeMap::new();
        let mut acc_poly = Poly::zero();
        let mut acc_expr = Expr::zero();
        for (m, c) in &self.terms {
            let mut term_poly = Poly::constant(c.clone());
            let mut term_expr: Option<Expr> = None;
            for (atom, e) in &m.factors {
                let powered = match powers.get(&(atom.clone(), *e)) {
                    Some(p) => p.clone(),
                    None => {
                        let base = match replaced.get(atom) {
                            Some(b) => b.clone(),
                            None => {
                                let b = match atom {
                                    Atom::V(v) => match map.get(v) {
                                        Some(repl) => repl.clone(),
                                        None => Expr::var(v.clone()),
                                    },
                                    Atom::App(f, arg) => Expr::apply(*f, arg.subst(map)?),
                                };
                                replaced.insert(atom.clone(), b.clone());
                                b
                            }
                        };
                        let p = base.pow(*e as i64)?;
                        powers.insert((atom.clone(), *e), p.clone());
                        p
                    }
                };
                if powered.is_zero() {
                    term_poly = Poly::zero();
                    term_expr = None;
                    break;
                }
                match (&mut term_expr, powered.is_polynomial()) {
                    (None, true) => term_poly = term_poly.mul(&powered.num),
                    (None, false) => {
                        term_expr = Some(&Expr::from_poly(term_poly.clone()) * &powered);
                    }
                    (Some(t), _) => *t = &*t * &powered,
                }
            }
            match term_expr {
                None => acc_poly = acc_poly.add(&term_poly),
                Some(t) => acc_expr = &acc_expr + &t,
            }
        }
        if acc_expr.is_zero() {
            Ok(Expr::from_poly(acc_poly))
        } else {
            Ok(&Expr::from_poly(acc_poly) + &acc_expr)
        }
    }

    fn evaluate(&self, point: &BTreeMap<Var, Rat>) -> Result<Rat> {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (atom, e) in &m.factors {
                let base = match atom {
                    Atom::V(v) => point
                        .get(v)
                        .cloned()
                        .ok_or_else(|| Error::Unassigned(v.to_string()))?,
                    Atom::App(..) => {
                        return Err(Error::Unevaluable(
                            "function symbols have no numeric rule".into(),
                        ))
                    }
                };
                let mut p = Rat::one();
                for _ in 0..*e {
                    p *= &base;
                }
                term *= p;
            }
            acc += term;
        }
        Ok(acc)
    }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return Expr::make(self.num.add(&rhs.num), self.den.clone());
        }
        // factor-wise least common denominator: max power per factor
        let mut lcm: Vec<(Poly, u32)> = self.den.clone();
        for (g, kg) in &rhs.den {
            match lcm.iter_mut().find(|(f, _)| f == g) {
                Some((_, k)) => *k = (*k).max(*kg),
                None => lcm.push((g.clone(), *kg)),
            }
        }
        let lift = |num: &Poly, den: &[(Poly, u32)]| -> Poly {
            let mut out = num.clone();
            for (f, k) in &lcm {
                let have = den
                    .iter()
                    .find(|(g, _)| g == f)
                    .map(|(_, kk)| *kk)
                    .unwrap_or(0);
                for _ in have..*k {
                    out = out.mul(f);
                }
            }
            out
        };
        let num = lift(&self.num, &self.den).add(&lift(&rhs.num, &rhs.den));
        Expr::make(num, lcm)
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        let mut den = self.den.clone();
        den.extend(rhs.den.iter().cloned());
        Expr::make(self.num.mul(&rhs.num), den)
    }
}

/// Division panics on a zero divisor; use [`Expr::div_checked`] on unknown
/// input.
impl std::ops::Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        self.div_checked(rhs).expect("division by zero expression")
    }
}

macro_rules! owned_ops {
    ($($trait:ident, $method:ident);*) => {$(
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                (&self).$method(&rhs)
            }
        }
        impl std::ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                (&self).$method(rhs)
            }
        }
    )*};
}
owned_ops!(Add, add; Sub, sub; Mul, mul; Div, div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::ops::Mul<Rat> for Expr {
    type Output = Expr;
    fn mul(self, rhs: Rat) -> Expr {
        Expr::make(self.num.scale(&rhs), self.den)
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_poly(f: &mut fmt::Formatter<'_>, p: &Poly) -> fmt::Result {
            if p.is_zero() {
                return write!(f, "0");
            }
            for (k, (m, c)) in p.terms.iter().rev().enumerate() {
                let neg = c.is_negative();
                if k == 0 {
                    if neg {
                        write!(f, "-")?;
                    }
                } else if neg {
                    write!(f, " - ")?;
                } else {
                    write!(f, " + ")?;
                }
                let mag = c.abs();
                if m.is_one() {
                    write!(f, "{mag}")?;
                } else {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    for (i, (a, e)) in m.factors.iter().enumerate() {
                        if i > 0 {
                            write!(f, "*")?;
                        }
                        if *e == 1 {
                            write!(f, "{a}")?;
                        } else {
                            write!(f, "{a}^{e}")?;
                        }
                    }
                }
            }
            Ok(())
        }
        if self.den.is_empty() {
            write_poly(f, &self.num)
        } else {
            write!(f, "(")?;
            write_poly(f, &self.num)?;
            write!(f, ")/(")?;
            for (pos, (fac, k)) in self.den.iter().enumerate() {
                if pos > 0 {
                    write!(f, "*")?;
                }
                write!(f, "(")?;
                write_poly(f, fac)?;
                write!(f, ")")?;
                if *k > 1 {
                    write!(f, "^{k}")?;
                }
            }
            write!(f, ")")
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

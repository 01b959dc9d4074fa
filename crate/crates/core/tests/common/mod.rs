//! Independent oracles for the acceptance suite.
//!
//! Everything here recomputes expected values through routes that do not
//! touch the partition-sum implementations under test: truncated polynomial
//! composition for the group law, and power-series inversion for the graph
//! reparametrization of curves. The truncated polynomial arithmetic is
//! self-contained — plain maps from sorted direction multisets to
//! rationals — so the oracle shares no code path with `Expr`.

use jetvar_core::expr::Expr;
use jetvar_core::jetgroup::GroupElement;
use jetvar_core::multiindex::MultiIndex;
use jetvar_core::ratio::{factorial, Rat};
use num_traits::Zero;
use std::collections::BTreeMap;

/// Polynomial in the parameters `t_1..t_n`, truncated at total degree `r`:
/// sorted direction multisets to coefficients.
type TPoly = BTreeMap<Vec<u16>, Rat>;

fn tadd(acc: &mut TPoly, mono: Vec<u16>, c: Rat) {
    if c.is_zero() {
        return;
    }
    let entry = acc.entry(mono).or_insert_with(Rat::zero);
    *entry += c;
    if entry.is_zero() {
        let dead: Vec<Vec<u16>> = acc
            .iter()
            .filter(|(_, v)| v.is_zero())
            .map(|(k, _)| k.clone())
            .collect();
        for k in dead {
            acc.remove(&k);
        }
    }
}

fn tmul(a: &TPoly, b: &TPoly, r: usize) -> TPoly {
    let mut out = TPoly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            if ma.len() + mb.len() > r {
                continue;
            }
            let mut mono = ma.clone();
            mono.extend_from_slice(mb);
            mono.sort_unstable();
            tadd(&mut out, mono, ca * cb);
        }
    }
    out
}

/// The Taylor polynomial of a group element as a truncated polynomial:
/// `α^i(t) = Σ_I a^i_I t^I / d!`.
fn taylor(a: &GroupElement, i: u16) -> TPoly {
    let mut out = TPoly::new();
    for idx in MultiIndex::all(a.n(), 1, a.order()) {
        let c = a.coeff(i, &idx).as_constant().expect("numeric element");
        if c.is_zero() {
            continue;
        }
        let mut dfact = Rat::from_integer(1.into());
        for m in idx.multiplicities() {
            dfact *= Rat::from_integer(factorial(m));
        }
        tadd(&mut out, idx.entries().to_vec(), c / dfact);
    }
    out
}

/// Composition oracle: substitute the Taylor polynomials of `b` into those
/// of `a` with degree-truncated arithmetic and read the jet coefficients
/// off the monomials (`∂_I` at 0 is the `t^I`-coefficient times `d!`).
pub fn compose_oracle(a: &GroupElement, b: &GroupElement) -> GroupElement {
    let n = a.n();
    let r = a.order();
    let betas: Vec<TPoly> = (1..=n).map(|j| taylor(b, j)).collect();
    // power cache for β_j^e
    let mut powers: BTreeMap<(u16, usize), TPoly> = BTreeMap::new();
    let mut power = |j: u16, e: usize, r: usize, betas: &[TPoly]| -> TPoly {
        if let Some(p) = powers.get(&(j, e)) {
            return p.clone();
        }
        let mut acc: TPoly = [(Vec::new(), Rat::from_integer(1.into()))].into();
        for _ in 0..e {
            acc = tmul(&acc, &betas[(j - 1) as usize], r);
        }
        powers.insert((j, e), acc.clone());
        acc
    };
    let mut entries: Vec<((u16, MultiIndex), Expr)> = Vec::new();
    for k in 1..=n {
        let alpha = taylor(a, k);
        let mut composed = TPoly::new();
        for (mono, c) in &alpha {
            let mut term: TPoly = [(Vec::new(), c.clone())].into();
            let mut pos = 0;
            while pos < mono.len() {
                let j = mono[pos];
                let mut e = 0;
                while pos < mono.len() && mono[pos] == j {
                    e += 1;
                    pos += 1;
                }
                term = tmul(&term, &power(j, e, r, &betas), r);
            }
            for (m, v) in term {
                tadd(&mut composed, m, v);
            }
        }
        for idx in MultiIndex::all(n, 1, r) {
            let c = composed
                .get(idx.entries())
                .cloned()
                .unwrap_or_else(Rat::zero);
            let mut dfact = Rat::from_integer(1.into());
            for m in idx.multiplicities() {
                dfact *= Rat::from_integer(factorial(m));
            }
            entries.push(((k, idx), Expr::from_rat(c * dfact)));
        }
    }
    GroupElement::new(n, r, entries).expect("shape")
}

/// Truncated product of dense univariate polynomials (constant term first).
fn poly_mul(a: &[Rat], b: &[Rat], order: usize) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); order + 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() || i > order {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            if i + j > order {
                break;
            }
            out[i + j] += ca * cb;
        }
    }
    out
}

/// Composition `p(q(s))` truncated at the given order; `q` has no constant
/// term.
fn poly_compose(p: &[Rat], q: &[Rat], order: usize) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); order + 1];
    let mut power = vec![Rat::zero(); order + 1];
    power[0] = Rat::from_integer(1.into());
    for (k, c) in p.iter().enumerate() {
        if k > 0 {
            power = poly_mul(&power, q, order);
        }
        if !c.is_zero() {
            for (slot, v) in power.iter().enumerate() {
                out[slot] += c * v;
            }
        }
    }
    out
}

/// Inverts a series `p(t) = c_1 t + c_2 t² + ...` with `c_1 != 0`: returns
/// `q` with `p(q(s)) = s` up to the given order, by solving coefficient by
/// coefficient.
pub fn invert_series(p: &[Rat], order: usize) -> Vec<Rat> {
    assert!(p[0].is_zero(), "series must vanish at 0");
    assert!(!p[1].is_zero(), "series must be regular");
    let mut q = vec![Rat::zero(); order + 1];
    q[1] = p[1].clone().recip();
    for k in 2..=order {
        // coefficient of s^k in p(q(s)) with the current partial q must die
        let got = poly_compose(p, &q, k);
        q[k] = -&got[k] / &p[1];
    }
    q
}

/// Graph-reparametrization oracle for a plane curve `(x(t), y(t))`: the
/// derivatives of `y` as a function of `x` at the origin, i.e. the
/// invariants `y_1, y_11, ...` of the curve's jet, via series inversion.
pub fn graph_invariants(x: &[Rat], y: &[Rat], order: usize) -> Vec<Rat> {
    let tau = invert_series(x, order);
    let y_of_x = poly_compose(y, &tau, order);
    (1..=order)
        .map(|k| &y_of_x[k] * &Rat::from_integer(factorial(k)))
        .collect()
}

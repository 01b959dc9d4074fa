//! The derivative operators of the jet calculus.
//!
//! Weighted partials `∂^I_A = (r_1!…r_n!/|I|!) ∂/∂x^A_I` and their adapted
//! analogues `Δ^I_σ`, the formal derivatives `d_i = Σ x^A_{iJ} ∂^J_A` on the
//! velocity side and the total derivatives `D_i = ∂/∂x^i + Σ y^σ_{iJ} Δ^J_σ`
//! on the Grassmann side. Formal and total derivatives are order-promoting:
//! applied to an order-`s` expression they land on the order-`s+1` chart,
//! which is what the variational operators of order up to `2r` need.

use super::{Expr, Var};
use crate::error::{Error, Result};
use crate::multiindex::{symmetrized, MultiIndex, Sign};

/// Weighted partial `∂^I_A` on the velocity chart (`I = ∅` is `∂_A`).
pub fn partial_hom(f: &Expr, a: u16, idx: &MultiIndex) -> Expr {
    f.plain_partial(&Var::X { a, idx: idx.clone() }) * idx.weight()
}

/// Weighted partial `Δ^I_σ` on the adapted chart (`I = ∅` is `Δ_σ`).
pub fn delta_adapted(f: &Expr, s: u16, idx: &MultiIndex) -> Expr {
    f.plain_partial(&Var::Y { s, idx: idx.clone() }) * idx.weight()
}

/// `∂/∂x^i` on the adapted chart.
pub fn dx_partial(f: &Expr, k: u16) -> Expr {
    f.plain_partial(&Var::XBase { k })
}

/// Formal derivative `d_i` on the velocity chart; order-promoting. Group
/// coordinates, curve parameters and named constants are treated as
/// constants; adapted variables are rejected. The base arity `n` fixes the
/// direction range of the `x^B_i` factors produced when the expression
/// contains opaque function-symbol jets (`d_i ∂_D ξ^a = Σ_B x^B_i ∂_{DB} ξ^a`).
pub fn formal_derivative_n(f: &Expr, i: u16, n: u16) -> Result<Expr> {
    f.derivation(&move |v: &Var| match v {
        Var::X { a, idx } => Ok(Expr::var(Var::X { a: *a, idx: idx.prepend(i) })),
        Var::XiJet { fam, a, d } => {
            let mut acc = Expr::zero();
            for b in 1..=d.n() {
                let xbi = Expr::var(Var::X { a: b, idx: MultiIndex::of(n, &[i]) });
                let dv = Expr::var(Var::XiJet { fam: *fam, a: *a, d: d.prepend(b) });
                acc = &acc + &(&xbi * &dv);
            }
            Ok(acc)
        }
        Var::GroupA { .. } | Var::T { .. } | Var::Param(_) => Ok(Expr::zero()),
        Var::XBase { .. } | Var::Y { .. } => Err(Error::ShapeMismatch(format!(
            "formal derivative applied to adapted variable {v}"
        ))),
    })
}

/// Chart-checked weighted partial `∂^I_A`: the label must be a velocity
/// label of the chart and `|I|` within its order.
pub fn partial_hom_checked(
    f: &Expr,
    a: u16,
    idx: &MultiIndex,
    chart: &crate::chart::ChartSpec,
) -> Result<Expr> {
    if a == 0 || a > chart.big_n() {
        return Err(Error::IndexOutOfRange(format!(
            "label {a} outside 1..={}",
            chart.big_n()
        )));
    }
    if idx.degree() > chart.r {
        return Err(Error::OrderCap { needed: idx.degree(), cap: chart.r });
    }
    Ok(partial_hom(f, a, idx))
}

/// Chart-checked weighted fibre partial `Δ^I_σ`.
pub fn delta_adapted_checked(
    f: &Expr,
    s: u16,
    idx: &MultiIndex,
    chart: &crate::chart::ChartSpec,
) -> Result<Expr> {
    if s == 0 || s > chart.m {
        return Err(Error::IndexOutOfRange(format!(
            "fibre label {s} outside 1..={}",
            chart.m
        )));
    }
    if idx.degree() > chart.r {
        return Err(Error::OrderCap { needed: idx.degree(), cap: chart.r });
    }
    Ok(delta_adapted(f, s, idx))
}

/// Formal derivative with a hard cap on the resulting jet order, guarding
/// order blow-up in caller-driven loops.
pub fn formal_derivative_capped(f: &Expr, i: u16, n: u16, cap: usize) -> Result<Expr> {
    let needed = f.jet_order() + 1;
    if needed > cap {
        return Err(Error::OrderCap { needed, cap });
    }
    formal_derivative_n(f, i, n)
}

/// Iterated formal derivative `d_I`.
pub fn formal_derivative_multi(f: &Expr, idx: &MultiIndex, n: u16) -> Result<Expr> {
    let mut acc = f.clone();
    for &i in idx.entries() {
        acc = formal_derivative_n(&acc, i, n)?;
    }
    Ok(acc)
}

/// Total derivative `D_i` on the adapted chart; order-promoting.
pub fn total_derivative(f: &Expr, i: u16) -> Result<Expr> {
    f.derivation(&move |v: &Var| match v {
        Var::XBase { k } => Ok(if *k == i { Expr::one() } else { Expr::zero() }),
        Var::Y { s, idx } => Ok(Expr::var(Var::Y { s: *s, idx: idx.prepend(i) })),
        Var::GroupA { .. } | Var::T { .. } | Var::Param(_) => Ok(Expr::zero()),
        Var::X { .. } | Var::XiJet { .. } => Err(Error::ShapeMismatch(format!(
            "total derivative applied to velocity variable {v}"
        ))),
    })
}

/// `D_i` truncated at chart order `r`: derivatives of top-order fibre
/// coordinates are dropped instead of promoting the order. This is the
/// vector field `D_i` genuinely living on the order-`r` chart, the one dual
/// to `dx^i` in the contact cobasis.
pub fn total_derivative_truncated(f: &Expr, i: u16, r: usize) -> Result<Expr> {
    f.derivation(&move |v: &Var| match v {
        Var::XBase { k } => Ok(if *k == i { Expr::one() } else { Expr::zero() }),
        Var::Y { s, idx } => Ok(if idx.degree() >= r {
            Expr::zero()
        } else {
            Expr::var(Var::Y { s: *s, idx: idx.prepend(i) })
        }),
        Var::GroupA { .. } | Var::T { .. } | Var::Param(_) => Ok(Expr::zero()),
        Var::X { .. } | Var::XiJet { .. } => Err(Error::ShapeMismatch(format!(
            "total derivative applied to velocity variable {v}"
        ))),
    })
}

/// Total derivative with a hard cap on the resulting jet order.
pub fn total_derivative_capped(f: &Expr, i: u16, cap: usize) -> Result<Expr> {
    let needed = f.jet_order() + 1;
    if needed > cap {
        return Err(Error::OrderCap { needed, cap });
    }
    total_derivative(f, i)
}

/// Iterated total derivative `D_I`.
pub fn total_derivative_multi(f: &Expr, idx: &MultiIndex) -> Result<Expr> {
    let mut acc = f.clone();
    for &i in idx.entries() {
        acc = total_derivative(&acc, i)?;
    }
    Ok(acc)
}

/// Residual of the commutator identity
/// `[∂^I_A, d_i] f = S⁺_{j_1..j_k} δ^{j_1}_i ∂^{j_2..j_k}_A f`;
/// identically zero.
pub fn commutator_check(f: &Expr, a: u16, idx: &MultiIndex, i: u16, n: u16) -> Result<Expr> {
    let lhs = {
        let df = formal_derivative_n(f, i, n)?;
        let left = partial_hom(&df, a, idx);
        let right = formal_derivative_n(&partial_hom(f, a, idx), i, n)?;
        &left - &right
    };
    let rhs = if idx.is_empty() {
        Expr::zero()
    } else {
        symmetrized(Sign::Plus, idx.entries(), |tuple: &[u16]| {
            if tuple[0] != i {
                return Expr::zero();
            }
            let rest = MultiIndex::of(idx.n(), &tuple[1..]);
            partial_hom(f, a, &rest)
        })
    };
    Ok(&lhs - &rhs)
}

/// Fresh opaque base-only function symbols `ξ^a`, `a = 1..=big_n`, as jets
/// over labels; family `fam` keeps independent symbol sets apart.
pub fn opaque_component(fam: u16, a: u16, big_n: u16) -> Expr {
    Expr::var(Var::XiJet { fam, a, d: MultiIndex::empty(big_n) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartSpec;
    use crate::expr::parse;
    use crate::multiindex::MultiIndex;

    fn mi(n: u16, e: &[u16]) -> MultiIndex {
        MultiIndex::of(n, e)
    }

    #[test]
    fn weighted_partial_on_coordinates() {
        // ∂^{1,2}_A x^A_{1,2} = 1/2 for n = 2
        let x12 = Expr::var(Var::X { a: 1, idx: mi(2, &[1, 2]) });
        let d = partial_hom(&x12, 1, &mi(2, &[1, 2]));
        assert_eq!(d, Expr::from_rat(crate::ratio::rat(1, 2)));
        // ∂^{1,1}_A x^A_{1,1} = 1
        let x11 = Expr::var(Var::X { a: 1, idx: mi(2, &[1, 1]) });
        assert_eq!(partial_hom(&x11, 1, &mi(2, &[1, 1])), Expr::one());
        // degree or label mismatch gives zero
        let xb = Expr::var(Var::X { a: 2, idx: mi(2, &[]) });
        assert!(partial_hom(&xb, 1, &mi(2, &[1])).is_zero());
    }

    #[test]
    fn formal_derivative_basics() {
        let n = 1;
        // d_1(x^1 x^2) = x^1_1 x^2 + x^1 x^2_1
        let x1 = Expr::var(Var::X { a: 1, idx: mi(n, &[]) });
        let x2 = Expr::var(Var::X { a: 2, idx: mi(n, &[]) });
        let x1_1 = Expr::var(Var::X { a: 1, idx: mi(n, &[1]) });
        let x2_1 = Expr::var(Var::X { a: 2, idx: mi(n, &[1]) });
        let d = formal_derivative_n(&(&x1 * &x2), 1, n).unwrap();
        assert_eq!(d, &(&x1_1 * &x2) + &(&x1 * &x2_1));
        // d_1 x^A_1 = x^A_{11}
        let d2 = formal_derivative_n(&x1_1, 1, n).unwrap();
        assert_eq!(d2, Expr::var(Var::X { a: 1, idx: mi(n, &[1, 1]) }));
    }

    #[test]
    fn formal_derivatives_commute() {
        let chart = ChartSpec::homogeneous(2, 1, 2);
        let f = parse("X1_12*X3_2^2 + X2_1*X1 - 3*X3_11", &chart).unwrap();
        let d12 = formal_derivative_n(&formal_derivative_n(&f, 2, 2).unwrap(), 1, 2).unwrap();
        let d21 = formal_derivative_n(&formal_derivative_n(&f, 1, 2).unwrap(), 2, 2).unwrap();
        assert_eq!(d12, d21);
    }

    #[test]
    fn total_derivative_basics() {
        let n = 2;
        // D_1 x^1 = 1
        let x1 = Expr::var(Var::XBase { k: 1 });
        assert_eq!(total_derivative(&x1, 1).unwrap(), Expr::one());
        // D_1 y^1 = y^1_1
        let y = Expr::var(Var::Y { s: 1, idx: mi(n, &[]) });
        assert_eq!(
            total_derivative(&y, 1).unwrap(),
            Expr::var(Var::Y { s: 1, idx: mi(n, &[1]) })
        );
    }

    #[test]
    fn total_derivatives_commute() {
        let chart = ChartSpec::adapted(2, 2, 2);
        let f = parse("y1_12*y2_2^2 + x1*y1 - 3*y2_11*x2", &chart).unwrap();
        let d12 = total_derivative(&total_derivative(&f, 2).unwrap(), 1).unwrap();
        let d21 = total_derivative(&total_derivative(&f, 1).unwrap(), 2).unwrap();
        assert_eq!(d12, d21);
    }

    #[test]
    fn derivations_satisfy_leibniz() {
        let chart = ChartSpec::homogeneous(2, 1, 2);
        let f = parse("X1_1*X2_12 + X3^2", &chart).unwrap();
        let g = parse("X2_2 - X1*X3_11", &chart).unwrap();
        let lhs = formal_derivative_n(&(&f * &g), 1, 2).unwrap();
        let rhs = &(&formal_derivative_n(&f, 1, 2).unwrap() * &g)
            + &(&f * &formal_derivative_n(&g, 1, 2).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn commutator_identity_small_sweep() {
        let n = 2;
        let chart = ChartSpec::homogeneous(n, 1, 2);
        let f = parse("X1_11*X3_2 + X2_12^2*X1 - X3_22", &chart).unwrap();
        for a in 1..=3u16 {
            for i in 1..=n {
                for idx in MultiIndex::all(n, 0, 2) {
                    let res = commutator_check(&f, a, &idx, i, n).unwrap();
                    assert!(res.is_zero(), "a={a} i={i} I={idx:?}: {res}");
                }
            }
        }
    }

    #[test]
    fn df_reconstruction_is_first_order_taylor() {
        // Σ_I (∂^I_A f) δx^A_I with formal increments equals the ε-linear
        // part of f(x + ε δ): the weighted partials with ordered summation
        // collapse to plain partials on canonical coordinates
        use std::collections::BTreeMap;
        use std::sync::Arc;
        let n = 2;
        let chart = ChartSpec::homogeneous(n, 1, 2);
        let mut s = crate::sample::Sampler::new(7);
        let f = s.poly_on_chart(&chart, 3, 5);
        let eps = Expr::var(Var::Param(Arc::from("eps")));
        let delta = |v: &Var| -> Expr {
            Expr::var(Var::Param(Arc::from(format!("d{v}").as_str())))
        };
        let shift: BTreeMap<Var, Expr> = chart
            .variables()
            .into_iter()
            .map(|v| {
                let moved = &Expr::var(v.clone()) + &(&eps * &delta(&v));
                (v, moved)
            })
            .collect();
        let shifted = f.subst(&shift).unwrap();
        // ε-linear coefficient via (f(x+εδ) - f(x) - ε²·(...))/ε at ε = 0:
        // extract by differentiating in ε and evaluating ε -> 0
        let d_eps = shifted.plain_partial(&Var::Param(Arc::from("eps")));
        let at_zero: BTreeMap<Var, Expr> =
            [(Var::Param(Arc::from("eps")), Expr::zero())].into();
        let linear = d_eps.subst(&at_zero).unwrap();
        let mut reconstruction = Expr::zero();
        for v in chart.variables() {
            let Var::X { a, idx } = v.clone() else { unreachable!() };
            // ordered summation over I of ∂^I_A f δx^A_I = canonical
            // summation of orderings(I) · ∂^I_A f · δx^A_I
            let coeff = partial_hom(&f, a, &idx) * crate::ratio::rat_int(idx.orderings() as i64);
            reconstruction = &reconstruction + &(&coeff * &delta(&v));
        }
        assert!(linear.equivalent(&reconstruction));
    }

    #[test]
    fn checked_partials_enforce_chart_ranges() {
        let chart = ChartSpec::adapted(1, 1, 1);
        let f = parse("y1_1^2", &chart).unwrap();
        assert!(delta_adapted_checked(&f, 1, &mi(1, &[1]), &chart).is_ok());
        assert!(matches!(
            delta_adapted_checked(&f, 2, &mi(1, &[1]), &chart),
            Err(crate::error::Error::IndexOutOfRange(_))
        ));
        assert!(matches!(
            delta_adapted_checked(&f, 1, &mi(1, &[1, 1]), &chart),
            Err(crate::error::Error::OrderCap { .. })
        ));
        let hom = ChartSpec::homogeneous(1, 1, 1);
        let g = parse("X2_1", &hom).unwrap();
        assert!(partial_hom_checked(&g, 2, &mi(1, &[1]), &hom).is_ok());
        assert!(partial_hom_checked(&g, 3, &mi(1, &[1]), &hom).is_err());
    }

    #[test]
    fn square_root_lagrangians_differentiate() {
        // non-polynomial Lagrangians are supported by the derivative
        // machinery through the registered square-root rule
        let chart = ChartSpec::homogeneous(1, 1, 1);
        let lag = parse("sqrt(X1_1^2 + X2_1^2)", &chart).unwrap();
        let d = partial_hom(&lag, 1, &mi(1, &[1]));
        // ∂𝓛/∂x¹_1 = x¹_1 / sqrt((x¹_1)² + (x²_1)²)
        let root = parse("sqrt(X1_1^2 + X2_1^2)", &chart).unwrap();
        let x11 = Expr::var(Var::X { a: 1, idx: mi(1, &[1]) });
        assert!(d.equivalent(&x11.div_checked(&root).unwrap()));
        // and the full Euler-Lagrange derivation runs without panicking
        let e = crate::variational::euler_lagrange_expr(
            &lag,
            2,
            1,
            crate::variational::Side::Homogeneous,
            1,
        )
        .unwrap();
        assert!(e.has_apps());
    }

    #[test]
    fn order_caps_guard_promotion() {
        let chart = ChartSpec::adapted(1, 1, 2);
        let f = parse("y1_11^2", &chart).unwrap();
        assert!(matches!(
            total_derivative_capped(&f, 1, 2),
            Err(crate::error::Error::OrderCap { needed: 3, cap: 2 })
        ));
        assert!(total_derivative_capped(&f, 1, 3).is_ok());
        let hom = ChartSpec::homogeneous(1, 1, 1);
        let g = parse("X2_1^2", &hom).unwrap();
        assert!(matches!(
            formal_derivative_capped(&g, 1, 1, 1),
            Err(crate::error::Error::OrderCap { .. })
        ));
    }

    #[test]
    fn opaque_jets_chain_through_formal_derivative() {
        let n = 1;
        let big_n = 2;
        let xi = opaque_component(0, 1, big_n);
        let d = formal_derivative_n(&xi, 1, n).unwrap();
        // d_1 ξ^1 = x^1_1 ∂_1 ξ^1 + x^2_1 ∂_2 ξ^1
        let expect = Expr::sum((1..=big_n).map(|b| {
            &Expr::var(Var::X { a: b, idx: mi(n, &[1]) })
                * &Expr::var(Var::XiJet { fam: 0, a: 1, d: mi(big_n, &[b]) })
        }));
        assert_eq!(d, expect);
    }
}

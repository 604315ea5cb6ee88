//! Differentiation, substitution and signature extraction.

use super::eval::is_identically_zero;
use super::{simplify, Expr, SigmaEntry, VarId};
use std::collections::BTreeSet;

/// m-th total time derivative, simplified.
///
/// Each differentiation raises `Var`/`NewVar`/`Driver` orders by one and
/// applies the product and chain rules; t differentiates to 1.
pub fn total_derivative(e: &Expr, m: u32) -> Expr {
    let mut cur = simplify(e.clone());
    for _ in 0..m {
        cur = simplify(ddt(&cur));
    }
    cur
}

fn ddt(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Param(_) => Expr::zero(),
        Expr::Time => Expr::one(),
        Expr::Var(j, k) => Expr::Var(*j, k + 1),
        Expr::NewVar(j, k) => Expr::NewVar(*j, k + 1),
        Expr::Driver(name, k) => Expr::Driver(name.clone(), k + 1),
        Expr::Sum(ts) => Expr::Sum(ts.iter().map(ddt).collect()),
        Expr::Prod(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for (i, _) in fs.iter().enumerate() {
                let mut factors = fs.clone();
                factors[i] = ddt(&fs[i]);
                terms.push(Expr::Prod(factors));
            }
            Expr::Sum(terms)
        }
        Expr::Neg(a) => Expr::Neg(Box::new(ddt(a))),
        Expr::Div(a, b) => {
            // (a/b)' = a'/b - a b'/b^2
            let a1 = ddt(a);
            let b1 = ddt(b);
            Expr::Sum(vec![
                Expr::Div(Box::new(a1), b.clone()),
                Expr::Neg(Box::new(Expr::Div(
                    Box::new(Expr::Prod(vec![a.as_ref().clone(), b1])),
                    Box::new(Expr::Pow(b.clone(), 2)),
                ))),
            ])
        }
        Expr::Pow(b, k) => Expr::Prod(vec![
            Expr::int(*k as i64),
            Expr::Pow(b.clone(), k - 1),
            ddt(b),
        ]),
        Expr::Sin(a) => Expr::Prod(vec![Expr::Cos(a.clone()), ddt(a)]),
        Expr::Cos(a) => Expr::Neg(Box::new(Expr::Prod(vec![Expr::Sin(a.clone()), ddt(a)]))),
        Expr::Exp(a) => Expr::Prod(vec![Expr::Exp(a.clone()), ddt(a)]),
    }
}

/// ∂e/∂(x_j^(k)), treating each distinct derivative as an independent
/// symbol. Returns 0 when the derivative is absent.
pub fn partial(e: &Expr, j: VarId, k: u32) -> Expr {
    simplify(partial_raw(e, j, k))
}

fn partial_raw(e: &Expr, j: VarId, k: u32) -> Expr {
    match e {
        Expr::Num(_) | Expr::Param(_) | Expr::Time | Expr::Driver(..) => Expr::zero(),
        Expr::Var(j2, k2) | Expr::NewVar(j2, k2) => {
            if *j2 == j && *k2 == k {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Sum(ts) => Expr::Sum(ts.iter().map(|t| partial_raw(t, j, k)).collect()),
        Expr::Prod(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for (i, _) in fs.iter().enumerate() {
                let mut factors = fs.clone();
                factors[i] = partial_raw(&fs[i], j, k);
                terms.push(Expr::Prod(factors));
            }
            Expr::Sum(terms)
        }
        Expr::Neg(a) => Expr::Neg(Box::new(partial_raw(a, j, k))),
        Expr::Div(a, b) => Expr::Sum(vec![
            Expr::Div(Box::new(partial_raw(a, j, k)), b.clone()),
            Expr::Neg(Box::new(Expr::Div(
                Box::new(Expr::Prod(vec![a.as_ref().clone(), partial_raw(b, j, k)])),
                Box::new(Expr::Pow(b.clone(), 2)),
            ))),
        ]),
        Expr::Pow(b, kk) => Expr::Prod(vec![
            Expr::int(*kk as i64),
            Expr::Pow(b.clone(), kk - 1),
            partial_raw(b, j, k),
        ]),
        Expr::Sin(a) => Expr::Prod(vec![Expr::Cos(a.clone()), partial_raw(a, j, k)]),
        Expr::Cos(a) => Expr::Neg(Box::new(Expr::Prod(vec![
            Expr::Sin(a.clone()),
            partial_raw(a, j, k),
        ]))),
        Expr::Exp(a) => Expr::Prod(vec![Expr::Exp(a.clone()), partial_raw(a, j, k)]),
    }
}

fn syntactic_orders(e: &Expr, j: VarId, acc: &mut BTreeSet<u32>) {
    if let Some((j2, k)) = e.as_var() {
        if j2 == j {
            acc.insert(k);
        }
    }
    for c in e.children() {
        syntactic_orders(c, j, acc);
    }
}

/// σ(x_j, e): order of the highest derivative to which x_j genuinely
/// occurs in e, −∞ when absent.
///
/// Occurrence is syntactic on the simplified expression, with a
/// probabilistic guard against hidden cancellations: if ∂e/∂x_j^(k) is
/// identically zero for the top syntactic order k, the next lower order is
/// tried. A probe exhaustion in the guard keeps the syntactic order, which
/// errs on the structural (generic) side.
pub fn sigma_of(e: &Expr, j: VarId) -> SigmaEntry {
    let mut orders = BTreeSet::new();
    syntactic_orders(e, j, &mut orders);
    for k in orders.into_iter().rev() {
        let p = partial(e, j, k);
        if !is_identically_zero(&p).unwrap_or(false) {
            return SigmaEntry::finite(k as i32);
        }
    }
    SigmaEntry::NEG_INF
}

/// Replace every occurrence of x_j^(k) — that exact order only — by the
/// replacement expression, then simplify.
pub fn substitute(e: &Expr, target: (VarId, u32), replacement: &Expr) -> Expr {
    simplify(substitute_raw(e, target, replacement))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{eval_exact, eval_f64, random_assignment, Assignment, SymbolSet};
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn x(j: usize, k: u32) -> Expr {
        Expr::Var(VarId(j), k)
    }

    #[test]
    fn derivative_of_sum_with_driver() {
        // (x1 + x2 + h1(t))' = x1' + x2' + h1'(t)
        let e = x(0, 0) + x(1, 0) + Expr::driver("h1", 0);
        let expected = simplify(x(0, 1) + x(1, 1) + Expr::driver("h1", 1));
        assert_eq!(total_derivative(&e, 1), expected);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        assert_eq!(total_derivative(&Expr::int(5), 1), Expr::zero());
        assert_eq!(total_derivative(&Expr::param("L"), 3), Expr::zero());
    }

    #[test]
    fn second_derivative_of_circle_constraint() {
        // (x² + y² − L²)'' = 2x x'' + 2(x')² + 2y y'' + 2(y')²
        let e = x(0, 0).pow(2) + x(1, 0).pow(2) - Expr::param("L").pow(2);
        let expected = simplify(
            Expr::int(2) * x(0, 0) * x(0, 2)
                + Expr::int(2) * x(0, 1).pow(2)
                + Expr::int(2) * x(1, 0) * x(1, 2)
                + Expr::int(2) * x(1, 1).pow(2),
        );
        assert_eq!(total_derivative(&e, 2), expected);
    }

    #[test]
    fn partial_of_intro_f2() {
        // ∂((x1'+x2')·x3' + x1)/∂x3' = x1' + x2'
        let e = (x(0, 1) + x(1, 1)) * x(2, 1) + x(0, 0);
        assert_eq!(partial(&e, VarId(2), 1), simplify(x(0, 1) + x(1, 1)));
        // Absent derivative.
        assert_eq!(partial(&x(0, 0), VarId(0), 1), Expr::zero());
    }

    #[test]
    fn partial_matches_finite_differences() {
        // e = 2 c(x3) (x1' + x3')², ∂e/∂x1' checked at 3 random points
        // with central differences, step 1e-6, relative tolerance 1e-5.
        let c_of = |a: Expr| a.clone().sin() * (Expr::int(2) - a.cos().pow(2)).pow(-1);
        let e = simplify(Expr::int(2) * c_of(x(2, 0)) * (x(0, 1) + x(2, 1)).pow(2));
        let p = partial(&e, VarId(0), 1);

        let symbols = SymbolSet::collect(&[&e]);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..3 {
            let a = random_assignment(&symbols, &mut rng);
            let h = 1e-6;
            let mut plus = a.clone();
            plus.vars.insert((VarId(0), 1), a.vars[&(VarId(0), 1)] + h);
            let mut minus = a.clone();
            minus.vars.insert((VarId(0), 1), a.vars[&(VarId(0), 1)] - h);
            let fd =
                (eval_f64(&e, &plus).unwrap() - eval_f64(&e, &minus).unwrap()) / (2.0 * h);
            let sym = eval_f64(&p, &a).unwrap();
            assert!(
                (fd - sym).abs() <= 1e-5 * sym.abs().max(1.0),
                "finite difference {fd} vs symbolic {sym}"
            );
        }
    }

    #[test]
    fn sigma_of_spec_examples() {
        // x1 occurs to order 1 in x1 + (x1'+x2')x3' + h2(t).
        let f2 = simplify(x(0, 0) + (x(0, 1) + x(1, 1)) * x(2, 1) + Expr::driver("h2", 0));
        assert_eq!(sigma_of(&f2, VarId(0)), SigmaEntry::finite(1));
        // Absent variable.
        assert_eq!(sigma_of(&Expr::driver("h3", 0), VarId(0)), SigmaEntry::NEG_INF);
        // (v''')³ + v·mu − G: v occurs to order 3.
        let f5 = simplify(x(0, 3).pow(3) + x(0, 0) * x(1, 0) - Expr::param("G"));
        assert_eq!(sigma_of(&f5, VarId(0)), SigmaEntry::finite(3));
    }

    #[test]
    fn sigma_sees_through_hidden_cancellation() {
        // x1' occurs syntactically but the partial cancels, so σ drops to
        // the order-0 occurrence.
        let e = simplify(x(0, 1) * x(1, 0) - x(1, 0) * x(0, 1) + x(0, 0));
        assert_eq!(sigma_of(&e, VarId(0)), SigmaEntry::finite(0));
        // Hidden cancellation that is only caught numerically.
        let hidden = Expr::Sum(vec![
            Expr::Prod(vec![x(0, 1), x(1, 0).sin().pow(2)]),
            Expr::Prod(vec![x(0, 1), x(1, 0).cos().pow(2)]),
            Expr::Prod(vec![Expr::int(-1), x(0, 1)]),
            x(0, 0),
        ]);
        assert_eq!(sigma_of(&hidden, VarId(0)), SigmaEntry::finite(0));
    }

    #[test]
    fn substitution_replaces_exact_orders_only() {
        // x1 ↦ y1 − x2 in x1 + x2 + h1(t) gives y1 + h1(t).
        let e = simplify(x(0, 0) + x(1, 0) + Expr::driver("h1", 0));
        let replacement = simplify(Expr::NewVar(VarId(3), 0) - x(1, 0));
        let got = substitute(&e, (VarId(0), 0), &replacement);
        assert_eq!(
            got,
            simplify(Expr::NewVar(VarId(3), 0) + Expr::driver("h1", 0))
        );
        // Absent target leaves the expression unchanged.
        let unchanged = substitute(&e, (VarId(2), 1), &Expr::zero());
        assert_eq!(unchanged, e);
        // Substituting order 0 does not touch order 1.
        let mixed = simplify(x(0, 0) + x(0, 1));
        let got = substitute(&mixed, (VarId(0), 0), &Expr::zero());
        assert_eq!(got, x(0, 1));
    }

    #[test]
    fn substitution_checked_by_exact_evaluation() {
        // x5 ↦ y5 + x4 in x5 − x4 gives y5; five random rational points.
        let e = simplify(x(4, 0) - x(3, 0));
        let replacement = simplify(Expr::NewVar(VarId(5), 0) + x(3, 0));
        let got = substitute(&e, (VarId(4), 0), &replacement);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let mut vars: BTreeMap<(VarId, u32), BigRational> = BTreeMap::new();
            for id in [3usize, 5] {
                vars.insert(
                    (VarId(id), 0),
                    BigRational::new(rng.gen_range(-50i64..50).into(), rng.gen_range(1i64..9).into()),
                );
            }
            let lhs = eval_exact(&got, &vars, &BTreeMap::new()).unwrap();
            let rhs = vars[&(VarId(5), 0)].clone();
            assert_eq!(lhs, rhs);
        }
    }

    // Random expressions over a small symbol pool, for property checks.
    fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
        if depth == 0 {
            return match rng.gen_range(0..6) {
                0 => Expr::int(rng.gen_range(-3..=3)),
                1 => Expr::param("p"),
                2 => Expr::Time,
                3 => Expr::driver("h", rng.gen_range(0..2)),
                _ => x(rng.gen_range(0..2), rng.gen_range(0..2)),
            };
        }
        match rng.gen_range(0..8) {
            0 => Expr::Sum((0..rng.gen_range(2..4)).map(|_| random_expr(rng, depth - 1)).collect()),
            1 => Expr::Prod((0..rng.gen_range(2..3)).map(|_| random_expr(rng, depth - 1)).collect()),
            2 => Expr::Neg(Box::new(random_expr(rng, depth - 1))),
            3 => Expr::Pow(Box::new(random_expr(rng, depth - 1)), rng.gen_range(1..3)),
            4 => Expr::Sin(Box::new(random_expr(rng, depth - 1))),
            5 => Expr::Cos(Box::new(random_expr(rng, depth - 1))),
            6 => Expr::Exp(Box::new(random_expr(rng, depth - 1))),
            _ => random_expr(rng, depth - 1),
        }
    }

    #[test]
    fn simplification_is_idempotent_on_random_expressions() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let e = random_expr(&mut rng, 3);
            let once = simplify(e.clone());
            assert_eq!(simplify(once.clone()), once, "input {e:?}");
        }
    }

    #[test]
    fn differentiation_raises_sigma_by_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut checked = 0;
        for _ in 0..2000 {
            if checked == 60 {
                break;
            }
            let e = simplify(random_expr(&mut rng, 3));
            let j = VarId(0);
            let s = sigma_of(&e, j);
            let Some(k) = s.order() else { continue };
            let ds = sigma_of(&total_derivative(&e, 1), j);
            assert_eq!(ds, SigmaEntry::finite(k + 1), "expr {e:?}");
            checked += 1;
        }
        assert_eq!(checked, 60, "generator failed to cover the property");
    }

    #[test]
    fn nonzero_partial_bounds_sigma_from_below() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..80 {
            let e = simplify(random_expr(&mut rng, 3));
            for k in 0..2u32 {
                let p = partial(&e, VarId(0), k);
                if !crate::symbolic::is_identically_zero(&p).unwrap_or(true) {
                    let s = sigma_of(&e, VarId(0)).order().unwrap_or(-1);
                    assert!(s >= k as i32, "expr {e:?}, partial order {k}");
                }
            }
        }
    }

    #[test]
    fn derivative_orders_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..40 {
            let e = simplify(random_expr(&mut rng, 2));
            let both = total_derivative(&e, 3);
            let split = total_derivative(&total_derivative(&e, 2), 1);
            // Structural comparison is exact here because both paths
            // simplify at each step.
            assert_eq!(both, split, "expr {e:?}");
        }
    }

    #[test]
    fn substitute_then_back_is_identity_at_random_points() {
        // x ↦ y + 1 followed by y ↦ x − 1 restores values everywhere.
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..40 {
            let e = simplify(random_expr(&mut rng, 3));
            let fwd = substitute(&e, (VarId(0), 0), &simplify(x(1, 0) + Expr::one()));
            let back = substitute(&fwd, (VarId(1), 0), &simplify(x(0, 0) - Expr::one()));
            // fwd∘back has x(1,0) pinned to x(0,0) − 1 + 1 = x(0,0) only
            // where x(1,0) came from the forward pass, so compare the
            // composite against the original with x(1,0) equated.
            let symbols = SymbolSet::collect(&[&e, &back]);
            let mut inner = ChaCha8Rng::seed_from_u64(7);
            let mut tested = 0;
            for _ in 0..100 {
                if tested == 5 {
                    break;
                }
                let mut a: Assignment = random_assignment(&symbols, &mut inner);
                if let Some(v) = a.vars.get(&(VarId(0), 0)).copied() {
                    a.vars.insert((VarId(1), 0), v - 1.0);
                }
                let (Ok(lhs), Ok(rhs)) = (eval_f64(&e, &a), eval_f64(&back, &a)) else {
                    continue;
                };
                assert!(
                    (lhs - rhs).abs() <= 1e-6 * lhs.abs().max(1.0),
                    "expr {e:?}: {lhs} vs {rhs}"
                );
                tested += 1;
            }
        }
    }
}

fn substitute_raw(e: &Expr, target: (VarId, u32), replacement: &Expr) -> Expr {
    if let Some((j, k)) = e.as_var() {
        if (j, k) == target {
            return replacement.clone();
        }
        return e.clone();
    }
    match e {
        Expr::Num(_) | Expr::Param(_) | Expr::Time | Expr::Driver(..) => e.clone(),
        Expr::Sum(ts) => Expr::Sum(
            ts.iter()
                .map(|t| substitute_raw(t, target, replacement))
                .collect(),
        ),
        Expr::Prod(fs) => Expr::Prod(
            fs.iter()
                .map(|f| substitute_raw(f, target, replacement))
                .collect(),
        ),
        Expr::Neg(a) => Expr::Neg(Box::new(substitute_raw(a, target, replacement))),
        Expr::Div(a, b) => Expr::Div(
            Box::new(substitute_raw(a, target, replacement)),
            Box::new(substitute_raw(b, target, replacement)),
        ),
        Expr::Pow(b, k) => Expr::Pow(Box::new(substitute_raw(b, target, replacement)), *k),
        Expr::Sin(a) => Expr::Sin(Box::new(substitute_raw(a, target, replacement))),
        Expr::Cos(a) => Expr::Cos(Box::new(substitute_raw(a, target, replacement))),
        Expr::Exp(a) => Expr::Exp(Box::new(substitute_raw(a, target, replacement))),
        Expr::Var(..) | Expr::NewVar(..) => unreachable!("handled above"),
    }
}

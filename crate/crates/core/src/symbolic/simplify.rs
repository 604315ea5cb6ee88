//! Expression simplification: constant folding, flattening of sums and
//! products, collection of identical subterms with rational coefficients,
//! integer-power rules, and extraction of denominators common to every
//! term of a sum. No expansion of products over sums and no trigonometric
//! canonicalization; zero testing beyond this rule set is probabilistic
//! (see `eval::is_identically_zero`).

use super::Expr;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Simplify to the canonical form used throughout the crate. Idempotent.
///
/// After simplification no `Neg` or `Div` nodes remain: negation is folded
/// into rational coefficients and quotients become negative integer powers
/// inside products.
pub fn simplify(e: Expr) -> Expr {
    match e {
        Expr::Num(_)
        | Expr::Param(_)
        | Expr::Time
        | Expr::Var(..)
        | Expr::NewVar(..)
        | Expr::Driver(..) => e,
        Expr::Neg(a) => simplify_sum(vec![simplify_prod(vec![Expr::int(-1), simplify(*a)])]),
        Expr::Div(a, b) => {
            let den = simplify_pow(simplify(*b), -1);
            simplify_prod(vec![simplify(*a), den])
        }
        Expr::Sum(ts) => simplify_sum(ts.into_iter().map(simplify).collect()),
        Expr::Prod(fs) => simplify_prod(fs.into_iter().map(simplify).collect()),
        Expr::Pow(b, k) => simplify_pow(simplify(*b), k),
        Expr::Sin(a) => {
            let a = simplify(*a);
            if a.is_zero_literal() {
                Expr::zero()
            } else {
                Expr::Sin(Box::new(a))
            }
        }
        Expr::Cos(a) => {
            let a = simplify(*a);
            if a.is_zero_literal() {
                Expr::one()
            } else {
                Expr::Cos(Box::new(a))
            }
        }
        Expr::Exp(a) => {
            let a = simplify(*a);
            if a.is_zero_literal() {
                Expr::one()
            } else {
                Expr::Exp(Box::new(a))
            }
        }
    }
}

/// Distribute products over sums and expand nonnegative integer powers of
/// sums, then recollect. Not part of [`simplify`]'s rule set — combined
/// equations use it once so their cancellations happen termwise.
pub fn expand(e: &Expr) -> Expr {
    simplify(expand_raw(simplify(e.clone())))
}

fn expand_raw(e: Expr) -> Expr {
    match e {
        Expr::Sum(ts) => Expr::Sum(ts.into_iter().map(expand_raw).collect()),
        Expr::Prod(fs) => {
            let mut acc: Vec<Expr> = vec![Expr::one()];
            for f in fs.into_iter().map(expand_raw) {
                match f {
                    Expr::Sum(ts) => {
                        let mut next = Vec::with_capacity(acc.len() * ts.len());
                        for t in &ts {
                            for a in &acc {
                                next.push(Expr::Prod(vec![a.clone(), t.clone()]));
                            }
                        }
                        acc = next;
                    }
                    other => {
                        for a in &mut acc {
                            let prev = std::mem::replace(a, Expr::one());
                            *a = Expr::Prod(vec![prev, other.clone()]);
                        }
                    }
                }
            }
            Expr::Sum(acc)
        }
        Expr::Pow(b, k) if k >= 2 => {
            let base = expand_raw(*b);
            if matches!(base, Expr::Sum(_)) {
                expand_raw(Expr::Prod(vec![base; k as usize]))
            } else {
                Expr::Pow(Box::new(base), k)
            }
        }
        Expr::Pow(b, k) => Expr::Pow(b, k),
        Expr::Sin(a) => Expr::Sin(Box::new(expand_raw(*a))),
        Expr::Cos(a) => Expr::Cos(Box::new(expand_raw(*a))),
        Expr::Exp(a) => Expr::Exp(Box::new(expand_raw(*a))),
        other => other,
    }
}

fn rational_pow(r: &BigRational, k: i32) -> BigRational {
    let mag = r.pow(k.unsigned_abs() as i32);
    if k < 0 {
        mag.recip()
    } else {
        mag
    }
}

/// `base^k` with simplified `base`.
fn simplify_pow(base: Expr, k: i32) -> Expr {
    if k == 0 {
        return Expr::one();
    }
    if k == 1 {
        return base;
    }
    match base {
        // 0^k with k < 0 is left alone; evaluation reports the singularity.
        Expr::Num(r) => {
            if r.is_zero() && k < 0 {
                Expr::Pow(Box::new(Expr::Num(r)), k)
            } else {
                Expr::Num(rational_pow(&r, k))
            }
        }
        Expr::Pow(inner, k2) => simplify_pow(*inner, k.checked_mul(k2).expect("power overflow")),
        Expr::Prod(fs) => simplify_prod(fs.into_iter().map(|f| simplify_pow(f, k)).collect()),
        other => Expr::Pow(Box::new(other), k),
    }
}

/// Factor decomposition of a simplified expression: rational coefficient
/// plus a base -> exponent map.
fn factor_map(e: &Expr) -> (BigRational, BTreeMap<Expr, i32>) {
    let mut coeff = BigRational::one();
    let mut map = BTreeMap::new();
    let push = |f: &Expr, map: &mut BTreeMap<Expr, i32>, coeff: &mut BigRational| match f {
        Expr::Num(r) => *coeff *= r.clone(),
        Expr::Pow(b, k) => *map.entry(b.as_ref().clone()).or_insert(0) += *k,
        other => *map.entry(other.clone()).or_insert(0) += 1,
    };
    match e {
        Expr::Prod(fs) => {
            for f in fs {
                push(f, &mut map, &mut coeff);
            }
        }
        other => push(other, &mut map, &mut coeff),
    }
    (coeff, map)
}

/// Rebuild a canonical product from a coefficient and factor map.
fn build_prod(coeff: BigRational, map: BTreeMap<Expr, i32>) -> Expr {
    if coeff.is_zero() {
        return Expr::zero();
    }
    let mut coeff = coeff;
    let mut factors: Vec<Expr> = Vec::new();
    for (base, k) in map {
        if k == 0 {
            continue;
        }
        if let Expr::Num(r) = &base {
            if !(r.is_zero() && k < 0) {
                coeff *= rational_pow(r, k);
                continue;
            }
        }
        if k == 1 {
            factors.push(base);
        } else {
            factors.push(Expr::Pow(Box::new(base), k));
        }
    }
    if coeff.is_zero() {
        return Expr::zero();
    }
    if factors.is_empty() {
        return Expr::Num(coeff);
    }
    if !coeff.is_one() {
        factors.insert(0, Expr::Num(coeff));
    }
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::Prod(factors)
    }
}

fn simplify_prod(factors: Vec<Expr>) -> Expr {
    let mut coeff = BigRational::one();
    let mut map: BTreeMap<Expr, i32> = BTreeMap::new();
    let mut stack = factors;
    stack.reverse();
    while let Some(f) = stack.pop() {
        match f {
            Expr::Prod(inner) => stack.extend(inner.into_iter().rev()),
            Expr::Num(r) => {
                if r.is_zero() {
                    return Expr::zero();
                }
                coeff *= r;
            }
            Expr::Pow(b, k) => *map.entry(*b).or_insert(0) += k,
            other => *map.entry(other).or_insert(0) += 1,
        }
    }
    build_prod(coeff, map)
}

fn simplify_sum(terms: Vec<Expr>) -> Expr {
    let mut constant = BigRational::zero();
    // core (product without its rational coefficient) -> accumulated coefficient
    let mut cores: BTreeMap<Expr, BigRational> = BTreeMap::new();
    let mut stack = terms;
    stack.reverse();
    while let Some(t) = stack.pop() {
        match t {
            Expr::Sum(inner) => stack.extend(inner.into_iter().rev()),
            Expr::Num(r) => constant += r,
            other => {
                let (coeff, map) = factor_map(&other);
                if map.is_empty() {
                    constant += coeff;
                    continue;
                }
                if coeff.is_zero() {
                    continue;
                }
                // A term that is a rational multiple of one sum expands
                // into scaled terms, so combined equations collect and
                // cancel against each other. Only here, at sum level —
                // coefficients inside products stay put so reciprocal
                // bases keep cancelling.
                if map.len() == 1 {
                    if let Some((Expr::Sum(inner), 1)) = map.iter().next().map(|(b, k)| (b, *k)) {
                        for t in inner {
                            stack.push(simplify_prod(vec![
                                Expr::Num(coeff.clone()),
                                t.clone(),
                            ]));
                        }
                        continue;
                    }
                }
                let core = build_prod(BigRational::one(), map);
                *cores.entry(core).or_insert_with(BigRational::zero) += coeff;
            }
        }
    }

    let mut out: Vec<Expr> = Vec::new();
    if !constant.is_zero() {
        out.push(Expr::Num(constant));
    }
    for (core, coeff) in cores {
        if coeff.is_zero() {
            continue;
        }
        if coeff.is_one() {
            out.push(core);
        } else {
            let (c2, map) = factor_map(&core);
            out.push(build_prod(coeff * c2, map));
        }
    }
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => extract_common_denominator(out),
    }
}

fn leading_coeff_negative(t: &Expr) -> bool {
    match t {
        Expr::Num(r) => r.is_negative(),
        Expr::Prod(fs) => matches!(fs.first(), Some(Expr::Num(r)) if r.is_negative()),
        _ => false,
    }
}

/// Canonical multi-term sum: sorted, and sign-normalized so the leading
/// term has a positive coefficient — otherwise −1 is factored out. A
/// quantity and its negation thus share one sum base, which keeps
/// collection across combined equations exact.
fn build_sum(mut terms: Vec<Expr>) -> Expr {
    match terms.len() {
        0 => return Expr::zero(),
        1 => return terms.pop().unwrap(),
        _ => {}
    }
    terms.sort();
    if leading_coeff_negative(&terms[0]) {
        let mut negated: Vec<Expr> = terms
            .into_iter()
            .map(|t| simplify_prod(vec![Expr::int(-1), t]))
            .collect();
        negated.sort();
        simplify_prod(vec![Expr::int(-1), Expr::Sum(negated)])
    } else {
        Expr::Sum(terms)
    }
}

/// Pull denominator factors shared by every term out of a sum:
/// `a/D + b/D -> (a + b)/D`. A base is extracted only when it occurs with
/// a negative exponent in each term, so ordinary sums are untouched.
fn extract_common_denominator(terms: Vec<Expr>) -> Expr {
    let decomposed: Vec<(BigRational, BTreeMap<Expr, i32>)> =
        terms.iter().map(factor_map).collect();

    let mut common: Vec<(Expr, i32)> = Vec::new();
    if let Some((_, first)) = decomposed.first() {
        for (base, &k0) in first {
            if k0 >= 0 {
                continue;
            }
            let mut min_k = k0;
            let everywhere = decomposed.iter().all(|(_, m)| match m.get(base) {
                Some(&k) if k < 0 => {
                    min_k = min_k.min(k);
                    true
                }
                _ => false,
            });
            if everywhere {
                common.push((base.clone(), min_k));
            }
        }
    }
    if common.is_empty() {
        return build_sum(terms);
    }

    let mut residual_terms = Vec::with_capacity(decomposed.len());
    for (coeff, mut map) in decomposed {
        for (base, k) in &common {
            let e = map.get_mut(base).expect("common base present");
            *e -= k;
        }
        residual_terms.push(build_prod(coeff, map));
    }
    let inner = build_sum(residual_terms);
    let mut factors: Vec<Expr> = common
        .into_iter()
        .map(|(b, k)| Expr::Pow(Box::new(b), k))
        .collect();
    factors.push(inner);
    simplify_prod(factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::VarId;

    fn x(k: u32) -> Expr {
        Expr::Var(VarId(0), k)
    }

    fn y(k: u32) -> Expr {
        Expr::Var(VarId(1), k)
    }

    #[test]
    fn folds_constants_and_zeros() {
        assert_eq!(simplify(Expr::int(2) + Expr::int(3)), Expr::int(5));
        assert_eq!(simplify(Expr::int(0) * x(0)), Expr::zero());
        assert_eq!(simplify(x(0).pow(0)), Expr::one());
        assert_eq!(simplify(x(0) - x(0)), Expr::zero());
    }

    #[test]
    fn collects_like_terms() {
        // 3x + 2x - 5x = 0
        let e = Expr::int(3) * x(0) + Expr::int(2) * x(0) + Expr::int(-5) * x(0);
        assert_eq!(simplify(e), Expr::zero());
        // x*y + y*x = 2xy
        let e = x(0) * y(0) + y(0) * x(0);
        assert_eq!(
            simplify(e),
            Expr::Prod(vec![Expr::int(2), x(0), y(0)])
        );
    }

    #[test]
    fn cancels_reciprocal_factors() {
        let s = x(0) + y(0);
        let e = s.clone() * s.clone().pow(-1);
        assert_eq!(simplify(e), Expr::one());
    }

    #[test]
    fn quotients_become_negative_powers() {
        let e = x(0) / y(0);
        assert_eq!(
            simplify(e),
            Expr::Prod(vec![x(0), Expr::Pow(Box::new(y(0)), -1)])
        );
    }

    #[test]
    fn common_denominator_is_extracted() {
        // 2/(d) + cos(x)/(d) -> d^-1 * (2 + cos x)
        let d = Expr::int(2) - x(0).cos().pow(2);
        let e = Expr::int(2) / d.clone() + x(0).cos() / d.clone();
        let got = simplify(e);
        let den = simplify(d).pow(-1);
        let expected = simplify(Expr::Prod(vec![
            den,
            Expr::Sum(vec![Expr::int(2), x(0).cos()]),
        ]));
        assert_eq!(got, expected);
    }

    #[test]
    fn single_term_denominators_stay_put() {
        // x + y/d keeps its shape; only denominators common to all terms move.
        let d = Expr::param("C");
        let e = simplify(x(1) + y(0) / d);
        match &e {
            Expr::Sum(ts) => assert_eq!(ts.len(), 2),
            other => panic!("expected sum, got {other:?}"),
        }
    }

    #[test]
    fn negation_distributes_into_coefficients() {
        let e = simplify(-(x(0) + Expr::int(2) * y(0)));
        let expected = simplify(Expr::int(-1) * x(0) + Expr::int(-2) * y(0));
        assert_eq!(e, expected);
    }

    #[test]
    fn power_of_product_distributes() {
        let e = simplify((x(0) * y(0)).pow(2));
        assert_eq!(
            e,
            Expr::Prod(vec![
                Expr::Pow(Box::new(x(0)), 2),
                Expr::Pow(Box::new(y(0)), 2)
            ])
        );
    }
}

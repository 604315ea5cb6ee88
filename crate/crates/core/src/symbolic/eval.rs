//! Numeric evaluation and probabilistic zero testing.
//!
//! Probes assign every distinct symbol — each `(variable, order)` pair,
//! each `(driver, order)` pair, each parameter, and t — an independent
//! uniform value in (−2, 2) and evaluate in double precision. Zero tests
//! are one-sided: a nonzero expression is reported zero only if it
//! vanishes (to 1e-12) at all 20 probe points, which has negligible
//! probability for the expression classes handled here.

use super::{Expr, VarId};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub const PROBE_COUNT: usize = 20;
pub const PROBE_RANGE: (f64, f64) = (-2.0, 2.0);
pub const ZERO_TOL: f64 = 1e-12;
pub const RESAMPLE_BUDGET: usize = 100;

const PROBE_SEED: u64 = 0x00da_e5a0_0000_5eed;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProbeError {
    /// Every retry hit an evaluation singularity (division by ~0, overflow).
    #[error("probe exhaustion: no well-defined probe point found in {RESAMPLE_BUDGET} resamples")]
    Exhaustion,
}

/// All symbols occurring in an expression set.
#[derive(Debug, Default, Clone)]
pub struct SymbolSet {
    pub vars: BTreeSet<(VarId, u32)>,
    pub drivers: BTreeSet<(String, u32)>,
    pub params: BTreeSet<String>,
    pub uses_time: bool,
}

impl SymbolSet {
    pub fn collect(exprs: &[&Expr]) -> SymbolSet {
        let mut s = SymbolSet::default();
        for e in exprs {
            s.add(e);
        }
        s
    }

    pub fn add(&mut self, e: &Expr) {
        match e {
            Expr::Var(j, k) | Expr::NewVar(j, k) => {
                self.vars.insert((*j, *k));
            }
            Expr::Driver(name, k) => {
                self.drivers.insert((name.clone(), *k));
            }
            Expr::Param(name) => {
                self.params.insert(name.clone());
            }
            Expr::Time => self.uses_time = true,
            _ => {}
        }
        for c in e.children() {
            self.add(c);
        }
    }
}

/// One probe point: a value for every symbol.
#[derive(Debug, Default, Clone)]
pub struct Assignment {
    pub vars: BTreeMap<(VarId, u32), f64>,
    pub drivers: BTreeMap<(String, u32), f64>,
    pub params: BTreeMap<String, f64>,
    pub time: f64,
}

pub fn random_assignment<R: Rng>(symbols: &SymbolSet, rng: &mut R) -> Assignment {
    let mut a = Assignment::default();
    let (lo, hi) = PROBE_RANGE;
    for v in &symbols.vars {
        a.vars.insert(*v, rng.gen_range(lo..hi));
    }
    for d in &symbols.drivers {
        a.drivers.insert(d.clone(), rng.gen_range(lo..hi));
    }
    for p in &symbols.params {
        a.params.insert(p.clone(), rng.gen_range(lo..hi));
    }
    a.time = rng.gen_range(lo..hi);
    a
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("evaluation singularity")]
    Singular,
    #[error("unassigned symbol {0}")]
    Missing(String),
}

pub fn eval_f64(e: &Expr, a: &Assignment) -> Result<f64, EvalError> {
    let v = eval_inner(e, a)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Singular)
    }
}

fn eval_inner(e: &Expr, a: &Assignment) -> Result<f64, EvalError> {
    let v = match e {
        Expr::Num(r) => r.to_f64().ok_or(EvalError::Singular)?,
        Expr::Param(name) => *a
            .params
            .get(name)
            .ok_or_else(|| EvalError::Missing(name.clone()))?,
        Expr::Time => a.time,
        Expr::Var(j, k) | Expr::NewVar(j, k) => *a
            .vars
            .get(&(*j, *k))
            .ok_or_else(|| EvalError::Missing(format!("variable #{}^({k})", j.0)))?,
        Expr::Driver(name, k) => *a
            .drivers
            .get(&(name.clone(), *k))
            .ok_or_else(|| EvalError::Missing(format!("{name}^({k})")))?,
        Expr::Sum(ts) => {
            let mut s = 0.0;
            for t in ts {
                s += eval_inner(t, a)?;
            }
            s
        }
        Expr::Prod(fs) => {
            let mut p = 1.0;
            for f in fs {
                p *= eval_inner(f, a)?;
            }
            p
        }
        Expr::Neg(x) => -eval_inner(x, a)?,
        Expr::Div(x, y) => {
            let den = eval_inner(y, a)?;
            if den == 0.0 {
                return Err(EvalError::Singular);
            }
            eval_inner(x, a)? / den
        }
        Expr::Pow(b, k) => {
            let base = eval_inner(b, a)?;
            if base == 0.0 && *k < 0 {
                return Err(EvalError::Singular);
            }
            base.powi(*k)
        }
        Expr::Sin(x) => eval_inner(x, a)?.sin(),
        Expr::Cos(x) => eval_inner(x, a)?.cos(),
        Expr::Exp(x) => eval_inner(x, a)?.exp(),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Singular)
    }
}

/// Exact rational evaluation; `None` on transcendental nodes or division
/// by zero. Test oracles use this for polynomial identities.
pub fn eval_exact(
    e: &Expr,
    vars: &BTreeMap<(VarId, u32), BigRational>,
    params: &BTreeMap<String, BigRational>,
) -> Option<BigRational> {
    match e {
        Expr::Num(r) => Some(r.clone()),
        Expr::Param(name) => params.get(name).cloned(),
        Expr::Var(j, k) | Expr::NewVar(j, k) => vars.get(&(*j, *k)).cloned(),
        Expr::Time | Expr::Driver(..) | Expr::Sin(_) | Expr::Cos(_) | Expr::Exp(_) => None,
        Expr::Sum(ts) => {
            let mut s = BigRational::zero();
            for t in ts {
                s += eval_exact(t, vars, params)?;
            }
            Some(s)
        }
        Expr::Prod(fs) => {
            let mut p = BigRational::from_integer(1.into());
            for f in fs {
                p *= eval_exact(f, vars, params)?;
            }
            Some(p)
        }
        Expr::Neg(x) => Some(-eval_exact(x, vars, params)?),
        Expr::Div(x, y) => {
            let den = eval_exact(y, vars, params)?;
            if den.is_zero() {
                return None;
            }
            Some(eval_exact(x, vars, params)? / den)
        }
        Expr::Pow(b, k) => {
            let base = eval_exact(b, vars, params)?;
            if base.is_zero() {
                return if *k < 0 { None } else { Some(BigRational::zero()) };
            }
            let mag = base.pow(k.unsigned_abs() as i32);
            Some(if *k < 0 { mag.recip() } else { mag })
        }
    }
}

/// Deterministic RNG for a probe run. Fixed seeding keeps every analysis
/// reproducible across runs.
pub fn probe_seeded(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(PROBE_SEED ^ salt)
}

/// Probabilistic zero test. Returns `true` when the expression simplifies
/// to the literal 0, or when |value| < 1e-12 at 20 independent random
/// probe points. One-sided: `false` is always trustworthy.
pub fn is_identically_zero(e: &Expr) -> Result<bool, ProbeError> {
    if e.is_zero_literal() {
        return Ok(true);
    }
    let symbols = SymbolSet::collect(&[e]);
    let mut rng = probe_seeded(0x1d0);
    let mut resamples = 0usize;
    for _ in 0..PROBE_COUNT {
        loop {
            let a = random_assignment(&symbols, &mut rng);
            match eval_f64(e, &a) {
                Ok(v) => {
                    if v.abs() >= ZERO_TOL {
                        return Ok(false);
                    }
                    break;
                }
                Err(_) => {
                    resamples += 1;
                    if resamples > RESAMPLE_BUDGET {
                        return Err(ProbeError::Exhaustion);
                    }
                }
            }
        }
    }
    Ok(true)
}

const SCALED_ZERO_TOL: f64 = 1e-9;

/// Magnitude bound at a probe point: the evaluation with every
/// subtraction turned into an addition. Bounds the cancellation mass a
/// value of the expression can carry, hence the roundoff scale.
fn eval_magnitude(e: &Expr, a: &Assignment) -> Result<f64, EvalError> {
    let m = match e {
        Expr::Num(r) => r.to_f64().ok_or(EvalError::Singular)?.abs(),
        Expr::Param(_) | Expr::Time | Expr::Var(..) | Expr::NewVar(..) | Expr::Driver(..) => {
            eval_inner(e, a)?.abs()
        }
        Expr::Sum(ts) => {
            let mut s = 0.0;
            for t in ts {
                s += eval_magnitude(t, a)?;
            }
            s
        }
        Expr::Prod(fs) => {
            let mut p = 1.0;
            for f in fs {
                p *= eval_magnitude(f, a)?;
            }
            p
        }
        Expr::Neg(x) => eval_magnitude(x, a)?,
        Expr::Div(x, y) => {
            let den = eval_inner(y, a)?.abs();
            if den == 0.0 {
                return Err(EvalError::Singular);
            }
            eval_magnitude(x, a)? / den
        }
        Expr::Pow(b, k) => {
            if *k >= 0 {
                eval_magnitude(b, a)?.powi(*k)
            } else {
                let base = eval_inner(b, a)?.abs();
                if base == 0.0 {
                    return Err(EvalError::Singular);
                }
                base.powi(*k)
            }
        }
        Expr::Sin(x) | Expr::Cos(x) => eval_magnitude(x, a)?.min(1.0).max(f64::MIN_POSITIVE),
        Expr::Exp(x) => eval_inner(x, a)?.exp() * eval_magnitude(x, a)?.max(1.0),
    };
    if m.is_finite() {
        Ok(m)
    } else {
        Err(EvalError::Singular)
    }
}

/// Scale-aware probabilistic zero test for elimination intermediates,
/// whose values are differences of large products: a point counts as zero
/// when |value| is below 1e-9 times the magnitude bound at that point, so
/// catastrophic-cancellation residue is not mistaken for a nonzero entry.
pub fn is_identically_zero_scaled(e: &Expr) -> Result<bool, ProbeError> {
    if e.is_zero_literal() {
        return Ok(true);
    }
    let symbols = SymbolSet::collect(&[e]);
    let mut rng = probe_seeded(0x5ca1ed);
    let mut resamples = 0usize;
    for _ in 0..PROBE_COUNT {
        loop {
            let value = {
                let a = random_assignment(&symbols, &mut rng);
                eval_f64(e, &a).and_then(|v| eval_magnitude(e, &a).map(|m| (v, m)))
            };
            match value {
                Ok((v, m)) => {
                    if v.abs() > SCALED_ZERO_TOL * m.max(ZERO_TOL) {
                        return Ok(false);
                    }
                    break;
                }
                Err(_) => {
                    resamples += 1;
                    if resamples > RESAMPLE_BUDGET {
                        return Err(ProbeError::Exhaustion);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// True when the expression contains no variables, driving functions or t;
/// such expressions have zero total time derivative.
pub fn is_constant(e: &Expr) -> bool {
    match e {
        Expr::Num(_) | Expr::Param(_) => true,
        Expr::Time | Expr::Var(..) | Expr::NewVar(..) | Expr::Driver(..) => false,
        _ => e.children().into_iter().all(is_constant),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::simplify;

    fn x(k: u32) -> Expr {
        Expr::Var(VarId(0), k)
    }

    #[test]
    fn zero_by_cancellation() {
        let e = simplify(x(0) + (-x(0)));
        assert_eq!(is_identically_zero(&e), Ok(true));
    }

    #[test]
    fn pythagorean_identity_is_zero_numerically() {
        // sin^2 x + cos^2 x - 1: not syntactically zero, caught by probes.
        let e = simplify(x(0).sin().pow(2) + x(0).cos().pow(2) - Expr::one());
        assert!(!e.is_zero_literal());
        assert_eq!(is_identically_zero(&e), Ok(true));
    }

    #[test]
    fn nonzero_expression_detected() {
        let e = simplify(x(1) + Expr::Var(VarId(1), 1));
        assert_eq!(is_identically_zero(&e), Ok(false));
    }

    #[test]
    fn constants_are_recognized() {
        assert!(is_constant(&simplify(
            Expr::int(2) + Expr::param("a") * Expr::ratio(1, 3)
        )));
        assert!(!is_constant(&x(0)));
        assert!(!is_constant(&Expr::driver("h", 0)));
        assert!(!is_constant(&Expr::Time));
    }

    #[test]
    fn exact_eval_matches_structure() {
        let e = simplify((x(0) + Expr::int(1)).pow(2));
        let mut vars = BTreeMap::new();
        vars.insert((VarId(0), 0u32), BigRational::new(3.into(), 2.into()));
        let got = eval_exact(&e, &vars, &BTreeMap::new()).unwrap();
        assert_eq!(got, BigRational::new(25.into(), 4.into()));
    }
}

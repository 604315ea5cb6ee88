//! Minimal symbolic kernel: expression trees over time, parameters,
//! variable derivatives and driving functions, with total/partial
//! differentiation, substitution and signature extraction.

mod calculus;
mod eval;
mod simplify;

pub use calculus::{partial, sigma_of, substitute, total_derivative};
pub use eval::{
    eval_exact, eval_f64, is_constant, is_identically_zero, is_identically_zero_scaled,
    probe_seeded, random_assignment,
    Assignment, EvalError, ProbeError, SymbolSet, PROBE_COUNT, PROBE_RANGE, RESAMPLE_BUDGET,
    ZERO_TOL,
};
pub use simplify::{expand, simplify};

use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;

/// Index of a variable in the owning system's variable table.
///
/// Introduced variables created by conversions share the same id space as
/// the original state variables; the system's table records which is which.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Entry of a signature matrix: a derivative order, or −∞ when the
/// variable does not occur.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SigmaEntry(Option<i32>);

impl SigmaEntry {
    pub const NEG_INF: SigmaEntry = SigmaEntry(None);

    pub fn finite(order: i32) -> Self {
        SigmaEntry(Some(order))
    }

    pub fn order(self) -> Option<i32> {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_some()
    }
}

impl fmt::Display for SigmaEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(k) => write!(f, "{k}"),
            None => write!(f, "-"),
        }
    }
}

/// Symbolic expression tree.
///
/// `Var(j, k)` is the k-th derivative of state variable j; `NewVar` is the
/// same for a variable introduced by a conversion. `Driver(name, k)` is the
/// k-th derivative of a driving function of t, kept opaque. Constants are
/// exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Num(BigRational),
    Param(String),
    Time,
    Var(VarId, u32),
    NewVar(VarId, u32),
    Driver(String, u32),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Neg(Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Num(BigRational::from_integer(n.into()))
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::Num(BigRational::new(num.into(), den.into()))
    }

    pub fn zero() -> Expr {
        Expr::Num(BigRational::zero())
    }

    pub fn one() -> Expr {
        Expr::Num(BigRational::one())
    }

    pub fn var(id: VarId, order: u32) -> Expr {
        Expr::Var(id, order)
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn driver(name: &str, order: u32) -> Expr {
        Expr::Driver(name.to_string(), order)
    }

    pub fn pow(self, k: i32) -> Expr {
        Expr::Pow(Box::new(self), k)
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_zero())
    }

    /// Variable reference carried by a `Var` or `NewVar` node.
    pub fn as_var(&self) -> Option<(VarId, u32)> {
        match self {
            Expr::Var(j, k) | Expr::NewVar(j, k) => Some((*j, *k)),
            _ => None,
        }
    }

    /// Child expressions, for generic traversals.
    pub(crate) fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Num(_)
            | Expr::Param(_)
            | Expr::Time
            | Expr::Var(..)
            | Expr::NewVar(..)
            | Expr::Driver(..) => vec![],
            Expr::Sum(ts) | Expr::Prod(ts) => ts.iter().collect(),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => {
                vec![a.as_ref()]
            }
            Expr::Div(a, b) => vec![a.as_ref(), b.as_ref()],
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, Expr::Neg(Box::new(rhs))])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Prod(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

//! Σ-method core: the DAE system representation, signature matrix,
//! highest-value transversal, canonical offsets, System Jacobian,
//! structural index and the singularity verdict.

mod assignment;

pub use assignment::max_assignment;

use crate::numeric::lu_det;
use crate::symbolic::{
    self, partial, probe_seeded, sigma_of, Expr, ProbeError, SigmaEntry, SymbolSet, VarId,
};
use num_rational::BigRational;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructError {
    #[error("structurally ill posed: no transversal with finite signature entries")]
    IllPosed,
    #[error("system is not square: {equations} equations in {variables} variables")]
    NotSquare { equations: usize, variables: usize },
    #[error("equation references variable id {0} outside the variable table")]
    UnknownVariable(usize),
}

/// One equation 0 = f in implicit form.
#[derive(Debug, Clone)]
pub struct Equation {
    pub name: String,
    pub expr: Expr,
}

/// Variable table entry. Conversions add entries with `introduced` set.
#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub introduced: bool,
}

/// Record of one conversion applied to a system, kept as provenance on the
/// system itself and surfaced in reports.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConversionRecord {
    pub kind: String,
    pub block: usize,
    pub replaced_equation: Option<String>,
    pub new_equations: Vec<String>,
    pub new_variables: Vec<String>,
    pub chosen_column_or_row: usize,
    pub kernel_support: usize,
    pub old_val_sigma: i64,
    pub new_val_sigma: i64,
    pub size_before: usize,
    pub size_after: usize,
    pub equivalence_guaranteed: bool,
    pub sigma_bounds_checked: bool,
}

/// A square DAE: n equations 0 = f_i over n variables, plus parameter
/// bindings and declared driving functions.
#[derive(Debug, Clone, Default)]
pub struct DaeSystem {
    pub equations: Vec<Equation>,
    pub variables: Vec<Variable>,
    pub parameters: BTreeMap<String, BigRational>,
    pub drivers: BTreeSet<String>,
    pub conversions: Vec<ConversionRecord>,
}

impl DaeSystem {
    pub fn n(&self) -> usize {
        self.equations.len()
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn var_name(&self, id: VarId) -> &str {
        &self.variables[id.0].name
    }

    /// Checks squareness and that every referenced variable id is in the
    /// table.
    pub fn validate(&self) -> Result<(), StructError> {
        if self.equations.len() != self.variables.len() {
            return Err(StructError::NotSquare {
                equations: self.equations.len(),
                variables: self.variables.len(),
            });
        }
        let mut symbols = SymbolSet::default();
        for eq in &self.equations {
            symbols.add(&eq.expr);
        }
        for (id, _) in symbols.vars {
            if id.0 >= self.variables.len() {
                return Err(StructError::UnknownVariable(id.0));
            }
        }
        Ok(())
    }

    /// Fresh introduced-variable name `y_<base>`, suffixed on collision.
    pub fn fresh_var_name(&self, base: &str) -> String {
        let candidate = format!("y_{base}");
        if self.var_id(&candidate).is_none() {
            return candidate;
        }
        for k in 2.. {
            let c = format!("y_{base}_{k}");
            if self.var_id(&c).is_none() {
                return c;
            }
        }
        unreachable!()
    }

    /// Fresh appended-equation name `g_<base>`, suffixed on collision.
    pub fn fresh_eq_name(&self, base: &str) -> String {
        let taken = |n: &str| self.equations.iter().any(|e| e.name == n);
        let candidate = format!("g_{base}");
        if !taken(&candidate) {
            return candidate;
        }
        for k in 2.. {
            let c = format!("g_{base}_{k}");
            if !taken(&c) {
                return c;
            }
        }
        unreachable!()
    }
}

/// Signature matrix Σ: σ_ij is the highest order to which variable j
/// occurs in equation i, −∞ when absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureMatrix {
    pub n: usize,
    pub entries: Vec<Vec<SigmaEntry>>,
}

impl SignatureMatrix {
    pub fn get(&self, i: usize, j: usize) -> SigmaEntry {
        self.entries[i][j]
    }
}

/// Canonical offset pair: elementwise-smallest nonnegative (c; d) with
/// d_j − c_i ≥ σ_ij everywhere and equality on every HVT.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Offsets {
    pub c: Vec<i32>,
    pub d: Vec<i32>,
}

/// Signature matrix with its cached HVT, value and canonical offsets.
#[derive(Debug, Clone)]
pub struct SigmaAnalysis {
    pub sigma: SignatureMatrix,
    /// Lexicographically smallest HVT: col_of_row, smallest column per row
    /// among all highest-value transversals.
    pub hvt: Vec<usize>,
    pub val: i64,
    pub offsets: Offsets,
}

/// Builds Σ entrywise from σ(x_j, f_i).
pub fn signature_matrix(sys: &DaeSystem) -> SignatureMatrix {
    let n = sys.n();
    let entries = sys
        .equations
        .iter()
        .map(|eq| (0..n).map(|j| sigma_of(&eq.expr, VarId(j))).collect())
        .collect();
    SignatureMatrix { n, entries }
}

/// Highest-value transversal and valΣ.
///
/// The returned transversal is the lexicographically smallest optimal one
/// (smallest column for the first row, then the second, ...), which makes
/// rendered output reproducible.
pub fn hvt(sigma: &SignatureMatrix) -> Result<(Vec<usize>, i64), StructError> {
    let analysis = analyze_sigma(sigma)?;
    Ok((analysis.hvt, analysis.val))
}

/// Canonical offsets of a structurally well-posed Σ.
pub fn offsets(sigma: &SignatureMatrix) -> Result<Offsets, StructError> {
    Ok(analyze_sigma(sigma)?.offsets)
}

/// Full Σ analysis: assignment, canonical offsets, deterministic HVT.
pub fn analyze_sigma(sigma: &SignatureMatrix) -> Result<SigmaAnalysis, StructError> {
    let (t0, val) = max_assignment(&sigma.entries).ok_or(StructError::IllPosed)?;
    let offsets = canonical_offsets(sigma, &t0);
    let hvt = lex_smallest_hvt(sigma, &offsets).ok_or(StructError::IllPosed)?;
    debug_assert_eq!(
        hvt.iter()
            .enumerate()
            .map(|(i, &j)| sigma.entries[i][j].order().unwrap() as i64)
            .sum::<i64>(),
        val
    );
    Ok(SigmaAnalysis {
        sigma: sigma.clone(),
        hvt,
        val,
        offsets,
    })
}

/// Fixed point of d_j := max_i(σ_ij + c_i), c_i := d_j − σ_ij on T,
/// starting from c = 0. Converges to the elementwise-smallest valid pair
/// for any starting HVT.
fn canonical_offsets(sigma: &SignatureMatrix, t: &[usize]) -> Offsets {
    let n = sigma.n;
    let mut c = vec![0i32; n];
    let mut d = vec![0i32; n];
    let max_sigma: i32 = sigma
        .entries
        .iter()
        .flatten()
        .filter_map(|s| s.order())
        .max()
        .unwrap_or(0);
    let bound = (n as i64 + 2) * (max_sigma as i64 + 1) + 4;
    let mut iterations = 0i64;
    loop {
        for j in 0..n {
            d[j] = (0..n)
                .filter_map(|i| sigma.entries[i][j].order().map(|s| s + c[i]))
                .max()
                .unwrap_or(0);
        }
        let mut new_c = c.clone();
        for (i, &j) in t.iter().enumerate() {
            let s = sigma.entries[i][j]
                .order()
                .expect("transversal entries are finite");
            new_c[i] = d[j] - s;
        }
        if new_c == c {
            break;
        }
        c = new_c;
        iterations += 1;
        assert!(
            iterations <= bound,
            "offset iteration failed to converge on a well-posed system"
        );
    }
    Offsets { c, d }
}

/// Smallest-column perfect matching on the tight graph
/// {(i,j) : d_j − c_i = σ_ij}. Any perfect matching of the tight graph is
/// an HVT, so fixing columns row by row yields the lexicographically
/// smallest one.
fn lex_smallest_hvt(sigma: &SignatureMatrix, off: &Offsets) -> Option<Vec<usize>> {
    let n = sigma.n;
    let tight: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| {
                    sigma.entries[i][j]
                        .order()
                        .is_some_and(|s| off.d[j] - off.c[i] == s)
                })
                .collect()
        })
        .collect();

    let mut fixed: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for i in 0..n {
        let mut chosen = None;
        for &j in &tight[i] {
            if used[j] {
                continue;
            }
            used[j] = true;
            if rows_matchable(&tight, i + 1, &mut used.clone()) {
                chosen = Some(j);
                break;
            }
            used[j] = false;
        }
        fixed.push(chosen?);
    }
    Some(fixed)
}

/// Can rows `from..` all be matched into unused columns? Kuhn augmenting
/// paths on the tight graph.
fn rows_matchable(tight: &[Vec<usize>], from: usize, used: &mut [bool]) -> bool {
    let n = tight.len();
    let mut col_owner: Vec<Option<usize>> = vec![None; n];
    fn try_row(
        i: usize,
        tight: &[Vec<usize>],
        used: &[bool],
        seen: &mut [bool],
        col_owner: &mut [Option<usize>],
        from: usize,
    ) -> bool {
        for &j in &tight[i] {
            if used[j] || seen[j] {
                continue;
            }
            seen[j] = true;
            let free = match col_owner[j] {
                None => true,
                Some(owner) => try_row(owner, tight, used, seen, col_owner, from),
            };
            if free {
                col_owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    for i in from..n {
        let mut seen = vec![false; n];
        if !try_row(i, tight, used, &mut seen, &mut col_owner, from) {
            return false;
        }
    }
    true
}

/// System Jacobian: J_ij = ∂f_i / ∂x_j^(σ_ij) where d_j − c_i = σ_ij,
/// zero elsewhere.
#[derive(Debug, Clone)]
pub struct SystemJacobian {
    pub n: usize,
    pub entries: Vec<Vec<Expr>>,
    pub offsets: Offsets,
}

pub fn system_jacobian(sys: &DaeSystem, analysis: &SigmaAnalysis) -> SystemJacobian {
    let n = sys.n();
    let off = &analysis.offsets;
    let entries = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let tight = analysis.sigma.entries[i][j]
                        .order()
                        .is_some_and(|s| off.d[j] - off.c[i] == s);
                    if tight {
                        let k = (off.d[j] - off.c[i]) as u32;
                        partial(&sys.equations[i].expr, VarId(j), k)
                    } else {
                        Expr::zero()
                    }
                })
                .collect()
        })
        .collect();
    SystemJacobian {
        n,
        entries,
        offsets: off.clone(),
    }
}

/// ν_S = max_i c_i, plus one if any d_j = 0.
pub fn structural_index(analysis: &SigmaAnalysis) -> i32 {
    let max_c = analysis.offsets.c.iter().copied().max().unwrap_or(0);
    let min_d = analysis.offsets.d.iter().copied().min().unwrap_or(0);
    max_c + i32::from(min_d == 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianVerdict {
    GenericallyNonsingular,
    IdenticallySingular,
}

const DET_TOL: f64 = 1e-9;

/// Probabilistic singularity verdict on a matrix of expressions.
///
/// Evaluates det at up to 20 random probe points; nonsingular on the first
/// determinant exceeding 1e-9 times the product of row max-abs entries.
pub fn is_matrix_nonsingular(entries: &[Vec<Expr>]) -> Result<JacobianVerdict, ProbeError> {
    let n = entries.len();
    if n == 0 {
        return Ok(JacobianVerdict::GenericallyNonsingular);
    }
    let refs: Vec<&Expr> = entries.iter().flatten().collect();
    let symbols = SymbolSet::collect(&refs);
    let mut rng = probe_seeded(0xde7);
    let mut resamples = 0usize;
    for _ in 0..symbolic::PROBE_COUNT {
        loop {
            let a = symbolic::random_assignment(&symbols, &mut rng);
            let numeric: Result<Vec<Vec<f64>>, _> = entries
                .iter()
                .map(|row| row.iter().map(|e| symbolic::eval_f64(e, &a)).collect())
                .collect();
            match numeric {
                Ok(m) => {
                    let mut scale = 1.0f64;
                    for row in &m {
                        scale *= row.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                    }
                    if scale > 0.0 && lu_det(m).abs() >= DET_TOL * scale {
                        return Ok(JacobianVerdict::GenericallyNonsingular);
                    }
                    break;
                }
                Err(_) => {
                    resamples += 1;
                    if resamples > symbolic::RESAMPLE_BUDGET {
                        return Err(ProbeError::Exhaustion);
                    }
                }
            }
        }
    }
    Ok(JacobianVerdict::IdenticallySingular)
}

pub fn is_jacobian_nonsingular(jac: &SystemJacobian) -> Result<JacobianVerdict, ProbeError> {
    is_matrix_nonsingular(&jac.entries)
}

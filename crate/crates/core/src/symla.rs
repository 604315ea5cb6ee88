//! Symbolic linear algebra over the field of rational expressions: rank
//! probing and kernel/cokernel vectors of identically singular Jacobian
//! blocks.

use crate::btf::BlockStructure;
use crate::numeric::lu_rank;
use crate::symbolic::{
    self, is_constant, is_identically_zero_scaled, probe_seeded, simplify, Expr, ProbeError,
    SymbolSet,
};
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymlaError {
    /// Symbolic elimination found full rank; a probe verdict of singular
    /// was a false positive.
    #[error("block not identically singular")]
    NotIdenticallySingular,
    #[error(transparent)]
    Probe(#[from] ProbeError),
}

/// Dense matrix of expressions, with a note of where it came from.
#[derive(Debug, Clone)]
pub struct SymbolicMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<Expr>>,
    pub provenance: String,
}

impl SymbolicMatrix {
    pub fn new(entries: Vec<Vec<Expr>>, provenance: impl Into<String>) -> SymbolicMatrix {
        let rows = entries.len();
        let cols = entries.first().map_or(0, |r| r.len());
        SymbolicMatrix {
            rows,
            cols,
            entries,
            provenance: provenance.into(),
        }
    }

    pub fn transposed(&self) -> SymbolicMatrix {
        let entries = (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.entries[i][j].clone()).collect())
            .collect();
        SymbolicMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
            provenance: format!("{}^T", self.provenance),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Side {
    Kernel,
    Cokernel,
}

/// A kernel or cokernel vector with symbolic entries.
#[derive(Debug, Clone)]
pub struct NullVector {
    pub side: Side,
    pub entries: Vec<Expr>,
    /// Indices of entries that are not identically zero.
    pub support: Vec<usize>,
    /// True when every entry is free of variables and driving functions.
    pub constant: bool,
}

/// Maximal numeric rank over 20 random probe evaluations.
pub fn rank_probe(m: &SymbolicMatrix) -> Result<usize, ProbeError> {
    let refs: Vec<&Expr> = m.entries.iter().flatten().collect();
    let symbols = SymbolSet::collect(&refs);
    let mut rng = probe_seeded(0x7a9c);
    let mut best = 0usize;
    let mut resamples = 0usize;
    for _ in 0..symbolic::PROBE_COUNT {
        loop {
            let a = symbolic::random_assignment(&symbols, &mut rng);
            let numeric: Result<Vec<Vec<f64>>, _> = m
                .entries
                .iter()
                .map(|row| row.iter().map(|e| symbolic::eval_f64(e, &a)).collect())
                .collect();
            match numeric {
                Ok(mat) => {
                    best = best.max(lu_rank(mat, 1e-9));
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
        if best == m.rows.min(m.cols) {
            break;
        }
    }
    Ok(best)
}

/// One cokernel vector of M: a kernel vector of Mᵀ.
pub fn cokernel_vector(m: &SymbolicMatrix) -> Result<NullVector, SymlaError> {
    null_vector(&m.transposed(), Side::Cokernel, m)
}

/// One kernel vector of M.
pub fn kernel_vector(m: &SymbolicMatrix) -> Result<NullVector, SymlaError> {
    null_vector(m, Side::Kernel, m)
}

/// Kernel vector of `work` via fraction-free Bareiss elimination with
/// symbolic pivoting; verified against `orig` on the requested side.
fn null_vector(
    work: &SymbolicMatrix,
    side: Side,
    orig: &SymbolicMatrix,
) -> Result<NullVector, SymlaError> {
    let rows = work.rows;
    let cols = work.cols;
    let mut e: Vec<Vec<Expr>> = work
        .entries
        .iter()
        .map(|r| r.iter().cloned().map(simplify).collect())
        .collect();

    // Echelon form. Pivot per column: first remaining row whose entry is
    // not identically zero. Bareiss division by the previous pivot keeps
    // growth polynomial; when the quotient does not cancel syntactically
    // it stays as a negative power and probes handle it numerically.
    let mut prev_pivot = Expr::one();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let mut pivot_row = None;
        for r in row..rows {
            if !is_identically_zero_scaled(&e[r][col])? {
                pivot_row = Some(r);
                break;
            }
        }
        let Some(pr) = pivot_row else { continue };
        e.swap(row, pr);
        let pivot = e[row][col].clone();
        for r in row + 1..rows {
            if e[r][col].is_zero_literal() {
                continue;
            }
            let factor = e[r][col].clone();
            for cc in col..cols {
                let num = Expr::Sum(vec![
                    Expr::Prod(vec![pivot.clone(), e[r][cc].clone()]),
                    Expr::Neg(Box::new(Expr::Prod(vec![
                        factor.clone(),
                        e[row][cc].clone(),
                    ]))),
                ]);
                e[r][cc] = simplify(Expr::Div(Box::new(num), Box::new(prev_pivot.clone())));
            }
        }
        prev_pivot = pivot;
        pivot_cols.push(col);
        row += 1;
    }

    let free_cols: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    let Some(&free) = free_cols.last() else {
        return Err(SymlaError::NotIdenticallySingular);
    };

    // Back-substitution with the chosen free coordinate set to 1 and any
    // other free coordinates to 0.
    let mut v: Vec<Expr> = vec![Expr::zero(); cols];
    v[free] = Expr::one();
    for (r, &pc) in pivot_cols.iter().enumerate().rev() {
        let mut acc = Vec::new();
        for c in pc + 1..cols {
            if !v[c].is_zero_literal() && !e[r][c].is_zero_literal() {
                acc.push(Expr::Prod(vec![e[r][c].clone(), v[c].clone()]));
            }
        }
        if acc.is_empty() {
            v[pc] = Expr::zero();
        } else {
            let num = Expr::Neg(Box::new(Expr::Sum(acc)));
            v[pc] = simplify(Expr::Div(Box::new(num), Box::new(e[r][pc].clone())));
        }
    }

    let mut v = clear_denominators(v);

    // Prefer a constant vector when the null direction admits one
    // (deficiency-1 case): first try rescaling by the first nonzero entry
    // — this catches parameter-proportional rows syntactically — then a
    // numeric null-space probe rounded to rationals and verified against
    // the matrix.
    if !v.iter().all(is_constant) {
        if let Some(reference) = first_nonzero(&v)? {
            let scaled: Vec<Expr> = v
                .iter()
                .map(|x| {
                    simplify(Expr::Div(
                        Box::new(x.clone()),
                        Box::new(v[reference].clone()),
                    ))
                })
                .collect();
            if scaled.iter().all(is_constant) {
                v = clear_denominators(scaled);
            }
        }
    }
    if !v.iter().all(is_constant) {
        if let Some(w) = constant_from_numeric_nullspace(work)? {
            v = w;
        }
    }

    let mut support = Vec::new();
    for (i, x) in v.iter().enumerate() {
        if !is_identically_zero_scaled(x)? {
            support.push(i);
        }
    }
    if support.is_empty() {
        return Err(SymlaError::NotIdenticallySingular);
    }
    let constant = v.iter().all(is_constant);
    let nv = NullVector {
        side,
        entries: v,
        support,
        constant,
    };
    verify_null_identity(orig, &nv)?;
    Ok(nv)
}

fn first_nonzero(v: &[Expr]) -> Result<Option<usize>, ProbeError> {
    for (i, x) in v.iter().enumerate() {
        if !is_identically_zero_scaled(x)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Rank-1-deficiency constant pass: evaluate the matrix at a probe point,
/// take a numeric kernel vector, round it to small rationals, and keep it
/// only if the rounded vector verifiably annihilates the symbolic matrix.
fn constant_from_numeric_nullspace(work: &SymbolicMatrix) -> Result<Option<Vec<Expr>>, ProbeError> {
    let refs: Vec<&Expr> = work.entries.iter().flatten().collect();
    let symbols = SymbolSet::collect(&refs);
    let mut rng = probe_seeded(0xc057);
    let mut numeric = None;
    for _ in 0..symbolic::RESAMPLE_BUDGET {
        let a = symbolic::random_assignment(&symbols, &mut rng);
        let mat: Result<Vec<Vec<f64>>, _> = work
            .entries
            .iter()
            .map(|row| row.iter().map(|x| symbolic::eval_f64(x, &a)).collect())
            .collect();
        if let Ok(m) = mat {
            numeric = Some(m);
            break;
        }
    }
    let Some(m) = numeric else {
        return Err(ProbeError::Exhaustion);
    };
    let Some(w) = numeric_kernel(&m) else {
        return Ok(None);
    };
    let reference = w.iter().find(|x| x.abs() > 1e-9).copied().unwrap_or(1.0);
    let mut exprs = Vec::with_capacity(w.len());
    for x in &w {
        let scaled = x / reference;
        if scaled.abs() < 1e-9 {
            exprs.push(Expr::zero());
            continue;
        }
        let Some((p, q)) = approx_rational(scaled, 1024) else {
            return Ok(None);
        };
        exprs.push(simplify(Expr::ratio(p, q)));
    }
    let exprs = clear_denominators(exprs);
    // Verify symbolically before trusting the rounded vector: the kernel
    // identity work · w ≡ 0, row by row.
    for i in 0..work.rows {
        let terms: Vec<Expr> = (0..work.cols)
            .filter(|&j| !exprs[j].is_zero_literal())
            .map(|j| Expr::Prod(vec![work.entries[i][j].clone(), exprs[j].clone()]))
            .collect();
        let residual = simplify(Expr::Sum(terms));
        if !is_identically_zero_scaled(&residual)? {
            return Ok(None);
        }
    }
    Ok(Some(exprs))
}

/// Kernel vector of a numeric matrix by row echelon with partial
/// pivoting; the last free coordinate set to 1.
fn numeric_kernel(m: &[Vec<f64>]) -> Option<Vec<f64>> {
    let rows = m.len();
    let cols = m.first()?.len();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        let mut w = vec![0.0; cols];
        w[cols - 1] = 1.0;
        return Some(w);
    }
    let tol = 1e-9 * scale;
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut pivot_cols = Vec::new();
    let mut row = 0usize;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let mut piv = row;
        for r in row + 1..rows {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() <= tol {
            continue;
        }
        a.swap(piv, row);
        for r in row + 1..rows {
            let f = a[r][col] / a[row][col];
            for cc in col..cols {
                a[r][cc] -= f * a[row][cc];
            }
        }
        pivot_cols.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    let &free_col = free.last()?;
    let mut w = vec![0.0; cols];
    w[free_col] = 1.0;
    for (r, &pc) in pivot_cols.iter().enumerate().rev() {
        let s: f64 = (pc + 1..cols).map(|cc| a[r][cc] * w[cc]).sum();
        w[pc] = -s / a[r][pc];
    }
    Some(w)
}

/// Best rational approximation by continued fractions, denominator capped.
fn approx_rational(x: f64, max_den: i64) -> Option<(i64, i64)> {
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, x.floor() as i64, 1i64);
    let mut frac = x - x.floor();
    for _ in 0..40 {
        if (x - p1 as f64 / q1 as f64).abs() <= 1e-9 * x.abs().max(1.0) {
            return Some((p1, q1));
        }
        if frac.abs() < 1e-12 {
            break;
        }
        let r = 1.0 / frac;
        let a = r.floor();
        frac = r - a;
        let p2 = a as i64 * p1 + p0;
        let q2 = a as i64 * q1 + q0;
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    if (x - p1 as f64 / q1 as f64).abs() <= 1e-9 * x.abs().max(1.0) {
        Some((p1, q1))
    } else {
        None
    }
}

/// Multiply a vector by a common multiple of its denominators, symbolic
/// and rational, then normalize away a shared rational factor magnitude.
fn clear_denominators(v: Vec<Expr>) -> Vec<Expr> {
    use std::collections::BTreeMap;
    // Symbolic denominators: negative-power bases at the top product level
    // of each entry (sums surface common denominators during simplify).
    let mut needed: BTreeMap<Expr, i32> = BTreeMap::new();
    for x in &v {
        for (base, k) in top_level_powers(x) {
            if k < 0 {
                let need = needed.entry(base).or_insert(0);
                *need = (*need).max(-k);
            }
        }
    }
    let mut out = v;
    if !needed.is_empty() {
        let mult: Vec<Expr> = needed
            .into_iter()
            .map(|(b, k)| Expr::Pow(Box::new(b), k))
            .collect();
        out = out
            .into_iter()
            .map(|x| {
                let mut fs = mult.clone();
                fs.push(x);
                simplify(Expr::Prod(fs))
            })
            .collect();
    }
    // Rational denominators: multiply by the lcm of all coefficient
    // denominators appearing in the entries.
    let mut lcm = num_bigint::BigInt::one();
    for x in &out {
        for den in coefficient_denominators(x) {
            let g = num_integer::Integer::gcd(&lcm, &den);
            lcm = &lcm / g * den;
        }
    }
    if !lcm.is_one() {
        let factor = Expr::Num(BigRational::from_integer(lcm));
        out = out
            .into_iter()
            .map(|x| simplify(Expr::Prod(vec![factor.clone(), x])))
            .collect();
    }
    out
}

fn top_level_powers(e: &Expr) -> Vec<(Expr, i32)> {
    match e {
        Expr::Prod(fs) => fs
            .iter()
            .filter_map(|f| match f {
                Expr::Pow(b, k) => Some((b.as_ref().clone(), *k)),
                _ => None,
            })
            .collect(),
        Expr::Pow(b, k) => vec![(b.as_ref().clone(), *k)],
        _ => vec![],
    }
}

fn coefficient_denominators(e: &Expr) -> Vec<num_bigint::BigInt> {
    match e {
        Expr::Num(r) => vec![r.denom().clone()],
        Expr::Sum(ts) => ts.iter().flat_map(coefficient_denominators).collect(),
        Expr::Prod(fs) => fs
            .iter()
            .filter_map(|f| match f {
                Expr::Num(r) => Some(r.denom().clone()),
                _ => None,
            })
            .collect(),
        _ => vec![],
    }
}

const NULL_RESIDUAL_TOL: f64 = 1e-8;

/// Asserts M·v ≈ 0 (kernel) or vᵀ·M ≈ 0 (cokernel) at 20 random probes,
/// scaled by matrix and vector magnitudes.
fn verify_null_identity(m: &SymbolicMatrix, v: &NullVector) -> Result<(), ProbeError> {
    let mut refs: Vec<&Expr> = m.entries.iter().flatten().collect();
    refs.extend(v.entries.iter());
    let symbols = SymbolSet::collect(&refs);
    let mut rng = probe_seeded(0x0f1d);
    let mut resamples = 0usize;
    for _ in 0..symbolic::PROBE_COUNT {
        loop {
            let a = symbolic::random_assignment(&symbols, &mut rng);
            let mat: Result<Vec<Vec<f64>>, _> = m
                .entries
                .iter()
                .map(|row| row.iter().map(|x| symbolic::eval_f64(x, &a)).collect())
                .collect();
            let vec_vals: Result<Vec<f64>, _> =
                v.entries.iter().map(|x| symbolic::eval_f64(x, &a)).collect();
            match (mat, vec_vals) {
                (Ok(mat), Ok(vec_vals)) => {
                    let m_scale = mat
                        .iter()
                        .flatten()
                        .fold(0.0f64, |acc, x| acc.max(x.abs()));
                    let v_scale = vec_vals.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
                    let tol = NULL_RESIDUAL_TOL * m_scale.max(1.0) * v_scale.max(1.0);
                    let residuals: Vec<f64> = match v.side {
                        Side::Kernel => (0..m.rows)
                            .map(|i| {
                                (0..m.cols).map(|j| mat[i][j] * vec_vals[j]).sum::<f64>()
                            })
                            .collect(),
                        Side::Cokernel => (0..m.cols)
                            .map(|j| {
                                (0..m.rows).map(|i| vec_vals[i] * mat[i][j]).sum::<f64>()
                            })
                            .collect(),
                    };
                    for r in residuals {
                        assert!(
                            r.abs() <= tol,
                            "null vector of {} fails the null-space identity: residual {r}",
                            m.provenance
                        );
                    }
                    break;
                }
                _ => {
                    resamples += 1;
                    if resamples > symbolic::RESAMPLE_BUDGET {
                        return Err(ProbeError::Exhaustion);
                    }
                }
            }
        }
    }
    Ok(())
}

/// Zero-pad a block-local vector to length n in permuted coordinates.
pub fn embed_in_full(vhat: &NullVector, blocks: &BlockStructure, q: usize) -> NullVector {
    assert_eq!(
        vhat.entries.len(),
        blocks.sizes[q],
        "vector length does not match block size"
    );
    let mut entries = vec![Expr::zero(); blocks.n];
    let start = blocks.starts[q];
    for (offset, x) in vhat.entries.iter().enumerate() {
        entries[start + offset] = x.clone();
    }
    let support = vhat.support.iter().map(|&i| start + i).collect();
    NullVector {
        side: vhat.side,
        entries,
        support,
        constant: vhat.constant,
    }
}

/// Extract the diagonal block q of a Jacobian as a symbolic matrix, in
/// permuted coordinates.
pub fn jacobian_block(
    jac: &crate::structure::SystemJacobian,
    blocks: &BlockStructure,
    q: usize,
) -> SymbolicMatrix {
    let range = blocks.block_range(q);
    let entries: Vec<Vec<Expr>> = range
        .clone()
        .map(|pi| {
            range
                .clone()
                .map(|pj| jac.entries[blocks.rows[pi]][blocks.cols[pj]].clone())
                .collect()
        })
        .collect();
    SymbolicMatrix::new(entries, format!("J[block {}]", q + 1))
}

//! Block conversion methods. Given an identically singular diagonal block
//! of the System Jacobian, either replace one equation by a cokernel-
//! weighted combination of differentiated block equations (LC), or
//! introduce new variables for kernel-directed derivative combinations and
//! substitute them through the block (ES). Both strictly decrease valΣ,
//! which bounds the analyze-convert loop in [`fix_dae`].

use crate::btf::{fine_btf, jacobian_pattern, BlockStructure};
use crate::error::Error;
use crate::structure::{
    analyze_sigma, signature_matrix, structural_index, system_jacobian, ConversionRecord,
    DaeSystem, JacobianVerdict, SigmaAnalysis, SignatureMatrix,
};
use crate::symbolic::{sigma_of, substitute, total_derivative, Expr, SigmaEntry, VarId};
use crate::symla::{
    cokernel_vector, embed_in_full, jacobian_block, kernel_vector, rank_probe, NullVector,
    SymlaError,
};
use thiserror::Error as ThisError;

#[derive(Debug, ThisError, PartialEq, Eq)]
pub enum PlanError {
    #[error("LC condition violated at {variable}: σ(x_j, u) = {hod} not < d_j − c̲ = {bound}")]
    LcCondition {
        variable: String,
        hod: SigmaEntry,
        bound: i32,
    },
    #[error("ES condition violated at {variable} ({case}): σ(x_j, v) = {hod} exceeds d_j − c̄ = {bound}")]
    EsCondition {
        variable: String,
        case: &'static str,
        hod: SigmaEntry,
        bound: i32,
    },
    #[error("ES condition violated at {variable}: d_j − c̄ = {value} < 0")]
    EsNegativeOffset { variable: String, value: i32 },
    #[error("no-op plan: kernel support has a single entry")]
    NoOp,
    #[error("null vector has empty support in the block")]
    EmptySupport,
}

/// Linear-combination recipe for one singular block.
#[derive(Debug, Clone)]
pub struct LcPlan {
    pub q: usize,
    /// Embedded cokernel vector, permuted coordinates.
    pub u: NullVector,
    /// I = {i : u_i ≢ 0}, permuted row positions.
    pub i_set: Vec<usize>,
    /// c̲ = min over I of c_i.
    pub c_low: i32,
    /// L = {l ∈ I : c_l = c̲}.
    pub l_set: Vec<usize>,
    /// L̃ = {l ∈ L : u_l nonzero constant}.
    pub l_tilde: Vec<usize>,
    /// Chosen replacement row, permuted position.
    pub l: usize,
    pub equivalence_guaranteed: bool,
}

/// Expression-substitution recipe for one singular block.
#[derive(Debug, Clone)]
pub struct EsPlan {
    pub q: usize,
    /// Embedded kernel vector, permuted coordinates.
    pub v: NullVector,
    /// J = {j : v_j ≢ 0}, permuted column positions.
    pub j_set: Vec<usize>,
    pub s: usize,
    /// I = {i ∈ B_q : d_j − c_i = σ_ij for some j ∈ J}.
    pub i_set: Vec<usize>,
    /// c̄ = max over I of c_i.
    pub c_high: i32,
    /// J̃ = {l ∈ J : v_l nonzero constant}.
    pub j_tilde: Vec<usize>,
    /// Chosen pivot column, permuted position.
    pub l: usize,
    pub equivalence_guaranteed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConversionKind {
    Lc,
    Es,
}

/// Outcome of one applied conversion: the equivalent system, its fresh
/// analysis, and a provenance record.
#[derive(Debug, Clone)]
pub struct ConversionResult {
    pub system: DaeSystem,
    pub kind: ConversionKind,
    pub record: ConversionRecord,
    pub old_val: i64,
    pub new_val: i64,
    pub analysis: SigmaAnalysis,
}

fn hod_of_vector(entries: &[Expr], j: VarId) -> SigmaEntry {
    entries
        .iter()
        .map(|e| sigma_of(e, j))
        .max()
        .unwrap_or(SigmaEntry::NEG_INF)
}

fn is_nonzero_constant(e: &Expr) -> bool {
    crate::symbolic::is_constant(e) && !e.is_zero_literal()
}

/// Builds the LC plan for block q, or reports why the LC condition fails.
///
/// The condition is σ(x_j, u) < d_j − c̲ for every column j of the block.
pub fn plan_lc(
    sys: &DaeSystem,
    analysis: &SigmaAnalysis,
    blocks: &BlockStructure,
    q: usize,
    u: &NullVector,
) -> Result<LcPlan, PlanError> {
    let range = blocks.block_range(q);
    let i_set: Vec<usize> = u.support.clone();
    if i_set.is_empty() {
        return Err(PlanError::EmptySupport);
    }
    assert!(
        i_set.iter().all(|pos| range.contains(pos)),
        "cokernel support escapes block {q}"
    );
    let c = &analysis.offsets.c;
    let d = &analysis.offsets.d;
    let c_low = i_set
        .iter()
        .map(|&pos| c[blocks.rows[pos]])
        .min()
        .expect("nonempty I");

    for j_pos in range.clone() {
        let j_orig = blocks.cols[j_pos];
        let hod = hod_of_vector(&u.entries, VarId(j_orig));
        let bound = d[j_orig] - c_low;
        let ok = hod.order().map_or(true, |h| h < bound);
        if !ok {
            return Err(PlanError::LcCondition {
                variable: sys.var_name(VarId(j_orig)).to_string(),
                hod,
                bound,
            });
        }
    }

    let l_set: Vec<usize> = i_set
        .iter()
        .copied()
        .filter(|&pos| c[blocks.rows[pos]] == c_low)
        .collect();
    let l_tilde: Vec<usize> = l_set
        .iter()
        .copied()
        .filter(|&pos| is_nonzero_constant(&u.entries[pos]))
        .collect();
    let (l, equivalence_guaranteed) = match l_tilde.first() {
        Some(&l) => (l, true),
        None => (l_set[0], false),
    };
    Ok(LcPlan {
        q,
        u: u.clone(),
        i_set,
        c_low,
        l_set,
        l_tilde,
        l,
        equivalence_guaranteed,
    })
}

/// Replaces f_l by Σ_{i∈I} u_i · f_i^((c_i − c̲)) and re-analyzes.
pub fn apply_lc(
    sys: &DaeSystem,
    analysis: &SigmaAnalysis,
    blocks: &BlockStructure,
    plan: &LcPlan,
) -> Result<ConversionResult, Error> {
    let c = &analysis.offsets.c;
    let mut terms = Vec::with_capacity(plan.i_set.len());
    for &pos in &plan.i_set {
        let orig = blocks.rows[pos];
        let order = (c[orig] - plan.c_low) as u32;
        let weight = plan.u.entries[pos].clone();
        // Distribute the weight over the equation's terms so that the
        // combination cancels termwise, as in the hand computation. Only
        // this one level is expanded.
        match total_derivative(&sys.equations[orig].expr, order) {
            Expr::Sum(parts) => {
                for part in parts {
                    terms.push(Expr::Prod(vec![weight.clone(), part]));
                }
            }
            other => terms.push(Expr::Prod(vec![weight, other])),
        }
    }
    let replacement = crate::symbolic::expand(&Expr::Sum(terms));

    let mut new_sys = sys.clone();
    let l_orig = blocks.rows[plan.l];
    new_sys.equations[l_orig].expr = replacement;

    let new_sigma = signature_matrix(&new_sys);
    let bounds_ok = check_lc_sigma_bounds(analysis, &new_sigma, blocks, plan.l);
    assert!(
        bounds_ok,
        "LC conversion violates the signature bounds lemma"
    );
    let new_analysis = analyze_sigma(&new_sigma)
        .map_err(|_| Error::IllPosed("system became structurally ill posed after the LC conversion; the original DAE is degenerate".into()))?;
    assert!(
        new_analysis.val < analysis.val,
        "LC conversion did not decrease valΣ ({} -> {}); σ or zero-test fault",
        analysis.val,
        new_analysis.val
    );

    let record = ConversionRecord {
        kind: "LC".into(),
        block: plan.q + 1,
        replaced_equation: Some(sys.equations[l_orig].name.clone()),
        new_equations: vec![],
        new_variables: vec![],
        chosen_column_or_row: plan.l + 1,
        kernel_support: plan.i_set.len(),
        old_val_sigma: analysis.val,
        new_val_sigma: new_analysis.val,
        size_before: sys.n(),
        size_after: new_sys.n(),
        equivalence_guaranteed: plan.equivalence_guaranteed,
        sigma_bounds_checked: bounds_ok,
    };
    new_sys.conversions.push(record.clone());
    Ok(ConversionResult {
        system: new_sys,
        kind: ConversionKind::Lc,
        record,
        old_val: analysis.val,
        new_val: new_analysis.val,
        analysis: new_analysis,
    })
}

/// Builds the ES plan for block q, checking both displayed conditions
/// exactly as cased, or reports the offending column.
pub fn plan_es(
    sys: &DaeSystem,
    analysis: &SigmaAnalysis,
    blocks: &BlockStructure,
    q: usize,
    v: &NullVector,
) -> Result<EsPlan, PlanError> {
    let range = blocks.block_range(q);
    let j_set: Vec<usize> = v.support.clone();
    if j_set.is_empty() {
        return Err(PlanError::EmptySupport);
    }
    assert!(
        j_set.iter().all(|pos| range.contains(pos)),
        "kernel support escapes block {q}"
    );
    let s = j_set.len();
    if s == 1 {
        return Err(PlanError::NoOp);
    }
    let c = &analysis.offsets.c;
    let d = &analysis.offsets.d;

    let tight = |i_orig: usize, j_orig: usize| {
        analysis.sigma.entries[i_orig][j_orig]
            .order()
            .is_some_and(|sig| d[j_orig] - c[i_orig] == sig)
    };
    let i_set: Vec<usize> = range
        .clone()
        .filter(|&i_pos| {
            j_set
                .iter()
                .any(|&j_pos| tight(blocks.rows[i_pos], blocks.cols[j_pos]))
        })
        .collect();
    assert!(!i_set.is_empty(), "no tight rows for the kernel support");
    let c_high = i_set
        .iter()
        .map(|&pos| c[blocks.rows[pos]])
        .max()
        .expect("nonempty I");

    // First condition, strict for j ∈ J or blk(j) < q, non-strict for
    // j ∈ B_q \ J or blk(j) > q.
    for j_pos in 0..blocks.n {
        let j_orig = blocks.cols[j_pos];
        let hod = hod_of_vector(&v.entries, VarId(j_orig));
        let bound = d[j_orig] - c_high;
        let blk_j = blocks.block_of_pos[j_pos];
        let in_j = j_set.contains(&j_pos);
        let (strict, case) = if in_j || blk_j < q {
            (true, if in_j { "j ∈ J" } else { "blk(j) < q" })
        } else if blk_j > q || range.contains(&j_pos) {
            (false, if blk_j > q { "blk(j) > q" } else { "j ∈ B_q \\ J" })
        } else {
            unreachable!("every column falls in one of the four cases")
        };
        let ok = hod
            .order()
            .map_or(true, |h| if strict { h < bound } else { h <= bound });
        if !ok {
            return Err(PlanError::EsCondition {
                variable: sys.var_name(VarId(j_orig)).to_string(),
                case,
                hod,
                bound,
            });
        }
    }
    // Second condition: d_j − c̄ ≥ 0 on the support.
    for &j_pos in &j_set {
        let j_orig = blocks.cols[j_pos];
        let value = d[j_orig] - c_high;
        if value < 0 {
            return Err(PlanError::EsNegativeOffset {
                variable: sys.var_name(VarId(j_orig)).to_string(),
                value,
            });
        }
    }

    let j_tilde: Vec<usize> = j_set
        .iter()
        .copied()
        .filter(|&pos| is_nonzero_constant(&v.entries[pos]))
        .collect();
    let (l, equivalence_guaranteed) = match j_tilde.first() {
        Some(&l) => (l, true),
        None => (j_set[0], false),
    };
    Ok(EsPlan {
        q,
        v: v.clone(),
        j_set,
        s,
        i_set,
        c_high,
        j_tilde,
        l,
        equivalence_guaranteed,
    })
}

/// Introduces s−1 variables y_j = x_j^((d_j−c̄)) − (v_j/v_l)·x_l^((d_l−c̄)),
/// substitutes through the block's equations, appends the defining
/// equations g_j, and re-analyzes.
pub fn apply_es(
    sys: &DaeSystem,
    analysis: &SigmaAnalysis,
    blocks: &BlockStructure,
    plan: &EsPlan,
) -> Result<ConversionResult, Error> {
    let c = &analysis.offsets.c;
    let d = &analysis.offsets.d;
    let l_orig = blocks.cols[plan.l];
    let d_l = d[l_orig];

    let mut new_sys = sys.clone();
    let mut new_vars = Vec::new();
    let mut new_eqs = Vec::new();
    let mut pending_g: Vec<(String, Expr)> = Vec::new();

    for &j_pos in &plan.j_set {
        if j_pos == plan.l {
            continue;
        }
        let j_orig = blocks.cols[j_pos];
        let ratio = crate::symbolic::simplify(Expr::Div(
            Box::new(plan.v.entries[j_pos].clone()),
            Box::new(plan.v.entries[plan.l].clone()),
        ));
        let base_name = sys.var_name(VarId(j_orig)).to_string();
        let var_name = new_sys.fresh_var_name(&base_name);
        let y_id = VarId(new_sys.variables.len());
        new_sys.variables.push(crate::structure::Variable {
            name: var_name.clone(),
            introduced: true,
        });
        new_vars.push(var_name);

        let x_l = Expr::Var(VarId(l_orig), (d_l - plan.c_high) as u32);
        let x_j = Expr::Var(VarId(j_orig), (d[j_orig] - plan.c_high) as u32);
        // Replacement for x_j^(d_j − c̄): y_j + (v_j/v_l)·x_l^(d_l − c̄).
        let replacement_base = Expr::Sum(vec![
            Expr::NewVar(y_id, 0),
            Expr::Prod(vec![ratio.clone(), x_l.clone()]),
        ]);
        for i_pos in blocks.block_range(plan.q) {
            let i_orig = blocks.rows[i_pos];
            let Some(sig) = analysis.sigma.entries[i_orig][j_orig].order() else {
                continue;
            };
            if d[j_orig] - c[i_orig] != sig {
                continue;
            }
            let order_diff = (plan.c_high - c[i_orig]) as u32;
            let replacement = total_derivative(&replacement_base, order_diff);
            new_sys.equations[i_orig].expr = substitute(
                &new_sys.equations[i_orig].expr,
                (VarId(j_orig), sig as u32),
                &replacement,
            );
        }

        let g_expr = crate::symbolic::simplify(Expr::Sum(vec![
            Expr::Neg(Box::new(Expr::NewVar(y_id, 0))),
            x_j,
            Expr::Neg(Box::new(Expr::Prod(vec![ratio, x_l]))),
        ]));
        let g_name = new_sys.fresh_eq_name(&base_name);
        new_eqs.push(g_name.clone());
        pending_g.push((g_name, g_expr));
    }
    for (name, expr) in pending_g {
        new_sys.equations.push(crate::structure::Equation { name, expr });
    }

    assert_eq!(
        new_sys.n(),
        sys.n() + plan.s - 1,
        "ES growth law: the system must grow by s − 1"
    );

    let new_sigma = signature_matrix(&new_sys);
    let bounds_ok =
        check_es_offset_bounds(analysis, blocks, plan.q, plan.s, plan.c_high, &new_sigma);
    assert!(
        bounds_ok,
        "ES conversion violates the enlarged-offset bounds lemma"
    );
    let new_analysis = analyze_sigma(&new_sigma)
        .map_err(|_| Error::IllPosed("system became structurally ill posed after the ES conversion; the original DAE is degenerate".into()))?;
    assert!(
        new_analysis.val < analysis.val,
        "ES conversion did not decrease valΣ ({} -> {}); σ or zero-test fault",
        analysis.val,
        new_analysis.val
    );

    let record = ConversionRecord {
        kind: "ES".into(),
        block: plan.q + 1,
        replaced_equation: None,
        new_equations: new_eqs,
        new_variables: new_vars,
        chosen_column_or_row: plan.l + 1,
        kernel_support: plan.s,
        old_val_sigma: analysis.val,
        new_val_sigma: new_analysis.val,
        size_before: sys.n(),
        size_after: new_sys.n(),
        equivalence_guaranteed: plan.equivalence_guaranteed,
        sigma_bounds_checked: bounds_ok,
    };
    new_sys.conversions.push(record.clone());
    Ok(ConversionResult {
        system: new_sys,
        kind: ConversionKind::Es,
        record,
        old_val: analysis.val,
        new_val: new_analysis.val,
        analysis: new_analysis,
    })
}

/// After an LC conversion, the old offsets still dominate the new Σ:
/// d_j − c_i > σ̄_ij strictly below the (old) block diagonal and ≥
/// elsewhere. Checked with the old offsets and old block map.
pub fn check_lc_sigma_bounds(
    old: &SigmaAnalysis,
    new_sigma: &SignatureMatrix,
    blocks: &BlockStructure,
    _l: usize,
) -> bool {
    let c = &old.offsets.c;
    let d = &old.offsets.d;
    for i_pos in 0..blocks.n {
        let i_orig = blocks.rows[i_pos];
        for j_pos in 0..blocks.n {
            let j_orig = blocks.cols[j_pos];
            let Some(sig) = new_sigma.entries[i_orig][j_orig].order() else {
                continue;
            };
            let diff = d[j_orig] - c[i_orig];
            let below = blocks.block_of_pos[j_pos] < blocks.block_of_pos[i_pos];
            if below && diff <= sig {
                return false;
            }
            if !below && diff < sig {
                return false;
            }
        }
    }
    true
}

/// After an ES conversion, the enlarged offset pair — old offsets with c̄
/// inserted for the appended equations and introduced variables — must
/// dominate the enlarged Σ̄ in the enlarged block layout, strictly below
/// the block diagonal.
///
/// The enlarged layout places the s−1 new columns and rows at the end of
/// block q. (The construction in the source adds a row/column for the
/// pivot itself as proof scaffolding; at runtime only s−1 exist, and the
/// inequalities transfer to the sub-layout unchanged.)
pub fn check_es_offset_bounds(
    old: &SigmaAnalysis,
    blocks: &BlockStructure,
    q: usize,
    s: usize,
    c_high: i32,
    new_sigma: &SignatureMatrix,
) -> bool {
    let n_old = blocks.n;
    let grow = s - 1;
    let n_new = n_old + grow;
    assert_eq!(new_sigma.n, n_new);
    let q_end = blocks.starts[q] + blocks.sizes[q];

    // Position -> original index in the enlarged permuted layout.
    let mut rows_new = Vec::with_capacity(n_new);
    let mut cols_new = Vec::with_capacity(n_new);
    let mut blk_new = Vec::with_capacity(n_new);
    let mut c_bar = Vec::with_capacity(n_new);
    let mut d_bar = Vec::with_capacity(n_new);
    for pos in 0..q_end {
        rows_new.push(blocks.rows[pos]);
        cols_new.push(blocks.cols[pos]);
        blk_new.push(blocks.block_of_pos[pos]);
        c_bar.push(old.offsets.c[blocks.rows[pos]]);
        d_bar.push(old.offsets.d[blocks.cols[pos]]);
    }
    // Appended equations take c̄; introduced variables take d = c̄.
    for orig in n_old..n_new {
        rows_new.push(orig);
        cols_new.push(orig);
        blk_new.push(q);
        c_bar.push(c_high);
        d_bar.push(c_high);
    }
    for pos in q_end..n_old {
        rows_new.push(blocks.rows[pos]);
        cols_new.push(blocks.cols[pos]);
        blk_new.push(blocks.block_of_pos[pos]);
        c_bar.push(old.offsets.c[blocks.rows[pos]]);
        d_bar.push(old.offsets.d[blocks.cols[pos]]);
    }

    for pi in 0..n_new {
        for pj in 0..n_new {
            let Some(sig) = new_sigma.entries[rows_new[pi]][cols_new[pj]].order() else {
                continue;
            };
            let diff = d_bar[pj] - c_bar[pi];
            if blk_new[pj] < blk_new[pi] {
                if diff <= sig {
                    return false;
                }
            } else if diff < sig {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// LC first, ES on condition failure.
    Auto,
    Lc,
    Es,
}

impl Method {
    fn order(self) -> &'static [ConversionKind] {
        match self {
            Method::Auto => &[ConversionKind::Lc, ConversionKind::Es],
            Method::Lc => &[ConversionKind::Lc],
            Method::Es => &[ConversionKind::Es],
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixOptions {
    pub method: Method,
    pub max_iterations: usize,
}

impl Default for FixOptions {
    fn default() -> Self {
        FixOptions {
            method: Method::Auto,
            max_iterations: 10,
        }
    }
}

/// Result of the analyze-convert loop.
#[derive(Debug, Clone)]
pub struct FixReport {
    pub system: DaeSystem,
    pub analysis: SigmaAnalysis,
    pub conversions: Vec<ConversionRecord>,
    pub initial_val: i64,
    pub final_val: i64,
    pub structural_index: i32,
}

/// Repeats analyze → locate first identically singular fine block →
/// convert, until the System Jacobian is generically nonsingular.
///
/// Every applied conversion strictly decreases valΣ, so at most
/// valΣ_initial + 1 iterations run before success or a diagnostic error.
pub fn fix_dae(sys: &DaeSystem, options: &FixOptions) -> Result<FixReport, Error> {
    sys.validate().map_err(|e| Error::Invalid(e.to_string()))?;
    let mut current = sys.clone();
    let mut conversions: Vec<ConversionRecord> = Vec::new();
    let mut initial_val = None;

    loop {
        let sigma = signature_matrix(&current);
        let analysis =
            analyze_sigma(&sigma).map_err(|e| Error::IllPosed(e.to_string()))?;
        let initial = *initial_val.get_or_insert(analysis.val);
        let jac = system_jacobian(&current, &analysis);
        if crate::structure::is_jacobian_nonsingular(&jac)?
            == JacobianVerdict::GenericallyNonsingular
        {
            let index = structural_index(&analysis);
            assert!(
                conversions.len() as i64 <= initial + 1,
                "driver exceeded the valΣ termination bound"
            );
            return Ok(FixReport {
                system: current,
                final_val: analysis.val,
                initial_val: initial,
                conversions,
                structural_index: index,
                analysis,
            });
        }
        if conversions.len() >= options.max_iterations {
            return Err(Error::IterationLimit(options.max_iterations));
        }
        if analysis.val == 0 {
            return Err(Error::NoConversion(
                "valΣ is already 0; a further strict decrease is impossible".into(),
            ));
        }

        let s0 = jacobian_pattern(&analysis);
        let blocks = fine_btf(&s0).map_err(|e| Error::IllPosed(e.to_string()))?;
        let mut failures: Vec<String> = Vec::new();
        let mut applied: Option<ConversionResult> = None;

        'blocks: for q in 0..blocks.p() {
            let block = jacobian_block(&jac, &blocks, q);
            if rank_probe(&block)? == blocks.sizes[q] {
                continue;
            }
            for &kind in options.method.order() {
                let attempt = try_conversion(&current, &analysis, &blocks, q, &block, kind);
                match attempt {
                    Ok(result) => {
                        applied = Some(result);
                        break 'blocks;
                    }
                    Err(TryError::BlockNonsingular) => {
                        // Probe false-positive; the block is fine.
                        continue 'blocks;
                    }
                    Err(TryError::Plan(e)) => {
                        failures.push(format!("block {}, {:?}: {}", q + 1, kind, e));
                    }
                    Err(TryError::Fatal(e)) => return Err(e),
                }
            }
        }

        match applied {
            Some(result) => {
                conversions.push(result.record.clone());
                current = result.system;
            }
            None => {
                if failures.is_empty() {
                    return Err(Error::NoConversion(
                        "the Jacobian probes singular but no singular diagonal block was confirmed"
                            .into(),
                    ));
                }
                return Err(Error::NoConversion(failures.join("; ")));
            }
        }
    }
}

enum TryError {
    Plan(PlanError),
    BlockNonsingular,
    Fatal(Error),
}


fn try_conversion(
    sys: &DaeSystem,
    analysis: &SigmaAnalysis,
    blocks: &BlockStructure,
    q: usize,
    block: &crate::symla::SymbolicMatrix,
    kind: ConversionKind,
) -> Result<ConversionResult, TryError> {
    match kind {
        ConversionKind::Lc => {
            let uhat = match cokernel_vector(block) {
                Ok(v) => v,
                Err(SymlaError::NotIdenticallySingular) => return Err(TryError::BlockNonsingular),
                Err(SymlaError::Probe(e)) => return Err(TryError::Fatal(e.into())),
            };
            let u = embed_in_full(&uhat, blocks, q);
            let plan = plan_lc(sys, analysis, blocks, q, &u).map_err(TryError::Plan)?;
            apply_lc(sys, analysis, blocks, &plan).map_err(TryError::Fatal)
        }
        ConversionKind::Es => {
            let vhat = match kernel_vector(block) {
                Ok(v) => v,
                Err(SymlaError::NotIdenticallySingular) => return Err(TryError::BlockNonsingular),
                Err(SymlaError::Probe(e)) => return Err(TryError::Fatal(e.into())),
            };
            let v = embed_in_full(&vhat, blocks, q);
            let plan = plan_es(sys, analysis, blocks, q, &v).map_err(TryError::Plan)?;
            apply_es(sys, analysis, blocks, &plan).map_err(TryError::Fatal)
        }
    }
}

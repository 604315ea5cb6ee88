//! Analysis reports: the machine-readable structure behind `--json` and
//! the paper-style Σ grid rendering with HVT marks, block rules and
//! offset margins.

use crate::btf::{
    coarse_btf, fine_btf, jacobian_pattern, occurrence_pattern, BlockStructure, BtfError,
};
use crate::error::Error;
use crate::structure::{
    analyze_sigma, signature_matrix, structural_index, system_jacobian, ConversionRecord,
    DaeSystem, JacobianVerdict, SigmaAnalysis, SystemJacobian,
};
use crate::symla::{jacobian_block, rank_probe};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct BtfSummary {
    pub p: usize,
    pub sizes: Vec<usize>,
    pub equation_order: Vec<String>,
    pub variable_order: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    pub block: usize,
    pub size: usize,
    pub equations: Vec<String>,
    pub variables: Vec<String>,
    pub local_c: Vec<i32>,
    pub local_d: Vec<i32>,
    pub singular: bool,
}

/// Full structural-analysis report. Field names are stable.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub val_sigma: i64,
    pub structural_index: i32,
    pub jacobian: String,
    pub equations: Vec<String>,
    pub variables: Vec<String>,
    pub parameters: Vec<String>,
    pub drivers: Vec<String>,
    /// Offsets in original equation/variable order.
    pub offsets_c: Vec<i32>,
    pub offsets_d: Vec<i32>,
    /// HVT as 1-based (equation, variable) pairs, original indices.
    pub hvt: Vec<(usize, usize)>,
    pub coarse_btf: BtfSummary,
    pub fine_btf: BtfSummary,
    pub blocks: Vec<BlockReport>,
    pub conversions: Vec<ConversionRecord>,
}

/// Analysis bundle: everything cmd_analyze and the fix driver's reporting
/// need, computed once.
pub struct Analyzed {
    pub analysis: SigmaAnalysis,
    pub jacobian: SystemJacobian,
    pub verdict: JacobianVerdict,
    pub coarse: BlockStructure,
    pub fine: BlockStructure,
    pub singular_blocks: Vec<bool>,
}

pub fn analyze(sys: &DaeSystem) -> Result<Analyzed, Error> {
    sys.validate().map_err(|e| Error::Invalid(e.to_string()))?;
    let sigma = signature_matrix(sys);
    let analysis = analyze_sigma(&sigma).map_err(|e| Error::IllPosed(e.to_string()))?;
    let jacobian = system_jacobian(sys, &analysis);
    let verdict = crate::structure::is_jacobian_nonsingular(&jacobian)?;
    let btf_err = |e: BtfError| Error::IllPosed(e.to_string());
    let coarse = coarse_btf(&occurrence_pattern(&sigma)).map_err(btf_err)?;
    let fine = fine_btf(&jacobian_pattern(&analysis)).map_err(btf_err)?;
    let mut singular_blocks = Vec::with_capacity(fine.p());
    for q in 0..fine.p() {
        let block = jacobian_block(&jacobian, &fine, q);
        singular_blocks.push(rank_probe(&block)? < fine.sizes[q]);
    }
    // The lemma checks on every analysis: a HVT stays inside the diagonal
    // blocks, and valΣ splits over them.
    debug_assert!(hvt_within_blocks(&analysis, &fine));
    debug_assert_eq!(block_value_sum(&analysis, &fine), analysis.val);
    Ok(Analyzed {
        analysis,
        jacobian,
        verdict,
        coarse,
        fine,
        singular_blocks,
    })
}

/// Every HVT position lies in a diagonal block of the fine BTF.
pub fn hvt_within_blocks(analysis: &SigmaAnalysis, blocks: &BlockStructure) -> bool {
    analysis.hvt.iter().enumerate().all(|(i, &j)| {
        blocks.block_of_pos[blocks.row_pos[i]] == blocks.block_of_pos[blocks.col_pos[j]]
    })
}

/// Sum over diagonal blocks of val(Σ_qq), each computed by an independent
/// assignment on the block submatrix; equals valΣ by the HVT-union lemma.
pub fn block_value_sum(analysis: &SigmaAnalysis, blocks: &BlockStructure) -> i64 {
    let mut total = 0i64;
    for q in 0..blocks.p() {
        let range = blocks.block_range(q);
        let sub: Vec<Vec<crate::symbolic::SigmaEntry>> = range
            .clone()
            .map(|pi| {
                range
                    .clone()
                    .map(|pj| analysis.sigma.entries[blocks.rows[pi]][blocks.cols[pj]])
                    .collect()
            })
            .collect();
        let (_, v) = crate::structure::max_assignment(&sub)
            .expect("diagonal blocks of a well-posed analysis have transversals");
        total += v;
    }
    total
}

pub fn build_report(sys: &DaeSystem, a: &Analyzed) -> AnalysisReport {
    let names = |b: &BlockStructure| BtfSummary {
        p: b.p(),
        sizes: b.sizes.clone(),
        equation_order: b.rows.iter().map(|&i| sys.equations[i].name.clone()).collect(),
        variable_order: b
            .cols
            .iter()
            .map(|&j| sys.variables[j].name.clone())
            .collect(),
    };
    let local = crate::btf::local_offsets(&a.analysis, &a.fine);
    let blocks = (0..a.fine.p())
        .map(|q| {
            let range = a.fine.block_range(q);
            BlockReport {
                block: q + 1,
                size: a.fine.sizes[q],
                equations: range
                    .clone()
                    .map(|pos| sys.equations[a.fine.rows[pos]].name.clone())
                    .collect(),
                variables: range
                    .clone()
                    .map(|pos| sys.variables[a.fine.cols[pos]].name.clone())
                    .collect(),
                local_c: local[q].0.clone(),
                local_d: local[q].1.clone(),
                singular: a.singular_blocks[q],
            }
        })
        .collect();
    AnalysisReport {
        n: sys.n(),
        val_sigma: a.analysis.val,
        structural_index: structural_index(&a.analysis),
        jacobian: match a.verdict {
            JacobianVerdict::GenericallyNonsingular => "generically-nonsingular".into(),
            JacobianVerdict::IdenticallySingular => "identically-singular".into(),
        },
        equations: sys.equations.iter().map(|e| e.name.clone()).collect(),
        variables: sys.variables.iter().map(|v| v.name.clone()).collect(),
        parameters: sys.parameters.keys().cloned().collect(),
        drivers: sys.drivers.iter().cloned().collect(),
        offsets_c: a.analysis.offsets.c.clone(),
        offsets_d: a.analysis.offsets.d.clone(),
        hvt: a
            .analysis
            .hvt
            .iter()
            .enumerate()
            .map(|(i, &j)| (i + 1, j + 1))
            .collect(),
        coarse_btf: names(&a.coarse),
        fine_btf: names(&a.fine),
        blocks,
        conversions: sys.conversions.clone(),
    }
}

/// Σ as a text grid: `*` marks HVT positions, `-` is −∞, block rules
/// follow the given BTF, offsets in the margins.
pub fn render_sigma(sys: &DaeSystem, analysis: &SigmaAnalysis, blocks: &BlockStructure) -> String {
    let n = sys.n();
    let hvt_at = |i: usize, j: usize| analysis.hvt[i] == j;

    let row_names: Vec<String> = blocks
        .rows
        .iter()
        .map(|&i| sys.equations[i].name.clone())
        .collect();
    let col_names: Vec<String> = blocks
        .cols
        .iter()
        .map(|&j| sys.variables[j].name.clone())
        .collect();

    let cell = |pi: usize, pj: usize| -> String {
        let (i, j) = (blocks.rows[pi], blocks.cols[pj]);
        let e = analysis.sigma.entries[i][j];
        let mark = if e.is_finite() && hvt_at(i, j) { "*" } else { "" };
        format!("{e}{mark}")
    };

    let mut widths: Vec<usize> = col_names.iter().map(|s| s.len()).collect();
    for pj in 0..n {
        let d_len = analysis.offsets.d[blocks.cols[pj]].to_string().len();
        widths[pj] = widths[pj].max(d_len);
        for pi in 0..n {
            widths[pj] = widths[pj].max(cell(pi, pj).len());
        }
    }
    let name_w = row_names.iter().map(|s| s.len()).max().unwrap_or(0).max(2);

    let boundary_after: Vec<bool> = (0..n)
        .map(|pos| {
            pos + 1 < n && blocks.block_of_pos[pos] != blocks.block_of_pos[pos + 1]
        })
        .collect();

    let mut out = String::new();
    // Header.
    out.push_str(&format!("{:name_w$}  ", ""));
    for pj in 0..n {
        out.push_str(&format!("{:>w$} ", col_names[pj], w = widths[pj]));
        if boundary_after[pj] {
            out.push_str("| ");
        }
    }
    out.push_str("   c\n");
    let rule_len = out.lines().last().map(|l| l.len()).unwrap_or(0);
    out.push_str(&"-".repeat(rule_len));
    out.push('\n');

    for pi in 0..n {
        out.push_str(&format!("{:>name_w$}  ", row_names[pi]));
        for pj in 0..n {
            out.push_str(&format!("{:>w$} ", cell(pi, pj), w = widths[pj]));
            if boundary_after[pj] {
                out.push_str("| ");
            }
        }
        out.push_str(&format!("   {}\n", analysis.offsets.c[blocks.rows[pi]]));
        if boundary_after[pi] {
            let mut rule = String::new();
            rule.push_str(&format!("{:name_w$}  ", ""));
            for pj in 0..n {
                rule.push_str(&"-".repeat(widths[pj] + 1));
                if boundary_after[pj] {
                    rule.push_str("+-");
                }
            }
            out.push_str(rule.trim_end());
            out.push('\n');
        }
    }
    out.push_str(&"-".repeat(rule_len));
    out.push('\n');
    out.push_str(&format!("{:>name_w$}  ", "d"));
    for pj in 0..n {
        out.push_str(&format!(
            "{:>w$} ",
            analysis.offsets.d[blocks.cols[pj]],
            w = widths[pj]
        ));
        if boundary_after[pj] {
            out.push_str("| ");
        }
    }
    out.push('\n');
    out
}


/// Human-readable analysis summary: headline numbers, the Σ grid, fine
/// blocks with verdicts, and any conversion log.
pub fn render_report(sys: &DaeSystem, a: &Analyzed, btf_mode: &str) -> String {
    let report = build_report(sys, a);
    let mut out = String::new();
    out.push_str(&format!(
        "n = {}   valΣ = {}   structural index = {}   Jacobian: {}\n",
        report.n, report.val_sigma, report.structural_index, report.jacobian
    ));
    out.push_str(&format!(
        "coarse BTF: {} block(s) {:?}   fine BTF: {} block(s) {:?}\n",
        report.coarse_btf.p, report.coarse_btf.sizes, report.fine_btf.p, report.fine_btf.sizes
    ));
    match btf_mode {
        "none" => {
            let trivial = BlockStructure::trivial(sys.n());
            out.push('\n');
            out.push_str(&render_sigma(sys, &a.analysis, &trivial));
        }
        "coarse" => {
            out.push('\n');
            out.push_str(&render_sigma(sys, &a.analysis, &a.coarse));
        }
        _ => {
            out.push('\n');
            out.push_str(&render_sigma(sys, &a.analysis, &a.fine));
        }
    }
    out.push('\n');
    for b in &report.blocks {
        out.push_str(&format!(
            "block {}: size {}  eqs [{}]  vars [{}]  c {:?}  d {:?}  {}\n",
            b.block,
            b.size,
            b.equations.join(", "),
            b.variables.join(", "),
            b.local_c,
            b.local_d,
            if b.singular {
                "identically singular"
            } else {
                "nonsingular"
            }
        ));
    }
    if !report.conversions.is_empty() {
        out.push('\n');
        for rec in &report.conversions {
            out.push_str(&format!(
                "conversion {} on block {}: {} (valΣ {} -> {}, equivalence {})\n",
                rec.kind,
                rec.block,
                match &rec.replaced_equation {
                    Some(n) => format!("replaced {n}"),
                    None => format!(
                        "introduced [{}], appended [{}]",
                        rec.new_variables.join(", "),
                        rec.new_equations.join(", ")
                    ),
                },
                rec.old_val_sigma,
                rec.new_val_sigma,
                if rec.equivalence_guaranteed {
                    "guaranteed"
                } else {
                    "not guaranteed"
                }
            ));
        }
    }
    out
}

//! Sparsity patterns of a Σ analysis and their irreducible block
//! triangular forms.
//!
//! Two patterns matter: S, where σ_ij is finite (variable occurs), and S0,
//! where d_j − c_i = σ_ij (Jacobian entry may be nonzero). The BTF from S
//! is the coarse BTF, the one from S0 the fine BTF; the fine one is never
//! coarser. Blocks are ordered so that permuted patterns have no entries
//! below the block diagonal.

use crate::structure::{Offsets, SigmaAnalysis, SignatureMatrix};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BtfError {
    #[error("structurally ill posed: the pattern has no perfect matching")]
    IllPosed,
    #[error("essential pattern unsupported at this size (n = {0} > {1})")]
    EssentialSizeGuard(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PatternKind {
    /// S: positions with finite σ_ij.
    Occurrence,
    /// S0: positions with d_j − c_i = σ_ij.
    Jacobian,
    /// S_ess: union of all HVTs.
    Essential,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    pub n: usize,
    pub kind: PatternKind,
    pub positions: BTreeSet<(usize, usize)>,
}

impl SparsityPattern {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.positions.contains(&(i, j))
    }
}

/// S: every finite signature entry.
pub fn occurrence_pattern(sigma: &SignatureMatrix) -> SparsityPattern {
    let mut positions = BTreeSet::new();
    for i in 0..sigma.n {
        for j in 0..sigma.n {
            if sigma.entries[i][j].is_finite() {
                positions.insert((i, j));
            }
        }
    }
    SparsityPattern {
        n: sigma.n,
        kind: PatternKind::Occurrence,
        positions,
    }
}

/// S0: positions where the offsets are tight, i.e. where the System
/// Jacobian may be structurally nonzero.
pub fn jacobian_pattern(analysis: &SigmaAnalysis) -> SparsityPattern {
    let Offsets { c, d } = &analysis.offsets;
    let mut positions = BTreeSet::new();
    for i in 0..analysis.sigma.n {
        for j in 0..analysis.sigma.n {
            if analysis.sigma.entries[i][j]
                .order()
                .is_some_and(|s| d[j] - c[i] == s)
            {
                positions.insert((i, j));
            }
        }
    }
    SparsityPattern {
        n: analysis.sigma.n,
        kind: PatternKind::Jacobian,
        positions,
    }
}

const ESSENTIAL_MAX_N: usize = 12;

/// S_ess: union of all highest-value transversals, by enumeration with a
/// branch-and-bound cutoff at valΣ. Guarded to small n.
pub fn essential_pattern(analysis: &SigmaAnalysis) -> Result<SparsityPattern, BtfError> {
    let n = analysis.sigma.n;
    if n > ESSENTIAL_MAX_N {
        return Err(BtfError::EssentialSizeGuard(n, ESSENTIAL_MAX_N));
    }
    let sigma = &analysis.sigma;
    // Optimistic bound: sum of row maxima for the remaining rows.
    let row_max: Vec<i64> = (0..n)
        .map(|i| {
            (0..n)
                .filter_map(|j| sigma.entries[i][j].order())
                .max()
                .unwrap_or(0) as i64
        })
        .collect();
    let mut suffix = vec![0i64; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + row_max[i];
    }

    let mut positions = BTreeSet::new();
    let mut used = vec![false; n];
    let mut stack: Vec<(usize, usize)> = Vec::with_capacity(n);
    fn dfs(
        i: usize,
        cur: i64,
        sigma: &SignatureMatrix,
        suffix: &[i64],
        used: &mut [bool],
        stack: &mut Vec<(usize, usize)>,
        target: i64,
        out: &mut BTreeSet<(usize, usize)>,
    ) {
        let n = sigma.n;
        if i == n {
            if cur == target {
                out.extend(stack.iter().copied());
            }
            return;
        }
        if cur + suffix[i] < target {
            return;
        }
        for j in 0..n {
            if used[j] {
                continue;
            }
            if let Some(s) = sigma.entries[i][j].order() {
                used[j] = true;
                stack.push((i, j));
                dfs(i + 1, cur + s as i64, sigma, suffix, used, stack, target, out);
                stack.pop();
                used[j] = false;
            }
        }
    }
    dfs(
        0,
        0,
        sigma,
        &suffix,
        &mut used,
        &mut stack,
        analysis.val,
        &mut positions,
    );
    Ok(SparsityPattern {
        n,
        kind: PatternKind::Essential,
        positions,
    })
}

/// An irreducible block triangular form of a square sparsity pattern.
///
/// `rows[pos]` / `cols[pos]` map permuted positions to original indices.
/// Block q occupies positions `starts[q] .. starts[q] + sizes[q]`. Index
/// sets and `blk(·)` from the analysis always refer to permuted positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    pub n: usize,
    pub kind: PatternKind,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub row_pos: Vec<usize>,
    pub col_pos: Vec<usize>,
    pub sizes: Vec<usize>,
    pub starts: Vec<usize>,
    pub block_of_pos: Vec<usize>,
    pub irreducible: bool,
}

impl BlockStructure {
    pub fn p(&self) -> usize {
        self.sizes.len()
    }

    pub fn block_range(&self, q: usize) -> std::ops::Range<usize> {
        self.starts[q]..self.starts[q] + self.sizes[q]
    }

    pub fn block_of_orig_row(&self, i: usize) -> usize {
        self.block_of_pos[self.row_pos[i]]
    }

    pub fn block_of_orig_col(&self, j: usize) -> usize {
        self.block_of_pos[self.col_pos[j]]
    }

    /// Single-block structure: the whole system viewed as one block, used
    /// for the basic (whole-system) conversion methods.
    pub fn trivial(n: usize) -> BlockStructure {
        BlockStructure {
            n,
            kind: PatternKind::Occurrence,
            rows: (0..n).collect(),
            cols: (0..n).collect(),
            row_pos: (0..n).collect(),
            col_pos: (0..n).collect(),
            sizes: vec![n],
            starts: vec![0],
            block_of_pos: vec![0; n],
            irreducible: false,
        }
    }
}

/// Fine BTF: irreducible BTF of the Jacobian pattern S0.
pub fn fine_btf(s0: &SparsityPattern) -> Result<BlockStructure, BtfError> {
    btf_of(s0)
}

/// Coarse BTF: irreducible BTF of the occurrence pattern S.
pub fn coarse_btf(s: &SparsityPattern) -> Result<BlockStructure, BtfError> {
    btf_of(s)
}

fn btf_of(pattern: &SparsityPattern) -> Result<BlockStructure, BtfError> {
    let n = pattern.n;
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            pattern
                .positions
                .range((i, 0)..=(i, n.max(1) - 1))
                .map(|&(_, j)| j)
                .collect()
        })
        .collect();

    let row_of_col = perfect_matching(n, &adj).ok_or(BtfError::IllPosed)?;

    // Row digraph: i -> k when row i has an entry in a column matched to
    // row k. Entry (i, j) then sits at block position (blk i, blk k), so a
    // topological order of the condensation empties the sub-diagonal.
    let mut graph: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in &adj[i] {
            let k = row_of_col[j];
            if k != i {
                graph[i].push(k);
            }
        }
        graph[i].sort_unstable();
        graph[i].dedup();
    }

    let comps = tarjan_scc(&graph);
    let order = condensation_order(&graph, &comps);

    let mut rows = Vec::with_capacity(n);
    let mut sizes = Vec::with_capacity(comps.len());
    let mut starts = Vec::with_capacity(comps.len());
    let mut block_of_pos = vec![0usize; n];
    let mut col_of_row = vec![0usize; n];
    for (j, &i) in row_of_col.iter().enumerate() {
        col_of_row[i] = j;
    }
    for (q, &comp_idx) in order.iter().enumerate() {
        let mut members = comps[comp_idx].clone();
        members.sort_unstable();
        starts.push(rows.len());
        sizes.push(members.len());
        for &i in &members {
            block_of_pos[rows.len()] = q;
            rows.push(i);
        }
    }
    let cols: Vec<usize> = rows.iter().map(|&i| col_of_row[i]).collect();
    let mut row_pos = vec![0usize; n];
    let mut col_pos = vec![0usize; n];
    for (pos, &i) in rows.iter().enumerate() {
        row_pos[i] = pos;
    }
    for (pos, &j) in cols.iter().enumerate() {
        col_pos[j] = pos;
    }

    let blocks = BlockStructure {
        n,
        kind: pattern.kind,
        rows,
        cols,
        row_pos,
        col_pos,
        sizes,
        starts,
        block_of_pos,
        irreducible: true,
    };
    assert!(
        subdiagonal_empty(pattern, &blocks),
        "permuted pattern has entries below the block diagonal"
    );
    Ok(blocks)
}

/// True when no position of the pattern falls strictly below the block
/// diagonal of the permuted form.
pub fn subdiagonal_empty(pattern: &SparsityPattern, blocks: &BlockStructure) -> bool {
    pattern.positions.iter().all(|&(i, j)| {
        blocks.block_of_pos[blocks.row_pos[i]] <= blocks.block_of_pos[blocks.col_pos[j]]
    })
}

/// Lexicographically smallest perfect matching: each row in order takes
/// the smallest column that keeps the remaining rows matchable. On a
/// Jacobian pattern this is exactly the deterministic HVT, so permuted
/// columns line up with the transversal marks. Returns `row_of_col`.
fn perfect_matching(n: usize, adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut used = vec![false; n];
    let mut row_of_col = vec![usize::MAX; n];
    for i in 0..n {
        let mut chosen = None;
        for &j in &adj[i] {
            if used[j] {
                continue;
            }
            used[j] = true;
            if rest_matchable(adj, i + 1, &used) {
                chosen = Some(j);
                break;
            }
            used[j] = false;
        }
        row_of_col[chosen?] = i;
    }
    Some(row_of_col)
}

/// Kuhn augmenting paths: can rows `from..` be matched into unused
/// columns?
fn rest_matchable(adj: &[Vec<usize>], from: usize, used: &[bool]) -> bool {
    let n = adj.len();
    let mut col_owner: Vec<Option<usize>> = vec![None; n];
    fn try_row(
        i: usize,
        adj: &[Vec<usize>],
        used: &[bool],
        seen: &mut [bool],
        col_owner: &mut [Option<usize>],
    ) -> bool {
        for &j in &adj[i] {
            if used[j] || seen[j] {
                continue;
            }
            seen[j] = true;
            let free = match col_owner[j] {
                None => true,
                Some(owner) => try_row(owner, adj, used, seen, col_owner),
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
        if !try_row(i, adj, used, &mut seen, &mut col_owner) {
            return false;
        }
    }
    true
}

/// Tarjan strongly connected components, iterative; components in reverse
/// topological order of the condensation.
fn tarjan_scc(graph: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut index = 0usize;
    let mut idx: Vec<Option<usize>> = vec![None; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();

    // Explicit call stack of (vertex, next-child index).
    let mut call: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if idx[start].is_some() {
            continue;
        }
        call.push((start, 0));
        idx[start] = Some(index);
        low[start] = index;
        index += 1;
        stack.push(start);
        on_stack[start] = true;

        while let Some(&mut (v, ref mut ci)) = call.last_mut() {
            if *ci < graph[v].len() {
                let w = graph[v][*ci];
                *ci += 1;
                match idx[w] {
                    None => {
                        idx[w] = Some(index);
                        low[w] = index;
                        index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    }
                    Some(wi) => {
                        if on_stack[w] {
                            low[v] = low[v].min(wi);
                        }
                    }
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == idx[v].unwrap() {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// Topological order of the SCC condensation (all cross edges point from
/// earlier to later blocks), ties broken by the smallest original row
/// index contained in the component.
fn condensation_order(graph: &[Vec<usize>], comps: &[Vec<usize>]) -> Vec<usize> {
    let n = graph.len();
    let m = comps.len();
    let mut comp_of = vec![0usize; n];
    for (ci, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = ci;
        }
    }
    let mut indeg = vec![0usize; m];
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (v, outs) in graph.iter().enumerate() {
        for &w in outs {
            let (a, b) = (comp_of[v], comp_of[w]);
            if a != b && edges.insert((a, b)) {
                indeg[b] += 1;
            }
        }
    }
    let min_row: Vec<usize> = comps.iter().map(|c| *c.iter().min().unwrap()).collect();
    let mut ready: BTreeSet<(usize, usize)> = (0..m)
        .filter(|&c| indeg[c] == 0)
        .map(|c| (min_row[c], c))
        .collect();
    let mut order = Vec::with_capacity(m);
    while let Some(&(key, c)) = ready.iter().next() {
        ready.remove(&(key, c));
        order.push(c);
        for &(a, b) in edges.range((c, 0)..(c + 1, 0)) {
            debug_assert_eq!(a, c);
            indeg[b] -= 1;
            if indeg[b] == 0 {
                ready.insert((min_row[b], b));
            }
        }
    }
    assert_eq!(order.len(), m, "condensation has a cycle");
    order
}

/// Restriction of the global offsets to each diagonal block, validated to
/// be a valid local offset pair of Σ_qq.
pub fn local_offsets(analysis: &SigmaAnalysis, blocks: &BlockStructure) -> Vec<(Vec<i32>, Vec<i32>)> {
    let Offsets { c, d } = &analysis.offsets;
    let mut out = Vec::with_capacity(blocks.p());
    for q in 0..blocks.p() {
        let range = blocks.block_range(q);
        let local_c: Vec<i32> = range.clone().map(|pos| c[blocks.rows[pos]]).collect();
        let local_d: Vec<i32> = range.clone().map(|pos| d[blocks.cols[pos]]).collect();
        // Validity on the block: d_j − c_i ≥ σ_ij inside the block, with
        // equality on the global HVT's restriction.
        for (bi, pos_i) in range.clone().enumerate() {
            let i = blocks.rows[pos_i];
            for (bj, pos_j) in range.clone().enumerate() {
                let j = blocks.cols[pos_j];
                if let Some(s) = analysis.sigma.entries[i][j].order() {
                    assert!(
                        local_d[bj] - local_c[bi] >= s,
                        "local offsets violate validity on block {q}"
                    );
                }
            }
            let hj = analysis.hvt[i];
            if blocks.col_pos[hj] >= range.start && blocks.col_pos[hj] < range.end {
                let s = analysis.sigma.entries[i][hj].order().unwrap();
                assert_eq!(
                    d[hj] - c[i],
                    s,
                    "HVT restriction not tight on block {q}"
                );
            }
        }
        out.push((local_c, local_d));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::SigmaEntry;

    fn pattern(n: usize, pos: &[(usize, usize)]) -> SparsityPattern {
        SparsityPattern {
            n,
            kind: PatternKind::Jacobian,
            positions: pos.iter().copied().collect(),
        }
    }

    #[test]
    fn dense_pattern_is_one_block() {
        let n = 4;
        let all: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        let b = fine_btf(&pattern(n, &all)).unwrap();
        assert_eq!(b.sizes, vec![4]);
    }

    #[test]
    fn diagonal_pattern_splits_fully() {
        let n = 5;
        let diag: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        let b = coarse_btf(&pattern(n, &diag)).unwrap();
        assert_eq!(b.sizes, vec![1; 5]);
        assert_eq!(b.rows, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn missing_matching_is_ill_posed() {
        let b = fine_btf(&pattern(2, &[(0, 0), (1, 0)]));
        assert_eq!(b.unwrap_err(), BtfError::IllPosed);
    }

    #[test]
    fn paper_six_by_six_pattern_has_four_blocks() {
        // The 6x6 pattern with irreducible blocks of sizes 1,1,1,3.
        let pos = [
            (0, 0),
            (0, 1),
            (1, 1),
            (1, 2),
            (2, 2),
            (2, 5),
            (3, 3),
            (3, 4),
            (4, 4),
            (4, 5),
            (5, 3),
            (5, 5),
        ];
        let b = fine_btf(&pattern(6, &pos)).unwrap();
        assert_eq!(b.sizes, vec![1, 1, 1, 3]);
        assert_eq!(b.rows, vec![0, 1, 2, 3, 4, 5]);
        assert!(b.irreducible);
    }

    fn analyzed(text: &str) -> (crate::structure::DaeSystem, crate::structure::SigmaAnalysis) {
        let sys = crate::model::parse_model(text).unwrap();
        let analysis =
            crate::structure::analyze_sigma(&crate::structure::signature_matrix(&sys)).unwrap();
        (sys, analysis)
    }

    const INTRO: &str = include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../models/intro.dae"
    ));
    const MOD2PEND: &str = include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../models/mod2pend.dae"
    ));
    const RINGMOD: &str = include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../models/ringmod.dae"
    ));
    const ROBOTARM: &str = include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../models/robotarm.dae"
    ));

    #[test]
    fn intro_jacobian_pattern_from_offsets() {
        // Recomputed from Σ with c = (1,0,0), d = (1,1,1).
        let (_, analysis) = analyzed(INTRO);
        let s0 = jacobian_pattern(&analysis);
        let expected: BTreeSet<(usize, usize)> =
            [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 2)]
                .into_iter()
                .collect();
        assert_eq!(s0.positions, expected);
        // Here S and S0 coincide, so coarse and fine BTFs agree: (2, 1).
        let fine = fine_btf(&s0).unwrap();
        assert_eq!(fine.sizes, vec![2, 1]);
        let coarse = coarse_btf(&occurrence_pattern(&analysis.sigma)).unwrap();
        assert_eq!(coarse.sizes, vec![2, 1]);
    }

    #[test]
    fn mod2pend_fine_and_coarse_blocks() {
        let (sys, analysis) = analyzed(MOD2PEND);
        let fine = fine_btf(&jacobian_pattern(&analysis)).unwrap();
        assert_eq!(fine.sizes, vec![1, 1, 1, 3]);
        let coarse = coarse_btf(&occurrence_pattern(&analysis.sigma)).unwrap();
        assert_eq!(coarse.sizes, vec![3, 3]);
        // The 3x3 fine block holds f1, f2, f3 over x, y, lambda.
        let range = fine.block_range(3);
        let eqs: BTreeSet<&str> = range
            .clone()
            .map(|pos| sys.equations[fine.rows[pos]].name.as_str())
            .collect();
        let vars: BTreeSet<&str> = range
            .map(|pos| sys.variables[fine.cols[pos]].name.as_str())
            .collect();
        assert_eq!(eqs, ["f1", "f2", "f3"].into_iter().collect());
        assert_eq!(vars, ["x", "y", "lambda"].into_iter().collect());
    }

    #[test]
    fn mod2pend_local_offsets() {
        let (sys, analysis) = analyzed(MOD2PEND);
        let fine = fine_btf(&jacobian_pattern(&analysis)).unwrap();
        let local = local_offsets(&analysis, &fine);
        // Block 4 = {f1,f2,f3} x {x,y,lambda} with c = (4,4,6), d in the
        // matched column order.
        let (c4, d4) = &local[3];
        let mut c_sorted = c4.clone();
        c_sorted.sort_unstable();
        assert_eq!(c_sorted, vec![4, 4, 6]);
        let mut d_sorted = d4.clone();
        d_sorted.sort_unstable();
        assert_eq!(d_sorted, vec![4, 6, 6]);
        // Per-variable values pin the margins exactly.
        for (bj, pos) in fine.block_range(3).enumerate() {
            let name = sys.variables[fine.cols[pos]].name.as_str();
            let expected = match name {
                "x" | "y" => 6,
                "lambda" => 4,
                other => panic!("unexpected variable {other}"),
            };
            assert_eq!(d4[bj], expected);
        }
    }

    #[test]
    fn robot_arm_singular_block_membership() {
        let (sys, analysis) = analyzed(ROBOTARM);
        let fine = fine_btf(&jacobian_pattern(&analysis)).unwrap();
        assert_eq!(fine.sizes, vec![1, 2, 2]);
        let eqs: BTreeSet<&str> = fine
            .block_range(1)
            .map(|pos| sys.equations[fine.rows[pos]].name.as_str())
            .collect();
        let vars: BTreeSet<&str> = fine
            .block_range(1)
            .map(|pos| sys.variables[fine.cols[pos]].name.as_str())
            .collect();
        assert_eq!(eqs, ["A", "C"].into_iter().collect());
        assert_eq!(vars, ["x4", "x5"].into_iter().collect());
        // Local offsets of the middle block are all zero.
        let local = local_offsets(&analysis, &fine);
        assert_eq!(local[1], (vec![0, 0], vec![0, 0]));
    }

    #[test]
    fn ring_modulator_has_twelve_fine_blocks() {
        let (sys, analysis) = analyzed(RINGMOD);
        let fine = fine_btf(&jacobian_pattern(&analysis)).unwrap();
        assert_eq!(fine.p(), 12);
        let mut sizes = fine.sizes.clone();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 4]);
        let q = fine.sizes.iter().position(|&s| s == 4).unwrap();
        let eqs: BTreeSet<&str> = fine
            .block_range(q)
            .map(|pos| sys.equations[fine.rows[pos]].name.as_str())
            .collect();
        let vars: BTreeSet<&str> = fine
            .block_range(q)
            .map(|pos| sys.variables[fine.cols[pos]].name.as_str())
            .collect();
        assert_eq!(eqs, ["f3", "f4", "f5", "f6"].into_iter().collect());
        assert_eq!(vars, ["x3", "x4", "x5", "x6"].into_iter().collect());
    }

    #[test]
    fn intro_essential_pattern_by_enumeration() {
        let (_, analysis) = analyzed(INTRO);
        let ess = essential_pattern(&analysis).unwrap();
        let expected: BTreeSet<(usize, usize)> = [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)]
            .into_iter()
            .collect();
        assert_eq!(ess.positions, expected);
        // S_ess ⊆ S0 ⊆ S.
        let s0 = jacobian_pattern(&analysis);
        let s = occurrence_pattern(&analysis.sigma);
        assert!(ess.positions.is_subset(&s0.positions));
        assert!(s0.positions.is_subset(&s.positions));
    }

    #[test]
    fn unique_hvt_is_its_own_essential_pattern() {
        let (_, analysis) = analyzed("var x1, x2;\neq f1: x1' + x2 = 0;\neq f2: x2' = 0;\n");
        let ess = essential_pattern(&analysis).unwrap();
        let expected: BTreeSet<(usize, usize)> = [(0, 0), (1, 1)].into_iter().collect();
        assert_eq!(ess.positions, expected);
    }

    #[test]
    fn essential_pattern_of_trivial_sigma() {
        let sigma = SignatureMatrix {
            n: 1,
            entries: vec![vec![SigmaEntry::finite(0)]],
        };
        let analysis = crate::structure::analyze_sigma(&sigma).unwrap();
        let ess = essential_pattern(&analysis).unwrap();
        assert_eq!(ess.positions.len(), 1);
        assert!(ess.contains(0, 0));
    }

    #[test]
    fn essential_guard_rejects_large_systems() {
        let n = 13;
        let sigma = SignatureMatrix {
            n,
            entries: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i == j {
                                SigmaEntry::finite(0)
                            } else {
                                SigmaEntry::NEG_INF
                            }
                        })
                        .collect()
                })
                .collect(),
        };
        let analysis = crate::structure::analyze_sigma(&sigma).unwrap();
        assert!(matches!(
            essential_pattern(&analysis),
            Err(BtfError::EssentialSizeGuard(13, _))
        ));
    }
}

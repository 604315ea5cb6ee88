//! Linear assignment on the signature matrix: find a transversal of
//! maximal value with −∞ entries forbidden.
//!
//! Jonker–Volgenant-style shortest augmenting paths with dual potentials,
//! O(n^3) on dense costs. Forbidden entries carry a large finite cost; if
//! the optimal assignment still uses one, no finite transversal exists.

use crate::symbolic::SigmaEntry;

const FORBIDDEN: i64 = i64::MAX / 8;

/// Returns `(col_of_row, value)` of a highest-value transversal, or `None`
/// when the pattern is structurally singular.
pub fn max_assignment(entries: &[Vec<SigmaEntry>]) -> Option<(Vec<usize>, i64)> {
    let n = entries.len();
    if n == 0 {
        return Some((vec![], 0));
    }
    // Minimize cost = -sigma.
    let cost =
        |i: usize, j: usize| -> i64 { entries[i][j].order().map_or(FORBIDDEN, |s| -(s as i64)) };

    // 1-based arrays per the classic potentials formulation.
    let inf = i64::MAX / 2;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut row_of_col = vec![0usize; n + 1]; // 0 = unassigned
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![usize::MAX; n];
    for j in 1..=n {
        col_of_row[row_of_col[j] - 1] = j - 1;
    }
    let mut value = 0i64;
    for (i, &j) in col_of_row.iter().enumerate() {
        match entries[i][j].order() {
            Some(s) => value += s as i64,
            None => return None,
        }
    }
    Some((col_of_row, value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(rows: &[&[i64]]) -> Vec<Vec<SigmaEntry>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|&v| {
                        if v < 0 {
                            SigmaEntry::NEG_INF
                        } else {
                            SigmaEntry::finite(v as i32)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn picks_maximal_transversal() {
        let s = sig(&[&[0, 0, -1], &[1, 1, 1], &[-1, -1, 1]]);
        let (_, val) = max_assignment(&s).unwrap();
        assert_eq!(val, 2);
    }

    #[test]
    fn detects_structural_singularity() {
        let s = sig(&[&[0, -1], &[0, -1]]);
        assert!(max_assignment(&s).is_none());
    }

    #[test]
    fn agrees_with_brute_force_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..150 {
            let n = rng.gen_range(1..=5);
            let entries: Vec<Vec<SigmaEntry>> = (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            let v: i64 = rng.gen_range(-2..=3);
                            if v < 0 {
                                SigmaEntry::NEG_INF
                            } else {
                                SigmaEntry::finite(v as i32)
                            }
                        })
                        .collect()
                })
                .collect();
            let brute = brute_force_value(&entries);
            let got = max_assignment(&entries).map(|(_, v)| v);
            assert_eq!(got, brute, "entries {entries:?}");
        }
    }

    fn brute_force_value(entries: &[Vec<SigmaEntry>]) -> Option<i64> {
        let n = entries.len();
        let mut cols: Vec<usize> = (0..n).collect();
        let mut best: Option<i64> = None;
        permute(&mut cols, 0, &mut |perm| {
            let mut total = 0i64;
            for (i, &j) in perm.iter().enumerate() {
                match entries[i][j].order() {
                    Some(s) => total += s as i64,
                    None => return,
                }
            }
            best = Some(best.map_or(total, |b: i64| b.max(total)));
        });
        best
    }

    fn permute(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            f(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, f);
            items.swap(k, i);
        }
    }
}

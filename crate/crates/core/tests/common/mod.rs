#![allow(dead_code)]

use std::path::PathBuf;

use dichotomy::intlinalg::certify_expanding;
use dichotomy::report::SystemFile;
use dichotomy::system::AffineSystem;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> AffineSystem {
    let text = std::fs::read_to_string(fixture_path(&format!("{name}.json"))).unwrap();
    let file: SystemFile = serde_json::from_str(&text).unwrap();
    file.into_system().unwrap()
}

pub fn system(rows: &[Vec<i64>], digits: &[Vec<i64>]) -> AffineSystem {
    AffineSystem::from_integer_digits(certify_expanding(rows, 64).unwrap(), digits).unwrap()
}

/// Small integer matrices used by randomized checks: (rows, |det|).
pub fn test_matrices() -> Vec<Vec<Vec<i64>>> {
    vec![
        vec![vec![3]],
        vec![vec![-3]],
        vec![vec![5]],
        vec![vec![1, -2], vec![2, 1]],
        vec![vec![0, 1], vec![3, 0]],
        vec![vec![1, 1], vec![-1, 2]],
        vec![vec![2, 1], vec![-1, 2]],
    ]
}

pub fn mat_vec(a: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

/// Determinant by cofactor expansion (small matrices only).
pub fn det(a: &[Vec<i64>]) -> i64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i64>> = a[1..].iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * a[0][j] * det(&minor)
        })
        .sum()
}

/// Adjugate by cofactors, so that `adj·A = det·I`.
pub fn adjugate(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    if n == 1 {
        return vec![vec![1]];
    }
    let mut out = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i64>> = a
                .iter()
                .enumerate()
                .filter(|&(r, _)| r != i)
                .map(|(_, row)| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                .collect();
            let s = if (i + j) % 2 == 0 { 1 } else { -1 };
            out[j][i] = s * det(&minor);
        }
    }
    out
}

/// Whether `x ∈ Aℤᵈ`, via `A⁻¹x = adj(A)x / det`.
pub fn in_image(a: &[Vec<i64>], x: &[i64]) -> bool {
    let d = det(a);
    mat_vec(&adjugate(a), x).iter().all(|c| c % d == 0)
}

/// Depth of the first repeated digit sum up to `n_max`, by plain set
/// enumeration of `D_n = digits + A·D_{n−1}`.
pub fn first_collision_depth(a: &[Vec<i64>], digits: &[Vec<i64>], n_max: usize) -> Option<usize> {
    let mut level: Vec<Vec<i64>> = vec![vec![0; a.len()]];
    for n in 1..=n_max {
        let mut next = std::collections::HashSet::new();
        let mut total = 0usize;
        for d in &level {
            let ad = mat_vec(a, d);
            for u in digits {
                next.insert(ad.iter().zip(u).map(|(x, y)| x + y).collect::<Vec<i64>>());
                total += 1;
            }
        }
        if next.len() < total {
            return Some(n);
        }
        level = next.into_iter().collect();
    }
    None
}

/// Plain count of distinct depth-`n` digit sums.
pub fn digit_sum_count(a: &[Vec<i64>], digits: &[Vec<i64>], n: usize) -> usize {
    let mut level: std::collections::HashSet<Vec<i64>> = [vec![0; a.len()]].into_iter().collect();
    for _ in 0..n {
        let mut next = std::collections::HashSet::new();
        for d in &level {
            let ad = mat_vec(a, d);
            for u in digits {
                next.insert(ad.iter().zip(u).map(|(x, y)| x + y).collect::<Vec<i64>>());
            }
        }
        level = next;
    }
    level.len()
}

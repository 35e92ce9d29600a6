#![allow(dead_code)]

use flatfield::{PointCloud, SoftNeighborhood};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rows(rng: &mut impl Rng, n: usize, dim: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-scale..scale)).collect())
        .collect()
}

pub fn random_cloud(rng: &mut impl Rng, n: usize, dim: usize) -> PointCloud {
    PointCloud::new(random_rows(rng, n, dim, 1.0)).unwrap()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for c in 0..a.len() {
        s += (a[c] - b[c]) * (a[c] - b[c]);
    }
    s.sqrt()
}

/// Deforming field written straight from its definition: a double loop over
/// point pairs with a linear search of the owner's neighbour list.
pub fn naive_field(
    rows: &[Vec<f64>],
    neighborhoods: &[SoftNeighborhood],
    alpha1: f64,
    alpha2: f64,
) -> Vec<Vec<f64>> {
    let n = rows.len();
    let dim = rows[0].len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut repel_sum = vec![0.0; dim];
        let mut elastic_sum = vec![0.0; dim];
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = dist(&rows[i], &rows[j]);
            if d == 0.0 {
                continue;
            }
            let entry = neighborhoods[i].entries.iter().find(|e| e.index == j);
            for c in 0..dim {
                let diff = rows[i][c] - rows[j][c];
                match entry {
                    Some(e) => {
                        repel_sum[c] += (1.0 - e.degree) * diff / d;
                        elastic_sum[c] += e.degree * (e.d0 - d) * diff / d;
                    }
                    None => repel_sum[c] += diff / d,
                }
            }
        }
        out.push((0..dim).map(|c| alpha1 * repel_sum[c] + alpha2 * elastic_sum[c]).collect());
    }
    out
}

/// `|a - b| <= tol * max(|a|, |b|)` for every component.
pub fn assert_rel_close(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (i, (u, v)) in a.iter().zip(b).enumerate() {
        assert_eq!(u.len(), v.len());
        for (c, (x, y)) in u.iter().zip(v).enumerate() {
            let scale = x.abs().max(y.abs());
            assert!(
                (x - y).abs() <= tol * scale,
                "point {i} component {c}: {x} vs {y}"
            );
        }
    }
}

/// Pairwise distances of a coordinate list.
pub fn distances(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|a| rows.iter().map(|b| dist(a, b)).collect())
        .collect()
}

//! Directed soft neighbourhoods.
//!
//! Each point keeps its `k` nearest points in the original cloud, and each of
//! those gets a neighbour degree `d_min / d0_ij` in `(0, 1]`. A point that is
//! close in the ambient space but far along the manifold (a short-circuit
//! edge) sits well beyond `d_min` and therefore ends up with a small degree.
//!
//! Neighbourhoods are not symmetric: `j` in the set of `i` says nothing about
//! `i` in the set of `j`.

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::DistanceMatrix;

/// Neighbourhood size used when none is configured: `min(10, N - 1)`.
pub fn default_k(n_points: usize) -> usize {
    10.min(n_points.saturating_sub(1))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeighborEntry {
    pub index: usize,
    /// Distance in the original cloud; frozen for the whole run.
    pub d0: f64,
    pub degree: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoftNeighborhood {
    pub owner: usize,
    /// Sorted by original distance, ties by index.
    pub entries: Vec<NeighborEntry>,
}

impl SoftNeighborhood {
    pub fn get(&self, j: usize) -> Option<&NeighborEntry> {
        self.entries.iter().find(|e| e.index == j)
    }
}

/// Indices of the `k` nearest other points of every point, nearest first.
/// Equal distances are broken by the lower index.
pub fn knn_sets(d0: &DistanceMatrix, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = d0.len();
    check_k(n, k)?;
    Ok(exec::map_indices(n, |i| nearest(d0.row(i), i, k)))
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 1 || k >= n {
        return Err(Error::config(format!(
            "neighbourhood size k = {k} must satisfy 1 <= k <= N - 1 = {}",
            n as i64 - 1
        )));
    }
    Ok(())
}

fn nearest(row: &[f64], owner: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).filter(|&j| j != owner).collect();
    // stable sort keeps ascending index order among equal distances
    idx.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
    idx.truncate(k);
    idx
}

/// Neighbour degrees `d_min / d` for one neighbourhood's distances.
///
/// Coincident neighbours (distance 0) get degree 1 and `d_min` falls back to
/// the smallest positive distance. If every distance is 0 all degrees are 1.
pub fn neighbor_degrees(distances: &[f64]) -> Result<Vec<f64>> {
    if distances.is_empty() {
        return Err(Error::config("neighbour distance list is empty"));
    }
    if let Some(bad) = distances.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(Error::config(format!("invalid neighbour distance {bad}")));
    }
    let zeros = distances.iter().filter(|&&d| d == 0.0).count();
    if zeros > 0 {
        log::warn!("{zeros} coincident neighbour(s); assigning them degree 1");
    }
    let d_min = distances
        .iter()
        .copied()
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    Ok(distances
        .iter()
        .map(|&d| if d == 0.0 { 1.0 } else { d_min / d })
        .collect())
}

/// Soft neighbourhood of every point, computed from the original distances.
pub fn build_soft_neighborhoods(d0: &DistanceMatrix, k: usize) -> Result<Vec<SoftNeighborhood>> {
    let sets = knn_sets(d0, k)?;
    sets.into_iter()
        .enumerate()
        .map(|(owner, set)| {
            let dists: Vec<f64> = set.iter().map(|&j| d0.get(owner, j)).collect();
            let degrees = neighbor_degrees(&dists)?;
            let entries = set
                .into_iter()
                .zip(dists)
                .zip(degrees)
                .map(|((index, d0), degree)| NeighborEntry { index, d0, degree })
                .collect();
            Ok(SoftNeighborhood { owner, entries })
        })
        .collect()
}

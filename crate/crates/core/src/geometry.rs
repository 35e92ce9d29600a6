//! Point clouds and dense Euclidean distance matrices.

use crate::error::{Error, Result};
use crate::exec;

/// `N` points in `R^n`, stored row-major.
///
/// Point order is fixed at construction: index `i` names the same sample for
/// the lifetime of the cloud.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from one coordinate vector per point.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::config("point cloud must contain at least one point"))?;
        let mut coords = Vec::with_capacity(dim * points.len());
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::config(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    /// Builds a cloud from a row-major coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("ambient dimension must be at least 1"));
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::config(format!(
                "coordinate buffer of length {} does not hold a whole number of {dim}-d points",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::config(format!(
                "point {} has a non-finite coordinate",
                pos / dim
            )));
        }
        Ok(Self { dim, coords })
    }

    /// Number of points `N`.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false: a valid cloud holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// Mutable access for the deformation loop, which keeps `dim` fixed.
    pub(crate) fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.point(i), self.point(j))
    }

    /// Index pairs `(i, j)`, `i < j`, whose points coincide exactly.
    pub fn coincident_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.point(i) == self.point(j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Dense symmetric `N x N` matrix of Euclidean distances.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks_exact(self.n).map(<[f64]>::to_vec).collect()
    }
}

/// Full Euclidean distance matrix of `cloud`.
///
/// Duplicate points are allowed; they are reported at `warn` level since
/// neighbour degrees and the deforming field treat them specially.
pub fn pairwise_distances(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.len();
    let rows = exec::map_indices(n, |i| {
        let pi = cloud.point(i);
        (0..n).map(|j| euclidean(pi, cloud.point(j))).collect::<Vec<_>>()
    });
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    let dupes = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| data[i * n + j] == 0.0)
        .count();
    if dupes > 0 {
        log::warn!("point cloud contains {dupes} coincident point pair(s)");
    }
    DistanceMatrix { n, data }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_has_zero_matrix() {
        let c = PointCloud::new(vec![vec![1.0, 2.0]]).unwrap();
        let d = pairwise_distances(&c);
        assert_eq!(d.to_rows(), vec![vec![0.0]]);
    }

    #[test]
    fn three_four_five() {
        let c = PointCloud::new(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let d = pairwise_distances(&c);
        assert_eq!(d.get(0, 1), 5.0);
        assert_eq!(d.get(1, 0), 5.0);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn rejects_ragged_and_empty() {
        assert!(PointCloud::new(vec![]).is_err());
        assert!(PointCloud::new(vec![vec![]]).is_err());
        assert!(PointCloud::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(PointCloud::new(vec![vec![f64::NAN]]).is_err());
        assert!(PointCloud::from_flat(2, vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn duplicates_are_permitted() {
        let c = PointCloud::new(vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(c.coincident_pairs(), vec![(0, 1)]);
        assert_eq!(pairwise_distances(&c).get(0, 1), 0.0);
    }
}

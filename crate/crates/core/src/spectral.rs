//! PCA readout of a (flattened) cloud.

use nalgebra::DMatrix;

use crate::deform::DeformTrace;
use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Default ratio a component needs to count toward the intrinsic dimension.
pub const DEFAULT_RATIO_THRESHOLD: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct PcaResult {
    pub mean: Vec<f64>,
    /// Orthonormal principal directions, largest variance first.
    pub components: Vec<Vec<f64>>,
    /// Population variance (divisor `N`) along each component.
    pub variances: Vec<f64>,
    /// Variances normalised to sum to one; all zero for a degenerate cloud.
    pub ratios: Vec<f64>,
}

/// Principal components of `cloud`.
///
/// Each component vector is oriented so that its largest-magnitude entry
/// (the first one, on ties) is positive. A cloud with more dimensions than
/// points yields `N` components.
pub fn pca(cloud: &PointCloud) -> Result<PcaResult> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::config("PCA needs at least two points"));
    }
    let dim = cloud.dim();
    let mut mean = vec![0.0; dim];
    for p in cloud.points() {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let centered = DMatrix::from_fn(n, dim, |r, c| cloud.point(r)[c] - mean[c]);
    let svd = centered.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut components = Vec::with_capacity(order.len());
    let mut variances = Vec::with_capacity(order.len());
    for &k in &order {
        let s = svd.singular_values[k];
        variances.push(s * s / n as f64);
        let mut v: Vec<f64> = v_t.row(k).iter().copied().collect();
        orient(&mut v);
        components.push(v);
    }

    let total: f64 = variances.iter().sum();
    let ratios = if total > 0.0 {
        variances.iter().map(|v| v / total).collect()
    } else {
        log::warn!("all points coincide; PCA ratios set to zero");
        vec![0.0; variances.len()]
    };
    Ok(PcaResult {
        mean,
        components,
        variances,
        ratios,
    })
}

fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Number of components whose ratio reaches `ratio_threshold`, at least 1.
pub fn estimate_dimension(result: &PcaResult, ratio_threshold: f64) -> Result<usize> {
    if !(ratio_threshold > 0.0 && ratio_threshold < 1.0) {
        return Err(Error::config(format!(
            "ratio threshold {ratio_threshold} must lie in (0, 1)"
        )));
    }
    let count = result.ratios.iter().filter(|&&r| r >= ratio_threshold).count();
    Ok(count.max(1))
}

/// Coordinates of the centred points on the first `dim` components.
pub fn project(cloud: &PointCloud, result: &PcaResult, dim: usize) -> Result<Vec<Vec<f64>>> {
    if dim < 1 || dim > result.components.len() {
        return Err(Error::config(format!(
            "projection dimension {dim} must lie in 1..={}",
            result.components.len()
        )));
    }
    if cloud.dim() != result.mean.len() {
        return Err(Error::config(format!(
            "cloud dimension {} does not match PCA dimension {}",
            cloud.dim(),
            result.mean.len()
        )));
    }
    Ok(cloud
        .points()
        .map(|p| {
            result.components[..dim]
                .iter()
                .map(|v| {
                    p.iter()
                        .zip(&result.mean)
                        .zip(v)
                        .map(|((x, m), c)| (x - m) * c)
                        .sum()
                })
                .collect()
        })
        .collect())
}

/// First `top_m` PCA ratios of every traced step, zero-padded.
/// Records without PCA ratios are skipped.
pub fn component_ratio_trace(trace: &DeformTrace, top_m: usize) -> Vec<(usize, Vec<f64>)> {
    trace
        .records()
        .iter()
        .filter_map(|r| {
            r.ratios.as_ref().map(|ratios| {
                let row = (0..top_m)
                    .map(|i| ratios.get(i).copied().unwrap_or(0.0))
                    .collect();
                (r.step, row)
            })
        })
        .collect()
}

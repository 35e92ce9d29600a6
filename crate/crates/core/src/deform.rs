//! The deforming vector field and the synchronous deformation loop.
//!
//! Every point feels two kinds of interaction from every other point:
//!
//! * a repelling vector along `p_i - p_j`, unit length for non-neighbours and
//!   scaled by `1 - ND_ij` for soft neighbours, and
//! * an elastic vector, only for soft neighbours, proportional to
//!   `ND_ij * (d0_ij - d_ij)`, that pulls a stretched pair together and pushes
//!   a compressed pair apart.
//!
//! The displacement of `p_i` in one step is `alpha1 * sum(repel) +
//! alpha2 * sum(elastic)`, evaluated from a snapshot of the current positions
//! and applied to all points at once. `alpha1` follows a cosine schedule of
//! period `T`.
//!
//! All vectors are built from differences of point pairs, so a cloud lying in
//! an affine subspace stays in it exactly.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{euclidean, pairwise_distances, PointCloud};
use crate::neighborhood::{build_soft_neighborhoods, default_k, SoftNeighborhood};
use crate::spectral;

#[derive(Clone, Debug, PartialEq)]
pub struct DeformConfig {
    /// Soft neighbourhood size; `None` resolves to `min(10, N - 1)`.
    pub k: Option<usize>,
    pub alpha1_amplitude: f64,
    /// Period `T` of the `alpha1` oscillation, in steps.
    pub period: usize,
    pub alpha2: f64,
    /// Clip the negative half of the `alpha1` cosine to zero.
    pub clamp_alpha1_nonnegative: bool,
    /// Stop once the summed displacement norm falls below this; `None`
    /// resolves to `1e-6 * N`.
    pub epsilon: Option<f64>,
    pub max_steps: usize,
    /// Record PCA ratios every this many steps (and at the last step); 0 = off.
    pub trace_pca_every: usize,
}

impl Default for DeformConfig {
    fn default() -> Self {
        Self {
            k: None,
            alpha1_amplitude: 1e-4,
            period: 60,
            alpha2: 0.1,
            clamp_alpha1_nonnegative: true,
            epsilon: None,
            max_steps: 600,
            trace_pca_every: 0,
        }
    }
}

impl DeformConfig {
    pub fn validate(&self) -> Result<()> {
        if self.period < 1 {
            return Err(Error::config("period T must be at least 1"));
        }
        if self.max_steps < 1 {
            return Err(Error::config("max_steps must be at least 1"));
        }
        if !self.alpha1_amplitude.is_finite() {
            return Err(Error::config("alpha1 amplitude must be finite"));
        }
        if !(self.alpha2.is_finite() && self.alpha2 >= 0.0) {
            return Err(Error::config("alpha2 must be finite and >= 0"));
        }
        if let Some(eps) = self.epsilon {
            if !(eps.is_finite() && eps >= 0.0) {
                return Err(Error::config("epsilon must be finite and >= 0"));
            }
        }
        if self.k == Some(0) {
            return Err(Error::config("k must be at least 1"));
        }
        Ok(())
    }

    pub fn resolved_k(&self, n_points: usize) -> usize {
        self.k.unwrap_or_else(|| default_k(n_points))
    }

    pub fn resolved_epsilon(&self, n_points: usize) -> f64 {
        self.epsilon.unwrap_or(1e-6 * n_points as f64)
    }
}

/// `(alpha1, alpha2)` for step count `step`.
pub fn schedule_alphas(step: usize, config: &DeformConfig) -> (f64, f64) {
    let t = config.period.max(1);
    let phase = (step % t) as f64 / t as f64;
    let mut alpha1 = config.alpha1_amplitude * (TAU * phase).cos();
    if config.clamp_alpha1_nonnegative {
        alpha1 = alpha1.max(0.0);
    }
    (alpha1, config.alpha2)
}

/// Repelling vector acting on `pi` from `pj` at current distance `d`.
/// `degree` is `Some(ND_ij)` when `pj` is a soft neighbour of `pi`.
/// Coincident points (`d == 0`) contribute nothing.
pub fn repel_vector(pi: &[f64], pj: &[f64], d: f64, degree: Option<f64>) -> Vec<f64> {
    let mut out = vec![0.0; pi.len()];
    add_repel(&mut out, pi, pj, d, degree);
    out
}

/// Elastic vector acting on `pi` from its soft neighbour `pj`; zero when
/// `degree` is `None`.
pub fn elastic_vector(pi: &[f64], pj: &[f64], d: f64, d0: f64, degree: Option<f64>) -> Vec<f64> {
    let mut out = vec![0.0; pi.len()];
    if let Some(nd) = degree {
        add_elastic(&mut out, pi, pj, d, d0, nd);
    }
    out
}

#[inline]
fn add_repel(acc: &mut [f64], pi: &[f64], pj: &[f64], d: f64, degree: Option<f64>) {
    if d == 0.0 {
        return;
    }
    let w = match degree {
        Some(nd) => 1.0 - nd,
        None => 1.0,
    };
    for ((a, x), y) in acc.iter_mut().zip(pi).zip(pj) {
        *a += w * (x - y) / d;
    }
}

#[inline]
fn add_elastic(acc: &mut [f64], pi: &[f64], pj: &[f64], d: f64, d0: f64, nd: f64) {
    if d == 0.0 {
        return;
    }
    let w = nd * (d0 - d);
    for ((a, x), y) in acc.iter_mut().zip(pi).zip(pj) {
        *a += w * (x - y) / d;
    }
}

/// Dense `N x N` lookup from `(i, j)` to the soft-neighbour entry of `j` in
/// the set of `i`.
#[derive(Clone, Debug)]
struct NeighborTable {
    n: usize,
    // (degree, d0); NaN degree marks "not a neighbour"
    slots: Vec<(f64, f64)>,
}

impl NeighborTable {
    fn new(n: usize, neighborhoods: &[SoftNeighborhood]) -> Result<Self> {
        if neighborhoods.len() != n {
            return Err(Error::config(format!(
                "{} neighbourhoods supplied for {n} points",
                neighborhoods.len()
            )));
        }
        let mut slots = vec![(f64::NAN, 0.0); n * n];
        for sn in neighborhoods {
            for e in &sn.entries {
                if e.index >= n || e.index == sn.owner {
                    return Err(Error::config(format!(
                        "neighbourhood of point {} has invalid entry {}",
                        sn.owner, e.index
                    )));
                }
                slots[sn.owner * n + e.index] = (e.degree, e.d0);
            }
        }
        Ok(Self { n, slots })
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> Option<(f64, f64)> {
        let s = self.slots[i * self.n + j];
        (!s.0.is_nan()).then_some(s)
    }
}

/// Per-point displacement at one instant, computed from `cloud` as a frozen
/// snapshot. Sums run over `j` in ascending order.
fn field(cloud: &PointCloud, table: &NeighborTable, alpha1: f64, alpha2: f64) -> Vec<Vec<f64>> {
    let n = cloud.len();
    let dim = cloud.dim();
    exec::map_indices(n, |i| {
        let pi = cloud.point(i);
        let mut repel = vec![0.0; dim];
        let mut elastic = vec![0.0; dim];
        for j in 0..n {
            if j == i {
                continue;
            }
            let pj = cloud.point(j);
            let d = euclidean(pi, pj);
            match table.get(i, j) {
                Some((nd, d0)) => {
                    add_repel(&mut repel, pi, pj, d, Some(nd));
                    add_elastic(&mut elastic, pi, pj, d, d0, nd);
                }
                None => add_repel(&mut repel, pi, pj, d, None),
            }
        }
        repel
            .iter()
            .zip(&elastic)
            .map(|(r, e)| alpha1 * r + alpha2 * e)
            .collect()
    })
}

/// Deforming vector of every point of `cloud` for the given weights.
pub fn total_field(
    cloud: &PointCloud,
    neighborhoods: &[SoftNeighborhood],
    alpha1: f64,
    alpha2: f64,
) -> Result<Vec<Vec<f64>>> {
    let table = NeighborTable::new(cloud.len(), neighborhoods)?;
    Ok(field(cloud, &table, alpha1, alpha2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeformState {
    pub cloud: PointCloud,
    /// Number of steps applied so far (`C`).
    pub step_count: usize,
    pub last_total_displacement: f64,
}

impl DeformState {
    pub fn new(cloud: PointCloud) -> Self {
        Self {
            cloud,
            step_count: 0,
            last_total_displacement: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// Step count `C` the weights were scheduled for (0-based).
    pub step: usize,
    pub alpha1: f64,
    /// Sum over points of the Euclidean norm of their displacement.
    pub total_displacement: f64,
    /// PCA variance ratios of the cloud after this step, when traced.
    pub ratios: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DeformTrace {
    records: Vec<StepRecord>,
}

impl DeformTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; steps must be strictly increasing.
    pub fn push(&mut self, record: StepRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.step <= last.step {
                return Err(Error::config(format!(
                    "trace record for step {} follows step {}",
                    record.step, last.step
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Epsilon,
    MaxSteps,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Epsilon => "epsilon",
            StopReason::MaxSteps => "max_steps",
        }
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct DeformOutcome {
    pub cloud: PointCloud,
    pub trace: DeformTrace,
    pub stop_reason: StopReason,
    pub steps: usize,
    pub neighborhoods: Vec<SoftNeighborhood>,
}

/// Soft neighbourhoods and configuration for one deformation run.
#[derive(Clone, Debug)]
pub struct Deformer {
    config: DeformConfig,
    neighborhoods: Vec<SoftNeighborhood>,
    table: NeighborTable,
    epsilon: f64,
}

impl Deformer {
    /// Builds the frozen soft neighbourhoods of `original`.
    pub fn new(original: &PointCloud, config: DeformConfig) -> Result<Self> {
        config.validate()?;
        let n = original.len();
        let neighborhoods = if n < 2 {
            vec![SoftNeighborhood { owner: 0, entries: Vec::new() }]
        } else {
            let d0 = pairwise_distances(original);
            build_soft_neighborhoods(&d0, config.resolved_k(n))?
        };
        Self::with_neighborhoods(neighborhoods, config)
    }

    pub fn with_neighborhoods(
        neighborhoods: Vec<SoftNeighborhood>,
        config: DeformConfig,
    ) -> Result<Self> {
        config.validate()?;
        let n = neighborhoods.len();
        let table = NeighborTable::new(n, &neighborhoods)?;
        let epsilon = config.resolved_epsilon(n);
        Ok(Self {
            config,
            neighborhoods,
            table,
            epsilon,
        })
    }

    pub fn config(&self) -> &DeformConfig {
        &self.config
    }

    pub fn neighborhoods(&self) -> &[SoftNeighborhood] {
        &self.neighborhoods
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Applies one synchronous step to `state`. On divergence `state` is
    /// left untouched.
    pub fn step(&self, state: &mut DeformState) -> Result<StepRecord> {
        let n = state.cloud.len();
        if n != self.table.n {
            return Err(Error::config(format!(
                "state has {n} points but neighbourhoods cover {}",
                self.table.n
            )));
        }
        let c = state.step_count;
        let (alpha1, alpha2) = schedule_alphas(c, &self.config);
        let field = field(&state.cloud, &self.table, alpha1, alpha2);

        let dim = state.cloud.dim();
        let mut next = state.cloud.as_flat().to_vec();
        let mut total = 0.0;
        for (i, v) in field.iter().enumerate() {
            let p = &mut next[i * dim..(i + 1) * dim];
            for (x, dx) in p.iter_mut().zip(v) {
                *x += dx;
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Divergence { step: c, point: i });
            }
            total += v.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        if !total.is_finite() {
            return Err(Error::Divergence { step: c, point: 0 });
        }

        state.cloud.flat_mut().copy_from_slice(&next);
        state.step_count += 1;
        state.last_total_displacement = total;

        let every = self.config.trace_pca_every;
        let ratios = (every > 0 && c % every == 0).then(|| trace_ratios(&state.cloud));
        Ok(StepRecord {
            step: c,
            alpha1,
            total_displacement: total,
            ratios,
        })
    }

    /// Steps until the summed displacement drops below epsilon or
    /// `max_steps` steps have been applied.
    pub fn run(&self, cloud: PointCloud) -> Result<DeformOutcome> {
        let mut state = DeformState::new(cloud);
        let mut trace = DeformTrace::new();
        if state.cloud.len() < 2 {
            return Ok(self.finish(state, trace, StopReason::Epsilon));
        }
        let reason = loop {
            let record = self.step(&mut state)?;
            trace.push(record)?;
            if state.last_total_displacement < self.epsilon {
                break StopReason::Epsilon;
            }
            if state.step_count >= self.config.max_steps {
                break StopReason::MaxSteps;
            }
        };
        if self.config.trace_pca_every > 0 {
            if let Some(last) = trace.records.last_mut() {
                if last.ratios.is_none() {
                    last.ratios = Some(trace_ratios(&state.cloud));
                }
            }
        }
        log::debug!(
            "deformation stopped after {} steps ({reason}), last displacement {}",
            state.step_count,
            state.last_total_displacement
        );
        Ok(self.finish(state, trace, reason))
    }

    fn finish(&self, state: DeformState, trace: DeformTrace, stop_reason: StopReason) -> DeformOutcome {
        DeformOutcome {
            cloud: state.cloud,
            trace,
            stop_reason,
            steps: state.step_count,
            neighborhoods: self.neighborhoods.clone(),
        }
    }
}

fn trace_ratios(cloud: &PointCloud) -> Vec<f64> {
    match spectral::pca(cloud) {
        Ok(p) => p.ratios,
        Err(_) => vec![0.0; cloud.dim()],
    }
}

/// One synchronous step of `state` under `neighborhoods`.
pub fn deform_step(
    state: &mut DeformState,
    neighborhoods: &[SoftNeighborhood],
    config: &DeformConfig,
) -> Result<StepRecord> {
    Deformer::with_neighborhoods(neighborhoods.to_vec(), config.clone())?.step(state)
}

/// Builds soft neighbourhoods from `cloud` and deforms it until termination.
pub fn run_deformation(cloud: PointCloud, config: &DeformConfig) -> Result<DeformOutcome> {
    Deformer::new(&cloud, config.clone())?.run(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unclamped() -> DeformConfig {
        DeformConfig {
            clamp_alpha1_nonnegative: false,
            ..DeformConfig::default()
        }
    }

    #[test]
    fn schedule_values() {
        let cfg = unclamped();
        assert_eq!(schedule_alphas(0, &cfg), (1e-4, 0.1));
        let (a15, _) = schedule_alphas(15, &cfg);
        assert!(a15.abs() < 1e-19, "{a15}");
        assert_eq!(schedule_alphas(30, &cfg).0, -1e-4);
        assert_eq!(schedule_alphas(60, &cfg), schedule_alphas(0, &cfg));
        assert_eq!(schedule_alphas(90, &cfg), schedule_alphas(30, &cfg));
    }

    #[test]
    fn clamp_cuts_negative_half() {
        let cfg = DeformConfig::default();
        assert!(cfg.clamp_alpha1_nonnegative);
        assert_eq!(schedule_alphas(0, &cfg).0, 1e-4);
        assert_eq!(schedule_alphas(30, &cfg).0, 0.0);
        for c in 0..120 {
            assert!(schedule_alphas(c, &cfg).0 >= 0.0);
        }
    }

    #[test]
    fn repel_branches() {
        assert_eq!(repel_vector(&[2.0, 0.0], &[0.0, 0.0], 2.0, None), vec![1.0, 0.0]);
        assert_eq!(repel_vector(&[1.0, 0.0], &[0.0, 0.0], 1.0, Some(1.0)), vec![0.0, 0.0]);
        assert_eq!(repel_vector(&[1.0, 0.0], &[0.0, 0.0], 1.0, Some(0.5)), vec![0.5, 0.0]);
        assert_eq!(repel_vector(&[1.0, 1.0], &[1.0, 1.0], 0.0, None), vec![0.0, 0.0]);
    }

    #[test]
    fn elastic_branches() {
        assert_eq!(
            elastic_vector(&[3.0, 1.0], &[0.0, -3.0], 5.0, 5.0, Some(0.7)),
            vec![0.0, 0.0]
        );
        assert_eq!(elastic_vector(&[1.0, 0.0], &[0.0, 0.0], 1.0, 2.0, Some(1.0)), vec![1.0, 0.0]);
        // stretched pair pulls p_i back toward p_j
        assert_eq!(elastic_vector(&[4.0, 0.0], &[0.0, 0.0], 4.0, 2.0, Some(0.5)), vec![-1.0, 0.0]);
        assert_eq!(elastic_vector(&[1.0, 0.0], &[0.0, 0.0], 1.0, 9.0, None), vec![0.0, 0.0]);
        assert_eq!(elastic_vector(&[1.0, 0.0], &[1.0, 0.0], 0.0, 1.0, Some(1.0)), vec![0.0, 0.0]);
    }

    #[test]
    fn single_point_field_is_zero() {
        let c = PointCloud::new(vec![vec![1.0, 2.0, 3.0]]).unwrap();
        let sn = vec![SoftNeighborhood { owner: 0, entries: vec![] }];
        assert_eq!(total_field(&c, &sn, 1e-4, 0.1).unwrap(), vec![vec![0.0; 3]]);
    }

    fn pair() -> PointCloud {
        PointCloud::new(vec![vec![0.0, 0.0], vec![1.5, 2.0]]).unwrap()
    }

    #[test]
    fn two_point_equilibrium() {
        let c = pair();
        let deformer = Deformer::new(&c, DeformConfig { k: Some(1), ..unclamped() }).unwrap();
        let mut state = DeformState::new(c.clone());
        let rec = deformer.step(&mut state).unwrap();
        assert_eq!(rec.total_displacement, 0.0);
        assert_eq!(state.cloud, c);
        assert_eq!(state.step_count, 1);
    }

    #[test]
    fn equilibrium_run_stops_on_epsilon() {
        let out = run_deformation(pair(), &DeformConfig::default()).unwrap();
        assert_eq!(out.stop_reason, StopReason::Epsilon);
        assert_eq!(out.steps, 1);
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn single_point_run_is_immediate() {
        let c = PointCloud::new(vec![vec![0.0, 1.0]]).unwrap();
        let out = run_deformation(c.clone(), &DeformConfig::default()).unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.cloud, c);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn invalid_configs() {
        let c = pair();
        for cfg in [
            DeformConfig { max_steps: 0, ..DeformConfig::default() },
            DeformConfig { period: 0, ..DeformConfig::default() },
            DeformConfig { alpha2: -0.1, ..DeformConfig::default() },
            DeformConfig { epsilon: Some(-1.0), ..DeformConfig::default() },
            DeformConfig { k: Some(0), ..DeformConfig::default() },
            DeformConfig { k: Some(2), ..DeformConfig::default() },
        ] {
            assert!(
                matches!(run_deformation(c.clone(), &cfg), Err(Error::Config(_))),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn max_steps_caps_the_run() {
        let c = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let cfg = DeformConfig { k: Some(1), max_steps: 7, epsilon: Some(0.0), ..DeformConfig::default() };
        let out = run_deformation(c, &cfg).unwrap();
        assert_eq!(out.stop_reason, StopReason::MaxSteps);
        assert_eq!(out.steps, 7);
        let steps: Vec<usize> = out.trace.records().iter().map(|r| r.step).collect();
        assert_eq!(steps, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn divergence_is_reported_and_state_kept() {
        let c = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let cfg = DeformConfig { k: Some(1), alpha1_amplitude: f64::MAX, ..DeformConfig::default() };
        let deformer = Deformer::new(&c, cfg).unwrap();
        let mut state = DeformState::new(c.clone());
        let err = deformer.step(&mut state).unwrap_err();
        assert!(matches!(err, Error::Divergence { step: 0, .. }), "{err}");
        assert_eq!(state.cloud, c);
        assert_eq!(state.step_count, 0);
    }

    #[test]
    fn trace_rejects_out_of_order() {
        let mut t = DeformTrace::new();
        let rec = |step| StepRecord { step, alpha1: 0.0, total_displacement: 0.0, ratios: None };
        t.push(rec(3)).unwrap();
        assert!(t.push(rec(3)).is_err());
        assert!(t.push(rec(1)).is_err());
        t.push(rec(4)).unwrap();
    }

    #[test]
    fn pca_cadence() {
        let c = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 3.0], vec![2.0, 2.0]]).unwrap();
        let cfg = DeformConfig {
            k: Some(2),
            max_steps: 25,
            epsilon: Some(0.0),
            trace_pca_every: 10,
            ..DeformConfig::default()
        };
        let out = run_deformation(c, &cfg).unwrap();
        let traced: Vec<usize> = out
            .trace
            .records()
            .iter()
            .filter(|r| r.ratios.is_some())
            .map(|r| r.step)
            .collect();
        assert_eq!(traced, vec![0, 10, 20, 24]);
    }
}

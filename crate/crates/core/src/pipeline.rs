//! End-to-end reduction: soft neighbourhoods, deformation, PCA readout.
//!
//! Also owns the `key=value` settings format shared by config files and run
//! manifests. Keys use the same kebab-case names as the command-line flags.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::deform::{DeformConfig, DeformTrace, Deformer, StopReason};
use crate::error::{Error, Result};
use crate::export::{fmt_f64, write_edges, write_embedding, write_trace};
use crate::geometry::PointCloud;
use crate::neighborhood::SoftNeighborhood;
use crate::spectral::{self, PcaResult, DEFAULT_RATIO_THRESHOLD};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq)]
pub struct ReduceConfig {
    pub deform: DeformConfig,
    pub ratio_threshold: f64,
    /// Output dimension; `None` uses the estimated intrinsic dimension.
    pub dim: Option<usize>,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        Self {
            deform: DeformConfig::default(),
            ratio_threshold: DEFAULT_RATIO_THRESHOLD,
            dim: None,
        }
    }
}

impl ReduceConfig {
    pub fn validate(&self) -> Result<()> {
        self.deform.validate()?;
        if !(self.ratio_threshold > 0.0 && self.ratio_threshold < 1.0) {
            return Err(Error::config(format!(
                "ratio threshold {} must lie in (0, 1)",
                self.ratio_threshold
            )));
        }
        if self.dim == Some(0) {
            return Err(Error::config("output dimension must be at least 1"));
        }
        Ok(())
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let bad = |what: &str| Error::config(format!("{key}: {value:?} is not {what}"));
        let int = || value.parse::<usize>().map_err(|_| bad("a non-negative integer"));
        let float = || value.parse::<f64>().map_err(|_| bad("a number"));
        let optional = |v: &str| v.is_empty() || v == "auto";
        let d = &mut self.deform;
        match key.as_str() {
            "k" => d.k = if optional(value) { None } else { Some(int()?) },
            "alpha1-amplitude" => d.alpha1_amplitude = float()?,
            "period" => d.period = int()?,
            "alpha2" => d.alpha2 = float()?,
            "clamp-alpha1-nonnegative" => {
                d.clamp_alpha1_nonnegative = value.parse().map_err(|_| bad("true or false"))?
            }
            "epsilon" => d.epsilon = if optional(value) { None } else { Some(float()?) },
            "max-steps" => d.max_steps = int()?,
            "trace-pca-every" => d.trace_pca_every = int()?,
            "ratio-threshold" => self.ratio_threshold = float()?,
            "dim" => self.dim = if optional(value) { None } else { Some(int()?) },
            k if is_informational(k) => {}
            _ => return Err(Error::config(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    /// Applies every setting in a `key=value` document. Blank lines and
    /// lines starting with `#` are skipped; manifest-only keys are ignored.
    pub fn apply_settings(&mut self, text: &str) -> Result<()> {
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key=value", idx + 1)))?;
            self.set(key, value)
                .map_err(|e| Error::config(format!("line {}: {e}", idx + 1)))?;
        }
        Ok(())
    }
}

fn is_informational(key: &str) -> bool {
    matches!(key, "version" | "input" | "points" | "ambient-dim")
        || key.starts_with("result.")
        || key.starts_with("output.")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub degree: f64,
    pub d0: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingResult {
    pub intrinsic_dimension: usize,
    /// One low-dimensional point per input point.
    pub coordinates: Vec<Vec<f64>>,
    /// Soft-neighbour pairs of the original cloud.
    pub edges: Vec<Edge>,
    pub ratios: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub embedding: EmbeddingResult,
    pub pca: PcaResult,
    pub deformed: PointCloud,
    pub trace: DeformTrace,
    pub stop_reason: StopReason,
    pub steps: usize,
    pub neighborhoods: Vec<SoftNeighborhood>,
    /// Resolved neighbourhood size and termination threshold.
    pub k: usize,
    pub epsilon: f64,
}

/// Flattens `cloud` and reads out its intrinsic dimension and coordinates.
pub fn reduce(cloud: &PointCloud, config: &ReduceConfig) -> Result<Reduction> {
    config.validate()?;
    if cloud.len() < 2 {
        return Err(Error::config("reduction needs at least two points"));
    }
    let deformer = Deformer::new(cloud, config.deform.clone())?;
    let epsilon = deformer.epsilon();
    let outcome = deformer.run(cloud.clone())?;
    let pca = spectral::pca(&outcome.cloud)?;
    let intrinsic_dimension = spectral::estimate_dimension(&pca, config.ratio_threshold)?;
    let out_dim = config.dim.unwrap_or(intrinsic_dimension);
    let coordinates = spectral::project(&outcome.cloud, &pca, out_dim)?;
    let edges = outcome
        .neighborhoods
        .iter()
        .flat_map(|sn| {
            sn.entries.iter().map(move |e| Edge {
                from: sn.owner,
                to: e.index,
                degree: e.degree,
                d0: e.d0,
            })
        })
        .collect();
    Ok(Reduction {
        embedding: EmbeddingResult {
            intrinsic_dimension,
            coordinates,
            edges,
            ratios: pca.ratios.clone(),
        },
        pca,
        deformed: outcome.cloud,
        trace: outcome.trace,
        stop_reason: outcome.stop_reason,
        steps: outcome.steps,
        neighborhoods: outcome.neighborhoods,
        k: config.deform.resolved_k(cloud.len()),
        epsilon,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputPaths {
    pub embedding: PathBuf,
    pub edges: PathBuf,
    pub trace: PathBuf,
    pub manifest: PathBuf,
    pub svg: Option<PathBuf>,
}

impl OutputPaths {
    pub fn from_prefix(prefix: impl AsRef<Path>, svg: bool) -> Self {
        let prefix = prefix.as_ref().as_os_str().to_owned();
        let with = |suffix: &str| {
            let mut p = prefix.clone();
            p.push(suffix);
            PathBuf::from(p)
        };
        Self {
            embedding: with(".embedding.csv"),
            edges: with(".edges.csv"),
            trace: with(".trace.csv"),
            manifest: with(".manifest"),
            svg: svg.then(|| with(".svg")),
        }
    }
}

/// Everything needed to reproduce a run, as `key=value` lines that
/// [`ReduceConfig::apply_settings`] reads back.
pub fn manifest(
    input: &Path,
    cloud: &PointCloud,
    config: &ReduceConfig,
    reduction: &Reduction,
    paths: &OutputPaths,
) -> String {
    let d = &config.deform;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k}={v}");
    };
    kv("version", VERSION.to_string());
    kv("input", input.display().to_string());
    kv("points", cloud.len().to_string());
    kv("ambient-dim", cloud.dim().to_string());
    kv("k", reduction.k.to_string());
    kv("alpha1-amplitude", fmt_f64(d.alpha1_amplitude));
    kv("period", d.period.to_string());
    kv("alpha2", fmt_f64(d.alpha2));
    kv("clamp-alpha1-nonnegative", d.clamp_alpha1_nonnegative.to_string());
    kv("epsilon", fmt_f64(reduction.epsilon));
    kv("max-steps", d.max_steps.to_string());
    kv("trace-pca-every", d.trace_pca_every.to_string());
    kv("ratio-threshold", fmt_f64(config.ratio_threshold));
    kv("dim", config.dim.map_or_else(|| "auto".into(), |v| v.to_string()));
    kv("result.stop-reason", reduction.stop_reason.to_string());
    kv("result.steps", reduction.steps.to_string());
    kv("result.intrinsic-dimension", reduction.embedding.intrinsic_dimension.to_string());
    let ratios: Vec<String> = reduction.embedding.ratios.iter().map(|&r| fmt_f64(r)).collect();
    kv("result.ratios", ratios.join(","));
    kv("output.embedding", paths.embedding.display().to_string());
    kv("output.edges", paths.edges.display().to_string());
    kv("output.trace", paths.trace.display().to_string());
    if let Some(svg) = &paths.svg {
        kv("output.svg", svg.display().to_string());
    }
    s
}

/// Writes the embedding, edge, trace and manifest files.
pub fn write_outputs(
    paths: &OutputPaths,
    input: &Path,
    cloud: &PointCloud,
    config: &ReduceConfig,
    reduction: &Reduction,
) -> Result<()> {
    write_file(&paths.embedding, |w| write_embedding(w, &reduction.embedding.coordinates))?;
    write_file(&paths.edges, |w| write_edges(w, &reduction.neighborhoods))?;
    write_file(&paths.trace, |w| write_trace(w, &reduction.trace))?;
    let text = manifest(input, cloud, config, reduction, paths);
    write_file(&paths.manifest, |w| w.write_all(text.as_bytes()))?;
    Ok(())
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_parse() {
        let mut c = ReduceConfig::default();
        c.apply_settings(
            "# comment\nk=6\nalpha1_amplitude=2e-4\nperiod = 30\nclamp-alpha1-nonnegative=false\n\
             epsilon=auto\nmax-steps=10\ntrace-pca-every=5\nratio-threshold=0.1\ndim=3\n\
             result.steps=99\noutput.svg=x.svg\n",
        )
        .unwrap();
        assert_eq!(c.deform.k, Some(6));
        assert_eq!(c.deform.alpha1_amplitude, 2e-4);
        assert_eq!(c.deform.period, 30);
        assert!(!c.deform.clamp_alpha1_nonnegative);
        assert_eq!(c.deform.epsilon, None);
        assert_eq!(c.deform.max_steps, 10);
        assert_eq!(c.deform.trace_pca_every, 5);
        assert_eq!(c.ratio_threshold, 0.1);
        assert_eq!(c.dim, Some(3));
    }

    #[test]
    fn settings_errors() {
        let mut c = ReduceConfig::default();
        assert!(c.apply_settings("k\n").is_err());
        assert!(c.apply_settings("bogus=1\n").is_err());
        assert!(c.apply_settings("period=-1\n").is_err());
        assert!(c.apply_settings("clamp-alpha1-nonnegative=yes\n").is_err());
    }

    #[test]
    fn prefix_paths() {
        let p = OutputPaths::from_prefix("out/run", true);
        assert_eq!(p.embedding, PathBuf::from("out/run.embedding.csv"));
        assert_eq!(p.manifest, PathBuf::from("out/run.manifest"));
        assert_eq!(p.svg, Some(PathBuf::from("out/run.svg")));
    }

    #[test]
    fn reduce_rejects_single_point_and_bad_threshold() {
        let one = PointCloud::new(vec![vec![0.0, 0.0]]).unwrap();
        assert!(reduce(&one, &ReduceConfig::default()).is_err());
        let two = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let cfg = ReduceConfig { ratio_threshold: 1.0, ..ReduceConfig::default() };
        assert!(reduce(&two, &cfg).is_err());
    }

    #[test]
    fn manifest_round_trips_config() {
        let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let cfg = ReduceConfig {
            deform: DeformConfig { k: Some(1), max_steps: 5, ..DeformConfig::default() },
            ..ReduceConfig::default()
        };
        let red = reduce(&cloud, &cfg).unwrap();
        let paths = OutputPaths::from_prefix("p", false);
        let text = manifest(Path::new("in.csv"), &cloud, &cfg, &red, &paths);
        let mut back = ReduceConfig::default();
        back.apply_settings(&text).unwrap();
        let again = reduce(&cloud, &back).unwrap();
        assert_eq!(again.embedding, red.embedding);
        assert_eq!(manifest(Path::new("in.csv"), &cloud, &back, &again, &paths), text);
    }
}

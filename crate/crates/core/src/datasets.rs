//! Synthetic test surfaces and CSV ingestion.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::export::fmt_f64;
use crate::geometry::PointCloud;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Surface {
    /// `(r cos t, r sin t, h)` for `t` in `[0, pi]` and `h` in `[0, height]`.
    HalfCylinder { radius: f64, height: f64 },
    /// `z = peak * exp(-(x^2 + y^2) / (2 variance))` over
    /// `[-half_width, half_width]^2`.
    Gaussian {
        variance: f64,
        peak: f64,
        half_width: f64,
    },
}

/// Uniform perturbation of the grid parameters before they are mapped onto
/// the surface, as a fraction of the grid spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jitter {
    pub amplitude: f64,
    pub seed: u64,
}

/// A `grid_u x grid_v` sampling of a surface. Points are ordered with `v` as
/// the outer loop: index `v * grid_u + u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceSpec {
    pub surface: Surface,
    /// Samples along the angle (cylinder) or `x` (Gaussian).
    pub grid_u: usize,
    /// Samples along the height (cylinder) or `y` (Gaussian).
    pub grid_v: usize,
    pub jitter: Option<Jitter>,
}

impl SurfaceSpec {
    /// 12 x 10 half cylinder of radius 1 and height 2.5.
    pub fn half_cylinder() -> Self {
        Self {
            surface: Surface::HalfCylinder {
                radius: 1.0,
                height: 2.5,
            },
            grid_u: 12,
            grid_v: 10,
            jitter: None,
        }
    }

    /// 12 x 10 Gaussian bump of peak 3 over `[-5, 5]^2`.
    pub fn gaussian(variance: f64) -> Self {
        Self {
            surface: Surface::Gaussian {
                variance,
                peak: 3.0,
                half_width: 5.0,
            },
            grid_u: 12,
            grid_v: 10,
            jitter: None,
        }
    }

    pub fn with_jitter(mut self, amplitude: f64, seed: u64) -> Self {
        self.jitter = Some(Jitter { amplitude, seed });
        self
    }

    pub fn len(&self) -> usize {
        self.grid_u * self.grid_v
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_u < 1 || self.grid_v < 1 {
            return Err(Error::config("grid dimensions must be at least 1"));
        }
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive, got {v}")))
            }
        };
        match self.surface {
            Surface::HalfCylinder { radius, height } => {
                positive("radius", radius)?;
                positive("height", height)?;
            }
            Surface::Gaussian {
                variance,
                peak,
                half_width,
            } => {
                positive("variance", variance)?;
                positive("peak", peak)?;
                positive("half width", half_width)?;
            }
        }
        if let Some(j) = self.jitter {
            if !(j.amplitude.is_finite() && j.amplitude >= 0.0) {
                return Err(Error::config("jitter amplitude must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<PointCloud> {
        match self.surface {
            Surface::HalfCylinder { .. } => generate_half_cylinder(self),
            Surface::Gaussian { .. } => generate_gaussian_surface(self),
        }
    }

    /// Grid parameters `(u, v)` of every point, jittered when requested.
    fn parameters(&self, u_range: (f64, f64), v_range: (f64, f64)) -> Vec<(f64, f64)> {
        let step = |(lo, hi): (f64, f64), count: usize| {
            if count > 1 {
                (hi - lo) / (count - 1) as f64
            } else {
                0.0
            }
        };
        let du = step(u_range, self.grid_u);
        let dv = step(v_range, self.grid_v);
        let mut rng = self.jitter.map(|j| (j.amplitude, ChaCha8Rng::seed_from_u64(j.seed)));
        let mut out = Vec::with_capacity(self.len());
        for iv in 0..self.grid_v {
            for iu in 0..self.grid_u {
                let mut u = u_range.0 + du * iu as f64;
                let mut v = v_range.0 + dv * iv as f64;
                if let Some((a, rng)) = rng.as_mut() {
                    let a = *a;
                    u += rng.random_range(-a..=a) * du;
                    v += rng.random_range(-a..=a) * dv;
                }
                out.push((u, v));
            }
        }
        out
    }
}

pub fn generate_half_cylinder(spec: &SurfaceSpec) -> Result<PointCloud> {
    spec.validate()?;
    let Surface::HalfCylinder { radius, height } = spec.surface else {
        return Err(Error::config("spec does not describe a half cylinder"));
    };
    let points = spec
        .parameters((0.0, PI), (0.0, height))
        .into_iter()
        .map(|(t, h)| vec![radius * t.cos(), radius * t.sin(), h])
        .collect();
    PointCloud::new(points)
}

pub fn generate_gaussian_surface(spec: &SurfaceSpec) -> Result<PointCloud> {
    spec.validate()?;
    let Surface::Gaussian {
        variance,
        peak,
        half_width,
    } = spec.surface
    else {
        return Err(Error::config("spec does not describe a Gaussian surface"));
    };
    let extent = (-half_width, half_width);
    let points = spec
        .parameters(extent, extent)
        .into_iter()
        .map(|(x, y)| vec![x, y, gaussian_height(x, y, variance, peak)])
        .collect();
    PointCloud::new(points)
}

pub fn gaussian_height(x: f64, y: f64, variance: f64, peak: f64) -> f64 {
    peak * (-(x * x + y * y) / (2.0 * variance)).exp()
}

/// Reads one point per row. A first row that does not parse as numbers is
/// taken as a header.
pub fn load_csv(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Ingestion {
        path: path.to_owned(),
        line: 0,
        message: e.to_string(),
    })?;
    read_csv(file, path)
}

pub fn read_csv(reader: impl Read, source: impl AsRef<Path>) -> Result<PointCloud> {
    let source = source.as_ref();
    let fail = |line: u64, message: String| Error::Ingestion {
        path: source.to_owned(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut dim = None;
    let mut coords = Vec::new();
    let mut first = true;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            fail(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let parsed: std::result::Result<Vec<f64>, String> = record
            .iter()
            .enumerate()
            .map(|(col, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("column {}: {cell:?} is not a finite number", col + 1)),
            })
            .collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if first => {
                first = false;
                continue;
            }
            Err(msg) => return Err(fail(line, msg)),
        };
        first = false;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(fail(line, format!("expected {d} columns, found {}", row.len())))
            }
            _ => {}
        }
        coords.extend(row);
    }
    let dim = dim.ok_or_else(|| fail(1, "no numeric rows".into()))?;
    PointCloud::from_flat(dim, coords).map_err(|e| fail(1, e.to_string()))
}

pub fn save_csv(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv(&mut out, cloud)?;
    out.flush()?;
    Ok(())
}

pub fn write_csv(out: &mut impl Write, cloud: &PointCloud) -> std::io::Result<()> {
    for p in cloud.points() {
        let row: Vec<String> = p.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_cylinder() {
        let spec = SurfaceSpec {
            surface: Surface::HalfCylinder { radius: 1.0, height: 1.0 },
            grid_u: 2,
            grid_v: 2,
            jitter: None,
        };
        let c = generate_half_cylinder(&spec).unwrap();
        let expect = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]];
        assert_eq!(c.len(), 4);
        for (p, e) in c.points().zip(expect) {
            for (a, b) in p.iter().zip(e) {
                assert!((a - b).abs() < 1e-15, "{p:?} vs {e:?}");
            }
        }
    }

    #[test]
    fn default_cylinder_on_unit_circle() {
        let c = SurfaceSpec::half_cylinder().generate().unwrap();
        assert_eq!(c.len(), 120);
        assert_eq!(c.dim(), 3);
        for p in c.points() {
            assert!((p[0] * p[0] + p[1] * p[1] - 1.0).abs() < 1e-12);
            assert!(p[1] >= 0.0 && p[2] >= 0.0 && p[2] <= 2.5 + 1e-12);
        }
    }

    #[test]
    fn gaussian_peak_and_sharpness() {
        let spec = SurfaceSpec { grid_u: 3, grid_v: 3, ..SurfaceSpec::gaussian(6.0) };
        let c = spec.generate().unwrap();
        assert_eq!(c.point(4), &[0.0, 0.0, 3.0]);
        let wide = gaussian_height(1.0, 2.0, 6.0, 3.0) / 3.0;
        let sharp = gaussian_height(1.0, 2.0, 2.0, 3.0) / 3.0;
        assert!(sharp < wide);
        let c = SurfaceSpec::gaussian(2.0).generate().unwrap();
        assert_eq!(c.len(), 120);
        for p in c.points() {
            assert!((p[2] - gaussian_height(p[0], p[1], 2.0, 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_kind_and_bad_geometry() {
        assert!(generate_gaussian_surface(&SurfaceSpec::half_cylinder()).is_err());
        assert!(generate_half_cylinder(&SurfaceSpec::gaussian(6.0)).is_err());
        assert!(SurfaceSpec::gaussian(0.0).generate().is_err());
        assert!(SurfaceSpec { grid_u: 0, ..SurfaceSpec::half_cylinder() }.generate().is_err());
        assert!(SurfaceSpec::half_cylinder().with_jitter(-0.1, 1).generate().is_err());
    }

    #[test]
    fn jitter_is_seeded() {
        let a = SurfaceSpec::half_cylinder().with_jitter(0.2, 7).generate().unwrap();
        let b = SurfaceSpec::half_cylinder().with_jitter(0.2, 7).generate().unwrap();
        let c = SurfaceSpec::half_cylinder().with_jitter(0.2, 8).generate().unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, SurfaceSpec::half_cylinder().generate().unwrap());
        for p in a.points() {
            assert!((p[0] * p[0] + p[1] * p[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_basic_and_header() {
        let c = read_csv("0,0\n3,4\n".as_bytes(), "mem").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.distance(0, 1), 5.0);
        let c = read_csv("x,y,z\n1,2,3\n4, 5 ,6\n".as_bytes(), "mem").unwrap();
        assert_eq!(c.to_rows(), vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
    }

    fn ingestion_line(text: &str) -> u64 {
        match read_csv(text.as_bytes(), "mem") {
            Err(Error::Ingestion { line, .. }) => line,
            other => panic!("expected ingestion error, got {other:?}"),
        }
    }

    #[test]
    fn csv_errors_name_the_line() {
        assert_eq!(ingestion_line("1,2\n3,4\n5\n"), 3);
        assert_eq!(ingestion_line("1,2\n3,abc\n"), 2);
        assert_eq!(ingestion_line("a,b\n1,2\nc,d\n"), 3);
        assert_eq!(ingestion_line("1,2\nnan,3\n"), 2);
        ingestion_line("");
        ingestion_line("x,y\n");
    }
}

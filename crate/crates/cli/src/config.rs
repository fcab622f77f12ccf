//! Run configuration, read from TOML.
//!
//! ```toml
//! manufactured = true
//! p = 1
//! levels = 4
//! t_final = 3.0
//! steps = 20
//!
//! [geometry]
//! kind = "square"
//! level = 0
//! ```
//!
//! Absent fields take defaults, which are filled in by [`RunConfig::resolve`]
//! and echoed next to every output.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use wavecouple::fem::{CoefficientField, ConstantCoefficients, PerComponentCoefficients};
use wavecouple::mesh::{extract_boundary, generate_boxes_mesh, generate_square_mesh, load_mesh, AxisBox, Mesh};
use wavecouple::scenarios::{
    gaussian_lens_kappa, plane_wave_incident, CausalSignal, Experiment, ManufacturedKappa, PlaneWave,
    OBSERVATION_POINTS,
};
use wavecouple::Point;

/// Bad input: unreadable, unparsable or invalid configuration. Maps to
/// exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(key: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError(format!("invalid `{key}`: {message}"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    /// `[−0.5, 0.5]²` refined `level` times.
    Square {
        #[serde(default)]
        level: u32,
    },
    GaussianLens {
        h: f64,
    },
    /// Axis-aligned boxes `[x0, y0, x1, y1]`; the four boxes of the
    /// built-in experiment if empty.
    Boxes {
        h: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        boxes: Vec<[f64; 4]>,
    },
    Trapping {
        h: f64,
    },
    File {
        path: PathBuf,
    },
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry::Square { level: 0 }
    }
}

impl Geometry {
    pub fn mesh(&self) -> anyhow::Result<Mesh> {
        Ok(match self {
            Geometry::Square { level } => generate_square_mesh(*level),
            Geometry::GaussianLens { h } => Experiment::GaussianLens.mesh(*h)?,
            Geometry::Trapping { h } => Experiment::Trapping.mesh(*h)?,
            Geometry::Boxes { h, boxes } if boxes.is_empty() => Experiment::FourBoxes.mesh(*h)?,
            Geometry::Boxes { h, boxes } => {
                let b = boxes
                    .iter()
                    .map(|b| AxisBox::new([b[0], b[1]], [b[2], b[3]]))
                    .collect::<Result<Vec<_>, _>>()?;
                generate_boxes_mesh(&b, *h)?
            }
            Geometry::File { path } => load_mesh(path)?,
        })
    }

    fn experiment(&self) -> Option<Experiment> {
        match self {
            Geometry::GaussianLens { .. } => Some(Experiment::GaussianLens),
            Geometry::Boxes { boxes, .. } if boxes.is_empty() => Some(Experiment::FourBoxes),
            Geometry::Trapping { .. } => Some(Experiment::Trapping),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coefficients {
    /// `c ≡ 1`, `κ ≡ I`.
    Unit,
    /// The polynomial `κ` of the manufactured case.
    Manufactured,
    GaussianLens,
    /// The materials of the four-box experiment, by component id.
    Experiment1,
    /// `κ = diag(0.25, 0.125)`.
    Trapping,
    /// `κ = diag(a, b)` per component; a single entry applies to all.
    Diag {
        values: Vec<[f64; 2]>,
        #[serde(default = "one")]
        c: f64,
    },
}

impl Coefficients {
    pub fn field(&self) -> Box<dyn CoefficientField> {
        match self {
            Coefficients::Unit => Box::new(ConstantCoefficients::unit()),
            Coefficients::Manufactured => Box::new(wavecouple::scenarios::manufactured_case_1(ManufacturedKappa::Polynomial).coefficients()),
            Coefficients::GaussianLens => Box::new(gaussian_lens_kappa()),
            Coefficients::Experiment1 => Experiment::FourBoxes.coefficients(),
            Coefficients::Trapping => Experiment::Trapping.coefficients(),
            Coefficients::Diag { values, c } => {
                let make = |v: &[f64; 2]| ConstantCoefficients {
                    c: *c,
                    kappa: [[v[0], 0.0], [0.0, v[1]]],
                };
                if values.len() == 1 {
                    Box::new(make(&values[0]))
                } else {
                    Box::new(PerComponentCoefficients {
                        fields: values.iter().map(|v| Box::new(make(v)) as Box<dyn CoefficientField>).collect(),
                    })
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalName {
    RampedSine,
    SinePower,
    Pulse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Incident {
    pub direction: [f64; 2],
    #[serde(default = "default_signal")]
    pub signal: SignalName,
    #[serde(default = "two")]
    pub omega: f64,
    #[serde(default = "half")]
    pub ramp: f64,
    #[serde(default = "six")]
    pub power: i32,
    #[serde(default = "two")]
    pub duration: f64,
    /// Defaults to the smallest delay for which the wave has not reached
    /// the obstacle at `t = 0`.
    pub delay: Option<f64>,
}

impl Incident {
    pub fn signal(&self) -> CausalSignal {
        match self.signal {
            SignalName::RampedSine => CausalSignal::RampedSine {
                omega: self.omega,
                ramp: self.ramp,
            },
            SignalName::SinePower => CausalSignal::SinePower {
                omega: self.omega,
                power: self.power,
            },
            SignalName::Pulse => CausalSignal::Pulse {
                omega: self.omega,
                ramp: self.ramp,
                duration: self.duration,
            },
        }
    }

    pub fn wave(&self) -> anyhow::Result<PlaneWave> {
        let delay = self.delay.ok_or_else(|| anyhow::anyhow!("incident delay has not been resolved"))?;
        Ok(plane_wave_incident(self.direction, self.signal(), delay)?)
    }
}

/// A rectangular grid of exterior sample points for snapshots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub n: [usize; 2],
}

impl Sampling {
    pub fn spacing(&self) -> [f64; 2] {
        [
            (self.x[1] - self.x[0]) / (self.n[0] - 1) as f64,
            (self.y[1] - self.y[0]) / (self.n[1] - 1) as f64,
        ]
    }

    /// Points in VTK order, `x` fastest.
    pub fn points(&self) -> Vec<Point> {
        let h = self.spacing();
        (0..self.n[1])
            .flat_map(|j| (0..self.n[0]).map(move |i| [self.x[0] + i as f64 * h[0], self.y[0] + j as f64 * h[1]]))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub manufactured: bool,
    #[serde(default = "one_usize")]
    pub p: usize,
    #[serde(default = "four")]
    pub levels: u32,
    pub t_final: Option<f64>,
    pub steps: Option<usize>,
    pub contour_radius: Option<f64>,
    #[serde(default = "default_observation_points")]
    pub observation_points: Vec<Point>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub geometry: Geometry,
    pub coefficients: Option<Coefficients>,
    pub incident: Option<Incident>,
    pub sampling: Option<Sampling>,
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn half() -> f64 {
    0.5
}
fn six() -> i32 {
    6
}
fn one_usize() -> usize {
    1
}
fn four() -> u32 {
    4
}
fn default_signal() -> SignalName {
    SignalName::RampedSine
}
fn default_observation_points() -> Vec<Point> {
    OBSERVATION_POINTS.to_vec()
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("cannot parse configuration: {e}")))
    }

    /// Fills in defaults, normalizes the incident direction and validates.
    /// Returns the warnings issued on the way.
    pub fn resolve(&mut self) -> Result<Vec<String>, ConfigError> {
        let mut warnings = Vec::new();
        if !(1..=2).contains(&self.p) {
            return Err(invalid("p", format!("FEM degree must be 1 or 2, got {}", self.p)));
        }
        if !(2..=8).contains(&self.levels) {
            return Err(invalid("levels", format!("need 2 to 8 levels to estimate rates, got {}", self.levels)));
        }
        let experiment = self.geometry.experiment();
        let (t_default, steps_default) = match experiment {
            Some(e) => {
                let (t, k) = e.time_parameters();
                (t, (t / k).round() as usize)
            }
            None => (3.0, 20),
        };
        let t_final = *self.t_final.get_or_insert(t_default);
        positive("t_final", t_final)?;
        let steps = *self.steps.get_or_insert(steps_default);
        if steps == 0 {
            return Err(invalid("steps", "must be positive"));
        }
        if let Some(r) = self.contour_radius {
            if !(r > 0.0 && r < 1.0) {
                return Err(invalid("contour_radius", format!("must lie in (0, 1), got {r}")));
            }
        }
        match &self.geometry {
            Geometry::Square { level } if *level > 7 => return Err(invalid("geometry.level", format!("at most 7, got {level}"))),
            Geometry::GaussianLens { h } | Geometry::Trapping { h } | Geometry::Boxes { h, .. } => {
                if !(*h > 0.0 && *h <= 0.25) {
                    return Err(invalid("geometry.h", format!("must lie in (0, 0.25], got {h}")));
                }
            }
            _ => {}
        }
        if self.coefficients.is_none() {
            self.coefficients = Some(match (&self.geometry, self.manufactured) {
                (_, true) => Coefficients::Manufactured,
                (Geometry::GaussianLens { .. }, _) => Coefficients::GaussianLens,
                (Geometry::Trapping { .. }, _) => Coefficients::Trapping,
                (Geometry::Boxes { boxes, .. }, _) if boxes.is_empty() => Coefficients::Experiment1,
                _ => Coefficients::Unit,
            });
        }
        if let Some(Coefficients::Diag { values, c }) = &self.coefficients {
            if values.is_empty() {
                return Err(invalid("coefficients.values", "needs at least one diag(a, b)"));
            }
            positive("coefficients.c", *c)?;
            for v in values {
                positive("coefficients.values", v[0])?;
                positive("coefficients.values", v[1])?;
            }
        }
        if self.manufactured {
            if self.incident.is_some() {
                return Err(invalid("incident", "a manufactured run has no incident wave"));
            }
            if !matches!(self.geometry, Geometry::Square { .. }) {
                return Err(invalid("geometry", "the manufactured case is defined on the square"));
            }
            if !matches!(self.coefficients, Some(Coefficients::Manufactured | Coefficients::Unit)) {
                return Err(invalid("coefficients", "the manufactured case needs kind = \"manufactured\" or \"unit\""));
            }
        }
        if let Some(inc) = &mut self.incident {
            let d = inc.direction;
            let norm = d[0].hypot(d[1]);
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(invalid("incident.direction", format!("must be a nonzero vector, got {d:?}")));
            }
            if (norm - 1.0).abs() > 1e-12 {
                inc.direction = [d[0] / norm, d[1] / norm];
                warnings.push(format!(
                    "incident.direction {d:?} normalized to [{}, {}]",
                    inc.direction[0], inc.direction[1]
                ));
            }
            inc.signal().validate().map_err(|e| invalid("incident", e))?;
            if let Some(delay) = inc.delay {
                if !(delay >= 0.0 && delay.is_finite()) {
                    return Err(invalid("incident.delay", format!("must be nonnegative, got {delay}")));
                }
            }
        }
        for x in &self.observation_points {
            if !(x[0].is_finite() && x[1].is_finite()) {
                return Err(invalid("observation_points", format!("non-finite point {x:?}")));
            }
        }
        for &t in &self.snapshot_times {
            if !(0.0..=t_final).contains(&t) {
                return Err(invalid("snapshot_times", format!("{t} lies outside [0, {t_final}]")));
            }
        }
        if let Some(s) = &self.sampling {
            if s.n[0] < 2 || s.n[1] < 2 {
                return Err(invalid("sampling.n", "needs at least 2 points per direction"));
            }
            if !(s.x[1] > s.x[0] && s.y[1] > s.y[0]) {
                return Err(invalid("sampling", "ranges must be increasing"));
            }
        }
        Ok(warnings)
    }

    /// Resolves the incident delay against the boundary of the configured
    /// mesh.
    pub fn resolve_delay(&mut self, mesh: &Mesh) -> anyhow::Result<()> {
        if let Some(inc) = &mut self.incident {
            if inc.delay.is_none() {
                let b = extract_boundary(mesh)?;
                inc.delay = Some(PlaneWave::min_delay(inc.direction, &b));
            }
        }
        Ok(())
    }

    pub fn t_final(&self) -> f64 {
        self.t_final.unwrap_or(3.0)
    }

    pub fn steps(&self) -> usize {
        self.steps.unwrap_or(20)
    }

    pub fn coefficients(&self) -> Coefficients {
        self.coefficients.clone().unwrap_or(Coefficients::Unit)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }
}

/// Reads, resolves and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<(RunConfig, Vec<String>), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::from_toml(&text)?;
    let warnings = cfg.resolve()?;
    Ok((cfg, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolved(text: &str) -> Result<(RunConfig, Vec<String>), ConfigError> {
        let mut c = RunConfig::from_toml(text)?;
        let w = c.resolve()?;
        Ok((c, w))
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let (c, w) = resolved("manufactured = true\n[geometry]\nkind = \"square\"\n").unwrap();
        assert!(w.is_empty());
        assert_eq!(c.p, 1);
        assert_eq!(c.levels, 4);
        assert_eq!(c.t_final, Some(3.0));
        assert_eq!(c.steps, Some(20));
        assert_eq!(c.coefficients, Some(Coefficients::Manufactured));
        assert_eq!(c.observation_points.len(), 5);
    }

    #[test]
    fn direction_is_normalized_with_a_warning() {
        let (c, w) = resolved("[incident]\ndirection = [2.0, 0.0]\n").unwrap();
        assert_eq!(c.incident.unwrap().direction, [1.0, 0.0]);
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("normalized"));
    }

    #[test]
    fn negative_final_time_names_the_key() {
        let e = resolved("t_final = -1.0\n").unwrap_err();
        assert!(e.0.contains("t_final"), "{e}");
    }

    #[test]
    fn one_level_is_rejected() {
        let e = resolved("manufactured = true\nlevels = 1\n").unwrap_err();
        assert!(e.0.contains("levels"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line_number() {
        let e = RunConfig::from_toml("p = 1\n\nstepz = 3\n").unwrap_err();
        assert!(e.0.contains("stepz") && e.0.contains("line 3"), "{e}");
        let e = RunConfig::from_toml("[geometry]\nkind = \"square\"\nlevle = 2\n").unwrap_err();
        assert!(e.0.contains("levle"), "{e}");
    }

    #[test]
    fn experiment_defaults_follow_the_geometry() {
        let (c, _) = resolved("[geometry]\nkind = \"trapping\"\nh = 0.125\n[incident]\ndirection = [1.0, 1.0]\n").unwrap();
        assert_eq!(c.coefficients, Some(Coefficients::Trapping));
        assert_eq!(c.t_final, Some(2.5));
        assert_eq!(c.steps, Some(375));
        let (c, _) = resolved("[geometry]\nkind = \"boxes\"\nh = 0.1\n").unwrap();
        assert_eq!(c.coefficients, Some(Coefficients::Experiment1));
        let k = c.coefficients().field();
        assert_eq!(k.kappa([-0.4, 0.4], 0), [[4.0, 0.0], [0.0, 0.25]]);
        assert_eq!(k.kappa([0.4, 0.4], 1), [[2.0, 0.0], [0.0, 0.5]]);
    }

    #[test]
    fn trapping_material_is_accepted_as_diag() {
        let (c, _) = resolved("[coefficients]\nkind = \"diag\"\nvalues = [[0.25, 0.125]]\n").unwrap();
        let k = c.coefficients().field();
        assert_eq!(k.kappa([0.0, 0.0], 0), [[0.25, 0.0], [0.0, 0.125]]);
        assert_eq!(k.c([0.0, 0.0], 0), 1.0);
    }

    #[test]
    fn resolved_config_round_trips() {
        let (c, _) = resolved(
            "[geometry]\nkind = \"square\"\nlevel = 1\n[incident]\ndirection = [0.0, 3.0]\nsignal = \"pulse\"\ndelay = 0.5\n[sampling]\nx = [-1.0, 1.0]\ny = [-1.0, 1.0]\nn = [5, 5]\n",
        )
        .unwrap();
        let mut again = RunConfig::from_toml(&c.to_toml()).unwrap();
        let w = again.resolve().unwrap();
        assert!(w.is_empty());
        assert_eq!(again, c);
    }

    #[test]
    fn sampling_points_run_x_fastest() {
        let s = Sampling {
            x: [0.0, 1.0],
            y: [0.0, 2.0],
            n: [3, 2],
        };
        let p = s.points();
        assert_eq!(p.len(), 6);
        assert_eq!(p[1], [0.5, 0.0]);
        assert_eq!(p[3], [0.0, 2.0]);
    }
}

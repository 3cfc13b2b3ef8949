//! TOML run configuration.
//!
//! A complete annotated example:
//!
//! ```toml
//! [flux]
//! # A named family: "paper-ex1", "paper-ex2", "burgers", "convex",
//! # "blowup" or "sine-cosine". Omit it and give [flux.profile] and
//! # [flux.transform] tables instead for a custom model.
//! builtin = "paper-ex2"
//!
//! [domain]
//! x_left = 0.0
//! x_right = 6.0
//!
//! [run]
//! m_cells = [50, 100, 200, 400]  # or a single integer
//! t_final = 6.0
//! cfl_safety = 0.9
//! reference = "paper-ex2"         # exact solution for error columns
//! snapshot_times = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
//!
//! [initial_data]
//! builtin = "paper-ex2"           # or `constant = 2.0`, or a breakpoint table
//!
//! [outputs]
//! dir = "out"
//! plots = true
//!
//! [overrides]                     # all optional; replay constants from a manifest
//! lambda = 0.45
//! n_steps = 5334
//! m_bound = 3.64
//! ```
//!
//! A custom flux reads, for instance,
//!
//! ```toml
//! [flux.profile]
//! kind = "plateau-linear"
//! z_minus = -1.0
//! z_plus = 0.0
//! left_slope = 1.0
//! right_slope = 1.0
//!
//! [flux.transform]
//! kind = "shift"                  # beta = u - r(x)
//! breakpoints = [1.0, 2.0]
//! values = [2.0, 1.5, 1.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coefficient::{Breakpoints, SpatialCoefficient};
use crate::error::{Error, Result};
use crate::experiment::Overrides;
use crate::flux::{FluxModel, MonotoneMap, MonotoneTable, Profile, Transform};
use crate::reference::{Reference, ReferenceId};
use crate::scheme::DEFAULT_CFL_SAFETY;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub flux: FluxSection,
    #[serde(default)]
    pub domain: Option<DomainSection>,
    pub run: RunSection,
    #[serde(default)]
    pub initial_data: Option<InitialDataSection>,
    #[serde(default)]
    pub outputs: OutputSection,
    #[serde(default)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSection {
    pub builtin: Option<String>,
    /// Location of the single interface of the "blowup" and "sine-cosine" families.
    pub interface: Option<f64>,
    /// Breakpoints and values of `r(x)` for the "convex" family.
    pub breakpoints: Option<Vec<f64>>,
    pub values: Option<Vec<f64>>,
    pub profile: Option<ProfileSpec>,
    pub transform: Option<TransformSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Quadratic,
    PlateauQuadratic {
        z_minus: f64,
        z_plus: f64,
    },
    PlateauLinear {
        z_minus: f64,
        z_plus: f64,
        left_slope: f64,
        right_slope: f64,
    },
    Abs,
    Zero,
}

impl ProfileSpec {
    fn build(&self) -> Profile {
        match *self {
            ProfileSpec::Quadratic => Profile::Quadratic,
            ProfileSpec::PlateauQuadratic { z_minus, z_plus } => Profile::PlateauQuadratic { z_minus, z_plus },
            ProfileSpec::PlateauLinear {
                z_minus,
                z_plus,
                left_slope,
                right_slope,
            } => Profile::PlateauLinear {
                z_minus,
                z_plus,
                left_slope,
                right_slope,
            },
            ProfileSpec::Abs => Profile::Abs,
            ProfileSpec::Zero => Profile::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TransformSpec {
    /// `beta = u - r(x)`.
    Shift { breakpoints: Vec<f64>, values: Vec<f64> },
    /// `beta = s(x) u`.
    Scale { breakpoints: Vec<f64>, values: Vec<f64> },
    /// One monotone map per interval.
    Piecewise { breakpoints: Vec<f64>, maps: Vec<MapSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    Affine { slope: f64, intercept: f64 },
    SignedSquare,
    /// `slope u + sin(u + phase)`.
    Trig { slope: f64, phase: f64 },
    Cubic,
    Table { u: Vec<f64>, beta: Vec<f64> },
}

impl MapSpec {
    fn build(&self) -> Result<MonotoneMap> {
        Ok(match self {
            MapSpec::Affine { slope, intercept } => MonotoneMap::Affine {
                slope: *slope,
                intercept: *intercept,
            },
            MapSpec::SignedSquare => MonotoneMap::SignedSquare,
            MapSpec::Trig { slope, phase } => MonotoneMap::Trig {
                slope: *slope,
                phase: *phase,
            },
            MapSpec::Cubic => MonotoneMap::Cubic,
            MapSpec::Table { u, beta } => MonotoneMap::Table(MonotoneTable::new(u.clone(), beta.clone())?),
        })
    }
}

impl TransformSpec {
    fn build(&self) -> Result<Transform> {
        Ok(match self {
            TransformSpec::Shift { breakpoints, values } => Transform::Shift {
                offset: SpatialCoefficient::new(breakpoints.clone(), values.clone())?,
            },
            TransformSpec::Scale { breakpoints, values } => Transform::Scale {
                factor: SpatialCoefficient::new(breakpoints.clone(), values.clone())?,
            },
            TransformSpec::Piecewise { breakpoints, maps } => Transform::Piecewise {
                breakpoints: Breakpoints::new(breakpoints.clone())?,
                maps: maps.iter().map(MapSpec::build).collect::<Result<_>>()?,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub x_left: f64,
    pub x_right: f64,
}

/// A single grid size or a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellCount {
    One(usize),
    Many(Vec<usize>),
}

impl CellCount {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            CellCount::One(m) => vec![*m],
            CellCount::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub m_cells: CellCount,
    pub t_final: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    pub reference: Option<String>,
    #[serde(default)]
    pub snapshot_times: Option<Vec<f64>>,
}

fn default_cfl() -> f64 {
    DEFAULT_CFL_SAFETY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDataSection {
    /// A reference id, or "plateau" for `u_M(x)`.
    pub builtin: Option<String>,
    pub constant: Option<f64>,
    pub breakpoints: Option<Vec<f64>>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub snapshots: bool,
    #[serde(default = "yes")]
    pub diagnostics: bool,
    #[serde(default = "yes")]
    pub plots: bool,
    /// Test the entropy inequalities at every step.
    #[serde(default = "yes")]
    pub entropy_checks: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            snapshots: true,
            diagnostics: true,
            plots: true,
            entropy_checks: true,
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

/// Initial data resolved against the model.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Reference(Reference),
    Constant(f64),
    Table(SpatialCoefficient),
    /// `u_M(x) = beta^{-1}(x, 0)`.
    Plateau(FluxModel),
}

impl InitialData {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InitialData::Reference(r) => r.initial(x),
            InitialData::Constant(c) => *c,
            InitialData::Table(t) => t.eval(x),
            InitialData::Plateau(m) => m.plateau_bounds(x).map_or(f64::NAN, |p| p.u_m),
        }
    }
}

/// A configuration turned into concrete objects.
#[derive(Debug, Clone)]
pub struct Problem {
    pub model: FluxModel,
    pub initial: InitialData,
    pub reference: Option<Reference>,
    pub domain: (f64, f64),
    pub m_list: Vec<usize>,
    pub t_final: f64,
    pub cfl_safety: f64,
    pub snapshot_times: Vec<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// Builds the model, data and run parameters, checking every invariant.
    pub fn resolve(&self) -> Result<Problem> {
        let reference = self
            .run
            .reference
            .as_deref()
            .map(|s| s.parse::<ReferenceId>().and_then(Reference::new))
            .transpose()
            .map_err(config_error)?;
        let model = self.flux.build().map_err(config_error)?;
        let initial = self.initial_data(&model, reference.as_ref())?;

        let domain = match (&self.domain, &reference) {
            (Some(d), _) => (d.x_left, d.x_right),
            (None, Some(r)) => r.id().default_domain(),
            (None, None) => {
                return Err(Error::Config("[domain] is required without a reference".into()));
            }
        };
        if !(domain.0.is_finite() && domain.1.is_finite() && domain.0 < domain.1) {
            return Err(Error::Config(format!("invalid domain [{}, {}]", domain.0, domain.1)));
        }
        let m_list = self.run.m_cells.to_vec();
        if m_list.is_empty() || m_list.iter().any(|m| *m < 2) {
            return Err(Error::Config(format!("m_cells must be at least 2, got {m_list:?}")));
        }
        let t_final = match (self.run.t_final, &reference) {
            (Some(t), _) => t,
            (None, Some(r)) => r.id().reference_time(),
            (None, None) => return Err(Error::Config("run.t_final is required".into())),
        };
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Config(format!("t_final must be positive, got {t_final}")));
        }
        let cfl = self.run.cfl_safety;
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::Config(format!("cfl_safety must lie in (0, 1], got {cfl}")));
        }
        let snapshot_times = self.run.snapshot_times.clone().unwrap_or_else(|| vec![t_final]);
        if let Some(t) = snapshot_times.iter().find(|t| !(**t >= 0.0 && **t <= t_final)) {
            return Err(Error::Config(format!("snapshot time {t} outside [0, {t_final}]")));
        }
        Ok(Problem {
            model,
            initial,
            reference,
            domain,
            m_list,
            t_final,
            cfl_safety: cfl,
            snapshot_times,
        })
    }

    fn initial_data(&self, model: &FluxModel, reference: Option<&Reference>) -> Result<InitialData> {
        let Some(sec) = &self.initial_data else {
            return match (reference, self.flux.builtin.as_deref()) {
                (Some(r), _) => Ok(InitialData::Reference(r.clone())),
                (None, Some(name)) if name.parse::<ReferenceId>().is_ok() => {
                    Ok(InitialData::Reference(Reference::new(name.parse()?)?))
                }
                _ => Err(Error::Config("[initial_data] is required".into())),
            };
        };
        let given = [sec.builtin.is_some(), sec.constant.is_some(), sec.breakpoints.is_some() || sec.values.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(Error::Config(
                "[initial_data] needs exactly one of builtin, constant, or breakpoints/values".into(),
            ));
        }
        if let Some(name) = &sec.builtin {
            if name == "plateau" {
                return Ok(InitialData::Plateau(model.clone()));
            }
            let id: ReferenceId = name.parse().map_err(config_error)?;
            return Ok(InitialData::Reference(Reference::new(id)?));
        }
        if let Some(c) = sec.constant {
            if !c.is_finite() {
                return Err(Error::Config(format!("initial constant must be finite, got {c}")));
            }
            return Ok(InitialData::Constant(c));
        }
        let table = SpatialCoefficient::new(
            sec.breakpoints.clone().unwrap_or_default(),
            sec.values.clone().unwrap_or_default(),
        )
        .map_err(config_error)?;
        Ok(InitialData::Table(table))
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl FluxSection {
    pub fn build(&self) -> Result<FluxModel> {
        match (&self.builtin, &self.profile, &self.transform) {
            (Some(name), None, None) => builtin_flux(name, self),
            (None, Some(p), Some(t)) => FluxModel::new(p.build(), t.build()?),
            _ => Err(Error::Config(
                "[flux] needs either `builtin` or both [flux.profile] and [flux.transform]".into(),
            )),
        }
    }
}

/// Named flux families.
pub fn builtin_flux(name: &str, sec: &FluxSection) -> Result<FluxModel> {
    let interface = sec.interface.unwrap_or(0.0);
    let single = || Breakpoints::new(vec![interface]);
    match name {
        "paper-ex1" | "paper-ex2" => Reference::new(name.parse()?)?.model(),
        "burgers" => FluxModel::new(
            Profile::Quadratic,
            Transform::Shift {
                offset: SpatialCoefficient::constant(0.0)?,
            },
        ),
        // A(x, u) = (u - r(x))^2
        "convex" => {
            let r = match (&sec.breakpoints, &sec.values) {
                (Some(b), Some(v)) => SpatialCoefficient::new(b.clone(), v.clone())?,
                (None, None) => SpatialCoefficient::new(vec![2.0, 4.0], vec![1.0, -0.5, 0.5])?,
                _ => return Err(Error::Config("convex flux needs both breakpoints and values".into())),
            };
            FluxModel::new(
                Profile::PlateauQuadratic {
                    z_minus: 0.0,
                    z_plus: 0.0,
                },
                Transform::Shift { offset: r },
            )
        }
        // g = |z|, beta = u |u| left of the interface and u right of it.
        "blowup" => FluxModel::new(
            Profile::Abs,
            Transform::Piecewise {
                breakpoints: single()?,
                maps: vec![
                    MonotoneMap::SignedSquare,
                    MonotoneMap::Affine {
                        slope: 1.0,
                        intercept: 0.0,
                    },
                ],
            },
        ),
        // beta = 2u + sin u left of the interface, 2u + cos u right of it.
        "sine-cosine" => FluxModel::new(
            Profile::PlateauLinear {
                z_minus: -1.0,
                z_plus: 0.0,
                left_slope: 1.0,
                right_slope: 1.0,
            },
            Transform::Piecewise {
                breakpoints: single()?,
                maps: vec![
                    MonotoneMap::Trig {
                        slope: 2.0,
                        phase: 0.0,
                    },
                    MonotoneMap::Trig {
                        slope: 2.0,
                        phase: std::f64::consts::FRAC_PI_2,
                    },
                ],
            },
        ),
        other => Err(Error::Config(format!("unknown flux family `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_reference_config() {
        let c = RunConfig::from_toml(
            r#"
            [flux]
            builtin = "paper-ex2"
            [run]
            m_cells = 400
            reference = "paper-ex2"
            "#,
        )
        .unwrap();
        let p = c.resolve().unwrap();
        assert_eq!(p.domain, (0.0, 6.0));
        assert_eq!(p.t_final, 6.0);
        assert_eq!(p.m_list, vec![400]);
        assert_eq!(p.initial.eval(3.0), 2.0);
        assert_eq!(p.snapshot_times, vec![6.0]);
    }

    #[test]
    fn custom_flux_and_sweep() {
        let c = RunConfig::from_toml(
            r#"
            [flux.profile]
            kind = "plateau-linear"
            z_minus = -1.0
            z_plus = 0.0
            left_slope = 1.0
            right_slope = 1.0
            [flux.transform]
            kind = "shift"
            breakpoints = [1.0, 2.0]
            values = [2.0, 1.5, 1.0]
            [domain]
            x_left = 0.0
            x_right = 3.0
            [run]
            m_cells = [20, 10]
            t_final = 0.5
            [initial_data]
            constant = 2.0
            "#,
        )
        .unwrap();
        let p = c.resolve().unwrap();
        assert_eq!(p.m_list, vec![20, 10]);
        assert_eq!(p.model.eval_beta(1.5, 2.0).unwrap(), 0.5);
        // the echo parses back to the same config
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        let unsorted = r#"
            [flux.profile]
            kind = "quadratic"
            [flux.transform]
            kind = "shift"
            breakpoints = [2.0, 1.0]
            values = [0.0, 1.0, 2.0]
            [domain]
            x_left = 0.0
            x_right = 3.0
            [run]
            m_cells = 10
            t_final = 1.0
            [initial_data]
            constant = 0.0
        "#;
        assert!(matches!(RunConfig::from_toml(unsorted).unwrap().resolve(), Err(Error::Config(_))));
        let one_cell = r#"
            [flux]
            builtin = "paper-ex1"
            [run]
            m_cells = 1
            reference = "paper-ex1"
        "#;
        assert!(RunConfig::from_toml(one_cell).unwrap().resolve().is_err());
        assert!(RunConfig::from_toml("[flux]\nbogus = 1\n[run]\nm_cells = 4").is_err());
    }
}

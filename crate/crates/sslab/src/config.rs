//! Strict TOML run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sslab_core::dressing_solver::EvaluationGrid;
use sslab_core::ellipse_gas::GasConfig;
use sslab_core::numerics::C64;
use sslab_core::spectral_model::{
    AnalyticDensity, BreatherDatum, DomainDescriptor, EllipseDomain, QuadratureDomain,
    SampleScheme, SolitonDatum, SpectralData,
};

use crate::Experiment;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Validation(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Quadrature,
    Ellipse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub kind: DomainKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d0: Option<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d1: Option<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta2: Option<f64>,
    pub rho: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySection {
    #[serde(default)]
    pub w1: Vec<C64>,
    #[serde(default)]
    pub w2: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    #[serde(rename = "N1", default)]
    pub n1: usize,
    #[serde(rename = "N2")]
    pub n2: usize,
    /// Sample sizes for convergence studies; defaults to [N2].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    pub scheme: SampleScheme,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonEntry {
    pub kappa: C64,
    pub h: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreatherEntry {
    pub z: C64,
    pub c: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub x_step: f64,
    pub t_values: Vec<f64>,
}

impl GridSection {
    pub fn evaluation_grid(&self) -> EvaluationGrid {
        EvaluationGrid::uniform_x(self.x_min, self.x_max, self.x_step, self.t_values.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg_path: Option<PathBuf>,
}

/// Finite-difference check of the PDE: residual at `step` and `2·step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSection {
    pub t0: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub varpi: Vec<f64>,
    #[serde(default = "default_model_samples")]
    pub samples: usize,
}

fn default_model_samples() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GfunSection {
    /// (x, t) pairs for the boundary-relation suite.
    pub points: Vec<[f64; 2]>,
    /// (x, t) pairs for the lens sign check.
    #[serde(default)]
    pub lens_points: Vec<[f64; 2]>,
    #[serde(default = "default_offsets")]
    pub offsets: Vec<f64>,
}

fn default_offsets() -> Vec<f64> {
    vec![0.05, 0.1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeftTailSection {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

/// A parsed and validated run configuration. Output paths are kept as
/// written; they resolve against the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub solitons: Vec<SolitonEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub breathers: Vec<BreatherEntry>,
    pub grid: GridSection,
    pub output: OutputSection,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pde: Option<PdeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gfun: Option<GfunSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_tail: Option<LeftTailSection>,
}

const TOP_KEYS: &[&str] = &[
    "experiment",
    "domain",
    "density",
    "sample",
    "solitons",
    "breathers",
    "grid",
    "output",
    "tolerances",
    "pde",
    "model",
    "gfun",
    "left_tail",
];

fn section_keys(section: &str) -> Option<&'static [&'static str]> {
    Some(match section {
        "domain" => &["kind", "d0", "d1", "m", "eta1", "eta2", "rho"],
        "density" => &["w1", "w2"],
        "sample" => &["N1", "N2", "sizes", "scheme", "seed"],
        "solitons" => &["kappa", "h"],
        "breathers" => &["z", "c"],
        "grid" => &["x_min", "x_max", "x_step", "t_values"],
        "output" => &["csv_path", "json_path", "svg_path"],
        "pde" => &["t0", "x_min", "x_max", "step"],
        "model" => &["varpi", "samples"],
        "gfun" => &["points", "lens_points", "offsets"],
        "left_tail" => &["x_min", "x_max", "points"],
        _ => return None,
    })
}

/// Closest allowed key, if any is plausibly a misspelling.
pub fn suggest<'a>(key: &str, allowed: &[&'a str]) -> Option<&'a str> {
    allowed
        .iter()
        .map(|k| (strsim::damerau_levenshtein(key, k), *k))
        .filter(|(d, k)| *d <= 2.max(k.len() / 3))
        .min_by_key(|(d, _)| *d)
        .map(|(_, k)| k)
}

fn unknown_key_message(key: &str, allowed: &[&str]) -> String {
    match suggest(key, allowed) {
        Some(s) => format!("unknown key `{key}`; did you mean `{s}`?"),
        None => format!(
            "unknown key `{key}`; expected one of {}",
            allowed.join(", ")
        ),
    }
}

/// Line and column (1-based) of the first line defining `key`, searching
/// after the header of `section` when given.
fn locate(src: &str, section: Option<&str>, key: &str) -> (usize, usize) {
    let mut in_section = section.is_none();
    for (i, line) in src.lines().enumerate() {
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();
        if trimmed.starts_with('[') {
            let name = trimmed
                .trim_start_matches('[')
                .split(']')
                .next()
                .unwrap_or("")
                .trim();
            if section.is_none() && name == key {
                return (i + 1, indent + 1);
            }
            in_section = section.is_none_or(|s| name == s);
            continue;
        }
        if in_section {
            if let Some(rest) = trimmed.strip_prefix(key) {
                let next = rest.trim_start();
                if next.starts_with('=') || next.starts_with('.') {
                    return (i + 1, indent + 1);
                }
            }
        }
    }
    (1, 1)
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn check_keys(src: &str, path: &str, table: &toml::Table) -> Result<(), ConfigError> {
    let err = |section: Option<&str>, key: &str, allowed: &[&str]| {
        let (line, column) = locate(src, section, key);
        ConfigError::Parse {
            path: path.to_string(),
            line,
            column,
            message: unknown_key_message(key, allowed),
        }
    };
    for (key, value) in table {
        if !TOP_KEYS.contains(&key.as_str()) {
            return Err(err(None, key, TOP_KEYS));
        }
        let Some(allowed) = section_keys(key) else {
            continue;
        };
        let entries: Vec<&toml::Table> = match value {
            toml::Value::Table(t) => vec![t],
            toml::Value::Array(items) => items.iter().filter_map(|v| v.as_table()).collect(),
            _ => continue,
        };
        for t in entries {
            for inner in t.keys() {
                if !allowed.contains(&inner.as_str()) {
                    return Err(err(Some(key), inner, allowed));
                }
            }
        }
    }
    Ok(())
}

/// Parses and validates configuration text. `path` is used in messages.
pub fn parse_config_str(src: &str, path: &str) -> Result<RunConfig, ConfigError> {
    let parse_err = |e: toml::de::Error| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(src, s.start));
        ConfigError::Parse {
            path: path.to_string(),
            line,
            column,
            message: e.message().to_string(),
        }
    };
    let table: toml::Table = toml::from_str(src).map_err(parse_err)?;
    check_keys(src, path, &table)?;
    let cfg: RunConfig = toml::from_str(src).map_err(parse_err)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let src = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config_str(&src, &path.display().to_string())
}

fn finite(name: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite")))
    }
}

impl RunConfig {
    /// Experiment-independent invariants.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        for (name, v) in [
            ("grid.x_min", g.x_min),
            ("grid.x_max", g.x_max),
            ("grid.x_step", g.x_step),
        ] {
            finite(name, v)?;
        }
        if !(g.x_step > 0.0) {
            return Err(invalid("grid.x_step > 0 required"));
        }
        if !(g.x_max >= g.x_min) {
            return Err(invalid("grid.x_min <= grid.x_max required"));
        }
        if (g.x_max - g.x_min) / g.x_step > 1e7 {
            return Err(invalid("grid has more than 1e7 x values"));
        }
        if g.t_values.is_empty() {
            return Err(invalid("grid.t_values must be nonempty"));
        }
        for t in &g.t_values {
            finite("grid.t_values", *t)?;
        }
        if let Some(d) = &self.domain {
            self.domain_descriptor_of(d)?;
        }
        if let Some(s) = &self.sample {
            if s.n1 + s.n2 == 0 {
                return Err(invalid("sample: N1 + N2 >= 1 required"));
            }
            if s.sizes
                .as_ref()
                .is_some_and(|v| v.is_empty() || v.contains(&0))
            {
                return Err(invalid("sample.sizes must be nonempty and positive"));
            }
        }
        if let Some(p) = &self.pde {
            if !(p.step > 0.0 && p.x_max - p.x_min >= 8.0 * p.step) {
                return Err(invalid(
                    "pde: step > 0 and x_max - x_min >= 8 step required",
                ));
            }
        }
        if let Some(m) = &self.model {
            if m.varpi.is_empty() || m.samples == 0 {
                return Err(invalid(
                    "model.varpi must be nonempty and model.samples positive",
                ));
            }
        }
        if let Some(l) = &self.left_tail {
            if !(l.x_min < l.x_max && l.x_max <= -5.0) || l.points < 2 {
                return Err(invalid(
                    "left_tail: x_min < x_max <= -5 and points >= 2 required",
                ));
            }
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite()) {
                return Err(invalid(format!("tolerance {k} must be finite")));
            }
        }
        Ok(())
    }

    fn domain_descriptor_of(&self, d: &DomainSection) -> Result<DomainDescriptor, ConfigError> {
        match d.kind {
            DomainKind::Quadrature => {
                if d.eta1.is_some() || d.eta2.is_some() {
                    return Err(invalid(
                        "domain: eta1/eta2 apply to kind = \"ellipse\" only",
                    ));
                }
                let (Some(d0), Some(d1), Some(m)) = (d.d0, d.d1, d.m) else {
                    return Err(invalid("domain: quadrature needs d0, d1, rho and m"));
                };
                QuadratureDomain::new(d0, d1, d.rho, m)
                    .map(DomainDescriptor::Quadrature)
                    .map_err(|e| invalid(format!("domain: {e}")))
            }
            DomainKind::Ellipse => {
                if d.d0.is_some() || d.d1.is_some() || d.m.is_some() {
                    return Err(invalid(
                        "domain: d0/d1/m apply to kind = \"quadrature\" only",
                    ));
                }
                let (Some(e1), Some(e2)) = (d.eta1, d.eta2) else {
                    return Err(invalid("domain: ellipse needs eta1, eta2 and rho"));
                };
                EllipseDomain::new(e1, e2, d.rho)
                    .map(DomainDescriptor::Ellipse)
                    .map_err(|e| invalid(format!("domain: {e}")))
            }
        }
    }

    pub fn domain_descriptor(&self) -> Result<DomainDescriptor, ConfigError> {
        let d = self
            .domain
            .as_ref()
            .ok_or_else(|| invalid("missing [domain] section"))?;
        self.domain_descriptor_of(d)
    }

    pub fn quadrature_domain(&self) -> Result<QuadratureDomain, ConfigError> {
        match self.domain_descriptor()? {
            DomainDescriptor::Quadrature(q) => Ok(q),
            DomainDescriptor::Ellipse(_) => Err(invalid(
                "this experiment needs domain.kind = \"quadrature\"",
            )),
        }
    }

    pub fn ellipse_domain(&self) -> Result<EllipseDomain, ConfigError> {
        match self.domain_descriptor()? {
            DomainDescriptor::Ellipse(e) => Ok(e),
            DomainDescriptor::Quadrature(_) => {
                Err(invalid("this experiment needs domain.kind = \"ellipse\""))
            }
        }
    }

    pub fn densities(&self) -> Result<(AnalyticDensity, AnalyticDensity), ConfigError> {
        let d = self
            .density
            .as_ref()
            .ok_or_else(|| invalid("missing [density] section"))?;
        Ok((
            AnalyticDensity::new(d.w1.clone()),
            AnalyticDensity::new(d.w2.clone()),
        ))
    }

    pub fn gas_config(&self) -> Result<GasConfig, ConfigError> {
        let (w1, w2) = self.densities()?;
        GasConfig::new(self.ellipse_domain()?, w1, w2).map_err(|e| invalid(format!("density: {e}")))
    }

    pub fn sample_section(&self) -> Result<&SampleSection, ConfigError> {
        self.sample
            .as_ref()
            .ok_or_else(|| invalid("missing [sample] section"))
    }

    pub fn spectral_data(&self) -> Result<SpectralData, ConfigError> {
        if self.solitons.is_empty() && self.breathers.is_empty() {
            return Err(invalid(
                "need at least one [[solitons]] or [[breathers]] entry",
            ));
        }
        let solitons = self
            .solitons
            .iter()
            .map(|s| SolitonDatum::new(s.kappa, s.h))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid(format!("solitons: {e}")))?;
        let breathers = self
            .breathers
            .iter()
            .map(|b| BreatherDatum::new(b.z, b.c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid(format!("breathers: {e}")))?;
        SpectralData::new(solitons, breathers).map_err(|e| invalid(e.to_string()))
    }

    /// Experiment defaults overlaid with the configured overrides. Unknown
    /// override names are rejected.
    pub fn resolved_tolerances(
        &self,
        defaults: &[(&str, f64)],
    ) -> Result<BTreeMap<String, f64>, ConfigError> {
        let names: Vec<&str> = defaults.iter().map(|(k, _)| *k).collect();
        let mut out: BTreeMap<String, f64> =
            defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in &self.tolerances {
            if !names.contains(&k.as_str()) {
                return Err(invalid(format!(
                    "tolerances: {}",
                    unknown_key_message(k, &names)
                )));
            }
            out.insert(k.clone(), *v);
        }
        Ok(out)
    }
}

/// Output locations resolved against the config directory.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub svg: Option<PathBuf>,
}

impl OutputPaths {
    pub fn resolve(
        cfg: &RunConfig,
        base: &Path,
        plot_override: Option<&Path>,
    ) -> Result<Self, ConfigError> {
        let join = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let out = Self {
            csv: join(&cfg.output.csv_path),
            json: join(&cfg.output.json_path),
            svg: plot_override
                .map(Path::to_path_buf)
                .or_else(|| cfg.output.svg_path.as_deref().map(join)),
        };
        for p in [Some(&out.csv), Some(&out.json), out.svg.as_ref()]
            .into_iter()
            .flatten()
        {
            let parent = p
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            if !parent.is_dir() {
                return Err(invalid(format!(
                    "output directory {} does not exist",
                    parent.display()
                )));
            }
        }
        Ok(out)
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::Quadrature => "quadrature",
            DomainKind::Ellipse => "ellipse",
        })
    }
}

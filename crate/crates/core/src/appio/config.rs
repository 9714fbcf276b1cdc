//! Run configuration: a flat `key = value` text with `[section]` headers.
//!
//! Grammar, one construct per line:
//!
//! ```text
//! line    := blank | comment | header | entry
//! comment := '#' anything
//! header  := '[' name ']'
//! entry   := ident '=' value
//! name    := ident ('.' ident)*
//! ident   := [A-Za-z0-9_-]+
//! ```
//!
//! The full key of an entry is `section.ident`. A key may appear once.
//! Values are the trimmed remainder of the line: numbers use Rust float
//! syntax, lists are comma-separated, probe points are `x y` pairs
//! separated by `;`. Relative paths resolve against the config file's
//! directory. Unknown keys are rejected so that typos surface.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::tables::{load_curve_csv, load_surface_csv, TableError};
use crate::domain::Side;
use crate::materials::{
    KiesslParams, KunzelParams, LinearParams, Material, MonotoneCurve, Surface2,
};
use crate::stepper::Strategy;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{key}: {message}")]
    Validation { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Validation {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Key named by a validation error.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Validation { key, .. } => Some(key),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshConfig {
    pub h_target: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeConfig {
    pub h_t: f64,
    pub t_end: f64,
    pub strategy: Strategy,
    pub eps_fp: f64,
    pub k_max: usize,
    pub solver_tol: f64,
    pub solver_max_iter: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerConfig {
    pub name: String,
    /// `[x0, y0, x1, y1]`
    pub rect: [f64; 4],
    pub material: String,
    /// Initial `(θ, m)`.
    pub initial: [f64; 2],
    /// Constant volumetric source.
    pub source: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Linear,
    Kiessl,
    Kunzel,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Kiessl => "kiessl",
            ModelKind::Kunzel => "kunzel",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [ModelKind::Linear, ModelKind::Kiessl, ModelKind::Kunzel]
            .into_iter()
            .find(|m| m.name() == s)
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            ModelKind::Linear => &["beta", "kappa", "nu"],
            ModelKind::Kiessl => &[
                "rho0", "c0", "rho_w", "c_w", "porosity", "latent_heat", "alpha", "f", "g",
                "rho_ps", "conductivity", "d_w", "d_phi", "d_theta",
            ],
            ModelKind::Kunzel => &[
                "rho0", "c0", "rho_w", "c_w", "latent_heat", "mu", "alpha", "storage",
                "saturation_pressure", "vapour_diffusion", "conductivity", "liquid_conduction",
            ],
        }
    }
}

/// Material section; values are kept as written and interpreted by
/// [`MaterialConfig::build`].
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialConfig {
    pub name: String,
    pub model: ModelKind,
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Forcing {
    Climate(PathBuf),
    Constant([f64; 2]),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryConfig {
    pub side: Side,
    /// Newton coefficients; the adjacent layer's material value when absent.
    pub alpha: Option<[f64; 2]>,
    pub forcing: Forcing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub snapshots: Vec<f64>,
    pub probes: Vec<[f64; 2]>,
    pub vtk: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckConfig {
    pub theta: Option<[f64; 2]>,
    pub m: Option<[f64; 2]>,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MmsConfig {
    pub case: String,
    pub h_list: Vec<f64>,
    pub ht_list: Vec<f64>,
}

pub const MMS_CASES: [&str; 4] = ["constant", "linear_x", "two_layer_spatial", "two_layer_temporal"];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
    pub mesh: Option<MeshConfig>,
    pub time: Option<TimeConfig>,
    pub layers: Vec<LayerConfig>,
    pub materials: Vec<MaterialConfig>,
    pub boundaries: Vec<BoundaryConfig>,
    pub output: OutputConfig,
    pub check: CheckConfig,
    pub mms: Option<MmsConfig>,
}

impl RunConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn material(&self, name: &str) -> Option<&MaterialConfig> {
        self.materials.iter().find(|m| m.name == name)
    }

    pub fn boundary(&self, side: Side) -> Option<&BoundaryConfig> {
        self.boundaries.iter().find(|b| b.side == side)
    }
}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
    used: bool,
}

/// Entries by full key, plus section names in order of appearance.
struct Raw {
    entries: BTreeMap<String, Entry>,
    sections: Vec<String>,
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

fn lex(text: &str) -> Result<Raw, ConfigError> {
    let mut raw = Raw {
        entries: BTreeMap::new(),
        sections: Vec::new(),
    };
    let mut section = String::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let l = line.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some(rest) = l.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                line: line_no,
                message: "section header must end with ']'".into(),
            })?;
            let name = name.trim();
            if !name.split('.').all(is_ident) {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("invalid section name '{name}'"),
                });
            }
            if raw.sections.iter().any(|s| s == name) {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("section [{name}] appears twice"),
                });
            }
            section = name.to_owned();
            raw.sections.push(section.clone());
            continue;
        }
        let (k, v) = l.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: line_no,
            message: "expected 'key = value'".into(),
        })?;
        let k = k.trim();
        if !is_ident(k) {
            return Err(ConfigError::Parse {
                line: line_no,
                message: format!("invalid key '{k}'"),
            });
        }
        let full = if section.is_empty() {
            k.to_owned()
        } else {
            format!("{section}.{k}")
        };
        let entry = Entry {
            value: v.trim().to_owned(),
            line: line_no,
            used: false,
        };
        if raw.entries.insert(full.clone(), entry).is_some() {
            return Err(ConfigError::Parse {
                line: line_no,
                message: format!("key '{full}' set twice"),
            });
        }
    }
    Ok(raw)
}

// ---------------------------------------------------------------------------
// Typed access

impl Raw {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            e.value.clone()
        })
    }

    fn require(&mut self, key: &str) -> Result<String, ConfigError> {
        self.take(key)
            .ok_or_else(|| ConfigError::invalid(key, "required key is missing"))
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.take(key).map(|v| parse_number(key, &v)).transpose()
    }

    fn require_number(&mut self, key: &str) -> Result<f64, ConfigError> {
        let v = self.require(key)?;
        parse_number(key, &v)
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.take(key).map(|v| parse_list(key, &v)).transpose()
    }

    fn pair(&mut self, key: &str) -> Result<Option<[f64; 2]>, ConfigError> {
        self.list(key)?.map(|v| fixed::<2>(key, v)).transpose()
    }

    fn count(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.take(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| ConfigError::invalid(key, format!("'{v}' is not a non-negative integer")))
            })
            .transpose()
    }

    fn subsections(&self, prefix: &str) -> Vec<String> {
        self.sections
            .iter()
            .filter_map(|s| s.strip_prefix(prefix).and_then(|r| r.strip_prefix('.')))
            .map(str::to_owned)
            .collect()
    }
}

fn parse_number(key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ConfigError::invalid(key, format!("'{v}' is not a finite number"))),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|p| parse_number(key, p.trim())).collect()
}

fn fixed<const N: usize>(key: &str, v: Vec<f64>) -> Result<[f64; N], ConfigError> {
    let n = v.len();
    v.try_into()
        .map_err(|_| ConfigError::invalid(key, format!("expected {N} numbers, found {n}")))
}

fn parse_probes(key: &str, v: &str) -> Result<Vec<[f64; 2]>, ConfigError> {
    v.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let xy: Vec<f64> = p
                .split_whitespace()
                .map(|c| parse_number(key, c))
                .collect::<Result<_, _>>()?;
            fixed::<2>(key, xy)
        })
        .collect()
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::invalid(key, format!("must be positive, got {v}")))
    }
}

// ---------------------------------------------------------------------------
// Parsing

/// Parses configuration text; `base_dir` anchors relative paths.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig, ConfigError> {
    let mut raw = lex(text)?;

    let mesh = match raw.number("mesh.h_target")? {
        Some(h) => Some(MeshConfig {
            h_target: positive("mesh.h_target", h)?,
        }),
        None => None,
    };

    let time = if raw.sections.iter().any(|s| s == "time") {
        let h_t = positive("time.h_t", raw.require_number("time.h_t")?)?;
        let t_end = raw.require_number("time.t_end")?;
        if t_end < 0.0 {
            return Err(ConfigError::invalid("time.t_end", "must be non-negative"));
        }
        let strategy = match raw.take("time.strategy") {
            None => Strategy::SemiImplicit,
            Some(s) => Strategy::parse(&s).ok_or_else(|| {
                ConfigError::invalid("time.strategy", format!("'{s}' is not semi_implicit or picard"))
            })?,
        };
        let eps_fp = positive("time.eps_fp", raw.number("time.eps_fp")?.unwrap_or(1e-8))?;
        let k_max = raw.count("time.k_max")?.unwrap_or(50);
        let solver_tol =
            positive("time.solver_tol", raw.number("time.solver_tol")?.unwrap_or(1e-10))?;
        let solver_max_iter = raw.count("time.solver_max_iter")?;
        Some(TimeConfig {
            h_t,
            t_end,
            strategy,
            eps_fp,
            k_max,
            solver_tol,
            solver_max_iter,
        })
    } else {
        None
    };

    let mut layers = Vec::new();
    for name in raw.subsections("layer") {
        let p = format!("layer.{name}");
        let mut rect = [0.0; 4];
        for (slot, k) in rect.iter_mut().zip(["x0", "y0", "x1", "y1"]) {
            *slot = raw.require_number(&format!("{p}.{k}"))?;
        }
        let material = raw.require(&format!("{p}.material"))?;
        let initial = raw
            .pair(&format!("{p}.initial"))?
            .ok_or_else(|| ConfigError::invalid(format!("{p}.initial"), "required key is missing"))?;
        let source = raw.pair(&format!("{p}.source"))?.unwrap_or([0.0, 0.0]);
        layers.push(LayerConfig {
            name,
            rect,
            material,
            initial,
            source,
        });
    }

    let mut materials = Vec::new();
    for name in raw.subsections("material") {
        let p = format!("material.{name}");
        let model_s = raw.require(&format!("{p}.model"))?;
        let model = ModelKind::parse(&model_s).ok_or_else(|| {
            ConfigError::invalid(
                format!("{p}.model"),
                format!("'{model_s}' is not linear, kiessl or kunzel"),
            )
        })?;
        let mut params = BTreeMap::new();
        for &k in model.keys() {
            if let Some(v) = raw.take(&format!("{p}.{k}")) {
                params.insert(k.to_owned(), v);
            }
        }
        materials.push(MaterialConfig {
            name,
            model,
            params,
        });
    }

    let mut boundaries = Vec::new();
    for name in raw.subsections("boundary") {
        let p = format!("boundary.{name}");
        let side = Side::parse(&name).ok_or_else(|| {
            ConfigError::invalid(&p, "boundary sections are named south, north, west or east")
        })?;
        let alpha = raw.pair(&format!("{p}.alpha"))?;
        if let Some(a) = alpha {
            if a.iter().any(|v| *v < 0.0) {
                return Err(ConfigError::invalid(format!("{p}.alpha"), "must be non-negative"));
            }
        }
        let climate = raw.take(&format!("{p}.climate"));
        let sigma = raw.pair(&format!("{p}.sigma"))?;
        let forcing = match (climate, sigma) {
            (Some(c), None) => Forcing::Climate(PathBuf::from(c)),
            (None, Some(s)) => Forcing::Constant(s),
            (Some(_), Some(_)) => {
                return Err(ConfigError::invalid(&p, "give either climate or sigma, not both"))
            }
            (None, None) => {
                return Err(ConfigError::invalid(format!("{p}.climate"), "required key is missing"))
            }
        };
        boundaries.push(BoundaryConfig {
            side,
            alpha,
            forcing,
        });
    }

    let default_snapshots = time.as_ref().map_or_else(Vec::new, |t| vec![t.t_end]);
    let output = OutputConfig {
        dir: PathBuf::from(raw.take("output.dir").unwrap_or_else(|| "out".into())),
        snapshots: raw.list("output.snapshots")?.unwrap_or(default_snapshots),
        probes: match raw.take("output.probes") {
            Some(v) => parse_probes("output.probes", &v)?,
            None => Vec::new(),
        },
        vtk: match raw.take("output.vtk").as_deref() {
            None | Some("true") => true,
            Some("false") => false,
            Some(v) => return Err(ConfigError::invalid("output.vtk", format!("'{v}' is not true or false"))),
        },
    };

    let check = CheckConfig {
        theta: raw.pair("check.theta")?,
        m: raw.pair("check.m")?,
        n: raw.count("check.n")?.unwrap_or(11),
    };
    if check.n < 2 {
        return Err(ConfigError::invalid("check.n", "need at least 2 samples per axis"));
    }

    let mms = match raw.take("mms.case") {
        Some(case) => {
            if !MMS_CASES.contains(&case.as_str()) {
                return Err(ConfigError::invalid(
                    "mms.case",
                    format!("unknown case '{case}', expected one of {}", MMS_CASES.join(", ")),
                ));
            }
            let h_list = raw.list("mms.h_list")?.unwrap_or_else(|| vec![0.125, 0.0625, 0.03125]);
            let ht_list = raw.list("mms.ht_list")?.unwrap_or_default();
            for (key, l) in [("mms.h_list", &h_list), ("mms.ht_list", &ht_list)] {
                for &v in l {
                    positive(key, v)?;
                }
            }
            Some(MmsConfig {
                case,
                h_list,
                ht_list,
            })
        }
        None => None,
    };

    if let Some((key, e)) = raw.entries.iter().find(|(_, e)| !e.used) {
        return Err(ConfigError::Parse {
            line: e.line,
            message: format!("unknown key '{key}'"),
        });
    }

    let cfg = RunConfig {
        base_dir: base_dir.to_path_buf(),
        mesh,
        time,
        layers,
        materials,
        boundaries,
        output,
        check,
        mms,
    };
    validate(&cfg)?;
    Ok(cfg)
}

/// Cross-field checks; material tables are loaded to prove they parse.
fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    if cfg.layers.is_empty() && cfg.mms.is_none() {
        return Err(ConfigError::invalid("layer", "at least one [layer.<name>] section is required"));
    }
    if !cfg.layers.is_empty() {
        if cfg.mesh.is_none() {
            return Err(ConfigError::invalid("mesh.h_target", "required key is missing"));
        }
        if cfg.time.is_none() {
            return Err(ConfigError::invalid("time", "a [time] section is required"));
        }
    }
    for l in &cfg.layers {
        if cfg.material(&l.material).is_none() {
            return Err(ConfigError::invalid(
                format!("layer.{}.material", l.name),
                format!("no [material.{}] section", l.material),
            ));
        }
    }
    for m in &cfg.materials {
        m.build(cfg)?;
    }
    for b in &cfg.boundaries {
        if let Forcing::Climate(p) = &b.forcing {
            let full = cfg.resolve(p);
            if !full.is_file() {
                return Err(ConfigError::invalid(
                    format!("boundary.{}.climate", b.side),
                    format!("file {} does not exist", full.display()),
                ));
            }
        }
    }
    if let Some(t) = &cfg.time {
        for &s in &cfg.output.snapshots {
            let k = (s / t.h_t).round();
            if s < 0.0 || s > t.t_end * (1.0 + 1e-12) || (k * t.h_t - s).abs() > 1e-9 * t.h_t.max(s) {
                return Err(ConfigError::invalid(
                    "output.snapshots",
                    format!("{s} is not a multiple of h_t within [0, t_end]"),
                ));
            }
        }
    }
    Ok(())
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base)
}

// ---------------------------------------------------------------------------
// Materials

const CONSTANT_M_RANGE: [f64; 2] = [0.0, 1e12];
const CONSTANT_THETA_RANGE: [f64; 2] = [0.0, 1e4];

impl MaterialConfig {
    fn key(&self, k: &str) -> String {
        format!("material.{}.{k}", self.name)
    }

    fn raw(&self, k: &str) -> Result<&str, ConfigError> {
        self.params
            .get(k)
            .map(String::as_str)
            .ok_or_else(|| ConfigError::invalid(self.key(k), "required key is missing"))
    }

    fn number(&self, k: &str) -> Result<f64, ConfigError> {
        parse_number(&self.key(k), self.raw(k)?)
    }

    fn numbers<const N: usize>(&self, k: &str) -> Result<[f64; N], ConfigError> {
        let key = self.key(k);
        fixed::<N>(&key, parse_list(&key, self.raw(k)?)?)
    }

    fn table_error(&self, k: &str, e: TableError) -> ConfigError {
        ConfigError::invalid(self.key(k), e.to_string())
    }

    fn curve(&self, cfg: &RunConfig, k: &str) -> Result<MonotoneCurve, ConfigError> {
        let path = cfg.resolve(Path::new(self.raw(k)?));
        load_curve_csv(&path).map_err(|e| self.table_error(k, e))
    }

    /// A surface file, or a bare number for a constant surface.
    fn surface(&self, cfg: &RunConfig, k: &str) -> Result<Surface2, ConfigError> {
        let v = self.raw(k)?;
        if let Ok(c) = v.parse::<f64>() {
            return Surface2::constant(CONSTANT_M_RANGE, CONSTANT_THETA_RANGE, c)
                .map_err(|e| ConfigError::invalid(self.key(k), e.to_string()));
        }
        let path = cfg.resolve(Path::new(v));
        load_surface_csv(&path).map_err(|e| self.table_error(k, e))
    }

    /// Loads tables and validates parameters.
    pub fn build(&self, cfg: &RunConfig) -> Result<Material, ConfigError> {
        let material = match self.model {
            ModelKind::Linear => {
                let b = self.numbers::<4>("beta")?;
                let k = self.numbers::<4>("kappa")?;
                let nu = if self.params.contains_key("nu") {
                    self.numbers::<2>("nu")?
                } else {
                    [0.0, 0.0]
                };
                Material::Linear(LinearParams {
                    beta: [[b[0], b[1]], [b[2], b[3]]],
                    kappa: [[k[0], k[1]], [k[2], k[3]]],
                    nu,
                })
            }
            ModelKind::Kiessl => Material::Kiessl(KiesslParams {
                rho0: self.number("rho0")?,
                c0: self.number("c0")?,
                rho_w: self.number("rho_w")?,
                c_w: self.number("c_w")?,
                porosity: self.number("porosity")?,
                latent_heat: self.number("latent_heat")?,
                alpha: self.numbers::<2>("alpha")?,
                f: self.curve(cfg, "f")?,
                g: self.curve(cfg, "g")?,
                rho_ps: self.curve(cfg, "rho_ps")?,
                conductivity: self.surface(cfg, "conductivity")?,
                d_w: self.surface(cfg, "d_w")?,
                d_phi: self.surface(cfg, "d_phi")?,
                d_theta: self.surface(cfg, "d_theta")?,
            }),
            ModelKind::Kunzel => Material::Kunzel(KunzelParams {
                rho0: self.number("rho0")?,
                c0: self.number("c0")?,
                rho_w: self.number("rho_w")?,
                c_w: self.number("c_w")?,
                latent_heat: self.number("latent_heat")?,
                mu: self.number("mu")?,
                alpha: self.numbers::<2>("alpha")?,
                storage: self.curve(cfg, "storage")?,
                saturation_pressure: self.curve(cfg, "saturation_pressure")?,
                vapour_diffusion: self.curve(cfg, "vapour_diffusion")?,
                conductivity: self.surface(cfg, "conductivity")?,
                liquid_conduction: self.surface(cfg, "liquid_conduction")?,
            }),
        };
        material
            .validate()
            .map_err(|e| ConfigError::invalid(format!("material.{}", self.name), e.to_string()))?;
        Ok(material)
    }
}

// ---------------------------------------------------------------------------
// Serialization

fn list(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Text that [`parse_config`] maps back to an identical structure.
pub fn config_to_string(cfg: &RunConfig) -> String {
    let mut s = String::new();
    if let Some(m) = &cfg.mesh {
        let _ = writeln!(s, "[mesh]\nh_target = {}\n", m.h_target);
    }
    if let Some(t) = &cfg.time {
        let _ = writeln!(s, "[time]");
        let _ = writeln!(s, "h_t = {}", t.h_t);
        let _ = writeln!(s, "t_end = {}", t.t_end);
        let _ = writeln!(s, "strategy = {}", t.strategy.name());
        let _ = writeln!(s, "eps_fp = {}", t.eps_fp);
        let _ = writeln!(s, "k_max = {}", t.k_max);
        let _ = writeln!(s, "solver_tol = {}", t.solver_tol);
        if let Some(n) = t.solver_max_iter {
            let _ = writeln!(s, "solver_max_iter = {n}");
        }
        s.push('\n');
    }
    for l in &cfg.layers {
        let _ = writeln!(s, "[layer.{}]", l.name);
        for (k, v) in ["x0", "y0", "x1", "y1"].iter().zip(l.rect) {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "material = {}", l.material);
        let _ = writeln!(s, "initial = {}", list(&l.initial));
        let _ = writeln!(s, "source = {}\n", list(&l.source));
    }
    for m in &cfg.materials {
        let _ = writeln!(s, "[material.{}]", m.name);
        let _ = writeln!(s, "model = {}", m.model.name());
        for (k, v) in &m.params {
            let _ = writeln!(s, "{k} = {v}");
        }
        s.push('\n');
    }
    for b in &cfg.boundaries {
        let _ = writeln!(s, "[boundary.{}]", b.side);
        if let Some(a) = b.alpha {
            let _ = writeln!(s, "alpha = {}", list(&a));
        }
        match &b.forcing {
            Forcing::Climate(p) => {
                let _ = writeln!(s, "climate = {}", path_str(p));
            }
            Forcing::Constant(v) => {
                let _ = writeln!(s, "sigma = {}", list(v));
            }
        }
        s.push('\n');
    }
    let o = &cfg.output;
    let _ = writeln!(s, "[output]");
    let _ = writeln!(s, "dir = {}", path_str(&o.dir));
    let _ = writeln!(s, "snapshots = {}", list(&o.snapshots));
    if !o.probes.is_empty() {
        let p: Vec<String> = o.probes.iter().map(|p| format!("{} {}", p[0], p[1])).collect();
        let _ = writeln!(s, "probes = {}", p.join("; "));
    }
    let _ = writeln!(s, "vtk = {}\n", o.vtk);
    let c = &cfg.check;
    let _ = writeln!(s, "[check]");
    if let Some(t) = c.theta {
        let _ = writeln!(s, "theta = {}", list(&t));
    }
    if let Some(m) = c.m {
        let _ = writeln!(s, "m = {}", list(&m));
    }
    let _ = writeln!(s, "n = {}", c.n);
    if let Some(m) = &cfg.mms {
        let _ = writeln!(s, "\n[mms]");
        let _ = writeln!(s, "case = {}", m.case);
        let _ = writeln!(s, "h_list = {}", list(&m.h_list));
        let _ = writeln!(s, "ht_list = {}", list(&m.ht_list));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[mesh]
h_target = 0.25

[time]
h_t = 0.5
t_end = 2

[layer.slab]
x0 = 0
y0 = 0
x1 = 1
y1 = 1
material = lin
initial = 1, 0.5

[material.lin]
model = linear
beta = 1, 0, 0, 1
kappa = 1, 0, 0, 1
";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL, Path::new(".")).unwrap();
        let t = c.time.as_ref().unwrap();
        assert_eq!(t.strategy, Strategy::SemiImplicit);
        assert_eq!(t.eps_fp, 1e-8);
        assert_eq!(t.k_max, 50);
        assert_eq!(c.output.snapshots, vec![2.0]);
        assert_eq!(c.layers[0].source, [0.0, 0.0]);
        assert!(c.output.vtk);
        assert_eq!(c.check.n, 11);
        assert!(matches!(c.material("lin").unwrap().build(&c).unwrap(), Material::Linear(_)));
    }

    #[test]
    fn round_trip() {
        let text = format!(
            "{MINIMAL}\n[boundary.south]\nalpha = 2, 0.5\nsigma = 290, 0.4\n[output]\nsnapshots = 0, 1, 2\nprobes = 0.5 0.5; 0 1\n"
        );
        let c = parse_config(&text, Path::new("/tmp")).unwrap();
        let again = parse_config(&config_to_string(&c), Path::new("/tmp")).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_config("[mesh]\nh_target 0.1\n", Path::new(".")).unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: 2, .. }));
        let e = parse_config(&format!("{MINIMAL}\nbogus = 1\n"), Path::new(".")).unwrap_err();
        assert!(matches!(e, ConfigError::Parse { .. }), "{e}");
        let e = parse_config("[mesh]\nh_target = 1\nh_target = 2\n", Path::new(".")).unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: 3, .. }));
    }

    #[test]
    fn missing_climate_file_names_the_key() {
        let text = format!("{MINIMAL}\n[boundary.south]\nclimate = does_not_exist.csv\n");
        let e = parse_config(&text, Path::new(".")).unwrap_err();
        assert_eq!(e.key(), Some("boundary.south.climate"));
    }

    #[test]
    fn validation_errors() {
        let bad_strategy = MINIMAL.replace("t_end = 2", "t_end = 2\nstrategy = magic");
        assert_eq!(
            parse_config(&bad_strategy, Path::new(".")).unwrap_err().key(),
            Some("time.strategy")
        );
        let bad_snap = format!("{MINIMAL}\n[output]\nsnapshots = 0.7\n");
        assert_eq!(
            parse_config(&bad_snap, Path::new(".")).unwrap_err().key(),
            Some("output.snapshots")
        );
        let bad_mat = MINIMAL.replace("material = lin", "material = nope");
        assert_eq!(
            parse_config(&bad_mat, Path::new(".")).unwrap_err().key(),
            Some("layer.slab.material")
        );
        let bad_kappa = MINIMAL.replace("kappa = 1, 0, 0, 1", "kappa = 1, 0");
        assert_eq!(
            parse_config(&bad_kappa, Path::new(".")).unwrap_err().key(),
            Some("material.lin.kappa")
        );
    }

    #[test]
    fn mms_only_config() {
        let c = parse_config("[mms]\ncase = linear_x\n", Path::new(".")).unwrap();
        assert_eq!(c.mms.unwrap().h_list.len(), 3);
        assert!(parse_config("[mms]\ncase = nope\n", Path::new(".")).is_err());
    }
}

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use pnmc_core::meridian::{CurvatureProfile, MeridianFamily};
use pnmc_core::pseudo_euclidean::{Ambient, Epsilon};
use pnmc_core::surface::ParamDomain;

use crate::error::CliError;
use crate::gridio::{read_grid, GridTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Invariants,
    Classify,
    Canonical,
    Residuals,
    Meridian,
    Reconstruct,
    Roundtrip,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Invariants => "invariants",
            Command::Classify => "classify",
            Command::Canonical => "canonical",
            Command::Residuals => "residuals",
            Command::Meridian => "meridian",
            Command::Reconstruct => "reconstruct",
            Command::Roundtrip => "roundtrip",
        }
    }

    /// Commands whose grid lives in canonical parameters and that accept field files.
    fn takes_fields(self) -> bool {
        matches!(self, Command::Residuals | Command::Reconstruct | Command::Roundtrip)
    }

    fn min_nodes(self) -> usize {
        match self {
            Command::Reconstruct => 4,
            Command::Roundtrip => 7,
            _ => 3,
        }
    }
}

/// ϰ as written in a config file: a number, a coefficient list or a preset name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KappaValue {
    Number(f64),
    List(Vec<f64>),
    Text(String),
}

/// One flat set of run parameters. Every field is optional so that a config file
/// and command-line flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub family: Option<String>,
    pub kappa: Option<KappaValue>,
    pub umin: Option<f64>,
    pub umax: Option<f64>,
    pub vmin: Option<f64>,
    pub vmax: Option<f64>,
    pub nu: Option<usize>,
    pub nv: Option<usize>,
    pub signature: Option<String>,
    pub epsilon: Option<i32>,
    pub h: Option<f64>,
    pub tol_beta: Option<f64>,
    pub fields: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }

    /// Fields set in `flags` replace those of `self`.
    pub fn overridden_by(self, flags: RunConfig) -> RunConfig {
        RunConfig {
            command: flags.command.or(self.command),
            family: flags.family.or(self.family),
            kappa: flags.kappa.or(self.kappa),
            umin: flags.umin.or(self.umin),
            umax: flags.umax.or(self.umax),
            vmin: flags.vmin.or(self.vmin),
            vmax: flags.vmax.or(self.vmax),
            nu: flags.nu.or(self.nu),
            nv: flags.nv.or(self.nv),
            signature: flags.signature.or(self.signature),
            epsilon: flags.epsilon.or(self.epsilon),
            h: flags.h.or(self.h),
            tol_beta: flags.tol_beta.or(self.tol_beta),
            fields: flags.fields.or(self.fields),
            out: flags.out.or(self.out),
        }
    }
}

pub const DEFAULT_OUT: &str = "pnmc-out";
pub const DEFAULT_TOL_BETA: f64 = 1e-6;
/// RK4 step of the directrix integration.
pub const CURVE_STEP: f64 = 1e-3;

fn parse_kappa(k: &KappaValue) -> Result<(CurvatureProfile, String), CliError> {
    let coeffs = match k {
        KappaValue::Number(c) => vec![*c],
        KappaValue::List(cs) => cs.clone(),
        KappaValue::Text(t) => match t.trim() {
            "unit" => vec![1.0],
            "sine" => return Ok((CurvatureProfile::sine(1.0, 0.3, 1.0), "sine".into())),
            other => other
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| {
                    CliError::Validation(format!(
                        "kappa '{other}' is neither a preset (unit, sine) nor a comma-separated coefficient list"
                    ))
                })?,
        },
    };
    if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
        return Err(CliError::Validation("kappa coefficients must be finite and non-empty".into()));
    }
    let text = coeffs.iter().map(|c| format!("{c:e}")).collect::<Vec<_>>().join(",");
    let profile = if coeffs.len() == 1 { CurvatureProfile::constant(coeffs[0]) } else { CurvatureProfile::polynomial(coeffs) };
    Ok((profile, text))
}

/// Where the (λ, μ, ν) fields or the surface come from.
pub enum Source {
    Family { family: MeridianFamily, kappa: CurvatureProfile, kappa_text: String },
    Fields { path: PathBuf, table: GridTable },
}

/// A validated run.
pub struct Settings {
    pub command: Command,
    pub source: Source,
    pub domain: ParamDomain,
    pub ambient: Ambient,
    pub h: Option<f64>,
    pub tol_beta: f64,
    pub out: PathBuf,
}

/// Parameters echoed into every output, enough to repeat the run.
#[derive(Debug, Clone, Serialize)]
pub struct Echo {
    pub command: &'static str,
    pub family: Option<&'static str>,
    pub kappa: Option<String>,
    pub fields: Option<String>,
    pub domain: DomainEcho,
    pub ambient: &'static str,
    pub epsilon: Option<i8>,
    pub h: Option<f64>,
    pub tol_beta: f64,
    pub curve_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DomainEcho {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub n_u: usize,
    pub n_v: usize,
}

impl From<&ParamDomain> for DomainEcho {
    fn from(d: &ParamDomain) -> Self {
        DomainEcho { u_min: d.u_min, u_max: d.u_max, v_min: d.v_min, v_max: d.v_max, n_u: d.n_u, n_v: d.n_v }
    }
}

impl Settings {
    pub fn family(&self) -> Option<(MeridianFamily, &CurvatureProfile)> {
        match &self.source {
            Source::Family { family, kappa, .. } => Some((*family, kappa)),
            Source::Fields { .. } => None,
        }
    }

    pub fn echo(&self) -> Echo {
        let (family, kappa, fields) = match &self.source {
            Source::Family { family, kappa_text, .. } => (Some(family.name()), Some(kappa_text.clone()), None),
            Source::Fields { path, .. } => (None, None, Some(path.display().to_string())),
        };
        let ambient = match self.ambient {
            Ambient::Euclidean => "euclidean",
            Ambient::Minkowski(_) => "minkowski",
        };
        let curve = matches!(self.source, Source::Family { .. }) && !self.command.takes_fields();
        Echo {
            command: self.command.name(),
            family,
            kappa,
            fields,
            domain: (&self.domain).into(),
            ambient,
            epsilon: self.ambient.epsilon().map(|e| e.value() as i8),
            h: self.h,
            tol_beta: self.tol_beta,
            curve_step: curve.then_some(CURVE_STEP),
        }
    }
}

fn positive(name: &str, x: Option<f64>) -> Result<Option<f64>, CliError> {
    match x {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(CliError::Validation(format!("{name} must be positive, got {v}"))),
        _ => Ok(x),
    }
}

fn parse_epsilon(e: Option<i32>) -> Result<Option<Epsilon>, CliError> {
    e.map(|v| Epsilon::from_value(v).map_err(|_| CliError::Validation(format!("epsilon must be 1 or -1, got {v}"))))
        .transpose()
}

fn family_center(f: MeridianFamily) -> (f64, f64) {
    match f {
        MeridianFamily::Euclidean => (1.2, 0.0),
        MeridianFamily::Parabolic => (2.5, -0.5),
    }
}

/// Checks `cfg` against the preconditions of the requested command.
pub fn resolve(cfg: &RunConfig) -> Result<Settings, CliError> {
    let command = cfg.command.ok_or_else(|| CliError::Validation("no command given".into()))?;
    let h = positive("h", cfg.h)?;
    let tol_beta = positive("tol_beta", cfg.tol_beta)?.unwrap_or(DEFAULT_TOL_BETA);
    let epsilon = parse_epsilon(cfg.epsilon)?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let family = cfg
        .family
        .as_deref()
        .map(|f| f.parse::<MeridianFamily>().map_err(|e| CliError::Validation(e.to_string())))
        .transpose()?;
    if h.is_some() && command.takes_fields() {
        return Err(CliError::Validation(format!("--h does not apply to {}; the grid spacing is used", command.name())));
    }

    let source = match (family, &cfg.fields) {
        (Some(_), Some(_)) => return Err(CliError::Validation("give either a family or a fields file, not both".into())),
        (None, None) => return Err(CliError::Validation("a family (or, for field commands, a fields file) is required".into())),
        (None, Some(path)) => {
            if !command.takes_fields() {
                return Err(CliError::Validation(format!("{} needs a family, not a fields file", command.name())));
            }
            if cfg.kappa.is_some() {
                return Err(CliError::Validation("kappa does not apply to a fields file".into()));
            }
            let table = read_grid(path)?;
            for col in ["lambda", "mu", "nu"] {
                if !table.columns.iter().any(|c| c == col) {
                    return Err(CliError::Validation(format!("{} has no '{col}' column", path.display())));
                }
            }
            Source::Fields { path: path.clone(), table }
        }
        (Some(family), None) => {
            let (kappa, kappa_text) = parse_kappa(cfg.kappa.as_ref().unwrap_or(&KappaValue::Text("unit".into())))?;
            Source::Family { family, kappa, kappa_text }
        }
    };

    let domain = match &source {
        Source::Fields { table, .. } => {
            if [cfg.umin, cfg.umax, cfg.vmin, cfg.vmax].iter().any(Option::is_some) || cfg.nu.is_some() || cfg.nv.is_some() {
                return Err(CliError::Validation("the grid of a fields file cannot be overridden".into()));
            }
            table.domain
        }
        Source::Family { family, .. } => {
            let (lo, hi, n) = if command.takes_fields() {
                let (cu, cv) = family_center(*family);
                ((cu - 0.25, cv - 0.25), (cu + 0.25, cv + 0.25), 50)
            } else {
                ((0.0, 0.0), (2.0, 2.0), 41)
            };
            let d = ParamDomain {
                u_min: cfg.umin.unwrap_or(lo.0),
                u_max: cfg.umax.unwrap_or(hi.0),
                v_min: cfg.vmin.unwrap_or(lo.1),
                v_max: cfg.vmax.unwrap_or(hi.1),
                n_u: cfg.nu.unwrap_or(n),
                n_v: cfg.nv.unwrap_or(n),
            };
            d.validate().map_err(|e| CliError::Validation(e.to_string()))?;
            if *family == MeridianFamily::Parabolic {
                if command.takes_fields() && d.u_min <= d.v_max {
                    return Err(CliError::Validation(format!(
                        "parabolic canonical grids need umin > vmax, got umin = {} and vmax = {}",
                        d.u_min, d.v_max
                    )));
                }
                if !command.takes_fields() && d.u_min <= -1.0 {
                    return Err(CliError::Validation(format!("parabolic surfaces need umin > -1, got {}", d.u_min)));
                }
            }
            d
        }
    };
    let min = command.min_nodes();
    if domain.n_u < min || domain.n_v < min {
        return Err(CliError::Validation(format!(
            "{} needs at least {min} x {min} nodes, got {} x {}",
            command.name(),
            domain.n_u,
            domain.n_v
        )));
    }
    if command == Command::Roundtrip && (domain.h_u() - domain.h_v()).abs() > 1e-9 * domain.h_u().max(domain.h_v()) {
        return Err(CliError::Validation("roundtrip needs equal grid spacings in u and v".into()));
    }

    let ambient = match (&source, cfg.signature.as_deref()) {
        (Source::Family { family, .. }, sig) => {
            if sig.is_some() {
                return Err(CliError::Validation("the signature follows from the family".into()));
            }
            match (family, epsilon) {
                (MeridianFamily::Euclidean, None) => Ambient::Euclidean,
                (MeridianFamily::Euclidean, Some(_)) => {
                    return Err(CliError::Validation("epsilon applies to Minkowski space only".into()))
                }
                (MeridianFamily::Parabolic, e) => {
                    if e.is_some() && !command.takes_fields() {
                        return Err(CliError::Validation(format!(
                            "epsilon of {} is read off the surface and cannot be set",
                            command.name()
                        )));
                    }
                    Ambient::Minkowski(e.unwrap_or(Epsilon::Spacelike))
                }
            }
        }
        (Source::Fields { .. }, Some("euclidean")) if epsilon.is_none() => Ambient::Euclidean,
        (Source::Fields { .. }, Some("minkowski")) => Ambient::Minkowski(
            epsilon.ok_or_else(|| CliError::Validation("minkowski fields need epsilon = 1 or -1".into()))?,
        ),
        (Source::Fields { .. }, Some("euclidean")) => {
            return Err(CliError::Validation("epsilon applies to Minkowski space only".into()))
        }
        (Source::Fields { .. }, Some(other)) => {
            return Err(CliError::Validation(format!("unknown signature '{other}' (euclidean or minkowski)")))
        }
        (Source::Fields { .. }, None) => {
            return Err(CliError::Validation("a fields file needs a signature (euclidean or minkowski)".into()))
        }
    };

    Ok(Settings { command, source, domain, ambient, h, tol_beta, out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win() {
        let file = RunConfig { family: Some("euclidean".into()), nu: Some(10), h: Some(1e-3), ..Default::default() };
        let flags = RunConfig { nu: Some(20), ..Default::default() };
        let m = file.overridden_by(flags);
        assert_eq!(m.nu, Some(20));
        assert_eq!(m.h, Some(1e-3));
        assert_eq!(m.family.as_deref(), Some("euclidean"));
    }

    #[test]
    fn kappa_forms() {
        let (k, _) = parse_kappa(&KappaValue::Text("1, 0.5".into())).unwrap();
        assert_eq!(k.kappa(2.0), 2.0);
        let (k, _) = parse_kappa(&KappaValue::Number(0.7)).unwrap();
        assert_eq!(k.dkappa(1.0), 0.0);
        let (k, _) = parse_kappa(&KappaValue::Text("sine".into())).unwrap();
        assert!((k.kappa(1.0) - (1.0 + 0.3 * 1f64.sin())).abs() < 1e-15);
        assert!(parse_kappa(&KappaValue::Text("wobbly".into())).is_err());
        assert!(parse_kappa(&KappaValue::List(vec![])).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let text = "command = \"classify\"\nfamily = \"parabolic\"\nkappa = [1.0, 0.2]\nnu = 12\ntol_beta = 1e-7\n";
        let c: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(c.command, Some(Command::Classify));
        assert_eq!(c.kappa, Some(KappaValue::List(vec![1.0, 0.2])));
        assert!(toml::from_str::<RunConfig>("colour = 1").is_err());
    }

    #[test]
    fn validation() {
        let base = RunConfig { command: Some(Command::Classify), family: Some("euclidean".into()), ..Default::default() };
        assert!(resolve(&base).is_ok());
        let bad = [
            RunConfig { nu: Some(2), ..base.clone() },
            RunConfig { umin: Some(3.0), ..base.clone() },
            RunConfig { h: Some(-1.0), ..base.clone() },
            RunConfig { epsilon: Some(1), ..base.clone() },
            RunConfig { family: Some("hyperbolic".into()), ..base.clone() },
            RunConfig { family: None, ..base.clone() },
            RunConfig { command: None, ..base.clone() },
            RunConfig { family: Some("parabolic".into()), umin: Some(-1.0), ..base.clone() },
            RunConfig { command: Some(Command::Residuals), family: Some("parabolic".into()), vmax: Some(3.0), ..base.clone() },
            RunConfig { command: Some(Command::Roundtrip), nv: Some(40), ..base.clone() },
        ];
        for c in bad {
            assert!(matches!(resolve(&c), Err(CliError::Validation(_))), "{c:?}");
        }
    }

    #[test]
    fn ambient_from_family() {
        let c = RunConfig { command: Some(Command::Residuals), family: Some("parabolic".into()), ..Default::default() };
        assert_eq!(resolve(&c).unwrap().ambient, Ambient::Minkowski(Epsilon::Spacelike));
        let c = RunConfig { epsilon: Some(-1), ..c };
        assert_eq!(resolve(&c).unwrap().ambient, Ambient::Minkowski(Epsilon::Timelike));
    }
}

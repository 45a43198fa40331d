use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use pnmc_core::canonical::{
    canonicity_residual, meridian_canonical_chart, reparametrize_integral, separable_factors, ReparametrizedSurface,
};
use pnmc_core::frame_invariants::{classify_pnmc, sweep_functions, ClassifyOptions};
use pnmc_core::meridian::{build_meridian, MeridianFamily, MeridianSurface};
use pnmc_core::pde::{model_solution, residual_fields, GridField, Norms};
use pnmc_core::pseudo_euclidean::Ambient;
use pnmc_core::reconstruct::{compatibility_defect, integrate_surface, roundtrip, FieldSet, FrameState, IntegrateOptions};
use pnmc_core::surface::{ParamDomain, SurfaceMap};

use crate::config::{Command, DomainEcho, Echo, Settings, Source, CURVE_STEP};
use crate::error::CliError;
use crate::gridio::{format_grid, json_text};

/// A file to be written into the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    computation: &'a str,
    data_file: &'a str,
    columns: Vec<&'a str>,
    grid: DomainEcho,
    parameters: &'a Echo,
    summary: Value,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    computation: &'a str,
    parameters: &'a Echo,
    #[serde(flatten)]
    result: T,
}

struct Outputs<'a> {
    echo: &'a Echo,
    files: Vec<OutputFile>,
}

impl<'a> Outputs<'a> {
    fn grid(&mut self, stem: &str, computation: &str, d: &ParamDomain, columns: &[&str], data: &[Vec<f64>], summary: Value) {
        let data_file = format!("{stem}.csv");
        let side = Sidecar {
            computation,
            data_file: &data_file,
            columns: columns.to_vec(),
            grid: d.into(),
            parameters: self.echo,
            summary,
        };
        self.files.push(OutputFile { name: data_file.clone(), contents: format_grid(d, columns, data) });
        self.files.push(OutputFile { name: format!("{stem}.json"), contents: json_text(&side) });
    }

    fn report(&mut self, stem: &str, computation: &str, result: impl Serialize) {
        let r = Report { computation, parameters: self.echo, result };
        self.files.push(OutputFile { name: format!("{stem}.json"), contents: json_text(&r) });
    }
}

/// Directrix range covering `d` with room for the finite-difference stencils and chart padding.
fn surface_for(family: MeridianFamily, kappa: &pnmc_core::meridian::CurvatureProfile, d: &ParamDomain) -> Result<MeridianSurface, CliError> {
    let pad = 0.15 * (d.v_max - d.v_min) + 0.05;
    Ok(build_meridian(family, kappa, (d.v_min - pad, d.v_max + pad), CURVE_STEP)?)
}

fn fields(s: &Settings) -> Result<FieldSet, CliError> {
    let (lam, mu, nu) = match &s.source {
        Source::Family { family, kappa, .. } => model_solution(*family, kappa, &s.domain)?,
        Source::Fields { table, .. } => (table.field("lambda")?, table.field("mu")?, table.field("nu")?),
    };
    Ok(FieldSet::new(lam, mu, nu)?)
}

fn ambient_name(a: Ambient) -> String {
    match a {
        Ambient::Euclidean => "Euclidean".into(),
        Ambient::Minkowski(e) => format!("Minkowski, epsilon {:+}", e.value() as i8),
    }
}

fn norms_json(n: &Norms) -> Value {
    json!({ "sup": n.sup, "rms": n.rms })
}

pub fn execute(s: &Settings) -> Result<Vec<OutputFile>, CliError> {
    let echo = s.echo();
    let mut out = Outputs { echo: &echo, files: Vec::new() };
    let d = &s.domain;
    let sig = s.ambient.signature();
    match s.command {
        Command::Invariants => {
            let (fam, k) = s.family().expect("validated");
            let m = surface_for(fam, k, d)?;
            let h = s.h.unwrap_or_else(|| d.default_step());
            let grid = sweep_functions(&m, d, sig, h)?;
            let cols = ["E", "F", "G", "lambda", "mu", "nu", "beta1", "beta2"];
            let data: Vec<Vec<f64>> = (0..cols.len())
                .map(|c| {
                    grid.nodes
                        .iter()
                        .map(|n| {
                            let f = n.functions;
                            [n.form.e, n.form.f, n.form.g, f.lambda, f.mu, f.nu(), f.beta1, f.beta2][c]
                        })
                        .collect()
                })
                .collect();
            let eps = grid.nodes[0].frame.ambient.epsilon().map(|e| e.value() as i8);
            let sup_beta = grid.nodes.iter().map(|n| n.functions.beta_max()).fold(0.0, f64::max);
            let nu_gap = grid.nodes.iter().map(|n| n.functions.nu_gap()).fold(0.0, f64::max);
            out.grid(
                "invariants",
                "Geometric functions of the mean-curvature frame",
                d,
                &cols,
                &data,
                json!({ "frame_epsilon": eps, "sup_beta": sup_beta, "sup_nu_gap": nu_gap, "curve_drift": m.curve.drift }),
            );
        }
        Command::Classify => {
            let (fam, k) = s.family().expect("validated");
            let m = surface_for(fam, k, d)?;
            let opts = ClassifyOptions { tol_beta: s.tol_beta, h: s.h, ..Default::default() };
            let c = classify_pnmc(&m, d, sig, &opts)?;
            out.report("classify", "Classification by parallel normalized mean curvature", c);
        }
        Command::Canonical => {
            let (fam, k) = s.family().expect("validated");
            let base: Arc<dyn SurfaceMap> = Arc::new(surface_for(fam, k, d)?);
            let original = canonicity_residual(base.as_ref(), d, sig)?;
            let chart = meridian_canonical_chart(fam);
            let image = chart.image_domain(d)?;
            let rotated = canonicity_residual(&ReparametrizedSurface::new(base.clone(), chart.clone()), &image, sig)?;
            let factors = separable_factors(base.as_ref(), d, sig)?;
            let center = (0.5 * (d.u_min + d.u_max), 0.5 * (d.v_min + d.v_max));
            let (isurf, ichart) = reparametrize_integral(base.clone(), &factors, center)?;
            let iimage = ichart.image_domain(d)?;
            let integral = canonicity_residual(&isurf, &iimage, sig)?;
            let mut cols: Vec<Vec<f64>> = vec![Vec::new(); 4];
            for (_, _, u, v) in d.nodes() {
                let (a, b) = chart.forward(u, v)?;
                let (c, e) = ichart.forward(u, v)?;
                for (col, x) in cols.iter_mut().zip([a, b, c, e]) {
                    col.push(x);
                }
            }
            let summary = json!({
                "canonicity_original": original,
                "closed_form_rotated": {
                    "chart": chart.kind(),
                    "canonicity": rotated,
                    "image_domain": DomainEcho::from(&image),
                },
                "axis_aligned_integral": {
                    "chart": ichart.kind(),
                    "canonicity": integral,
                    "separability_error": factors.separability_error,
                    "image_domain": DomainEcho::from(&iimage),
                },
            });
            out.grid(
                "canonical",
                "Canonical principal parameters",
                d,
                &["ubar_rotated", "vbar_rotated", "ubar_integral", "vbar_integral"],
                &cols,
                summary,
            );
        }
        Command::Residuals => {
            let fs = fields(s)?;
            let eps = s.ambient.epsilon();
            let r = residual_fields(&fs.lam, &fs.mu, &fs.nu, eps)?;
            let (n1, n2, n3) = (Norms::of(&r.r1.values), Norms::of(&r.r2.values), Norms::of(&r.r3.values));
            let valid = (0..r.r1.values.len())
                .filter(|&k| [&r.r1, &r.r2, &r.r3].iter().all(|f| f.values[k].is_finite()))
                .count();
            if valid == 0 {
                return Err(pnmc_core::Error::MuVanishes.into());
            }
            let name = format!("Gauss-Codazzi PDE residuals, {}", ambient_name(s.ambient));
            let summary = json!({
                "r1": norms_json(&n1),
                "r2": norms_json(&n2),
                "r3": norms_json(&n3),
                "epsilon": eps.map(|e| e.value() as i8),
                "excluded": r.excluded,
                "valid": valid,
            });
            out.report("residuals", &name, &summary);
            let vals = |f: &GridField| f.values.clone();
            out.grid("residual_fields", &name, d, &["r1", "r2", "r3"], &[vals(&r.r1), vals(&r.r2), vals(&r.r3)], summary);
            out.grid(
                "fields",
                "Canonical-parameter fields (lambda, mu, nu)",
                d,
                &["lambda", "mu", "nu"],
                &[vals(&fs.lam), vals(&fs.mu), vals(&fs.nu)],
                json!({ "ambient": ambient_name(s.ambient) }),
            );
        }
        Command::Meridian => {
            let (fam, k) = s.family().expect("validated");
            let m = surface_for(fam, k, d)?;
            let pts: Vec<_> = d.nodes().iter().map(|&(_, _, u, v)| m.point(u, v)).collect::<Result<_, _>>()?;
            let cols: Vec<Vec<f64>> = (0..4).map(|c| pts.iter().map(|p| p[c]).collect()).collect();
            let summary = json!({
                "family": fam.name(),
                "curve_drift": m.curve.drift,
                "curve_nodes": m.curve.len(),
                "curve_v_range": m.curve.v_range(),
            });
            out.grid("meridian", &format!("Meridian surface, {} family", fam.name()), d, &["x1", "x2", "x3", "x4"], &cols, summary);
        }
        Command::Reconstruct => {
            let fs = fields(s)?;
            let start = FrameState::standard(s.ambient);
            let rec = integrate_surface(&fs, s.ambient, &start, &IntegrateOptions::default())?;
            let defect = compatibility_defect(&fs, s.ambient, &start)?;
            let cols: Vec<Vec<f64>> = (0..4).map(|c| rec.states.iter().map(|st| st.z[c]).collect()).collect();
            let summary = json!({
                "frame_drift": rec.drift,
                "compatibility_defect": defect,
                "initial_frame": start,
            });
            out.grid(
                "reconstruct",
                &format!("Surface reconstructed from (lambda, mu, nu), {}", ambient_name(s.ambient)),
                d,
                &["z1", "z2", "z3", "z4"],
                &cols,
                summary,
            );
        }
        Command::Roundtrip => {
            let fs = fields(s)?;
            let r = roundtrip(&fs, s.ambient, &IntegrateOptions::default())?;
            out.report("roundtrip", &format!("Reconstruction round trip, {}", ambient_name(s.ambient)), r);
        }
    }
    Ok(out.files)
}

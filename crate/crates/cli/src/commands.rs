//! One function per subcommand. Each returns the JSON result, the optional
//! flat tables and plots, and the exit status it implies.

use qcspectra::bounds::{
    bound_beta_regular, bound_inf_regular, bound_intro_form, bound_measure_preserving, Beta, BoundReport,
};
use qcspectra::discquad::{integrate_with_report, jacobian_sup, ConvergenceReport};
use qcspectra::eigsolver::minimize_eigen;
use qcspectra::maps::{catalog, MapKind};
use qcspectra::mesh::{mesh_disc_spec, push_forward, Mesh, MeshSpec};
use qcspectra::plot::{boundary_points, render_svg};
use qcspectra::quasidisc::{mp_constant, quasidisc_lower_bound};
use qcspectra::verify::{compare, theoretical_bound, Status, VerifyVariant};
use qcspectra::{LogValue, MapDescriptor};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CommandKind, RunConfig};
use crate::output::{flatten_csv, Artifact};
use crate::{CliError, ExitKind};

/// Boundary samples in SVG plots.
const BOUNDARY_SAMPLES: usize = 720;

pub struct Outcome {
    pub result: Value,
    pub artifacts: Vec<Artifact>,
    pub exit: ExitKind,
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let mut out = match config.command {
        CommandKind::Catalog => run_catalog(config)?,
        CommandKind::Bound => run_bound(config)?,
        CommandKind::Quasidisc => run_quasidisc(config)?,
        CommandKind::Norm => run_norm(config)?,
        CommandKind::Eigen => run_eigen(config)?,
        CommandKind::Verify => run_verify(config)?,
    };
    if config.output.csv && !out.artifacts.iter().any(|a| a.suffix == "csv") {
        out.artifacts.push(Artifact::new("csv", flatten_csv(&out.result)?));
    }
    Ok(out)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialise")
}

fn boundary_svg(map: &MapDescriptor, field: Option<(&Mesh, &qcspectra::eigsolver::ScalarField)>) -> Artifact {
    Artifact::new("svg", render_svg(&boundary_points(map, BOUNDARY_SAMPLES), field, &map.to_string()))
}

fn formulas(kind: &MapKind) -> (&'static str, &'static str) {
    match kind {
        MapKind::Identity => ("1", "π"),
        MapKind::Epicycloid { .. } => ("(A+B)/(A−B)", "(A²−B²)(n+1)π/n for n ≥ 2, 4(A²−B²)π for n = 1"),
        MapKind::EllipseShear { .. } => ("(√(a²+1)+a)/(√(a²+1)−a)", "π"),
        MapKind::RosePetal => ("2", "π"),
        MapKind::LinearShear { .. } => ("sup over y of the largest eigenvalue of DDᵀ, D = [[a, f′(y)], [0, 1/a]]", "π"),
    }
}

fn run_catalog(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    let mut artifacts = Vec::new();
    let mut table = csv::Writer::from_writer(Vec::new());
    table
        .write_record(["kind", "descriptor", "K", "K_formula", "area", "area_formula", "measure_preserving"])
        .map_err(CliError::io)?;
    for map in catalog() {
        let info = map.info();
        let (k_formula, area_formula) = formulas(map.kind());
        rows.push(json!({
            "kind": map.kind_name(),
            "descriptor": map.to_string(),
            "example": map,
            "K": info.k,
            "K_formula": k_formula,
            "K_source": info.k_source,
            "area": info.area,
            "area_formula": area_formula,
            "measure_preserving": info.measure_preserving,
        }));
        let area = info.area.map(|a| a.to_string()).unwrap_or_default();
        table
            .write_record([
                map.kind_name(),
                &map.to_string(),
                &info.k.to_string(),
                k_formula,
                &area,
                area_formula,
                &info.measure_preserving.to_string(),
            ])
            .map_err(CliError::io)?;
        if config.output.svg {
            let mut a = boundary_svg(&map, None);
            a.suffix = format!("{}.svg", map.kind_name());
            artifacts.push(a);
        }
    }
    if config.output.csv {
        let bytes = table.into_inner().map_err(|e| CliError::io(e.into_error()))?;
        artifacts.push(Artifact::new("csv", String::from_utf8(bytes).expect("utf-8")));
    }
    Ok(Outcome {
        result: json!({ "maps": rows }),
        artifacts,
        exit: ExitKind::Success,
    })
}

/// The map's K unless overridden on the command line.
fn distortion(config: &RunConfig, map: &MapDescriptor) -> f64 {
    config.k.unwrap_or_else(|| map.info().k)
}

fn run_bound(config: &RunConfig) -> Result<Outcome, CliError> {
    let map = config.require_domain()?;
    let p = config.require_p()?;
    let beta = config.beta.unwrap_or(Beta::Infinite);
    let info = map.info();
    let k = distortion(config, map);
    let intro = match config.variant.as_deref() {
        None | Some("auto") => false,
        Some("intro-form") => true,
        Some(v) => return Err(CliError::usage(format!("bound --variant must be auto or intro-form, got '{v}'"))),
    };
    let mut quadrature: Option<ConvergenceReport> = None;
    let report: BoundReport = if intro || info.measure_preserving {
        if !info.measure_preserving {
            return Err(CliError::usage(format!("intro-form needs a measure-preserving map, {} is not", map.kind_name())));
        }
        if intro {
            bound_intro_form(p, beta, k)?
        } else {
            bound_measure_preserving(p, beta, k)?
        }
    } else {
        let area = match info.area {
            Some(a) => a,
            None => {
                let r = integrate_with_report(|z| map.jacobian(z).map(f64::abs).unwrap_or(f64::NAN), &config.quadrature)?;
                let a = r.value;
                quadrature = Some(r);
                a
            }
        };
        match beta {
            Beta::Finite(b) => {
                let r = integrate_with_report(
                    |z| map.jacobian(z).map(|j| j.abs().powf(b)).unwrap_or(f64::NAN),
                    &config.quadrature,
                )?;
                let norm = r.value.powf(1.0 / b);
                quadrature = Some(r);
                bound_beta_regular(p, b, k, area, norm)?
            }
            Beta::Infinite => {
                let sup = jacobian_sup(map, &config.quadrature)?;
                bound_inf_regular(p, k, area, sup.value)?
            }
        }
    };
    let mut result = to_value(&report);
    result["domain"] = to_value(map);
    if let Some(q) = quadrature {
        result["quadrature"] = to_value(&q);
    }
    let mut artifacts = Vec::new();
    if config.output.svg {
        artifacts.push(boundary_svg(map, None));
    }
    Ok(Outcome {
        result,
        artifacts,
        exit: ExitKind::Success,
    })
}

fn log_fields(v: &LogValue) -> Value {
    json!({
        "log": v,
        "decimal": v.to_decimal_string(),
    })
}

fn run_quasidisc(config: &RunConfig) -> Result<Outcome, CliError> {
    let p = config.require_p()?;
    let k = match (config.k, &config.domain) {
        (Some(k), _) => k,
        (None, Some(map)) => map.info().k,
        (None, None) => return Err(CliError::usage("quasidisc needs --K or --domain")),
    };
    let c = mp_constant(k, p)?;
    let mut result = json!({
        "K": k,
        "p": p,
        "epsilon": c.beta_tilde_offset,
        "beta_tilde_minus_one": c.beta_tilde_offset,
        "beta_star_minus_one": c.beta_star.offset,
        "beta_star_limited_by_beta_tilde": c.beta_star.limited_by_beta_tilde,
        "beta_opt_minus_one": c.beta_opt_offset,
        "q_opt": c.q_opt,
        "two_minus_q_opt": c.two_minus_q_opt,
        "boundary_attained": c.boundary_attained,
        "M_p": log_fields(&c.mp),
        "M_p_star": log_fields(&c.mp_star),
    });
    let area = match (config.area, &config.domain) {
        (Some(a), _) => Some(a),
        (None, Some(map)) => map.info().area,
        (None, None) => None,
    };
    if let Some(area) = area {
        let b = quasidisc_lower_bound(k, p, area)?;
        result["area"] = json!(area);
        result["mu_lower"] = log_fields(&b.mu_lower);
        result["mu_lower_via_radius"] = log_fields(&b.via_radius);
    }
    if let Some(map) = &config.domain {
        result["domain"] = to_value(map);
    }
    let mut artifacts = Vec::new();
    if config.output.svg {
        if let Some(map) = &config.domain {
            artifacts.push(boundary_svg(map, None));
        }
    }
    Ok(Outcome {
        result,
        artifacts,
        exit: ExitKind::Success,
    })
}

fn run_norm(config: &RunConfig) -> Result<Outcome, CliError> {
    let map = config.require_domain()?;
    let beta = config.beta.expect("validated");
    let area = integrate_with_report(|z| map.jacobian(z).map(f64::abs).unwrap_or(f64::NAN), &config.quadrature)?;
    let mut result = json!({
        "domain": map,
        "beta": beta,
        "area": area.value,
        "area_quadrature": area,
    });
    match beta {
        Beta::Finite(b) => {
            let r = integrate_with_report(
                |z| map.jacobian(z).map(|j| j.abs().powf(b)).unwrap_or(f64::NAN),
                &config.quadrature,
            )?;
            result["jacobian_norm"] = json!(r.value.powf(1.0 / b));
            result["quadrature"] = to_value(&r);
        }
        Beta::Infinite => {
            let sup = jacobian_sup(map, &config.quadrature)?;
            result["jacobian_norm"] = json!(sup.value);
            result["jacobian_sup_is_lower_estimate"] = json!(sup.lower_estimate);
        }
    }
    let mut artifacts = Vec::new();
    if config.output.svg {
        artifacts.push(boundary_svg(map, None));
    }
    Ok(Outcome {
        result,
        artifacts,
        exit: ExitKind::Success,
    })
}

struct Solve {
    spec: MeshSpec,
    mesh: Mesh,
    eigen: qcspectra::eigsolver::EigenResult,
}

fn solve(config: &RunConfig, map: &MapDescriptor, p: f64) -> Result<Solve, CliError> {
    let spec = MeshSpec::for_map(config.rings, map);
    let mesh = push_forward(&mesh_disc_spec(&spec)?, map)?;
    let eigen = minimize_eigen(&mesh, p, &config.eigen)?;
    Ok(Solve { spec, mesh, eigen })
}

fn eigen_json(s: &Solve) -> Value {
    let e = &s.eigen;
    json!({
        "mu": e.mu,
        "converged": e.converged,
        "iterations": e.iterations,
        "constraint_residual": e.constraint_residual,
        "start": e.start,
        "seed": e.seed,
        "starts": e.starts,
        "rayleigh_trace": e.rayleigh_trace,
        "trace_monotone": e.trace_is_monotone(),
        "mesh": {
            "spec": s.spec,
            "vertices": s.mesh.n_vertices(),
            "triangles": s.mesh.triangles.len(),
            "max_edge": s.mesh.max_edge(),
            "area": s.mesh.area(),
        },
    })
}

fn field_artifacts(config: &RunConfig, map: &MapDescriptor, s: &Solve) -> Vec<Artifact> {
    let mut out = Vec::new();
    if config.output.mesh {
        out.push(Artifact::new("mesh.txt", s.mesh.to_text()));
        out.push(Artifact::new("field.txt", s.eigen.field.to_table(&s.mesh)));
    }
    if config.output.svg {
        out.push(boundary_svg(map, Some((&s.mesh, &s.eigen.field))));
    }
    out
}

fn vertex_csv(s: &Solve) -> Result<Artifact, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "u"]).map_err(CliError::io)?;
    for (v, u) in s.mesh.vertices.iter().zip(s.eigen.field.values()) {
        w.write_record([v[0].to_string(), v[1].to_string(), u.to_string()])
            .map_err(CliError::io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(e.into_error()))?;
    Ok(Artifact::new("csv", String::from_utf8(bytes).expect("utf-8")))
}

fn run_eigen(config: &RunConfig) -> Result<Outcome, CliError> {
    let map = config.require_domain()?;
    let p = config.require_p()?;
    let s = solve(config, map, p)?;
    let mut result = eigen_json(&s);
    result["domain"] = to_value(map);
    result["p"] = json!(p);
    let mut artifacts = field_artifacts(config, map, &s);
    if config.output.csv {
        artifacts.push(vertex_csv(&s)?);
    }
    Ok(Outcome {
        result,
        artifacts,
        exit: if s.eigen.converged {
            ExitKind::Success
        } else {
            ExitKind::NotConverged
        },
    })
}

fn run_verify(config: &RunConfig) -> Result<Outcome, CliError> {
    let map = config.require_domain()?;
    let p = config.require_p()?;
    let variant: VerifyVariant = config.variant.as_deref().unwrap_or("auto").parse()?;
    let (variant, mut theory) = theoretical_bound(map, p, variant, &config.quadrature)?;
    if let Some(k) = config.k {
        theory = override_k(map, p, variant, k, config)?;
    }
    let s = solve(config, map, p)?;
    let report = compare(map, p, variant, theory, &s.eigen, config.rings)?;
    let exit = match report.status {
        Status::Pass => ExitKind::Success,
        Status::Fail => ExitKind::VerificationFailed,
        Status::Inconclusive => ExitKind::NotConverged,
    };
    let mut result = to_value(&report);
    result["eigen"] = eigen_json(&s);
    Ok(Outcome {
        result,
        artifacts: field_artifacts(config, map, &s),
        exit,
    })
}

/// Re-derives the bound with a user-supplied K.
fn override_k(
    map: &MapDescriptor,
    p: f64,
    variant: VerifyVariant,
    k: f64,
    config: &RunConfig,
) -> Result<qcspectra::verify::Theory, CliError> {
    use qcspectra::verify::Theory;
    let info = map.info();
    let area = || -> Result<f64, CliError> {
        Ok(match info.area {
            Some(a) => a,
            None => qcspectra::discquad::image_area(map, &config.quadrature)?,
        })
    };
    Ok(match variant {
        VerifyVariant::MeasurePreserving { beta } => Theory::Bound(bound_measure_preserving(p, beta, k)?),
        VerifyVariant::IntroForm { beta } => Theory::Bound(bound_intro_form(p, beta, k)?),
        VerifyVariant::InfRegular => {
            let sup = jacobian_sup(map, &config.quadrature)?.value;
            Theory::Bound(bound_inf_regular(p, k, area()?, sup)?)
        }
        VerifyVariant::BetaRegular { beta } => {
            let norm = qcspectra::discquad::jacobian_norm(map, beta, &config.quadrature)?;
            Theory::Bound(bound_beta_regular(p, beta, k, area()?, norm)?)
        }
        VerifyVariant::Quasidisc => Theory::Quasidisc(quasidisc_lower_bound(k, p, area()?)?),
        VerifyVariant::Auto => unreachable!("resolved by theoretical_bound"),
    })
}

//! Image restoration runs: load a PGM, evolve it under a chosen operator
//! to one or more scale values, write restored PGMs plus a manifest and
//! a metrics CSV.

use std::path::{Path, PathBuf};

use varidiff::fd::{cfl_max_dt, fd_solve, FdConfig};
use varidiff::field::GridField;
use varidiff::vim::{vim_solve, VimConfig};
use varidiff::{
    from_unit, psnr, read_pgm, to_unit, write_pgm, DiffusivityKind, DiffusivitySpec, Error,
    SpatialOperator,
};

use crate::manifest::RunManifest;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Vim,
    Fd,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Vim => "vim",
            Method::Fd => "fd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpChoice {
    Pm,
    Catte,
    Curvature,
}

impl OpChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            OpChoice::Pm => "pm",
            OpChoice::Catte => "catte",
            OpChoice::Curvature => "curvature",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RestoreParams {
    pub input: PathBuf,
    pub output_prefix: PathBuf,
    pub reference: Option<PathBuf>,
    pub op: OpChoice,
    pub method: Method,
    pub diffusivity: DiffusivityKind,
    pub contrast: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub iterations: usize,
    pub time_nodes: usize,
}

pub struct RestoreOutcome {
    pub manifest_path: PathBuf,
    pub metrics_path: PathBuf,
    pub written: Vec<PathBuf>,
    pub diverged: Vec<f64>,
}

fn build_operator(p: &RestoreParams) -> Result<SpatialOperator, Error> {
    match p.op {
        OpChoice::Pm => {
            let spec = DiffusivitySpec::new(p.diffusivity, p.contrast)?;
            SpatialOperator::perona_malik(spec, p.epsilon)
        }
        OpChoice::Catte => {
            let spec = DiffusivitySpec::new(p.diffusivity, p.contrast)?;
            SpatialOperator::catte(spec, p.sigma, p.epsilon)
        }
        OpChoice::Curvature => SpatialOperator::curvature(p.epsilon),
    }
}

/// Format a scale value for file names: integral values lose the dot.
pub fn format_time(t: f64) -> String {
    if t == t.trunc() && t.abs() < 1e15 {
        format!("{}", t as i64)
    } else {
        format!("{t}")
    }
}

fn read_image_field(path: &Path) -> Result<GridField, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let img = read_pgm(&bytes).map_err(|e| CliError::core_with_path(path, e))?;
    to_unit(&img).map_err(|e| CliError::core_with_path(path, e))
}

pub fn run(params: &RestoreParams) -> Result<RestoreOutcome, CliError> {
    let field0 = read_image_field(&params.input)?;
    let reference = params
        .reference
        .as_ref()
        .map(|p| read_image_field(p))
        .transpose()?;
    if let Some(r) = &reference {
        if r.geometry() != field0.geometry() {
            return Err(CliError::Usage(
                "reference image dimensions do not match the input".to_string(),
            ));
        }
    }
    let op = build_operator(params).map_err(CliError::Core)?;

    let mut manifest = RunManifest::new("restore");
    manifest.push("input", params.input.display());
    manifest.push("output_prefix", params.output_prefix.display());
    if let Some(r) = &params.reference {
        manifest.push("reference", r.display());
    }
    manifest.push("op", params.op.as_str());
    manifest.push("method", params.method.as_str());
    manifest.push("diffusivity", match params.diffusivity {
        DiffusivityKind::Rational => "rational",
        DiffusivityKind::Exponential => "exponential",
    });
    manifest.push("k", params.contrast);
    manifest.push("sigma", params.sigma);
    manifest.push("eps", params.epsilon);
    manifest.push("iterations", params.iterations);
    manifest.push("time_nodes", params.time_nodes);
    manifest.push(
        "t",
        params
            .times
            .iter()
            .map(|t| format!("{t}"))
            .collect::<Vec<_>>()
            .join(","),
    );

    let psnr_in = reference
        .as_ref()
        .map(|r| psnr(&field0, r, 1.0).expect("geometries checked above"));
    if let Some(q) = &psnr_in {
        manifest.push("result.psnr_input", format!("{:.6}", q.psnr_db));
    }

    let mut metrics = String::from("t,file,status,min,max,mean,mse_ref,psnr_db_ref\n");
    let mut written = Vec::new();
    let mut diverged = Vec::new();

    for &t in &params.times {
        let label = format_time(t);
        let out_path = params
            .output_prefix
            .with_file_name(format!(
                "{}_t{label}.pgm",
                params
                    .output_prefix
                    .file_name()
                    .map(|s| s.to_string_lossy().to_string())
                    .unwrap_or_else(|| "restore".to_string())
            ));
        let mut solve = || -> Result<GridField, Error> {
            if t == 0.0 {
                return Ok(field0.clone());
            }
            match params.method {
                Method::Vim => {
                    let cfg = VimConfig::new(params.iterations, params.time_nodes, t)?;
                    let sol = vim_solve(&field0, &op, &cfg)?;
                    let residuals = sol
                        .residual_history()
                        .iter()
                        .map(|r| format!("{r:.6e}"))
                        .collect::<Vec<_>>()
                        .join(",");
                    manifest.push(format!("result.residuals_t{label}").as_str(), residuals);
                    manifest.push(
                        format!("result.tail_nondecreasing_t{label}").as_str(),
                        sol.has_nondecreasing_tail(),
                    );
                    Ok(sol.into_iterate().final_frame().clone())
                }
                Method::Fd => {
                    let bound = cfl_max_dt(&op, field0.geometry());
                    let cfg = FdConfig::for_horizon(t, bound)?;
                    manifest.push(format!("result.fd_steps_t{label}").as_str(), cfg.steps);
                    fd_solve(&field0, &op, &cfg)
                }
            }
        };
        let solved = solve();
        match solved {
            Ok(field) => {
                let img = from_unit(&field);
                std::fs::write(&out_path, write_pgm(&img))
                    .map_err(|e| CliError::io(&out_path, e))?;
                // Metrics describe what was actually written.
                let clamped = to_unit(&img).expect("written image is at least 3x3");
                let (mse_s, psnr_s) = if let Some(r) = &reference {
                    let q = psnr(&clamped, r, 1.0).expect("geometries checked above");
                    manifest.push(
                        format!("result.psnr_t{label}").as_str(),
                        format!("{:.6}", q.psnr_db),
                    );
                    (format!("{:.6e}", q.mse), format!("{:.6}", q.psnr_db))
                } else {
                    (String::new(), String::new())
                };
                metrics.push_str(&format!(
                    "{t},{},ok,{:.6},{:.6},{:.6},{mse_s},{psnr_s}\n",
                    out_path.display(),
                    clamped.min(),
                    clamped.max(),
                    clamped.mean(),
                ));
                manifest.push(format!("result.status_t{label}").as_str(), "ok");
                written.push(out_path);
            }
            Err(e @ (Error::Divergence { .. }
            | Error::IterateDivergence { .. }
            | Error::StepDivergence { .. })) => {
                eprintln!("warning: t = {t} diverged: {e}");
                metrics.push_str(&format!("{t},,diverged,,,,,\n"));
                manifest.push(format!("result.status_t{label}").as_str(), format!("diverged: {e}"));
                diverged.push(t);
            }
            Err(other) => return Err(CliError::Core(other)),
        }
    }

    let manifest_path = params.output_prefix.with_file_name(format!(
        "{}.manifest",
        params
            .output_prefix
            .file_name()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "restore".to_string())
    ));
    let metrics_path = params.output_prefix.with_file_name(format!(
        "{}_metrics.csv",
        params
            .output_prefix
            .file_name()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "restore".to_string())
    ));
    manifest
        .write_to(&manifest_path)
        .map_err(|e| CliError::io(&manifest_path, e))?;
    std::fs::write(&metrics_path, metrics).map_err(|e| CliError::io(&metrics_path, e))?;

    Ok(RestoreOutcome {
        manifest_path,
        metrics_path,
        written,
        diverged,
    })
}

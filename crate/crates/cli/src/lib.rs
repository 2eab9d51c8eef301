//! Implementation of the `varidiff` command-line tool. The binary in
//! `main.rs` is a thin argument parser over the functions here, which
//! keeps every command testable in-process.

use std::path::{Path, PathBuf};

pub mod manifest;
pub mod restore;
pub mod surface;
pub mod synth;
pub mod verify;

use manifest::RunManifest;

/// Errors with their process exit codes: usage and I/O problems exit 2,
/// solver divergence exits 1 (success is 0).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Core(varidiff::Error),
    CoreAt {
        path: PathBuf,
        source: varidiff::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn core_with_path(path: &Path, source: varidiff::Error) -> Self {
        CliError::CoreAt {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Core(e) | CliError::CoreAt { source: e, .. } => match e {
                varidiff::Error::Divergence { .. }
                | varidiff::Error::IterateDivergence { .. }
                | varidiff::Error::StepDivergence { .. } => 1,
                _ => 2,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::CoreAt { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

fn parse_key<T: std::str::FromStr>(m: &RunManifest, key: &str) -> Result<T, CliError> {
    let raw = m.require(key).map_err(CliError::Usage)?;
    raw.parse::<T>()
        .map_err(|_| CliError::Usage(format!("manifest key '{key}' has invalid value '{raw}'")))
}

fn redirect(path: &Path, output_dir: Option<&Path>) -> PathBuf {
    match output_dir {
        Some(dir) => match path.file_name() {
            Some(name) => dir.join(name),
            None => dir.to_path_buf(),
        },
        None => path.to_path_buf(),
    }
}

/// Re-execute the command recorded in a manifest. Parameter keys are
/// replayed verbatim; `result.*` keys are ignored. `output_dir`
/// redirects the outputs (and the fresh manifest) into another
/// directory, which is how byte-identical reproduction is checked
/// without overwriting the original run.
pub fn rerun(manifest_path: &Path, output_dir: Option<&Path>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| CliError::io(manifest_path, e))?;
    let m = RunManifest::parse(&text).map_err(CliError::Usage)?;
    let command = m.require("command").map_err(CliError::Usage)?;
    match command {
        "restore" => {
            let params = restore::RestoreParams {
                input: PathBuf::from(m.require("input").map_err(CliError::Usage)?),
                output_prefix: redirect(
                    Path::new(m.require("output_prefix").map_err(CliError::Usage)?),
                    output_dir,
                ),
                reference: m.get("reference").map(PathBuf::from),
                op: match m.require("op").map_err(CliError::Usage)? {
                    "pm" => restore::OpChoice::Pm,
                    "catte" => restore::OpChoice::Catte,
                    "curvature" => restore::OpChoice::Curvature,
                    other => {
                        return Err(CliError::Usage(format!("unknown operator '{other}'")))
                    }
                },
                method: match m.require("method").map_err(CliError::Usage)? {
                    "vim" => restore::Method::Vim,
                    "fd" => restore::Method::Fd,
                    other => return Err(CliError::Usage(format!("unknown method '{other}'"))),
                },
                diffusivity: match m.require("diffusivity").map_err(CliError::Usage)? {
                    "rational" => varidiff::DiffusivityKind::Rational,
                    "exponential" => varidiff::DiffusivityKind::Exponential,
                    other => {
                        return Err(CliError::Usage(format!("unknown diffusivity '{other}'")))
                    }
                },
                contrast: parse_key(&m, "k")?,
                sigma: parse_key(&m, "sigma")?,
                epsilon: parse_key(&m, "eps")?,
                times: m
                    .require("t")
                    .map_err(CliError::Usage)?
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| CliError::Usage("invalid t list in manifest".to_string()))?,
                iterations: parse_key(&m, "iterations")?,
                time_nodes: parse_key(&m, "time_nodes")?,
            };
            restore::run(&params).map(|_| ())
        }
        "surface" => {
            let grid = surface::parse_grid_spec(m.require("grid").map_err(CliError::Usage)?)
                .map_err(CliError::Usage)?;
            let params = surface::SurfaceParams {
                t: parse_key(&m, "t")?,
                iterations: parse_key(&m, "iterations")?,
                grid,
                output: redirect(
                    Path::new(m.require("output").map_err(CliError::Usage)?),
                    output_dir,
                ),
            };
            surface::run(&params).map(|_| ())
        }
        "synth" => {
            let params = synth::SynthParams {
                size: parse_key(&m, "size")?,
                noise: parse_key(&m, "noise")?,
                seed: parse_key(&m, "seed")?,
                output: redirect(
                    Path::new(m.require("output").map_err(CliError::Usage)?),
                    output_dir,
                ),
                noisy_output: m
                    .get("noisy_output")
                    .map(|p| redirect(Path::new(p), output_dir)),
            };
            synth::run(&params).map(|_| ())
        }
        other => Err(CliError::Usage(format!(
            "manifest command '{other}' cannot be re-run"
        ))),
    }
}

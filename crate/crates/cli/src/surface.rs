//! Surface export: the order-N radial iterate evaluated over a grid,
//! written as `x,y,u` CSV for external plotting.
//!
//! The grid solver cannot reach large scale values (the iteration is a
//! power series in t), but for the radial benchmark the iterate has a
//! semi-analytic form of any order; that is what gets plotted.

use std::path::{Path, PathBuf};

use varidiff::field::GridGeometry;
use varidiff::radial::RadialSeries;
use varidiff::Error;

use crate::manifest::RunManifest;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct SurfaceParams {
    pub t: f64,
    pub iterations: usize,
    /// x0, x1, y0, y1, h
    pub grid: (f64, f64, f64, f64, f64),
    pub output: PathBuf,
}

pub fn parse_grid_spec(spec: &str) -> Result<(f64, f64, f64, f64, f64), String> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 5 {
        return Err("grid spec must be x0,x1,y0,y1,h".to_string());
    }
    let mut vals = [0.0f64; 5];
    for (i, p) in parts.iter().enumerate() {
        vals[i] = p
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("invalid number '{p}' in grid spec"))?;
    }
    Ok((vals[0], vals[1], vals[2], vals[3], vals[4]))
}

pub fn run(params: &SurfaceParams) -> Result<PathBuf, CliError> {
    let (x0, x1, y0, y1, h) = params.grid;
    let geometry = GridGeometry::from_domain(x0, x1, y0, y1, h).map_err(CliError::Core)?;
    if !(params.t >= 0.0 && params.t.is_finite()) {
        return Err(CliError::Usage(format!(
            "scale value must be non-negative, got {}",
            params.t
        )));
    }
    if params.iterations == 0 {
        return Err(CliError::Usage("iterations must be at least 1".to_string()));
    }
    let series = RadialSeries::new(params.iterations);

    let mut csv = String::with_capacity(geometry.cells() * 64);
    csv.push_str("x,y,u\n");
    for j in 0..geometry.ny() {
        let y = geometry.y(j);
        for i in 0..geometry.nx() {
            let x = geometry.x(i);
            let r = (x * x + y * y).sqrt();
            let u = series.eval(r, params.t).map_err(|e| match e {
                Error::Singularity(_) => CliError::Usage(format!(
                    "grid node ({x}, {y}) sits on the origin; choose a domain with r > 0"
                )),
                other => CliError::Core(other),
            })?;
            // 17 significant digits.
            csv.push_str(&format!("{x:.16e},{y:.16e},{u:.16e}\n"));
        }
    }
    std::fs::write(&params.output, csv).map_err(|e| CliError::io(&params.output, e))?;

    let mut manifest = RunManifest::new("surface");
    manifest.push("t", params.t);
    manifest.push("iterations", params.iterations);
    manifest.push("grid", format!("{x0},{x1},{y0},{y1},{h}"));
    manifest.push("output", params.output.display());
    manifest.push("result.rows", geometry.cells() + 1);
    let manifest_path = manifest_sibling(&params.output);
    manifest
        .write_to(&manifest_path)
        .map_err(|e| CliError::io(&manifest_path, e))?;
    Ok(manifest_path)
}

pub fn manifest_sibling(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "surface".to_string());
    output.with_file_name(format!("{stem}.manifest"))
}

//! Classical explicit (forward-Euler) time stepping, used to
//! cross-validate the iterative solver.

use crate::diffusion::SpatialOperator;
use crate::error::{Error, Result};
use crate::field::{GridField, GridGeometry};

/// Explicit stepping configuration.
#[derive(Debug, Clone, Copy)]
pub struct FdConfig {
    pub dt: f64,
    pub steps: usize,
}

impl FdConfig {
    pub fn new(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param(format!("dt must be positive, got {dt}")));
        }
        if steps == 0 {
            return Err(Error::param("step count must be positive".to_string()));
        }
        Ok(Self { dt, steps })
    }

    /// Largest step count / dt pair covering horizon `T` within `bound`.
    pub fn for_horizon(horizon: f64, bound: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        // A little slack keeps T/steps under the bound despite division
        // rounding.
        let steps = (horizon / (0.95 * bound)).ceil().max(1.0) as usize;
        Self::new(horizon / steps as f64, steps)
    }
}

/// Stability bound `h^2 / (4 c_max)` with `h = min(hx, hy)`.
///
/// Diffusivities are bounded by 1 and the curvature operator's tangential
/// diffusion coefficient is 1, so `c_max = 1` for every operator kind.
pub fn cfl_max_dt(_op: &SpatialOperator, geometry: &GridGeometry) -> f64 {
    let h = geometry.hx().min(geometry.hy());
    h * h / 4.0
}

/// Forward-Euler solve `u <- u + dt * op(u)` for `cfg.steps` steps.
///
/// Under the CFL bound the divergence-form operators conserve the grid
/// mean each step and admit no new extrema (the update is a convex
/// combination of neighbours).
pub fn fd_solve(u0: &GridField, op: &SpatialOperator, cfg: &FdConfig) -> Result<GridField> {
    let bound = cfl_max_dt(op, u0.geometry());
    if cfg.dt > bound {
        return Err(Error::param(format!(
            "dt = {} violates the stability bound {bound}",
            cfg.dt
        )));
    }
    fd_solve_with(u0, |u| op.apply(u), cfg)
}

/// Forward-Euler stepping with a caller-supplied right-hand side. The
/// caller is responsible for stability.
pub fn fd_solve_with<F>(u0: &GridField, rhs: F, cfg: &FdConfig) -> Result<GridField>
where
    F: Fn(&GridField) -> Result<GridField>,
{
    let mut u = u0.clone();
    for step in 1..=cfg.steps {
        // Operator parameters are validated at construction, so parameter
        // errors surfacing mid-loop mean the evaluation or the update
        // overflowed: report them as divergence at this step.
        let blew_up = |e: Error| match e {
            Error::Parameter(_) => Error::StepDivergence { step },
            other => other,
        };
        let f = rhs(&u).map_err(blew_up)?;
        if !f.is_finite() {
            return Err(Error::StepDivergence { step });
        }
        u = u.axpy(cfg.dt, &f).map_err(blew_up)?;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{DiffusivityKind, DiffusivitySpec, SpatialOperator};
    use crate::rng::SplitMix64;

    fn pm_op() -> SpatialOperator {
        let spec = DiffusivitySpec::new(DiffusivityKind::Rational, 0.05).unwrap();
        SpatialOperator::perona_malik(spec, 1e-8).unwrap()
    }

    #[test]
    fn cfl_bound_values() {
        let op = pm_op();
        let g1 = GridGeometry::new(5, 5, 1.0, 1.0, (0.0, 0.0)).unwrap();
        assert_eq!(cfl_max_dt(&op, &g1), 0.25);
        let g2 = GridGeometry::new(5, 5, 0.5, 0.5, (0.0, 0.0)).unwrap();
        assert_eq!(cfl_max_dt(&op, &g2), 0.0625);
        let g3 = GridGeometry::new(5, 5, 0.25, 0.25, (0.0, 0.0)).unwrap();
        assert_eq!(cfl_max_dt(&op, &g3), 0.0625 / 4.0);
        // Anisotropic spacing uses the finer axis.
        let g4 = GridGeometry::new(5, 5, 1.0, 0.5, (0.0, 0.0)).unwrap();
        assert_eq!(cfl_max_dt(&op, &g4), 0.0625);
    }

    #[test]
    fn zero_rhs_returns_initial_data() {
        let g = GridGeometry::new(6, 6, 1.0, 1.0, (0.0, 0.0)).unwrap();
        let u0 = GridField::from_fn(g, |x, y| x * 0.1 + y).unwrap();
        let cfg = FdConfig::new(0.1, 25).unwrap();
        let out = fd_solve_with(&u0, |u| GridField::constant(*u.geometry(), 0.0), &cfg).unwrap();
        assert_eq!(out, u0);
    }

    #[test]
    fn cfl_violation_rejected() {
        let g = GridGeometry::new(6, 6, 1.0, 1.0, (0.0, 0.0)).unwrap();
        let u0 = GridField::constant(g, 0.0).unwrap();
        let cfg = FdConfig::new(0.26, 1).unwrap();
        assert!(fd_solve(&u0, &pm_op(), &cfg).is_err());
    }

    #[test]
    fn mean_conserved_and_no_new_extrema() {
        let mut rng = SplitMix64::new(404);
        let g = GridGeometry::new(24, 24, 1.0, 1.0, (0.0, 0.0)).unwrap();
        let u0 = GridField::from_values(
            g,
            (0..g.cells()).map(|_| rng.next_in(0.0, 1.0)).collect(),
        )
        .unwrap();
        let op = pm_op();
        let dt = 0.99 * cfl_max_dt(&op, &g);
        let (lo, hi) = (u0.min(), u0.max());
        let mut u = u0.clone();
        for _ in 0..100 {
            let next = fd_solve(&u, &op, &FdConfig::new(dt, 1).unwrap()).unwrap();
            let drift = (next.mean() - u.mean()).abs();
            assert!(drift <= 1e-10 * u.mean().abs().max(1.0), "drift {drift}");
            assert!(next.min() >= lo - 1e-12, "min {}", next.min());
            assert!(next.max() <= hi + 1e-12, "max {}", next.max());
            u = next;
        }
    }

    #[test]
    fn diffusion_shrinks_variance_of_noisy_step() {
        let mut rng = SplitMix64::new(8);
        let g = GridGeometry::new(32, 32, 1.0, 1.0, (0.0, 0.0)).unwrap();
        let u0 = GridField::from_fn(g, |x, _| {
            let base = if x < 16.0 { 0.2 } else { 0.8 };
            base + 0.05 * (rng.next_f64() - 0.5)
        })
        .unwrap();
        let op = pm_op();
        let variance = |f: &GridField| {
            let m = f.mean();
            f.values().iter().map(|v| (v - m) * (v - m)).sum::<f64>() / f.values().len() as f64
        };
        let mut u = u0.clone();
        let cfg = FdConfig::new(0.2, 5).unwrap();
        let mut prev_var = variance(&u);
        for _ in 0..4 {
            u = fd_solve(&u, &op, &cfg).unwrap();
            let var = variance(&u);
            assert!(var < prev_var, "variance did not shrink: {var} vs {prev_var}");
            prev_var = var;
        }
    }

    #[test]
    fn divergence_reports_step_index() {
        let g = GridGeometry::new(4, 4, 1.0, 1.0, (0.0, 0.0)).unwrap();
        let u0 = GridField::constant(g, 1e200).unwrap();
        // dt * MAX overflows on the very first update.
        let cfg = FdConfig::new(10.0, 3).unwrap();
        let rhs = |u: &GridField| GridField::constant(*u.geometry(), f64::MAX);
        let err = fd_solve_with(&u0, rhs, &cfg).unwrap_err();
        match err {
            Error::StepDivergence { step } => assert_eq!(step, 1),
            other => panic!("unexpected error {other}"),
        }
    }
}

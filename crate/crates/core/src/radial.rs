//! Closed-form ground truth for the radial curvature-flow benchmark.
//!
//! The benchmark problem is level-set curvature flow started from the
//! cone `u(x, y, 0) = sqrt(x^2 + y^2) - 1`, whose level circles shrink
//! with speed equal to their curvature. Successive correction iterates
//! have closed forms; this module carries them in two independently
//! coded shapes (a compact radial series and the fully expanded
//! Cartesian polynomials) so each guards the other against transcription
//! slips, plus a derived exact solution and a finite-difference residual
//! checker that validates it.

use crate::error::{Error, Result};

/// Point of evaluation for the radial closed forms; `r > 0` and `t >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    x: f64,
    y: f64,
    t: f64,
}

impl RadialPoint {
    pub fn new(x: f64, y: f64, t: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && t.is_finite()) {
            return Err(Error::param("non-finite evaluation point".to_string()));
        }
        if x * x + y * y <= 0.0 {
            return Err(Error::Singularity(
                "closed forms are singular at the spatial origin".to_string(),
            ));
        }
        if t < 0.0 {
            return Err(Error::param(format!("time must be non-negative, got {t}")));
        }
        Ok(Self { x, y, t })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn radius(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }
}

/// Coefficients of the compact radial form
/// `u_n = r - 1 + sum_{k=1..n} c_k t^k / r^{2k-1}`
/// for the first three iterates.
const RADIAL_COEFFS: [f64; 3] = [1.0, -0.5, 0.5];

/// Value of the n-th correction iterate (`n` in `0..=3`) in the compact
/// radial form.
pub fn closed_form_iterate(n: usize, p: &RadialPoint) -> Result<f64> {
    if n > 3 {
        return Err(Error::param(format!(
            "closed-form iterates are available for n in 0..=3, got {n}"
        )));
    }
    let r = p.radius();
    let mut value = r - 1.0;
    for (k, &coeff) in RADIAL_COEFFS.iter().take(n).enumerate() {
        let power = k as i32 + 1;
        value += coeff * p.t.powi(power) / r.powi(2 * power - 1);
    }
    Ok(value)
}

/// The same iterates written as the fully expanded Cartesian polynomials
/// over `sqrt(x^2 + y^2)`. Kept verbatim as an independent route; the
/// identity with [`closed_form_iterate`] is enforced by tests over dense
/// random samples.
pub fn closed_form_iterate_expanded(n: usize, p: &RadialPoint) -> Result<f64> {
    let (x, y, t) = (p.x, p.y, p.t);
    let x2 = x * x;
    let y2 = y * y;
    let r = (x2 + y2).sqrt();
    match n {
        0 => Ok(r - 1.0),
        1 => Ok((x2 + y2 + t - r) / r),
        2 => {
            let x4 = x2 * x2;
            let y4 = y2 * y2;
            let num = 2.0 * x4 + 2.0 * x2 * t - 2.0 * x2 * r + 4.0 * x2 * y2 + 2.0 * y4
                + 2.0 * y2 * t
                - t * t
                - 2.0 * r * y2;
            Ok(num / (2.0 * (x2 + y2).powf(1.5)))
        }
        3 => {
            let x4 = x2 * x2;
            let y4 = y2 * y2;
            let x6 = x4 * x2;
            let y6 = y4 * y2;
            let num = 2.0 * x6 + 6.0 * x4 * y2 - 2.0 * r * x4 + 2.0 * t * x4 + 6.0 * y4 * x2
                - 4.0 * r * x2 * y2
                - x2 * t * t
                + 4.0 * x2 * y2 * t
                - 2.0 * r * y4
                + t * t * t
                + 2.0 * y4 * t
                - t * t * y2
                + 2.0 * y6;
            Ok(num / (2.0 * (x2 + y2).powf(2.5)))
        }
        _ => Err(Error::param(format!(
            "closed-form iterates are available for n in 0..=3, got {n}"
        ))),
    }
}

/// Exact solution of the benchmark flow: `sqrt(x^2 + y^2 + 2t) - 1`.
///
/// Each level circle of radius `r0` shrinks to radius
/// `sqrt(r0^2 - 2t)`, which is precisely this level-set function. The
/// form is derived, not quoted; [`pde_residual`] plus the Taylor
/// agreement with [`closed_form_iterate`] validate it before anything
/// else relies on it.
pub fn exact_solution(p: &RadialPoint) -> Result<f64> {
    let arg = p.x * p.x + p.y * p.y + 2.0 * p.t;
    if arg <= 0.0 {
        return Err(Error::Singularity(format!(
            "exact solution undefined for x^2+y^2+2t = {arg}"
        )));
    }
    Ok(arg.sqrt() - 1.0)
}

/// Finite-difference residual of the benchmark PDE
/// `u_t - (uy^2 uxx - 2 ux uy uxy + ux^2 uyy) / (ux^2 + uy^2)`
/// for an arbitrary candidate `u(x, y, t)`, using central stencils of
/// widths `h` (space) and `dt` (time); `O(h^2 + dt^2)` for smooth
/// candidates.
pub fn pde_residual<F>(candidate: F, p: &RadialPoint, h: f64, dt: f64) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    if !(h > 0.0 && h.is_finite() && dt > 0.0 && dt.is_finite()) {
        return Err(Error::param(format!(
            "stencil widths must be positive, got h={h}, dt={dt}"
        )));
    }
    let (x, y, t) = (p.x, p.y, p.t);
    // The whole spatial stencil must stay away from the origin.
    let nearest_sq = [
        (x - h, y - h),
        (x - h, y),
        (x - h, y + h),
        (x, y - h),
        (x, y + h),
        (x + h, y - h),
        (x + h, y),
        (x + h, y + h),
    ]
    .iter()
    .map(|(px, py)| px * px + py * py)
    .fold(x * x + y * y, f64::min);
    if nearest_sq <= 0.0 {
        return Err(Error::Singularity(
            "spatial stencil crosses the origin".to_string(),
        ));
    }

    let u = candidate;
    let ut = (u(x, y, t + dt) - u(x, y, t - dt)) / (2.0 * dt);
    let ux = (u(x + h, y, t) - u(x - h, y, t)) / (2.0 * h);
    let uy = (u(x, y + h, t) - u(x, y - h, t)) / (2.0 * h);
    let uc = u(x, y, t);
    let uxx = (u(x + h, y, t) - 2.0 * uc + u(x - h, y, t)) / (h * h);
    let uyy = (u(x, y + h, t) - 2.0 * uc + u(x, y - h, t)) / (h * h);
    let uxy = (u(x + h, y + h, t) - u(x - h, y + h, t) - u(x + h, y - h, t)
        + u(x - h, y - h, t))
        / (4.0 * h * h);
    let grad_sq = ux * ux + uy * uy;
    if grad_sq < 1e-300 {
        return Err(Error::Singularity(
            "candidate has vanishing gradient at the evaluation point".to_string(),
        ));
    }
    Ok(ut - (uy * uy * uxx - 2.0 * ux * uy * uxy + ux * ux * uyy) / grad_sq)
}

/// Semi-analytic radial iterate of arbitrary order, used by the surface
/// export.
///
/// For radial data the correction sweep maps the series
/// `r - 1 + sum c_k t^k r^{1-2k}` to itself with the coefficient
/// recurrence `c_1 = 1`, `c_{k+1} = c_k (1 - 2k) / (k + 1)`; the first
/// three coefficients reproduce [`closed_form_iterate`] exactly, which is
/// what anchors the recurrence. Evaluation is Horner in `q = t / r^2`.
#[derive(Debug, Clone)]
pub struct RadialSeries {
    coeffs: Vec<f64>,
}

impl RadialSeries {
    pub fn new(order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order);
        if order >= 1 {
            coeffs.push(1.0);
            for k in 1..order {
                let prev = coeffs[k - 1];
                coeffs.push(prev * (1.0 - 2.0 * k as f64) / (k as f64 + 1.0));
            }
        }
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Evaluate the order-n iterate at radius `r > 0`, time `t`.
    pub fn eval(&self, r: f64, t: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Singularity(format!(
                "radial series is singular at r = {r}"
            )));
        }
        let q = t / (r * r);
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * q + c;
        }
        Ok(r - 1.0 + r * q * acc)
    }
}

//! Truncated, renormalized Gaussian smoothing kernels and discrete
//! convolution with reflect padding.

use crate::error::{Error, Result};
use crate::field::GridField;

/// Discrete bivariate Gaussian, truncated at `radius = ceil(3*sigma/h)`
/// cells and renormalized to unit sum.
///
/// Weights are stored row-major on the `(2*radius+1)^2` stencil and are
/// exactly 8-fold symmetric: the unnormalized weight depends on the
/// integer offsets only through `dx^2 + dy^2`.
#[derive(Debug, Clone)]
pub struct GaussianKernel {
    sigma: f64,
    radius: usize,
    weights: Vec<f64>,
}

impl GaussianKernel {
    /// Sample `exp(-(x^2+y^2)/(2 sigma^2))` at cell offsets scaled by `h`
    /// and renormalize to unit sum.
    pub fn new(sigma: f64, h: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param(format!("sigma must be positive, got {sigma}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::param(format!("spacing must be positive, got {h}")));
        }
        let radius = (3.0 * sigma / h).ceil() as usize;
        let side = 2 * radius + 1;
        let inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
        let mut weights = Vec::with_capacity(side * side);
        for dy in -(radius as isize)..=(radius as isize) {
            for dx in -(radius as isize)..=(radius as isize) {
                let dist_sq = ((dx * dx + dy * dy) as f64) * h * h;
                weights.push((-dist_sq * inv_two_sigma_sq).exp());
            }
        }
        let mut total = 0.0;
        for w in &weights {
            total += w;
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self {
            sigma,
            radius,
            weights,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Row-major weights on the `(2*radius+1)^2` stencil.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    fn weight(&self, dx: isize, dy: isize) -> f64 {
        let side = (2 * self.radius + 1) as isize;
        self.weights[((dy + self.radius as isize) * side + (dx + self.radius as isize)) as usize]
    }
}

/// Reflect an index across the boundary faces: `-1 -> 0`, `n -> n-1`.
///
/// Face reflection (rather than the node mirror used by the difference
/// operators) makes the convolution matrix doubly stochastic, so unit-sum
/// kernels preserve the grid mean as well as constants.
#[inline]
fn reflect_face(idx: isize, n: usize) -> usize {
    if idx < 0 {
        (-idx - 1) as usize
    } else if idx as usize >= n {
        2 * n - 1 - idx as usize
    } else {
        idx as usize
    }
}

/// Discrete convolution with reflect padding.
pub fn convolve(f: &GridField, kernel: &GaussianKernel) -> Result<GridField> {
    let g = *f.geometry();
    if kernel.radius >= g.nx().min(g.ny()) {
        return Err(Error::dim(format!(
            "kernel radius {} too large for {}x{} grid",
            kernel.radius,
            g.nx(),
            g.ny()
        )));
    }
    let r = kernel.radius as isize;
    let mut values = Vec::with_capacity(g.cells());
    for j in 0..g.ny() as isize {
        for i in 0..g.nx() as isize {
            let mut acc = 0.0;
            for dy in -r..=r {
                let jj = reflect_face(j + dy, g.ny());
                for dx in -r..=r {
                    let ii = reflect_face(i + dx, g.nx());
                    acc += kernel.weight(dx, dy) * f.get(ii, jj);
                }
            }
            values.push(acc);
        }
    }
    GridField::from_values(g, values)
}

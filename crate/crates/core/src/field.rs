//! Uniform-grid scalar and vector fields and the discrete differential
//! operators built on them.
//!
//! Boundaries follow the homogeneous Neumann condition throughout: ghost
//! nodes are mirror images of their interior neighbours (`f(-1) = f(1)`),
//! so the normal derivative of the reconstruction vanishes on every face.
//! All arithmetic is plain f64 with left-to-right accumulation; identical
//! inputs give bitwise-identical outputs.

use crate::error::{Error, Result};

/// Geometry of a uniform rectangular node grid.
///
/// Cell `(i, j)` sits at `(x0 + i·hx, y0 + j·hy)`; values are stored
/// row-major with `index = j·nx + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    origin: (f64, f64),
}

impl GridGeometry {
    /// Requires `nx, ny >= 3` (central differences need interior nodes)
    /// and positive finite spacings.
    pub fn new(nx: usize, ny: usize, hx: f64, hy: f64, origin: (f64, f64)) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::dim(format!(
                "grid must be at least 3x3, got {nx}x{ny}"
            )));
        }
        if !(hx > 0.0 && hx.is_finite() && hy > 0.0 && hy.is_finite()) {
            return Err(Error::param(format!(
                "grid spacings must be positive and finite, got hx={hx}, hy={hy}"
            )));
        }
        if !(origin.0.is_finite() && origin.1.is_finite()) {
            return Err(Error::param("grid origin must be finite".to_string()));
        }
        Ok(Self {
            nx,
            ny,
            hx,
            hy,
            origin,
        })
    }

    /// Square grid over `[x0, x1] x [y0, y1]` with spacing `h` on both axes.
    ///
    /// `x1 - x0` and `y1 - y0` must be (near-)integer multiples of `h`.
    pub fn from_domain(x0: f64, x1: f64, y0: f64, y1: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::param(format!("spacing must be positive, got {h}")));
        }
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::param(format!(
                "empty domain [{x0},{x1}]x[{y0},{y1}]"
            )));
        }
        let steps_x = (x1 - x0) / h;
        let steps_y = (y1 - y0) / h;
        let round_x = steps_x.round();
        let round_y = steps_y.round();
        if (steps_x - round_x).abs() > 1e-9 * steps_x.max(1.0)
            || (steps_y - round_y).abs() > 1e-9 * steps_y.max(1.0)
        {
            return Err(Error::param(format!(
                "domain extents must be multiples of h={h}"
            )));
        }
        Self::new(
            round_x as usize + 1,
            round_y as usize + 1,
            h,
            h,
            (x0, y0),
        )
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin.0 + i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.origin.1 + j as f64 * self.hy
    }
}

/// Mirror a signed node index about the boundary nodes: `-1 -> 1`,
/// `n -> n-2`. Valid for offsets up to `n-1`.
#[inline]
pub(crate) fn mirror_node(idx: isize, n: usize) -> usize {
    if idx < 0 {
        (-idx) as usize
    } else if idx as usize >= n {
        2 * (n - 1) - idx as usize
    } else {
        idx as usize
    }
}

/// Scalar field on a [`GridGeometry`]; every value is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl GridField {
    /// Field with all cells set to `value`.
    pub fn constant(geometry: GridGeometry, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::param(format!("non-finite fill value {value}")));
        }
        Ok(Self {
            geometry,
            values: vec![value; geometry.cells()],
        })
    }

    /// Sample `f(x, y)` at every node.
    pub fn from_fn(geometry: GridGeometry, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(geometry.cells());
        for j in 0..geometry.ny {
            let y = geometry.y(j);
            for i in 0..geometry.nx {
                values.push(f(geometry.x(i), y));
            }
        }
        Self::from_values(geometry, values)
    }

    /// Wrap raw row-major values, validating length and finiteness.
    pub fn from_values(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.cells() {
            return Err(Error::dim(format!(
                "expected {} values for a {}x{} grid, got {}",
                geometry.cells(),
                geometry.nx,
                geometry.ny,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!(
                "non-finite value at index {pos}"
            )));
        }
        Ok(Self { geometry, values })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.geometry.idx(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Left-to-right sum of all cell values.
    pub fn sum(&self) -> f64 {
        let mut acc = 0.0;
        for v in &self.values {
            acc += v;
        }
        acc
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    /// Max-norm distance to another field on the same grid.
    pub fn max_abs_diff(&self, other: &GridField) -> Result<f64> {
        self.check_same_grid(other)?;
        let mut worst = 0.0f64;
        for (a, b) in self.values.iter().zip(&other.values) {
            worst = worst.max((a - b).abs());
        }
        Ok(worst)
    }

    pub(crate) fn check_same_grid(&self, other: &GridField) -> Result<()> {
        if self.geometry != other.geometry {
            return Err(Error::dim("fields live on different grids".to_string()));
        }
        Ok(())
    }

    /// `self + scale * other`, elementwise. Rejects non-finite results to
    /// uphold the finiteness invariant.
    pub fn axpy(&self, scale: f64, other: &GridField) -> Result<GridField> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + scale * b)
            .collect();
        GridField::from_values(self.geometry, values)
    }

    /// Sampled absolute maximum, useful as a scale for tolerances.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Two-component vector field on a [`GridGeometry`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    geometry: GridGeometry,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl VectorField {
    pub fn from_components(geometry: GridGeometry, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != geometry.cells() || ys.len() != geometry.cells() {
            return Err(Error::dim(format!(
                "component length mismatch: {} and {} for {} cells",
                xs.len(),
                ys.len(),
                geometry.cells()
            )));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("non-finite vector component".to_string()));
        }
        Ok(Self { geometry, xs, ys })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    #[inline]
    pub fn x_at(&self, i: usize, j: usize) -> f64 {
        self.xs[self.geometry.idx(i, j)]
    }

    #[inline]
    pub fn y_at(&self, i: usize, j: usize) -> f64 {
        self.ys[self.geometry.idx(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.xs
            .iter()
            .chain(self.ys.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Central-difference gradient with mirrored ghost nodes.
///
/// On the boundary the mirror rule `f(-1) = f(1)` zeroes the normal
/// component, which is the discrete form of `du/dN = 0`.
pub fn gradient(f: &GridField) -> VectorField {
    let g = f.geometry;
    let mut xs = vec![0.0; g.cells()];
    let mut ys = vec![0.0; g.cells()];
    let inv2hx = 1.0 / (2.0 * g.hx);
    let inv2hy = 1.0 / (2.0 * g.hy);
    for j in 0..g.ny {
        let jm = mirror_node(j as isize - 1, g.ny);
        let jp = mirror_node(j as isize + 1, g.ny);
        for i in 0..g.nx {
            let im = mirror_node(i as isize - 1, g.nx);
            let ip = mirror_node(i as isize + 1, g.nx);
            let k = g.idx(i, j);
            xs[k] = (f.get(ip, j) - f.get(im, j)) * inv2hx;
            ys[k] = (f.get(i, jp) - f.get(i, jm)) * inv2hy;
        }
    }
    VectorField {
        geometry: g,
        xs,
        ys,
    }
}

/// Central-difference divergence with the same mirrored ghost rule as
/// [`gradient`].
///
/// Constant fields map to exactly zero everywhere. The discrete
/// divergence theorem (grid sum = 0) holds for vector fields whose
/// normal component vanishes on the two node layers nearest each
/// boundary -- the class produced by Neumann-consistent fluxes; see the
/// conservative flux forms in the diffusion operators for the variant
/// that telescopes exactly for arbitrary data.
pub fn divergence(v: &VectorField) -> GridField {
    let g = v.geometry;
    let mut values = vec![0.0; g.cells()];
    let inv2hx = 1.0 / (2.0 * g.hx);
    let inv2hy = 1.0 / (2.0 * g.hy);
    for j in 0..g.ny {
        let jm = mirror_node(j as isize - 1, g.ny);
        let jp = mirror_node(j as isize + 1, g.ny);
        for i in 0..g.nx {
            let im = mirror_node(i as isize - 1, g.nx);
            let ip = mirror_node(i as isize + 1, g.nx);
            values[g.idx(i, j)] = (v.x_at(ip, j) - v.x_at(im, j)) * inv2hx
                + (v.y_at(i, jp) - v.y_at(i, jm)) * inv2hy;
        }
    }
    GridField {
        geometry: g,
        values,
    }
}

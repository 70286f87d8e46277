//! Doubly periodic rectangular grid and real scalar fields on it.
//!
//! The grid covers `[0, Lx) x [0, Lz)` with uniform spacing. Fields are
//! stored row-major with x as the slow index: sample `(ix, iz)` lives at
//! `values[ix * nz + iz]`.

use crate::error::{Error, Result};

/// Doubly periodic grid: `nx * nz` samples on `[0, Lx) x [0, Lz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    nx: usize,
    nz: usize,
    lx: f64,
    lz: f64,
}

impl Grid2D {
    /// Both sample counts must be even and at least 8 so the spectral
    /// operators have a well-defined Nyquist mode and room for dealiasing.
    pub fn new(nx: usize, nz: usize, lx: f64, lz: f64) -> Result<Self> {
        if nx < 8 || nz < 8 || !nx.is_multiple_of(2) || !nz.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "nx and nz must be even and >= 8, got {nx} x {nz}"
            )));
        }
        if !(lx.is_finite() && lz.is_finite()) || lx <= 0.0 || lz <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "domain lengths must be positive and finite, got {lx} x {lz}"
            )));
        }
        Ok(Self { nx, nz, lx, lz })
    }

    /// Square grid on the `2*pi x 2*pi` torus, the standard test domain.
    pub fn square_two_pi(n: usize) -> Result<Self> {
        let l = 2.0 * std::f64::consts::PI;
        Self::new(n, n, l, l)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn lz(&self) -> f64 {
        self.lz
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dz(&self) -> f64 {
        self.lz / self.nz as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.nz
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn area(&self) -> f64 {
        self.lx * self.lz
    }

    #[inline]
    pub fn idx(&self, ix: usize, iz: usize) -> usize {
        debug_assert!(ix < self.nx && iz < self.nz);
        ix * self.nz + iz
    }

    pub fn x(&self, ix: usize) -> f64 {
        ix as f64 * self.dx()
    }

    pub fn z(&self, iz: usize) -> f64 {
        iz as f64 * self.dz()
    }

    /// Canonical coordinate fields x(i) and z(j) in `[0, L)`.
    pub fn coordinate_fields(&self) -> (ScalarField, ScalarField) {
        let x = ScalarField::from_fn(*self, |x, _| x);
        let z = ScalarField::from_fn(*self, |_, z| z);
        (x, z)
    }

    /// Largest mode index kept by the random-field band limit (one third of
    /// the Nyquist index). Products of two such fields stay resolvable and
    /// products of three stay below Nyquist, so identity checks are free of
    /// aliasing error.
    pub fn band_limit(&self) -> usize {
        (self.nx.min(self.nz) / 6).max(1)
    }
}

/// Real 64-bit samples on a [`Grid2D`], row-major with index `(ix, iz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Sample `f(x, z)` at the grid points.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for ix in 0..grid.nx() {
            let x = grid.x(ix);
            for iz in 0..grid.nz() {
                values.push(f(x, grid.z(iz)));
            }
        }
        Self { grid, values }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "value count {} does not match grid {} x {}",
                values.len(),
                grid.nx(),
                grid.nz()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, ix: usize, iz: usize) -> f64 {
        self.values[self.grid.idx(ix, iz)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn check_finite(&self, context: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFiniteField(context.to_string()))
        }
    }

    pub fn check_same_grid(&self, other: &ScalarField, context: &str) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(context.to_string()))
        }
    }

    /// Periodic quadrature: `sum(values) * dx * dz`, exact for resolved
    /// trigonometric polynomials. Neumaier-compensated so that heavily
    /// cancelling integrands (Jacobians, divergences) come out at the
    /// rounding floor rather than at naive-summation noise.
    pub fn integrate(&self) -> f64 {
        compensated_sum(&self.values) * self.grid.dx() * self.grid.dz()
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(&self.values) / self.grid.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn rms(&self) -> f64 {
        let sq: f64 = self.values.iter().map(|v| v * v).sum();
        (sq / self.grid.len() as f64).sqrt()
    }

    /// Largest pointwise difference against another field on the same grid.
    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    /// In-place `self += c * other`.
    pub fn add_scaled(&mut self, c: f64, other: &ScalarField) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    /// Cyclic shift by whole grid cells (periodic translation).
    pub fn shifted(&self, sx: usize, sz: usize) -> Self {
        let (nx, nz) = (self.grid.nx(), self.grid.nz());
        let mut out = Self::zeros(self.grid);
        for ix in 0..nx {
            for iz in 0..nz {
                let jx = (ix + sx) % nx;
                let jz = (iz + sz) % nz;
                out.values[self.grid.idx(jx, jz)] = self.values[self.grid.idx(ix, iz)];
            }
        }
        out
    }
}

impl std::ops::Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl std::ops::Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

/// Neumaier variant of Kahan summation.
fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

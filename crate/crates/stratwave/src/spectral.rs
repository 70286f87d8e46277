//! Fourier differentiation on the periodic grid.
//!
//! All derivatives are computed in spectral space, so they are exact (to
//! rounding) for band-limited fields. Odd-order derivatives zero the
//! Nyquist mode; even orders keep its real multiplier. `inv_laplacian`
//! fixes the zero-mean gauge: the mean of the input is discarded and the
//! output has zero mean.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField};

/// Differentiation axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Z,
}

type PlanMap = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

struct PlanCache {
    planner: Mutex<FftPlanner<f64>>,
    plans: Mutex<PlanMap>,
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| PlanCache {
        planner: Mutex::new(FftPlanner::new()),
        plans: Mutex::new(HashMap::new()),
    });
    let mut plans = cache.plans.lock().unwrap();
    plans
        .entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = cache.planner.lock().unwrap();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// Signed mode index for position `i` on an `n`-point axis.
#[inline]
fn mode_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Angular wavenumber of mode `i`: `2*pi*j/L` with `j` the signed index.
#[inline]
fn wavenumber(i: usize, n: usize, l: f64) -> f64 {
    2.0 * std::f64::consts::PI * mode_index(i, n) as f64 / l
}

/// Full 2D complex spectrum of a real field, layout matching the field
/// (`kx` slow, `kz` contiguous). Unnormalized forward transform.
pub(crate) fn fft2(field: &ScalarField) -> Vec<Complex<f64>> {
    let grid = field.grid();
    let mut buf: Vec<Complex<f64>> = field
        .values()
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    fft2_in_place(grid, &mut buf, false);
    buf
}

/// Inverse of [`fft2`], returning the real part with `1/(nx*nz)`
/// normalization applied.
pub(crate) fn ifft2(grid: Grid2D, spectrum: &[Complex<f64>]) -> ScalarField {
    let mut buf = spectrum.to_vec();
    fft2_in_place(grid, &mut buf, true);
    let norm = 1.0 / grid.len() as f64;
    let values = buf.iter().map(|c| c.re * norm).collect();
    ScalarField::from_values(grid, values).expect("ifft2 preserves length")
}

fn fft2_in_place(grid: Grid2D, buf: &mut [Complex<f64>], inverse: bool) {
    let (nx, nz) = (grid.nx(), grid.nz());
    // z-lines are contiguous: one batched call does all nx of them.
    plan(nz, inverse).process(buf);
    // x-lines are strided; transpose, batch, transpose back.
    let mut t = vec![Complex::new(0.0, 0.0); nx * nz];
    for ix in 0..nx {
        for iz in 0..nz {
            t[iz * nx + ix] = buf[ix * nz + iz];
        }
    }
    plan(nx, inverse).process(&mut t);
    for ix in 0..nx {
        for iz in 0..nz {
            buf[ix * nz + iz] = t[iz * nx + ix];
        }
    }
}

/// Multiplier table for one axis and derivative order.
fn axis_multipliers(n: usize, l: f64, order: u32) -> Vec<Complex<f64>> {
    (0..n)
        .map(|i| {
            let k = wavenumber(i, n, l);
            match order {
                1 => {
                    // The Nyquist mode has no well-defined odd derivative on
                    // a real grid; drop it.
                    if i == n / 2 {
                        Complex::new(0.0, 0.0)
                    } else {
                        Complex::new(0.0, k)
                    }
                }
                2 => Complex::new(-k * k, 0.0),
                _ => unreachable!("derivative order is 1 or 2"),
            }
        })
        .collect()
}

/// Spectral derivative along one axis.
///
/// `order` is 1 or 2. Exact for band-limited inputs up to Nyquist.
pub fn diff(field: &ScalarField, axis: Axis, order: u32) -> Result<ScalarField> {
    if order != 1 && order != 2 {
        return Err(Error::InvalidParameter(format!(
            "derivative order must be 1 or 2, got {order}"
        )));
    }
    field.check_finite("diff input")?;
    let grid = field.grid();
    let (nx, nz) = (grid.nx(), grid.nz());
    let mut buf: Vec<Complex<f64>> = field
        .values()
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    match axis {
        Axis::Z => {
            let mult = axis_multipliers(nz, grid.lz(), order);
            plan(nz, false).process(&mut buf);
            for ix in 0..nx {
                for iz in 0..nz {
                    buf[ix * nz + iz] *= mult[iz];
                }
            }
            plan(nz, true).process(&mut buf);
            let norm = 1.0 / nz as f64;
            let values = buf.iter().map(|c| c.re * norm).collect();
            ScalarField::from_values(grid, values)
        }
        Axis::X => {
            let mult = axis_multipliers(nx, grid.lx(), order);
            let mut t = vec![Complex::new(0.0, 0.0); nx * nz];
            for ix in 0..nx {
                for iz in 0..nz {
                    t[iz * nx + ix] = buf[ix * nz + iz];
                }
            }
            plan(nx, false).process(&mut t);
            for iz in 0..nz {
                for ix in 0..nx {
                    t[iz * nx + ix] *= mult[ix];
                }
            }
            plan(nx, true).process(&mut t);
            let norm = 1.0 / nx as f64;
            let mut values = vec![0.0; nx * nz];
            for ix in 0..nx {
                for iz in 0..nz {
                    values[ix * nz + iz] = t[iz * nx + ix].re * norm;
                }
            }
            ScalarField::from_values(grid, values)
        }
    }
}

/// `-(kx^2 + kz^2)` multiplier at spectrum position `(ix, iz)`.
#[inline]
pub(crate) fn neg_k_squared(grid: Grid2D, ix: usize, iz: usize) -> f64 {
    let kx = wavenumber(ix, grid.nx(), grid.lx());
    let kz = wavenumber(iz, grid.nz(), grid.lz());
    -(kx * kx + kz * kz)
}

/// Two-dimensional Laplacian.
pub fn laplacian(field: &ScalarField) -> Result<ScalarField> {
    field.check_finite("laplacian input")?;
    let grid = field.grid();
    let mut spec = fft2(field);
    for ix in 0..grid.nx() {
        for iz in 0..grid.nz() {
            spec[grid.idx(ix, iz)] *= neg_k_squared(grid, ix, iz);
        }
    }
    Ok(ifft2(grid, &spec))
}

/// Unique zero-mean solution of `laplacian(u) = input - mean(input)`.
///
/// The stream function is defined up to a constant; pinning the mean to
/// zero makes snapshots reproducible bit for bit.
pub fn inv_laplacian(field: &ScalarField) -> Result<ScalarField> {
    field.check_finite("inv_laplacian input")?;
    let grid = field.grid();
    let mut spec = fft2(field);
    for ix in 0..grid.nx() {
        for iz in 0..grid.nz() {
            let i = grid.idx(ix, iz);
            if ix == 0 && iz == 0 {
                spec[i] = Complex::new(0.0, 0.0);
            } else {
                spec[i] /= neg_k_squared(grid, ix, iz);
            }
        }
    }
    Ok(ifft2(grid, &spec))
}

/// Jacobian bracket `J(a, b) = a_x b_z - a_z b_x`.
///
/// Derivatives are spectral; the products are formed pointwise in physical
/// space with no dealiasing (this is the diagnostic bracket — the time
/// stepper applies its own 2/3-rule filter).
pub fn jacobian(a: &ScalarField, b: &ScalarField) -> Result<ScalarField> {
    a.check_same_grid(b, "jacobian operands")?;
    let ax = diff(a, Axis::X, 1)?;
    let az = diff(a, Axis::Z, 1)?;
    let bx = diff(b, Axis::X, 1)?;
    let bz = diff(b, Axis::Z, 1)?;
    Ok(&ax.mul(&bz) - &az.mul(&bx))
}

/// Zero every mode with `|jx| > nx/3` or `|jz| > nz/3` (2/3-rule mask).
pub(crate) fn dealias_in_place(grid: Grid2D, spec: &mut [Complex<f64>]) {
    let cut_x = grid.nx() as i64 / 3;
    let cut_z = grid.nz() as i64 / 3;
    for ix in 0..grid.nx() {
        let jx = mode_index(ix, grid.nx());
        for iz in 0..grid.nz() {
            let jz = mode_index(iz, grid.nz());
            if jx.abs() > cut_x || jz.abs() > cut_z {
                spec[grid.idx(ix, iz)] = Complex::new(0.0, 0.0);
            }
        }
    }
}

/// Spectral-space helpers shared by the model integrator.
pub(crate) struct SpectralOps {
    pub grid: Grid2D,
    ikx: Vec<Complex<f64>>,
    ikz: Vec<Complex<f64>>,
}

impl SpectralOps {
    pub fn new(grid: Grid2D) -> Self {
        Self {
            grid,
            ikx: axis_multipliers(grid.nx(), grid.lx(), 1),
            ikz: axis_multipliers(grid.nz(), grid.lz(), 1),
        }
    }

    pub fn deriv_x(&self, spec: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let mut out = spec.to_vec();
        for ix in 0..self.grid.nx() {
            for iz in 0..self.grid.nz() {
                out[self.grid.idx(ix, iz)] *= self.ikx[ix];
            }
        }
        out
    }

    pub fn deriv_z(&self, spec: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let mut out = spec.to_vec();
        for ix in 0..self.grid.nx() {
            for iz in 0..self.grid.nz() {
                out[self.grid.idx(ix, iz)] *= self.ikz[iz];
            }
        }
        out
    }

    /// Stream-function spectrum from vorticity: divide by `-(k^2)`, zero
    /// the mean mode.
    pub fn psi_from_zeta(&self, zeta: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let mut out = zeta.to_vec();
        for ix in 0..self.grid.nx() {
            for iz in 0..self.grid.nz() {
                let i = self.grid.idx(ix, iz);
                if ix == 0 && iz == 0 {
                    out[i] = Complex::new(0.0, 0.0);
                } else {
                    out[i] /= neg_k_squared(self.grid, ix, iz);
                }
            }
        }
        out
    }

    pub fn to_physical(&self, spec: &[Complex<f64>]) -> ScalarField {
        ifft2(self.grid, spec)
    }

    pub fn to_spectral(&self, field: &ScalarField) -> Vec<Complex<f64>> {
        fft2(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid64() -> Grid2D {
        Grid2D::square_two_pi(64).unwrap()
    }

    #[test]
    fn diff_single_mode_is_exact() {
        let g = grid64();
        let f = ScalarField::from_fn(g, |x, _| x.sin());
        let d = diff(&f, Axis::X, 1).unwrap();
        let exact = ScalarField::from_fn(g, |x, _| x.cos());
        assert!(d.max_abs_diff(&exact) <= 1e-12);
    }

    #[test]
    fn diff_scales_with_domain_length() {
        let g = Grid2D::new(64, 64, 4.0 * PI, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(g, |x, _| (2.0 * PI * x / g.lx()).sin());
        let d = diff(&f, Axis::X, 1).unwrap();
        let c = 2.0 * PI / g.lx();
        let exact = ScalarField::from_fn(g, |x, _| c * (2.0 * PI * x / g.lx()).cos());
        assert!(d.max_abs_diff(&exact) <= 1e-12);
    }

    #[test]
    fn diff_constant_is_zero() {
        let g = grid64();
        let f = ScalarField::constant(g, 3.7);
        for axis in [Axis::X, Axis::Z] {
            for order in [1, 2] {
                let d = diff(&f, axis, order).unwrap();
                assert!(d.max_abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn diff_rejects_non_finite() {
        let g = grid64();
        let mut f = ScalarField::zeros(g);
        f.values_mut()[5] = f64::NAN;
        assert!(matches!(
            diff(&f, Axis::X, 1),
            Err(Error::NonFiniteField(_))
        ));
    }

    #[test]
    fn diff_grid_refinement_oracle() {
        // exp(sin x) is smooth and periodic, so spectral accuracy means the
        // 64- and 128-point derivatives agree far below truncation level.
        let f = |x: f64| x.sin().exp();
        let df = |x: f64| x.cos() * x.sin().exp();
        for n in [64usize, 128] {
            let g = Grid2D::new(n, 8, 2.0 * PI, 2.0 * PI).unwrap();
            let field = ScalarField::from_fn(g, |x, _| f(x));
            let d = diff(&field, Axis::X, 1).unwrap();
            let exact = ScalarField::from_fn(g, |x, _| df(x));
            assert!(
                d.max_abs_diff(&exact) <= 1e-10,
                "n = {n}: {}",
                d.max_abs_diff(&exact)
            );
        }
    }

    #[test]
    fn second_derivative_composes() {
        let g = grid64();
        let f = ScalarField::from_fn(g, |x, z| (2.0 * x).sin() * (3.0 * z).cos() + (x - z).sin());
        for axis in [Axis::X, Axis::Z] {
            let d2 = diff(&f, axis, 2).unwrap();
            let dd = diff(&diff(&f, axis, 1).unwrap(), axis, 1).unwrap();
            assert!(d2.max_abs_diff(&dd) <= 1e-11);
        }
    }

    #[test]
    fn laplacian_of_product_mode() {
        let g = grid64();
        let f = ScalarField::from_fn(g, |x, z| x.sin() * z.sin());
        let lap = laplacian(&f).unwrap();
        let exact = f.scaled(-2.0);
        assert!(lap.max_abs_diff(&exact) <= 1e-12);
    }

    #[test]
    fn inv_laplacian_gauge_identity() {
        let g = grid64();
        let psi = ScalarField::from_fn(g, |x, z| (2.0 * x).sin() * z.cos() + 0.5 * (x + z).cos() + 1.25);
        let back = inv_laplacian(&laplacian(&psi).unwrap()).unwrap();
        let centered = psi.map(|v| v - psi.mean());
        assert!(back.max_abs_diff(&centered) <= 1e-12);
        assert!(back.mean().abs() <= 1e-13);
    }

    #[test]
    fn inv_laplacian_forward_oracle() {
        let g = grid64();
        let rhs = ScalarField::from_fn(g, |x, z| -2.0 * x.sin() * z.sin());
        let u = inv_laplacian(&rhs).unwrap();
        let exact = ScalarField::from_fn(g, |x, z| x.sin() * z.sin());
        assert!(u.max_abs_diff(&exact) <= 1e-12);
    }

    #[test]
    fn jacobian_of_field_with_itself_vanishes() {
        let g = grid64();
        let f = ScalarField::from_fn(g, |x, z| (2.0 * x + z).sin() + (x - 3.0 * z).cos());
        let j = jacobian(&f, &f).unwrap();
        assert!(j.max_abs() <= 1e-12);
    }

    #[test]
    fn jacobian_of_separated_modes() {
        let g = grid64();
        let a = ScalarField::from_fn(g, |x, _| x.sin());
        let b = ScalarField::from_fn(g, |_, z| z.sin());
        let j = jacobian(&a, &b).unwrap();
        let exact = ScalarField::from_fn(g, |x, z| x.cos() * z.cos());
        assert!(j.max_abs_diff(&exact) <= 1e-12);
    }

    #[test]
    fn jacobian_rejects_grid_mismatch() {
        let a = ScalarField::zeros(grid64());
        let b = ScalarField::zeros(Grid2D::square_two_pi(32).unwrap());
        assert!(matches!(jacobian(&a, &b), Err(Error::GridMismatch(_))));
    }
}

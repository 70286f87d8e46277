//! Seeded band-limited random fields for the verification suites.
//!
//! Every random quantity in the crate flows from a single 64-bit seed
//! through a counter-mode stream cipher (ChaCha8), so any probe run can be
//! replayed exactly from the seed printed in a report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;

use crate::grid::{Grid2D, ScalarField};
use crate::model::FieldState;
use crate::spectral::ifft2;

/// Deterministic sampler of smooth random fields.
pub struct FieldSampler {
    rng: ChaCha8Rng,
}

impl FieldSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Random real field with modes `|jx|, |jz| <= kmax`, normalized to
    /// unit rms. Includes the mean mode, which triviality probes need as a
    /// witness.
    pub fn band_limited(&mut self, grid: Grid2D, kmax: usize) -> ScalarField {
        let (nx, nz) = (grid.nx(), grid.nz());
        assert!(kmax < nx / 2 && kmax < nz / 2, "band limit beyond Nyquist");
        let k = kmax as i64;
        let mut spec = vec![Complex::new(0.0, 0.0); grid.len()];
        // Fill the half-spectrum and mirror to keep the field real.
        for jx in -k..=k {
            for jz in -k..=k {
                if jx < 0 || (jx == 0 && jz < 0) {
                    continue;
                }
                let re: f64 = self.rng.gen_range(-1.0..1.0);
                let im: f64 = self.rng.gen_range(-1.0..1.0);
                let ix = jx.rem_euclid(nx as i64) as usize;
                let iz = jz.rem_euclid(nz as i64) as usize;
                let cx = (-jx).rem_euclid(nx as i64) as usize;
                let cz = (-jz).rem_euclid(nz as i64) as usize;
                if jx == 0 && jz == 0 {
                    spec[grid.idx(0, 0)] = Complex::new(re, 0.0);
                } else {
                    spec[grid.idx(ix, iz)] = Complex::new(re, im);
                    spec[grid.idx(cx, cz)] = Complex::new(re, -im);
                }
            }
        }
        let field = ifft2(grid, &spec);
        let rms = field.rms();
        if rms > 0.0 {
            field.scaled(1.0 / rms)
        } else {
            field
        }
    }

    /// Band-limited field at the grid's default band limit (a third of
    /// Nyquist).
    pub fn field(&mut self, grid: Grid2D) -> ScalarField {
        self.band_limited(grid, grid.band_limit())
    }

    /// Zero-mean variant, used where a mean mode would be pure gauge.
    pub fn zero_mean_field(&mut self, grid: Grid2D) -> ScalarField {
        let f = self.field(grid);
        let m = f.mean();
        f.map(|v| v - m)
    }

    /// Random state `(v, rho, psi)` at time `t = 0`, each component unit
    /// rms and band-limited, scaled by `amplitude`.
    pub fn state(&mut self, grid: Grid2D, amplitude: f64) -> FieldState {
        FieldState {
            t: 0.0,
            v: self.field(grid).scaled(amplitude),
            rho: self.field(grid).scaled(amplitude),
            psi: self.field(grid).scaled(amplitude),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }
}

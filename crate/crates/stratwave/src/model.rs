//! The rotating stratified-wave model in stream-function/vorticity form,
//! with an explicit RK4 pseudo-spectral integrator.
//!
//! Dependent variables are the horizontal velocity `v`, the density
//! perturbation `rho` and the stream function `psi`; the vorticity
//! `zeta = laplacian(psi)` is prognostic and `psi` is recovered through the
//! zero-mean inverse Laplacian. The evolution equations are
//!
//! ```text
//! zeta_t = J(psi, zeta) + g rho_x + f v_z
//! v_t    = J(psi, v)    - f psi_z
//! rho_t  = J(psi, rho)  - (N^2/g) psi_x
//! ```
//!
//! with the Jacobian bracket `J(a, b) = a_x b_z - a_z b_x`.

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField};
use crate::params::PhysicalParams;
use crate::spectral::{self, dealias_in_place, diff, inv_laplacian, jacobian, Axis, SpectralOps};

/// The dependent variables sampled on one grid at time `t`.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub t: f64,
    pub v: ScalarField,
    pub rho: ScalarField,
    pub psi: ScalarField,
}

impl FieldState {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            t: 0.0,
            v: ScalarField::zeros(grid),
            rho: ScalarField::zeros(grid),
            psi: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.v.grid()
    }

    /// Derived vorticity `zeta = laplacian(psi)`.
    pub fn zeta(&self) -> Result<ScalarField> {
        spectral::laplacian(&self.psi)
    }

    pub fn validate(&self) -> Result<()> {
        self.v.check_same_grid(&self.rho, "state fields")?;
        self.v.check_same_grid(&self.psi, "state fields")?;
        self.v.check_finite("state v")?;
        self.rho.check_finite("state rho")?;
        self.psi.check_finite("state psi")?;
        Ok(())
    }

    /// Largest field amplitude, used for blow-up monitoring and scales.
    pub fn max_abs(&self) -> f64 {
        self.v
            .max_abs()
            .max(self.rho.max_abs())
            .max(self.psi.max_abs())
    }
}

/// Time derivatives of the state returned by [`rhs`].
///
/// `dpsi_dt` is reconstructed in the zero-mean gauge, so
/// `laplacian(dpsi_dt) = dzeta_dt - mean(dzeta_dt)`.
#[derive(Debug, Clone)]
pub struct Tendencies {
    pub dv_dt: ScalarField,
    pub drho_dt: ScalarField,
    pub dzeta_dt: ScalarField,
    pub dpsi_dt: ScalarField,
}

/// Supplied time derivatives for residual evaluation. These need not come
/// from [`rhs`]; the verification suites also probe the equations with
/// free (random) tendencies.
#[derive(Debug, Clone)]
pub struct StateTendencies {
    pub v_t: ScalarField,
    pub rho_t: ScalarField,
    pub psi_t: ScalarField,
    pub zeta_t: ScalarField,
}

impl From<&Tendencies> for StateTendencies {
    fn from(t: &Tendencies) -> Self {
        Self {
            v_t: t.dv_dt.clone(),
            rho_t: t.drho_dt.clone(),
            psi_t: t.dpsi_dt.clone(),
            zeta_t: t.dzeta_dt.clone(),
        }
    }
}

/// Evaluate the model right-hand side at one state.
///
/// This is the diagnostic evaluation: products are formed pointwise with
/// no dealiasing, so on band-limited fields the result is exact and the
/// verification identities close to rounding.
pub fn rhs(state: &FieldState, params: &PhysicalParams) -> Result<Tendencies> {
    state.validate()?;
    let zeta = state.zeta()?;

    let mut dzeta = jacobian(&state.psi, &zeta)?;
    dzeta.add_scaled(params.g, &diff(&state.rho, Axis::X, 1)?);
    dzeta.add_scaled(params.f, &diff(&state.v, Axis::Z, 1)?);

    let mut dv = jacobian(&state.psi, &state.v)?;
    dv.add_scaled(-params.f, &diff(&state.psi, Axis::Z, 1)?);

    let mut drho = jacobian(&state.psi, &state.rho)?;
    drho.add_scaled(-params.n2_over_g(), &diff(&state.psi, Axis::X, 1)?);

    for (field, name) in [(&dzeta, "dzeta_dt"), (&dv, "dv_dt"), (&drho, "drho_dt")] {
        if !field.is_finite() {
            let _ = name;
            return Err(Error::BlowUp { t: state.t });
        }
    }

    let dpsi = inv_laplacian(&dzeta)?;
    Ok(Tendencies {
        dv_dt: dv,
        drho_dt: drho,
        dzeta_dt: dzeta,
        dpsi_dt: dpsi,
    })
}

/// Left-minus-right residual fields of the three model equations for a
/// state with supplied time derivatives:
///
/// ```text
/// r0 = zeta_t - g rho_x - f v_z - J(psi, zeta)
/// r1 = v_t + f psi_z - J(psi, v)
/// r2 = rho_t + (N^2/g) psi_x - J(psi, rho)
/// ```
pub fn residuals(
    state: &FieldState,
    tend: &StateTendencies,
    params: &PhysicalParams,
) -> Result<[ScalarField; 3]> {
    state.validate()?;
    let zeta = state.zeta()?;

    let mut r0 = tend.zeta_t.clone();
    r0.add_scaled(-params.g, &diff(&state.rho, Axis::X, 1)?);
    r0.add_scaled(-params.f, &diff(&state.v, Axis::Z, 1)?);
    r0.add_scaled(-1.0, &jacobian(&state.psi, &zeta)?);

    let mut r1 = tend.v_t.clone();
    r1.add_scaled(params.f, &diff(&state.psi, Axis::Z, 1)?);
    r1.add_scaled(-1.0, &jacobian(&state.psi, &state.v)?);

    let mut r2 = tend.rho_t.clone();
    r2.add_scaled(params.n2_over_g(), &diff(&state.psi, Axis::X, 1)?);
    r2.add_scaled(-1.0, &jacobian(&state.psi, &state.rho)?);

    Ok([r0, r1, r2])
}

/// Pointwise magnitude scales of the three residuals (sums of absolute
/// term values), for tolerance normalization.
pub fn residual_scales(
    state: &FieldState,
    tend: &StateTendencies,
    params: &PhysicalParams,
) -> Result<[f64; 3]> {
    let zeta = state.zeta()?;
    let j_pz = jacobian(&state.psi, &zeta)?;
    let j_pv = jacobian(&state.psi, &state.v)?;
    let j_pr = jacobian(&state.psi, &state.rho)?;
    let s0 = tend.zeta_t.max_abs()
        + params.g * diff(&state.rho, Axis::X, 1)?.max_abs()
        + params.f.abs() * diff(&state.v, Axis::Z, 1)?.max_abs()
        + j_pz.max_abs();
    let s1 = tend.v_t.max_abs()
        + params.f.abs() * diff(&state.psi, Axis::Z, 1)?.max_abs()
        + j_pv.max_abs();
    let s2 = tend.rho_t.max_abs()
        + params.n2_over_g() * diff(&state.psi, Axis::X, 1)?.max_abs()
        + j_pr.max_abs();
    Ok([s0.max(1.0), s1.max(1.0), s2.max(1.0)])
}

/// Time-stepper options. The model is inviscid; the hyperviscosity is an
/// optional stabilizer for under-resolved exploratory runs. It defaults
/// off and no verification or acceptance run enables it.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepOptions {
    /// Damping rate of the eighth-order spectral filter at the Nyquist
    /// scale: after each step every prognostic coefficient is multiplied
    /// by `exp(-nu * dt * (|k|^2 / k_nyq^2)^4)`. Zero disables the filter.
    pub hyperviscosity: f64,
}

/// Prognostic spectra `(v, rho, zeta)`; the integrator state.
struct SpectralState {
    vh: Vec<Complex<f64>>,
    rh: Vec<Complex<f64>>,
    zh: Vec<Complex<f64>>,
}

struct Integrator {
    ops: SpectralOps,
    params: PhysicalParams,
    options: StepOptions,
}

impl Integrator {
    fn new(grid: Grid2D, params: PhysicalParams, options: StepOptions) -> Self {
        Self {
            ops: SpectralOps::new(grid),
            params,
            options,
        }
    }

    fn encode(&self, state: &FieldState) -> SpectralState {
        let grid = self.ops.grid;
        let vh = self.ops.to_spectral(&state.v);
        let rh = self.ops.to_spectral(&state.rho);
        let mut zh = self.ops.to_spectral(&state.psi);
        for ix in 0..grid.nx() {
            for iz in 0..grid.nz() {
                zh[grid.idx(ix, iz)] *= spectral::neg_k_squared(grid, ix, iz);
            }
        }
        SpectralState { vh, rh, zh }
    }

    fn decode(&self, s: &SpectralState, t: f64) -> FieldState {
        FieldState {
            t,
            v: self.ops.to_physical(&s.vh),
            rho: self.ops.to_physical(&s.rh),
            psi: self.ops.to_physical(&self.ops.psi_from_zeta(&s.zh)),
        }
    }

    /// Spectral tendencies. The Jacobian products are evaluated
    /// pseudo-spectrally and truncated by the 2/3 rule; the linear terms
    /// are exact multiplier operations.
    fn tendencies(&self, s: &SpectralState) -> SpectralState {
        let grid = self.ops.grid;
        let p = &self.params;

        let ph = self.ops.psi_from_zeta(&s.zh);
        let psi_x = self.ops.to_physical(&self.ops.deriv_x(&ph));
        let psi_z = self.ops.to_physical(&self.ops.deriv_z(&ph));
        let v_x = self.ops.to_physical(&self.ops.deriv_x(&s.vh));
        let v_z = self.ops.to_physical(&self.ops.deriv_z(&s.vh));
        let r_x = self.ops.to_physical(&self.ops.deriv_x(&s.rh));
        let r_z = self.ops.to_physical(&self.ops.deriv_z(&s.rh));
        let z_x = self.ops.to_physical(&self.ops.deriv_x(&s.zh));
        let z_z = self.ops.to_physical(&self.ops.deriv_z(&s.zh));

        let bracket = |bz: &ScalarField, bx: &ScalarField| {
            let j = &psi_x.mul(bz) - &psi_z.mul(bx);
            let mut jh = self.ops.to_spectral(&j);
            dealias_in_place(grid, &mut jh);
            jh
        };

        let jz = bracket(&z_z, &z_x);
        let jv = bracket(&v_z, &v_x);
        let jr = bracket(&r_z, &r_x);

        let rx_h = self.ops.deriv_x(&s.rh);
        let vz_h = self.ops.deriv_z(&s.vh);
        let px_h = self.ops.deriv_x(&ph);
        let pz_h = self.ops.deriv_z(&ph);

        let n = grid.len();
        let mut dz = jz;
        let mut dv = jv;
        let mut dr = jr;
        let n2g = p.n2_over_g();
        for i in 0..n {
            dz[i] += p.g * rx_h[i] + p.f * vz_h[i];
            dv[i] -= p.f * pz_h[i];
            dr[i] -= n2g * px_h[i];
        }
        SpectralState {
            vh: dv,
            rh: dr,
            zh: dz,
        }
    }

    fn is_finite(s: &SpectralState) -> bool {
        s.vh.iter().all(|c| c.re.is_finite() && c.im.is_finite())
            && s.rh.iter().all(|c| c.re.is_finite() && c.im.is_finite())
            && s.zh.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn spectral_amplitude(s: &SpectralState) -> f64 {
        let max = |v: &[Complex<f64>]| v.iter().fold(0.0f64, |m, c| m.max(c.norm_sqr()));
        max(&s.vh).max(max(&s.rh)).max(max(&s.zh)).sqrt()
    }

    /// One classical RK4 step, followed by the spectral filter when
    /// hyperviscosity is enabled.
    fn step(&self, s: &SpectralState, dt: f64) -> SpectralState {
        let combine = |base: &SpectralState, c: f64, k: &SpectralState| SpectralState {
            vh: axpy(&base.vh, c, &k.vh),
            rh: axpy(&base.rh, c, &k.rh),
            zh: axpy(&base.zh, c, &k.zh),
        };
        let k1 = self.tendencies(s);
        let k2 = self.tendencies(&combine(s, dt / 2.0, &k1));
        let k3 = self.tendencies(&combine(s, dt / 2.0, &k2));
        let k4 = self.tendencies(&combine(s, dt, &k3));
        let n = s.vh.len();
        let w = dt / 6.0;
        let mut out = SpectralState {
            vh: vec![Complex::new(0.0, 0.0); n],
            rh: vec![Complex::new(0.0, 0.0); n],
            zh: vec![Complex::new(0.0, 0.0); n],
        };
        for i in 0..n {
            out.vh[i] = s.vh[i] + w * (k1.vh[i] + 2.0 * k2.vh[i] + 2.0 * k3.vh[i] + k4.vh[i]);
            out.rh[i] = s.rh[i] + w * (k1.rh[i] + 2.0 * k2.rh[i] + 2.0 * k3.rh[i] + k4.rh[i]);
            out.zh[i] = s.zh[i] + w * (k1.zh[i] + 2.0 * k2.zh[i] + 2.0 * k3.zh[i] + k4.zh[i]);
        }
        if self.options.hyperviscosity > 0.0 {
            self.filter(&mut out, dt);
        }
        out
    }

    /// Integrating factor `exp(-nu dt (|k|^2/k_nyq^2)^4)` on every
    /// prognostic coefficient.
    fn filter(&self, s: &mut SpectralState, dt: f64) {
        let grid = self.ops.grid;
        let nyq_x = std::f64::consts::PI * grid.nx() as f64 / grid.lx();
        let nyq_z = std::f64::consts::PI * grid.nz() as f64 / grid.lz();
        let k2_nyq = nyq_x * nyq_x + nyq_z * nyq_z;
        let nu = self.options.hyperviscosity;
        for ix in 0..grid.nx() {
            for iz in 0..grid.nz() {
                let i = grid.idx(ix, iz);
                let ratio = -spectral::neg_k_squared(grid, ix, iz) / k2_nyq;
                let factor = (-nu * dt * ratio.powi(4)).exp();
                s.vh[i] *= factor;
                s.rh[i] *= factor;
                s.zh[i] *= factor;
            }
        }
    }
}

fn axpy(a: &[Complex<f64>], c: f64, b: &[Complex<f64>]) -> Vec<Complex<f64>> {
    a.iter().zip(b).map(|(x, y)| x + c * y).collect()
}

/// Advance the state by one RK4 step of size `dt`, with the Jacobian
/// products dealiased by the 2/3 rule. The returned `psi` is in the
/// zero-mean gauge.
pub fn step_rk4(state: &FieldState, params: &PhysicalParams, dt: f64) -> Result<FieldState> {
    step_rk4_with(state, params, dt, StepOptions::default())
}

/// [`step_rk4`] with explicit [`StepOptions`].
pub fn step_rk4_with(
    state: &FieldState,
    params: &PhysicalParams,
    dt: f64,
    options: StepOptions,
) -> Result<FieldState> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    state.validate()?;
    let integ = Integrator::new(state.grid(), *params, options);
    let next = integ.step(&integ.encode(state), dt);
    if !Integrator::is_finite(&next) {
        return Err(Error::BlowUp { t: state.t + dt });
    }
    Ok(integ.decode(&next, state.t + dt))
}

/// Default step: `0.1 * min(dx, dz) / max(N, |f|, U)` with `U` the largest
/// advective speed `|grad psi|` of the initial state.
pub fn default_dt(initial: &FieldState, params: &PhysicalParams) -> Result<f64> {
    let px = diff(&initial.psi, Axis::X, 1)?;
    let pz = diff(&initial.psi, Axis::Z, 1)?;
    let u = px
        .values()
        .iter()
        .zip(pz.values())
        .fold(0.0f64, |m, (a, b)| m.max((a * a + b * b).sqrt()));
    let speed = params.n.max(params.f.abs()).max(u);
    let grid = initial.grid();
    Ok(0.1 * grid.dx().min(grid.dz()) / speed)
}

/// A sequence of saved states from one run.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub states: Vec<FieldState>,
}

impl Trajectory {
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Run `n_steps` RK4 steps, saving the initial state and then every
/// `snapshot_every`-th step. Each saved state is also handed to
/// `on_snapshot`, so partial output survives a mid-run blow-up.
///
/// Blow-up is detected on a non-finite state or on amplitude growth
/// beyond `1e6x` the initial amplitude — the model conserves energy, so
/// such growth can only be numerical instability, and catching it early
/// leaves a state the recovery step can still use. On detection the step
/// is retried once with the step size halved (the halved step is kept);
/// a second detection aborts the run.
pub fn simulate(
    initial: &FieldState,
    params: &PhysicalParams,
    dt: f64,
    n_steps: usize,
    snapshot_every: usize,
    on_snapshot: impl FnMut(&FieldState) -> Result<()>,
) -> Result<Trajectory> {
    simulate_with(
        initial,
        params,
        dt,
        n_steps,
        snapshot_every,
        StepOptions::default(),
        on_snapshot,
    )
}

/// [`simulate`] with explicit [`StepOptions`].
pub fn simulate_with(
    initial: &FieldState,
    params: &PhysicalParams,
    dt: f64,
    n_steps: usize,
    snapshot_every: usize,
    options: StepOptions,
    mut on_snapshot: impl FnMut(&FieldState) -> Result<()>,
) -> Result<Trajectory> {
    if snapshot_every == 0 {
        return Err(Error::InvalidParameter("snapshot_every must be >= 1".into()));
    }
    if n_steps > 0 && (!dt.is_finite() || dt <= 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    initial.validate()?;

    let integ = Integrator::new(initial.grid(), *params, options);
    let mut trajectory = Trajectory::default();
    trajectory.states.push(initial.clone());
    on_snapshot(&trajectory.states[0])?;

    let mut spec = integ.encode(initial);
    let amp_cap = 1e6 * Integrator::spectral_amplitude(&spec).max(1e-300);
    let blew_up = |s: &SpectralState| {
        !Integrator::is_finite(s) || Integrator::spectral_amplitude(s) > amp_cap
    };
    let mut t = initial.t;
    let mut dt = dt;
    let mut halved = false;
    for step in 1..=n_steps {
        let mut next = integ.step(&spec, dt);
        if blew_up(&next) {
            if halved {
                return Err(Error::BlowUp { t });
            }
            halved = true;
            dt /= 2.0;
            next = integ.step(&spec, dt);
            if blew_up(&next) {
                return Err(Error::BlowUp { t });
            }
        }
        spec = next;
        t += dt;
        if step % snapshot_every == 0 {
            let state = integ.decode(&spec, t);
            on_snapshot(&state)?;
            trajectory.states.push(state);
        }
    }
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::FieldSampler;

    fn test_params() -> PhysicalParams {
        PhysicalParams::new(1.1, 0.7, 1.4).unwrap()
    }

    #[test]
    fn zero_state_has_zero_tendencies() {
        let grid = Grid2D::square_two_pi(32).unwrap();
        let state = FieldState::zeros(grid);
        let tend = rhs(&state, &test_params()).unwrap();
        assert_eq!(tend.dv_dt.max_abs(), 0.0);
        assert_eq!(tend.drho_dt.max_abs(), 0.0);
        assert_eq!(tend.dzeta_dt.max_abs(), 0.0);
        assert_eq!(tend.dpsi_dt.max_abs(), 0.0);
    }

    #[test]
    fn rhs_round_trips_through_residuals() {
        // Substituting the computed tendencies back into the equations must
        // annihilate them: this is the defining property of `rhs`.
        let grid = Grid2D::square_two_pi(64).unwrap();
        let params = test_params();
        let mut sampler = FieldSampler::new(42);
        for _ in 0..4 {
            let state = sampler.state(grid, 1.0);
            let tend = rhs(&state, &params).unwrap();
            let res = residuals(&state, &StateTendencies::from(&tend), &params).unwrap();
            let scales = residual_scales(&state, &StateTendencies::from(&tend), &params).unwrap();
            for (r, s) in res.iter().zip(scales) {
                assert!(r.max_abs() <= 1e-11 * s, "residual {} vs scale {}", r.max_abs(), s);
            }
        }
    }

    #[test]
    fn tendencies_satisfy_psi_gauge() {
        let grid = Grid2D::square_two_pi(64).unwrap();
        let state = FieldSampler::new(5).state(grid, 1.0);
        let tend = rhs(&state, &test_params()).unwrap();
        let lap = spectral::laplacian(&tend.dpsi_dt).unwrap();
        let centered = tend.dzeta_dt.map(|x| x - tend.dzeta_dt.mean());
        assert!(lap.max_abs_diff(&centered) <= 1e-10 * centered.max_abs().max(1.0));
    }

    #[test]
    fn v_equation_decouples_without_rotation() {
        let grid = Grid2D::square_two_pi(32).unwrap();
        let params = PhysicalParams::new(1.0, 0.0, 1.0).unwrap();
        let mut sampler = FieldSampler::new(9);
        let state = FieldState {
            t: 0.0,
            v: ScalarField::zeros(grid),
            rho: sampler.field(grid),
            psi: sampler.field(grid),
        };
        let tend = rhs(&state, &params).unwrap();
        assert!(tend.dv_dt.max_abs() <= 1e-14);
    }

    #[test]
    fn psi_gauge_does_not_move_tendencies() {
        let grid = Grid2D::square_two_pi(64).unwrap();
        let params = test_params();
        let state = FieldSampler::new(17).state(grid, 1.0);
        let mut shifted = state.clone();
        shifted.psi = shifted.psi.map(|x| x + 5.0);
        let a = rhs(&state, &params).unwrap();
        let b = rhs(&shifted, &params).unwrap();
        assert!(a.dv_dt.max_abs_diff(&b.dv_dt) <= 1e-12 * a.dv_dt.max_abs().max(1.0));
        assert!(a.drho_dt.max_abs_diff(&b.drho_dt) <= 1e-12 * a.drho_dt.max_abs().max(1.0));
        assert!(a.dzeta_dt.max_abs_diff(&b.dzeta_dt) <= 1e-12 * a.dzeta_dt.max_abs().max(1.0));
    }

    #[test]
    fn zero_state_stays_zero() {
        let grid = Grid2D::square_two_pi(32).unwrap();
        let state = FieldState::zeros(grid);
        let next = step_rk4(&state, &test_params(), 0.3).unwrap();
        assert_eq!(next.max_abs(), 0.0);
        assert_eq!(next.t, 0.3);
    }

    #[test]
    fn simulate_zero_steps_returns_initial_only() {
        let grid = Grid2D::square_two_pi(32).unwrap();
        let state = FieldSampler::new(1).state(grid, 0.1);
        let traj = simulate(&state, &test_params(), 0.01, 0, 1, |_| Ok(())).unwrap();
        assert_eq!(traj.states.len(), 1);
        assert_eq!(traj.states[0].t, 0.0);
    }

    #[test]
    fn simulate_snapshot_cadence() {
        let grid = Grid2D::square_two_pi(32).unwrap();
        let state = FieldSampler::new(1).state(grid, 0.01);
        let mut seen = 0usize;
        let traj = simulate(&state, &test_params(), 0.01, 10, 4, |_| {
            seen += 1;
            Ok(())
        })
        .unwrap();
        // initial + steps 4 and 8
        assert_eq!(traj.states.len(), 3);
        assert_eq!(seen, 3);
    }

    #[test]
    fn hyperviscosity_damps_at_the_specified_rate() {
        // single wave vector: every prognostic coefficient carries the
        // same filter factor, so the energy decays by exactly factor^2
        // per step on top of the (conservative) RK4 dynamics
        let grid = Grid2D::square_two_pi(32).unwrap();
        let p = test_params();
        let state = FieldState {
            t: 0.0,
            v: ScalarField::zeros(grid),
            rho: ScalarField::zeros(grid),
            psi: ScalarField::from_fn(grid, |x, z| 0.01 * (12.0 * x + 12.0 * z).cos()),
        };
        let options = StepOptions {
            hyperviscosity: 10.0,
        };
        let (dt, n_steps) = (0.01, 50);
        let traj =
            simulate_with(&state, &p, dt, n_steps, n_steps, options, |_| Ok(())).unwrap();
        let e0 = crate::conservation::energy_density(&state, &p).unwrap().integrate();
        let e1 = crate::conservation::energy_density(traj.states.last().unwrap(), &p)
            .unwrap()
            .integrate();
        let ratio = (144.0 + 144.0) / 512.0; // |k|^2 / k_nyq^2 for (12,12) on 32^2
        let expected = (-2.0 * 10.0 * dt * ratio.powi(4) * n_steps as f64).exp();
        assert!(
            (e1 / e0 - expected).abs() <= 1e-9,
            "measured {} expected {expected}",
            e1 / e0
        );
    }

    #[test]
    fn zero_hyperviscosity_is_the_default_path() {
        let grid = Grid2D::square_two_pi(32).unwrap();
        let p = test_params();
        let state = FieldSampler::new(3).state(grid, 0.1);
        let a = simulate(&state, &p, 0.01, 5, 5, |_| Ok(())).unwrap();
        let b = simulate_with(
            &state,
            &p,
            0.01,
            5,
            5,
            StepOptions { hyperviscosity: 0.0 },
            |_| Ok(()),
        )
        .unwrap();
        assert_eq!(
            a.states.last().unwrap().psi.values(),
            b.states.last().unwrap().psi.values()
        );
    }

    #[test]
    fn blow_up_reports_time() {
        let grid = Grid2D::square_two_pi(32).unwrap();
        let mut state = FieldState::zeros(grid);
        state.v.values_mut()[0] = f64::INFINITY;
        match rhs(&state, &test_params()) {
            Err(Error::NonFiniteField(_)) => {}
            other => panic!("expected non-finite error, got {other:?}"),
        }
    }
}

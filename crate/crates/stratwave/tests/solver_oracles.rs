//! Solver checks against closed-form oracles: tendency consistency,
//! trajectory accuracy, long-run conservation, and the blow-up handling
//! of the driver.

use std::f64::consts::PI;

use stratwave::conservation::{global_drift, ConservedVector};
use stratwave::error::Error;
use stratwave::exact::{beam_solution, plane_wave, sample_state, AnalyticSolution, WaveVector};
use stratwave::grid::{Grid2D, ScalarField};
use stratwave::model::{default_dt, rhs, simulate, FieldState};
use stratwave::rng::FieldSampler;
use stratwave::PhysicalParams;

fn params() -> PhysicalParams {
    PhysicalParams::new(1.1, 0.7, 1.4).unwrap()
}

#[test]
fn rhs_matches_analytic_time_derivatives() {
    let grid = Grid2D::square_two_pi(64).unwrap();
    let p = params();
    let wave = WaveVector::new(2.0, 1.0).unwrap();
    let sol = beam_solution(plane_wave(wave), &p).unwrap();
    let t = 0.3;
    let state = sample_state(&sol, grid, t);
    let tend = rhs(&state, &p).unwrap();

    let mut dv = ScalarField::zeros(grid);
    let mut drho = ScalarField::zeros(grid);
    let mut dzeta = ScalarField::zeros(grid);
    let mut dpsi = ScalarField::zeros(grid);
    for ix in 0..grid.nx() {
        for iz in 0..grid.nz() {
            let q = sol.eval(t, grid.x(ix), grid.z(iz));
            let i = grid.idx(ix, iz);
            dv.values_mut()[i] = q.v_t;
            drho.values_mut()[i] = q.rho_t;
            dzeta.values_mut()[i] = q.lap_psi_t;
            dpsi.values_mut()[i] = q.psi_t;
        }
    }
    assert!(tend.dv_dt.max_abs_diff(&dv) <= 1e-10);
    assert!(tend.drho_dt.max_abs_diff(&drho) <= 1e-9);
    assert!(tend.dzeta_dt.max_abs_diff(&dzeta) <= 1e-9);
    assert!(tend.dpsi_dt.max_abs_diff(&dpsi) <= 1e-9);
}

#[test]
fn trajectory_tracks_beam_at_every_snapshot() {
    let grid = Grid2D::square_two_pi(64).unwrap();
    let p = params();
    let sol = beam_solution(plane_wave(WaveVector::new(1.0, 1.0).unwrap()), &p).unwrap();
    let period = 2.0 * PI / sol.omega;
    let dt = period / 200.0;
    let initial = sample_state(&sol, grid, 0.0);
    let traj = simulate(&initial, &p, dt, 200, 20, |_| Ok(())).unwrap();
    assert_eq!(traj.states.len(), 11);
    for state in &traj.states {
        let exact = sample_state(&sol, grid, state.t);
        let err = state
            .v
            .max_abs_diff(&exact.v)
            .max(state.rho.max_abs_diff(&exact.rho))
            .max(state.psi.max_abs_diff(&exact.psi));
        assert!(err <= 1e-6, "t = {}: error {err}", state.t);
    }
    // conserved integrals over the same single period
    let e = global_drift(ConservedVector::Energy, &traj, &p).unwrap();
    assert!(e.max_relative_drift <= 1e-8, "energy {}", e.max_relative_drift);
    for id in [ConservedVector::VTranslation, ConservedVector::RhoTranslation] {
        let d = global_drift(id, &traj, &p).unwrap();
        assert!(d.max_relative_drift <= 1e-9, "{} {}", id.name(), d.max_relative_drift);
    }
}

#[test]
fn long_run_conserves_energy_at_high_resolution() {
    // Random small-amplitude data on a 128^2 grid for ten buoyancy
    // periods: the energy integral must hold to 1e-6 relative.
    let grid = Grid2D::square_two_pi(128).unwrap();
    let p = params();
    let initial = FieldSampler::new(7).state(grid, 1e-3);
    let buoyancy_period = 2.0 * PI / p.n;
    let n_steps = 2000;
    let dt = 10.0 * buoyancy_period / n_steps as f64;
    let traj = simulate(&initial, &p, dt, n_steps, 200, |_| Ok(())).unwrap();
    let drift = global_drift(ConservedVector::Energy, &traj, &p).unwrap();
    assert!(
        drift.max_relative_drift <= 1e-6,
        "energy drift {}",
        drift.max_relative_drift
    );
}

#[test]
fn default_step_respects_grid_and_speeds() {
    let grid = Grid2D::square_two_pi(64).unwrap();
    let p = params();
    let state = FieldState::zeros(grid);
    // at rest the advective speed is zero, so max(N, |f|, U) = N
    let dt = default_dt(&state, &p).unwrap();
    assert!((dt - 0.1 * grid.dx() / p.n).abs() <= 1e-15);
}

#[test]
fn marginally_unstable_step_recovers_by_halving() {
    // omega*dt = 2.9 sits just past the RK4 imaginary-axis stability
    // bound (~2.83): a single mode grows ~1.19x per step until the
    // blow-up guard fires, after which the halved step (omega*dt = 1.45)
    // is stable and the run completes.
    let grid = Grid2D::square_two_pi(32).unwrap();
    let p = params();
    let sol = beam_solution(plane_wave(WaveVector::new(1.0, 1.0).unwrap()), &p).unwrap();
    let full = sample_state(&sol, grid, 0.0);
    let initial = FieldState {
        t: 0.0,
        v: full.v.scaled(1e-6),
        rho: full.rho.scaled(1e-6),
        psi: full.psi.scaled(1e-6),
    };
    let dt = 2.9 / sol.omega;
    let n_steps = 200;
    let traj = simulate(&initial, &p, dt, n_steps, 50, |_| Ok(())).unwrap();
    let last = traj.states.last().unwrap();
    assert!(last.v.is_finite() && last.psi.is_finite());
    // the halved step is visible in the elapsed time
    assert!(last.t < n_steps as f64 * dt * 0.999, "t = {}", last.t);
}

#[test]
fn repeated_blow_up_fails_with_timestamp() {
    let grid = Grid2D::square_two_pi(32).unwrap();
    let p = params();
    let sol = beam_solution(plane_wave(WaveVector::new(1.0, 1.0).unwrap()), &p).unwrap();
    let initial = sample_state(&sol, grid, 0.0);
    // even the halved step is far beyond the stability limit
    let dt = 8.0 / sol.omega;
    let mut persisted = 0usize;
    let result = simulate(&initial, &p, dt, 400, 1, |_| {
        persisted += 1;
        Ok(())
    });
    match result {
        Err(Error::BlowUp { t }) => assert!(t.is_finite()),
        other => panic!("expected blow-up, got {other:?}"),
    }
    // the partial trajectory was still handed to the sink
    assert!(persisted >= 1);
}

//! Seeded verification suites.
//!
//! Each suite runs a fixed set of checks at pinned tolerances and returns
//! a [`Report`] whose rendering is byte-identical for a given seed: all
//! randomness flows from the seed, checks run sequentially, and floats are
//! formatted deterministically.

use std::f64::consts::PI;

use crate::adjoint::{
    adjoint_residual, equivalence_factors, self_adjoint_substitution, substitute_tendencies,
    theta, theta_scale, Costate,
};
use crate::conservation::{
    density_from_characteristics, dilation_divergence_part, divergence_residual,
    divergence_residual_with, divergence_scale, energy_density, global_drift, ConservedVector,
};
use crate::error::Result;
use crate::exact::{
    beam_solution, beam_solution_unchecked, lorentzian_beam, max_relative_residual, omega,
    plane_wave, reduced_closed_form, reduced_ode_series, sample_state, AnalyticSolution,
    BeamSpec, Envelope, InvariantSolutionParams, WaveVector,
};
use crate::grid::{Grid2D, ScalarField};
use crate::model::{residuals, rhs, simulate, FieldState, StateTendencies};
use crate::params::PhysicalParams;
use crate::rng::FieldSampler;
use crate::spectral::{diff, inv_laplacian, Axis};
use crate::symmetry::{
    apply_dilation, characteristics, scaling_exponents, translation_equivariance_residual,
    Generator,
};
use crate::variational::{
    densities, directional_variation, is_divergence, is_trivial_density, jacobian_identities,
    single_slot_variation_max, Slot, DEFAULT_TOL,
};

/// How a measured value relates to its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Pass when `measured <= tol` (an error bound).
    AtMost,
    /// Pass when `measured >= tol` (a witness that must not vanish).
    AtLeast,
}

/// One verification check with its measured value and pinned tolerance.
#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub measured: f64,
    pub tol: f64,
    pub bound: Bound,
}

impl Check {
    fn at_most(suite: &'static str, name: &'static str, measured: f64, tol: f64) -> Self {
        Self {
            suite,
            name,
            measured,
            tol,
            bound: Bound::AtMost,
        }
    }

    fn at_least(suite: &'static str, name: &'static str, measured: f64, tol: f64) -> Self {
        Self {
            suite,
            name,
            measured,
            tol,
            bound: Bound::AtLeast,
        }
    }

    pub fn pass(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.measured <= self.tol,
            Bound::AtLeast => self.measured >= self.tol,
        }
    }

    /// `STATUS <suite> <check> <measured> <tol>`; whether the tolerance is
    /// an upper or a lower bound is part of the check's definition.
    pub fn render(&self) -> String {
        format!(
            "{} {} {} {:.6e} {:e}",
            if self.pass() { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.measured,
            self.tol
        )
    }
}

/// Output of one or more suites.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&c.render());
            out.push('\n');
        }
        let failed = self.checks.iter().filter(|c| !c.pass()).count();
        out.push_str(&format!(
            "RESULT {} ({} checks, {} failed)\n",
            if failed == 0 { "PASS" } else { "FAIL" },
            self.checks.len(),
            failed
        ));
        out
    }
}

/// Grid and constants shared by every suite: a 64^2 torus with O(1)
/// parameters chosen so no coupling coefficient is 0 or 1.
pub fn context() -> (Grid2D, PhysicalParams) {
    (
        Grid2D::square_two_pi(64).expect("valid grid"),
        PhysicalParams::new(1.1, 0.7, 1.4).expect("valid params"),
    )
}

const N_STATES: usize = 16;

/// Self-adjointness checks: the coupling term vanishes under the costate
/// reduction, and the reduced adjoint residuals equal the original
/// residuals times `(1, 1, g^2/N^2)`.
pub fn suite_adjoint(seed: u64) -> Result<Vec<Check>> {
    let (grid, p) = context();
    let mut sampler = FieldSampler::new(seed);
    let mut checks = Vec::new();

    let mut theta_sub: f64 = 0.0;
    for _ in 0..N_STATES {
        let state = sampler.state(grid, 1.0);
        let costate = self_adjoint_substitution(&state, &p);
        let th = theta(&state, &costate)?;
        theta_sub = theta_sub.max(th.max_abs() / theta_scale(&state, &costate)?);
    }
    checks.push(Check::at_most("adjoint", "theta_under_substitution", theta_sub, 1e-11));

    let mut theta_generic = f64::INFINITY;
    for _ in 0..3 {
        let state = sampler.state(grid, 1.0);
        let costate = Costate {
            phi: sampler.field(grid),
            mu: sampler.field(grid),
            r: sampler.field(grid),
        };
        theta_generic = theta_generic.min(theta(&state, &costate)?.max_abs());
    }
    checks.push(Check::at_least("adjoint", "theta_generic_witness", theta_generic, 1e-3));

    // Reduction identity with free tendencies: both sides are O(1) fields.
    let mut factor_dev: f64 = 0.0;
    for _ in 0..N_STATES {
        let state = sampler.state(grid, 1.0);
        let zeta_t = sampler.zero_mean_field(grid);
        let tend = StateTendencies {
            v_t: sampler.field(grid),
            rho_t: sampler.field(grid),
            psi_t: inv_laplacian(&zeta_t)?,
            zeta_t,
        };
        let costate = self_adjoint_substitution(&state, &p);
        let ctend = substitute_tendencies(&tend, &p);
        let adj = adjoint_residual(&state, &costate, &p, &ctend)?;
        let orig = residuals(&state, &tend, &p)?;
        let factors = equivalence_factors(&p);
        for i in 0..3 {
            let scaled = orig[i].scaled(factors[i]);
            let scale = adj[i].max_abs().max(scaled.max_abs()).max(1.0);
            factor_dev = factor_dev.max(adj[i].max_abs_diff(&scaled) / scale);
        }
    }
    checks.push(Check::at_most("adjoint", "equivalence_factors", factor_dev, 1e-10));

    // With tendencies from the model both sides must vanish outright.
    let mut on_shell: f64 = 0.0;
    for _ in 0..4 {
        let state = sampler.state(grid, 1.0);
        let tend = StateTendencies::from(&rhs(&state, &p)?);
        let costate = self_adjoint_substitution(&state, &p);
        let ctend = substitute_tendencies(&tend, &p);
        let adj = adjoint_residual(&state, &costate, &p, &ctend)?;
        let orig = residuals(&state, &tend, &p)?;
        let scales = crate::model::residual_scales(&state, &tend, &p)?;
        for i in 0..3 {
            on_shell = on_shell.max(adj[i].max_abs() / scales[i]);
            on_shell = on_shell.max(orig[i].max_abs() / scales[i]);
        }
    }
    checks.push(Check::at_most("adjoint", "residuals_vanish_on_shell", on_shell, 1e-10));

    Ok(checks)
}

/// Conserved-vector checks: pointwise divergence identities, gauge
/// invariance, the dilation-to-energy reduction, and the beam energy
/// integral.
pub fn suite_conservation(seed: u64) -> Result<Vec<Check>> {
    let (grid, p) = context();
    let mut sampler = FieldSampler::new(seed);
    let mut checks = Vec::new();

    let mut v_div: f64 = 0.0;
    let mut rho_div: f64 = 0.0;
    let mut e_div: f64 = 0.0;
    for _ in 0..8 {
        let state = sampler.state(grid, 1.0);
        for (id, acc) in [
            (ConservedVector::VTranslation, &mut v_div),
            (ConservedVector::RhoTranslation, &mut rho_div),
            (ConservedVector::Energy, &mut e_div),
        ] {
            let res = divergence_residual(id, &state, &p)?;
            *acc = acc.max(res.max_abs() / divergence_scale(id, &state, &p)?);
        }
    }
    checks.push(Check::at_most("conservation", "v_translation_divergence", v_div, 1e-11));
    checks.push(Check::at_most("conservation", "rho_translation_divergence", rho_div, 1e-11));
    checks.push(Check::at_most("conservation", "energy_divergence", e_div, 1e-9));

    // Free time derivatives: the divergence of the v-vector IS the
    // v-equation residual, term by term.
    let state = sampler.state(grid, 1.0);
    let free = StateTendencies {
        v_t: sampler.field(grid),
        rho_t: sampler.field(grid),
        psi_t: sampler.field(grid),
        zeta_t: sampler.field(grid),
    };
    let div = divergence_residual_with(ConservedVector::VTranslation, &state, &p, &free)?;
    let res = residuals(&state, &free, &p)?;
    let scale = div.max_abs().max(1.0);
    checks.push(Check::at_most(
        "conservation",
        "v_divergence_is_equation_residual",
        div.max_abs_diff(&res[1]) / scale,
        1e-11,
    ));

    let state = sampler.state(grid, 1.0);
    let mut shifted = state.clone();
    shifted.psi = shifted.psi.map(|v| v + 2.5);
    let e0 = energy_density(&state, &p)?;
    let e1 = energy_density(&shifted, &p)?;
    checks.push(Check::at_most(
        "conservation",
        "energy_psi_gauge_invariance",
        e0.max_abs_diff(&e1) / e0.max_abs().max(1.0),
        1e-12,
    ));

    let state = sampler.state(grid, 1.0);
    let w = characteristics(Generator::Dilation, &state, &p)?;
    let density = density_from_characteristics(&w, &state, &p)?;
    let stripped = &density - &dilation_divergence_part(&state, &p)?;
    let e = energy_density(&state, &p)?;
    checks.push(Check::at_most(
        "conservation",
        "dilation_density_strips_to_energy",
        stripped.max_abs_diff(&e.scaled(-2.0)) / e.max_abs().max(1.0),
        1e-10,
    ));

    // Energy integral of the plane-wave beam at t = 0 against the
    // closed-form envelope energy (k^2+m^2) * integral(A'^2 + B'^2).
    let wave = WaveVector::new(1.0, 1.0)?;
    let spec = plane_wave(wave);
    let sol = beam_solution(spec, &p)?;
    let state = sample_state(&sol, grid, 0.0);
    let e_grid = energy_density(&state, &p)?.integrate();
    let envelope =
        ScalarField::from_fn(grid, |x, z| spec.energy_density(wave.lambda(x, z))).integrate();
    let k2m2 = wave.k * wave.k + wave.m * wave.m;
    checks.push(Check::at_most(
        "conservation",
        "beam_energy_integral",
        (e_grid - k2m2 * envelope).abs() / (k2m2 * envelope).abs(),
        1e-9,
    ));

    Ok(checks)
}

/// Variational-derivative checks: the eight Jacobian-bracket identities,
/// divergence verdicts, and the triviality table.
pub fn suite_variational(seed: u64) -> Result<Vec<Check>> {
    let (grid, p) = context();
    let mut checks = Vec::new();

    static IDENTITY_NAMES: [&str; 8] = [
        "dJ(psi,v)/dv",
        "dJ(psi,v)/dpsi",
        "d[vJ(psi,v)]/dv",
        "d[vJ(psi,v)]/dpsi",
        "d[rhoJ(psi,rho)]/drho",
        "d[rhoJ(psi,rho)]/dpsi",
        "dJ(psi,lap psi)/dpsi",
        "d[psiJ(psi,lap psi)]/dpsi",
    ];
    for (i, (f, slot)) in jacobian_identities().into_iter().enumerate() {
        let worst = single_slot_variation_max(&f, slot, grid, &p, N_STATES, seed + i as u64)?;
        checks.push(Check::at_most("variational", IDENTITY_NAMES[i], worst, DEFAULT_TOL));
    }

    let v = is_divergence(&densities::dx_v_squared(), grid, &p, 8, seed + 100, DEFAULT_TOL)?;
    checks.push(Check::at_most("variational", "dx_v2_is_divergence", v.max_normalized, DEFAULT_TOL));
    let v = is_divergence(
        &densities::psi_jacobian_psi_lap_psi(),
        grid,
        &p,
        8,
        seed + 101,
        DEFAULT_TOL,
    )?;
    checks.push(Check::at_most(
        "variational",
        "psi_vorticity_bracket_is_divergence",
        v.max_normalized,
        DEFAULT_TOL,
    ));
    let v = is_divergence(&densities::energy(), grid, &p, 8, seed + 102, DEFAULT_TOL)?;
    checks.push(Check::at_least("variational", "energy_divergence_witness", v.max_raw, 1e-2));

    for (name, f) in [
        ("psi_shift_density_trivial", densities::psi_shift()),
        ("x_translation_density_trivial", densities::x_translation()),
        ("z_translation_density_trivial", densities::z_translation()),
        (
            "time_translation_density_trivial",
            densities::time_translation_substituted(),
        ),
    ] {
        let v = is_trivial_density(&f, grid, &p, seed + 103, DEFAULT_TOL)?;
        checks.push(Check::at_most("variational", name, v.max_normalized, DEFAULT_TOL));
    }
    for (name, f) in [
        ("v_density_nontrivial", densities::v()),
        ("rho_density_nontrivial", densities::rho()),
        ("energy_density_nontrivial", densities::energy()),
    ] {
        let v = is_trivial_density(&f, grid, &p, seed + 104, DEFAULT_TOL)?;
        checks.push(Check::at_least("variational", name, v.max_normalized, DEFAULT_TOL));
    }

    // Linearity of the probe in the probe direction.
    let mut sampler = FieldSampler::new(seed + 105);
    let state = sampler.state(grid, 1.0);
    let f = densities::v_squared();
    let p1 = sampler.field(grid);
    let p2 = sampler.field(grid);
    let d1 = directional_variation(&f, &state, &p, Slot::V, &p1)?;
    let d2 = directional_variation(&f, &state, &p, Slot::V, &p2)?;
    let mut combo = p1.scaled(0.6);
    combo.add_scaled(0.8, &p2);
    let dc = directional_variation(&f, &state, &p, Slot::V, &combo)?;
    let expect = 0.6 * d1 + 0.8 * d2;
    let scale = (0.6 * d1).abs().max((0.8 * d2).abs()).max(1.0);
    checks.push(Check::at_most(
        "variational",
        "variation_linearity",
        (dc - expect).abs() / scale,
        DEFAULT_TOL,
    ));

    // Mean-carrying probe sees exactly the domain area for F = v.
    let probe = ScalarField::constant(grid, 1.0);
    let d = directional_variation(&densities::v(), &state, &p, Slot::V, &probe)?;
    checks.push(Check::at_most(
        "variational",
        "mean_mode_witness_is_area",
        (d - grid.area()).abs() / grid.area(),
        1e-9,
    ));

    Ok(checks)
}

/// Symmetry checks: characteristic densities, the finite dilation group
/// action, residual scaling exponents, translation equivariance.
pub fn suite_symmetry(seed: u64) -> Result<Vec<Check>> {
    let (grid, p) = context();
    let mut sampler = FieldSampler::new(seed);
    let mut checks = Vec::new();

    let state = sampler.state(grid, 1.0);
    let d = density_from_characteristics(
        &characteristics(Generator::VShift, &state, &p)?,
        &state,
        &p,
    )?;
    checks.push(Check::at_most(
        "symmetry",
        "v_shift_density",
        d.max_abs_diff(&state.v.scaled(-1.0)),
        1e-12,
    ));
    let d = density_from_characteristics(
        &characteristics(Generator::RhoShift, &state, &p)?,
        &state,
        &p,
    )?;
    checks.push(Check::at_most(
        "symmetry",
        "rho_shift_density",
        d.max_abs_diff(&state.rho.scaled(-p.g2_over_n2())),
        1e-12,
    ));
    let d = density_from_characteristics(
        &characteristics(Generator::PsiShift, &state, &p)?,
        &state,
        &p,
    )?;
    checks.push(Check::at_most("symmetry", "psi_shift_density_zero", d.max_abs(), 1e-15));

    let d = density_from_characteristics(
        &characteristics(Generator::XShift, &state, &p)?,
        &state,
        &p,
    )?;
    let psi_x = diff(&state.psi, Axis::X, 1)?;
    let psi_z = diff(&state.psi, Axis::Z, 1)?;
    let mut h = state.v.mul(&state.v).scaled(0.5);
    h.add_scaled(0.5 * p.g2_over_n2(), &state.rho.mul(&state.rho));
    h.add_scaled(0.5, &psi_x.mul(&psi_x));
    h.add_scaled(0.5, &psi_z.mul(&psi_z));
    checks.push(Check::at_most(
        "symmetry",
        "x_shift_density_is_exact_derivative",
        d.max_abs_diff(&diff(&h, Axis::X, 1)?) / d.max_abs().max(1.0),
        1e-11,
    ));

    let wave = WaveVector::new(1.0, 2.0)?;
    let sol = beam_solution(plane_wave(wave), &p)?;
    let one_step = apply_dilation(sol, 0.7);
    let two_step = apply_dilation(apply_dilation(sol, 0.3), 0.4);
    let mut group_dev: f64 = 0.0;
    for i in 0..24 {
        let t = 0.21 * i as f64;
        let x = sampler.uniform(-2.0, 2.0);
        let z = sampler.uniform(-2.0, 2.0);
        let a = one_step.eval(t, x, z);
        let b = two_step.eval(t, x, z);
        for (u, w) in [(a.psi, b.psi), (a.v, b.v), (a.rho, b.rho)] {
            group_dev = group_dev.max((u - w).abs() / w.abs().max(1.0));
        }
    }
    checks.push(Check::at_most("symmetry", "dilation_group_law", group_dev, 1e-12));

    let dilated = apply_dilation(sol, 0.8);
    let points: Vec<_> = (0..60)
        .map(|_| {
            (
                sampler.uniform(0.0, 5.0),
                sampler.uniform(-3.0, 3.0),
                sampler.uniform(-3.0, 3.0),
            )
        })
        .collect();
    checks.push(Check::at_most(
        "symmetry",
        "dilated_solution_residual",
        max_relative_residual(&dilated, &p, &points),
        1e-10,
    ));

    let state = sampler.state(grid, 1.0);
    let tend = StateTendencies {
        v_t: sampler.field(grid),
        rho_t: sampler.field(grid),
        psi_t: sampler.field(grid),
        zeta_t: sampler.field(grid),
    };
    let ex = scaling_exponents(&state, &tend, &p, 2.0)?;
    let dev = ex[0].abs().max((ex[1] - 1.0).abs()).max((ex[2] - 1.0).abs());
    checks.push(Check::at_most("symmetry", "residual_scaling_exponents", dev, 1e-10));

    checks.push(Check::at_most(
        "symmetry",
        "translation_equivariance",
        translation_equivariance_residual(&state, &tend, &p, 7, 13)?,
        1e-12,
    ));

    Ok(checks)
}

/// Exact-solution checks: frequency formulas, residual oracles for all
/// families, the negative control, the reduced-system integration, and
/// constancy of the beam energy along beam lines.
pub fn suite_exact(seed: u64) -> Result<Vec<Check>> {
    let (_, p) = context();
    let mut sampler = FieldSampler::new(seed);
    let mut checks = Vec::new();

    let w = omega(WaveVector::new(2.0, 0.0)?, &p)?;
    checks.push(Check::at_most("exact", "omega_reduces_to_buoyancy", (w - p.n).abs(), 1e-12));
    let w = omega(WaveVector::new(0.0, 2.0)?, &p)?;
    checks.push(Check::at_most("exact", "omega_reduces_to_coriolis", (w - p.f).abs(), 1e-12));
    let w = omega(
        WaveVector::new(3.0, 4.0)?,
        &PhysicalParams::new(1.0, 1.0, 2.0)?,
    )?;
    checks.push(Check::at_most(
        "exact",
        "omega_rational_case",
        (w - (52.0f64 / 25.0).sqrt()).abs(),
        1e-12,
    ));

    let points = |n: usize, sampler: &mut FieldSampler| -> Vec<(f64, f64, f64)> {
        (0..n)
            .map(|_| {
                (
                    sampler.uniform(0.0, 10.0),
                    sampler.uniform(-3.0, 3.0),
                    sampler.uniform(-3.0, 3.0),
                )
            })
            .collect()
    };

    let ip = InvariantSolutionParams::new(
        WaveVector::new(1.5, -0.8)?,
        sampler.uniform(-1.0, 1.0),
        sampler.uniform(-1.0, 1.0),
        sampler.uniform(-1.0, 1.0),
    )?;
    let sol = crate::exact::invariant_solution(&ip, &p)?;
    let pts = points(100, &mut sampler);
    checks.push(Check::at_most(
        "exact",
        "invariant_solution_residual",
        max_relative_residual(&sol, &p, &pts),
        1e-11,
    ));

    let sol = beam_solution(lorentzian_beam(1.0, WaveVector::new(1.0, 2.0)?)?, &p)?;
    let pts = points(100, &mut sampler);
    checks.push(Check::at_most(
        "exact",
        "lorentzian_beam_residual",
        max_relative_residual(&sol, &p, &pts),
        1e-11,
    ));

    let wave = WaveVector::new(1.0, 2.0)?;
    let generic = BeamSpec {
        wave,
        a: Envelope::Gaussian {
            amp: 1.0,
            width: 1.0,
        },
        b: Envelope::Cosine(1.0),
        f_mean: Envelope::Sine(1.0),
        h_mean: Envelope::Sine(-p.f * wave.m / (p.g * wave.k)),
    };
    let sol = beam_solution(generic, &p)?;
    let pts = points(100, &mut sampler);
    checks.push(Check::at_most(
        "exact",
        "generic_beam_residual",
        max_relative_residual(&sol, &p, &pts),
        1e-11,
    ));

    // Negative control: a 1% violation of the mean-profile constraint must
    // produce a visible residual.
    let mut bad = generic;
    bad.h_mean = bad.h_mean.scaled(1.01);
    let sol = beam_solution_unchecked(bad, &p)?;
    let pts = points(100, &mut sampler);
    checks.push(Check::at_least(
        "exact",
        "constraint_violation_witness",
        max_relative_residual(&sol, &p, &pts),
        1e-4,
    ));

    let ip = InvariantSolutionParams::new(
        WaveVector::new(1.0, 2.0)?,
        sampler.uniform(-1.0, 1.0),
        sampler.uniform(-1.0, 1.0),
        sampler.uniform(-1.0, 1.0),
    )?;
    let w = omega(ip.wave, &p)?;
    let t_end = 10.0 * 2.0 * PI / w;
    let series = reduced_ode_series(&ip, &p, t_end)?;
    let mut ode_err: f64 = 0.0;
    for s in series.iter().step_by(61) {
        let (phi, v, r) = reduced_closed_form(&ip, &p, s.t)?;
        ode_err = ode_err
            .max((s.phi - phi).abs())
            .max((s.v - v).abs())
            .max((s.r - r).abs());
    }
    checks.push(Check::at_most("exact", "reduced_system_vs_closed_form", ode_err, 1e-8));

    // Equal energies at points with equal phase, built from dyadic
    // coordinates so the phases agree exactly.
    let spec = lorentzian_beam(1.0, WaveVector::new(2.0, 1.0)?)?;
    let mut beam_line_dev: f64 = 0.0;
    for i in 0..16 {
        let x0 = 0.25 * i as f64 - 2.0;
        let z0 = 0.5;
        let t_shift = 0.125 * (i % 5) as f64;
        let x1 = x0 + t_shift;
        let z1 = z0 - 2.0 * t_shift;
        beam_line_dev = beam_line_dev.max((spec.energy_at(x0, z0) - spec.energy_at(x1, z1)).abs());
    }
    let swap_spec = lorentzian_beam(1.3, WaveVector::new(1.0, 1.0)?)?;
    for _ in 0..8 {
        let x = sampler.uniform(-3.0, 3.0);
        let z = sampler.uniform(-3.0, 3.0);
        beam_line_dev =
            beam_line_dev.max((swap_spec.energy_at(x, z) - swap_spec.energy_at(z, x)).abs());
    }
    checks.push(Check::at_most("exact", "beam_line_energy_constant", beam_line_dev, 1e-12));

    Ok(checks)
}

/// Error of the solver against the traveling plane wave after
/// `n_periods` at `steps_per_period`, as the largest field error.
pub fn plane_wave_solver_error(steps_per_period: usize, n_periods: usize) -> Result<f64> {
    let (grid, p) = context();
    let wave = WaveVector::new(1.0, 1.0)?;
    let sol = beam_solution(plane_wave(wave), &p)?;
    let period = 2.0 * PI / sol.omega;
    let dt = period / steps_per_period as f64;
    let n_steps = steps_per_period * n_periods;
    let initial = sample_state(&sol, grid, 0.0);
    let traj = simulate(&initial, &p, dt, n_steps, n_steps, |_| Ok(()))?;
    let last = traj.states.last().expect("simulate keeps the initial state");
    let exact = sample_state(&sol, grid, last.t);
    Ok(last
        .v
        .max_abs_diff(&exact.v)
        .max(last.rho.max_abs_diff(&exact.rho))
        .max(last.psi.max_abs_diff(&exact.psi)))
}

/// Oscillation frequency of a small-amplitude single mode, measured from
/// the phase drift of its stream-function Fourier coefficient over
/// `n_periods`.
pub fn measured_mode_frequency(
    k: f64,
    m: f64,
    params: &PhysicalParams,
    n_periods: usize,
    steps_per_period: usize,
) -> Result<f64> {
    let grid = Grid2D::square_two_pi(64)?;
    let wave = WaveVector::new(k, m)?;
    let sol = beam_solution(plane_wave(wave), params)?;
    let period = 2.0 * PI / sol.omega;
    let dt = period / steps_per_period as f64;
    let n_steps = n_periods * steps_per_period;

    let amp = 1e-4;
    let full = sample_state(&sol, grid, 0.0);
    let initial = FieldState {
        t: 0.0,
        v: full.v.scaled(amp),
        rho: full.rho.scaled(amp),
        psi: full.psi.scaled(amp),
    };

    let project = |state: &FieldState| -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for ix in 0..grid.nx() {
            let x = grid.x(ix);
            for iz in 0..grid.nz() {
                let phase = k * x + m * grid.z(iz);
                let val = state.psi.get(ix, iz);
                re += val * phase.cos();
                im -= val * phase.sin();
            }
        }
        (re, im)
    };

    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(n_steps + 1);
    simulate(&initial, params, dt, n_steps, 1, |state| {
        let (re, im) = project(state);
        samples.push((state.t, im.atan2(re)));
        Ok(())
    })?;

    // unwrap phases, then least-squares slope
    let mut unwrapped = Vec::with_capacity(samples.len());
    let mut offset = 0.0;
    let mut prev = samples[0].1;
    for &(t, th) in &samples {
        let jump = th - prev;
        if jump > PI {
            offset -= 2.0 * PI;
        } else if jump < -PI {
            offset += 2.0 * PI;
        }
        prev = th;
        unwrapped.push((t, th + offset));
    }
    let n = unwrapped.len() as f64;
    let t_mean = unwrapped.iter().map(|s| s.0).sum::<f64>() / n;
    let th_mean = unwrapped.iter().map(|s| s.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(t, th) in &unwrapped {
        num += (t - t_mean) * (th - th_mean);
        den += (t - t_mean) * (t - t_mean);
    }
    Ok(-(num / den))
}

/// Solver-versus-oracle checks: plane-wave accuracy and convergence
/// order, conserved-integral drift over ten periods, and the dispersion
/// relation in three parameter regimes.
pub fn suite_solver(_seed: u64) -> Result<Vec<Check>> {
    let (grid, p) = context();
    let mut checks = Vec::new();

    let err_coarse = plane_wave_solver_error(200, 1)?;
    checks.push(Check::at_most("solver", "plane_wave_linf_one_period", err_coarse, 1e-6));
    let err_fine = plane_wave_solver_error(400, 1)?;
    let ratio = err_coarse / err_fine;
    checks.push(Check::at_most(
        "solver",
        "rk4_order_ratio_deviation",
        (ratio / 16.0 - 1.0).abs(),
        0.25,
    ));

    // Ten-period run of the same plane wave: conserved integrals drift.
    let wave = WaveVector::new(1.0, 1.0)?;
    let sol = beam_solution(plane_wave(wave), &p)?;
    let period = 2.0 * PI / sol.omega;
    let dt = period / 200.0;
    let initial = sample_state(&sol, grid, 0.0);
    let traj = simulate(&initial, &p, dt, 2000, 20, |_| Ok(()))?;
    let e_drift = global_drift(ConservedVector::Energy, &traj, &p)?.max_relative_drift;
    checks.push(Check::at_most("solver", "energy_drift_ten_periods", e_drift, 1e-6));
    let v_drift = global_drift(ConservedVector::VTranslation, &traj, &p)?.max_relative_drift;
    checks.push(Check::at_most("solver", "v_integral_drift_ten_periods", v_drift, 1e-9));
    let r_drift = global_drift(ConservedVector::RhoTranslation, &traj, &p)?.max_relative_drift;
    checks.push(Check::at_most("solver", "rho_integral_drift_ten_periods", r_drift, 1e-9));

    // Dispersion in a generic regime and in both degenerate limits.
    let cases: [(&'static str, f64, f64, PhysicalParams, usize); 3] = [
        ("dispersion_generic", 1.0, 1.0, p, 64),
        ("dispersion_buoyancy_limit", 2.0, 0.0, PhysicalParams::new(1.0, 0.6, 1.1)?, 72),
        ("dispersion_coriolis_limit", 0.0, 2.0, PhysicalParams::new(1.0, 0.8, 1.3)?, 80),
    ];
    for (name, k, m, cp, steps) in cases {
        let expected = omega(WaveVector::new(k, m)?, &cp)?;
        let measured = measured_mode_frequency(k, m, &cp, 10, steps)?;
        checks.push(Check::at_most(
            "solver",
            name,
            (measured - expected).abs() / expected,
            1e-3,
        ));
    }

    Ok(checks)
}

pub const SUITES: [&str; 6] = [
    "adjoint",
    "conservation",
    "variational",
    "symmetry",
    "exact",
    "solver",
];

/// Run one named suite, or `all` of them.
pub fn run(suite: &str, seed: u64) -> Result<Report> {
    let mut checks = Vec::new();
    match suite {
        "adjoint" => checks.extend(suite_adjoint(seed)?),
        "conservation" => checks.extend(suite_conservation(seed)?),
        "variational" => checks.extend(suite_variational(seed)?),
        "symmetry" => checks.extend(suite_symmetry(seed)?),
        "exact" => checks.extend(suite_exact(seed)?),
        "solver" => checks.extend(suite_solver(seed)?),
        "all" => {
            checks.extend(suite_adjoint(seed)?);
            checks.extend(suite_conservation(seed)?);
            checks.extend(suite_variational(seed)?);
            checks.extend(suite_symmetry(seed)?);
            checks.extend(suite_exact(seed)?);
            checks.extend(suite_solver(seed)?);
        }
        other => {
            return Err(crate::error::Error::InvalidParameter(format!(
                "unknown suite `{other}` (expected one of adjoint, conservation, variational, symmetry, exact, solver, all)"
            )))
        }
    }
    Ok(Report { checks })
}

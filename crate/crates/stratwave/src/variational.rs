//! Weak variational-derivative probes.
//!
//! A density functional `F` maps a state to a scalar field; its integral
//! is probed by Gateaux differentiation: perturb one dependent-variable
//! slot by `eps * probe`, centrally difference the integral, and Richardson
//! extrapolate once. On a periodic grid with spectral integration by parts
//! the weak form is exact for band-limited fields, so a vanishing
//! variational derivative shows up as a variation at the rounding floor.
//! This is the working test for "is a divergence" and, evaluated on
//! solution states, for "is a trivial conservation-law density".

use crate::error::Result;
use crate::exact::{beam_solution, plane_wave, sample_state, WaveVector};
use crate::grid::{Grid2D, ScalarField};
use crate::model::{rhs, simulate, FieldState, StateTendencies};
use crate::params::PhysicalParams;
use crate::rng::FieldSampler;
use crate::spectral::{diff, jacobian, laplacian, Axis};

/// Which dependent variable a probe perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    V,
    Rho,
    Psi,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::V, Slot::Rho, Slot::Psi];

    pub fn name(&self) -> &'static str {
        match self {
            Slot::V => "v",
            Slot::Rho => "rho",
            Slot::Psi => "psi",
        }
    }
}

type DensityEval = dyn Fn(&FieldState, &PhysicalParams) -> Result<ScalarField> + Send + Sync;

/// A named density functional `(v, rho, psi) -> scalar field`.
pub struct DensityFunctional {
    pub name: &'static str,
    eval: Box<DensityEval>,
}

impl DensityFunctional {
    pub fn new(
        name: &'static str,
        eval: impl Fn(&FieldState, &PhysicalParams) -> Result<ScalarField> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name,
            eval: Box::new(eval),
        }
    }

    pub fn eval(&self, state: &FieldState, params: &PhysicalParams) -> Result<ScalarField> {
        (self.eval)(state, params)
    }

    /// `max(1, integral of |F|)`: the magnitude scale used to normalize
    /// variations.
    pub fn magnitude(&self, state: &FieldState, params: &PhysicalParams) -> Result<f64> {
        Ok(self.eval(state, params)?.map(f64::abs).integrate().max(1.0))
    }
}

fn perturbed(state: &FieldState, slot: Slot, eps: f64, probe: &ScalarField) -> FieldState {
    let mut s = state.clone();
    match slot {
        Slot::V => s.v.add_scaled(eps, probe),
        Slot::Rho => s.rho.add_scaled(eps, probe),
        Slot::Psi => s.psi.add_scaled(eps, probe),
    }
    s
}

/// Gateaux derivative of `integral(F)` in the direction `probe` of one
/// slot: central difference with `eps = 1e-6 * field scale`, Richardson
/// extrapolated once (errors `O(eps^4)` plus cancellation noise).
pub fn directional_variation(
    f: &DensityFunctional,
    state: &FieldState,
    params: &PhysicalParams,
    slot: Slot,
    probe: &ScalarField,
) -> Result<f64> {
    let base = match slot {
        Slot::V => state.v.max_abs(),
        Slot::Rho => state.rho.max_abs(),
        Slot::Psi => state.psi.max_abs(),
    };
    let eps = 1e-6 * base.max(1.0);
    let g = |e: f64| -> Result<f64> {
        let field = f.eval(&perturbed(state, slot, e, probe), params)?;
        field.check_finite("functional value")?;
        Ok(field.integrate())
    };
    let coarse = (g(eps)? - g(-eps)?) / (2.0 * eps);
    let fine = (g(eps / 2.0)? - g(-eps / 2.0)?) / eps;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Outcome of a divergence or triviality probe.
#[derive(Debug, Clone, Copy)]
pub struct Verdict {
    pub holds: bool,
    /// Largest `|variation| / magnitude(F)` seen across all trials.
    pub max_normalized: f64,
    /// Largest raw `|variation|`.
    pub max_raw: f64,
}

/// Probe whether `F` is a divergence: all three variational derivatives
/// must vanish against random band-limited probes at random base states.
pub fn is_divergence(
    f: &DensityFunctional,
    grid: Grid2D,
    params: &PhysicalParams,
    n_trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Verdict> {
    assert!(n_trials >= 8, "need at least 8 trials for a verdict");
    let mut sampler = FieldSampler::new(seed);
    let mut max_normalized: f64 = 0.0;
    let mut max_raw: f64 = 0.0;
    for _ in 0..n_trials {
        let state = sampler.state(grid, 1.0);
        let scale = f.magnitude(&state, params)?;
        for slot in Slot::ALL {
            let probe = sampler.field(grid);
            let d = directional_variation(f, &state, params, slot, &probe)?;
            max_raw = max_raw.max(d.abs());
            max_normalized = max_normalized.max(d.abs() / scale);
        }
    }
    Ok(Verdict {
        holds: max_normalized <= tol,
        max_normalized,
        max_raw,
    })
}

/// Variation of `F` in a single slot across seeded random states and
/// probes; returns the largest normalized magnitude. The Jacobian-bracket
/// identity suite is built from this.
pub fn single_slot_variation_max(
    f: &DensityFunctional,
    slot: Slot,
    grid: Grid2D,
    params: &PhysicalParams,
    n_trials: usize,
    seed: u64,
) -> Result<f64> {
    let mut sampler = FieldSampler::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n_trials {
        let state = sampler.state(grid, 1.0);
        let scale = f.magnitude(&state, params)?;
        let probe = sampler.field(grid);
        let d = directional_variation(f, &state, params, slot, &probe)?;
        worst = worst.max(d.abs() / scale);
    }
    Ok(worst)
}

/// States "on the solutions": sampled plane waves at two phases plus the
/// endpoint of a short small-amplitude run of the solver. Triviality of a
/// density must be judged at solution states, where any time derivatives
/// it contains have been substituted from the model equations.
pub fn solution_states(
    grid: Grid2D,
    params: &PhysicalParams,
    seed: u64,
) -> Result<Vec<FieldState>> {
    let wave = WaveVector::new(1.0, 1.0)?;
    let sol = beam_solution(plane_wave(wave), params)?;
    let period = 2.0 * std::f64::consts::PI / sol.omega;
    let mut states = vec![
        sample_state(&sol, grid, 0.0),
        sample_state(&sol, grid, 0.37 * period),
    ];
    let initial = FieldSampler::new(seed ^ 0x736f_6c76).state(grid, 0.05);
    let traj = simulate(&initial, params, 0.01, 5, 5, |_| Ok(()))?;
    states.push(traj.states.last().expect("non-empty run").clone());
    Ok(states)
}

/// Triviality probe per the divergence criterion, evaluated at solution
/// states.
pub fn is_trivial_density(
    f: &DensityFunctional,
    grid: Grid2D,
    params: &PhysicalParams,
    seed: u64,
    tol: f64,
) -> Result<Verdict> {
    let states = solution_states(grid, params, seed)?;
    let mut sampler = FieldSampler::new(seed);
    let mut max_normalized: f64 = 0.0;
    let mut max_raw: f64 = 0.0;
    for state in &states {
        let scale = f.magnitude(state, params)?;
        for slot in Slot::ALL {
            for _ in 0..3 {
                let probe = sampler.field(grid);
                let d = directional_variation(f, state, params, slot, &probe)?;
                max_raw = max_raw.max(d.abs());
                max_normalized = max_normalized.max(d.abs() / scale);
            }
        }
    }
    Ok(Verdict {
        holds: max_normalized <= tol,
        max_normalized,
        max_raw,
    })
}

/// Default probe tolerance: balances central-difference truncation against
/// rounding cancellation for 64-bit floats at `eps = 1e-6 * scale`.
pub const DEFAULT_TOL: f64 = 1e-7;

/// Built-in density functionals.
pub mod densities {
    use super::*;

    pub fn v() -> DensityFunctional {
        DensityFunctional::new("v", |s, _| Ok(s.v.clone()))
    }

    pub fn rho() -> DensityFunctional {
        DensityFunctional::new("rho", |s, _| Ok(s.rho.clone()))
    }

    pub fn v_squared() -> DensityFunctional {
        DensityFunctional::new("v^2", |s, _| Ok(s.v.mul(&s.v)))
    }

    pub fn energy() -> DensityFunctional {
        DensityFunctional::new("energy", crate::conservation::energy_density)
    }

    pub fn jacobian_psi_v() -> DensityFunctional {
        DensityFunctional::new("J(psi,v)", |s, _| jacobian(&s.psi, &s.v))
    }

    pub fn v_jacobian_psi_v() -> DensityFunctional {
        DensityFunctional::new("v J(psi,v)", |s, _| Ok(s.v.mul(&jacobian(&s.psi, &s.v)?)))
    }

    pub fn rho_jacobian_psi_rho() -> DensityFunctional {
        DensityFunctional::new("rho J(psi,rho)", |s, _| {
            Ok(s.rho.mul(&jacobian(&s.psi, &s.rho)?))
        })
    }

    pub fn jacobian_psi_lap_psi() -> DensityFunctional {
        DensityFunctional::new("J(psi,lap psi)", |s, _| {
            jacobian(&s.psi, &laplacian(&s.psi)?)
        })
    }

    pub fn psi_jacobian_psi_lap_psi() -> DensityFunctional {
        DensityFunctional::new("psi J(psi,lap psi)", |s, _| {
            Ok(s.psi.mul(&jacobian(&s.psi, &laplacian(&s.psi)?)?))
        })
    }

    pub fn dx_v_squared() -> DensityFunctional {
        DensityFunctional::new("D_x(v^2)", |s, _| diff(&s.v.mul(&s.v), Axis::X, 1))
    }

    /// Density of the x-translation law:
    /// `v v_x + (g^2/N^2) rho rho_x + psi_x psi_xx + psi_z psi_xz`,
    /// a manifest x-derivative.
    pub fn x_translation() -> DensityFunctional {
        DensityFunctional::new("x_translation", |s, p| {
            let psi_x = diff(&s.psi, Axis::X, 1)?;
            let psi_z = diff(&s.psi, Axis::Z, 1)?;
            let psi_xx = diff(&s.psi, Axis::X, 2)?;
            let psi_xz = diff(&psi_x, Axis::Z, 1)?;
            let mut out = s.v.mul(&diff(&s.v, Axis::X, 1)?);
            out.add_scaled(p.g2_over_n2(), &s.rho.mul(&diff(&s.rho, Axis::X, 1)?));
            out.add_scaled(1.0, &psi_x.mul(&psi_xx));
            out.add_scaled(1.0, &psi_z.mul(&psi_xz));
            Ok(out)
        })
    }

    /// z-translation counterpart of [`x_translation`].
    pub fn z_translation() -> DensityFunctional {
        DensityFunctional::new("z_translation", |s, p| {
            let psi_x = diff(&s.psi, Axis::X, 1)?;
            let psi_z = diff(&s.psi, Axis::Z, 1)?;
            let psi_zz = diff(&s.psi, Axis::Z, 2)?;
            let psi_xz = diff(&psi_x, Axis::Z, 1)?;
            let mut out = s.v.mul(&diff(&s.v, Axis::Z, 1)?);
            out.add_scaled(p.g2_over_n2(), &s.rho.mul(&diff(&s.rho, Axis::Z, 1)?));
            out.add_scaled(1.0, &psi_x.mul(&psi_xz));
            out.add_scaled(1.0, &psi_z.mul(&psi_zz));
            Ok(out)
        })
    }

    /// Density of the time-translation law with the model tendencies
    /// substituted:
    /// `v v_t + (g^2/N^2) rho rho_t + psi_x psi_xt + psi_z psi_zt`.
    pub fn time_translation_substituted() -> DensityFunctional {
        DensityFunctional::new("time_translation", |s, p| {
            let tend = StateTendencies::from(&rhs(s, p)?);
            let psi_x = diff(&s.psi, Axis::X, 1)?;
            let psi_z = diff(&s.psi, Axis::Z, 1)?;
            let psi_xt = diff(&tend.psi_t, Axis::X, 1)?;
            let psi_zt = diff(&tend.psi_t, Axis::Z, 1)?;
            let mut out = s.v.mul(&tend.v_t);
            out.add_scaled(p.g2_over_n2(), &s.rho.mul(&tend.rho_t));
            out.add_scaled(1.0, &psi_x.mul(&psi_xt));
            out.add_scaled(1.0, &psi_z.mul(&psi_zt));
            Ok(out)
        })
    }

    /// Identically zero density (the stream-function shift contributes
    /// nothing).
    pub fn psi_shift() -> DensityFunctional {
        DensityFunctional::new("psi_shift", |s, _| Ok(ScalarField::zeros(s.grid())))
    }
}

/// The eight vanishing variational derivatives of Jacobian expressions:
/// `(functional, probed slot)` pairs, each of which must test as zero.
pub fn jacobian_identities() -> Vec<(DensityFunctional, Slot)> {
    vec![
        (densities::jacobian_psi_v(), Slot::V),
        (densities::jacobian_psi_v(), Slot::Psi),
        (densities::v_jacobian_psi_v(), Slot::V),
        (densities::v_jacobian_psi_v(), Slot::Psi),
        (densities::rho_jacobian_psi_rho(), Slot::Rho),
        (densities::rho_jacobian_psi_rho(), Slot::Psi),
        (densities::jacobian_psi_lap_psi(), Slot::Psi),
        (densities::psi_jacobian_psi_lap_psi(), Slot::Psi),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PhysicalParams {
        PhysicalParams::new(1.1, 0.7, 1.4).unwrap()
    }

    fn grid() -> Grid2D {
        Grid2D::square_two_pi(64).unwrap()
    }

    #[test]
    fn quadratic_functional_has_linear_variation() {
        let g = grid();
        let p = params();
        let mut sampler = FieldSampler::new(1);
        let state = sampler.state(g, 1.0);
        let probe = sampler.field(g);
        let d = directional_variation(&densities::v_squared(), &state, &p, Slot::V, &probe)
            .unwrap();
        let exact = 2.0 * state.v.mul(&probe).integrate();
        assert!(
            (d - exact).abs() <= 1e-8 * exact.abs().max(1.0),
            "{d} vs {exact}"
        );
    }

    #[test]
    fn variation_is_linear_in_probe() {
        let g = grid();
        let p = params();
        let mut sampler = FieldSampler::new(2);
        let state = sampler.state(g, 1.0);
        let p1 = sampler.field(g);
        let p2 = sampler.field(g);
        let f = densities::v_squared();
        let d1 = directional_variation(&f, &state, &p, Slot::V, &p1).unwrap();
        let d2 = directional_variation(&f, &state, &p, Slot::V, &p2).unwrap();
        let mut combo = p1.scaled(0.3);
        combo.add_scaled(-1.7, &p2);
        let dc = directional_variation(&f, &state, &p, Slot::V, &combo).unwrap();
        let expect = 0.3 * d1 - 1.7 * d2;
        let scale = (0.3 * d1).abs().max((1.7 * d2).abs()).max(1.0);
        assert!((dc - expect).abs() <= 1e-7 * scale);
    }

    #[test]
    fn jacobian_identities_vanish() {
        let g = grid();
        let p = params();
        for (i, (f, slot)) in jacobian_identities().into_iter().enumerate() {
            let worst =
                single_slot_variation_max(&f, slot, g, &p, 4, 100 + i as u64).unwrap();
            assert!(
                worst <= DEFAULT_TOL,
                "{} / {}: {worst}",
                f.name,
                slot.name()
            );
        }
    }

    #[test]
    fn jacobian_psi_v_raw_variation_is_tiny() {
        let g = grid();
        let p = params();
        let mut sampler = FieldSampler::new(3);
        let state = sampler.state(g, 1.0);
        let probe = sampler.field(g);
        let d = directional_variation(&densities::jacobian_psi_v(), &state, &p, Slot::V, &probe)
            .unwrap();
        assert!(d.abs() <= 1e-8, "raw variation {d}");
    }

    #[test]
    fn manifest_divergence_passes() {
        let verdict = is_divergence(
            &densities::dx_v_squared(),
            grid(),
            &params(),
            8,
            4,
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(verdict.holds, "measured {}", verdict.max_normalized);
    }

    #[test]
    fn psi_weighted_vorticity_bracket_is_divergence() {
        let verdict = is_divergence(
            &densities::psi_jacobian_psi_lap_psi(),
            grid(),
            &params(),
            8,
            5,
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(verdict.holds, "measured {}", verdict.max_normalized);
    }

    #[test]
    fn energy_is_not_a_divergence() {
        let verdict =
            is_divergence(&densities::energy(), grid(), &params(), 8, 6, DEFAULT_TOL).unwrap();
        assert!(!verdict.holds);
        assert!(verdict.max_raw > 1e-2, "witness too small: {}", verdict.max_raw);
    }

    #[test]
    fn translation_densities_are_trivial_on_solutions() {
        let g = grid();
        let p = params();
        for f in [
            densities::psi_shift(),
            densities::x_translation(),
            densities::z_translation(),
            densities::time_translation_substituted(),
        ] {
            let verdict = is_trivial_density(&f, g, &p, 7, DEFAULT_TOL).unwrap();
            assert!(
                verdict.holds,
                "{} measured {}",
                f.name, verdict.max_normalized
            );
        }
    }

    #[test]
    fn field_densities_are_not_trivial() {
        let g = grid();
        let p = params();
        for f in [densities::v(), densities::rho(), densities::energy()] {
            let verdict = is_trivial_density(&f, g, &p, 8, DEFAULT_TOL).unwrap();
            assert!(!verdict.holds, "{} should be non-trivial", f.name);
        }
    }

    #[test]
    fn mean_mode_witness_is_the_area() {
        // For F = v the variation against a constant unit probe is exactly
        // the domain area: the nonzero witness a mean-carrying probe sees.
        let g = grid();
        let p = params();
        let state = FieldSampler::new(9).state(g, 1.0);
        let probe = ScalarField::constant(g, 1.0);
        let d = directional_variation(&densities::v(), &state, &p, Slot::V, &probe).unwrap();
        let area = g.area();
        assert!((d - area).abs() <= 1e-9 * area, "{d} vs {area}");
    }
}

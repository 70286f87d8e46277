//! Conserved vectors of the model: densities, fluxes, and pointwise
//! divergence identities.
//!
//! A conserved vector `(C1, C2, C3)` satisfies
//! `D_t(C1) + D_x(C2) + D_z(C3) = 0` on solutions; `C1` is the density and
//! `(C2, C3)` the flux. `D_t(C1)` is evaluated by the chain rule with the
//! model tendencies substituted, which turns conservation into an exact
//! pointwise identity testable on a single snapshot — no time differencing
//! of a trajectory is involved.

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::model::{rhs, FieldState, StateTendencies, Trajectory};
use crate::params::PhysicalParams;
use crate::spectral::{diff, laplacian, Axis};

/// The non-trivial conserved vectors tracked by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConservedVector {
    /// Density `v`; from invariance under shifts of `v`.
    VTranslation,
    /// Density `rho`; from invariance under shifts of `rho`.
    RhoTranslation,
    /// Density `v^2 + (g^2/N^2) rho^2 + |grad psi|^2`; from the dilation
    /// symmetry.
    Energy,
}

impl ConservedVector {
    pub const ALL: [ConservedVector; 3] = [
        ConservedVector::VTranslation,
        ConservedVector::RhoTranslation,
        ConservedVector::Energy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ConservedVector::VTranslation => "v_translation",
            ConservedVector::RhoTranslation => "rho_translation",
            ConservedVector::Energy => "energy",
        }
    }
}

/// Density and flux fields of one conserved vector at one state.
#[derive(Debug, Clone)]
pub struct ConservedEval {
    pub density: ScalarField,
    pub flux_x: ScalarField,
    pub flux_z: ScalarField,
}

/// Symmetry characteristics `(W1, W2, W3)` feeding the density formula.
/// The gradient of `W3` is carried explicitly: for the dilation generator
/// `W3` contains the sawtooth coordinate fields, whose product-rule
/// gradient is smooth while their spectral derivative is not.
#[derive(Debug, Clone)]
pub struct Characteristics {
    pub w1: ScalarField,
    pub w2: ScalarField,
    pub w3: ScalarField,
    pub w3_x: ScalarField,
    pub w3_z: ScalarField,
}

/// Conservation-law density from a characteristic triple:
///
/// ```text
/// C1 = -v W1 - (g^2/N^2) rho W2 - psi_x D_x(W3) - psi_z D_z(W3)
/// ```
pub fn density_from_characteristics(
    w: &Characteristics,
    state: &FieldState,
    params: &PhysicalParams,
) -> Result<ScalarField> {
    w.w1.check_same_grid(&state.v, "characteristics vs state")?;
    let psi_x = diff(&state.psi, Axis::X, 1)?;
    let psi_z = diff(&state.psi, Axis::Z, 1)?;
    let mut c1 = state.v.mul(&w.w1).scaled(-1.0);
    c1.add_scaled(-params.g2_over_n2(), &state.rho.mul(&w.w2));
    c1.add_scaled(-1.0, &psi_x.mul(&w.w3_x));
    c1.add_scaled(-1.0, &psi_z.mul(&w.w3_z));
    Ok(c1)
}

/// Energy density `E = v^2 + (g^2/N^2) rho^2 + |grad psi|^2`.
pub fn energy_density(state: &FieldState, params: &PhysicalParams) -> Result<ScalarField> {
    let psi_x = diff(&state.psi, Axis::X, 1)?;
    let psi_z = diff(&state.psi, Axis::Z, 1)?;
    let mut e = state.v.mul(&state.v);
    e.add_scaled(params.g2_over_n2(), &state.rho.mul(&state.rho));
    e.add_scaled(1.0, &psi_x.mul(&psi_x));
    e.add_scaled(1.0, &psi_z.mul(&psi_z));
    Ok(e)
}

/// Density and flux of a conserved vector. The energy flux needs the time
/// derivative of the stream function, which is computed internally from
/// the model right-hand side.
pub fn evaluate(
    id: ConservedVector,
    state: &FieldState,
    params: &PhysicalParams,
) -> Result<ConservedEval> {
    let tend = StateTendencies::from(&rhs(state, params)?);
    evaluate_with(id, state, params, &tend)
}

/// As [`evaluate`], with the tendencies supplied by the caller.
pub fn evaluate_with(
    id: ConservedVector,
    state: &FieldState,
    params: &PhysicalParams,
    tend: &StateTendencies,
) -> Result<ConservedEval> {
    state.validate()?;
    let psi_x = diff(&state.psi, Axis::X, 1)?;
    let psi_z = diff(&state.psi, Axis::Z, 1)?;
    match id {
        ConservedVector::VTranslation => {
            // C1 = v, C2 = v psi_z, C3 = f psi - v psi_x
            let mut flux_z = state.psi.scaled(params.f);
            flux_z.add_scaled(-1.0, &state.v.mul(&psi_x));
            Ok(ConservedEval {
                density: state.v.clone(),
                flux_x: state.v.mul(&psi_z),
                flux_z,
            })
        }
        ConservedVector::RhoTranslation => {
            // C1 = rho, C2 = (N^2/g) psi + rho psi_z, C3 = -rho psi_x
            let mut flux_x = state.psi.scaled(params.n2_over_g());
            flux_x.add_scaled(1.0, &state.rho.mul(&psi_z));
            Ok(ConservedEval {
                density: state.rho.clone(),
                flux_x,
                flux_z: state.rho.mul(&psi_x).scaled(-1.0),
            })
        }
        ConservedVector::Energy => {
            // C1 = E
            // C2 = 2 g rho psi + v^2 psi_z + (g^2/N^2) rho^2 psi_z
            //      - 2 psi psi_xt + psi^2 lap(psi)_z
            // C3 = 2 f v psi - v^2 psi_x - (g^2/N^2) rho^2 psi_x
            //      - 2 psi psi_zt - psi^2 lap(psi)_x
            let g2n2 = params.g2_over_n2();
            let lap_psi = laplacian(&state.psi)?;
            let lap_x = diff(&lap_psi, Axis::X, 1)?;
            let lap_z = diff(&lap_psi, Axis::Z, 1)?;
            let psi_xt = diff(&tend.psi_t, Axis::X, 1)?;
            let psi_zt = diff(&tend.psi_t, Axis::Z, 1)?;
            let v2 = state.v.mul(&state.v);
            let rho2 = state.rho.mul(&state.rho);
            let psi2 = state.psi.mul(&state.psi);

            let mut flux_x = state.rho.mul(&state.psi).scaled(2.0 * params.g);
            flux_x.add_scaled(1.0, &v2.mul(&psi_z));
            flux_x.add_scaled(g2n2, &rho2.mul(&psi_z));
            flux_x.add_scaled(-2.0, &state.psi.mul(&psi_xt));
            flux_x.add_scaled(1.0, &psi2.mul(&lap_z));

            let mut flux_z = state.v.mul(&state.psi).scaled(2.0 * params.f);
            flux_z.add_scaled(-1.0, &v2.mul(&psi_x));
            flux_z.add_scaled(-g2n2, &rho2.mul(&psi_x));
            flux_z.add_scaled(-2.0, &state.psi.mul(&psi_zt));
            flux_z.add_scaled(-1.0, &psi2.mul(&lap_x));

            Ok(ConservedEval {
                density: energy_density(state, params)?,
                flux_x,
                flux_z,
            })
        }
    }
}

/// The density `C1` alone (no tendencies required).
pub fn density(
    id: ConservedVector,
    state: &FieldState,
    params: &PhysicalParams,
) -> Result<ScalarField> {
    match id {
        ConservedVector::VTranslation => Ok(state.v.clone()),
        ConservedVector::RhoTranslation => Ok(state.rho.clone()),
        ConservedVector::Energy => energy_density(state, params),
    }
}

/// `D_t(C1)` by the chain rule with supplied tendencies.
fn density_time_derivative(
    id: ConservedVector,
    state: &FieldState,
    params: &PhysicalParams,
    tend: &StateTendencies,
) -> Result<ScalarField> {
    match id {
        ConservedVector::VTranslation => Ok(tend.v_t.clone()),
        ConservedVector::RhoTranslation => Ok(tend.rho_t.clone()),
        ConservedVector::Energy => {
            let psi_x = diff(&state.psi, Axis::X, 1)?;
            let psi_z = diff(&state.psi, Axis::Z, 1)?;
            let psi_xt = diff(&tend.psi_t, Axis::X, 1)?;
            let psi_zt = diff(&tend.psi_t, Axis::Z, 1)?;
            let mut d = state.v.mul(&tend.v_t).scaled(2.0);
            d.add_scaled(2.0 * params.g2_over_n2(), &state.rho.mul(&tend.rho_t));
            d.add_scaled(2.0, &psi_x.mul(&psi_xt));
            d.add_scaled(2.0, &psi_z.mul(&psi_zt));
            Ok(d)
        }
    }
}

/// Pointwise conservation residual `D_t(C1) + D_x(C2) + D_z(C3)` with the
/// model tendencies substituted. Vanishes to rounding on arbitrary
/// band-limited fields.
pub fn divergence_residual(
    id: ConservedVector,
    state: &FieldState,
    params: &PhysicalParams,
) -> Result<ScalarField> {
    let tend = StateTendencies::from(&rhs(state, params)?);
    divergence_residual_with(id, state, params, &tend)
}

/// As [`divergence_residual`], with free (caller-supplied) tendencies.
pub fn divergence_residual_with(
    id: ConservedVector,
    state: &FieldState,
    params: &PhysicalParams,
    tend: &StateTendencies,
) -> Result<ScalarField> {
    let eval = evaluate_with(id, state, params, tend)?;
    let mut res = density_time_derivative(id, state, params, tend)?;
    res.add_scaled(1.0, &diff(&eval.flux_x, Axis::X, 1)?);
    res.add_scaled(1.0, &diff(&eval.flux_z, Axis::Z, 1)?);
    Ok(res)
}

/// Magnitude scale for the divergence residual: the largest of the three
/// divergence terms entering the cancellation.
pub fn divergence_scale(
    id: ConservedVector,
    state: &FieldState,
    params: &PhysicalParams,
) -> Result<f64> {
    let tend = StateTendencies::from(&rhs(state, params)?);
    let eval = evaluate_with(id, state, params, &tend)?;
    let dt = density_time_derivative(id, state, params, &tend)?;
    let dx = diff(&eval.flux_x, Axis::X, 1)?;
    let dz = diff(&eval.flux_z, Axis::Z, 1)?;
    Ok(dt.max_abs().max(dx.max_abs()).max(dz.max_abs()).max(1.0))
}

/// Time series of the density integral over a trajectory, with its
/// largest relative drift from the initial value. The drift is normalized
/// by `max(|I(0)|, integral of |C1(0)|)` so mean-free densities do not
/// divide by zero.
#[derive(Debug, Clone)]
pub struct DriftReport {
    pub series: Vec<(f64, f64)>,
    pub max_relative_drift: f64,
}

pub fn global_drift(
    id: ConservedVector,
    trajectory: &Trajectory,
    params: &PhysicalParams,
) -> Result<DriftReport> {
    if trajectory.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut series = Vec::with_capacity(trajectory.states.len());
    let mut denom = 0.0f64;
    for (i, state) in trajectory.states.iter().enumerate() {
        let c1 = density(id, state, params)?;
        if i == 0 {
            let l1 = c1.map(f64::abs).integrate();
            denom = c1.integrate().abs().max(l1).max(f64::MIN_POSITIVE);
        }
        series.push((state.t, c1.integrate()));
    }
    let i0 = series[0].1;
    let max_relative_drift = series
        .iter()
        .fold(0.0f64, |m, &(_, i)| m.max((i - i0).abs() / denom));
    Ok(DriftReport {
        series,
        max_relative_drift,
    })
}

/// The divergence-type part of the dilation-generator density, computed by
/// the product rule (the coordinate fields never meet a spectral
/// derivative). Subtracting it from the dilation density leaves `-2 E`;
/// dividing by `-2` is the documented normalization that recovers the
/// energy density.
pub fn dilation_divergence_part(
    state: &FieldState,
    params: &PhysicalParams,
) -> Result<ScalarField> {
    let grid = state.grid();
    let (x, z) = grid.coordinate_fields();
    let psi_x = diff(&state.psi, Axis::X, 1)?;
    let psi_z = diff(&state.psi, Axis::Z, 1)?;
    let psi_xx = diff(&state.psi, Axis::X, 2)?;
    let psi_zz = diff(&state.psi, Axis::Z, 2)?;
    let psi_xz = diff(&psi_x, Axis::Z, 1)?;
    let v_x = diff(&state.v, Axis::X, 1)?;
    let v_z = diff(&state.v, Axis::Z, 1)?;
    let rho_x = diff(&state.rho, Axis::X, 1)?;
    let rho_z = diff(&state.rho, Axis::Z, 1)?;
    let g2n2 = params.g2_over_n2();

    // D_x(x q) + D_z(z q) = 2 q + x D_x(q) + z D_z(q), assembled per term:
    //   q_v = v^2 / 2, q_rho = (g^2/N^2) rho^2 / 2, q_psi = |grad psi|^2 / 2
    let mut out = state.v.mul(&state.v);
    out.add_scaled(1.0, &x.mul(&state.v.mul(&v_x)));
    out.add_scaled(1.0, &z.mul(&state.v.mul(&v_z)));

    out.add_scaled(g2n2, &state.rho.mul(&state.rho));
    out.add_scaled(g2n2, &x.mul(&state.rho.mul(&rho_x)));
    out.add_scaled(g2n2, &z.mul(&state.rho.mul(&rho_z)));

    out.add_scaled(1.0, &psi_x.mul(&psi_x));
    out.add_scaled(1.0, &psi_z.mul(&psi_z));
    let mut grad_x = psi_x.mul(&psi_xx);
    grad_x.add_scaled(1.0, &psi_z.mul(&psi_xz));
    let mut grad_z = psi_x.mul(&psi_xz);
    grad_z.add_scaled(1.0, &psi_z.mul(&psi_zz));
    out.add_scaled(1.0, &x.mul(&grad_x));
    out.add_scaled(1.0, &z.mul(&grad_z));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use crate::rng::FieldSampler;

    fn params() -> PhysicalParams {
        PhysicalParams::new(1.1, 0.7, 1.4).unwrap()
    }

    #[test]
    fn zero_state_evaluates_to_zero() {
        let grid = Grid2D::square_two_pi(32).unwrap();
        let state = FieldState::zeros(grid);
        for id in ConservedVector::ALL {
            let e = evaluate(id, &state, &params()).unwrap();
            assert_eq!(e.density.max_abs(), 0.0);
            assert_eq!(e.flux_x.max_abs(), 0.0);
            assert_eq!(e.flux_z.max_abs(), 0.0);
        }
    }

    #[test]
    fn energy_density_is_nonnegative() {
        let grid = Grid2D::square_two_pi(64).unwrap();
        let state = FieldSampler::new(2).state(grid, 1.0);
        let e = energy_density(&state, &params()).unwrap();
        assert!(e.values().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn translation_divergences_vanish_on_random_fields() {
        let grid = Grid2D::square_two_pi(64).unwrap();
        let p = params();
        let mut sampler = FieldSampler::new(3);
        for _ in 0..4 {
            let state = sampler.state(grid, 1.0);
            for id in [ConservedVector::VTranslation, ConservedVector::RhoTranslation] {
                let res = divergence_residual(id, &state, &p).unwrap();
                let scale = divergence_scale(id, &state, &p).unwrap();
                assert!(
                    res.max_abs() <= 1e-11 * scale,
                    "{}: {} vs {scale}",
                    id.name(),
                    res.max_abs()
                );
            }
        }
    }

    #[test]
    fn energy_divergence_vanishes_on_random_fields() {
        let grid = Grid2D::square_two_pi(64).unwrap();
        let p = params();
        let mut sampler = FieldSampler::new(4);
        for _ in 0..4 {
            let state = sampler.state(grid, 1.0);
            let res = divergence_residual(ConservedVector::Energy, &state, &p).unwrap();
            let scale = divergence_scale(ConservedVector::Energy, &state, &p).unwrap();
            assert!(res.max_abs() <= 1e-9 * scale, "{} vs {scale}", res.max_abs());
        }
    }

    #[test]
    fn v_divergence_with_free_tendency_matches_equation_residual() {
        let grid = Grid2D::square_two_pi(64).unwrap();
        let p = params();
        let mut sampler = FieldSampler::new(5);
        let state = sampler.state(grid, 1.0);
        let tend = StateTendencies {
            v_t: sampler.field(grid),
            rho_t: sampler.field(grid),
            psi_t: sampler.field(grid),
            zeta_t: sampler.field(grid),
        };
        let div =
            divergence_residual_with(ConservedVector::VTranslation, &state, &p, &tend).unwrap();
        let res = crate::model::residuals(&state, &tend, &p).unwrap();
        assert!(div.max_abs_diff(&res[1]) <= 1e-11 * div.max_abs().max(1.0));
    }

    #[test]
    fn energy_ignores_psi_gauge() {
        let grid = Grid2D::square_two_pi(64).unwrap();
        let p = params();
        let state = FieldSampler::new(6).state(grid, 1.0);
        let mut shifted = state.clone();
        shifted.psi = shifted.psi.map(|v| v + 3.0);
        let a = energy_density(&state, &p).unwrap();
        let b = energy_density(&shifted, &p).unwrap();
        assert!(a.max_abs_diff(&b) <= 1e-12 * a.max_abs().max(1.0));
    }

    #[test]
    fn single_snapshot_has_zero_drift() {
        let grid = Grid2D::square_two_pi(32).unwrap();
        let state = FieldSampler::new(7).state(grid, 1.0);
        let traj = Trajectory {
            states: vec![state],
        };
        let report = global_drift(ConservedVector::Energy, &traj, &params()).unwrap();
        assert_eq!(report.series.len(), 1);
        assert_eq!(report.max_relative_drift, 0.0);
    }

    #[test]
    fn empty_trajectory_is_an_error() {
        let traj = Trajectory::default();
        assert!(matches!(
            global_drift(ConservedVector::Energy, &traj, &params()),
            Err(Error::EmptyTrajectory)
        ));
    }
}

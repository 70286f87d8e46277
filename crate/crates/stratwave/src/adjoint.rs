//! Adjoint system of the model and its reduction to the original
//! equations.
//!
//! The adjoint equations in the costate `(phi, mu, r)` read
//!
//! ```text
//! lap(phi_t) + (N^2/g) r_x + f mu_z - phi_x lap(psi)_z + phi_z lap(psi)_x - Theta = 0
//! -mu_t - mu_x psi_z + f phi_z + mu_z psi_x = 0
//! -r_t  + g phi_x  - r_x psi_z + r_z psi_x  = 0
//! ```
//!
//! with the coupling term
//!
//! ```text
//! Theta = J(mu, v) + J(r, rho)
//!       + 2 [phi_xz psi_xx + phi_zz psi_xz - phi_xx psi_xz - phi_xz psi_zz].
//! ```
//!
//! Under the substitution `phi = psi`, `mu = -v`, `r = -(g^2/N^2) rho`,
//! `Theta` vanishes identically and the three adjoint equations become the
//! original equations multiplied by the constant factors `(1, 1, g^2/N^2)`.
//! This module evaluates those statements numerically; it never integrates
//! the adjoint system in time, so costate time derivatives are supplied by
//! the caller.

use crate::error::Result;
use crate::grid::ScalarField;
use crate::model::{FieldState, StateTendencies};
use crate::params::PhysicalParams;
use crate::spectral::{diff, jacobian, laplacian, Axis};

/// Adjoint variables paired with a [`FieldState`] on the same grid.
#[derive(Debug, Clone)]
pub struct Costate {
    pub phi: ScalarField,
    pub mu: ScalarField,
    pub r: ScalarField,
}

impl Costate {
    fn validate(&self, state: &FieldState) -> Result<()> {
        self.phi.check_same_grid(&state.v, "costate vs state")?;
        self.phi.check_same_grid(&self.mu, "costate fields")?;
        self.phi.check_same_grid(&self.r, "costate fields")?;
        self.phi.check_finite("costate phi")?;
        self.mu.check_finite("costate mu")?;
        self.r.check_finite("costate r")?;
        Ok(())
    }
}

/// Supplied costate time derivatives. `lap_phi_t` enters the first adjoint
/// equation directly, so it is carried explicitly rather than derived from
/// `phi_t`.
#[derive(Debug, Clone)]
pub struct CostateTendencies {
    pub phi_t: ScalarField,
    pub mu_t: ScalarField,
    pub r_t: ScalarField,
    pub lap_phi_t: ScalarField,
}

/// The reduction `phi = psi`, `mu = -v`, `r = -(g^2/N^2) rho`.
pub fn self_adjoint_substitution(state: &FieldState, params: &PhysicalParams) -> Costate {
    Costate {
        phi: state.psi.clone(),
        mu: state.v.scaled(-1.0),
        r: state.rho.scaled(-params.g2_over_n2()),
    }
}

/// The same reduction applied to state tendencies, giving the induced
/// costate tendencies.
pub fn substitute_tendencies(
    tend: &StateTendencies,
    params: &PhysicalParams,
) -> CostateTendencies {
    CostateTendencies {
        phi_t: tend.psi_t.clone(),
        mu_t: tend.v_t.scaled(-1.0),
        r_t: tend.rho_t.scaled(-params.g2_over_n2()),
        lap_phi_t: tend.zeta_t.clone(),
    }
}

fn second_derivatives(
    f: &ScalarField,
) -> Result<(ScalarField, ScalarField, ScalarField)> {
    let xx = diff(f, Axis::X, 2)?;
    let xz = diff(&diff(f, Axis::X, 1)?, Axis::Z, 1)?;
    let zz = diff(f, Axis::Z, 2)?;
    Ok((xx, xz, zz))
}

/// The coupling term `Theta` of the first adjoint equation.
pub fn theta(state: &FieldState, costate: &Costate) -> Result<ScalarField> {
    costate.validate(state)?;
    let (phi_xx, phi_xz, phi_zz) = second_derivatives(&costate.phi)?;
    let (psi_xx, psi_xz, psi_zz) = second_derivatives(&state.psi)?;

    let mut out = jacobian(&costate.mu, &state.v)?;
    out.add_scaled(1.0, &jacobian(&costate.r, &state.rho)?);
    for (i, o) in out.values_mut().iter_mut().enumerate() {
        *o += 2.0
            * (phi_xz.values()[i] * psi_xx.values()[i]
                + phi_zz.values()[i] * psi_xz.values()[i]
                - phi_xx.values()[i] * psi_xz.values()[i]
                - phi_xz.values()[i] * psi_zz.values()[i]);
    }
    Ok(out)
}

/// Pointwise magnitude of the terms entering `Theta`, the cancellation
/// scale for its tolerance.
pub fn theta_scale(state: &FieldState, costate: &Costate) -> Result<f64> {
    let (phi_xx, phi_xz, phi_zz) = second_derivatives(&costate.phi)?;
    let (psi_xx, psi_xz, psi_zz) = second_derivatives(&state.psi)?;
    let j_mu = jacobian_term_scale(&costate.mu, &state.v)?;
    let j_r = jacobian_term_scale(&costate.r, &state.rho)?;
    let n = state.grid().len();
    let mut scale: f64 = 0.0;
    for i in 0..n {
        let bracket = 2.0
            * (phi_xz.values()[i].abs() * psi_xx.values()[i].abs()
                + phi_zz.values()[i].abs() * psi_xz.values()[i].abs()
                + phi_xx.values()[i].abs() * psi_xz.values()[i].abs()
                + phi_xz.values()[i].abs() * psi_zz.values()[i].abs());
        scale = scale.max(bracket);
    }
    Ok(scale.max(j_mu).max(j_r).max(1.0))
}

fn jacobian_term_scale(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    let ax = diff(a, Axis::X, 1)?;
    let az = diff(a, Axis::Z, 1)?;
    let bx = diff(b, Axis::X, 1)?;
    let bz = diff(b, Axis::Z, 1)?;
    let n = a.grid().len();
    let mut s: f64 = 0.0;
    for i in 0..n {
        s = s.max(
            (ax.values()[i] * bz.values()[i]).abs() + (az.values()[i] * bx.values()[i]).abs(),
        );
    }
    Ok(s)
}

/// Left-hand sides of the three adjoint equations for supplied costate
/// time derivatives.
pub fn adjoint_residual(
    state: &FieldState,
    costate: &Costate,
    params: &PhysicalParams,
    tend: &CostateTendencies,
) -> Result<[ScalarField; 3]> {
    costate.validate(state)?;
    let lap_psi = laplacian(&state.psi)?;
    let lap_psi_x = diff(&lap_psi, Axis::X, 1)?;
    let lap_psi_z = diff(&lap_psi, Axis::Z, 1)?;
    let psi_x = diff(&state.psi, Axis::X, 1)?;
    let psi_z = diff(&state.psi, Axis::Z, 1)?;

    // lap(phi_t) + (N^2/g) r_x + f mu_z - phi_x lap(psi)_z + phi_z lap(psi)_x - Theta
    let mut a0 = tend.lap_phi_t.clone();
    a0.add_scaled(params.n2_over_g(), &diff(&costate.r, Axis::X, 1)?);
    a0.add_scaled(params.f, &diff(&costate.mu, Axis::Z, 1)?);
    let phi_x = diff(&costate.phi, Axis::X, 1)?;
    let phi_z = diff(&costate.phi, Axis::Z, 1)?;
    a0.add_scaled(-1.0, &phi_x.mul(&lap_psi_z));
    a0.add_scaled(1.0, &phi_z.mul(&lap_psi_x));
    a0.add_scaled(-1.0, &theta(state, costate)?);

    // -mu_t - mu_x psi_z + f phi_z + mu_z psi_x
    let mut a1 = tend.mu_t.scaled(-1.0);
    a1.add_scaled(-1.0, &diff(&costate.mu, Axis::X, 1)?.mul(&psi_z));
    a1.add_scaled(params.f, &phi_z);
    a1.add_scaled(1.0, &diff(&costate.mu, Axis::Z, 1)?.mul(&psi_x));

    // -r_t + g phi_x - r_x psi_z + r_z psi_x
    let mut a2 = tend.r_t.scaled(-1.0);
    a2.add_scaled(params.g, &phi_x);
    a2.add_scaled(-1.0, &diff(&costate.r, Axis::X, 1)?.mul(&psi_z));
    a2.add_scaled(1.0, &diff(&costate.r, Axis::Z, 1)?.mul(&psi_x));

    Ok([a0, a1, a2])
}

/// The diagonal equivalence factors `(1, 1, g^2/N^2)` relating the adjoint
/// residuals under the substitution to the original residuals. Asserted as
/// a derived fact and validated numerically by the verification suite.
pub fn equivalence_factors(params: &PhysicalParams) -> [f64; 3] {
    [1.0, 1.0, params.g2_over_n2()]
}

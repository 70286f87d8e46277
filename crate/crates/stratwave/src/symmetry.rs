//! The obvious point symmetries of the model: translations in all
//! dependent and independent variables and the non-uniform dilation. Each
//! generator yields a characteristic triple for the conservation-law
//! density formula; the dilation also acts on closed-form solutions as a
//! finite transformation.

use crate::conservation::Characteristics;
use crate::error::Result;
use crate::exact::{AnalyticSolution, SolutionPoint};
use crate::grid::ScalarField;
use crate::model::{residuals, rhs, FieldState, StateTendencies};
use crate::params::PhysicalParams;
use crate::spectral::{diff, Axis};

/// Symmetry generators admitted by the model equations.
///
/// The shifts exist because the equations contain no variable explicitly;
/// the dilation scales `x, z, v, rho` by one factor and `psi` by its
/// square, leaving time untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    VShift,
    RhoShift,
    PsiShift,
    TimeShift,
    XShift,
    ZShift,
    Dilation,
}

impl Generator {
    pub const ALL: [Generator; 7] = [
        Generator::VShift,
        Generator::RhoShift,
        Generator::PsiShift,
        Generator::TimeShift,
        Generator::XShift,
        Generator::ZShift,
        Generator::Dilation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Generator::VShift => "v_shift",
            Generator::RhoShift => "rho_shift",
            Generator::PsiShift => "psi_shift",
            Generator::TimeShift => "time_shift",
            Generator::XShift => "x_shift",
            Generator::ZShift => "z_shift",
            Generator::Dilation => "dilation",
        }
    }
}

/// Characteristic triple `W = eta - xi^j u_j` of a generator at a state.
///
/// The time-shift characteristic substitutes the model tendencies, so the
/// result lives on solutions by construction. For the dilation, the
/// gradient of `W3 = 2 psi - x psi_x - z psi_z` is assembled by the
/// product rule; the coordinate fields are sawtooth on the torus and must
/// not meet a spectral derivative.
pub fn characteristics(
    id: Generator,
    state: &FieldState,
    params: &PhysicalParams,
) -> Result<Characteristics> {
    state.validate()?;
    let grid = state.grid();
    let zero = || ScalarField::zeros(grid);
    let one = || ScalarField::constant(grid, 1.0);
    match id {
        Generator::VShift => Ok(Characteristics {
            w1: one(),
            w2: zero(),
            w3: zero(),
            w3_x: zero(),
            w3_z: zero(),
        }),
        Generator::RhoShift => Ok(Characteristics {
            w1: zero(),
            w2: one(),
            w3: zero(),
            w3_x: zero(),
            w3_z: zero(),
        }),
        Generator::PsiShift => Ok(Characteristics {
            w1: zero(),
            w2: zero(),
            w3: one(),
            w3_x: zero(),
            w3_z: zero(),
        }),
        Generator::TimeShift => {
            let tend = rhs(state, params)?;
            let w3 = tend.dpsi_dt.scaled(-1.0);
            let w3_x = diff(&w3, Axis::X, 1)?;
            let w3_z = diff(&w3, Axis::Z, 1)?;
            Ok(Characteristics {
                w1: tend.dv_dt.scaled(-1.0),
                w2: tend.drho_dt.scaled(-1.0),
                w3,
                w3_x,
                w3_z,
            })
        }
        Generator::XShift | Generator::ZShift => {
            let axis = if id == Generator::XShift {
                Axis::X
            } else {
                Axis::Z
            };
            let w3 = diff(&state.psi, axis, 1)?.scaled(-1.0);
            let w3_x = diff(&w3, Axis::X, 1)?;
            let w3_z = diff(&w3, Axis::Z, 1)?;
            Ok(Characteristics {
                w1: diff(&state.v, axis, 1)?.scaled(-1.0),
                w2: diff(&state.rho, axis, 1)?.scaled(-1.0),
                w3,
                w3_x,
                w3_z,
            })
        }
        Generator::Dilation => {
            let (x, z) = grid.coordinate_fields();
            let v_x = diff(&state.v, Axis::X, 1)?;
            let v_z = diff(&state.v, Axis::Z, 1)?;
            let rho_x = diff(&state.rho, Axis::X, 1)?;
            let rho_z = diff(&state.rho, Axis::Z, 1)?;
            let psi_x = diff(&state.psi, Axis::X, 1)?;
            let psi_z = diff(&state.psi, Axis::Z, 1)?;
            let psi_xx = diff(&state.psi, Axis::X, 2)?;
            let psi_zz = diff(&state.psi, Axis::Z, 2)?;
            let psi_xz = diff(&psi_x, Axis::Z, 1)?;

            let mut w1 = state.v.clone();
            w1.add_scaled(-1.0, &x.mul(&v_x));
            w1.add_scaled(-1.0, &z.mul(&v_z));
            let mut w2 = state.rho.clone();
            w2.add_scaled(-1.0, &x.mul(&rho_x));
            w2.add_scaled(-1.0, &z.mul(&rho_z));
            let mut w3 = state.psi.scaled(2.0);
            w3.add_scaled(-1.0, &x.mul(&psi_x));
            w3.add_scaled(-1.0, &z.mul(&psi_z));
            // product rule: D_x(2 psi - x psi_x - z psi_z)
            //             = psi_x - x psi_xx - z psi_xz, and likewise in z
            let mut w3_x = psi_x.clone();
            w3_x.add_scaled(-1.0, &x.mul(&psi_xx));
            w3_x.add_scaled(-1.0, &z.mul(&psi_xz));
            let mut w3_z = psi_z.clone();
            w3_z.add_scaled(-1.0, &x.mul(&psi_xz));
            w3_z.add_scaled(-1.0, &z.mul(&psi_zz));
            Ok(Characteristics {
                w1,
                w2,
                w3,
                w3_x,
                w3_z,
            })
        }
    }
}

/// A closed-form solution pushed through the finite dilation
/// `x -> x e^a, z -> z e^a, v -> v e^a, rho -> rho e^a, psi -> psi e^{2a}`:
/// the transformed fields are
/// `v'(t, x, z) = e^a v(t, e^{-a} x, e^{-a} z)` and so on.
#[derive(Debug, Clone, Copy)]
pub struct Dilated<S> {
    inner: S,
    a: f64,
}

pub fn apply_dilation<S: AnalyticSolution>(sol: S, a: f64) -> Dilated<S> {
    Dilated { inner: sol, a }
}

impl<S: AnalyticSolution> AnalyticSolution for Dilated<S> {
    fn eval(&self, t: f64, x: f64, z: f64) -> SolutionPoint {
        let s = self.a.exp();
        let inv = (-self.a).exp();
        let p = self.inner.eval(t, inv * x, inv * z);
        // each space derivative trades one factor of e^a for e^{-a}
        SolutionPoint {
            psi: s * s * p.psi,
            psi_x: s * p.psi_x,
            psi_z: s * p.psi_z,
            psi_t: s * s * p.psi_t,
            psi_xx: p.psi_xx,
            psi_xz: p.psi_xz,
            psi_zz: p.psi_zz,
            lap_psi: p.lap_psi,
            lap_psi_x: inv * p.lap_psi_x,
            lap_psi_z: inv * p.lap_psi_z,
            lap_psi_t: p.lap_psi_t,
            v: s * p.v,
            v_x: p.v_x,
            v_z: p.v_z,
            v_t: s * p.v_t,
            rho: s * p.rho,
            rho_x: p.rho_x,
            rho_z: p.rho_z,
            rho_t: s * p.rho_t,
        }
    }
}

/// Measured residual scaling exponents under the dilation subfamily
/// `v -> a v, rho -> a rho, psi -> a^2 psi, x -> a x, z -> a z, t -> t`.
///
/// The state (with free tendencies) is rescaled onto the stretched grid
/// and the residual fields of both configurations are compared as
/// `log_a(|R'|/|R|)`. Consistency of the model terms demands the exponents
/// `(0, 1, 1)`.
pub fn scaling_exponents(
    state: &FieldState,
    tend: &StateTendencies,
    params: &PhysicalParams,
    a: f64,
) -> Result<[f64; 3]> {
    let grid = state.grid();
    let scaled_grid = crate::grid::Grid2D::new(
        grid.nx(),
        grid.nz(),
        a * grid.lx(),
        a * grid.lz(),
    )?;
    let rescale = |f: &ScalarField, c: f64| {
        ScalarField::from_values(scaled_grid, f.values().iter().map(|&v| c * v).collect())
            .expect("same sample count")
    };
    let scaled_state = FieldState {
        t: state.t,
        v: rescale(&state.v, a),
        rho: rescale(&state.rho, a),
        psi: rescale(&state.psi, a * a),
    };
    let scaled_tend = StateTendencies {
        v_t: rescale(&tend.v_t, a),
        rho_t: rescale(&tend.rho_t, a),
        psi_t: rescale(&tend.psi_t, a * a),
        zeta_t: rescale(&tend.zeta_t, 1.0),
    };
    let base = residuals(state, tend, params)?;
    let scaled = residuals(&scaled_state, &scaled_tend, params)?;
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = (scaled[i].max_abs() / base[i].max_abs()).ln() / a.ln();
    }
    Ok(out)
}

/// Largest mismatch between "shift then evaluate residuals" and "evaluate
/// residuals then shift", for a grid-commensurate translation.
pub fn translation_equivariance_residual(
    state: &FieldState,
    tend: &StateTendencies,
    params: &PhysicalParams,
    sx: usize,
    sz: usize,
) -> Result<f64> {
    let shift_state = FieldState {
        t: state.t,
        v: state.v.shifted(sx, sz),
        rho: state.rho.shifted(sx, sz),
        psi: state.psi.shifted(sx, sz),
    };
    let shift_tend = StateTendencies {
        v_t: tend.v_t.shifted(sx, sz),
        rho_t: tend.rho_t.shifted(sx, sz),
        psi_t: tend.psi_t.shifted(sx, sz),
        zeta_t: tend.zeta_t.shifted(sx, sz),
    };
    let of_shifted = residuals(&shift_state, &shift_tend, params)?;
    let base = residuals(state, tend, params)?;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        let scale = base[i].max_abs().max(1.0);
        worst = worst.max(of_shifted[i].max_abs_diff(&base[i].shifted(sx, sz)) / scale);
    }
    Ok(worst)
}

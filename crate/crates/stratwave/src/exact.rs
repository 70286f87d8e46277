//! Closed-form solution families: the oscillation frequency of a wave
//! vector, the scale-invariant profile solution, and generalized beam
//! solutions with separated variables. All families carry analytic
//! derivatives so PDE residuals can be evaluated pollution-free at
//! arbitrary points.

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::model::FieldState;
use crate::params::PhysicalParams;

/// Wave vector `(k, m)` of the phase variable `lambda = k x + m z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveVector {
    pub k: f64,
    pub m: f64,
}

impl WaveVector {
    pub fn new(k: f64, m: f64) -> Result<Self> {
        if !(k.is_finite() && m.is_finite()) || (k == 0.0 && m == 0.0) {
            return Err(Error::ZeroWaveVector);
        }
        Ok(Self { k, m })
    }

    pub fn lambda(&self, x: f64, z: f64) -> f64 {
        self.k * x + self.m * z
    }
}

/// Oscillation frequency of wave vector `(k, m)`:
/// `omega^2 = (k^2 N^2 + m^2 f^2) / (k^2 + m^2)`, positive root.
///
/// Degenerate limits: `m = 0` gives `omega = N`; `k = 0` gives
/// `omega = |f|`.
pub fn omega(wave: WaveVector, params: &PhysicalParams) -> Result<f64> {
    let (k, m) = (wave.k, wave.m);
    let k2 = k * k;
    let m2 = m * m;
    let w2 = (k2 * params.n * params.n + m2 * params.f * params.f) / (k2 + m2);
    Ok(w2.sqrt())
}

/// An envelope value with its first three derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeJet {
    pub f: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Profile functions of `lambda` with analytic derivatives through third
/// order (the vorticity equation differentiates the stream-function
/// envelope three times).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Zero,
    Constant(f64),
    /// `c * lambda`
    Linear(f64),
    /// `c * lambda^2`
    Quadratic(f64),
    /// `a * cos(lambda)`
    Cosine(f64),
    /// `a * sin(lambda)`
    Sine(f64),
    /// `a / (1 + lambda^2)`
    Lorentzian { a: f64 },
    /// `a * lambda / (1 + lambda^2)`
    LorentzianOdd { a: f64 },
    /// `amp * exp(-lambda^2 / (2 width^2))`
    Gaussian { amp: f64, width: f64 },
}

impl Envelope {
    pub fn eval(&self, l: f64) -> EnvelopeJet {
        match *self {
            Envelope::Zero => EnvelopeJet {
                f: 0.0,
                d1: 0.0,
                d2: 0.0,
                d3: 0.0,
            },
            Envelope::Constant(c) => EnvelopeJet {
                f: c,
                d1: 0.0,
                d2: 0.0,
                d3: 0.0,
            },
            Envelope::Linear(c) => EnvelopeJet {
                f: c * l,
                d1: c,
                d2: 0.0,
                d3: 0.0,
            },
            Envelope::Quadratic(c) => EnvelopeJet {
                f: c * l * l,
                d1: 2.0 * c * l,
                d2: 2.0 * c,
                d3: 0.0,
            },
            Envelope::Cosine(a) => EnvelopeJet {
                f: a * l.cos(),
                d1: -a * l.sin(),
                d2: -a * l.cos(),
                d3: a * l.sin(),
            },
            Envelope::Sine(a) => EnvelopeJet {
                f: a * l.sin(),
                d1: a * l.cos(),
                d2: -a * l.sin(),
                d3: -a * l.cos(),
            },
            Envelope::Lorentzian { a } => {
                let s = 1.0 + l * l;
                EnvelopeJet {
                    f: a / s,
                    d1: -2.0 * a * l / (s * s),
                    d2: 2.0 * a * (3.0 * l * l - 1.0) / (s * s * s),
                    d3: 24.0 * a * l * (1.0 - l * l) / (s * s * s * s),
                }
            }
            Envelope::LorentzianOdd { a } => {
                let s = 1.0 + l * l;
                EnvelopeJet {
                    f: a * l / s,
                    d1: a * (1.0 - l * l) / (s * s),
                    d2: 2.0 * a * l * (l * l - 3.0) / (s * s * s),
                    d3: -6.0 * a * (l * l * l * l - 6.0 * l * l + 1.0) / (s * s * s * s),
                }
            }
            Envelope::Gaussian { amp, width } => {
                let q = 1.0 / (width * width);
                let e = amp * (-0.5 * q * l * l).exp();
                EnvelopeJet {
                    f: e,
                    d1: -q * l * e,
                    d2: q * (q * l * l - 1.0) * e,
                    d3: q * q * l * (3.0 - q * l * l) * e,
                }
            }
        }
    }

    /// Same shape with the amplitude multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Envelope {
        match *self {
            Envelope::Zero => Envelope::Zero,
            Envelope::Constant(a) => Envelope::Constant(c * a),
            Envelope::Linear(a) => Envelope::Linear(c * a),
            Envelope::Quadratic(a) => Envelope::Quadratic(c * a),
            Envelope::Cosine(a) => Envelope::Cosine(c * a),
            Envelope::Sine(a) => Envelope::Sine(c * a),
            Envelope::Lorentzian { a } => Envelope::Lorentzian { a: c * a },
            Envelope::LorentzianOdd { a } => Envelope::LorentzianOdd { a: c * a },
            Envelope::Gaussian { amp, width } => Envelope::Gaussian { amp: c * amp, width },
        }
    }
}

/// A generalized beam: stream-function envelopes `A`, `B` and mean
/// profiles `F`, `H` of the phase `lambda = k x + m z`.
///
/// The mean profiles must satisfy `g k H' + f m F' = 0` for the beam to
/// solve the model equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    pub wave: WaveVector,
    pub a: Envelope,
    pub b: Envelope,
    pub f_mean: Envelope,
    pub h_mean: Envelope,
}

impl BeamSpec {
    /// Largest constraint residual `|g k H' + f m F'|` over `probes`,
    /// together with the worst probe point and the term scale there.
    pub fn constraint_residual(&self, params: &PhysicalParams, probes: &[f64]) -> (f64, f64, f64) {
        let (mut worst, mut at, mut scale) = (0.0f64, 0.0f64, 1.0f64);
        for &l in probes {
            let hp = self.h_mean.eval(l).d1;
            let fp = self.f_mean.eval(l).d1;
            let gkh = params.g * self.wave.k * hp;
            let fmf = params.f * self.wave.m * fp;
            let r = (gkh + fmf).abs();
            if r > worst {
                worst = r;
                at = l;
                scale = gkh.abs() + fmf.abs();
            }
        }
        (worst, at, scale.max(1.0))
    }

    /// `E(lambda) = A'(lambda)^2 + B'(lambda)^2`, the beam energy density
    /// (the full energy of the beam divided by `k^2 + m^2`). Constant
    /// along every line `k x + m z = const`.
    pub fn energy_density(&self, lambda: f64) -> f64 {
        let ap = self.a.eval(lambda).d1;
        let bp = self.b.eval(lambda).d1;
        ap * ap + bp * bp
    }

    /// Beam energy density evaluated at a point of the plane.
    pub fn energy_at(&self, x: f64, z: f64) -> f64 {
        self.energy_density(self.wave.lambda(x, z))
    }
}

/// Traveling plane wave: `A = cos`, `B = sin`, no mean profiles, so
/// `psi = cos(lambda - omega t)`.
pub fn plane_wave(wave: WaveVector) -> BeamSpec {
    BeamSpec {
        wave,
        a: Envelope::Cosine(1.0),
        b: Envelope::Sine(1.0),
        f_mean: Envelope::Zero,
        h_mean: Envelope::Zero,
    }
}

/// Localized beam with `A = a/(1+lambda^2)`, `B = a*lambda/(1+lambda^2)`;
/// its energy density is `a^2/(1+lambda^2)^2`.
pub fn lorentzian_beam(a: f64, wave: WaveVector) -> Result<BeamSpec> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beam amplitude must be > 0, got {a}"
        )));
    }
    Ok(BeamSpec {
        wave,
        a: Envelope::Lorentzian { a },
        b: Envelope::LorentzianOdd { a },
        f_mean: Envelope::Zero,
        h_mean: Envelope::Zero,
    })
}

/// Gaussian-envelope beam, a second localized demo family.
pub fn gaussian_beam(amp: f64, width: f64, wave: WaveVector) -> Result<BeamSpec> {
    if !amp.is_finite() || !width.is_finite() || amp <= 0.0 || width <= 0.0 {
        return Err(Error::InvalidParameter(
            "gaussian beam needs amp > 0 and width > 0".into(),
        ));
    }
    Ok(BeamSpec {
        wave,
        a: Envelope::Gaussian { amp, width },
        b: Envelope::Zero,
        f_mean: Envelope::Zero,
        h_mean: Envelope::Zero,
    })
}

/// Evaluated solution jet at one point `(t, x, z)`: the three fields with
/// every derivative the model equations touch.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolutionPoint {
    pub psi: f64,
    pub psi_x: f64,
    pub psi_z: f64,
    pub psi_t: f64,
    pub psi_xx: f64,
    pub psi_xz: f64,
    pub psi_zz: f64,
    pub lap_psi: f64,
    pub lap_psi_x: f64,
    pub lap_psi_z: f64,
    pub lap_psi_t: f64,
    pub v: f64,
    pub v_x: f64,
    pub v_z: f64,
    pub v_t: f64,
    pub rho: f64,
    pub rho_x: f64,
    pub rho_z: f64,
    pub rho_t: f64,
}

/// A solution of the model equations known in closed form.
pub trait AnalyticSolution {
    fn eval(&self, t: f64, x: f64, z: f64) -> SolutionPoint;
}

/// Beam solution
///
/// ```text
/// psi = A(lambda) cos(wt) + B(lambda) sin(wt)
/// v   = (f m / w) [B' cos(wt) - A' sin(wt)] + F(lambda)
/// rho = (k N^2 / (g w)) [B' cos(wt) - A' sin(wt)] + H(lambda)
/// ```
#[derive(Debug, Clone, Copy)]
pub struct BeamSolution {
    pub spec: BeamSpec,
    pub params: PhysicalParams,
    pub omega: f64,
}

/// Default probe points for the mean-profile constraint check.
fn constraint_probes() -> Vec<f64> {
    (0..64).map(|i| -10.0 + 20.0 * i as f64 / 63.0).collect()
}

/// Construct the beam solution, verifying the mean-profile constraint
/// `g k H' + f m F' = 0` at probe points.
pub fn beam_solution(spec: BeamSpec, params: &PhysicalParams) -> Result<BeamSolution> {
    let (worst, at, scale) = spec.constraint_residual(params, &constraint_probes());
    if worst > 1e-10 * scale {
        return Err(Error::BeamConstraint {
            residual: worst,
            lambda: at,
        });
    }
    beam_solution_unchecked(spec, params)
}

/// Construct the beam solution without checking the mean-profile
/// constraint. Used for negative controls; the result only solves the
/// model equations when the constraint holds.
pub fn beam_solution_unchecked(spec: BeamSpec, params: &PhysicalParams) -> Result<BeamSolution> {
    let w = omega(spec.wave, params)?;
    if w <= 0.0 {
        return Err(Error::InvalidParameter(
            "wave vector has zero oscillation frequency (k = 0 with f = 0)".into(),
        ));
    }
    Ok(BeamSolution {
        spec,
        params: *params,
        omega: w,
    })
}

impl AnalyticSolution for BeamSolution {
    fn eval(&self, t: f64, x: f64, z: f64) -> SolutionPoint {
        let WaveVector { k, m } = self.spec.wave;
        let w = self.omega;
        let l = self.spec.wave.lambda(x, z);
        let a = self.spec.a.eval(l);
        let b = self.spec.b.eval(l);
        let fm = self.spec.f_mean.eval(l);
        let hm = self.spec.h_mean.eval(l);
        let (ct, st) = ((w * t).cos(), (w * t).sin());
        let k2m2 = k * k + m * m;

        // psi and its lambda-derivatives g_n = A^(n) ct + B^(n) st
        let g0 = a.f * ct + b.f * st;
        let g1 = a.d1 * ct + b.d1 * st;
        let g2 = a.d2 * ct + b.d2 * st;
        let g3 = a.d3 * ct + b.d3 * st;
        // oscillation quadrature q = B' ct - A' st and friends
        let q = b.d1 * ct - a.d1 * st;
        let q_l = b.d2 * ct - a.d2 * st;
        let q_t = w * (-b.d1 * st - a.d1 * ct);

        let cv = self.params.f * m / w;
        let cr = k * self.params.n * self.params.n / (self.params.g * w);

        SolutionPoint {
            psi: g0,
            psi_x: k * g1,
            psi_z: m * g1,
            psi_t: w * (-a.f * st + b.f * ct),
            psi_xx: k * k * g2,
            psi_xz: k * m * g2,
            psi_zz: m * m * g2,
            lap_psi: k2m2 * g2,
            lap_psi_x: k2m2 * k * g3,
            lap_psi_z: k2m2 * m * g3,
            lap_psi_t: k2m2 * w * (-a.d2 * st + b.d2 * ct),
            v: cv * q + fm.f,
            v_x: k * (cv * q_l + fm.d1),
            v_z: m * (cv * q_l + fm.d1),
            v_t: cv * q_t,
            rho: cr * q + hm.f,
            rho_x: k * (cr * q_l + hm.d1),
            rho_z: m * (cr * q_l + hm.d1),
            rho_t: cr * q_t,
        }
    }
}

/// Parameters of the scale-invariant profile solution: `psi` quadratic in
/// `lambda` with harmonic time dependence, `v` and `rho` linear in
/// `lambda`.
#[derive(Debug, Clone, Copy)]
pub struct InvariantSolutionParams {
    pub wave: WaveVector,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl InvariantSolutionParams {
    pub fn new(wave: WaveVector, c1: f64, c2: f64, c3: f64) -> Result<Self> {
        if c3 != 0.0 && wave.k == 0.0 {
            return Err(Error::InvalidParameter(
                "the linear mean-profile branch divides by k; need k != 0 when C3 != 0".into(),
            ));
        }
        Ok(Self { wave, c1, c2, c3 })
    }
}

/// The invariant solution as a beam with quadratic stream-function
/// envelopes and linear mean profiles:
///
/// ```text
/// psi = [C1 cos(wt) + C2 sin(wt)] lambda^2
/// v   = (2 f m / w) [C2 cos(wt) - C1 sin(wt)] lambda + C3 lambda
/// rho = (2 k N^2 / (g w)) [C2 cos(wt) - C1 sin(wt)] lambda - (f m C3 / (g k)) lambda
/// ```
pub fn invariant_solution(
    p: &InvariantSolutionParams,
    params: &PhysicalParams,
) -> Result<BeamSolution> {
    let h_slope = if p.c3 == 0.0 {
        0.0
    } else {
        -params.f * p.wave.m * p.c3 / (params.g * p.wave.k)
    };
    let spec = BeamSpec {
        wave: p.wave,
        a: Envelope::Quadratic(p.c1),
        b: Envelope::Quadratic(p.c2),
        f_mean: Envelope::Linear(p.c3),
        h_mean: Envelope::Linear(h_slope),
    };
    beam_solution(spec, params)
}

/// Residuals of the three model equations at one point from analytic
/// derivatives, with matching magnitude scales (sums of absolute term
/// values).
pub fn pde_residual_at(
    sol: &dyn AnalyticSolution,
    params: &PhysicalParams,
    t: f64,
    x: f64,
    z: f64,
) -> ([f64; 3], [f64; 3]) {
    let p = sol.eval(t, x, z);
    let jac_zeta = p.psi_x * p.lap_psi_z - p.psi_z * p.lap_psi_x;
    let jac_v = p.psi_x * p.v_z - p.psi_z * p.v_x;
    let jac_rho = p.psi_x * p.rho_z - p.psi_z * p.rho_x;

    let r0 = p.lap_psi_t - params.g * p.rho_x - params.f * p.v_z - jac_zeta;
    let r1 = p.v_t + params.f * p.psi_z - jac_v;
    let r2 = p.rho_t + params.n2_over_g() * p.psi_x - jac_rho;

    let s0 = p.lap_psi_t.abs()
        + (params.g * p.rho_x).abs()
        + (params.f * p.v_z).abs()
        + (p.psi_x * p.lap_psi_z).abs()
        + (p.psi_z * p.lap_psi_x).abs();
    let s1 = p.v_t.abs()
        + (params.f * p.psi_z).abs()
        + (p.psi_x * p.v_z).abs()
        + (p.psi_z * p.v_x).abs();
    let s2 = p.rho_t.abs()
        + (params.n2_over_g() * p.psi_x).abs()
        + (p.psi_x * p.rho_z).abs()
        + (p.psi_z * p.rho_x).abs();

    ([r0, r1, r2], [s0, s1, s2])
}

/// Worst scale-normalized residual over `points`.
pub fn max_relative_residual(
    sol: &dyn AnalyticSolution,
    params: &PhysicalParams,
    points: &[(f64, f64, f64)],
) -> f64 {
    let mut worst: f64 = 0.0;
    for &(t, x, z) in points {
        let (res, scale) = pde_residual_at(sol, params, t, x, z);
        for i in 0..3 {
            worst = worst.max(res[i].abs() / scale[i].max(1.0));
        }
    }
    worst
}

/// Sample a closed-form solution onto a grid at time `t`.
pub fn sample_state(sol: &dyn AnalyticSolution, grid: Grid2D, t: f64) -> FieldState {
    let mut v = Vec::with_capacity(grid.len());
    let mut rho = Vec::with_capacity(grid.len());
    let mut psi = Vec::with_capacity(grid.len());
    for ix in 0..grid.nx() {
        let x = grid.x(ix);
        for iz in 0..grid.nz() {
            let p = sol.eval(t, x, grid.z(iz));
            v.push(p.v);
            rho.push(p.rho);
            psi.push(p.psi);
        }
    }
    FieldState {
        t,
        v: crate::grid::ScalarField::from_values(grid, v).expect("sized above"),
        rho: crate::grid::ScalarField::from_values(grid, rho).expect("sized above"),
        psi: crate::grid::ScalarField::from_values(grid, psi).expect("sized above"),
    }
}

/// One sample of the reduced profile amplitudes `(phi, V, R)`.
#[derive(Debug, Clone, Copy)]
pub struct ReducedSample {
    pub t: f64,
    pub phi: f64,
    pub v: f64,
    pub r: f64,
}

/// Closed-form reduced amplitudes at time `t`:
///
/// ```text
/// phi = C1 cos(wt) + C2 sin(wt)
/// V   = (2 f m / w) [C2 cos(wt) - C1 sin(wt)] + C3
/// R   = (2 k N^2 / (g w)) [C2 cos(wt) - C1 sin(wt)] - f m C3 / (g k)
/// ```
pub fn reduced_closed_form(
    p: &InvariantSolutionParams,
    params: &PhysicalParams,
    t: f64,
) -> Result<(f64, f64, f64)> {
    let w = omega(p.wave, params)?;
    if w <= 0.0 {
        return Err(Error::InvalidParameter("zero oscillation frequency".into()));
    }
    let (k, m) = (p.wave.k, p.wave.m);
    let (ct, st) = ((w * t).cos(), (w * t).sin());
    let osc = p.c2 * ct - p.c1 * st;
    let phi = p.c1 * ct + p.c2 * st;
    let v = 2.0 * params.f * m / w * osc + p.c3;
    let r_c3 = if p.c3 == 0.0 {
        0.0
    } else {
        -params.f * m * p.c3 / (params.g * k)
    };
    let r = 2.0 * k * params.n * params.n / (params.g * w) * osc + r_c3;
    Ok((phi, v, r))
}

/// Integrate the reduced amplitude system
///
/// ```text
/// phi' = (g k R + f m V) / (2 (k^2 + m^2))
/// V'   = -2 f m phi
/// R'   = -(2 k / g) N^2 phi
/// ```
///
/// with RK4 at `dt = 1e-3 / omega` from the closed-form initial values,
/// recording every step up to `t_end`. This is the independent check of
/// the closed forms.
pub fn reduced_ode_series(
    p: &InvariantSolutionParams,
    params: &PhysicalParams,
    t_end: f64,
) -> Result<Vec<ReducedSample>> {
    let w = omega(p.wave, params)?;
    if w <= 0.0 {
        return Err(Error::InvalidParameter("zero oscillation frequency".into()));
    }
    let (k, m) = (p.wave.k, p.wave.m);
    let k2m2 = k * k + m * m;
    let deriv = |y: [f64; 3]| -> [f64; 3] {
        let [phi, v, r] = y;
        [
            (params.g * k * r + params.f * m * v) / (2.0 * k2m2),
            -2.0 * params.f * m * phi,
            -2.0 * k / params.g * params.n * params.n * phi,
        ]
    };
    let (phi0, v0, r0) = reduced_closed_form(p, params, 0.0)?;
    let mut y = [phi0, v0, r0];
    let dt = 1e-3 / w;
    let n_steps = (t_end / dt).ceil() as usize;
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut t = 0.0;
    out.push(ReducedSample {
        t,
        phi: y[0],
        v: y[1],
        r: y[2],
    });
    for _ in 0..n_steps {
        let k1 = deriv(y);
        let k2 = deriv(add(y, dt / 2.0, k1));
        let k3 = deriv(add(y, dt / 2.0, k2));
        let k4 = deriv(add(y, dt, k3));
        for i in 0..3 {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += dt;
        out.push(ReducedSample {
            t,
            phi: y[0],
            v: y[1],
            r: y[2],
        });
    }
    Ok(out)
}

fn add(y: [f64; 3], c: f64, d: [f64; 3]) -> [f64; 3] {
    [y[0] + c * d[0], y[1] + c * d[1], y[2] + c * d[2]]
}

//! Circular two-body bound states and the local simultaneous equations.
//!
//! Units: `ħ = 1`, `c = 1`; Planck's constant is `h = 2π` wherever it
//! appears literally.
//!
//! [`BohrState`] stores real magnitudes with the physical sign convention:
//! an attractive pair has `e f < 0`, the potential on the roundel boundary is
//! the Coulomb value `A = f / R` and the potential energy is `e A < 0`. The
//! imaginary ("tilde") forms are reconstructed on demand with the uniform
//! rule `x~ = x / i`.
//!
//! [`local_solve_rho`] works in the local variables `A = i A~`, `ρ = i ρ~`,
//! for which the charge at the centre has the opposite sign to `A`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Biquaternion, CI};
use crate::error::{Error, Result};

/// Parameters of one two-body interaction.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BohrInput {
    /// Charge of the orbiting particle.
    pub e: f64,
    /// Charge of the central particle.
    pub f: f64,
    /// Principal quantum number, `n >= 1`.
    pub n: u32,
    /// Rest mass of the orbiting particle (inverse length).
    pub m: f64,
    /// Accept `e f > 0`. The orbit equations are then solved on `|e f|`
    /// without any claim that the configuration is bound.
    #[serde(default)]
    pub allow_repulsive: bool,
}

impl BohrInput {
    pub fn new(e: f64, f: f64, n: u32, m: f64) -> Self {
        Self {
            e,
            f,
            n,
            m,
            allow_repulsive: false,
        }
    }

    pub fn coupling(&self) -> f64 {
        self.e * self.f
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e.is_finite() && self.f.is_finite() && self.m.is_finite()) {
            return Err(Error::InvalidInput("charges and mass must be finite".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidInput("quantum number n must be >= 1".into()));
        }
        if self.m <= 0.0 {
            return Err(Error::NonPositiveMass(self.m));
        }
        let ef = self.coupling();
        if ef == 0.0 {
            return Err(Error::InvalidInput(
                "zero coupling has no bound orbit (R is infinite)".into(),
            ));
        }
        if ef.abs() >= self.n as f64 {
            return Err(Error::SupercriticalCoupling {
                coupling: ef.abs(),
                n: self.n,
            });
        }
        if ef > 0.0 && !self.allow_repulsive {
            return Err(Error::NotAttractive { e: self.e, f: self.f });
        }
        Ok(())
    }
}

/// Solved circular orbit.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BohrState {
    pub input: BohrInput,
    /// Orbital speed as a fraction of `c`.
    pub v: f64,
    /// Bohr radius.
    pub radius: f64,
    /// Wave number `μ` along the arc.
    pub mu: f64,
    /// Total frequency (kinetic plus potential).
    pub nu: f64,
    /// Kinetic frequency `γ m`.
    pub eta: f64,
    /// Coulomb potential `f / R` on the roundel boundary.
    pub potential: f64,
    /// Total energy; equal to `nu` with `ħ = 1`.
    pub energy: f64,
}

impl BohrState {
    pub fn lorentz_factor(&self) -> f64 {
        1.0 / (1.0 - self.v * self.v).sqrt()
    }

    /// `m~ = m / i`.
    pub fn mass_tilde(&self) -> Complex64 {
        tilde(self.input.m)
    }

    /// `ν~ = ν / i`.
    pub fn nu_tilde(&self) -> Complex64 {
        tilde(self.nu)
    }

    /// `A~ = A / i`.
    pub fn potential_tilde(&self) -> Complex64 {
        tilde(self.potential)
    }

    /// Relative residual of `m~² = (ν~ − e A~)² + μ²`.
    pub fn mass_shell_residual(&self) -> f64 {
        let m2 = self.mass_tilde() * self.mass_tilde();
        let k = self.nu_tilde() - self.potential_tilde() * self.input.e;
        let rhs = k * k + self.mu * self.mu;
        (m2 - rhs).norm() / m2.norm()
    }

    /// Relative residual of `μ R = n`.
    pub fn quantization_residual(&self) -> f64 {
        let n = self.input.n as f64;
        (self.mu * self.radius - n).abs() / n
    }

    /// Relative residual of `E = m √(1 − (e f / n)²)`.
    pub fn energy_identity_residual(&self) -> f64 {
        let x = self.input.coupling() / self.input.n as f64;
        let closed = self.input.m * (1.0 - x * x).sqrt();
        (self.energy - closed).abs() / closed
    }

    /// `E − m`, evaluated without cancellation for attractive pairs.
    pub fn binding_energy(&self) -> f64 {
        if self.input.coupling() < 0.0 {
            let v2 = self.v * self.v;
            -self.input.m * v2 / (1.0 + (1.0 - v2).sqrt())
        } else {
            self.energy - self.input.m
        }
    }

    /// Period of one orbit in the rest frame of the central charge.
    pub fn period(&self) -> f64 {
        2.0 * PI * self.radius / self.v
    }
}

#[inline]
fn tilde(x: f64) -> Complex64 {
    Complex64::new(x, 0.0) / CI
}

/// Solves the two orbit equations (force balance and angular-momentum
/// quantisation) for the given charges, quantum number and mass.
pub fn solve_bohr(input: &BohrInput) -> Result<BohrState> {
    input.validate()?;
    let n = input.n as f64;
    let ef = input.coupling();
    let v = ef.abs() / n;
    let root = (1.0 - v * v).sqrt();
    let gamma = 1.0 / root;
    let radius = n * n * root / (input.m * ef.abs());
    let mu = input.m * v * gamma;
    let eta = input.m * gamma;
    let potential = input.f / radius;
    let nu = eta + input.e * potential;
    Ok(BohrState {
        input: *input,
        v,
        radius,
        mu,
        nu,
        eta,
        potential,
        energy: nu,
    })
}

/// Total energy as kinetic (`γ m`) plus potential (`e A`) energy.
pub fn total_energy(state: &BohrState) -> f64 {
    state.eta + state.input.e * state.potential
}

/// One bispinor sample of the closed-form orbit solution.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct WaveSample {
    pub phi1: Biquaternion,
    pub phi2: Biquaternion,
    /// `(x0, s)` in the M-space chart.
    pub at: (f64, f64),
}

/// Assembles `φ1 = exp{i(ν~ x0~ + μ s)}` and
/// `φ2 = i{ν~ − i_s μ − e A~} M⁻¹ φ1` with `M = m~`, using `i1` as `i_s`.
pub fn assemble_wavefunction(state: &BohrState, x0: f64, s: f64) -> WaveSample {
    assemble_wavefunction_along(state, x0, s, Biquaternion::I1)
}

/// As [`assemble_wavefunction`] with an explicit unit quaternion for the arc
/// direction.
pub fn assemble_wavefunction_along(
    state: &BohrState,
    x0: f64,
    s: f64,
    arc_unit: Biquaternion,
) -> WaveSample {
    // ν~ x0~ = (ν / i)(x0 / i) = −ν x0
    let phase = Complex64::new(0.0, -state.nu * x0 + state.mu * s).exp();
    let phi1 = Biquaternion::scalar(phase);
    let kinetic = state.nu_tilde() - state.potential_tilde() * state.input.e;
    let bracket = Biquaternion::scalar(kinetic) - arc_unit * state.mu;
    let inv_mass = state.mass_tilde().inv();
    let phi2 = bracket * (CI * inv_mass) * phi1;
    WaveSample {
        phi1,
        phi2,
        at: (x0, s),
    }
}

/// Root chosen when solving the local equations.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    PositiveRoot,
    NegativeRoot,
    /// `A = 0`: the density is zero and neither radius nor charge is defined.
    Degenerate,
}

/// Solution of the local equations at one point.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalSolveResult {
    pub rho: f64,
    pub potential: f64,
    pub radius: Option<f64>,
    pub charge: Option<f64>,
    pub branch: Branch,
    /// `d = 3π / (n² h²) = 3 / (4π n²)`.
    pub d: f64,
    pub e: f64,
    pub m: f64,
}

impl LocalSolveResult {
    pub fn is_degenerate(&self) -> bool {
        self.branch == Branch::Degenerate
    }

    /// Relative residual of `ρ² / (d e²) − A³ ρ − m² d A⁴ = 0`.
    pub fn residual(&self) -> f64 {
        quadratic_residual(self.rho, self.potential, self.e, self.m, self.d)
    }
}

/// `d` of the local equations for quantum number `n` (with `h = 2π`).
pub fn local_constant(n: u32) -> f64 {
    let h = 2.0 * PI;
    let n = n as f64;
    3.0 * PI / (n * n * h * h)
}

/// Relative residual of the local quadratic in `ρ`, scaled by its largest
/// term.
pub fn quadratic_residual(rho: f64, a: f64, e: f64, m: f64, d: f64) -> f64 {
    let t1 = rho * rho / (d * e * e);
    let t2 = a * a * a * rho;
    let t3 = m * m * d * a.powi(4);
    let scale = t1.abs().max(t2.abs()).max(t3.abs());
    if scale == 0.0 {
        return 0.0;
    }
    (t1 - t2 - t3).abs() / scale
}

/// Solves the local equations for `ρ` given the potential `A`, picking the
/// root with `sign(ρ) = sign(A)`, then recovers the radius and the central
/// charge.
pub fn local_solve_rho(a: f64, e: f64, m: f64, n: u32) -> Result<LocalSolveResult> {
    if !(a.is_finite() && e.is_finite() && m.is_finite()) {
        return Err(Error::InvalidInput("local solve inputs must be finite".into()));
    }
    if e == 0.0 {
        return Err(Error::InvalidInput("charge e must be non-zero".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("quantum number n must be >= 1".into()));
    }
    let d = local_constant(n);
    if a == 0.0 {
        return Ok(LocalSolveResult {
            rho: 0.0,
            potential: 0.0,
            radius: None,
            charge: None,
            branch: Branch::Degenerate,
            d,
            e,
            m,
        });
    }
    let disc = (a * a + 4.0 * m * m / (e * e)).sqrt();
    let (bracket, branch) = if a > 0.0 {
        (a + disc, Branch::PositiveRoot)
    } else {
        (a - disc, Branch::NegativeRoot)
    };
    let rho = 0.5 * a * a * e * e * d * bracket;
    let radius = (3.0 * a / (4.0 * PI * rho)).sqrt();
    let charge = -a * radius;
    Ok(LocalSolveResult {
        rho,
        potential: a,
        radius: Some(radius),
        charge: Some(charge),
        branch,
        d,
        e,
        m,
    })
}

/// Solves the orbit, derives the local `(A, ρ)` at the centre, re-solves the
/// local equations and returns the largest relative deviation of the
/// recovered radius, charge and density from the originals.
pub fn roundtrip_consistency(input: &BohrInput) -> Result<f64> {
    let state = solve_bohr(input)?;
    let r = state.radius;
    let f = input.f;
    // local variables: A = −f/R, A = 4π R² ρ / 3
    let a = -f / r;
    let rho = 3.0 * a / (4.0 * PI * r * r);
    let local = local_solve_rho(a, input.e, input.m, input.n)?;
    let r2 = local.radius.expect("non-zero potential has a radius");
    let f2 = local.charge.expect("non-zero potential has a charge");
    let dev = [
        (r2 - r).abs() / r,
        (f2 - f).abs() / f.abs(),
        (local.rho - rho).abs() / rho.abs(),
    ];
    Ok(dev.into_iter().fold(0.0, f64::max))
}

/// Flips the sign of the orbiting charge.
pub fn charge_conjugate(input: &BohrInput) -> BohrInput {
    BohrInput {
        e: -input.e,
        ..*input
    }
}

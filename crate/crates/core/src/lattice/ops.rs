//! Discrete differentials and the lattice photon and Dirac equations.

use serde::Serialize;

use super::{BiquaternionField, FieldValue, HypercubicLattice, LatticeField, Site, SpinorField};
use crate::algebra::{reflector_mul, Biquaternion, DiagonalMatrix, LorentzTransform, VersatileMatrix, CI};
use crate::bohr::{assemble_wavefunction, BohrState};
use crate::error::{Error, Result};

/// Stencil used for first derivatives.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub enum DifferenceMode {
    /// `(A_k − A_{k−μ}) / 2h`.
    #[default]
    Backward,
    /// `(A_{k+μ} − A_{k−μ}) / 4h`; for convergence studies only.
    Central,
}

/// The units `i_μ` multiplying `∂/∂x_μ` in `D`.
///
/// The standard basis is `(i, i1, i2, i3)`: the complex unit on the time
/// axis absorbs `∂/∂x0~ = i ∂/∂x0`, so that `D D‡ = −∂0² + ∇²`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct DiracBasis(pub [Biquaternion; 4]);

impl DiracBasis {
    pub fn standard() -> Self {
        DiracBasis([
            Biquaternion::scalar(CI),
            Biquaternion::I1,
            Biquaternion::I2,
            Biquaternion::I3,
        ])
    }

    /// Basis of the transformed frame, `i'_μ = Z i_μ Z‡`.
    pub fn transformed(&self, z: &LorentzTransform) -> Self {
        DiracBasis(self.0.map(|b| z.apply_similarity(&b)))
    }

    /// Basis of `D‡`.
    pub fn quat_conj(&self) -> Self {
        DiracBasis(self.0.map(|b| b.quat_conj()))
    }
}

impl Default for DiracBasis {
    fn default() -> Self {
        Self::standard()
    }
}

fn boundary(site: &Site, axis: usize) -> Error {
    Error::BoundarySite { site: *site, axis }
}

fn step(l: &HypercubicLattice, site: &Site, mu: usize, dir: isize) -> Result<Site> {
    l.neighbor(site, mu, dir).ok_or_else(|| boundary(site, mu))
}

fn partial_of<T: FieldValue>(
    field: &LatticeField<T>,
    site: &Site,
    mu: usize,
    mode: DifferenceMode,
    get: impl Fn(&T) -> Biquaternion,
) -> Result<Biquaternion> {
    let l = &field.lattice;
    let h = l.spacing;
    let back = step(l, site, mu, -1)?;
    match mode {
        DifferenceMode::Backward => Ok((get(&field.at(site)) - get(&field.at(&back))) * (0.5 / h)),
        DifferenceMode::Central => {
            let fwd = step(l, site, mu, 1)?;
            Ok((get(&field.at(&fwd)) - get(&field.at(&back))) * (0.25 / h))
        }
    }
}

/// Discrete `∂A/∂x_μ` at a site.
pub fn discrete_partial(
    field: &BiquaternionField,
    site: &Site,
    mu: usize,
    mode: DifferenceMode,
) -> Result<Biquaternion> {
    partial_of(field, site, mu, mode, |q| *q)
}

/// Forward difference `(A_{k+μ} − A_k) / 2h`, the partner of the backward
/// difference in the second-order stencil.
pub fn forward_partial(field: &BiquaternionField, site: &Site, mu: usize) -> Result<Biquaternion> {
    let fwd = step(&field.lattice, site, mu, 1)?;
    Ok((field.at(&fwd) - field.at(site)) * (0.5 / field.lattice.spacing))
}

fn dirac_of<T: FieldValue>(
    field: &LatticeField<T>,
    site: &Site,
    basis: &DiracBasis,
    mode: DifferenceMode,
    get: impl Fn(&T) -> Biquaternion + Copy,
) -> Result<Biquaternion> {
    let mut acc = Biquaternion::ZERO;
    for (mu, b) in basis.0.iter().enumerate() {
        acc += *b * partial_of(field, site, mu, mode, get)?;
    }
    Ok(acc)
}

/// `Σ_μ i_μ ∂_μ A` at a site.
pub fn discrete_dirac_apply(
    field: &BiquaternionField,
    site: &Site,
    basis: &DiracBasis,
    mode: DifferenceMode,
) -> Result<Biquaternion> {
    dirac_of(field, site, basis, mode, |q| *q)
}

fn second_difference_of<T: FieldValue>(
    field: &LatticeField<T>,
    site: &Site,
    basis: &DiracBasis,
    get: impl Fn(&T) -> Biquaternion,
    conj_first: bool,
) -> Result<Biquaternion> {
    let l = &field.lattice;
    let inv = 0.25 / (l.spacing * l.spacing);
    let here = get(&field.at(site));
    let mut acc = Biquaternion::ZERO;
    for (mu, b) in basis.0.iter().enumerate() {
        let fwd = get(&field.at(&step(l, site, mu, 1)?));
        let back = get(&field.at(&step(l, site, mu, -1)?));
        let coeff = if conj_first { b.quat_conj() * *b } else { *b * b.quat_conj() };
        acc += coeff * ((fwd - here * 2.0 + back) * inv);
    }
    Ok(acc)
}

/// `D D‡ A` at a site, with `D‡` as a forward and `D` as a backward
/// difference along each axis. Per axis this is the three-point second
/// difference, exact on quadratics.
pub fn photon_apply(field: &BiquaternionField, site: &Site, basis: &DiracBasis) -> Result<Biquaternion> {
    second_difference_of(field, site, basis, |q| *q, false)
}

fn same_lattice(a: &HypercubicLattice, b: &HypercubicLattice) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::InvalidInput("fields live on different lattices".into()))
    }
}

/// `D D‡ A − J` at interior sites, zero elsewhere.
pub fn photon_residual_field(
    a: &BiquaternionField,
    j: &BiquaternionField,
    basis: &DiracBasis,
) -> Result<BiquaternionField> {
    same_lattice(&a.lattice, &j.lattice)?;
    let l = a.lattice;
    let mut values = vec![Biquaternion::ZERO; l.site_count()];
    for s in l.interior_sites() {
        values[l.index(&s)] = photon_apply(a, &s, basis)? - j.at(&s);
    }
    LatticeField::from_values(l, values)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct PhotonResidual {
    /// `max |D̲ D̲ A̲ − J̲|` with `A̲ = X(A, A‡)`, `J̲ = X(J, J‡)`.
    pub versatile: f64,
    /// `max |D D‡ A_μ − J_μ|` over coefficients.
    pub componentwise: f64,
    pub interior_sites: usize,
}

/// Interior maxima of the lattice photon equation.
pub fn photon_residual(
    a: &BiquaternionField,
    j: &BiquaternionField,
    basis: &DiracBasis,
) -> Result<PhotonResidual> {
    same_lattice(&a.lattice, &j.lattice)?;
    let mut out = PhotonResidual {
        versatile: 0.0,
        componentwise: 0.0,
        interior_sites: 0,
    };
    for s in a.lattice.interior_sites() {
        let upper = photon_apply(a, &s, basis)? - j.at(&s);
        // lower entry of D̲ D̲ A̲: D‡ D A‡
        let lower = second_difference_of(a, &s, basis, |q| q.quat_conj(), true)? - j.at(&s).quat_conj();
        out.versatile = out.versatile.max(VersatileMatrix::new(upper, lower).norm());
        for c in upper.coeffs() {
            out.componentwise = out.componentwise.max(c.norm());
        }
        out.interior_sites += 1;
    }
    Ok(out)
}

/// Sitewise residual of `(D̲ − i e A̲~) Φ̲ − Φ̲ M̲~` with `Φ̲ = X(φ1, φ2)`,
/// `M̲~ = X(M, −M‡)` and `A~ = A / i`. The two diagonal entries are stored
/// as `upper` and `lower`; boundary sites hold zero.
pub fn dirac_residual_field(
    phi: &SpinorField,
    a: &BiquaternionField,
    e: f64,
    mass: Biquaternion,
    basis: &DiracBasis,
    mode: DifferenceMode,
) -> Result<SpinorField> {
    same_lattice(&phi.lattice, &a.lattice)?;
    let l = phi.lattice;
    let conj = basis.quat_conj();
    let mass_matrix = VersatileMatrix::mass(mass);
    let mut values = vec![VersatileMatrix::ZERO; l.site_count()];
    for s in l.interior_sites() {
        let p = phi.at(&s);
        // −i e A~ = −e A
        let pot = a.at(&s) * (-e);
        let top = dirac_of(phi, &s, basis, mode, |v| v.lower)? + pot * p.lower;
        let bottom = dirac_of(phi, &s, &conj, mode, |v| v.upper)? + pot.quat_conj() * p.upper;
        let lhs = DiagonalMatrix::new(top, bottom);
        let r = lhs - reflector_mul(&p, &mass_matrix);
        values[l.index(&s)] = VersatileMatrix::new(r.first, r.second);
    }
    LatticeField::from_values(l, values)
}

/// Interior maximum of the lattice Dirac residual.
pub fn dirac_residual(
    phi: &SpinorField,
    a: &BiquaternionField,
    e: f64,
    mass: Biquaternion,
    basis: &DiracBasis,
    mode: DifferenceMode,
) -> Result<f64> {
    Ok(dirac_residual_field(phi, a, e, mass, basis, mode)?.max_norm())
}

/// `Φ(φ1, φ2) → Φ(φ2*, −φ1*)`, the partner solution for `e → −e`.
pub fn charge_conjugate_field(phi: &SpinorField) -> SpinorField {
    phi.map(|_, v| VersatileMatrix::new(v.lower.complex_conj(), -v.upper.complex_conj()))
}

/// Closed-form orbit wave function and its constant boundary potential on
/// a lattice of the M-space chart with axes `(x0, s, r, x3)`. Each time
/// slice carries the phase of its own `x0`.
pub fn bohr_field(state: &BohrState, lattice: HypercubicLattice) -> Result<(SpinorField, BiquaternionField)> {
    let phi = LatticeField::from_fn(lattice, |_, x| {
        let w = assemble_wavefunction(state, x[0], x[1]);
        VersatileMatrix::new(w.phi1, w.phi2)
    })?;
    let a = LatticeField::constant(lattice, Biquaternion::real(state.potential, 0.0, 0.0, 0.0))?;
    Ok((phi, a))
}

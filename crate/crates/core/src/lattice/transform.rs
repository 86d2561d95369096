//! The correspondence `Ẑ` between `L_k` and `L′` and the transformation of
//! lattice quantities.

use serde::Serialize;

use super::ops::{photon_residual_field, DiracBasis};
use super::{BiquaternionField, Frame, HypercubicLattice, Site};
use crate::algebra::{Biquaternion, LorentzTransform};
use crate::error::{Error, Result};

/// Quantity being carried from `L_k` to `L′`; fixes the power of `R_k / a`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FieldKind {
    Current,
    Potential,
    Derivative,
    Operator,
}

impl FieldKind {
    pub fn exponent(&self) -> i32 {
        match self {
            FieldKind::Current => 3,
            FieldKind::Potential => 1,
            FieldKind::Derivative => 2,
            FieldKind::Operator => 1,
        }
    }
}

impl std::str::FromStr for FieldKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "current" => Ok(FieldKind::Current),
            "potential" => Ok(FieldKind::Potential),
            "derivative" => Ok(FieldKind::Derivative),
            "operator" => Ok(FieldKind::Operator),
            other => Err(format!("unknown field kind `{other}`")),
        }
    }
}

/// One region `j`: the chosen roundel, its compromise lattice and the
/// image of its centre and neighbours in the snapshot lattice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionBinding {
    pub region: usize,
    /// Centre `k` of the chosen roundel (compromise coordinates).
    pub center: [f64; 4],
    pub radius: f64,
    /// Half-interval of `L′`.
    pub a: f64,
    #[serde(skip)]
    pub z: LorentzTransform,
    pub center_site: Site,
    /// `k^{±μ}` as `(axis, step, site)`.
    pub neighbors: Vec<(usize, isize, Site)>,
    /// `k′` (snapshot coordinates).
    pub center_mapped: [f64; 4],
    /// `Ẑ(k^{±μ})` in the order of `neighbors`.
    pub neighbors_mapped: Vec<[f64; 4]>,
    pub compromise: HypercubicLattice,
    pub snapshot: HypercubicLattice,
}

impl RegionBinding {
    /// `R_k / a`.
    pub fn ratio(&self) -> f64 {
        self.radius / self.a
    }

    /// `Ẑ(x) = k′ + (a / R_k) Z(x − k)`.
    pub fn zhat(&self, x: [f64; 4]) -> [f64; 4] {
        let d = [
            x[0] - self.center[0],
            x[1] - self.center[1],
            x[2] - self.center[2],
            x[3] - self.center[3],
        ];
        let t = self.z.apply_four_vector(d);
        let s = self.a / self.radius;
        [
            self.center_mapped[0] + s * t[0],
            self.center_mapped[1] + s * t[1],
            self.center_mapped[2] + s * t[2],
            self.center_mapped[3] + s * t[3],
        ]
    }

    /// Every neighbour of `k` lies in the region block.
    pub fn neighbors_in_region(&self) -> bool {
        self.neighbors.len() == 8 && self.neighbors.iter().all(|(_, _, s)| self.compromise.contains(s))
    }
}

/// Builds `L′` (half-interval `a`) and `L_k` (half-interval `R_k`) of the same
/// extent with the chosen roundel at the central site, `k` at the origin of
/// the compromise frame and `k′` at the origin of the snapshot frame.
pub fn build_lattices(
    a: f64,
    radius: f64,
    extent: [usize; 4],
    z: LorentzTransform,
) -> Result<(HypercubicLattice, HypercubicLattice, RegionBinding)> {
    build_lattices_at(a, radius, extent, z, 0, [0.0; 4], [0.0; 4])
}

/// As [`build_lattices`] with explicit region id, `k` and `k′`.
pub fn build_lattices_at(
    a: f64,
    radius: f64,
    extent: [usize; 4],
    z: LorentzTransform,
    region: usize,
    center: [f64; 4],
    center_mapped: [f64; 4],
) -> Result<(HypercubicLattice, HypercubicLattice, RegionBinding)> {
    if !(a > 0.0 && radius > 0.0 && a.is_finite() && radius.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "spacings must be positive, got a = {a}, R_k = {radius}"
        )));
    }
    let center_site = extent.map(|n| n / 2);
    let origin = |c: [f64; 4], h: f64| {
        let mut o = c;
        for (x, &i) in o.iter_mut().zip(&center_site) {
            *x -= 2.0 * h * i as f64;
        }
        o
    };
    let compromise = HypercubicLattice::new(radius, extent, origin(center, radius), Frame::Compromise { z, radius })?;
    let snapshot = HypercubicLattice::new(a, extent, origin(center_mapped, a), Frame::Snapshot)?;
    let mut neighbors = Vec::with_capacity(8);
    for mu in 0..4 {
        for step in [-1, 1] {
            let s = compromise
                .neighbor(&center_site, mu, step)
                .ok_or(Error::BoundarySite { site: center_site, axis: mu })?;
            neighbors.push((mu, step, s));
        }
    }
    let mut binding = RegionBinding {
        region,
        center,
        radius,
        a,
        z,
        center_site,
        neighbors,
        center_mapped,
        neighbors_mapped: Vec::new(),
        compromise,
        snapshot,
    };
    binding.neighbors_mapped = binding
        .neighbors
        .iter()
        .map(|(_, _, s)| binding.zhat(compromise.position(s)))
        .collect();
    Ok((snapshot, compromise, binding))
}

/// `(R_k / a)^p` times `Z` acting on one value: the similarity action for
/// operator bases, the sandwich action otherwise.
pub fn transform_value(kind: FieldKind, q: &Biquaternion, binding: &RegionBinding) -> Biquaternion {
    let moved = match kind {
        FieldKind::Operator => binding.z.apply_similarity(q),
        _ => binding.z.apply(q),
    };
    moved * binding.ratio().powi(kind.exponent())
}

/// Carries an `L_k` field to the corresponding sites of `L′`.
pub fn transform_field(kind: FieldKind, field: &BiquaternionField, binding: &RegionBinding) -> Result<BiquaternionField> {
    if field.lattice.extent != binding.compromise.extent {
        return Err(Error::InvalidInput("field does not live on the compromise lattice".into()));
    }
    field
        .map(|_, v| transform_value(kind, &v, binding))
        .relabel(binding.snapshot)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// Interior maximum of `D D‡ A_k − J_k` on `L_k`.
    pub compromise_residual: f64,
    /// Interior maximum of `D′ D′‡ A′ − J′` on `L′`.
    pub snapshot_residual: f64,
    /// `max |r′ − (R_k/a)³ Z(r_k)|`, relative to the largest source or
    /// residual magnitude on `L′`.
    pub covariance_residual: f64,
    pub scale: f64,
}

/// Transforms `A_k` and `J_k` to `L′`, evaluates the photon equation there
/// with the transformed operator and compares its residual with the
/// transformed `L_k` residual site by site.
pub fn equivalence_check(
    binding: &RegionBinding,
    a_k: &BiquaternionField,
    j_k: &BiquaternionField,
) -> Result<EquivalenceReport> {
    let basis = DiracBasis::standard();
    let r_k = photon_residual_field(a_k, j_k, &basis)?;
    let a_p = transform_field(FieldKind::Potential, a_k, binding)?;
    let j_p = transform_field(FieldKind::Current, j_k, binding)?;
    let r_p = photon_residual_field(&a_p, &j_p, &basis.transformed(&binding.z))?;
    let expected = transform_field(FieldKind::Current, &r_k, binding)?;
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for s in binding.snapshot.interior_sites() {
        diff = diff.max(r_p.at(&s).max_abs_diff(&expected.at(&s)));
        scale = scale.max(j_p.at(&s).norm()).max(expected.at(&s).norm());
    }
    let scale = if scale > 0.0 { scale } else { 1.0 };
    Ok(EquivalenceReport {
        compromise_residual: r_k.max_norm(),
        snapshot_residual: r_p.max_norm(),
        covariance_residual: diff / scale,
        scale,
    })
}

/// Field equal to `field` except at one site, where `delta` is added.
pub fn perturb(field: &BiquaternionField, site: &Site, delta: Biquaternion) -> BiquaternionField {
    let mut out = field.clone();
    out.set(site, field.at(site) + delta);
    out
}

//! Hypercubic lattices in the compromise frame (`L_k`, half-interval `R_k`)
//! and the snapshot frame (`L′`, half-interval `a`), discrete differentials,
//! the lattice photon and Dirac equations, the `Ẑ` correspondence and the
//! small-spacing limit.
//!
//! Axis 0 is time. Sites are indexed by quadruples; the position of site
//! `k` is `origin + 2 · spacing · k`.

mod io;
mod limit;
mod ops;
mod transform;

pub use io::{read_field, write_field, FieldText};
pub use limit::{
    convergence_order, limit_sweep, renormalize_mass, ConvergenceOrder, LimitSweep, LimitSweepRow,
    MassTerm, CUBE_SPHERE_FACTOR,
};
pub use ops::{
    bohr_field, charge_conjugate_field, dirac_residual, dirac_residual_field, discrete_dirac_apply,
    discrete_partial, forward_partial, photon_apply, photon_residual, photon_residual_field,
    DiracBasis, DifferenceMode, PhotonResidual,
};
pub use transform::{
    build_lattices, build_lattices_at, equivalence_check, perturb, transform_field, transform_value, EquivalenceReport, FieldKind,
    RegionBinding,
};

use serde::Serialize;

use crate::algebra::{Biquaternion, LorentzTransform, VersatileMatrix};
use crate::error::{Error, Result};

/// Frame a lattice is laid out in.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub enum Frame {
    Snapshot,
    /// Rest frame of the chosen roundel of radius `radius`, related to the
    /// snapshot frame by `z`.
    Compromise {
        #[serde(skip)]
        z: LorentzTransform,
        radius: f64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct HypercubicLattice {
    /// Half the separation of neighbouring sites.
    pub spacing: f64,
    pub extent: [usize; 4],
    pub origin: [f64; 4],
    pub frame: Frame,
}

pub type Site = [usize; 4];

impl HypercubicLattice {
    pub fn new(spacing: f64, extent: [usize; 4], origin: [f64; 4], frame: Frame) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidInput(format!("spacing must be positive, got {spacing}")));
        }
        if extent.iter().any(|&n| n < 3) {
            return Err(Error::InvalidInput(format!(
                "extent must be at least 3 on every axis, got {extent:?}"
            )));
        }
        if origin.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("origin must be finite".into()));
        }
        Ok(Self {
            spacing,
            extent,
            origin,
            frame,
        })
    }

    pub fn site_count(&self) -> usize {
        self.extent.iter().product()
    }

    pub fn contains(&self, site: &Site) -> bool {
        site.iter().zip(&self.extent).all(|(i, n)| i < n)
    }

    pub fn index(&self, site: &Site) -> usize {
        debug_assert!(self.contains(site));
        let e = &self.extent;
        ((site[0] * e[1] + site[1]) * e[2] + site[2]) * e[3] + site[3]
    }

    pub fn site(&self, mut index: usize) -> Site {
        let e = &self.extent;
        let mut s = [0; 4];
        for a in (0..4).rev() {
            s[a] = index % e[a];
            index /= e[a];
        }
        s
    }

    pub fn position(&self, site: &Site) -> [f64; 4] {
        let mut p = self.origin;
        for (x, &i) in p.iter_mut().zip(site) {
            *x += 2.0 * self.spacing * i as f64;
        }
        p
    }

    /// Neighbour one step along `mu` in direction `step` (`±1`).
    pub fn neighbor(&self, site: &Site, mu: usize, step: isize) -> Option<Site> {
        let i = site[mu] as isize + step;
        if i < 0 || i as usize >= self.extent[mu] {
            return None;
        }
        let mut s = *site;
        s[mu] = i as usize;
        Some(s)
    }

    /// Both neighbours exist along every axis.
    pub fn is_interior(&self, site: &Site) -> bool {
        site.iter().zip(&self.extent).all(|(&i, &n)| i >= 1 && i + 1 < n)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.site_count()).map(|i| self.site(i))
    }

    pub fn interior_sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.sites().filter(|s| self.is_interior(s))
    }

    /// Same geometry with another spacing (positions rescale about the
    /// origin).
    pub fn with_spacing(&self, spacing: f64) -> Result<Self> {
        Self::new(spacing, self.extent, self.origin, self.frame)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.extent == other.extent
            && self.spacing == other.spacing
            && self.origin == other.origin
    }
}

/// Values a lattice field may carry.
pub trait FieldValue: Copy {
    fn value_norm(&self) -> f64;
    fn value_is_finite(&self) -> bool;
}

impl FieldValue for Biquaternion {
    fn value_norm(&self) -> f64 {
        self.norm()
    }
    fn value_is_finite(&self) -> bool {
        self.is_finite()
    }
}

impl FieldValue for VersatileMatrix {
    fn value_norm(&self) -> f64 {
        self.norm()
    }
    fn value_is_finite(&self) -> bool {
        self.is_finite()
    }
}

/// A value at every site of a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField<T> {
    pub lattice: HypercubicLattice,
    values: Vec<T>,
}

impl<T: FieldValue> LatticeField<T> {
    /// Fails if any value is not finite.
    pub fn from_values(lattice: HypercubicLattice, values: Vec<T>) -> Result<Self> {
        if values.len() != lattice.site_count() {
            return Err(Error::InvalidInput(format!(
                "field has {} values for {} sites",
                values.len(),
                lattice.site_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.value_is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite field value at site {:?}",
                lattice.site(i)
            )));
        }
        Ok(Self { lattice, values })
    }

    /// Samples `f(site, position)` at every site.
    pub fn from_fn(lattice: HypercubicLattice, f: impl Fn(Site, [f64; 4]) -> T) -> Result<Self> {
        let values = lattice.sites().map(|s| f(s, lattice.position(&s))).collect();
        Self::from_values(lattice, values)
    }

    pub fn constant(lattice: HypercubicLattice, v: T) -> Result<Self> {
        Self::from_values(lattice, vec![v; lattice.site_count()])
    }

    #[inline]
    pub fn at(&self, site: &Site) -> T {
        self.values[self.lattice.index(site)]
    }

    pub fn set(&mut self, site: &Site, v: T) {
        let i = self.lattice.index(site);
        self.values[i] = v;
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn map<U: FieldValue>(&self, f: impl Fn(Site, T) -> U) -> LatticeField<U> {
        LatticeField {
            lattice: self.lattice,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| f(self.lattice.site(i), *v))
                .collect(),
        }
    }

    /// Same values on a different lattice of identical extent.
    pub fn relabel(&self, lattice: HypercubicLattice) -> Result<Self> {
        if lattice.extent != self.lattice.extent {
            return Err(Error::InvalidInput("relabel needs identical extents".into()));
        }
        Ok(Self {
            lattice,
            values: self.values.clone(),
        })
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.value_norm()).fold(0.0, f64::max)
    }
}

pub type BiquaternionField = LatticeField<Biquaternion>;
/// Wave function `Φ(φ1, φ2)` stored as `X(φ1, φ2)`.
pub type SpinorField = LatticeField<VersatileMatrix>;

//! Coordinate bijection between spacetime `L` and the arc chart `M`, and
//! roundel boundary sampling.
//!
//! Both charts share `x0`, `r`, `θ` and `x3`. In `L` the arc belonging to
//! `θ` is `s' = r θ`; in `M` it is `s = R θ` for the fixed curve parameter
//! `R`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::LorentzTransform;

fn normalize_angle(theta: f64) -> (f64, i64) {
    let turns = (theta / TAU).floor();
    let mut t = theta - turns * TAU;
    let mut k = turns as i64;
    if t >= TAU {
        t -= TAU;
        k += 1;
    }
    if t < 0.0 {
        t += TAU;
        k -= 1;
    }
    // a value within rounding of TAU folds onto 0
    if t >= TAU {
        t = 0.0;
        k += 1;
    }
    (t, k)
}

/// Polar point of `L`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LPoint {
    pub x0: f64,
    pub r: f64,
    /// Angle in `[0, 2π)`.
    pub theta: f64,
    pub x3: f64,
}

impl LPoint {
    /// Normalises `theta` into `[0, 2π)`. Panics on negative `r`.
    pub fn new(x0: f64, r: f64, theta: f64, x3: f64) -> Self {
        assert!(r >= 0.0, "radial coordinate must be non-negative, got {r}");
        Self {
            x0,
            r,
            theta: normalize_angle(theta).0,
            x3,
        }
    }

    pub fn from_cartesian(x0: f64, p: [f64; 3]) -> Self {
        let r = p[0].hypot(p[1]);
        let theta = if r == 0.0 { 0.0 } else { p[1].atan2(p[0]) };
        Self::new(x0, r, theta, p[2])
    }

    pub fn to_cartesian(&self) -> [f64; 3] {
        let (s, c) = self.theta.sin_cos();
        [self.r * c, self.r * s, self.x3]
    }

    /// Arc length `s' = r θ` in `L`.
    pub fn arc(&self) -> f64 {
        self.r * self.theta
    }
}

/// Point of `M`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MPoint {
    pub x0: f64,
    /// Arc coordinate, `s / R` in `[0, 2π)`.
    pub s: f64,
    pub r: f64,
    pub x3: f64,
    /// Whole turns removed when normalising `s`.
    pub turns: i64,
}

impl MPoint {
    /// Reduces a possibly multi-turn arc modulo `2πR`, keeping the turn count.
    pub fn new(x0: f64, s: f64, r: f64, x3: f64, radius: f64) -> Self {
        assert!(radius > 0.0, "curve parameter must be positive");
        let (theta, turns) = normalize_angle(s / radius);
        Self {
            x0,
            s: theta * radius,
            r,
            x3,
            turns,
        }
    }

    /// Arc including the removed turns.
    pub fn unwrapped_arc(&self, radius: f64) -> f64 {
        self.s + self.turns as f64 * TAU * radius
    }
}

/// `L → M`: `s = R θ`.
pub fn l_to_m(p: &LPoint, radius: f64) -> MPoint {
    assert!(radius > 0.0, "curve parameter must be positive");
    MPoint {
        x0: p.x0,
        s: radius * p.theta,
        r: p.r,
        x3: p.x3,
        turns: 0,
    }
}

/// `M → L`: `θ = s / R`.
pub fn m_to_l(p: &MPoint, radius: f64) -> LPoint {
    assert!(radius > 0.0, "curve parameter must be positive");
    LPoint::new(p.x0, p.r, p.s / radius, p.x3)
}

/// The `L` arc `s' = (r / R) s` corresponding to the `M` arc `s`.
pub fn arc_in_l(s: f64, r: f64, radius: f64) -> f64 {
    r * s / radius
}

/// Potential of `M` corresponding to potential `a_l` of `L` at radius `r`:
/// `A_M = A_L r / R`.
pub fn map_potential(a_l: f64, r: f64, radius: f64) -> f64 {
    assert!(radius > 0.0, "curve parameter must be positive");
    a_l * r / radius
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RoundelKind {
    /// Circle in the `(x1, x2)` plane.
    Pure,
    /// Sphere.
    Superposition,
}

impl RoundelKind {
    pub fn dim(&self) -> usize {
        match self {
            RoundelKind::Pure => 2,
            RoundelKind::Superposition => 3,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RoundelKind::Pure => "pure",
            RoundelKind::Superposition => "superposition",
        }
    }
}

impl std::str::FromStr for RoundelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pure" => Ok(RoundelKind::Pure),
            "superposition" => Ok(RoundelKind::Superposition),
            other => Err(format!("unknown roundel kind `{other}` (pure|superposition)")),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundelSpec {
    pub center: LPoint,
    pub radius: f64,
    pub kind: RoundelKind,
    pub frame: LorentzTransform,
}

/// Offsets (relative to the centre, radius 1) of a deterministic point set.
///
/// Pure: `count` equally spaced angles starting at `θ = 0`. Superposition: a
/// Fibonacci spiral rotated about the polar axis by a seed-derived angle.
/// A single point is always `(1, 0, 0)`.
pub fn unit_boundary_offsets(kind: RoundelKind, count: usize, seed: u64) -> Vec<[f64; 3]> {
    assert!(count >= 1, "need at least one boundary point");
    if count == 1 {
        return vec![[1.0, 0.0, 0.0]];
    }
    match kind {
        RoundelKind::Pure => (0..count)
            .map(|k| {
                let (s, c) = (TAU * k as f64 / count as f64).sin_cos();
                [c, s, 0.0]
            })
            .collect(),
        RoundelKind::Superposition => {
            let offset = ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..TAU);
            let golden = TAU * (1.0 - 1.0 / 1.618_033_988_749_895);
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let (s, c) = (offset + golden * k as f64).sin_cos();
                    [rho * c, rho * s, z]
                })
                .collect()
        }
    }
}

/// Points on the boundary of a roundel, in the roundel frame.
pub fn boundary_points(spec: &RoundelSpec, count: usize, seed: u64) -> Vec<LPoint> {
    let c = spec.center.to_cartesian();
    unit_boundary_offsets(spec.kind, count, seed)
        .into_iter()
        .map(|u| {
            let p = [
                c[0] + spec.radius * u[0],
                c[1] + spec.radius * u[1],
                c[2] + spec.radius * u[2],
            ];
            let mut lp = LPoint::from_cartesian(spec.center.x0, p);
            if spec.kind == RoundelKind::Pure {
                lp.x3 = spec.center.x3;
            }
            lp
        })
        .collect()
}

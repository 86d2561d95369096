//! Plain-text lattice field format.
//!
//! ```text
//! roundel-field 1
//! kind <label>
//! values biquaternion|versatile
//! spacing <h>
//! extent <n0> <n1> <n2> <n3>
//! origin <x0> <x1> <x2> <x3>
//! frame snapshot
//! frame compromise <R> <8 reals of the spinor>
//! sites <count>
//! <i0> <i1> <i2> <i3> <16 reals>
//! ```
//!
//! Each site line holds eight complex numbers as real/imaginary pairs: the
//! two entries of a reflector, `X(q, q‡)` for biquaternion fields.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{BiquaternionField, Frame, HypercubicLattice, LatticeField, SpinorField};
use crate::algebra::{Biquaternion, LorentzTransform, VersatileMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum FieldText {
    Biquaternion { label: String, field: BiquaternionField },
    Versatile { label: String, field: SpinorField },
}

fn num(out: &mut String, x: f64) {
    let _ = write!(out, " {x:.16e}");
}

fn push_bq(out: &mut String, q: &Biquaternion) {
    for c in q.coeffs() {
        num(out, c.re);
        num(out, c.im);
    }
}

/// Serialises a field; the output ends with a newline.
pub fn write_field(text: &FieldText) -> String {
    let (label, kind, lattice) = match text {
        FieldText::Biquaternion { label, field } => (label, "biquaternion", field.lattice),
        FieldText::Versatile { label, field } => (label, "versatile", field.lattice),
    };
    let mut out = String::new();
    out.push_str("roundel-field 1\n");
    let _ = writeln!(out, "kind {label}");
    let _ = writeln!(out, "values {kind}");
    out.push_str("spacing");
    num(&mut out, lattice.spacing);
    out.push('\n');
    let e = lattice.extent;
    let _ = writeln!(out, "extent {} {} {} {}", e[0], e[1], e[2], e[3]);
    out.push_str("origin");
    for x in lattice.origin {
        num(&mut out, x);
    }
    out.push('\n');
    match lattice.frame {
        Frame::Snapshot => out.push_str("frame snapshot\n"),
        Frame::Compromise { z, radius } => {
            out.push_str("frame compromise");
            num(&mut out, radius);
            push_bq(&mut out, &z.spinor());
            out.push('\n');
        }
    }
    let _ = writeln!(out, "sites {}", lattice.site_count());
    for (i, s) in lattice.sites().enumerate() {
        let _ = write!(out, "{} {} {} {}", s[0], s[1], s[2], s[3]);
        let m = match text {
            FieldText::Biquaternion { field, .. } => VersatileMatrix::with_quat_conj(field.values()[i]),
            FieldText::Versatile { field, .. } => field.values()[i],
        };
        push_bq(&mut out, &m.upper);
        push_bq(&mut out, &m.lower);
        out.push('\n');
    }
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<Vec<&'a str>> {
    let (no, line) = lines.next().ok_or_else(|| bad(format!("missing `{key}` line")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(bad(format!("line {}: expected `{key}`", no + 1)));
    }
    Ok(parts.collect())
}

fn floats(parts: &[&str], line: usize) -> Result<Vec<f64>> {
    parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| bad(format!("line {line}: bad number `{p}`"))))
        .collect()
}

fn bq(v: &[f64]) -> Biquaternion {
    Biquaternion::new(
        Complex64::new(v[0], v[1]),
        Complex64::new(v[2], v[3]),
        Complex64::new(v[4], v[5]),
        Complex64::new(v[6], v[7]),
    )
}

/// Parses the output of [`write_field`].
pub fn read_field(input: &str) -> Result<FieldText> {
    let mut lines = input.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let magic = header(&mut lines, "roundel-field")?;
    if magic != ["1"] {
        return Err(bad("unsupported format version"));
    }
    let label = header(&mut lines, "kind")?.join(" ");
    let values = header(&mut lines, "values")?;
    let versatile = match values.as_slice() {
        ["biquaternion"] => false,
        ["versatile"] => true,
        _ => return Err(bad("values must be `biquaternion` or `versatile`")),
    };
    let spacing = floats(&header(&mut lines, "spacing")?, 4)?;
    let extent_parts = header(&mut lines, "extent")?;
    if extent_parts.len() != 4 {
        return Err(bad("extent needs four integers"));
    }
    let mut extent = [0usize; 4];
    for (e, p) in extent.iter_mut().zip(&extent_parts) {
        *e = p.parse().map_err(|_| bad(format!("bad extent `{p}`")))?;
    }
    let origin = floats(&header(&mut lines, "origin")?, 6)?;
    if spacing.len() != 1 || origin.len() != 4 {
        return Err(bad("malformed spacing or origin"));
    }
    let frame_parts = header(&mut lines, "frame")?;
    let frame = match frame_parts.first() {
        Some(&"snapshot") if frame_parts.len() == 1 => Frame::Snapshot,
        Some(&"compromise") if frame_parts.len() == 10 => {
            let v = floats(&frame_parts[1..], 7)?;
            let z = LorentzTransform::from_unit_spinor(bq(&v[1..])).ok_or_else(|| bad("frame spinor is not unit"))?;
            Frame::Compromise { z, radius: v[0] }
        }
        _ => return Err(bad("frame must be `snapshot` or `compromise R <8 reals>`")),
    };
    let lattice = HypercubicLattice::new(spacing[0], extent, [origin[0], origin[1], origin[2], origin[3]], frame)
        .map_err(|e| bad(e.to_string()))?;
    let count: usize = header(&mut lines, "sites")?
        .first()
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| bad("bad site count"))?;
    if count != lattice.site_count() {
        return Err(bad(format!("site count {count} does not match extent")));
    }
    let mut upper = vec![Biquaternion::ZERO; count];
    let mut lower = vec![Biquaternion::ZERO; count];
    let mut seen = vec![false; count];
    for _ in 0..count {
        let (no, line) = lines.next().ok_or_else(|| bad("truncated site list"))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 20 {
            return Err(bad(format!("line {}: expected 20 fields", no + 1)));
        }
        let mut site = [0usize; 4];
        for (s, p) in site.iter_mut().zip(&parts[..4]) {
            *s = p.parse().map_err(|_| bad(format!("line {}: bad index", no + 1)))?;
        }
        if !lattice.contains(&site) {
            return Err(bad(format!("line {}: site outside extent", no + 1)));
        }
        let v = floats(&parts[4..], no + 1)?;
        let i = lattice.index(&site);
        if seen[i] {
            return Err(bad(format!("line {}: duplicate site", no + 1)));
        }
        seen[i] = true;
        upper[i] = bq(&v[..8]);
        lower[i] = bq(&v[8..]);
    }
    if let Some((no, _)) = lines.next() {
        return Err(bad(format!("line {}: trailing content", no + 1)));
    }
    if versatile {
        let values = upper.into_iter().zip(lower).map(|(u, l)| VersatileMatrix::new(u, l)).collect();
        let field = LatticeField::from_values(lattice, values).map_err(|e| bad(e.to_string()))?;
        Ok(FieldText::Versatile { label, field })
    } else {
        let field = LatticeField::from_values(lattice, upper).map_err(|e| bad(e.to_string()))?;
        Ok(FieldText::Biquaternion { label, field })
    }
}

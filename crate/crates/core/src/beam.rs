//! Beam patterns and the share of received optical power each PD captures.
//!
//! Lengths are in beam waists. The Gaussian and LG₁₀ intensities are
//! normalized to unit total power, so a disk capture is directly a power
//! fraction of the whole beam. PD fractions are then expressed relative to a
//! chosen total, see [`Normalization`].

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::error::{ensure_finite_nonneg, Error, Result};
use crate::hexgeom::{ArrayLayout, PdRole};
use crate::specfun::{marcum_q_complement, phi};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BeamPattern {
    /// All power on a single PD.
    Degenerate,
    /// Equal power on every PD, regardless of geometry.
    Uniform,
    /// Fundamental mode, intensity ∝ e^{-2r²}.
    Gaussian,
    /// Vortex mode, intensity ∝ r² e^{-2r²}.
    Lg10,
}

impl BeamPattern {
    pub fn name(self) -> &'static str {
        match self {
            BeamPattern::Degenerate => "degenerate",
            BeamPattern::Uniform => "uniform",
            BeamPattern::Gaussian => "gaussian",
            BeamPattern::Lg10 => "lg10",
        }
    }

    /// Whether the pattern has a spatial intensity profile (and therefore
    /// depends on the array geometry).
    pub fn is_spatial(self) -> bool {
        matches!(self, BeamPattern::Gaussian | BeamPattern::Lg10)
    }
}

impl fmt::Display for BeamPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BeamPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "degenerate" => Ok(BeamPattern::Degenerate),
            "uniform" => Ok(BeamPattern::Uniform),
            "gaussian" | "gauss" | "lg00" => Ok(BeamPattern::Gaussian),
            "lg10" => Ok(BeamPattern::Lg10),
            other => Err(Error::Domain(format!(
                "unknown beam '{other}' (expected degenerate, uniform, gaussian or lg10)"
            ))),
        }
    }
}

/// What the per-PD optical powers are divided by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Power captured by the reference PD of radius `(G+1)ρ`.
    #[default]
    ReferenceDisk,
    /// Total power captured by the array, so fractions sum to one.
    ArraySum,
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Normalization::ReferenceDisk => "reference-disk",
            Normalization::ArraySum => "array-sum",
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reference-disk" => Ok(Normalization::ReferenceDisk),
            "array-sum" => Ok(Normalization::ArraySum),
            other => Err(Error::Domain(format!(
                "unknown normalization '{other}' (expected reference-disk or array-sum)"
            ))),
        }
    }
}

/// Unit-power radial intensity at distance `r` from the beam axis.
pub fn intensity(beam: BeamPattern, r: f64) -> Result<f64> {
    ensure_finite_nonneg("r", r)?;
    match beam {
        BeamPattern::Gaussian => Ok(2.0 / PI * (-2.0 * r * r).exp()),
        BeamPattern::Lg10 => Ok(4.0 / PI * r * r * (-2.0 * r * r).exp()),
        BeamPattern::Degenerate | BeamPattern::Uniform => Err(Error::UnsupportedModel(format!(
            "the {beam} pattern has no point intensity"
        ))),
    }
}

/// Closed-form beam power inside a disk of `radius` centered `offset` from
/// the axis.
pub fn disk_power(beam: BeamPattern, offset: f64, radius: f64) -> Result<f64> {
    ensure_finite_nonneg("offset", offset)?;
    ensure_finite_nonneg("radius", radius)?;
    match beam {
        BeamPattern::Gaussian if offset == 0.0 => Ok(-(-2.0 * radius * radius).exp_m1()),
        BeamPattern::Gaussian => marcum_q_complement(1, 2.0 * offset, 2.0 * radius),
        // 1 - e^{-t} - t e^{-t} with t = 2R², evaluated as a Poisson tail.
        BeamPattern::Lg10 if offset == 0.0 => marcum_q_complement(2, 0.0, 2.0 * radius),
        BeamPattern::Lg10 => phi(offset, radius),
        BeamPattern::Degenerate | BeamPattern::Uniform => Err(Error::UnsupportedModel(format!(
            "the {beam} pattern has no per-position capture; use capture_profile"
        ))),
    }
}

/// Power captured by the reference PD of radius `(G+1)ρ`.
pub fn reference_power(beam: BeamPattern, layout: &ArrayLayout) -> Result<f64> {
    let p = disk_power(beam, 0.0, layout.reference_radius())?;
    if p < f64::MIN_POSITIVE {
        return Err(Error::Numerical(format!(
            "reference capture for {beam} underflows at rho = {:e}, G = {}; raise rho",
            layout.rho(),
            layout.rings()
        )));
    }
    Ok(p)
}

/// Fraction of the reference-disk power captured by the PD with `role`.
pub fn captured_fraction_closed(beam: BeamPattern, layout: &ArrayLayout, role: PdRole) -> Result<f64> {
    if !beam.is_spatial() {
        return Err(Error::UnsupportedModel(format!(
            "the {beam} pattern has no per-position closed form; use capture_profile"
        )));
    }
    let site = layout
        .sites()
        .iter()
        .find(|s| s.role == role)
        .ok_or_else(|| Error::Domain(format!("layout has no PD with role {role}")))?;
    Ok(disk_power(beam, site.offset, layout.rho())? / reference_power(beam, layout)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileEntry {
    pub role: Option<PdRole>,
    pub fraction: f64,
}

/// Per-PD captured power fractions, one entry per PD.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptureProfile {
    entries: Vec<ProfileEntry>,
    total: f64,
}

impl CaptureProfile {
    /// Wraps arbitrary fractions (each finite and non-negative).
    pub fn from_fractions(fractions: Vec<f64>) -> Result<Self> {
        Self::from_entries(
            fractions
                .into_iter()
                .map(|fraction| ProfileEntry { role: None, fraction })
                .collect(),
        )
    }

    fn from_entries(entries: Vec<ProfileEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("a capture profile needs at least one PD".into()));
        }
        for e in &entries {
            ensure_finite_nonneg("fraction", e.fraction)?;
        }
        let total = entries.iter().map(|e| e.fraction).sum();
        Ok(Self { entries, total })
    }

    pub fn entries(&self) -> &[ProfileEntry] {
        &self.entries
    }

    pub fn fractions(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.fraction)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_fraction(&self) -> f64 {
        self.total
    }

    /// Writes `index,ring,role,fraction`, one row per PD.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "index,ring,role,fraction")?;
        for (i, e) in self.entries.iter().enumerate() {
            let (ring, role) = match e.role {
                Some(r) => (r.ring().to_string(), r.kind()),
                None => (String::new(), ""),
            };
            writeln!(out, "{i},{ring},{role},{}", e.fraction)?;
        }
        Ok(())
    }
}

pub fn capture_profile(beam: BeamPattern, layout: &ArrayLayout, normalization: Normalization) -> Result<CaptureProfile> {
    let roles = layout.expanded().map(|s| Some(s.role));
    let m = layout.pd_count() as usize;
    let entries: Vec<ProfileEntry> = match beam {
        BeamPattern::Degenerate => roles
            .enumerate()
            .map(|(i, role)| ProfileEntry {
                role,
                fraction: if i == 0 { 1.0 } else { 0.0 },
            })
            .collect(),
        BeamPattern::Uniform => roles
            .map(|role| ProfileEntry {
                role,
                fraction: 1.0 / m as f64,
            })
            .collect(),
        BeamPattern::Gaussian | BeamPattern::Lg10 => {
            let site_powers = layout
                .sites()
                .iter()
                .map(|s| disk_power(beam, s.offset, layout.rho()))
                .collect::<Result<Vec<_>>>()?;
            let total = match normalization {
                Normalization::ReferenceDisk => reference_power(beam, layout)?,
                Normalization::ArraySum => {
                    let sum: f64 = layout
                        .sites()
                        .iter()
                        .zip(&site_powers)
                        .map(|(s, p)| s.multiplicity as f64 * p)
                        .sum();
                    if sum < f64::MIN_POSITIVE {
                        return Err(Error::Numerical(format!(
                            "array capture for {beam} underflows at rho = {:e}; raise rho",
                            layout.rho()
                        )));
                    }
                    sum
                }
            };
            layout
                .sites()
                .iter()
                .zip(&site_powers)
                .flat_map(|(s, p)| {
                    std::iter::repeat_n(
                        ProfileEntry {
                            role: Some(s.role),
                            fraction: p / total,
                        },
                        s.multiplicity as usize,
                    )
                })
                .collect()
        }
    };
    CaptureProfile::from_entries(entries)
}

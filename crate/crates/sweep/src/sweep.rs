//! Parameter sweeps behind the three loss-factor figures: the minimum loss
//! factor versus `M`, and β² versus `M` at fixed or shrinking PD radius.
//!
//! Every row can be reproduced by calling the corresponding library function
//! with the row's inputs. Floats are written with Rust's shortest
//! round-trip formatting, so output is byte-stable for a given spec.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use anyhow::{bail, Result};
use pdarray_core::beam::{capture_profile, BeamPattern, Normalization};
use pdarray_core::hexgeom::{array_size, layout, DistanceModel};
use pdarray_core::scaling::{beta_min, beta_min_floor, db_to_linear, loss_factor, PdRegime};
use rayon::prelude::*;

/// Verdict threshold used for the `meets_reference` column: capacitance-limited
/// PDs at 20 dB electrical SNR.
pub const SHADE_REGIME: PdRegime = PdRegime::CapacitanceLimited;
pub const SHADE_SNR_DB: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    BetaMin,
    BetaFixed,
    BetaScaled,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::BetaMin => "betamin",
            SweepKind::BetaFixed => "beta-fixed",
            SweepKind::BetaScaled => "beta-scaled",
        }
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            SweepKind::BetaMin => &["m", "xi", "gamma_star_db", "gamma_star", "beta_min_sq", "floor"],
            SweepKind::BetaFixed => &["g", "m", "beam", "rho", "beta_sq", "beta_min_sq", "meets_reference"],
            SweepKind::BetaScaled => &["g", "m", "beam", "rho0", "rho", "beta_sq", "beta_min_sq", "meets_reference"],
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "betamin" => Ok(SweepKind::BetaMin),
            "beta-fixed" => Ok(SweepKind::BetaFixed),
            "beta-scaled" => Ok(SweepKind::BetaScaled),
            other => Err(format!(
                "unknown sweep '{other}' (expected betamin, beta-fixed or beta-scaled)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub g_min: u32,
    pub g_max: u32,
    /// Largest PD count of the minimum-loss-factor sweep.
    pub m_max: u64,
    /// Log-spaced PD counts per decade for the minimum-loss-factor sweep.
    pub m_per_decade: u32,
    pub rho: Vec<f64>,
    pub rho0: Vec<f64>,
    pub xi: Vec<PdRegime>,
    pub snr_db: Vec<f64>,
    pub beams: Vec<BeamPattern>,
    pub distance_model: DistanceModel,
    pub normalization: Normalization,
}

impl SweepSpec {
    /// Default grids. They span the qualitative ranges of the published
    /// curves; the exact grids behind them are not known.
    pub fn new(kind: SweepKind) -> Self {
        Self {
            kind,
            g_min: 0,
            g_max: 20,
            m_max: 10_000,
            m_per_decade: 20,
            rho: vec![0.1, 0.5, 1.0, 2.0],
            rho0: vec![0.5, 1.0, 2.0],
            xi: PdRegime::ALL.to_vec(),
            snr_db: vec![10.0, 20.0],
            beams: vec![BeamPattern::Gaussian, BeamPattern::Uniform, BeamPattern::Lg10],
            distance_model: DistanceModel::default(),
            normalization: Normalization::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            SweepKind::BetaMin => {
                if self.m_max == 0 || self.m_per_decade == 0 {
                    bail!("m-max and m-per-decade must be >= 1");
                }
                if self.xi.is_empty() || self.snr_db.is_empty() {
                    bail!("the betamin sweep needs at least one xi and one snr-db value");
                }
                if let Some(s) = self.snr_db.iter().find(|s| !s.is_finite()) {
                    bail!("snr-db must be finite, got {s}");
                }
            }
            SweepKind::BetaFixed | SweepKind::BetaScaled => {
                if self.g_min > self.g_max {
                    bail!("G range {}..={} is empty", self.g_min, self.g_max);
                }
                if self.beams.is_empty() {
                    bail!("at least one beam is required");
                }
                let (name, radii) = match self.kind {
                    SweepKind::BetaFixed => ("rho", &self.rho),
                    _ => ("rho0", &self.rho0),
                };
                if radii.is_empty() {
                    bail!("at least one {name} value is required");
                }
                if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
                    bail!("{name} must be positive, got {r}");
                }
            }
        }
        Ok(())
    }
}

/// An ordered CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf)?)
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let rows = match spec.kind {
        SweepKind::BetaMin => sweep_betamin(spec)?,
        SweepKind::BetaFixed => sweep_beta_fixed_rho(spec)?,
        SweepKind::BetaScaled => sweep_beta_scaled_rho(spec)?,
    };
    Ok(Table {
        header: spec.kind.header().iter().map(|s| s.to_string()).collect(),
        rows,
    })
}

/// Integers from 1 to `m_max`, roughly log-spaced, always including both ends.
pub fn log_grid(m_max: u64, per_decade: u32) -> Vec<u64> {
    let decades = (m_max as f64).log10();
    let steps = (decades * per_decade as f64).ceil() as u64;
    let mut out: Vec<u64> = (0..=steps)
        .map(|k| (10f64.powf(k as f64 / per_decade as f64).round() as u64).min(m_max))
        .collect();
    out.push(m_max);
    out.dedup();
    out
}

fn sweep_betamin(spec: &SweepSpec) -> Result<Vec<Vec<String>>> {
    let ms = log_grid(spec.m_max, spec.m_per_decade);
    let mut rows = Vec::new();
    for &xi in &spec.xi {
        for &db in &spec.snr_db {
            let gamma = db_to_linear(db);
            let floor = beta_min_floor(gamma)?;
            for &m in &ms {
                rows.push(vec![
                    m.to_string(),
                    xi.xi().to_string(),
                    db.to_string(),
                    gamma.to_string(),
                    beta_min(m, xi, gamma)?.to_string(),
                    floor.to_string(),
                ]);
            }
        }
    }
    Ok(rows)
}

/// β² of an array with `g` rings of radius `rho` for one beam.
pub fn beta_sq_at(beam: BeamPattern, g: u32, rho: f64, model: DistanceModel, normalization: Normalization) -> Result<f64> {
    Ok(match beam {
        BeamPattern::Degenerate => 1.0,
        BeamPattern::Uniform => 1.0 / array_size(g) as f64,
        BeamPattern::Gaussian | BeamPattern::Lg10 => {
            let l = layout(g, rho, model)?;
            loss_factor(&capture_profile(beam, &l, normalization)?)
        }
    })
}

struct BetaPoint {
    g: u32,
    beam: BeamPattern,
    rho0: Option<f64>,
    rho: f64,
}

fn beta_rows(spec: &SweepSpec, points: Vec<BetaPoint>) -> Result<Vec<Vec<String>>> {
    let shade_gamma = db_to_linear(SHADE_SNR_DB);
    points
        .par_iter()
        .map(|p| -> Result<Vec<String>> {
            let m = array_size(p.g);
            let beta_sq = beta_sq_at(p.beam, p.g, p.rho, spec.distance_model, spec.normalization)?;
            let threshold = beta_min(m, SHADE_REGIME, shade_gamma)?;
            let mut row = vec![p.g.to_string(), m.to_string(), p.beam.name().to_string()];
            if let Some(r0) = p.rho0 {
                row.push(r0.to_string());
            }
            row.extend([
                p.rho.to_string(),
                beta_sq.to_string(),
                threshold.to_string(),
                (beta_sq >= threshold).to_string(),
            ]);
            Ok(row)
        })
        .collect()
}

fn sweep_beta_fixed_rho(spec: &SweepSpec) -> Result<Vec<Vec<String>>> {
    let mut points = Vec::new();
    for &beam in &spec.beams {
        for &rho in &spec.rho {
            for g in spec.g_min..=spec.g_max {
                points.push(BetaPoint { g, beam, rho0: None, rho });
            }
        }
    }
    beta_rows(spec, points)
}

fn sweep_beta_scaled_rho(spec: &SweepSpec) -> Result<Vec<Vec<String>>> {
    let mut points = Vec::new();
    for &beam in &spec.beams {
        for &rho0 in &spec.rho0 {
            for g in spec.g_min..=spec.g_max {
                points.push(BetaPoint {
                    g,
                    beam,
                    rho0: Some(rho0),
                    rho: rho0 / (g as f64 + 1.0),
                });
            }
        }
    }
    beta_rows(spec, points)
}

//! Hexagonally packed detector arrays: a central PD plus `G` concentric
//! hexagonal rings, ring `g` holding `6g` PDs of which six sit on the hexagon
//! corners. Distances are in beam-waist units and neighbouring PD centers are
//! `2ρ` apart.

use std::fmt;
use std::io::{self, Write};

use crate::error::{ensure_positive, Error, Result};

/// Number of PDs in an array with `rings` rings: `1 + 3G(G+1)`.
pub fn array_size(rings: u32) -> u64 {
    let g = rings as u64;
    1 + 3 * g * (g + 1)
}

/// Inverse of [`array_size`]; fails with [`Error::Shape`] when `m` is not a
/// hexagonal number.
pub fn rings_for(m: u64) -> Result<u32> {
    if m == 0 {
        return Err(Error::Shape { m, nearest: 1 });
    }
    let g = approx_rings(m);
    if array_size(g) == m {
        Ok(g)
    } else {
        Err(Error::Shape {
            m,
            nearest: nearest_valid_m(m),
        })
    }
}

/// The hexagonal PD count closest to `m`, the smaller one on ties.
pub fn nearest_valid_m(m: u64) -> u64 {
    let g = approx_rings(m);
    let below = array_size(g);
    let above = array_size(g + 1);
    if m.abs_diff(below) <= above.abs_diff(m) {
        below
    } else {
        above
    }
}

/// Largest `G` with `array_size(G) <= max(m, 1)`.
fn approx_rings(m: u64) -> u32 {
    let mut g = (((m.max(1) - 1) as f64 / 3.0).sqrt()) as u32;
    while array_size(g + 1) <= m {
        g += 1;
    }
    while g > 0 && array_size(g) > m {
        g -= 1;
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PdRole {
    Central,
    /// One of the six PDs on the corners of ring `g`.
    Corner(u32),
    /// A PD on a side of ring `g`, between two corners.
    Edge(u32),
}

impl PdRole {
    pub fn ring(self) -> u32 {
        match self {
            PdRole::Central => 0,
            PdRole::Corner(g) | PdRole::Edge(g) => g,
        }
    }

    pub fn kind(self) -> &'static str {
        match self {
            PdRole::Central => "central",
            PdRole::Corner(_) => "corner",
            PdRole::Edge(_) => "edge",
        }
    }
}

impl fmt::Display for PdRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PdRole::Central => write!(f, "central"),
            PdRole::Corner(g) => write!(f, "corner(ring {g})"),
            PdRole::Edge(g) => write!(f, "edge(ring {g})"),
        }
    }
}

/// How non-corner PD distances are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceModel {
    /// Corners at `2gρ`; every side PD of ring `g` at the hexagon inradius
    /// `√3·gρ`. Matches the closed-form capture expressions term by term.
    #[default]
    InradiusEdges,
    /// Every PD at its true lattice position.
    ExactLattice,
}

impl DistanceModel {
    pub fn name(self) -> &'static str {
        match self {
            DistanceModel::InradiusEdges => "inradius",
            DistanceModel::ExactLattice => "exact",
        }
    }
}

impl std::str::FromStr for DistanceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inradius" | "inradius-edges" => Ok(DistanceModel::InradiusEdges),
            "exact" | "exact-lattice" => Ok(DistanceModel::ExactLattice),
            other => Err(Error::Domain(format!(
                "unknown distance model '{other}' (expected inradius or exact)"
            ))),
        }
    }
}

/// A group of PDs sharing role and distance from the beam axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdSite {
    /// Center distance from the beam axis, in beam waists.
    pub offset: f64,
    pub role: PdRole,
    pub multiplicity: u32,
    /// Center coordinates, known only for the exact lattice.
    pub position: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout {
    rings: u32,
    rho: f64,
    model: DistanceModel,
    sites: Vec<PdSite>,
}

// Axial lattice directions, walked in order around a ring.
const DIRECTIONS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

/// Builds the array layout for `rings` rings of PDs with radius `rho` (in beam
/// waists).
pub fn layout(rings: u32, rho: f64, model: DistanceModel) -> Result<ArrayLayout> {
    ensure_positive("rho", rho)?;
    let central = PdSite {
        offset: 0.0,
        role: PdRole::Central,
        multiplicity: 1,
        position: Some([0.0, 0.0]),
    };
    let mut sites = vec![central];
    match model {
        DistanceModel::InradiusEdges => {
            for g in 1..=rings {
                let gf = g as f64;
                sites.push(PdSite {
                    offset: 2.0 * gf * rho,
                    role: PdRole::Corner(g),
                    multiplicity: 6,
                    position: None,
                });
                if g > 1 {
                    sites.push(PdSite {
                        offset: 3f64.sqrt() * gf * rho,
                        role: PdRole::Edge(g),
                        multiplicity: 6 * g - 6,
                        position: None,
                    });
                }
            }
            sites[0].position = None;
        }
        DistanceModel::ExactLattice => {
            for g in 1..=rings {
                sites.extend(lattice_ring(g, rho));
            }
        }
    }
    Ok(ArrayLayout {
        rings,
        rho,
        model,
        sites,
    })
}

fn lattice_ring(g: u32, rho: f64) -> Vec<PdSite> {
    let g = g as i64;
    let mut q = DIRECTIONS[4].0 * g;
    let mut r = DIRECTIONS[4].1 * g;
    let mut out = Vec::with_capacity(6 * g as usize);
    for &(dq, dr) in &DIRECTIONS {
        for step in 0..g {
            let norm2 = q * q + q * r + r * r;
            let role = if step == 0 {
                PdRole::Corner(g as u32)
            } else {
                PdRole::Edge(g as u32)
            };
            let (qf, rf) = (q as f64, r as f64);
            out.push(PdSite {
                offset: 2.0 * rho * (norm2 as f64).sqrt(),
                role,
                multiplicity: 1,
                position: Some([2.0 * rho * (qf + 0.5 * rf), 2.0 * rho * (0.5 * 3f64.sqrt() * rf)]),
            });
            q += dq;
            r += dr;
        }
    }
    out
}

impl ArrayLayout {
    pub fn rings(&self) -> u32 {
        self.rings
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn model(&self) -> DistanceModel {
        self.model
    }

    pub fn sites(&self) -> &[PdSite] {
        &self.sites
    }

    pub fn pd_count(&self) -> u64 {
        self.sites.iter().map(|s| s.multiplicity as u64).sum()
    }

    /// Radius of the single reference PD the array is compared against, `(G+1)ρ`.
    pub fn reference_radius(&self) -> f64 {
        (self.rings as f64 + 1.0) * self.rho
    }

    /// One entry per PD, sites expanded by multiplicity, in site order.
    pub fn expanded(&self) -> impl Iterator<Item = &PdSite> + '_ {
        self.sites
            .iter()
            .flat_map(|s| std::iter::repeat_n(s, s.multiplicity as usize))
    }

    /// Copy of this layout with every corner PD moved radially by `factor`.
    /// Used for sensitivity studies and to check that the verification suite
    /// notices a misplaced PD.
    pub fn with_corner_offsets_scaled(&self, factor: f64) -> ArrayLayout {
        let mut out = self.clone();
        for site in &mut out.sites {
            if let PdRole::Corner(_) = site.role {
                site.offset *= factor;
                if let Some([x, y]) = site.position {
                    site.position = Some([x * factor, y * factor]);
                }
            }
        }
        out
    }

    /// Writes `index,x,y,distance,role,ring`, one row per PD. `x` and `y` are
    /// empty when the model only fixes distances.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "index,x,y,distance,role,ring")?;
        for (i, site) in self.expanded().enumerate() {
            let (x, y) = match site.position {
                Some([x, y]) => (x.to_string(), y.to_string()),
                None => (String::new(), String::new()),
            };
            writeln!(
                out,
                "{i},{x},{y},{},{},{}",
                site.offset,
                site.role.kind(),
                site.role.ring()
            )?;
        }
        Ok(())
    }
}

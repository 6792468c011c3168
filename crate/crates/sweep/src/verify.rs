//! Cross-checks of the closed forms against independent numerics and of the
//! scaling laws against their stated limits. Each check records what it
//! observed next to what it expected, and the whole report is deterministic
//! for a given seed.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use anyhow::Result;
use pdarray_core::allocation::{brute_force_allocation_search, gamma_mrc, majorizes, optimal_allocation, AllocationProblem};
use pdarray_core::beam::{capture_profile, disk_power, intensity, reference_power, BeamPattern, CaptureProfile, Normalization};
use pdarray_core::hexgeom::{layout, DistanceModel};
use pdarray_core::quadrature::{disk_capture, QuadratureSpec};
use pdarray_core::scaling::{
    achievable_rate, beta_central_only, beta_gauss, beta_lg10, beta_min, compare_to_reference, db_to_linear, loss_factor,
    reference_rate, PdRegime,
};
use pdarray_core::specfun::phi;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckGroup {
    Oracle,
    Identity,
    Anchors,
    Slopes,
    Crossover,
    Allocation,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 6] = [
        CheckGroup::Oracle,
        CheckGroup::Identity,
        CheckGroup::Anchors,
        CheckGroup::Slopes,
        CheckGroup::Crossover,
        CheckGroup::Allocation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::Oracle => "oracle",
            CheckGroup::Identity => "identity",
            CheckGroup::Anchors => "anchors",
            CheckGroup::Slopes => "slopes",
            CheckGroup::Crossover => "crossover",
            CheckGroup::Allocation => "allocation",
        }
    }
}

impl fmt::Display for CheckGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckGroup {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        CheckGroup::ALL
            .into_iter()
            .find(|g| g.name() == s.trim())
            .ok_or_else(|| format!("unknown check group '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub groups: Vec<CheckGroup>,
    /// Relative tolerance handed to the adaptive quadrature.
    pub quad_rel_tolerance: f64,
    /// Scale every corner-PD distance in the closed-form side of the capture
    /// check by this factor, to confirm the check catches misplaced PDs.
    pub corner_fault: Option<f64>,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            groups: CheckGroup::ALL.to_vec(),
            quad_rel_tolerance: QuadratureSpec::default().rel_tolerance,
            corner_fault: None,
            seed: 20_240_601,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub group: CheckGroup,
    pub name: &'static str,
    pub observed: String,
    pub expected: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["group", "check", "observed", "expected", "status"])?;
        for c in &self.checks {
            w.write_record([
                c.group.name(),
                c.name,
                &c.observed,
                &c.expected,
                if c.passed { "pass" } else { "fail" },
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const CAPTURE_BEAMS: [BeamPattern; 2] = [BeamPattern::Gaussian, BeamPattern::Lg10];
pub const CAPTURE_RINGS: [u32; 4] = [1, 2, 3, 5];
pub const CAPTURE_RHOS: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 2.0];

pub fn verify(opts: &VerifyOptions) -> VerifyReport {
    let mut groups = opts.groups.clone();
    groups.sort();
    groups.dedup();
    let mut checks = Vec::new();
    for group in groups {
        let mut push = |name: &'static str, outcome: Result<(String, String, bool)>| {
            let (observed, expected, passed) = match outcome {
                Ok(t) => t,
                Err(e) => (format!("error: {e:#}"), String::new(), false),
            };
            checks.push(CheckResult {
                group,
                name,
                observed,
                expected,
                passed,
            });
        };
        match group {
            CheckGroup::Oracle => {
                let quad = QuadratureSpec {
                    rel_tolerance: opts.quad_rel_tolerance,
                    ..QuadratureSpec::default()
                };
                push("capture-vs-quadrature", bounded(capture_max_error(&quad, opts.corner_fault), 1e-6));
                push("lg10-offset-vs-quadrature", bounded(phi_max_error(&quad), 1e-6));
                push("reference-disk-vs-quadrature", bounded(reference_max_error(&quad), 1e-9));
                push("monte-carlo-vs-adaptive", bounded(monte_carlo_max_z(&quad, opts.seed), 4.0));
            }
            CheckGroup::Identity => {
                push("beta-gauss-identity", bounded(identity_max_rel_error(BeamPattern::Gaussian), 1e-12));
                push("beta-lg10-identity", bounded(identity_max_rel_error(BeamPattern::Lg10), 1e-12));
            }
            CheckGroup::Anchors => {
                push("beta-min-single-pd", bounded(single_pd_anchor(), 1e-12));
                push("beta-min-transit-time", bounded(transit_time_anchor(), 1e-12));
                push("beta-min-floor-20db", bounded(floor_anchor(), 1e-4));
            }
            CheckGroup::Slopes => match asymptotic_slopes(SLOPE_RHO, SLOPE_RINGS) {
                Ok(s) => {
                    for (name, observed, target, tol) in s.checks() {
                        push(name, Ok(slope_outcome(observed, target, tol)));
                    }
                }
                Err(e) => push("asymptotic-slopes", Err(e)),
            },
            CheckGroup::Crossover => {
                let c = crossover_trials(1000, opts.seed);
                push(
                    "crossover-equivalence",
                    c.as_ref()
                        .map(|c| (c.disagreements.to_string(), "0".into(), c.disagreements == 0))
                        .map_err(|e| anyhow::anyhow!("{e:#}")),
                );
                push("alpha-exactness", bounded(c.map(|c| c.alpha_max_rel_error), 1e-12));
            }
            CheckGroup::Allocation => {
                push("vertex-beats-grid", bounded(allocation_max_excess(100), 1e-12));
                push(
                    "schur-convexity",
                    schur_violations(1000, opts.seed).map(|v| (v.to_string(), "0".into(), v == 0)),
                );
            }
        }
    }
    VerifyReport { checks }
}

fn bounded(observed: Result<f64>, bound: f64) -> Result<(String, String, bool)> {
    let v = observed?;
    Ok((format!("{v:e}"), format!("<= {bound:e}"), v <= bound))
}

fn slope_outcome(observed: f64, target: f64, tol: f64) -> (String, String, bool) {
    (
        format!("{observed:.6}"),
        format!("{target} ± {tol}"),
        (observed - target).abs() <= tol,
    )
}

fn quad_capture(beam: BeamPattern, offset: f64, radius: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(disk_capture(|r| intensity(beam, r).unwrap_or(f64::NAN), offset, radius, spec)?.value)
}

/// Largest |closed-form fraction − quadrature fraction| over every PD role of
/// the standard grid.
pub fn capture_max_error(quad: &QuadratureSpec, corner_fault: Option<f64>) -> Result<f64> {
    let mut worst = 0.0f64;
    for beam in CAPTURE_BEAMS {
        for g in CAPTURE_RINGS {
            for rho in CAPTURE_RHOS {
                let truth = layout(g, rho, DistanceModel::InradiusEdges)?;
                let closed_layout = match corner_fault {
                    Some(f) => truth.with_corner_offsets_scaled(f),
                    None => truth.clone(),
                };
                let closed_ref = reference_power(beam, &closed_layout)?;
                let numeric_ref = quad_capture(beam, 0.0, truth.reference_radius(), quad)?;
                for (site, closed_site) in truth.sites().iter().zip(closed_layout.sites()) {
                    let closed = disk_power(beam, closed_site.offset, rho)? / closed_ref;
                    let numeric = quad_capture(beam, site.offset, rho, quad)? / numeric_ref;
                    worst = worst.max((closed - numeric).abs());
                }
            }
        }
    }
    Ok(worst)
}

fn phi_max_error(quad: &QuadratureSpec) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..=16 {
        let a = 0.25 * i as f64;
        for b in [0.05, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0] {
            worst = worst.max((phi(a, b)? - quad_capture(BeamPattern::Lg10, a, b, quad)?).abs());
        }
    }
    Ok(worst)
}

fn reference_max_error(quad: &QuadratureSpec) -> Result<f64> {
    let mut worst = 0.0f64;
    for beam in CAPTURE_BEAMS {
        for g in CAPTURE_RINGS {
            for rho in CAPTURE_RHOS {
                let l = layout(g, rho, DistanceModel::InradiusEdges)?;
                let numeric = quad_capture(beam, 0.0, l.reference_radius(), quad)?;
                worst = worst.max((reference_power(beam, &l)? - numeric).abs());
            }
        }
    }
    Ok(worst)
}

/// Largest |Monte Carlo − adaptive| in units of the Monte Carlo standard error.
fn monte_carlo_max_z(quad: &QuadratureSpec, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for k in 0..12u64 {
        let offset = rng.gen_range(0.0..2.5);
        let radius = rng.gen_range(0.1..1.5);
        for beam in CAPTURE_BEAMS {
            let mc = disk_capture(
                |r| intensity(beam, r).unwrap_or(f64::NAN),
                offset,
                radius,
                &QuadratureSpec::monte_carlo(seed.wrapping_add(k), 100_000),
            )?;
            let exact = quad_capture(beam, offset, radius, quad)?;
            worst = worst.max((mc.value - exact).abs() / mc.error_estimate);
        }
    }
    Ok(worst)
}

fn identity_max_rel_error(beam: BeamPattern) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in CAPTURE_RINGS {
        for rho in CAPTURE_RHOS {
            let l = layout(g, rho, DistanceModel::InradiusEdges)?;
            let sum = loss_factor(&capture_profile(beam, &l, Normalization::ReferenceDisk)?);
            let direct = match beam {
                BeamPattern::Gaussian => beta_gauss(g, rho)?,
                _ => beta_lg10(g, rho)?,
            };
            worst = worst.max(((direct - sum) / sum).abs());
        }
    }
    Ok(worst)
}

fn single_pd_anchor() -> Result<f64> {
    let mut worst = 0.0f64;
    for regime in PdRegime::ALL {
        for gamma in [1e-3, 1.0, 100.0, 1e6] {
            worst = worst.max((beta_min(1, regime, gamma)? - 1.0).abs());
        }
    }
    Ok(worst)
}

fn transit_time_anchor() -> Result<f64> {
    let mut worst = 0.0f64;
    for m in [1, 7, 37, 1_000_000] {
        for gamma in [0.1, 100.0, 1e4] {
            worst = worst.max((beta_min(m, PdRegime::TransitTimeLimited, gamma)? - 1.0).abs());
        }
    }
    Ok(worst)
}

fn floor_anchor() -> Result<f64> {
    Ok((beta_min(1_000_000, PdRegime::CapacitanceLimited, 100.0)? - 101f64.ln() / 100.0).abs())
}

pub const SLOPE_RHO: f64 = 0.01;
pub const SLOPE_RINGS: std::ops::RangeInclusive<u32> = 10..=100;

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Log-log slopes of the loss factors against the ring count `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slopes {
    pub gauss: f64,
    pub lg10: f64,
    pub gauss_central: f64,
    pub lg10_central: f64,
    /// Slope of β²_Gauss / β²_LG10.
    pub ratio: f64,
}

impl Slopes {
    /// (check name, observed, target, tolerance) for each fitted slope.
    pub fn checks(&self) -> [(&'static str, f64, f64, f64); 5] {
        [
            ("slope-gauss", self.gauss, -1.0, 0.15),
            ("slope-lg10", self.lg10, -3.0, 0.3),
            ("slope-gauss-central", self.gauss_central, -2.0, 0.2),
            ("slope-lg10-central", self.lg10_central, -4.0, 0.4),
            ("slope-ratio", self.ratio, 2.0, 0.3),
        ]
    }
}

pub fn asymptotic_slopes(rho: f64, rings: std::ops::RangeInclusive<u32>) -> Result<Slopes> {
    let gs: Vec<u32> = rings.collect();
    let xs: Vec<f64> = gs.iter().map(|&g| g as f64).collect();
    let series = |f: &dyn Fn(u32) -> pdarray_core::Result<f64>| -> Result<Vec<f64>> {
        Ok(gs.iter().map(|&g| f(g)).collect::<pdarray_core::Result<Vec<_>>>()?)
    };
    let gauss = series(&|g| beta_gauss(g, rho))?;
    let lg = series(&|g| beta_lg10(g, rho))?;
    let ratio: Vec<f64> = gauss.iter().zip(&lg).map(|(a, b)| a / b).collect();
    Ok(Slopes {
        gauss: loglog_slope(&xs, &gauss),
        lg10: loglog_slope(&xs, &lg),
        gauss_central: loglog_slope(&xs, &series(&|g| beta_central_only(BeamPattern::Gaussian, g, rho))?),
        lg10_central: loglog_slope(&xs, &series(&|g| beta_central_only(BeamPattern::Lg10, g, rho))?),
        ratio: loglog_slope(&xs, &ratio),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverSummary {
    pub trials: usize,
    pub disagreements: usize,
    pub alpha_max_rel_error: f64,
}

/// Random (M, ξ, γ*, β²) tuples: compares the rate comparison against the
/// β²_min comparison, and checks that scaling the power by α recovers the
/// reference rate.
pub fn crossover_trials(trials: usize, seed: u64) -> Result<CrossoverSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disagreements = 0;
    let mut alpha_max_rel_error = 0.0f64;
    for _ in 0..trials {
        let m = 10f64.powf(rng.gen_range(0.0..6.0)).round() as u64;
        let regime = PdRegime::ALL[rng.gen_range(0..3)];
        let gamma = db_to_linear(rng.gen_range(-10.0..40.0));
        let beta_sq: f64 = rng.gen_range(1e-6..=1.0);
        let b0 = 10f64.powf(rng.gen_range(6.0..11.0));
        let report = compare_to_reference(m, regime, beta_sq, gamma, b0)?;
        let by_rate = achievable_rate(m, regime, beta_sq, gamma, b0)? >= reference_rate(gamma, b0)?;
        if by_rate != (beta_sq >= beta_min(m, regime, gamma)?) || by_rate != report.meets_reference {
            disagreements += 1;
        }
        let scaled = achievable_rate(m, regime, beta_sq * report.alpha * report.alpha, gamma, b0)?;
        let target = report.rate_ref;
        alpha_max_rel_error = alpha_max_rel_error.max(((scaled - target) / target).abs());
    }
    Ok(CrossoverSummary {
        trials,
        disagreements,
        alpha_max_rel_error,
    })
}

/// Largest relative amount by which any grid allocation beats the vertex
/// allocation, over equal and unequal PD parameter sets with up to four PDs.
pub fn allocation_max_excess(grid_steps: u32) -> Result<f64> {
    let unequal_resp = [0.9, 1.3, 0.7, 1.1];
    let unequal_noise = [2e-21, 1e-21, 3e-21, 1.5e-21];
    let mut worst = f64::NEG_INFINITY;
    for m in 1..=4 {
        let problems = [
            AllocationProblem::uniform(m, 1e-3, 1.0, 1e-21, 1e9)?,
            AllocationProblem::new(1e-3, unequal_resp[..m].to_vec(), vec![1e-21; m], 1e9)?,
            AllocationProblem::new(1e-3, vec![1.0; m], unequal_noise[..m].to_vec(), 1e9)?,
        ];
        for p in &problems {
            let vertex = gamma_mrc(p, &optimal_allocation(p))?;
            let (_, best) = brute_force_allocation_search(p, grid_steps)?;
            worst = worst.max((best - vertex) / vertex);
        }
    }
    Ok(worst.max(0.0))
}

/// Draws random probability vectors, mixes them with a random chain of
/// T-transforms (each of which is majorized by its input) and counts pairs
/// where the loss factor of the more spread vector is larger.
pub fn schur_violations(pairs: usize, seed: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5c0e);
    let mut violations = 0;
    for _ in 0..pairs {
        let n = rng.gen_range(2..=12);
        let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().powi(3)).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let mut q = p.clone();
        for _ in 0..rng.gen_range(1..=4) {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            let lambda: f64 = rng.gen();
            let (qi, qj) = (q[i], q[j]);
            q[i] = lambda * qi + (1.0 - lambda) * qj;
            q[j] = lambda * qj + (1.0 - lambda) * qi;
        }
        let lp = loss_factor(&CaptureProfile::from_fractions(p.clone())?);
        let lq = loss_factor(&CaptureProfile::from_fractions(q.clone())?);
        if !majorizes(&p, &q, 1e-12) || lp < lq - 1e-15 {
            violations += 1;
        }
    }
    Ok(violations)
}

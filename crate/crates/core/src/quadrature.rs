//! Numerical ground truth for the capture formulas: the power of a radially
//! symmetric beam falling on an offset circular aperture, by direct 2-D
//! integration.
//!
//! Nothing here touches [`crate::specfun`]. The adaptive scheme integrates in
//! polar coordinates about the aperture center,
//!
//! ```text
//! ∫₀ᴿ s ds ∫₀^{2π} I(√(d² + s² + 2ds cos θ)) dθ
//! ```
//!
//! folding the angle onto `[0, π]` by symmetry. The Monte Carlo scheme samples
//! the disk uniformly and shares no code path with it.

use std::cell::Cell;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_finite_nonneg, ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureScheme {
    PolarAdaptive,
    MonteCarlo { seed: u64, samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tolerance: f64,
    /// Interval budget for each 1-D adaptive integration.
    pub max_subdivisions: usize,
    pub scheme: QuadratureScheme,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-9,
            max_subdivisions: 200,
            scheme: QuadratureScheme::PolarAdaptive,
        }
    }
}

impl QuadratureSpec {
    pub fn monte_carlo(seed: u64, samples: usize) -> Self {
        Self {
            scheme: QuadratureScheme::MonteCarlo { seed, samples },
            ..Self::default()
        }
    }
}

/// Result of a disk integration. For Monte Carlo, `error_estimate` is the
/// standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskCapture {
    pub value: f64,
    pub error_estimate: f64,
}

/// Smallest relative tolerance an adaptive rule is asked to reach; below this
/// the error estimate is dominated by rounding.
pub const ROUNDOFF_FLOOR: f64 = 50.0 * f64::EPSILON;

/// Integrates `intensity(r)` (r measured from the beam axis) over a disk of
/// `radius` whose center sits `offset` from the axis.
pub fn disk_capture<F>(intensity: F, offset: f64, radius: f64, spec: &QuadratureSpec) -> Result<DiskCapture>
where
    F: Fn(f64) -> f64,
{
    ensure_finite_nonneg("offset", offset)?;
    ensure_positive("radius", radius)?;
    match spec.scheme {
        QuadratureScheme::PolarAdaptive => polar_adaptive(&intensity, offset, radius, spec),
        QuadratureScheme::MonteCarlo { seed, samples } => {
            monte_carlo(&intensity, offset, radius, seed, samples)
        }
    }
}

fn polar_adaptive<F>(intensity: &F, offset: f64, radius: f64, spec: &QuadratureSpec) -> Result<DiskCapture>
where
    F: Fn(f64) -> f64,
{
    if !(spec.rel_tolerance.is_finite() && spec.rel_tolerance >= ROUNDOFF_FLOOR) {
        return Err(Error::Numerical(format!(
            "relative tolerance {:e} is below the roundoff floor {:e}",
            spec.rel_tolerance, ROUNDOFF_FLOOR
        )));
    }
    if spec.max_subdivisions == 0 {
        return Err(Error::Domain("max_subdivisions must be >= 1".into()));
    }
    let inner_tol = (spec.rel_tolerance * 1e-2).max(ROUNDOFF_FLOOR);
    let inner_failure: Cell<Option<Error>> = Cell::new(None);
    // Largest angular error estimate, weighted by the radial Jacobian.
    let inner_error = Cell::new(0.0f64);
    let radial = |s: f64| -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let ring = |theta: f64| {
            let r2 = offset * offset + s * s + 2.0 * offset * s * theta.cos();
            intensity(r2.max(0.0).sqrt())
        };
        match adaptive_gauss_kronrod(ring, 0.0, PI, inner_tol, spec.max_subdivisions) {
            Ok(q) => {
                inner_error.set(inner_error.get().max(2.0 * s * q.error_estimate));
                2.0 * s * q.value
            }
            Err(e) => {
                inner_failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let outer = adaptive_gauss_kronrod(radial, 0.0, radius, spec.rel_tolerance, spec.max_subdivisions);
    if let Some(e) = inner_failure.take() {
        return Err(e);
    }
    let outer = outer?;
    Ok(DiskCapture {
        value: outer.value,
        error_estimate: outer.error_estimate + radius * inner_error.get(),
    })
}

fn monte_carlo<F>(intensity: &F, offset: f64, radius: f64, seed: u64, samples: usize) -> Result<DiskCapture>
where
    F: Fn(f64) -> f64,
{
    if samples < 2 {
        return Err(Error::Domain("Monte Carlo needs at least 2 samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for n in 1..=samples {
        let s = radius * rng.gen::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.gen::<f64>();
        let (px, py) = (offset + s * theta.cos(), s * theta.sin());
        let v = intensity((px * px + py * py).sqrt());
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
    }
    let area = PI * radius * radius;
    let variance = m2 / (samples - 1) as f64;
    Ok(DiskCapture {
        value: area * mean,
        error_estimate: area * (variance / samples as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
}

#[allow(clippy::excessive_precision)]
// Gauss-Kronrod 7/15 abscissae (non-negative half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_525,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
#[allow(clippy::excessive_precision)]
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693,
    0.279_705_391_489_276_668,
    0.381_830_050_505_118_945,
    0.417_959_183_673_469_388,
];

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Integral {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let pair = f(center - half * x) + f(center + half * x);
        kronrod += wk * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Integral {
        value: kronrod * half,
        error_estimate: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive Gauss-Kronrod 7/15 on `[a, b]`: the interval with the
/// largest error estimate is bisected until the summed estimate drops below
/// `rel_tolerance · |integral|` (or an absolute floor of `1e-300`).
pub fn adaptive_gauss_kronrod<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tolerance: f64,
    max_subdivisions: usize,
) -> Result<Integral> {
    let first = gauss_kronrod_15(&f, a, b);
    let mut intervals = vec![(a, b, first)];
    let mut total = first;
    loop {
        if !total.value.is_finite() {
            return Err(Error::Numerical(format!(
                "integrand is not finite on [{a}, {b}]"
            )));
        }
        let target = (rel_tolerance * total.value.abs()).max(1e-300);
        if total.error_estimate <= target {
            return Ok(total);
        }
        if intervals.len() >= max_subdivisions {
            return Err(Error::Numerical(format!(
                "adaptive quadrature on [{a}, {b}] reached {max_subdivisions} subdivisions with estimated error {:e} (target {target:e}, value {:e})",
                total.error_estimate, total.value
            )));
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error_estimate.total_cmp(&y.1 .2.error_estimate))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let left = gauss_kronrod_15(&f, lo, mid);
        let right = gauss_kronrod_15(&f, mid, hi);
        intervals.push((lo, mid, left));
        intervals.push((mid, hi, right));
        // Re-sum rather than update incrementally, so the total carries no drift.
        total = intervals.iter().fold(
            Integral {
                value: 0.0,
                error_estimate: 0.0,
            },
            |acc, (_, _, q)| Integral {
                value: acc.value + q.value,
                error_estimate: acc.error_estimate + q.error_estimate,
            },
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_low_degree_polynomials() {
        for deg in 0..=20 {
            let q = gauss_kronrod_15(&|x: f64| x.powi(deg), 0.0, 1.0);
            assert!((q.value - 1.0 / (deg + 1) as f64).abs() < 1e-15, "degree {deg}");
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let q = adaptive_gauss_kronrod(|x: f64| (-1e4 * (x - 0.3).powi(2)).exp(), 0.0, 1.0, 1e-12, 200).unwrap();
        let exact = (PI / 1e4).sqrt();
        assert!(((q.value - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn subdivision_budget_is_reported() {
        let err = adaptive_gauss_kronrod(|x: f64| (1.0 / x).sin(), 1e-4, 1.0, 1e-12, 4).unwrap_err();
        assert!(matches!(err, Error::Numerical(ref m) if m.contains("subdivisions")), "{err}");
    }

    #[test]
    fn tolerance_below_roundoff_is_rejected() {
        let spec = QuadratureSpec {
            rel_tolerance: 1e-14,
            ..QuadratureSpec::default()
        };
        let err = disk_capture(|_| 1.0, 0.0, 1.0, &spec).unwrap_err();
        assert!(matches!(err, Error::Numerical(ref m) if m.contains("roundoff")));
    }

    #[test]
    fn constant_intensity_gives_disk_area() {
        let q = disk_capture(|_| 1.0, 0.7, 0.4, &QuadratureSpec::default()).unwrap();
        assert!((q.value - PI * 0.16).abs() < 1e-13);
    }

    #[test]
    fn monte_carlo_is_reproducible_for_a_seed() {
        let spec = QuadratureSpec::monte_carlo(7, 10_000);
        let f = |r: f64| (-2.0 * r * r).exp();
        let a = disk_capture(f, 0.3, 0.5, &spec).unwrap();
        let b = disk_capture(f, 0.3, 0.5, &spec).unwrap();
        assert_eq!(a, b);
        assert!(a.error_estimate > 0.0);
    }
}

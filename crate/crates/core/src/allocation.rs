//! Distributing a fixed optical power over `M` PDs to maximize the
//! maximal-ratio-combined SNR. The objective Σ (R_m p_m)²/(B N₀,m) is convex
//! on the simplex, so the optimum sits on a vertex: all power on one PD.

use crate::error::{ensure_positive, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem {
    p_tot: f64,
    responsivity: Vec<f64>,
    noise_density: Vec<f64>,
    bandwidth: f64,
}

impl AllocationProblem {
    /// `m` identical PDs.
    pub fn uniform(m: usize, p_tot: f64, responsivity: f64, noise_density: f64, bandwidth: f64) -> Result<Self> {
        Self::new(p_tot, vec![responsivity; m], vec![noise_density; m], bandwidth)
    }

    pub fn new(p_tot: f64, responsivity: Vec<f64>, noise_density: Vec<f64>, bandwidth: f64) -> Result<Self> {
        if responsivity.is_empty() {
            return Err(Error::Domain("allocation needs at least one PD".into()));
        }
        if responsivity.len() != noise_density.len() {
            return Err(Error::Domain(format!(
                "{} responsivities but {} noise densities",
                responsivity.len(),
                noise_density.len()
            )));
        }
        ensure_positive("p_tot", p_tot)?;
        ensure_positive("bandwidth", bandwidth)?;
        for &r in &responsivity {
            ensure_positive("responsivity", r)?;
        }
        for &n in &noise_density {
            ensure_positive("noise_density", n)?;
        }
        Ok(Self {
            p_tot,
            responsivity,
            noise_density,
            bandwidth,
        })
    }

    pub fn m(&self) -> usize {
        self.responsivity.len()
    }

    pub fn p_tot(&self) -> f64 {
        self.p_tot
    }

    /// SNR per unit squared power of PD `i`: R²/(B N₀).
    fn gain(&self, i: usize) -> f64 {
        let r = self.responsivity[i];
        r * r / (self.bandwidth * self.noise_density[i])
    }
}

/// Combined SNR Σ (R_m p_m)²/(B N₀,m) for the power vector `powers`.
pub fn gamma_mrc(problem: &AllocationProblem, powers: &[f64]) -> Result<f64> {
    if powers.len() != problem.m() {
        return Err(Error::Domain(format!(
            "power vector has {} entries, problem has {} PDs",
            powers.len(),
            problem.m()
        )));
    }
    Ok(powers
        .iter()
        .enumerate()
        .map(|(i, &p)| problem.gain(i) * p * p)
        .sum())
}

/// All power on the PD with the largest R²/(B N₀); lowest index on ties.
pub fn optimal_allocation(problem: &AllocationProblem) -> Vec<f64> {
    let mut best = 0;
    for i in 1..problem.m() {
        if problem.gain(i) > problem.gain(best) {
            best = i;
        }
    }
    let mut out = vec![0.0; problem.m()];
    out[best] = problem.p_tot;
    out
}

pub const MAX_SEARCH_PDS: usize = 4;
pub const MAX_SEARCH_STEPS: u32 = 200;

/// Exhaustive search over every split of `p_tot` into `grid_steps` equal
/// quanta across the PDs. The first maximum in enumeration order is kept.
pub fn brute_force_allocation_search(problem: &AllocationProblem, grid_steps: u32) -> Result<(Vec<f64>, f64)> {
    if problem.m() > MAX_SEARCH_PDS {
        return Err(Error::Capacity(format!(
            "brute-force search supports at most {MAX_SEARCH_PDS} PDs, got {}",
            problem.m()
        )));
    }
    if grid_steps == 0 || grid_steps > MAX_SEARCH_STEPS {
        return Err(Error::Capacity(format!(
            "grid_steps must be in 1..={MAX_SEARCH_STEPS}, got {grid_steps}"
        )));
    }
    let quantum = problem.p_tot / grid_steps as f64;
    let mut counts = vec![0u32; problem.m()];
    let mut best: Option<(Vec<f64>, f64)> = None;
    enumerate(&mut counts, 0, grid_steps, &mut |c| {
        let powers: Vec<f64> = c.iter().map(|&k| k as f64 * quantum).collect();
        let g = gamma_mrc(problem, &powers).expect("length matches");
        if best.as_ref().is_none_or(|(_, b)| g > *b) {
            best = Some((powers, g));
        }
    });
    Ok(best.expect("at least one composition"))
}

fn enumerate(counts: &mut [u32], idx: usize, remaining: u32, visit: &mut impl FnMut(&[u32])) {
    if idx == counts.len() - 1 {
        counts[idx] = remaining;
        visit(counts);
        return;
    }
    for k in (0..=remaining).rev() {
        counts[idx] = k;
        enumerate(counts, idx + 1, remaining - k, visit);
    }
}

/// Whether `p` majorizes `q`: equal totals and every partial sum of the
/// descending-sorted `p` at least that of `q`.
pub fn majorizes(p: &[f64], q: &[f64], tol: f64) -> bool {
    if p.len() != q.len() {
        return false;
    }
    let desc = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    };
    let (p, q) = (desc(p), desc(q));
    let (mut sp, mut sq) = (0.0, 0.0);
    for (a, b) in p.iter().zip(&q) {
        sp += a;
        sq += b;
        if sp < sq - tol {
            return false;
        }
    }
    (sp - sq).abs() <= tol
}

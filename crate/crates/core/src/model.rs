//! Steady-state master-equation model of level populations, unstable fractions
//! and partial aggregates.
//!
//! All quantities are normalised by the expected network size `N`:
//!
//! * `nx[x] = N_x / N`, the expected fraction of nodes at level `x`. Influx into
//!   a level is assumed to balance the unstable outflux, so the level
//!   distribution equals the join distribution `p_min(x - 1)`.
//! * `nxus[x] = N_x^us / N_x`, the fraction of level-`x` nodes whose level is
//!   about to change.
//! * `ax[x] = A_x / N`, the expected total aggregate held at level `x`;
//!   `ax[0]` is the root's estimate of the network size over `N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the number of levels kept before truncation.
pub const MAX_LEVELS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Expected network size `N`.
    pub nodes: f64,
    /// Mean degree λ̄ of joining nodes.
    pub mean_degree: f64,
    /// Protocol cycles per node lifetime, `r = λ_g / λ_f`.
    pub ratio: f64,
    /// Levels are truncated once the join probability drops below this.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Fixed-point tolerance on the max-norm change of `ax` between sweeps.
    pub fp_tol: f64,
}

impl ModelParams {
    pub fn new(nodes: f64, mean_degree: f64, ratio: f64) -> Self {
        Self {
            nodes,
            mean_degree,
            ratio,
            epsilon: 1e-9,
            max_iter: 10_000,
            fp_tol: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.nodes >= 2.0 && self.nodes.is_finite()) {
            return bad("nodes must be a finite number >= 2");
        }
        if !(self.mean_degree > 0.0 && self.mean_degree.is_finite()) {
            return bad("mean degree must be positive and finite");
        }
        if !(self.ratio > 0.0 && self.ratio.is_finite()) {
            return bad("ratio must be positive and finite");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in (0, 1)");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        if self.fp_tol.is_nan() || self.fp_tol <= 0.0 {
            return bad("fixed-point tolerance must be positive");
        }
        Ok(())
    }
}

/// Per-level model quantities for levels `0..=x_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelProfile {
    /// `pmin[x] = p_min(x - 1)` for `x >= 1`; `pmin[0] = 1 / N` is the root's own mass.
    pub pmin: Vec<f64>,
    pub nx: Vec<f64>,
    pub nxus: Vec<f64>,
    /// `1 - Σ nx`: mass at truncated levels and at level `∞`. Can be slightly
    /// negative for dense graphs, where the large-`N` join law overshoots by `O(1/N)`.
    pub residual: f64,
}

impl LevelProfile {
    pub fn x_max(&self) -> usize {
        self.nx.len() - 1
    }

    /// `S_j = Σ_{i <= j} nx[i]`, with `S_j = 0` for `j < 0`.
    fn cumulative(&self) -> Vec<f64> {
        self.nx
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSolution {
    pub profile: LevelProfile,
    pub ax: Vec<f64>,
    pub a0: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm change of the final sweep.
    pub last_delta: f64,
}

/// Level distribution from the join law.
///
/// With Poisson(λ̄) degrees the k-average of the join probability has the closed
/// form `p_min(x - 1) = exp(-λ̄ S_{x-2}) - exp(-λ̄ S_{x-1})`.
pub fn pmin_profile(p: &ModelParams) -> Result<LevelProfile> {
    p.validate()?;
    let lam = p.mean_degree;
    let root = 1.0 / p.nodes;
    let mut nx = vec![root];
    // exp(-λ̄ S_{x-2}) and exp(-λ̄ S_{x-1}) for the level about to be added.
    let mut tail_prev = 1.0;
    let mut s = root;
    loop {
        let tail = (-lam * s).exp();
        let pm = tail_prev - tail;
        let x = nx.len();
        // Early levels grow geometrically from 1/N; only truncate past the bulk.
        if pm < p.epsilon && x >= 2 && pm <= nx[x - 1] {
            break;
        }
        if x > MAX_LEVELS {
            return Err(Error::Truncation { cap: MAX_LEVELS });
        }
        nx.push(pm);
        s += pm;
        tail_prev = tail;
    }
    let residual = 1.0 - nx.iter().sum::<f64>();
    Ok(LevelProfile {
        pmin: nx.clone(),
        nxus: vec![0.0; nx.len()],
        nx,
        residual,
    })
}

/// Fills `nxus` by the forward recursion over levels `x >= 2`.
///
/// Levels 0 and 1 are never unstable. For higher levels the unstable fraction
/// balances failure and update outflux against three sources: the single link
/// to level `x - 1` failing or turning unstable (`D`), a joinee offering a
/// shorter route (`E`), and an unstable neighbour offering one after its own
/// update (`F`):
///
/// `nxus[x] = (D + E + F) / (1 + D + E)`.
pub fn nxus_profile(mut prof: LevelProfile, p: &ModelParams) -> LevelProfile {
    let lam = p.mean_degree;
    let n = p.nodes;
    let r = p.ratio;
    let x_max = prof.x_max();
    let cum = prof.cumulative();
    let s_at = |j: isize| if j < 0 { 0.0 } else { cum[j as usize] };
    let e_tail = |j: isize| (-lam * s_at(j)).exp();
    let nx = prof.nx.clone();
    let mut us = vec![0.0; x_max + 1];

    for x in 2..=x_max {
        let xi = x as isize;
        if nx[x] <= 0.0 {
            continue;
        }
        // Fraction of level-x nodes with exactly one link to level x - 1.
        let alpha = lam * nx[x - 1] / nx[x] * e_tail(xi - 1);
        let d = alpha / (1.0 + r) * (1.0 + r * us[x - 1]);

        // Joinees whose best level is 0..=x-3 attaching to a level-x node.
        let via_root = lam * lam / n * (-lam / n).exp();
        let via_deeper = if x >= 4 {
            e_tail(0) - e_tail(xi - 3)
        } else {
            0.0
        };
        let e = (via_root + lam * via_deeper) / (1.0 + r);

        // Mean number of non-parent neighbours of a level-x node.
        let deg = lam * (1.0 - s_at(xi - 2)).max(0.0) * e_tail(xi - 2)
            - lam * (1.0 - s_at(xi - 1)).max(0.0) * e_tail(xi - 1)
            - lam * nx[x - 1] * e_tail(xi - 1);
        let lambda_x = (deg / nx[x]).max(0.0);
        let unstable_mass: f64 = (2..x.saturating_sub(1)).map(|i| us[i] * nx[i]).sum();
        let f = r / (1.0 + r) * lambda_x * unstable_mass;

        us[x] = ((d + e + f) / (1.0 + d + e)).clamp(0.0, 1.0);
    }
    prof.nxus = us;
    prof
}

/// Solves the self-consistent aggregate recursion starting from `ax = pmin`.
pub fn solve_ax(prof: LevelProfile, p: &ModelParams) -> ModelSolution {
    let init = prof.pmin.clone();
    solve_ax_from(prof, p, &init)
}

/// Solves the aggregate recursion from an arbitrary initial iterate.
///
/// For `x >= 1`:
///
/// `a_x = p_min(x-1) + r/(r+1) [ a_{x+1} s_x s_{x+1} + (N_x^us/N) Σ_{x' ∉ {0,1,x}} (a_{x'} - p_min(x'-1)) ]`
///
/// with `s_x = 1 - nxus[x]` and `a_{x_max+1} = 0`. The root never fails, so its
/// aggregate is always the last refresh: `a_0 = 1/N + a_1 s_1`.
///
/// Each iteration is a backward sweep; the chain term uses the value just
/// computed for `x + 1` while the global sum uses the previous iterate.
pub fn solve_ax_from(prof: LevelProfile, p: &ModelParams, init: &[f64]) -> ModelSolution {
    let x_max = prof.x_max();
    assert_eq!(
        init.len(),
        x_max + 1,
        "initial iterate has the wrong length"
    );
    let damp = 1.0 / (1.0 + 1.0 / p.ratio);
    let stable: Vec<f64> = prof.nxus.iter().map(|u| 1.0 - u).collect();
    let excess = |a: &[f64], x: usize| a[x] - prof.pmin[x];

    let mut prev = init.to_vec();
    let mut next = vec![0.0; x_max + 1];
    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    while iterations < p.max_iter {
        iterations += 1;
        let total: f64 = (2..=x_max).map(|x| excess(&prev, x)).sum();
        let mut above = 0.0;
        let mut above_stable = 1.0;
        for x in (1..=x_max).rev() {
            let others = if x >= 2 {
                total - excess(&prev, x)
            } else {
                total
            };
            let unstable_mass = prof.nxus[x] * prof.nx[x];
            next[x] =
                prof.pmin[x] + damp * (above * stable[x] * above_stable + unstable_mass * others);
            above = next[x];
            above_stable = stable[x];
        }
        next[0] = prof.pmin[0] + next.get(1).copied().unwrap_or(0.0) * stable[0] * above_stable;
        delta = next
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut prev, &mut next);
        if delta <= p.fp_tol {
            break;
        }
    }
    ModelSolution {
        a0: prev[0],
        ax: prev,
        profile: prof,
        iterations,
        converged: delta <= p.fp_tol,
        last_delta: delta,
    }
}

/// Full model evaluation: level profile, unstable fractions, aggregates.
pub fn predict(p: &ModelParams) -> Result<ModelSolution> {
    let prof = pmin_profile(p)?;
    let prof = nxus_profile(prof, p);
    Ok(solve_ax(prof, p))
}

/// Like [`predict`], but a non-converged fixed point is an error.
pub fn predict_converged(p: &ModelParams) -> Result<ModelSolution> {
    let sol = predict(p)?;
    if sol.converged {
        Ok(sol)
    } else {
        Err(Error::NotConverged {
            iterations: sol.iterations,
            last_delta: sol.last_delta,
        })
    }
}

//! Differential evolution operators: donor construction, binomial crossover
//! and greedy one-to-one survivor selection.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::Genome;

pub const DEFAULT_F: f64 = 0.8;
pub const DEFAULT_CR: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// `x_r1 + F (x_r2 - x_r3)`
    #[default]
    Rand1,
    /// `x_r1 + F (x_r2 - x_r3) + F (x_r4 - x_r5)`
    Rand2,
    /// `best + F (x_r1 - x_r2)`
    Best1,
    /// `best + F (x_r1 - x_r2) + F (x_r3 - x_r4)`
    Best2,
    /// `x_i + F (best - x_r1) + F (x_r2 - x_r3)`
    CurrentToBest,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Rand1 => "DE/rand/1",
            Strategy::Rand2 => "DE/rand/2",
            Strategy::Best1 => "DE/best/1",
            Strategy::Best2 => "DE/best/2",
            Strategy::CurrentToBest => "DE/current-to-best",
        }
    }

    /// Number of distinct random members (all different from the target) used.
    pub fn random_members(self) -> usize {
        match self {
            Strategy::Rand1 | Strategy::CurrentToBest => 3,
            Strategy::Rand2 => 5,
            Strategy::Best1 => 2,
            Strategy::Best2 => 4,
        }
    }

    pub fn min_population(self) -> usize {
        match self {
            Strategy::Rand2 | Strategy::Best2 => 6,
            _ => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeParams {
    pub strategy: Strategy,
    pub f_scale: f64,
    pub cr: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams {
            strategy: Strategy::Rand1,
            f_scale: DEFAULT_F,
            cr: DEFAULT_CR,
        }
    }
}

impl DeParams {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(0.0..=2.0).contains(&self.f_scale) {
            out.push(format!("de.f = {} violates F ∈ [0,2]", self.f_scale));
        }
        if !(self.cr > 0.0 && self.cr <= 1.0) {
            out.push(format!("de.cr = {} violates CR ∈ (0,1]", self.cr));
        }
        out
    }
}

/// Draws `k` distinct indices from `0..np`, all different from `exclude`,
/// by rejection.
pub fn sample_distinct<R: Rng + ?Sized>(
    np: usize,
    exclude: usize,
    k: usize,
    rng: &mut R,
) -> Vec<usize> {
    debug_assert!(k < np);
    let mut picked = Vec::with_capacity(k);
    while picked.len() < k {
        let r = rng.random_range(0..np);
        if r != exclude && !picked.contains(&r) {
            picked.push(r);
        }
    }
    picked
}

pub fn donor<R: Rng + ?Sized>(
    strategy: Strategy,
    population: &[Genome],
    target: usize,
    global_best: &[f64],
    f_scale: f64,
    rng: &mut R,
) -> Result<Genome> {
    let np = population.len();
    if np < strategy.min_population() {
        return Err(Error::PopulationTooSmall {
            strategy: strategy.name(),
            required: strategy.min_population(),
            actual: np,
        });
    }
    let len = population[target].len();
    if global_best.len() != len {
        return Err(Error::DimensionMismatch {
            what: "global best",
            expected: len,
            actual: global_best.len(),
        });
    }
    let r = sample_distinct(np, target, strategy.random_members(), rng);
    Ok(donor_from_indices(
        strategy,
        population,
        target,
        global_best,
        f_scale,
        &r,
    ))
}

/// Donor for explicitly chosen random members `r`.
pub fn donor_from_indices(
    strategy: Strategy,
    population: &[Genome],
    target: usize,
    global_best: &[f64],
    f: f64,
    r: &[usize],
) -> Genome {
    let x = |k: usize, j: usize| population[r[k]][j];
    let current = &population[target];
    let v = (0..current.len())
        .map(|j| match strategy {
            Strategy::Rand1 => x(0, j) + f * (x(1, j) - x(2, j)),
            Strategy::Rand2 => x(0, j) + f * (x(1, j) - x(2, j)) + f * (x(3, j) - x(4, j)),
            Strategy::Best1 => global_best[j] + f * (x(0, j) - x(1, j)),
            Strategy::Best2 => global_best[j] + f * (x(0, j) - x(1, j)) + f * (x(2, j) - x(3, j)),
            Strategy::CurrentToBest => {
                current[j] + f * (global_best[j] - x(0, j)) + f * (x(1, j) - x(2, j))
            }
        })
        .collect();
    Genome::new(v)
}

/// Per component, takes the donor gene when `U[0,1) <= cr`. No component is
/// forced to come from the donor.
pub fn binomial_crossover<R: Rng + ?Sized>(
    target: &[f64],
    donor: &[f64],
    cr: f64,
    rng: &mut R,
) -> Result<Genome> {
    if donor.len() != target.len() {
        return Err(Error::DimensionMismatch {
            what: "donor",
            expected: target.len(),
            actual: donor.len(),
        });
    }
    let trial = target
        .iter()
        .zip(donor)
        .map(|(&t, &d)| if rng.random::<f64>() <= cr { d } else { t })
        .collect();
    Ok(Genome::new(trial))
}

/// The trial replaces the target only on strict improvement.
pub fn de_select(
    target: Genome,
    trial: Genome,
    target_fitness: f64,
    trial_fitness: f64,
) -> (Genome, bool) {
    if trial_fitness > target_fitness {
        (trial, true)
    } else {
        (target, false)
    }
}

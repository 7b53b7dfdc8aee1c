//! Genetic algorithm operators.
//!
//! Per individual and generation: optional replacement by a fresh random
//! genome (roulette or tournament), uniform crossover against one random
//! partner, then per-gene mutation.
//!
//! The roulette replacement probability defaults to an inverse-fitness rule,
//! `(S - f_i) / ((NP - 1) S)` with `S = sum f`, so fitter individuals are
//! replaced less often. The proportional rule `f_i / S` is available through
//! [`GaParams::literal_roulette`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::Genome;

pub const DEFAULT_CR: f64 = 0.5;
pub const DEFAULT_MUTATION_RATE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    FitnessProportionate,
    #[default]
    Tournament,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    #[default]
    RandomSubstitution,
    RandomInterchange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub selection: Selection,
    pub mutation: Mutation,
    pub cr: f64,
    pub p_m: f64,
    pub literal_roulette: bool,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            selection: Selection::Tournament,
            mutation: Mutation::RandomSubstitution,
            cr: DEFAULT_CR,
            p_m: DEFAULT_MUTATION_RATE,
            literal_roulette: false,
        }
    }
}

impl GaParams {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.cr > 0.0 && self.cr <= 1.0) {
            out.push(format!("ga.cr = {} violates CR ∈ (0,1]", self.cr));
        }
        if !(0.0..=1.0).contains(&self.p_m) {
            out.push(format!("ga.p_m = {} violates p_m ∈ [0,1]", self.p_m));
        }
        out
    }
}

/// Probability that individual `i` is replaced under roulette selection.
/// Falls back to `1/NP` when every fitness is zero.
pub fn replacement_probability(i: usize, fitness: &[f64], literal: bool) -> f64 {
    let np = fitness.len();
    let total: f64 = fitness.iter().sum();
    if total <= 0.0 {
        return 1.0 / np as f64;
    }
    if literal {
        fitness[i] / total
    } else if np < 2 {
        0.0
    } else {
        ((total - fitness[i]) / ((np - 1) as f64 * total)).clamp(0.0, 1.0)
    }
}

/// Uniform index in `0..np` other than `exclude`.
pub fn other_index<R: Rng + ?Sized>(np: usize, exclude: usize, rng: &mut R) -> usize {
    let r = rng.random_range(0..np - 1);
    if r >= exclude {
        r + 1
    } else {
        r
    }
}

pub fn select_replace<R: Rng + ?Sized>(
    i: usize,
    fitness: &[f64],
    params: &GaParams,
    rng: &mut R,
) -> bool {
    match params.selection {
        Selection::FitnessProportionate => {
            rng.random::<f64>() < replacement_probability(i, fitness, params.literal_roulette)
        }
        Selection::Tournament => {
            let opponent = other_index(fitness.len(), i, rng);
            fitness[i] < fitness[opponent]
        }
    }
}

pub fn ga_crossover<R: Rng + ?Sized>(
    individual: &[f64],
    partner: &[f64],
    cr: f64,
    rng: &mut R,
) -> Result<Genome> {
    if partner.len() != individual.len() {
        return Err(Error::DimensionMismatch {
            what: "crossover partner",
            expected: individual.len(),
            actual: partner.len(),
        });
    }
    Ok(individual
        .iter()
        .zip(partner)
        .map(|(&own, &other)| {
            if rng.random::<f64>() <= cr {
                other
            } else {
                own
            }
        })
        .collect::<Vec<_>>()
        .into())
}

pub fn mutate_substitution<R: Rng + ?Sized>(
    genome: &[f64],
    p_m: f64,
    pop_min: f64,
    pop_max: f64,
    rng: &mut R,
) -> Genome {
    genome
        .iter()
        .map(|&gene| {
            if rng.random::<f64>() < p_m {
                let u: f64 = rng.random();
                (pop_min + u * (pop_max - pop_min)).clamp(pop_min, pop_max)
            } else {
                gene
            }
        })
        .collect::<Vec<_>>()
        .into()
}

pub fn mutate_interchange<R: Rng + ?Sized>(genome: &[f64], p_m: f64, rng: &mut R) -> Genome {
    let mut out = genome.to_vec();
    let n = out.len();
    if n < 2 {
        return out.into();
    }
    for j in 0..n {
        if rng.random::<f64>() < p_m {
            let k = rng.random_range(0..n);
            out.swap(j, k);
        }
    }
    out.into()
}

/// Smallest and largest gene over the whole population.
pub fn gene_range<'a>(population: impl IntoIterator<Item = &'a Genome>) -> (f64, f64) {
    population
        .into_iter()
        .flat_map(|g| g.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        })
}

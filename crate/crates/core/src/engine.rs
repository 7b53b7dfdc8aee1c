//! Generation loop shared by the three optimizers.
//!
//! Every generation runs in three phases:
//!
//! 1. serial: snapshot the population and compute whatever global values the
//!    operators need (global best, fitness sum, gene range);
//! 2. parallel: one task per member applies its operators to the snapshot,
//!    drawing from its own keyed random stream, and evaluates fitness;
//! 3. serial: results are committed in member order, the best-so-far archive
//!    is updated and statistics are recorded.
//!
//! Because each task only reads the snapshot and its own stream, the outcome
//! is identical for any worker count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::de::{self, DeParams};
use crate::error::{Error, Result};
use crate::ga::{self, GaParams};
use crate::mlp::{Genome, Network, Topology};
use crate::pso::{self, Particle, PsoParams};
use crate::rng::{rng_stream, Purpose, Stream};
use crate::trace::{TraceEvent, TraceSink, Tracer};

pub const MIN_POPULATION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Algorithm {
    Pso(PsoParams),
    De(DeParams),
    Ga(GaParams),
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Pso(_) => "pso",
            Algorithm::De(_) => "de",
            Algorithm::Ga(_) => "ga",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    #[default]
    BestFitness,
    WorstFitness,
    MeanFitness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub statistic: Statistic,
    pub threshold: f64,
    pub max_iterations: usize,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            statistic: Statistic::BestFitness,
            threshold: 1.0,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// The chosen statistic reached the threshold `K`.
    Threshold,
    /// `T_max` generations were executed.
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub topology: Topology,
    pub population_size: usize,
    pub stopping: StoppingRule,
    pub seed: u64,
    pub workers: usize,
    pub init_range: (f64, f64),
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, topology: Topology) -> Self {
        RunConfig {
            algorithm,
            topology,
            population_size: 50,
            stopping: StoppingRule::default(),
            seed: 0,
            workers: 1,
            init_range: (-1.0, 1.0),
        }
    }

    /// Every violated bound, empty when the configuration is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.topology.validate() {
            out.push(e.to_string());
        }
        let min_np = match self.algorithm {
            Algorithm::De(p) => p.strategy.min_population(),
            _ => MIN_POPULATION,
        };
        if self.population_size < min_np {
            out.push(format!(
                "population_size = {} is below the minimum of {min_np} for this algorithm",
                self.population_size
            ));
        }
        if self.workers == 0 {
            out.push("workers must be at least 1".into());
        }
        let (lo, hi) = self.init_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            out.push(format!("init_range = ({lo}, {hi}) requires low < high"));
        }
        let k = self.stopping.threshold;
        if !(k > 0.0 && k <= 1.0) {
            out.push(format!("threshold = {k} violates K ∈ (0,1]"));
        }
        out.extend(match &self.algorithm {
            Algorithm::Pso(p) => p.violations(),
            Algorithm::De(p) => p.violations(),
            Algorithm::Ga(p) => p.violations(),
        });
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

/// Fraction of rows whose predicted class equals the label.
pub fn evaluate_fitness(genome: &[f64], topology: &Topology, dataset: &Dataset) -> Result<f64> {
    if dataset.rows() == 0 {
        return Err(Error::EmptyDataset { rows: 0 });
    }
    let mut net = Network::new(topology, genome)?;
    let mut correct = 0usize;
    for (x, &y) in dataset.features.iter().zip(&dataset.labels) {
        if net.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.rows() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Members {
    Swarm(Vec<Particle>),
    Genomes(Vec<Genome>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestArchive {
    pub genome: Genome,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Members,
    /// Fitness of each member's current genome (PSO: current position).
    pub fitness: Vec<f64>,
    /// Whether each member was replaced in the last generation (DE: trial
    /// survived; GA: selection inserted a fresh genome).
    pub replaced: Vec<bool>,
    pub generation: usize,
    pub best: BestArchive,
}

impl Population {
    pub fn len(&self) -> usize {
        self.fitness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fitness.is_empty()
    }

    pub fn genome(&self, i: usize) -> &Genome {
        match &self.members {
            Members::Swarm(ps) => &ps[i].position,
            Members::Genomes(gs) => &gs[i],
        }
    }

    pub fn genomes(&self) -> Vec<&Genome> {
        (0..self.len()).map(|i| self.genome(i)).collect()
    }

    pub fn particles(&self) -> Option<&[Particle]> {
        match &self.members {
            Members::Swarm(ps) => Some(ps),
            Members::Genomes(_) => None,
        }
    }

    pub fn stats(&self) -> GenerationStats {
        let worst = self.fitness.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = self.fitness.iter().sum::<f64>() / self.len() as f64;
        GenerationStats {
            generation: self.generation,
            best: self.best.fitness,
            worst,
            mean,
        }
    }

    /// Replaces the archive when some member strictly beats it; lowest index
    /// wins ties among members.
    fn absorb_best(&mut self) {
        let mut lead: Option<usize> = None;
        for (i, &f) in self.fitness.iter().enumerate() {
            let bar = lead.map_or(self.best.fitness, |j| self.fitness[j]);
            if f > bar {
                lead = Some(i);
            }
        }
        if let Some(i) = lead {
            self.best = BestArchive {
                genome: self.genome(i).clone(),
                fitness: self.fitness[i],
            };
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub worst: f64,
    pub mean: f64,
}

pub fn should_stop(population: &Population, rule: &StoppingRule) -> Option<StopReason> {
    let stats = population.stats();
    let value = match rule.statistic {
        Statistic::BestFitness => stats.best,
        Statistic::WorstFitness => stats.worst,
        Statistic::MeanFitness => stats.mean,
    };
    if value >= rule.threshold {
        Some(StopReason::Threshold)
    } else if population.generation >= rule.max_iterations {
        Some(StopReason::MaxIterations)
    } else {
        None
    }
}

fn random_genome(len: usize, (lo, hi): (f64, f64), rng: &mut Stream) -> Genome {
    (0..len)
        .map(|_| rng.random_range(lo..hi))
        .collect::<Vec<_>>()
        .into()
}

pub struct Engine<'a> {
    config: RunConfig,
    dataset: &'a Dataset,
    pool: rayon::ThreadPool,
    population: Population,
    history: Vec<GenerationStats>,
    evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub best: Genome,
    pub best_fitness: f64,
    pub history: Vec<GenerationStats>,
    pub stopped_by: StopReason,
    pub generations: usize,
    pub evaluations: usize,
}

impl<'a> Engine<'a> {
    /// Validates the configuration against the dataset, then draws and
    /// evaluates the initial population.
    pub fn new(config: RunConfig, dataset: &'a Dataset) -> Result<Self> {
        config.validate()?;
        if config.topology.input_dim != dataset.feature_count() {
            return Err(Error::DimensionMismatch {
                what: "dataset features",
                expected: config.topology.input_dim,
                actual: dataset.feature_count(),
            });
        }
        if let Some(&label) = dataset
            .labels
            .iter()
            .find(|&&l| l >= config.topology.output_dim)
        {
            return Err(Error::LabelOutOfRange {
                label,
                classes: config.topology.output_dim,
            });
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))?;

        let population = init_population(&config, dataset, &pool)?;
        let np = population.len();
        let history = vec![population.stats()];
        Ok(Engine {
            config,
            dataset,
            pool,
            population,
            history,
            evaluations: np,
        })
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn history(&self) -> &[GenerationStats] {
        &self.history
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        should_stop(&self.population, &self.config.stopping)
    }

    /// Runs one generation regardless of the stopping rule.
    pub fn step(&mut self) -> Result<()> {
        let generation = self.population.generation;
        let result = match self.config.algorithm {
            Algorithm::Pso(params) => self.step_pso(&params),
            Algorithm::De(params) => self.step_de(&params),
            Algorithm::Ga(params) => self.step_ga(&params),
        };
        result.map_err(|e| Error::Generation {
            generation,
            source: Box::new(e),
        })?;
        self.population.generation += 1;
        self.population.absorb_best();
        self.evaluations += self.population.len();
        self.history.push(self.population.stats());
        Ok(())
    }

    fn map_members<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        let np = self.population.len();
        self.pool
            .install(|| (0..np).into_par_iter().map(f).collect::<Result<Vec<T>>>())
    }

    fn step_pso(&mut self, params: &PsoParams) -> Result<()> {
        let t = self.population.generation;
        let t_max = self.config.stopping.max_iterations;
        let seed = self.config.seed;
        let (topology, dataset) = (&self.config.topology, self.dataset);
        let gbest = &self.population.best;
        let Members::Swarm(swarm) = &self.population.members else {
            unreachable!("PSO population holds particles");
        };
        let results = self.map_members(|i| {
            let mut rng = rng_stream(seed, t, i, Purpose::PsoUpdate);
            let moved = pso::pso_update(&swarm[i], &gbest.genome, params, t, t_max, &mut rng)?;
            let fitness = evaluate_fitness(&moved.position, topology, dataset)?;
            let (particle, _) = pso::pso_post_evaluate(moved, fitness, gbest.fitness);
            Ok((particle, fitness))
        })?;
        let (particles, fitness): (Vec<_>, Vec<_>) = results.into_iter().unzip();
        self.population.members = Members::Swarm(particles);
        self.population.fitness = fitness;
        self.population.replaced = vec![false; self.population.len()];
        Ok(())
    }

    fn step_de(&mut self, params: &DeParams) -> Result<()> {
        let t = self.population.generation;
        let seed = self.config.seed;
        let (topology, dataset) = (&self.config.topology, self.dataset);
        let gbest = &self.population.best.genome;
        let fitness = &self.population.fitness;
        let Members::Genomes(genomes) = &self.population.members else {
            unreachable!("DE population holds genomes");
        };
        let results = self.map_members(|i| {
            let mut rng = rng_stream(seed, t, i, Purpose::DeDonor);
            let v = de::donor(params.strategy, genomes, i, gbest, params.f_scale, &mut rng)?;
            let mut rng = rng_stream(seed, t, i, Purpose::DeCrossover);
            let trial = de::binomial_crossover(&genomes[i], &v, params.cr, &mut rng)?;
            let trial_fitness = evaluate_fitness(&trial, topology, dataset)?;
            let (survivor, replaced) =
                de::de_select(genomes[i].clone(), trial, fitness[i], trial_fitness);
            let f = if replaced { trial_fitness } else { fitness[i] };
            Ok((survivor, f, replaced))
        })?;
        self.commit_genomes(results);
        Ok(())
    }

    fn step_ga(&mut self, params: &GaParams) -> Result<()> {
        let t = self.population.generation;
        let seed = self.config.seed;
        let init_range = self.config.init_range;
        let (topology, dataset) = (&self.config.topology, self.dataset);
        let fitness = &self.population.fitness;
        let Members::Genomes(genomes) = &self.population.members else {
            unreachable!("GA population holds genomes");
        };
        let np = genomes.len();
        let (pop_min, pop_max) = ga::gene_range(genomes);
        let results = self.map_members(|i| {
            let mut rng = rng_stream(seed, t, i, Purpose::GaSelection);
            let replaced = ga::select_replace(i, fitness, params, &mut rng);
            let own = if replaced {
                let mut rng = rng_stream(seed, t, i, Purpose::GaReplacement);
                random_genome(genomes[i].len(), init_range, &mut rng)
            } else {
                genomes[i].clone()
            };
            let mut rng = rng_stream(seed, t, i, Purpose::GaCrossover);
            let partner = ga::other_index(np, i, &mut rng);
            let child = ga::ga_crossover(&own, &genomes[partner], params.cr, &mut rng)?;
            let mut rng = rng_stream(seed, t, i, Purpose::GaMutation);
            let child = match params.mutation {
                ga::Mutation::RandomSubstitution => {
                    ga::mutate_substitution(&child, params.p_m, pop_min, pop_max, &mut rng)
                }
                ga::Mutation::RandomInterchange => {
                    ga::mutate_interchange(&child, params.p_m, &mut rng)
                }
            };
            let f = evaluate_fitness(&child, topology, dataset)?;
            Ok((child, f, replaced))
        })?;
        self.commit_genomes(results);
        Ok(())
    }

    fn commit_genomes(&mut self, results: Vec<(Genome, f64, bool)>) {
        let mut genomes = Vec::with_capacity(results.len());
        let mut fitness = Vec::with_capacity(results.len());
        let mut replaced = Vec::with_capacity(results.len());
        for (g, f, r) in results {
            genomes.push(g);
            fitness.push(f);
            replaced.push(r);
        }
        self.population.members = Members::Genomes(genomes);
        self.population.fitness = fitness;
        self.population.replaced = replaced;
    }

    /// One trace event per member for the current generation.
    pub fn trace_events(&self, tracer: &Tracer) -> Result<Vec<TraceEvent>> {
        let pop = &self.population;
        (0..pop.len())
            .map(|i| {
                let (x, y) = tracer.basis().project(pop.genome(i))?;
                Ok(match pop.particles() {
                    Some(ps) => TraceEvent::particle(
                        pop.generation,
                        i,
                        x,
                        y,
                        pop.fitness[i],
                        ps[i].personal_best_fitness,
                    ),
                    None => TraceEvent::candidate(
                        pop.generation,
                        i,
                        x,
                        y,
                        pop.fitness[i],
                        pop.replaced[i],
                    ),
                })
            })
            .collect()
    }

    pub fn into_outcome(self) -> RunOutcome {
        let stopped_by = self.stop_reason().unwrap_or(StopReason::MaxIterations);
        RunOutcome {
            best: self.population.best.genome,
            best_fitness: self.population.best.fitness,
            generations: self.population.generation,
            history: self.history,
            stopped_by,
            evaluations: self.evaluations,
        }
    }
}

/// Draws and evaluates the initial population. Member `i` takes its genome
/// (and PSO velocity) from its own initialization stream.
pub fn init_population(
    config: &RunConfig,
    dataset: &Dataset,
    pool: &rayon::ThreadPool,
) -> Result<Population> {
    let np = config.population_size;
    let len = config.topology.genome_length();
    let (lo, hi) = config.init_range;
    let half_width = (hi - lo) / 4.0;
    let is_pso = matches!(config.algorithm, Algorithm::Pso(_));

    let drawn: Vec<(Genome, Option<Vec<f64>>, f64)> = pool.install(|| {
        (0..np)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_stream(config.seed, 0, i, Purpose::Init);
                let genome = random_genome(len, config.init_range, &mut rng);
                let velocity = is_pso.then(|| {
                    (0..len)
                        .map(|_| rng.random_range(-half_width..half_width))
                        .collect()
                });
                let fitness = evaluate_fitness(&genome, &config.topology, dataset)?;
                Ok((genome, velocity, fitness))
            })
            .collect::<Result<_>>()
    })?;

    let fitness: Vec<f64> = drawn.iter().map(|d| d.2).collect();
    let members = if is_pso {
        Members::Swarm(
            drawn
                .into_iter()
                .map(|(g, v, f)| Particle::new(g, v.unwrap_or_default(), f))
                .collect(),
        )
    } else {
        Members::Genomes(drawn.into_iter().map(|(g, _, _)| g).collect())
    };
    let mut population = Population {
        members,
        fitness,
        replaced: vec![false; np],
        generation: 0,
        best: BestArchive {
            genome: Genome::zeros(len),
            fitness: f64::NEG_INFINITY,
        },
    };
    population.absorb_best();
    Ok(population)
}

/// Runs to completion. When a trace sink is supplied, a projection basis is
/// fitted on generation 0 and one event per member per generation is emitted.
pub fn run(
    config: &RunConfig,
    dataset: &Dataset,
    trace: Option<&mut dyn TraceSink>,
) -> Result<RunOutcome> {
    let mut engine = Engine::new(config.clone(), dataset)?;
    let mut tracer = match trace {
        Some(sink) => Some(Tracer::new(sink, &engine.population().genomes())?),
        None => None,
    };
    if let Some(tracer) = tracer.as_mut() {
        let events = engine.trace_events(tracer)?;
        tracer.record(&events)?;
    }
    while engine.stop_reason().is_none() {
        engine.step()?;
        if let Some(tracer) = tracer.as_mut() {
            let events = engine.trace_events(tracer)?;
            tracer.record(&events)?;
        }
    }
    Ok(engine.into_outcome())
}

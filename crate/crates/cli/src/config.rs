//! JSON run configuration with `--set key=value` overrides.
//!
//! Every field has a default, so `{}` is a valid configuration. Unknown keys
//! are rejected at every level.

use std::path::PathBuf;

use serde::Deserialize;
use serde_json::Value;

use evomlp::data::{MissingPolicy, PreprocessPolicy, TransformKind};
use evomlp::de::{DeParams, Strategy};
use evomlp::engine::{Algorithm, Statistic, StoppingRule};
use evomlp::ga::{GaParams, Mutation, Selection};
use evomlp::pso::{Inertia, PsoParams};
use evomlp::{Activation, RunConfig, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    Pso,
    #[default]
    De,
    Ga,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopStatistic {
    #[default]
    Best,
    Worst,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InertiaKind {
    Constant,
    #[default]
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoSection {
    pub phi_p: f64,
    pub phi_g: f64,
    pub inertia: InertiaKind,
    /// Used by `constant`.
    pub w: f64,
    /// Used by `linear` and `nonlinear`.
    pub w_start: f64,
    pub w_end: f64,
}

impl Default for PsoSection {
    fn default() -> Self {
        PsoSection {
            phi_p: evomlp::pso::DEFAULT_PHI,
            phi_g: evomlp::pso::DEFAULT_PHI,
            inertia: InertiaKind::Linear,
            w: evomlp::pso::DEFAULT_CONSTANT_INERTIA,
            w_start: evomlp::pso::DEFAULT_INERTIA_START,
            w_end: evomlp::pso::DEFAULT_INERTIA_END,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeSection {
    pub strategy: Strategy,
    pub f: f64,
    pub cr: f64,
}

impl Default for DeSection {
    fn default() -> Self {
        DeSection {
            strategy: Strategy::Rand1,
            f: evomlp::de::DEFAULT_F,
            cr: evomlp::de::DEFAULT_CR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionKind {
    Roulette,
    #[default]
    Tournament,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    #[default]
    Substitution,
    Interchange,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaSection {
    pub selection: SelectionKind,
    pub mutation: MutationKind,
    pub cr: f64,
    pub p_m: f64,
    pub literal_roulette: bool,
}

impl Default for GaSection {
    fn default() -> Self {
        GaSection {
            selection: SelectionKind::Tournament,
            mutation: MutationKind::Substitution,
            cr: evomlp::ga::DEFAULT_CR,
            p_m: evomlp::ga::DEFAULT_MUTATION_RATE,
            literal_roulette: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub algorithm: AlgorithmKind,
    pub label_column: String,
    pub missing: MissingPolicy,
    pub transform: TransformKind,
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    pub population_size: usize,
    pub max_iterations: usize,
    pub threshold: f64,
    pub stop_statistic: StopStatistic,
    pub seed: u64,
    /// `None` means one worker per available core.
    pub workers: Option<usize>,
    pub init_range: (f64, f64),
    pub trace: Option<PathBuf>,
    pub pso: PsoSection,
    pub de: DeSection,
    pub ga: GaSection,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            algorithm: AlgorithmKind::De,
            label_column: "label".into(),
            missing: MissingPolicy::DropRow,
            transform: TransformKind::None,
            hidden_layers: vec![4],
            activation: Activation::Tanh,
            population_size: 50,
            max_iterations: 200,
            threshold: 1.0,
            stop_statistic: StopStatistic::Best,
            seed: 0,
            workers: None,
            init_range: (-1.0, 1.0),
            trace: None,
            pso: PsoSection::default(),
            de: DeSection::default(),
            ga: GaSection::default(),
        }
    }
}

/// Sets `key` (dot-separated path, e.g. `de.cr`) to `raw`. The value is read
/// as JSON when it parses, otherwise as a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), String> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override `{assignment}` is not of the form key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    let mut node = root;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(format!("override key `{key}` has an empty component"));
        }
        let map = match node {
            Value::Object(map) => map,
            _ => {
                return Err(format!(
                    "override key `{key}`: `{part}` is not inside an object"
                ))
            }
        };
        if parts.peek().is_none() {
            map.insert(part.to_owned(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_owned())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

pub fn parse_config(text: Option<&str>, overrides: &[String]) -> Result<CliConfig, Vec<String>> {
    let mut root = match text {
        Some(t) => serde_json::from_str::<Value>(t)
            .map_err(|e| vec![format!("config is not valid JSON: {e}")])?,
        None => Value::Object(Default::default()),
    };
    if !root.is_object() {
        return Err(vec!["config must be a JSON object".into()]);
    }
    let errors: Vec<String> = overrides
        .iter()
        .filter_map(|o| apply_override(&mut root, o).err())
        .collect();
    if !errors.is_empty() {
        return Err(errors);
    }
    serde_json::from_value(root).map_err(|e| vec![format!("config: {e}")])
}

impl CliConfig {
    pub fn policy(&self) -> PreprocessPolicy {
        PreprocessPolicy {
            missing: self.missing,
            transform: self.transform,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self.algorithm {
            AlgorithmKind::Pso => Algorithm::Pso(PsoParams {
                phi_p: self.pso.phi_p,
                phi_g: self.pso.phi_g,
                inertia: match self.pso.inertia {
                    InertiaKind::Constant => Inertia::Constant(self.pso.w),
                    InertiaKind::Linear => Inertia::LinearDecreasing {
                        start: self.pso.w_start,
                        end: self.pso.w_end,
                    },
                    InertiaKind::Nonlinear => Inertia::NonlinearDecreasing {
                        start: self.pso.w_start,
                        end: self.pso.w_end,
                    },
                },
            }),
            AlgorithmKind::De => Algorithm::De(DeParams {
                strategy: self.de.strategy,
                f_scale: self.de.f,
                cr: self.de.cr,
            }),
            AlgorithmKind::Ga => Algorithm::Ga(GaParams {
                selection: match self.ga.selection {
                    SelectionKind::Roulette => Selection::FitnessProportionate,
                    SelectionKind::Tournament => Selection::Tournament,
                },
                mutation: match self.ga.mutation {
                    MutationKind::Substitution => Mutation::RandomSubstitution,
                    MutationKind::Interchange => Mutation::RandomInterchange,
                },
                cr: self.ga.cr,
                p_m: self.ga.p_m,
                literal_roulette: self.ga.literal_roulette,
            }),
        }
    }

    pub fn stopping(&self) -> StoppingRule {
        StoppingRule {
            statistic: match self.stop_statistic {
                StopStatistic::Best => Statistic::BestFitness,
                StopStatistic::Worst => Statistic::WorstFitness,
                StopStatistic::Mean => Statistic::MeanFitness,
            },
            threshold: self.threshold,
            max_iterations: self.max_iterations,
        }
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    }

    /// Engine configuration for a dataset of `input_dim` features and
    /// `classes` labels. Topology problems are reported with the other
    /// violations by [`RunConfig::violations`].
    pub fn run_config(&self, input_dim: usize, classes: usize) -> RunConfig {
        RunConfig {
            algorithm: self.algorithm(),
            topology: Topology {
                input_dim,
                hidden_layers: self.hidden_layers.clone(),
                output_dim: classes,
                activation: self.activation,
            },
            population_size: self.population_size,
            stopping: self.stopping(),
            seed: self.seed,
            workers: self.workers(),
            init_range: self.init_range,
        }
    }
}

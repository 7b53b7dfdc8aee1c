//! Trained-model persistence and standalone source export.
//!
//! The model file is a single JSON document (schema version 1). Exported
//! sources embed the weights as 17-significant-digit literals, apply the
//! stored input transform, run the forward pass and return either the raw
//! output scores or the winning class name. They have no imports.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::TransformParams;
use crate::error::{Error, Result};
use crate::mlp::{Activation, Genome, Topology};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingMetadata {
    pub algorithm: String,
    pub seed: u64,
    pub fitness: f64,
    pub generations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub topology: Topology,
    pub genome: Genome,
    pub transform: TransformParams,
    pub class_names: Vec<String>,
    pub metadata: TrainingMetadata,
}

impl TrainedModel {
    pub fn validate(&self) -> Result<()> {
        self.topology
            .validate()
            .map_err(|e| Error::CorruptModel(e.to_string()))?;
        let expected = self.topology.genome_length();
        if self.genome.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "model weights",
                expected,
                actual: self.genome.len(),
            });
        }
        if self.class_names.len() != self.topology.output_dim {
            return Err(Error::DimensionMismatch {
                what: "class names",
                expected: self.topology.output_dim,
                actual: self.class_names.len(),
            });
        }
        if !self.transform.is_consistent() || self.transform.dim() != self.topology.input_dim {
            return Err(Error::DimensionMismatch {
                what: "transform parameters",
                expected: self.topology.input_dim,
                actual: self.transform.dim(),
            });
        }
        if !self.genome.is_finite() {
            return Err(Error::CorruptModel("non-finite weight".into()));
        }
        Ok(())
    }

    /// Raw-scale features in, output activations out.
    pub fn scores(&self, features: &[f64]) -> Result<Vec<f64>> {
        let x = crate::data::apply_transform(&self.transform, features)?;
        crate::mlp::forward(&self.topology, &self.genome, &x)
    }

    pub fn predict(&self, features: &[f64]) -> Result<&str> {
        let s = self.scores(features)?;
        Ok(&self.class_names[crate::mlp::argmax(&s)])
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema_version: u64,
    topology: Topology,
    weights: Vec<f64>,
    transform: TransformParams,
    classes: Vec<String>,
    metadata: TrainingMetadata,
}

pub fn model_to_json(model: &TrainedModel) -> Result<String> {
    model.validate()?;
    let file = ModelFile {
        schema_version: SCHEMA_VERSION,
        topology: model.topology.clone(),
        weights: model.genome.to_vec(),
        transform: model.transform.clone(),
        classes: model.class_names.clone(),
        metadata: model.metadata.clone(),
    };
    let mut text =
        serde_json::to_string_pretty(&file).map_err(|e| Error::CorruptModel(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn model_from_json(text: &str) -> Result<TrainedModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::CorruptModel(e.to_string()))?;
    match value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
    {
        Some(SCHEMA_VERSION) => {}
        Some(found) => {
            return Err(Error::SchemaVersion {
                found,
                expected: SCHEMA_VERSION,
            })
        }
        None => return Err(Error::CorruptModel("missing schema_version".into())),
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|e| Error::CorruptModel(e.to_string()))?;
    let model = TrainedModel {
        topology: file.topology,
        genome: Genome::new(file.weights),
        transform: file.transform,
        class_names: file.classes,
        metadata: file.metadata,
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = model_to_json(model)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Python,
    Java,
    JavaScript,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Python, Target::Java, Target::JavaScript];

    pub fn name(self) -> &'static str {
        match self {
            Target::Python => "python",
            Target::Java => "java",
            Target::JavaScript => "javascript",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Target::Python => "py",
            Target::Java => "java",
            Target::JavaScript => "mjs",
        }
    }
}

impl std::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "python" => Ok(Target::Python),
            "java" => Ok(Target::Java),
            "javascript" => Ok(Target::JavaScript),
            other => Err(format!(
                "unsupported language `{other}`; supported: python, java, javascript"
            )),
        }
    }
}

/// Class name used for Java exports; save the file as `Classifier.java`.
pub const JAVA_CLASS: &str = "Classifier";

fn literal(x: f64) -> String {
    format!("{x:.16e}")
}

fn string_literal(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

/// Wraps a comma-separated list so no line grows without bound.
fn wrapped(items: Vec<String>, indent: &str) -> String {
    let mut out = String::new();
    for (k, chunk) in items.chunks(4).enumerate() {
        if k > 0 {
            out.push('\n');
        }
        out.push_str(indent);
        out.push_str(&chunk.join(", "));
        out.push(',');
    }
    out
}

struct Parts {
    header: Vec<String>,
    layers: Vec<usize>,
    weights: Vec<String>,
    shift: Vec<String>,
    divisor: Vec<String>,
    classes: Vec<String>,
}

fn parts(model: &TrainedModel) -> Parts {
    let (shift, divisor) = model.transform.shift_and_divisor();
    let m = &model.metadata;
    Parts {
        header: vec![
            "Generated multilayer-perceptron classifier.".into(),
            format!(
                "algorithm={} seed={} fitness={} generations={}",
                m.algorithm, m.seed, m.fitness, m.generations
            ),
            format!(
                "layers={:?} activation={}",
                model.topology.layer_sizes(),
                model.topology.activation.name()
            ),
            "Inputs are raw-scale features; the stored input transform".into(),
            "(x - shift) / divisor is applied before the forward pass.".into(),
        ],
        layers: model.topology.layer_sizes(),
        weights: model.genome.iter().map(|&w| literal(w)).collect(),
        shift: shift.iter().map(|&v| literal(v)).collect(),
        divisor: divisor.iter().map(|&v| literal(v)).collect(),
        classes: model
            .class_names
            .iter()
            .map(|c| string_literal(c))
            .collect(),
    }
}

pub fn export(model: &TrainedModel, target: Target) -> Result<String> {
    model.validate()?;
    let p = parts(model);
    let activation = model.topology.activation;
    Ok(match target {
        Target::Python => python(&p, activation),
        Target::Java => java(&p, activation),
        Target::JavaScript => javascript(&p, activation),
    })
}

fn python(p: &Parts, activation: Activation) -> String {
    let mut s = String::new();
    for line in &p.header {
        writeln!(s, "# {line}").unwrap();
    }
    s.push('\n');
    writeln!(s, "LAYERS = [{}]", join(&p.layers, |n| n.to_string())).unwrap();
    writeln!(s, "WEIGHTS = [\n{}\n]", wrapped(p.weights.clone(), "    ")).unwrap();
    writeln!(s, "SHIFT = [\n{}\n]", wrapped(p.shift.clone(), "    ")).unwrap();
    writeln!(s, "DIVISOR = [\n{}\n]", wrapped(p.divisor.clone(), "    ")).unwrap();
    writeln!(s, "CLASSES = [{}]", p.classes.join(", ")).unwrap();
    s.push_str(
        r#"
_E = 2.718281828459045


def _exp(x):
    if x > 709.0:
        return float("inf")
    if x < -745.0:
        return 0.0
    return _E ** x

"#,
    );
    s.push_str(match activation {
        Activation::Tanh => {
            r#"
def _activation(x):
    if x > 20.0:
        return 1.0
    if x < -20.0:
        return -1.0
    a = _exp(x)
    b = _exp(-x)
    return (a - b) / (a + b)
"#
        }
        Activation::Logistic => {
            r#"
def _activation(x):
    return 1.0 / (1.0 + _exp(-x))
"#
        }
        Activation::Linear => {
            r#"
def _activation(x):
    return x
"#
        }
    });
    s.push_str(
        r#"

def scores(features):
    if len(features) != LAYERS[0]:
        raise ValueError("expected %d features, got %d" % (LAYERS[0], len(features)))
    a = []
    for i in range(LAYERS[0]):
        if DIVISOR[i] == 0.0:
            a.append(0.0)
        else:
            a.append((float(features[i]) - SHIFT[i]) / DIVISOR[i])
    offset = 0
    for layer in range(1, len(LAYERS)):
        n_in = LAYERS[layer - 1]
        out = []
        for _ in range(LAYERS[layer]):
            total = 0.0
            for i in range(n_in):
                total += WEIGHTS[offset + i] * a[i]
            total += WEIGHTS[offset + n_in]
            out.append(_activation(total))
            offset += n_in + 1
        a = out
    return a


def predict(features):
    s = scores(features)
    best = 0
    for k in range(1, len(s)):
        if s[k] > s[best]:
            best = k
    return CLASSES[best]
"#,
    );
    s
}

fn activation_expr(activation: Activation) -> &'static str {
    match activation {
        Activation::Tanh => "Math.tanh(x)",
        Activation::Logistic => "1.0 / (1.0 + Math.exp(-x))",
        Activation::Linear => "x",
    }
}

fn java(p: &Parts, activation: Activation) -> String {
    let mut s = String::new();
    for line in &p.header {
        writeln!(s, "// {line}").unwrap();
    }
    writeln!(s, "public final class {JAVA_CLASS} {{").unwrap();
    writeln!(
        s,
        "    private static final int[] LAYERS = {{{}}};",
        join(&p.layers, |n| n.to_string())
    )
    .unwrap();
    writeln!(
        s,
        "    private static final double[] WEIGHTS = {{\n{}\n    }};",
        wrapped(p.weights.clone(), "        ")
    )
    .unwrap();
    writeln!(
        s,
        "    private static final double[] SHIFT = {{\n{}\n    }};",
        wrapped(p.shift.clone(), "        ")
    )
    .unwrap();
    writeln!(
        s,
        "    private static final double[] DIVISOR = {{\n{}\n    }};",
        wrapped(p.divisor.clone(), "        ")
    )
    .unwrap();
    writeln!(
        s,
        "    private static final String[] CLASSES = {{{}}};",
        p.classes.join(", ")
    )
    .unwrap();
    write!(
        s,
        r#"
    private {JAVA_CLASS}() {{}}

    private static double activation(double x) {{
        return {};
    }}

    public static double[] scores(double[] features) {{
        if (features.length != LAYERS[0]) {{
            throw new IllegalArgumentException("expected " + LAYERS[0] + " features, got " + features.length);
        }}
        double[] a = new double[LAYERS[0]];
        for (int i = 0; i < LAYERS[0]; i++) {{
            a[i] = DIVISOR[i] == 0.0 ? 0.0 : (features[i] - SHIFT[i]) / DIVISOR[i];
        }}
        int offset = 0;
        for (int layer = 1; layer < LAYERS.length; layer++) {{
            int nIn = LAYERS[layer - 1];
            double[] out = new double[LAYERS[layer]];
            for (int j = 0; j < out.length; j++) {{
                double total = 0.0;
                for (int i = 0; i < nIn; i++) {{
                    total += WEIGHTS[offset + i] * a[i];
                }}
                total += WEIGHTS[offset + nIn];
                out[j] = activation(total);
                offset += nIn + 1;
            }}
            a = out;
        }}
        return a;
    }}

    public static String predict(double[] features) {{
        double[] s = scores(features);
        int best = 0;
        for (int k = 1; k < s.length; k++) {{
            if (s[k] > s[best]) {{
                best = k;
            }}
        }}
        return CLASSES[best];
    }}
}}
"#,
        activation_expr(activation)
    )
    .unwrap();
    s
}

fn javascript(p: &Parts, activation: Activation) -> String {
    let mut s = String::new();
    for line in &p.header {
        writeln!(s, "// {line}").unwrap();
    }
    s.push('\n');
    writeln!(
        s,
        "const LAYERS = [{}];",
        join(&p.layers, |n| n.to_string())
    )
    .unwrap();
    writeln!(
        s,
        "const WEIGHTS = [\n{}\n];",
        wrapped(p.weights.clone(), "  ")
    )
    .unwrap();
    writeln!(s, "const SHIFT = [\n{}\n];", wrapped(p.shift.clone(), "  ")).unwrap();
    writeln!(
        s,
        "const DIVISOR = [\n{}\n];",
        wrapped(p.divisor.clone(), "  ")
    )
    .unwrap();
    writeln!(s, "const CLASSES = [{}];", p.classes.join(", ")).unwrap();
    write!(
        s,
        r#"
function activation(x) {{
  return {};
}}

export function scores(features) {{
  if (features.length !== LAYERS[0]) {{
    throw new RangeError(`expected ${{LAYERS[0]}} features, got ${{features.length}}`);
  }}
  let a = [];
  for (let i = 0; i < LAYERS[0]; i++) {{
    a.push(DIVISOR[i] === 0 ? 0 : (features[i] - SHIFT[i]) / DIVISOR[i]);
  }}
  let offset = 0;
  for (let layer = 1; layer < LAYERS.length; layer++) {{
    const nIn = LAYERS[layer - 1];
    const out = [];
    for (let j = 0; j < LAYERS[layer]; j++) {{
      let total = 0;
      for (let i = 0; i < nIn; i++) {{
        total += WEIGHTS[offset + i] * a[i];
      }}
      total += WEIGHTS[offset + nIn];
      out.push(activation(total));
      offset += nIn + 1;
    }}
    a = out;
  }}
  return a;
}}

export function predict(features) {{
  const s = scores(features);
  let best = 0;
  for (let k = 1; k < s.length; k++) {{
    if (s[k] > s[best]) {{
      best = k;
    }}
  }}
  return CLASSES[best];
}}
"#,
        activation_expr(activation)
    )
    .unwrap();
    s
}

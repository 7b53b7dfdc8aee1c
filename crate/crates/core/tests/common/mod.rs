//! Independent reference implementations and harness helpers for the
//! integration tests. Nothing here calls into the library's own numerics.

#![allow(dead_code, clippy::needless_range_loop)]

use std::path::Path;
use std::process::Command;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use evomlp::data::TransformParams;
use evomlp::export::{TrainedModel, TrainingMetadata};
use evomlp::{Activation, Dataset, Genome, Topology};

fn activate(a: Activation, x: f64) -> f64 {
    match a {
        Activation::Tanh => {
            let (p, n) = (x.exp(), (-x).exp());
            if p.is_infinite() {
                1.0
            } else if n.is_infinite() {
                -1.0
            } else {
                (p - n) / (p + n)
            }
        }
        Activation::Logistic => 1.0 / (1.0 + (-x).exp()),
        Activation::Linear => x,
    }
}

/// Forward pass as explicit matrix products: each layer's weights are read
/// into an `n_out × n_in` matrix and a bias vector, then `σ(W a + b)`.
pub fn forward_oracle(t: &Topology, genome: &[f64], x: &[f64]) -> Vec<f64> {
    let mut sizes = vec![t.input_dim];
    sizes.extend(&t.hidden_layers);
    sizes.push(t.output_dim);
    let mut a = DVector::from_column_slice(x);
    let mut offset = 0;
    for w in sizes.windows(2) {
        let (n_in, n_out) = (w[0], w[1]);
        let block = &genome[offset..offset + n_out * (n_in + 1)];
        let weights = DMatrix::from_fn(n_out, n_in, |r, c| block[r * (n_in + 1) + c]);
        let bias = DVector::from_fn(n_out, |r, _| block[r * (n_in + 1) + n_in]);
        a = (weights * a + bias).map(|z| activate(t.activation, z));
        offset += n_out * (n_in + 1);
    }
    assert_eq!(offset, genome.len(), "oracle consumed the whole genome");
    a.iter().copied().collect()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues in descending order with unit eigenvectors as columns.
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(i == j)).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

/// Top two principal directions and variances of `rows` from the sample
/// covariance (divisor n − 1).
pub fn pca_oracle(rows: &[Vec<f64>]) -> ([Vec<f64>; 2], [f64; 2]) {
    let n = rows.len();
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    for row in cov.iter_mut() {
        for c in row.iter_mut() {
            *c /= (n - 1) as f64;
        }
    }
    let (values, vectors) = jacobi_eigen(&cov);
    (
        [vectors[0].clone(), vectors[1].clone()],
        [values[0], values[1]],
    )
}

pub fn seeded_matrix(seed: u64, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect()
}

pub fn xor_dataset() -> Dataset {
    Dataset::from_rows(
        vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ],
        &["0", "1", "1", "0"],
    )
    .unwrap()
}

/// Two unit-variance Gaussian clusters at (−2,−2) and (2,2), Box–Muller.
pub fn blobs_dataset(size: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for k in 0..size {
        let (c, label) = if k < size / 2 {
            (-2.0, "0")
        } else {
            (2.0, "1")
        };
        features.push(vec![c + normal(), c + normal()]);
        labels.push(label);
    }
    Dataset::from_rows(features, &labels).unwrap()
}

pub fn accuracy(t: &Topology, genome: &[f64], data: &Dataset) -> f64 {
    let correct = data
        .features
        .iter()
        .zip(&data.labels)
        .filter(|(x, &y)| {
            let s = forward_oracle(t, genome, x);
            let mut best = 0;
            for k in 1..s.len() {
                if s[k] > s[best] {
                    best = k;
                }
            }
            best == y
        })
        .count();
    correct as f64 / data.rows() as f64
}

pub fn random_model(seed: u64, topology: Topology, transform: TransformParams) -> TrainedModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let genome = Genome::new(
        (0..topology.genome_length())
            .map(|_| rng.random_range(-2.0..2.0))
            .collect(),
    );
    let class_names = (0..topology.output_dim)
        .map(|k| format!("class-{k}"))
        .collect();
    TrainedModel {
        topology,
        genome,
        transform,
        class_names,
        metadata: TrainingMetadata {
            algorithm: "none".into(),
            seed,
            fitness: 0.0,
            generations: 0,
        },
    }
}

/// Fixed model for golden files: hand-picked weights, a z-score transform
/// with one constant feature and class names that need escaping.
pub fn golden_model() -> TrainedModel {
    let topology = Topology::new(3, vec![2], 3, Activation::Tanh).unwrap();
    let genome: Vec<f64> = (0..topology.genome_length())
        .map(|k| ((k as f64) * 0.37 - 2.0) / 3.0)
        .collect();
    TrainedModel {
        topology,
        genome: Genome::new(genome),
        transform: TransformParams::ZScore {
            mean: vec![0.5, -1.25, 3.0],
            std: vec![2.0, 0.1, 0.0],
        },
        class_names: vec!["setosa".into(), "say \"hi\"".into(), "back\\slash".into()],
        metadata: TrainingMetadata {
            algorithm: "de".into(),
            seed: 42,
            fitness: 0.96,
            generations: 17,
        },
    }
}

pub fn random_inputs(seed: u64, count: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect()
}

pub fn tool_available(program: &str, version_flag: &str) -> bool {
    Command::new(program)
        .arg(version_flag)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn inputs_json(inputs: &[Vec<f64>]) -> String {
    serde_json::to_string(inputs).unwrap()
}

fn parse_rows(stdout: &[u8]) -> Vec<Vec<f64>> {
    let text = String::from_utf8(stdout.to_vec()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("bad runner output {text:?}: {e}"))
}

fn run_checked(cmd: &mut Command) -> Vec<u8> {
    let out = cmd.output().expect("runtime starts");
    assert!(
        out.status.success(),
        "runner failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

/// Runs generated source over inputs, returning its scores and labels.
pub type Evaluator = fn(&Path, &str, &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<String>);

/// Runs `scores` and `predict` of a generated Python module over `inputs`.
pub fn python_eval(dir: &Path, source: &str, inputs: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<String>) {
    std::fs::write(dir.join("classifier.py"), source).unwrap();
    std::fs::write(dir.join("inputs.json"), inputs_json(inputs)).unwrap();
    let runner = "import json, sys\nsys.path.insert(0, sys.argv[1])\nimport classifier\n\
                  xs = json.load(open(sys.argv[2]))\n\
                  print(json.dumps([classifier.scores(x) for x in xs]))\n\
                  print(json.dumps([classifier.predict(x) for x in xs]))\n";
    let out = run_checked(
        Command::new("python3")
            .arg("-c")
            .arg(runner)
            .arg(dir)
            .arg(dir.join("inputs.json")),
    );
    split_output(&out)
}

pub fn node_eval(dir: &Path, source: &str, inputs: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<String>) {
    std::fs::write(dir.join("classifier.mjs"), source).unwrap();
    std::fs::write(dir.join("inputs.json"), inputs_json(inputs)).unwrap();
    let runner = "import { scores, predict } from './classifier.mjs';\n\
                  import { readFileSync } from 'node:fs';\n\
                  const xs = JSON.parse(readFileSync('./inputs.json', 'utf8'));\n\
                  console.log(JSON.stringify(xs.map(scores)));\n\
                  console.log(JSON.stringify(xs.map(predict)));\n";
    std::fs::write(dir.join("runner.mjs"), runner).unwrap();
    let out = run_checked(Command::new("node").arg("runner.mjs").current_dir(dir));
    split_output(&out)
}

pub fn java_eval(dir: &Path, source: &str, inputs: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<String>) {
    std::fs::write(dir.join("Classifier.java"), source).unwrap();
    let rows: Vec<String> = inputs
        .iter()
        .map(|x| {
            format!(
                "{{{}}}",
                x.iter()
                    .map(|v| format!("{v:e}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        })
        .collect();
    let runner = format!(
        "public class Runner {{\n  public static void main(String[] a) {{\n    double[][] xs = {{{}}};\n\
         StringBuilder s = new StringBuilder(\"[\"); StringBuilder p = new StringBuilder(\"[\");\n\
         for (int i = 0; i < xs.length; i++) {{\n      double[] r = Classifier.scores(xs[i]);\n\
         if (i > 0) {{ s.append(','); p.append(','); }}\n      s.append('[');\n\
         for (int k = 0; k < r.length; k++) {{ if (k > 0) s.append(','); s.append(Double.toString(r[k])); }}\n\
         s.append(']');\n      p.append('\"').append(Classifier.predict(xs[i])).append('\"');\n    }}\n\
         System.out.println(s.append(']'));\n    System.out.println(p.append(']'));\n  }}\n}}\n",
        rows.join(", ")
    );
    std::fs::write(dir.join("Runner.java"), runner).unwrap();
    run_checked(
        Command::new("javac")
            .arg("Classifier.java")
            .arg("Runner.java")
            .current_dir(dir),
    );
    let out = run_checked(
        Command::new("java")
            .arg("-cp")
            .arg(".")
            .arg("Runner")
            .current_dir(dir),
    );
    split_output(&out)
}

fn split_output(out: &[u8]) -> (Vec<Vec<f64>>, Vec<String>) {
    let text = String::from_utf8(out.to_vec()).unwrap();
    let mut lines = text.lines();
    let scores = parse_rows(lines.next().expect("scores line").as_bytes());
    let labels = serde_json::from_str(lines.next().expect("labels line")).unwrap();
    (scores, labels)
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| {
            assert_eq!(x.len(), y.len());
            x.iter().zip(y).map(|(p, q)| (p - q).abs())
        })
        .fold(0.0, f64::max)
}

//! Fully connected feed-forward networks encoded as flat weight vectors.
//!
//! A [`Genome`] stores every layer in order. Inside a layer, each output node
//! contributes its `n_in` incoming weights followed by its bias, so a layer
//! with `n_in` inputs and `n_out` nodes occupies `n_out * (n_in + 1)` entries.
//! The activation is applied at every layer, including the output layer, and
//! the predicted class is the argmax of the output vector.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Logistic,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Logistic => 1.0 / (1.0 + (-x).exp()),
            Activation::Linear => x,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Logistic => "logistic",
            Activation::Linear => "linear",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "logistic" => Ok(Activation::Logistic),
            "linear" => Ok(Activation::Linear),
            other => Err(format!(
                "unknown activation `{other}` (expected tanh, logistic or linear)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
}

impl Topology {
    pub fn new(
        input_dim: usize,
        hidden_layers: Vec<usize>,
        output_dim: usize,
        activation: Activation,
    ) -> Result<Self> {
        let topology = Topology {
            input_dim,
            hidden_layers,
            output_dim,
            activation,
        };
        topology.validate()?;
        Ok(topology)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidTopology(
                "input_dim must be at least 1".into(),
            ));
        }
        if self.output_dim < 2 {
            return Err(Error::InvalidTopology(format!(
                "output_dim must be at least 2, got {}",
                self.output_dim
            )));
        }
        if let Some(pos) = self.hidden_layers.iter().position(|&n| n == 0) {
            return Err(Error::InvalidTopology(format!(
                "hidden layer {pos} has zero nodes"
            )));
        }
        Ok(())
    }

    /// Layer widths from input to output.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden_layers.len() + 2);
        sizes.push(self.input_dim);
        sizes.extend_from_slice(&self.hidden_layers);
        sizes.push(self.output_dim);
        sizes
    }

    /// `(n_in, n_out)` for each weight layer.
    pub fn layer_shapes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let sizes = std::iter::once(self.input_dim)
            .chain(self.hidden_layers.iter().copied())
            .chain(std::iter::once(self.output_dim));
        sizes.clone().zip(sizes.skip(1))
    }

    pub fn genome_length(&self) -> usize {
        self.layer_shapes()
            .map(|(n_in, n_out)| n_out * (n_in + 1))
            .sum()
    }

    fn widest_layer(&self) -> usize {
        self.layer_sizes().into_iter().max().unwrap_or(0)
    }
}

pub fn genome_length(topology: &Topology) -> usize {
    topology.genome_length()
}

/// Flat vector of all weights and biases of one network.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genome(Vec<f64>);

impl Genome {
    pub fn new(weights: Vec<f64>) -> Self {
        Genome(weights)
    }

    pub fn zeros(len: usize) -> Self {
        Genome(vec![0.0; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|w| w.is_finite())
    }
}

impl From<Vec<f64>> for Genome {
    fn from(weights: Vec<f64>) -> Self {
        Genome(weights)
    }
}

impl Deref for Genome {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Genome {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// One weight layer in matrix form: `weights[j][i]` connects input `i` to node `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

pub fn unflatten(topology: &Topology, genome: &[f64]) -> Result<Vec<DenseLayer>> {
    check_genome(topology, genome)?;
    let mut offset = 0;
    let layers = topology
        .layer_shapes()
        .map(|(n_in, n_out)| {
            let mut weights = Vec::with_capacity(n_out);
            let mut bias = Vec::with_capacity(n_out);
            for _ in 0..n_out {
                weights.push(genome[offset..offset + n_in].to_vec());
                bias.push(genome[offset + n_in]);
                offset += n_in + 1;
            }
            DenseLayer { weights, bias }
        })
        .collect();
    Ok(layers)
}

pub fn flatten(layers: &[DenseLayer]) -> Genome {
    let mut out = Vec::new();
    for layer in layers {
        for (row, bias) in layer.weights.iter().zip(&layer.bias) {
            out.extend_from_slice(row);
            out.push(*bias);
        }
    }
    Genome(out)
}

fn check_genome(topology: &Topology, genome: &[f64]) -> Result<()> {
    let expected = topology.genome_length();
    if genome.len() != expected {
        return Err(Error::DimensionMismatch {
            what: "genome",
            expected,
            actual: genome.len(),
        });
    }
    Ok(())
}

/// Borrowed view of a genome as a network, with reusable scratch buffers for
/// repeated evaluation.
pub struct Network<'a> {
    topology: &'a Topology,
    genome: &'a [f64],
    front: Vec<f64>,
    back: Vec<f64>,
}

impl<'a> Network<'a> {
    pub fn new(topology: &'a Topology, genome: &'a [f64]) -> Result<Self> {
        check_genome(topology, genome)?;
        let width = topology.widest_layer();
        Ok(Network {
            topology,
            genome,
            front: Vec::with_capacity(width),
            back: Vec::with_capacity(width),
        })
    }

    /// Output activations for one input row. The slice is valid until the next call.
    pub fn scores(&mut self, features: &[f64]) -> Result<&[f64]> {
        if features.len() != self.topology.input_dim {
            return Err(Error::DimensionMismatch {
                what: "features",
                expected: self.topology.input_dim,
                actual: features.len(),
            });
        }
        let g = self.topology.activation;
        self.front.clear();
        self.front.extend_from_slice(features);
        let mut offset = 0;
        for (n_in, n_out) in self.topology.layer_shapes() {
            self.back.clear();
            for _ in 0..n_out {
                let row = &self.genome[offset..offset + n_in];
                let mut sum = 0.0;
                for (w, a) in row.iter().zip(&self.front) {
                    sum += w * a;
                }
                sum += self.genome[offset + n_in];
                self.back.push(g.apply(sum));
                offset += n_in + 1;
            }
            std::mem::swap(&mut self.front, &mut self.back);
        }
        Ok(&self.front)
    }

    pub fn predict(&mut self, features: &[f64]) -> Result<usize> {
        Ok(argmax(self.scores(features)?))
    }
}

pub fn forward(topology: &Topology, genome: &[f64], features: &[f64]) -> Result<Vec<f64>> {
    let mut net = Network::new(topology, genome)?;
    Ok(net.scores(features)?.to_vec())
}

pub fn predict(topology: &Topology, genome: &[f64], features: &[f64]) -> Result<usize> {
    Network::new(topology, genome)?.predict(features)
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn topo(d: usize, hidden: &[usize], c: usize, g: Activation) -> Topology {
        Topology::new(d, hidden.to_vec(), c, g).unwrap()
    }

    #[test]
    fn activation_special_points() {
        assert_eq!(Activation::Tanh.apply(0.0), 0.0);
        assert_eq!(Activation::Logistic.apply(0.0), 0.5);
        assert_eq!(Activation::Linear.apply(2.5), 2.5);
    }

    #[test]
    fn logistic_is_increasing() {
        assert!(Activation::Logistic.apply(1.0) > Activation::Logistic.apply(-1.0));
    }

    #[test]
    fn genome_length_counts() {
        assert_eq!(topo(2, &[2], 2, Activation::Tanh).genome_length(), 12);
        assert_eq!(topo(3, &[], 2, Activation::Tanh).genome_length(), 8);
        assert_eq!(topo(4, &[5, 3], 3, Activation::Tanh).genome_length(), 55);
    }

    #[test]
    fn topology_rejects_bad_shapes() {
        assert!(Topology::new(0, vec![], 2, Activation::Tanh).is_err());
        assert!(Topology::new(2, vec![], 1, Activation::Tanh).is_err());
        assert!(Topology::new(2, vec![3, 0], 2, Activation::Tanh).is_err());
    }

    #[test]
    fn linear_no_hidden_hand_case() {
        let t = topo(1, &[], 2, Activation::Linear);
        let g = [1.0, 0.0, -1.0, 0.0];
        assert_eq!(forward(&t, &g, &[2.0]).unwrap(), vec![2.0, -2.0]);
    }

    #[test]
    fn zero_genome_tanh_gives_zero() {
        let t = topo(3, &[4, 2], 3, Activation::Tanh);
        let g = Genome::zeros(t.genome_length());
        let out = forward(&t, &g, &[0.3, -5.0, 12.0]).unwrap();
        assert_eq!(out, vec![0.0; 3]);
    }

    #[test]
    fn dimension_mismatch_errors() {
        let t = topo(2, &[2], 2, Activation::Tanh);
        assert!(matches!(
            forward(&t, &[0.0; 11], &[0.0, 0.0]),
            Err(Error::DimensionMismatch { what: "genome", .. })
        ));
        assert!(matches!(
            forward(&t, &[0.0; 12], &[0.0]),
            Err(Error::DimensionMismatch {
                what: "features",
                ..
            })
        ));
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[0.1, 0.9]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[-1.0, 2.0, 2.0]), 1);
    }

    #[test]
    fn network_reuse_matches_fresh_forward() {
        let t = topo(3, &[4], 2, Activation::Logistic);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g: Vec<f64> = (0..t.genome_length())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let mut net = Network::new(&t, &g).unwrap();
        for _ in 0..10 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let a = net.scores(&x).unwrap().to_vec();
            assert_eq!(a, forward(&t, &g, &x).unwrap());
        }
    }

    fn arb_topology() -> impl Strategy<Value = Topology> {
        (
            1usize..5,
            prop::collection::vec(1usize..5, 0..3),
            2usize..4,
            prop_oneof![
                Just(Activation::Tanh),
                Just(Activation::Logistic),
                Just(Activation::Linear)
            ],
        )
            .prop_map(|(d, h, c, g)| Topology::new(d, h, c, g).unwrap())
    }

    fn arb_instance() -> impl Strategy<Value = (Topology, Vec<f64>, Vec<f64>)> {
        arb_topology().prop_flat_map(|t| {
            let n = t.genome_length();
            let d = t.input_dim;
            (
                Just(t),
                prop::collection::vec(-3.0f64..3.0, n),
                prop::collection::vec(-3.0f64..3.0, d),
            )
        })
    }

    proptest! {
        #[test]
        fn flatten_unflatten_roundtrip((t, g, _x) in arb_instance()) {
            let layers = unflatten(&t, &g).unwrap();
            prop_assert_eq!(flatten(&layers).into_inner(), g);
        }

        #[test]
        fn bounded_activations_stay_in_range((t, g, x) in arb_instance()) {
            let out = forward(&t, &g, &x).unwrap();
            // Closed bounds: both functions round to their asymptotes in f64.
            for v in out {
                match t.activation {
                    Activation::Tanh => prop_assert!((-1.0..=1.0).contains(&v)),
                    Activation::Logistic => prop_assert!((0.0..=1.0).contains(&v)),
                    Activation::Linear => prop_assert!(v.is_finite()),
                }
            }
        }

        #[test]
        fn forward_is_deterministic((t, g, x) in arb_instance()) {
            let a = forward(&t, &g, &x).unwrap();
            let b = forward(&t, &g, &x).unwrap();
            prop_assert_eq!(
                a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }

        #[test]
        fn linear_single_layer_is_affine(
            d in 1usize..6, c in 2usize..5, seed in any::<u64>()
        ) {
            let t = Topology::new(d, vec![], c, Activation::Linear).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g: Vec<f64> = (0..t.genome_length()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let out = forward(&t, &g, &x).unwrap();
            for j in 0..c {
                let row = &g[j * (d + 1)..(j + 1) * (d + 1)];
                let mut expected = 0.0;
                for i in 0..d {
                    expected += row[i] * x[i];
                }
                expected += row[d];
                prop_assert!((out[j] - expected).abs() <= 1e-12);
            }
        }

        #[test]
        fn argmax_invariant_under_shift(
            values in prop::collection::vec(-5.0f64..5.0, 2..6),
            shift in -3.0f64..3.0,
        ) {
            // Exact dyadic shift keeps the ordering exact.
            let shift = (shift * 8.0).round() / 8.0;
            let values: Vec<f64> = values.iter().map(|v| (v * 8.0).round() / 8.0).collect();
            let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
            prop_assert_eq!(argmax(&values), argmax(&shifted));
        }
    }
}

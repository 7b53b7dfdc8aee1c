use evomlp::data::TransformParams;
use evomlp::export::{self, TrainedModel, TrainingMetadata};
use evomlp::{Activation, Genome, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model_with(genome: Vec<f64>) -> TrainedModel {
    let topology = Topology::new(4, vec![], 2, Activation::Linear).unwrap();
    assert_eq!(genome.len(), topology.genome_length());
    TrainedModel {
        topology,
        genome: Genome::new(genome),
        transform: TransformParams::None { dim: 4 },
        class_names: vec!["a".into(), "b".into()],
        metadata: TrainingMetadata {
            algorithm: "ga".into(),
            seed: 1,
            fitness: 0.5,
            generations: 3,
        },
    }
}

#[test]
fn arbitrary_finite_weights_round_trip_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..2000 {
        let genome: Vec<f64> = (0..10)
            .map(|_| loop {
                let v = f64::from_bits(rng.random());
                if v.is_finite() {
                    break v;
                }
            })
            .collect();
        let model = model_with(genome.clone());
        let back = export::model_from_json(&export::model_to_json(&model).unwrap()).unwrap();
        for (a, b) in genome.iter().zip(back.genome.iter()) {
            assert_eq!(a.to_bits(), b.to_bits(), "{a:e}");
        }
    }
}

#[test]
fn save_and_load_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let model = model_with((0..10).map(|k| 0.1 * k as f64).collect());
    export::save_model(&model, &path).unwrap();
    assert_eq!(export::load_model(&path).unwrap(), model);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    assert!(export::load_model(&path).is_err());
    assert!(export::load_model(dir.path().join("missing.json")).is_err());
}

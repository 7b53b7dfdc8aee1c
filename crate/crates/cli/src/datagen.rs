//! Synthetic example datasets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const XOR_JITTER_SIGMA: f64 = 0.05;

const XOR_ROWS: [([f64; 2], &str); 4] = [
    ([0.0, 0.0], "0"),
    ([0.0, 1.0], "1"),
    ([1.0, 0.0], "1"),
    ([1.0, 1.0], "0"),
];

/// Labelled 2-D points.
pub type Rows = Vec<([f64; 2], String)>;

/// The four XOR rows, or `size` jittered copies of them cycled in order.
pub fn xor(jitter: Option<(usize, u64)>) -> Rows {
    match jitter {
        None => XOR_ROWS.iter().map(|(x, y)| (*x, y.to_string())).collect(),
        Some((size, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noise = Normal::new(0.0, XOR_JITTER_SIGMA).expect("valid sigma");
            (0..size)
                .map(|k| {
                    let (x, y) = XOR_ROWS[k % 4];
                    (
                        [x[0] + noise.sample(&mut rng), x[1] + noise.sample(&mut rng)],
                        y.to_string(),
                    )
                })
                .collect()
        }
    }
}

/// Two unit-variance Gaussian clusters centred at (-2,-2) (class "0") and
/// (2,2) (class "1"), `size / 2` points each (the second takes any remainder).
pub fn blobs(size: usize, seed: u64) -> Rows {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("valid sigma");
    let first = size / 2;
    (0..size)
        .map(|k| {
            let (centre, label) = if k < first { (-2.0, "0") } else { (2.0, "1") };
            (
                [
                    centre + unit.sample(&mut rng),
                    centre + unit.sample(&mut rng),
                ],
                label.to_string(),
            )
        })
        .collect()
}

pub fn to_csv(rows: &Rows) -> String {
    let mut out = String::from("x1,x2,label\n");
    for (x, y) in rows {
        out.push_str(&format!("{},{},{}\n", x[0], x[1], y));
    }
    out
}

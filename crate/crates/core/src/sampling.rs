//! Deterministic point sampling. Each sample index draws from its own
//! ChaCha stream, so results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charts::{ChartPoint, ManifoldSpec};

/// Generator for the `index`-th sample of a seeded run.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random chart-0 point with fiber coordinates in [0,1)² and base
/// coordinates uniform in [-radius, radius].
pub fn random_point(spec: &ManifoldSpec, seed: u64, index: u64, radius: f64) -> ChartPoint {
    let mut rng = stream(seed, index);
    let n = spec.n();
    let mut coords = vec![0.0; 2 * n];
    for (i, c) in coords.iter_mut().enumerate() {
        *c = if i == 0 || i == n {
            rng.gen::<f64>()
        } else {
            rng.gen_range(-radius..=radius)
        };
    }
    ChartPoint::new(spec, 0, coords).expect("sampled coordinates have the right length")
}

/// `count` random points, identical for identical `(seed, count)`.
pub fn random_points(spec: &ManifoldSpec, seed: u64, count: usize, radius: f64) -> Vec<ChartPoint> {
    (0..count as u64).map(|i| random_point(spec, seed, i, radius)).collect()
}

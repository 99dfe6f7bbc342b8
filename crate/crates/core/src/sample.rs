//! Seeded, reproducible point samplers used by checks and report pipelines.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `count` points drawn uniformly from the ball of the given radius,
/// via rejection from the bounding box. Deterministic in the seed.
pub fn ball_points(count: usize, dim: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim >= 1 && radius > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-radius..radius)).collect();
        if p.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
            points.push(p);
        }
    }
    points
}

/// `count` reals drawn uniformly from `[a, b)`. Deterministic in the seed.
pub fn range_points(count: usize, a: f64, b: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(a..b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let a = ball_points(50, 3, 2.0, 7);
        let b = ball_points(50, 3, 2.0, 7);
        assert_eq!(a, b);
        let c = ball_points(50, 3, 2.0, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn points_lie_in_the_ball() {
        for p in ball_points(200, 2, 1.5, 3) {
            assert!(p.iter().map(|v| v * v).sum::<f64>() <= 1.5 * 1.5);
        }
    }
}

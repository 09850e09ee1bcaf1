//! Seeded randomness. One generator per world; every stochastic choice in a
//! run flows through it, which is what makes runs reproducible.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;

pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Sample an exponential waiting time with the given mean.
pub fn sample_exp(rng: &mut SimRng, mean: f64) -> f64 {
    debug_assert!(mean > 0.0);
    // u in (0, 1]; avoids ln(0)
    let u = 1.0 - rng.gen::<f64>();
    -mean * libm::log(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = seeded(7);
        let mut b = seeded(7);
        for _ in 0..100 {
            assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        }
    }

    #[test]
    fn exp_samples_are_positive_with_roughly_correct_mean() {
        let mut rng = seeded(1);
        let n = 100_000;
        let mean = 2.5;
        let mut sum = 0.0;
        for _ in 0..n {
            let t = sample_exp(&mut rng, mean);
            assert!(t > 0.0);
            sum += t;
        }
        let empirical = sum / n as f64;
        assert!((empirical - mean).abs() / mean < 0.02, "mean {empirical}");
    }
}

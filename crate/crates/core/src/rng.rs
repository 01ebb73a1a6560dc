use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

/// Generator for chain `chain_id` of a run seeded with `seed`. Chains share
/// the key and differ in stream, so they never overlap.
pub fn chain_rng(seed: u64, chain_id: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain_id);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_differ_and_repeat() {
        let a: Vec<u64> = (0..4).map({
            let mut r = chain_rng(9, 0);
            move |_| r.random()
        }).collect();
        let b: Vec<u64> = (0..4).map({
            let mut r = chain_rng(9, 1);
            move |_| r.random()
        }).collect();
        let again: Vec<u64> = (0..4).map({
            let mut r = chain_rng(9, 0);
            move |_| r.random()
        }).collect();
        assert_ne!(a, b);
        assert_eq!(a, again);
    }
}

use rand::Rng;

use crate::error::Result;

/// One Markov chain over some state space.
pub trait Sampler {
    type State;

    /// Advance one iteration. Returns whether the state changed.
    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<bool>;

    fn state(&self) -> &Self::State;
}

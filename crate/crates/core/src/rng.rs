use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Consumers of a run seed, each on its own ChaCha stream so that changing
/// how much one of them draws never shifts another.
#[derive(Clone, Copy)]
pub(crate) enum Stream {
    Data = 1,
    Split = 2,
    Init = 3,
    Batches = 4,
    Eval = 5,
}

pub(crate) fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

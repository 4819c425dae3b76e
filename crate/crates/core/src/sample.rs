//! Deterministic random instances for verification suites and tests.
//!
//! All sampling goes through a caller-supplied ChaCha stream so that a fixed
//! seed reproduces identical instances on every platform.

use rand::Rng;

use crate::channel::{ChannelConfig, PowerPartition, WeightVector};
use crate::kkt::OrderingCase;

/// A random valid channel: powers in `[2, 30]`, ladder rungs separated by
/// at least 30% multiplicative steps so no test sits on a degeneracy.
pub fn channel<R: Rng>(rng: &mut R) -> ChannelConfig {
    let ladder = |rng: &mut R| -> [f64; 3] {
        let n1 = rng.gen_range(0.3..2.0);
        let n2 = n1 * (1.0 + rng.gen_range(0.3..2.5));
        let n3 = n2 * (1.0 + rng.gen_range(0.3..2.5));
        [n1, n2, n3]
    };
    ChannelConfig {
        p1: rng.gen_range(2.0..30.0),
        p2: rng.gen_range(2.0..30.0),
        n1: ladder(rng),
        n2: ladder(rng),
    }
}

/// A random partition in the feasible set (each subchannel pair drawn
/// uniformly from the triangle).
pub fn partition<R: Rng>(rng: &mut R) -> PowerPartition {
    let pair = |rng: &mut R| -> (f64, f64) {
        loop {
            let a = rng.gen_range(0.0..1.0);
            let b = rng.gen_range(0.0..1.0);
            if a + b <= 1.0 {
                return (a, b);
            }
        }
    };
    let (a11, a12) = pair(rng);
    let (a21, a22) = pair(rng);
    PowerPartition::new(a11, a12, a21, a22)
}

/// A normalized weight vector with the requested strict ordering and pairwise
/// gaps of at least `min_gap` before normalization.
pub fn weights_with_ordering<R: Rng>(
    rng: &mut R,
    ordering: OrderingCase,
    min_gap: f64,
) -> WeightVector {
    let g1 = rng.gen_range(min_gap..1.0);
    let g2 = rng.gen_range(min_gap..1.0);
    let g3 = rng.gen_range(min_gap..1.0);
    // Strictly descending values.
    let v = [g1 + g2 + g3, g2 + g3, g3];
    let idx = ordering.descending_indices();
    let mut w = [0.0; 3];
    for (pos, &i) in idx.iter().enumerate() {
        w[i] = v[pos];
    }
    WeightVector::new(w[0], w[1], w[2]).normalized()
}

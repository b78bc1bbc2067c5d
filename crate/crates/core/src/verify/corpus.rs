//! Seeded random instance families used by the acceptance checks and the
//! command-line suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::generators::{gen_random_k_minded, gen_random_single_crossing, gen_random_single_minded};
use crate::domain::{AuctionInstance, Domain, KMindedStructure};
use crate::error::Result;

/// Largest value any corpus valuation reaches.
pub const MAX_VALUE: u64 = 1000;

#[derive(Clone, Debug)]
pub struct Shape {
    pub max_players: usize,
    pub max_items: u64,
    pub max_domain: u64,
    pub max_k: u64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_players: 3,
            max_items: 64,
            max_domain: 8,
            max_k: 5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KMindedEntry {
    pub instance: AuctionInstance,
    pub step_sets: Vec<KMindedStructure>,
}

fn random_reports(rng: &mut ChaCha8Rng, domains: &[Domain]) -> Vec<u64> {
    domains.iter().map(|d| rng.gen_range(0..d.size())).collect()
}

/// k-minded single-crossing instances: per player a random step set of at
/// most `max_k` quantities, marginals up to `MAX_VALUE / k`.
pub fn k_minded_corpus(seed: u64, count: usize, shape: &Shape) -> Result<Vec<KMindedEntry>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=shape.max_players);
            let m = rng.gen_range(1..=shape.max_items);
            let mut domains = Vec::with_capacity(n);
            let mut step_sets = Vec::with_capacity(n);
            for _ in 0..n {
                let k = rng.gen_range(1..=shape.max_k.min(m));
                let size = rng.gen_range(1..=shape.max_domain);
                let (d, steps) = gen_random_k_minded(rng.gen(), size, m, k, MAX_VALUE / k)?;
                domains.push(d);
                step_sets.push(steps);
            }
            let reports = random_reports(&mut rng, &domains);
            Ok(KMindedEntry {
                instance: AuctionInstance::new(m, domains, reports)?,
                step_sets,
            })
        })
        .collect()
}

/// Single-crossing instances with every marginal drawn up to
/// `max_value / m`.
pub fn general_corpus(seed: u64, count: usize, shape: &Shape, max_value: u64) -> Result<Vec<AuctionInstance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=shape.max_players);
            let m = rng.gen_range(1..=shape.max_items);
            let domains = (0..n)
                .map(|_| {
                    let size = rng.gen_range(1..=shape.max_domain);
                    gen_random_single_crossing(rng.gen(), size, m, max_value / m)
                })
                .collect::<Result<Vec<_>>>()?;
            let reports = random_reports(&mut rng, &domains);
            AuctionInstance::new(m, domains, reports)
        })
        .collect()
}

/// Known single-minded instances: each player has one demand and increasing
/// values up to `MAX_VALUE`.
pub fn single_minded_corpus(seed: u64, count: usize, shape: &Shape) -> Result<Vec<AuctionInstance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=shape.max_players);
            let m = rng.gen_range(1..=shape.max_items);
            let domains = (0..n)
                .map(|_| {
                    let size = rng.gen_range(1..=shape.max_domain);
                    gen_random_single_minded(rng.gen(), size, m, MAX_VALUE)
                })
                .collect::<Result<Vec<_>>>()?;
            let reports = random_reports(&mut rng, &domains);
            AuctionInstance::new(m, domains, reports)
        })
        .collect()
}

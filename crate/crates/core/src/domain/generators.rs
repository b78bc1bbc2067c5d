//! Random domains and the fixed hardness constructions.

use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Allocation, AuctionInstance, CnfFormula, Domain, KMindedStructure, Role, Valuation, Witness};
use crate::error::{Error, Result};

fn check_size(size: u64, m: u64) -> Result<()> {
    if size == 0 || m == 0 {
        return Err(Error::Parameter("size and m must be positive".into()));
    }
    if size.saturating_mul(m + 1) > 1 << 24 {
        return Err(Error::Capacity(format!(
            "random domain of {size} valuations over {m} items is too large"
        )));
    }
    Ok(())
}

/// `size` sorted draws from `0..=max` per quantity, so every marginal is
/// non-decreasing along the order.
fn sorted_columns(rng: &mut ChaCha8Rng, size: u64, quantities: &[u64], max: u64) -> Vec<Vec<u64>> {
    quantities
        .iter()
        .map(|_| {
            let mut col: Vec<u64> = (0..size).map(|_| rng.gen_range(0..=max)).collect();
            col.sort_unstable();
            col
        })
        .collect()
}

fn from_marginals(size: u64, m: u64, steps: &[u64], columns: &[Vec<u64>]) -> Result<Domain> {
    let vals = (0..size as usize)
        .map(|t| {
            let mut values = vec![BigUint::default(); m as usize + 1];
            let mut acc = 0u64;
            let mut next = 0;
            for s in 1..=m {
                if next < steps.len() && steps[next] == s {
                    acc += columns[next][t];
                    next += 1;
                }
                values[s as usize] = BigUint::from(acc);
            }
            Valuation::new(values)
        })
        .collect::<Result<Vec<_>>>()?;
    Domain::explicit(vals)
}

/// Random single-crossing domain with every marginal drawn from
/// `0..=max_marginal`.
pub fn gen_random_single_crossing(seed: u64, size: u64, m: u64, max_marginal: u64) -> Result<Domain> {
    check_size(size, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps: Vec<u64> = (1..=m).collect();
    let columns = sorted_columns(&mut rng, size, &steps, max_marginal);
    from_marginals(size, m, &steps, &columns)
}

/// Random single-crossing domain whose valuations only increase at `k`
/// uniformly chosen quantities.
pub fn gen_random_k_minded(
    seed: u64,
    size: u64,
    m: u64,
    k: u64,
    max_marginal: u64,
) -> Result<(Domain, KMindedStructure)> {
    check_size(size, m)?;
    if k == 0 || k > m {
        return Err(Error::Parameter(format!("k must be in 1..={m}, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps: Vec<u64> = sample(&mut rng, m as usize, k as usize)
        .into_iter()
        .map(|i| i as u64 + 1)
        .collect();
    steps.sort_unstable();
    let columns = sorted_columns(&mut rng, size, &steps, max_marginal);
    let domain = from_marginals(size, m, &steps, &columns)?;
    Ok((domain, KMindedStructure::new(steps, m)?))
}

/// Known single-minded domain: one random demand `q`, values drawn from
/// `0..=max_value` in increasing order.
pub fn gen_random_single_minded(seed: u64, size: u64, m: u64, max_value: u64) -> Result<Domain> {
    check_size(size, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = rng.gen_range(1..=m);
    let columns = sorted_columns(&mut rng, size, &[q], max_value);
    from_marginals(size, m, &[q], &columns)
}

/// Alice's and Bob's domains for the welfare-versus-objective separation over
/// `m = 2^bits` items. Index `x` is the scalar.
pub fn gen_separation_domains(bits: u32, witness: Witness) -> Result<(Domain, Domain)> {
    Ok((
        Domain::separation(bits, Role::Alice, witness.clone())?,
        Domain::separation(bits, Role::Bob, witness)?,
    ))
}

/// Two-player domains indexed by formula ordinal over `m = 2^vars` items.
/// Quantity `s` reads as the assignment `s mod m`.
pub fn gen_sat_twoplayer_domains(vars: u32) -> Result<(Domain, Domain)> {
    Ok((Domain::sat(vars, Role::Alice)?, Domain::sat(vars, Role::Bob)?))
}

/// Same valuations restricted to the given formulas, ordered by ordinal.
/// Returns the domains and each input formula's index in them.
pub fn gen_sat_twoplayer_from_formulas(
    vars: u32,
    formulas: &[CnfFormula],
) -> Result<(Domain, Domain, Vec<u64>)> {
    let full = gen_sat_twoplayer_domains(vars)?;
    let mut ordinals = formulas
        .iter()
        .map(|phi| {
            if phi.num_vars() != vars {
                return Err(Error::Parameter(format!(
                    "formula over {} variables, expected {vars}",
                    phi.num_vars()
                )));
            }
            phi.ordinal_u64()
        })
        .collect::<Result<Vec<_>>>()?;
    let requested = ordinals.clone();
    ordinals.sort_unstable();
    ordinals.dedup();
    let pick = |d: &Domain| {
        let vals = ordinals
            .iter()
            .map(|&x| d.valuation(x).map(|v| v.into_owned()))
            .collect::<Result<Vec<_>>>()?;
        Domain::explicit(vals)
    };
    let index = requested
        .iter()
        .map(|x| ordinals.binary_search(x).expect("present") as u64)
        .collect();
    Ok((pick(&full.0)?, pick(&full.1)?, index))
}

/// Two-player linear setting whose allocation rule encodes a formula's
/// satisfying assignments. Alice's scalars are `0..=m`, Bob's are formula
/// ordinals.
#[derive(Clone, Debug)]
pub struct PaymentHardnessInstance {
    pub vars: u32,
    pub m: u64,
    pub formula: CnfFormula,
}

pub fn gen_payment_hardness_instance(vars: u32, formula: CnfFormula) -> Result<PaymentHardnessInstance> {
    if vars == 0 || vars > 20 {
        return Err(Error::Parameter(format!(
            "number of variables must be in 1..=20, got {vars}"
        )));
    }
    if formula.num_vars() != vars {
        return Err(Error::Parameter(format!(
            "formula over {} variables, expected {vars}",
            formula.num_vars()
        )));
    }
    Ok(PaymentHardnessInstance {
        vars,
        m: 1u64 << vars,
        formula,
    })
}

impl PaymentHardnessInstance {
    /// Items Alice receives with scalar `theta` in `0..=m`.
    pub fn alice_items(&self, theta: u64) -> u64 {
        if theta == 0 || theta >= self.m {
            theta.min(self.m)
        } else if self.formula.satisfied_by(theta) {
            theta + 1
        } else {
            theta
        }
    }

    pub fn allocation(&self, theta: u64) -> Allocation {
        Allocation(vec![self.alice_items(theta), 0])
    }

    pub fn alice_domain(&self) -> Result<Domain> {
        Domain::linear(self.m, self.m + 1)
    }

    pub fn bob_domain(&self) -> Result<Domain> {
        Domain::linear(self.m, CnfFormula::count(self.vars)?)
    }

    pub fn instance(&self, theta: u64) -> Result<AuctionInstance> {
        AuctionInstance::new(
            self.m,
            vec![self.alice_domain()?, self.bob_domain()?],
            vec![theta, self.formula.ordinal_u64()?],
        )
    }
}

/// Domain of `ceil(m / log2 m)` valuations in which every quantity is needed
/// by some valuation: each adds a block of doubling values below the previous
/// one's support. The last block is clipped at quantity 1 when `log2 m` does
/// not divide `m`.
pub fn gen_nosketch_domain(m: u64) -> Result<Domain> {
    if !m.is_power_of_two() || m < 4 {
        return Err(Error::Parameter(format!(
            "m must be a power of two, at least 4, got {m}"
        )));
    }
    if m > 1 << 12 {
        return Err(Error::Capacity(format!("m = {m} is too large")));
    }
    let log = i64::from(m.trailing_zeros());
    let mi = m as i64;
    let count = (mi + log - 1) / log;
    let mut vals: Vec<Vec<BigUint>> = Vec::with_capacity(count as usize);
    for x in 1..=count {
        let lo = mi - x * log;
        let hi = mi - (x - 1) * log;
        let mut values = vec![BigUint::default(); m as usize + 1];
        for s in 1..=mi {
            let su = s as usize;
            values[su] = if s <= lo {
                BigUint::default()
            } else if s <= hi {
                BigUint::from(1u32) << (s - lo) as u64
            } else {
                let prev = vals.last().expect("x > 1 above the first block");
                &values[su - 1] + &prev[su] - &prev[su - 1]
            };
        }
        vals.push(values);
    }
    Domain::explicit(vals.into_iter().map(Valuation::new).collect::<Result<_>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate_domain;

    fn val(d: &Domain, t: u64, s: u64) -> u64 {
        u64::try_from(d.value(t, s).unwrap()).unwrap()
    }

    #[test]
    fn random_domains_validate() {
        for seed in 0..100 {
            let d = gen_random_single_crossing(seed, 1 + seed % 6, 1 + seed % 9, 7).unwrap();
            assert_eq!(validate_domain(&d), Ok(()), "seed {seed}");
            let (d, k) = gen_random_k_minded(seed, 5, 12, 1 + seed % 4, 50).unwrap();
            assert_eq!(validate_domain(&d), Ok(()), "seed {seed}");
            assert!((0..d.size()).all(|t| k.admits(&d.valuation(t).unwrap())));
            let d = gen_random_single_minded(seed, 4, 6, 30).unwrap();
            assert_eq!(validate_domain(&d), Ok(()), "seed {seed}");
            assert!((0..4).all(|t| d.valuation(t).unwrap().as_single_minded().is_some()));
        }
    }

    #[test]
    fn random_generation_is_deterministic() {
        let a = gen_random_single_crossing(7, 4, 8, 9).unwrap();
        let b = gen_random_single_crossing(7, 4, 8, 9).unwrap();
        assert_eq!(a.materialize(1000).unwrap(), b.materialize(1000).unwrap());
    }

    #[test]
    fn zero_marginal_gives_zero_domain() {
        let d = gen_random_single_crossing(3, 3, 5, 0).unwrap();
        assert!((0..3).all(|t| d.valuation(t).unwrap().is_zero()));
    }

    #[test]
    fn separation_values() {
        let (a, b) = gen_separation_domains(2, Witness::Modular).unwrap();
        assert_eq!(a.size(), 4);
        assert_eq!(a.m(), 4);
        // witness(1, s) holds at s = 3
        assert_eq!(val(&a, 1, 3), 123);
        assert_eq!(val(&a, 1, 2), 118);
        assert!((1..=4).all(|s| val(&a, 0, s) == 100));
        assert_eq!(val(&b, 3, 1), 42);
        assert!((2..=4).all(|s| val(&b, 3, s) - val(&b, 3, s - 1) == 12));
        assert_eq!(validate_domain(&a), Ok(()));
        assert_eq!(validate_domain(&b), Ok(()));
        let (a3, b3) = gen_separation_domains(3, Witness::Modular).unwrap();
        assert_eq!(validate_domain(&a3), Ok(()));
        assert_eq!(validate_domain(&b3), Ok(()));
    }

    #[test]
    fn modular_witness_is_total() {
        let w = Witness::Modular;
        for m in [2u64, 4, 8, 16] {
            for x in 0..m {
                assert!(w.find(x, m).is_some());
            }
        }
    }

    #[test]
    fn sat_domains() {
        let (a, b) = gen_sat_twoplayer_domains(2).unwrap();
        assert_eq!(a.size(), 16);
        assert_eq!(a.m(), 4);
        assert_eq!(validate_domain(&a), Ok(()));
        assert_eq!(validate_domain(&b), Ok(()));
        let grand: Vec<_> = (0..16).map(|t| a.grand_bundle(t).unwrap()).collect();
        assert!(grand.windows(2).all(|w| w[0] < w[1]));
        // Every clause over two variables is a tautology, so the bonus always fires.
        assert!((1..16).all(|t| (1..=4).all(|s| val(&a, t, s) == 4 * s * t + 1)));
        assert!(matches!(gen_sat_twoplayer_domains(5), Err(Error::Capacity(_))));
    }

    #[test]
    fn sat_from_formulas_orders_by_ordinal() {
        let f1 = CnfFormula::parse(3, "1 2 3").unwrap();
        let f2 = CnfFormula::parse(3, "-1 -2 -3; 1 2 3").unwrap();
        let f0 = CnfFormula::empty(3).unwrap();
        let (a, b, idx) = gen_sat_twoplayer_from_formulas(3, &[f2.clone(), f0, f1.clone()]).unwrap();
        assert_eq!(a.size(), 3);
        assert_eq!(idx, vec![2, 0, 1]);
        assert_eq!(validate_domain(&a), Ok(()));
        assert_eq!(validate_domain(&b), Ok(()));
        let x = f2.ordinal_u64().unwrap();
        // assignment 0 falsifies 1 2 3
        assert_eq!(a.value(2, 8).unwrap(), BigUint::from(32 * x));
        assert_eq!(a.value(2, 1).unwrap(), BigUint::from(4 * x + 1));
    }

    #[test]
    fn payment_hardness_rule() {
        // satisfied only by assignment 2: x1 false, x2 true
        let phi = CnfFormula::parse(2, "2; -1").unwrap();
        let sat: Vec<u64> = (0..4).filter(|&a| phi.satisfied_by(a)).collect();
        assert_eq!(sat, vec![2]);
        let inst = gen_payment_hardness_instance(2, phi).unwrap();
        assert_eq!(inst.allocation(0), Allocation(vec![0, 0]));
        assert_eq!(inst.allocation(4), Allocation(vec![4, 0]));
        assert_eq!(inst.allocation(2), Allocation(vec![3, 0]));
        assert_eq!(inst.allocation(1), Allocation(vec![1, 0]));
        let all = "1 2 3; 1 2 -3; 1 -2 3; 1 -2 -3; -1 2 3; -1 2 -3; -1 -2 3; -1 -2 -3";
        let inst = gen_payment_hardness_instance(3, CnfFormula::parse(3, all).unwrap()).unwrap();
        assert!((0..=8).all(|t| inst.alice_items(t) == t));
    }

    #[test]
    fn nosketch_layout() {
        let d = gen_nosketch_domain(16).unwrap();
        assert_eq!(d.size(), 4);
        assert_eq!(val(&d, 0, 16), 16);
        assert_eq!(val(&d, 0, 12), 0);
        assert_eq!(val(&d, 1, 12), 16);
        assert_eq!(val(&d, 1, 16), 32);
        assert_eq!(val(&d, 3, 16), 64);
        assert_eq!(validate_domain(&d), Ok(()));
        let d = gen_nosketch_domain(64).unwrap();
        assert_eq!(d.size(), 11);
        assert_eq!(validate_domain(&d), Ok(()));
        let d = gen_nosketch_domain(8).unwrap();
        assert_eq!(d.size(), 3);
        assert_eq!(val(&d, 2, 1), 4);
        assert_eq!(validate_domain(&d), Ok(()));
        assert!(gen_nosketch_domain(12).is_err());
    }
}

use num_bigint::BigUint;

use super::MechanismResult;
use crate::domain::AuctionInstance;
use crate::error::{Error, Result};
use crate::rational;
use crate::solver::max_welfare_exact;

/// Default bound on `n (n + 1) (m + 1)^2`, the work of the exact solves.
pub const VCG_DEFAULT_CAP: u64 = 1 << 28;

pub fn vcg_exact(instance: &AuctionInstance) -> Result<MechanismResult> {
    vcg_exact_capped(instance, VCG_DEFAULT_CAP)
}

/// Welfare-maximizing allocation, ties broken by the allocation order, with
/// Clarke pivot payments.
pub fn vcg_exact_capped(instance: &AuctionInstance, cap: u64) -> Result<MechanismResult> {
    let n = instance.n() as u64;
    let m = instance.m();
    let work = n
        .saturating_mul(n + 1)
        .saturating_mul((m + 1).saturating_mul(m + 1));
    if work > cap {
        return Err(Error::Capacity(format!(
            "exact welfare maximization over {n} players and {m} items exceeds cap {cap}"
        )));
    }
    let vals = instance.valuations();
    let refs: Vec<_> = vals.iter().collect();
    let (allocation, welfare) = max_welfare_exact(&refs, m)?;
    let payments = (0..vals.len())
        .map(|i| {
            let others: Vec<_> = refs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| *v).collect();
            let (_, without_i) = max_welfare_exact(&others, m)?;
            let others_now: BigUint = &welfare - vals[i].value(allocation.get(i));
            Ok(rational::from_uint(&without_i) - rational::from_uint(&others_now))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MechanismResult {
        allocation,
        welfare,
        delta: None,
        top: vec![false; vals.len()],
        sketch_sizes: Vec::new(),
        payments: Some(payments),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Allocation, Domain};
    use crate::rational::Rational;

    #[test]
    fn single_player_pays_nothing() {
        let d = Domain::from_tables(&[&[0, 3, 4]]).unwrap();
        let inst = AuctionInstance::new(2, vec![d], vec![0]).unwrap();
        let r = vcg_exact(&inst).unwrap();
        assert_eq!(r.allocation, Allocation(vec![2]));
        assert_eq!(r.payments.unwrap(), vec![Rational::from_integer(0.into())]);
    }

    #[test]
    fn clarke_payments() {
        // one item, values 5 and 3: winner pays 3
        let a = Domain::from_tables(&[&[0, 5]]).unwrap();
        let b = Domain::from_tables(&[&[0, 3]]).unwrap();
        let inst = AuctionInstance::new(1, vec![a, b], vec![0, 0]).unwrap();
        let r = vcg_exact(&inst).unwrap();
        assert_eq!(r.allocation, Allocation(vec![1, 0]));
        let p: Vec<String> = r.payments.unwrap().iter().map(crate::rational::format).collect();
        assert_eq!(p, vec!["3/1", "0/1"]);
    }

    #[test]
    fn capacity_refusal() {
        let d = Domain::from_tables(&[&[0, 1, 2, 3]]).unwrap();
        let inst = AuctionInstance::new(3, vec![d], vec![0]).unwrap();
        assert!(matches!(vcg_exact_capped(&inst, 10), Err(Error::Capacity(_))));
    }
}

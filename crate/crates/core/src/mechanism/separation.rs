use crate::domain::{Allocation, AuctionInstance, Witness};
use crate::error::{Error, Result};

fn reports(instance: &AuctionInstance) -> Result<(u64, u64)> {
    match instance.reports() {
        &[a, b] => Ok((a, b)),
        other => Err(Error::Parameter(format!(
            "separation instances have two players, got {}",
            other.len()
        ))),
    }
}

/// Objective of the separation construction for reports `(a, b)`: 2 for the
/// intended allocation (all to Alice when `a > b`, one item to Alice when
/// `b > a`, a witness split when `a = b`), 1 for all to Bob when `a = b`,
/// otherwise 0.
pub fn separation_score(instance: &AuctionInstance, allocation: &Allocation, witness: &Witness) -> Result<u8> {
    let (a, b) = reports(instance)?;
    let m = instance.m();
    instance.check_allocation(allocation)?;
    let (sa, sb) = (allocation.get(0), allocation.get(1));
    let score = if a > b {
        if (sa, sb) == (m, 0) { 2 } else { 0 }
    } else if b > a {
        if (sa, sb) == (1, m - 1) { 2 } else { 0 }
    } else {
        if witness.find(a, m).is_none() {
            return Err(Error::Parameter(format!("witness predicate has no witness for {a}")));
        }
        if sa > 1 && sa + sb == m && witness.holds(a, sa, m) {
            2
        } else if (sa, sb) == (0, m) {
            1
        } else {
            0
        }
    };
    Ok(score)
}

/// All to Alice when `a > b`, one item to Alice and the rest to Bob when
/// `b > a`, all to Bob on ties.
pub fn separation_greedy(instance: &AuctionInstance) -> Result<Allocation> {
    let (a, b) = reports(instance)?;
    let m = instance.m();
    Ok(Allocation(if a > b {
        vec![m, 0]
    } else if b > a {
        vec![1, m - 1]
    } else {
        vec![0, m]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::generators::gen_separation_domains;

    fn inst(a: u64, b: u64) -> AuctionInstance {
        let (da, db) = gen_separation_domains(3, Witness::Modular).unwrap();
        AuctionInstance::new(8, vec![da, db], vec![a, b]).unwrap()
    }

    #[test]
    fn scores() {
        let w = Witness::Modular;
        assert_eq!(separation_score(&inst(5, 2), &Allocation(vec![8, 0]), &w).unwrap(), 2);
        assert_eq!(separation_score(&inst(5, 2), &Allocation(vec![7, 1]), &w).unwrap(), 0);
        assert_eq!(separation_score(&inst(4, 4), &Allocation(vec![0, 8]), &w).unwrap(), 1);
        // witness(4) is 2 + 4 mod 7 = 6
        assert_eq!(separation_score(&inst(4, 4), &Allocation(vec![6, 2]), &w).unwrap(), 2);
        assert_eq!(separation_score(&inst(4, 4), &Allocation(vec![2, 6]), &w).unwrap(), 0);
        let never = Witness::Custom(std::sync::Arc::new(|_, _| false));
        assert!(separation_score(&inst(4, 4), &Allocation(vec![0, 8]), &never).is_err());
    }

    #[test]
    fn greedy() {
        let w = Witness::Modular;
        assert_eq!(separation_greedy(&inst(3, 5)).unwrap(), Allocation(vec![1, 7]));
        let tie = inst(4, 4);
        let g = separation_greedy(&tie).unwrap();
        assert_eq!(g, Allocation(vec![0, 8]));
        assert_eq!(separation_score(&tie, &g, &w).unwrap(), 1);
        for a in 0..8 {
            for b in 0..8 {
                let i = inst(a, b);
                assert!(separation_score(&i, &separation_greedy(&i).unwrap(), &w).unwrap() >= 1);
            }
        }
    }
}

use std::collections::HashMap;

use num_bigint::BigInt;

use super::AllocationRule;
use crate::domain::{AuctionInstance, Domain};
use crate::error::{Error, Result};
use crate::rational::Rational;

fn value(domain: &Domain, t: u64, s: u64) -> Result<BigInt> {
    Ok(BigInt::from(domain.value(t, s)?))
}

/// `v^[hi](s) - v^[lo](s)`.
fn gain(domain: &Domain, hi: u64, lo: u64, s: u64) -> Result<BigInt> {
    Ok(value(domain, hi, s)? - value(domain, lo, s)?)
}

/// Smallest `x` in `lo..hi` with `pred(x)`, for a predicate monotone in `x`.
fn first_true(lo: u64, hi: u64, mut pred: impl FnMut(u64) -> Result<bool>) -> Result<Option<u64>> {
    let (mut a, mut b) = (lo, hi);
    while a < b {
        let mid = a + (b - a) / 2;
        if pred(mid)? {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    Ok((a < hi).then_some(a))
}

/// Price of the quantity a player reporting `t` receives, where `f` maps
/// each index of the player's domain to its quantity with the other reports
/// fixed. Walks the distinct quantities of `f` on `0..=t` in increasing order,
/// locating each jump by binary search; crossing from `a` to `b` at index
/// `tau` costs `v^[tau](b) - v^[tau](a)`. The first quantity `a_1` costs
/// `v^[0](a_1)`, which is 0 whenever `a_1 = 0`.
pub fn threshold_payment_for(domain: &Domain, t: u64, mut f: impl FnMut(u64) -> Result<u64>) -> Result<Rational> {
    let top = f(t)?;
    let mut a = f(0)?;
    if a > top {
        return Err(Error::Integrity(format!(
            "allocation {a} at index 0 exceeds {top} at index {t}"
        )));
    }
    let mut pay = value(domain, 0, a)?;
    let mut tau = 0;
    while a < top {
        let next = first_true(tau + 1, t + 1, |x| Ok(f(x)? > a))?.ok_or_else(|| {
            Error::Integrity("allocation is not monotone in the report".into())
        })?;
        let b = f(next)?;
        if b > top || f(next - 1)? != a {
            return Err(Error::Integrity(format!(
                "allocation is not monotone in the report near index {next}"
            )));
        }
        pay += value(domain, next, b)? - value(domain, next, a)?;
        tau = next;
        a = b;
    }
    Ok(Rational::from_integer(pay))
}

/// `v^[t](f(t)) - sum_{d=1..t} [v^[d](f(d-1)) - v^[d-1](f(d-1))]`.
pub fn telescoping_payment_for(domain: &Domain, t: u64, mut f: impl FnMut(u64) -> Result<u64>) -> Result<Rational> {
    let mut sum = BigInt::default();
    for d in 1..=t {
        sum += gain(domain, d, d - 1, f(d - 1)?)?;
    }
    Ok(Rational::from_integer(value(domain, t, f(t)?)? - sum))
}

/// One-sample estimate `v^[t](f(t)) - t (v^[d](f(d-1)) - v^[d-1](f(d-1)))`
/// with `d` in `1..=t`; its mean over `d` is the telescoping payment. With
/// `t = 0` it is the deterministic `v^[0](f(0))`.
pub fn estimator_payment_for(
    domain: &Domain,
    t: u64,
    d: u64,
    mut f: impl FnMut(u64) -> Result<u64>,
) -> Result<Rational> {
    let own = value(domain, t, f(t)?)?;
    if t == 0 {
        return Ok(Rational::from_integer(own));
    }
    if d == 0 || d > t {
        return Err(Error::Range(format!("sample index {d} outside 1..={t}")));
    }
    let g = gain(domain, d, d - 1, f(d - 1)?)?;
    Ok(Rational::from_integer(own - BigInt::from(t) * g))
}

/// Player `i`'s quantity as a function of its report, memoized.
fn player_map<'a>(
    rule: &'a dyn AllocationRule,
    instance: &'a AuctionInstance,
    i: usize,
) -> impl FnMut(u64) -> Result<u64> + 'a {
    let mut cache: HashMap<u64, u64> = HashMap::new();
    move |t| {
        if let Some(&q) = cache.get(&t) {
            return Ok(q);
        }
        let q = rule.allocate(&instance.with_report(i, t)?)?.get(i);
        cache.insert(t, q);
        Ok(q)
    }
}

pub fn threshold_payments(rule: &dyn AllocationRule, instance: &AuctionInstance) -> Result<Vec<Rational>> {
    (0..instance.n())
        .map(|i| threshold_payment_for(instance.domain(i), instance.report(i), player_map(rule, instance, i)))
        .collect()
}

pub fn telescoping_payments(rule: &dyn AllocationRule, instance: &AuctionInstance) -> Result<Vec<Rational>> {
    (0..instance.n())
        .map(|i| telescoping_payment_for(instance.domain(i), instance.report(i), player_map(rule, instance, i)))
        .collect()
}

pub fn sample_payment_estimator(
    rule: &dyn AllocationRule,
    instance: &AuctionInstance,
    i: usize,
    d: u64,
) -> Result<Rational> {
    if i >= instance.n() {
        return Err(Error::Range(format!("player {i} outside 0..{}", instance.n())));
    }
    estimator_payment_for(instance.domain(i), instance.report(i), d, player_map(rule, instance, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Allocation;
    use crate::mechanism::vcg_exact;
    use crate::rational::parse;

    fn q(s: &str) -> Rational {
        parse(s).unwrap()
    }

    fn one_item_instance(report: u64) -> AuctionInstance {
        let mine = Domain::from_tables(&[&[0, 0], &[0, 3], &[0, 5]]).unwrap();
        AuctionInstance::new(1, vec![mine], vec![report]).unwrap()
    }

    fn welfare_max(inst: &AuctionInstance) -> Result<Allocation> {
        Ok(vcg_exact(inst)?.allocation)
    }

    #[test]
    fn threshold_and_telescoping_examples() {
        let inst = one_item_instance(2);
        assert_eq!(threshold_payments(&welfare_max, &inst).unwrap(), vec![q("3")]);
        assert_eq!(telescoping_payments(&welfare_max, &inst).unwrap(), vec![q("3")]);
        let inst = one_item_instance(0);
        assert_eq!(threshold_payments(&welfare_max, &inst).unwrap(), vec![q("0")]);
        assert_eq!(telescoping_payments(&welfare_max, &inst).unwrap(), vec![q("0")]);
    }

    #[test]
    fn estimator_mean_is_telescoping() {
        let inst = one_item_instance(2);
        let samples: Vec<Rational> = (1..=2)
            .map(|d| sample_payment_estimator(&welfare_max, &inst, 0, d).unwrap())
            .collect();
        // d = 1: 5 - 2 (0 - 0) = 5; d = 2: 5 - 2 (5 - 3) = 1
        assert_eq!(samples, vec![q("5"), q("1")]);
        assert_eq!((&samples[0] + &samples[1]) / q("2"), q("3"));
        assert!(sample_payment_estimator(&welfare_max, &inst, 0, 3).is_err());
        let inst = one_item_instance(0);
        assert_eq!(sample_payment_estimator(&welfare_max, &inst, 0, 0).unwrap(), q("0"));
    }

    #[test]
    fn multi_step_threshold() {
        // quantity 0, 1, 1, 3 along the domain
        let d = Domain::from_tables(&[&[0, 1, 2, 3], &[0, 2, 3, 5], &[0, 3, 5, 7], &[0, 4, 7, 10]]).unwrap();
        let f = |t: u64| Ok([0u64, 1, 1, 3][t as usize]);
        // 0 at index 0, jump to 1 at index 1 costs 2, jump to 3 at index 3 costs 10 - 4
        assert_eq!(threshold_payment_for(&d, 3, f).unwrap(), q("8"));
        assert_eq!(telescoping_payment_for(&d, 3, f).unwrap(), q("8"));
    }

    #[test]
    fn non_monotone_rule_is_rejected() {
        let d = Domain::from_tables(&[&[0, 1, 2], &[0, 2, 3], &[0, 3, 5]]).unwrap();
        let f = |t: u64| Ok([1u64, 2, 0][t as usize]);
        assert!(matches!(threshold_payment_for(&d, 2, f), Err(Error::Integrity(_))));
        let g = |t: u64| Ok([0u64, 2, 1][t as usize]);
        assert!(matches!(threshold_payment_for(&d, 2, g), Err(Error::Integrity(_))));
    }
}

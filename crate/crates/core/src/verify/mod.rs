//! Exhaustive checkers and brute-force oracles.

pub mod corpus;
mod report;
pub mod suites;
mod table;

use std::cmp::Reverse;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::domain::{Allocation, AuctionInstance, CnfFormula, Domain, Valuation};
use crate::error::{Error, Result};
use crate::mechanism::AllocationRule;
use crate::rational::{self, Rational};
use crate::rounding::{project, Sketch};

pub use report::ViolationReport;
pub use table::{
    telescoping_payment_fn, threshold_payment_fn, zero_payment_fn, PaymentFn, ProfileTable,
};

/// Default bound on enumerated report profiles.
pub const DEFAULT_PROFILE_CAP: u64 = 1_000_000;
/// Default bound on enumerated allocations in [`brute_force_opt`].
pub const DEFAULT_ALLOCATION_CAP: u64 = 10_000_000;
/// Default bound on inequality evaluations in the domain checkers.
pub const DEFAULT_WORK_CAP: u64 = 100_000_000;

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Optimal welfare by enumerating every allocation, with the preferred
/// optimal allocation: fewest items in total, then the most items to the
/// highest-indexed player where candidates differ.
pub fn brute_force_opt(instance: &AuctionInstance) -> Result<(BigUint, Allocation)> {
    brute_force_opt_capped(instance, DEFAULT_ALLOCATION_CAP)
}

pub fn brute_force_opt_capped(instance: &AuctionInstance, cap: u64) -> Result<(BigUint, Allocation)> {
    let n = instance.n() as u64;
    let m = instance.m();
    let count = binomial(m + n, n);
    if count > cap {
        return Err(Error::Capacity(format!(
            "{count} allocations of {m} items to {n} players exceed cap {cap}"
        )));
    }
    let vals = instance.valuations();
    let mut current = vec![0u64; vals.len()];
    let mut best: Option<(BigUint, Allocation)> = None;
    enumerate(&vals, m, 0, BigUint::zero(), &mut current, &mut best);
    Ok(best.expect("the empty allocation is feasible"))
}

type Key<'a> = (&'a BigUint, Reverse<u64>, Vec<u64>);

fn key<'a>(welfare: &'a BigUint, alloc: &[u64]) -> Key<'a> {
    let total: u64 = alloc.iter().sum();
    (welfare, Reverse(total), alloc.iter().rev().copied().collect())
}

fn enumerate(
    vals: &[Valuation],
    left: u64,
    i: usize,
    welfare: BigUint,
    current: &mut Vec<u64>,
    best: &mut Option<(BigUint, Allocation)>,
) {
    if i == vals.len() {
        let better = match best {
            None => true,
            Some((w, a)) => key(&welfare, current) > key(w, a.quantities()),
        };
        if better {
            *best = Some((welfare, Allocation(current.clone())));
        }
        return;
    }
    for s in 0..=left {
        current[i] = s;
        enumerate(vals, left - s, i + 1, &welfare + vals[i].value(s), current, best);
    }
    current[i] = 0;
}

/// Pairwise check of `v'(s') - v'(s) >= v(s') - v(s)` for every `t < t'` and
/// `s < s'`, reporting the first failure.
pub fn check_single_crossing(domain: &Domain) -> Result<Option<ViolationReport>> {
    check_single_crossing_capped(domain, DEFAULT_WORK_CAP)
}

pub fn check_single_crossing_capped(domain: &Domain, cap: u64) -> Result<Option<ViolationReport>> {
    let size = domain.size();
    let m = domain.m();
    let work = (size.saturating_mul(size) / 2).saturating_mul((m + 1).saturating_mul(m + 1) / 2);
    if work > cap {
        return Err(Error::Capacity(format!(
            "pairwise check of {size} valuations over {m} items exceeds cap {cap}"
        )));
    }
    let vals = domain.materialize(cap)?;
    Ok(first_pairwise_crossing(&vals))
}

fn first_pairwise_crossing(vals: &[Valuation]) -> Option<ViolationReport> {
    for (t, v) in vals.iter().enumerate() {
        for (t2, w) in vals.iter().enumerate().skip(t + 1) {
            let m = v.m();
            for s in 0..=m {
                for s2 in s + 1..=m {
                    let hi = w.value(s2) + v.value(s);
                    let lo = v.value(s2) + w.value(s);
                    if hi < lo {
                        return Some(ViolationReport::SingleCrossing {
                            t: t as u64,
                            t2: t2 as u64,
                            s,
                            s2,
                            upper_gain: (w.value(s2) - w.value(s)).to_string(),
                            lower_gain: (v.value(s2) - v.value(s)).to_string(),
                        });
                    }
                }
            }
        }
    }
    None
}

/// Every player's quantity is non-decreasing in its own report, for every
/// profile of the others.
pub fn check_allocation_monotone(
    rule: &dyn AllocationRule,
    domains: &[Domain],
    m: u64,
    cap: u64,
) -> Result<Option<ViolationReport>> {
    let table = ProfileTable::build(rule, domains, m, cap)?;
    Ok(table.monotone_violation())
}

/// Whenever a lower report receives more items than a higher one, both
/// valuations must value the difference equally.
pub fn check_tiebreak_monotone(
    rule: &dyn AllocationRule,
    domains: &[Domain],
    m: u64,
    cap: u64,
) -> Result<Option<ViolationReport>> {
    let table = ProfileTable::build(rule, domains, m, cap)?;
    table.tiebreak_violation()
}

/// Truthful reporting maximizes utility against every misreport and yields
/// non-negative utility.
pub fn check_incentive_compatible(
    rule: &dyn AllocationRule,
    payment: &PaymentFn,
    domains: &[Domain],
    m: u64,
    cap: u64,
) -> Result<Option<ViolationReport>> {
    let table = ProfileTable::build(rule, domains, m, cap)?;
    table.incentive_violation(payment)
}

/// Verifies the projection error `v(s) - v^K(s) < eps v(m)` for non-zero
/// valuations, that projection keeps the family single crossing in the same
/// order, and the size bound on `K`.
pub fn check_sketch_quality(domain: &Domain, sketch: &Sketch, epsilon: &Rational) -> Result<Option<ViolationReport>> {
    let bound = Sketch::size_bound(domain.bits(), epsilon);
    if sketch.len() as u64 > bound {
        return Ok(Some(ViolationReport::SketchSize { size: sketch.len() as u64, bound }));
    }
    if sketch.points().first() != Some(&0) || sketch.points().last().is_some_and(|&p| p > domain.m()) {
        return Err(Error::Parameter("sketch must contain 0 and lie in 0..=m".into()));
    }
    let vals = domain.materialize(DEFAULT_WORK_CAP)?;
    let mut projected = Vec::with_capacity(vals.len());
    for (t, v) in vals.iter().enumerate() {
        let p = project(v, sketch);
        let allowance = epsilon * rational::from_uint(v.grand_bundle());
        for s in 0..=v.m() {
            let loss = v.value(s) - p.value(s);
            let ok = if v.is_zero() {
                loss.is_zero()
            } else {
                rational::from_uint(&loss) < allowance
            };
            if !ok {
                return Ok(Some(ViolationReport::SketchError {
                    t: t as u64,
                    s,
                    value: v.value(s).to_string(),
                    projected: p.value(s).to_string(),
                    allowance: rational::format(&allowance),
                }));
            }
        }
        projected.push(p);
    }
    if let Some(ViolationReport::SingleCrossing { t, t2, s, s2, .. }) = first_pairwise_crossing(&projected) {
        return Ok(Some(ViolationReport::SketchOrder { t, t2, s, s2 }));
    }
    Ok(None)
}

/// For each quantity `q`, looks for a valuation and quantity where dropping
/// `q` from the full sketch loses at least a factor `factor`: `v(s) > 0` and
/// `factor * v^K(s) <= v(s)`. Reports the first `q` without one.
pub fn check_no_small_sketch(domain: &Domain, factor: u64) -> Result<Option<ViolationReport>> {
    let m = domain.m();
    domain.ensure_materializable(DEFAULT_WORK_CAP)?;
    let vals = domain.materialize(DEFAULT_WORK_CAP)?;
    let eps = Rational::one();
    for q in 1..=m {
        let sketch = Sketch::new((0..=m).filter(|&x| x != q).collect(), eps.clone());
        let loses = vals.iter().any(|v| {
            let p = project(v, &sketch);
            (0..=m).any(|s| !v.value(s).is_zero() && p.value(s) * factor <= *v.value(s))
        });
        if !loses {
            return Ok(Some(ViolationReport::SketchExists { dropped: q, factor }));
        }
    }
    Ok(None)
}

/// Number of satisfying assignments by enumeration.
pub fn count_satisfying(formula: &CnfFormula) -> Result<u64> {
    let k = formula.num_vars();
    if k > 20 {
        return Err(Error::Capacity(format!("{k} variables are too many to enumerate")));
    }
    Ok((0..1u64 << k).filter(|&a| formula.satisfied_by(a)).count() as u64)
}

/// Smallest `welfare / OPT` over the instances, with 1 where `OPT = 0`.
pub fn empirical_ratio<'a>(
    rule: &dyn AllocationRule,
    instances: impl IntoIterator<Item = &'a AuctionInstance>,
) -> Result<Rational> {
    let mut worst = Rational::one();
    for inst in instances {
        let (opt, _) = brute_force_opt(inst)?;
        if opt.is_zero() {
            continue;
        }
        let welfare = inst.welfare(&rule.allocate(inst)?)?;
        let ratio = Rational::new(welfare.into(), opt.into());
        if ratio < worst {
            worst = ratio;
        }
    }
    Ok(worst)
}

use num_bigint::BigUint;
use num_traits::Zero;

use super::MechanismResult;
use crate::domain::{Allocation, AuctionInstance, KMindedStructure, Valuation};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::rounding::{
    apply_rewards, largest_power_at_most, marginal_round, project, select_delta, top_set, RoundedValuation,
    Sketch,
};
use crate::solver::max_welfare_dp;

fn check_epsilon(epsilon: &Rational) -> Result<()> {
    if *epsilon <= Rational::zero() {
        return Err(Error::Parameter("epsilon must be positive".into()));
    }
    Ok(())
}

fn v_max(vals: &[Valuation]) -> BigUint {
    vals.iter().map(|v| v.grand_bundle().clone()).max().unwrap_or_default()
}

/// Rounds, rewards the top players and solves. Returns `None` for all-zero
/// valuations.
fn k_minded_core(
    vals: &[Valuation],
    m: u64,
    step_sets: &[KMindedStructure],
    epsilon: &Rational,
) -> Result<Option<(Allocation, crate::rounding::RoundingParam, Vec<bool>)>> {
    check_epsilon(epsilon)?;
    let vmax = v_max(vals);
    if vmax.is_zero() {
        return Ok(None);
    }
    let n = vals.len() as u64;
    let k = step_sets.iter().map(KMindedStructure::k).max().unwrap_or(0).max(1) as u64;
    let delta = select_delta(epsilon, n, k, &vmax)?;
    let rounded: Vec<RoundedValuation> = vals.iter().map(|v| marginal_round(v, delta)).collect();
    let us = apply_rewards(&rounded, vals, delta, epsilon, k, step_sets);
    let allocation = max_welfare_dp(&us, m)?;
    Ok(Some((allocation, delta, top_set(vals, delta, epsilon, k))))
}

fn welfare(vals: &[Valuation], allocation: &Allocation) -> BigUint {
    vals.iter()
        .zip(allocation.quantities())
        .map(|(v, &s)| v.value(s).clone())
        .sum()
}

/// Approximation scheme for k-minded single-crossing bidders.
pub fn fptas_k_minded(
    instance: &AuctionInstance,
    step_sets: &[KMindedStructure],
    epsilon: &Rational,
) -> Result<MechanismResult> {
    if step_sets.len() != instance.n() {
        return Err(Error::Parameter("one step set per player is required".into()));
    }
    let vals = instance.valuations();
    for (i, (v, k)) in vals.iter().zip(step_sets).enumerate() {
        if !k.admits(v) {
            return Err(Error::InvalidDomain(format!(
                "player {i}'s valuation increases outside its step set"
            )));
        }
    }
    let Some((allocation, delta, top)) = k_minded_core(&vals, instance.m(), step_sets, epsilon)? else {
        return Ok(MechanismResult::zero(instance.n()));
    };
    Ok(MechanismResult {
        welfare: welfare(&vals, &allocation),
        allocation,
        delta: Some(delta),
        top,
        sketch_sizes: Vec::new(),
        payments: None,
    })
}

/// Approximation scheme for arbitrary single-crossing domains. Builds each
/// player's sketch from its whole domain, so the sketches do not depend on
/// the reports.
pub fn fptas_general(instance: &AuctionInstance, epsilon: &Rational) -> Result<MechanismResult> {
    check_epsilon(epsilon)?;
    match super::Mechanism::general(instance.domains(), epsilon)? {
        super::Mechanism::General { sketches, .. } => general_with_sketches(instance, &sketches, epsilon),
        _ => unreachable!(),
    }
}

pub(super) fn general_with_sketches(
    instance: &AuctionInstance,
    sketches: &[Sketch],
    epsilon: &Rational,
) -> Result<MechanismResult> {
    check_epsilon(epsilon)?;
    let m = instance.m();
    let vals = instance.valuations();
    let projected: Vec<Valuation> = vals.iter().zip(sketches).map(|(v, k)| project(v, k)).collect();
    let step_sets = sketches
        .iter()
        .map(|k| k.step_set(m))
        .collect::<Result<Vec<_>>>()?;
    let half = epsilon / Rational::from_integer(2.into());
    let sketch_sizes = sketches.iter().map(Sketch::len).collect();
    let Some((raw, delta, top)) = k_minded_core(&projected, m, &step_sets, &half)? else {
        let mut out = MechanismResult::zero(instance.n());
        out.sketch_sizes = sketch_sizes;
        return Ok(out);
    };
    let allocation = Allocation(
        raw.quantities()
            .iter()
            .zip(sketches)
            .map(|(&s, k)| k.round_down(s))
            .collect(),
    );
    Ok(MechanismResult {
        welfare: welfare(&vals, &allocation),
        allocation,
        delta: Some(delta),
        top,
        sketch_sizes,
        payments: None,
    })
}

/// Approximation scheme for single-minded bidders: each report is read as a
/// value `x` for at least `q` items.
pub fn fptas_single_minded(instance: &AuctionInstance, epsilon: &Rational) -> Result<MechanismResult> {
    check_epsilon(epsilon)?;
    let m = instance.m();
    let vals = instance.valuations();
    let bids = vals
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_single_minded().ok_or_else(|| {
                Error::InvalidDomain(format!("player {i}'s valuation is not single-minded"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let vmax = bids.iter().map(|(x, _)| x.clone()).max().unwrap_or_default();
    if vmax.is_zero() {
        return Ok(MechanismResult::zero(instance.n()));
    }
    let n = instance.n() as u64;
    let bound = epsilon * rational::from_uint(&vmax) / Rational::from_integer((3 * n).into());
    let delta = largest_power_at_most(4, &bound)?;
    // The lowest-indexed player with the largest value gets the bonus.
    let top = bids
        .iter()
        .position(|(x, _)| *x == vmax)
        .expect("maximum is attained");
    let bonus = BigUint::from(2 * n);
    let us: Vec<RoundedValuation> = bids
        .iter()
        .enumerate()
        .map(|(i, (x, q))| {
            let mut level = delta.units_of(x);
            if i == top {
                level += &bonus;
            }
            let units = (0..=m)
                .map(|s| if s >= *q && s > 0 { level.clone() } else { BigUint::zero() })
                .collect();
            RoundedValuation { delta, units }
        })
        .collect();
    let allocation = max_welfare_dp(&us, m)?;
    let mut top_flags = vec![false; instance.n()];
    top_flags[top] = true;
    Ok(MechanismResult {
        welfare: welfare(&vals, &allocation),
        allocation,
        delta: Some(delta),
        top: top_flags,
        sketch_sizes: Vec::new(),
        payments: None,
    })
}

use num_bigint::BigInt;

use super::ViolationReport;
use crate::domain::{Allocation, AuctionInstance, Domain};
use crate::error::{Error, Result};
use crate::mechanism::{telescoping_payment_for, threshold_payment_for, AllocationRule};
use crate::rational::{self, Rational};

/// Payment of a player at a profile, computed from a profile table.
pub type PaymentFn<'a> = dyn Fn(&ProfileTable, usize, &[u64]) -> Result<Rational> + 'a;

/// Allocations of a rule at every report profile.
#[derive(Clone, Debug)]
pub struct ProfileTable {
    template: AuctionInstance,
    sizes: Vec<u64>,
    strides: Vec<usize>,
    allocations: Vec<Allocation>,
}

impl ProfileTable {
    pub fn build(rule: &dyn AllocationRule, domains: &[Domain], m: u64, cap: u64) -> Result<Self> {
        let template = AuctionInstance::new(m, domains.to_vec(), vec![0; domains.len()])?;
        let count = template.profile_count();
        if count > cap {
            return Err(Error::Capacity(format!("{count} report profiles exceed cap {cap}")));
        }
        let sizes: Vec<u64> = domains.iter().map(Domain::size).collect();
        let mut strides = Vec::with_capacity(sizes.len());
        let mut acc = 1usize;
        for &s in &sizes {
            strides.push(acc);
            acc *= s as usize;
        }
        let mut table = ProfileTable {
            template,
            sizes,
            strides,
            allocations: Vec::with_capacity(count as usize),
        };
        for idx in 0..count as usize {
            let profile = table.profile(idx);
            let alloc = rule.allocate(&table.template.with_reports(profile)?)?;
            table.template.check_allocation(&alloc)?;
            table.allocations.push(alloc);
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.allocations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allocations.is_empty()
    }

    pub fn players(&self) -> usize {
        self.sizes.len()
    }

    pub fn domain(&self, i: usize) -> &Domain {
        self.template.domain(i)
    }

    pub fn domains(&self) -> &[Domain] {
        self.template.domains()
    }

    pub fn m(&self) -> u64 {
        self.template.m()
    }

    pub fn instance(&self, profile: &[u64]) -> Result<AuctionInstance> {
        self.template.with_reports(profile.to_vec())
    }

    /// Profile number `idx`, player 0 varying fastest.
    pub fn profile(&self, idx: usize) -> Vec<u64> {
        self.sizes
            .iter()
            .zip(&self.strides)
            .map(|(&size, &stride)| ((idx / stride) as u64) % size)
            .collect()
    }

    pub fn index(&self, profile: &[u64]) -> usize {
        profile.iter().zip(&self.strides).map(|(&t, &st)| t as usize * st).sum()
    }

    pub fn allocation(&self, profile: &[u64]) -> &Allocation {
        &self.allocations[self.index(profile)]
    }

    /// Player `i`'s quantity when it reports `t` and the others follow
    /// `profile`.
    pub fn quantity_at(&self, i: usize, profile: &[u64], t: u64) -> u64 {
        let idx = self.index(profile) - profile[i] as usize * self.strides[i] + t as usize * self.strides[i];
        self.allocations[idx].get(i)
    }

    /// Profiles in which player `i` reports 0.
    fn base_profiles(&self, i: usize) -> impl Iterator<Item = Vec<u64>> + '_ {
        (0..self.len()).map(|idx| self.profile(idx)).filter(move |p| p[i] == 0)
    }

    pub fn monotone_violation(&self) -> Option<ViolationReport> {
        for i in 0..self.players() {
            for base in self.base_profiles(i) {
                for t in 1..self.sizes[i] {
                    let (lo, hi) = (self.quantity_at(i, &base, t - 1), self.quantity_at(i, &base, t));
                    if hi < lo {
                        let mut profile = base.clone();
                        profile[i] = t - 1;
                        return Some(ViolationReport::Monotonicity {
                            player: i,
                            profile,
                            t2: t,
                            quantity: lo,
                            quantity2: hi,
                        });
                    }
                }
            }
        }
        None
    }

    pub fn tiebreak_violation(&self) -> Result<Option<ViolationReport>> {
        for i in 0..self.players() {
            let d = self.domain(i);
            for base in self.base_profiles(i) {
                for t in 0..self.sizes[i] {
                    let q = self.quantity_at(i, &base, t);
                    for t2 in t + 1..self.sizes[i] {
                        let q2 = self.quantity_at(i, &base, t2);
                        if q2 >= q {
                            continue;
                        }
                        let upper = BigInt::from(d.value(t2, q)?) - BigInt::from(d.value(t2, q2)?);
                        let lower = BigInt::from(d.value(t, q)?) - BigInt::from(d.value(t, q2)?);
                        if upper != lower {
                            let mut profile = base.clone();
                            profile[i] = t;
                            return Ok(Some(ViolationReport::TieBreakMonotonicity {
                                player: i,
                                profile,
                                t2,
                                quantity: q,
                                quantity2: q2,
                                upper_gain: upper.to_string(),
                                lower_gain: lower.to_string(),
                            }));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    /// Payments for every player at every profile, indexed `[profile][player]`.
    pub fn payments(&self, payment: &PaymentFn) -> Result<Vec<Vec<Rational>>> {
        (0..self.len())
            .map(|idx| {
                let p = self.profile(idx);
                (0..self.players()).map(|i| payment(self, i, &p)).collect()
            })
            .collect()
    }

    pub fn incentive_violation(&self, payment: &PaymentFn) -> Result<Option<ViolationReport>> {
        let payments = self.payments(payment)?;
        for idx in 0..self.len() {
            let profile = self.profile(idx);
            for i in 0..self.players() {
                let d = self.domain(i);
                let truth = profile[i];
                let utility = |report: u64| -> Result<Rational> {
                    let q = self.quantity_at(i, &profile, report);
                    let mut p = profile.clone();
                    p[i] = report;
                    Ok(rational::from_uint(&d.value(truth, q)?) - &payments[self.index(&p)][i])
                };
                let honest = utility(truth)?;
                if honest < Rational::default() {
                    return Ok(Some(ViolationReport::IndividualRationality {
                        player: i,
                        profile,
                        utility: rational::format(&honest),
                    }));
                }
                for lie in 0..self.sizes[i] {
                    let u = utility(lie)?;
                    if u > honest {
                        return Ok(Some(ViolationReport::Incentive {
                            player: i,
                            profile,
                            misreport: lie,
                            truthful_utility: rational::format(&honest),
                            misreport_utility: rational::format(&u),
                        }));
                    }
                }
            }
        }
        Ok(None)
    }
}

pub fn threshold_payment_fn(table: &ProfileTable, i: usize, profile: &[u64]) -> Result<Rational> {
    threshold_payment_for(table.domain(i), profile[i], |t| Ok(table.quantity_at(i, profile, t)))
}

pub fn telescoping_payment_fn(table: &ProfileTable, i: usize, profile: &[u64]) -> Result<Rational> {
    telescoping_payment_for(table.domain(i), profile[i], |t| Ok(table.quantity_at(i, profile, t)))
}

pub fn zero_payment_fn(_: &ProfileTable, _: usize, _: &[u64]) -> Result<Rational> {
    Ok(Rational::default())
}

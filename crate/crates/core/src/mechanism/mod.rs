//! Allocation rules, payments and the separation and payment constructions.

mod fptas;
mod payment_hardness;
mod payments;
mod separation;
mod vcg;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::domain::{Allocation, AuctionInstance, Domain, KMindedStructure};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::rounding::{build_sketch, RoundingParam, Sketch};

pub use fptas::{fptas_general, fptas_k_minded, fptas_single_minded};
pub use payment_hardness::{payment_hardness_check, PaymentIdentity};
pub use payments::{
    estimator_payment_for, sample_payment_estimator, telescoping_payment_for, telescoping_payments,
    threshold_payment_for, threshold_payments,
};
pub use separation::{separation_greedy, separation_score};
pub use vcg::{vcg_exact, vcg_exact_capped, VCG_DEFAULT_CAP};

/// Maps reported profiles to allocations.
pub trait AllocationRule {
    fn allocate(&self, instance: &AuctionInstance) -> Result<Allocation>;
}

impl<F> AllocationRule for F
where
    F: Fn(&AuctionInstance) -> Result<Allocation>,
{
    fn allocate(&self, instance: &AuctionInstance) -> Result<Allocation> {
        self(instance)
    }
}

/// Outcome of running a mechanism on reported valuations.
#[derive(Clone, Debug, PartialEq)]
pub struct MechanismResult {
    pub allocation: Allocation,
    /// Reported-value welfare of the allocation.
    pub welfare: BigUint,
    pub delta: Option<RoundingParam>,
    pub top: Vec<bool>,
    pub sketch_sizes: Vec<usize>,
    pub payments: Option<Vec<Rational>>,
}

impl MechanismResult {
    pub(crate) fn zero(n: usize) -> Self {
        MechanismResult {
            allocation: Allocation::zeros(n),
            welfare: BigUint::zero(),
            delta: None,
            top: vec![false; n],
            sketch_sizes: Vec::new(),
            payments: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MechanismKind {
    KMinded,
    General,
    SingleMinded,
    Vcg,
}

impl MechanismKind {
    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::KMinded => "kminded",
            MechanismKind::General => "general",
            MechanismKind::SingleMinded => "singleminded",
            MechanismKind::Vcg => "vcg",
        }
    }
}

/// A mechanism with its report-independent preprocessing done once per set of
/// domains.
#[derive(Clone, Debug)]
pub enum Mechanism {
    KMinded { epsilon: Rational, step_sets: Vec<KMindedStructure> },
    General { epsilon: Rational, sketches: Vec<Sketch> },
    SingleMinded { epsilon: Rational },
    Vcg { cap: u64 },
}

/// Values materialized when inferring step sets.
pub const MATERIALIZE_CAP: u64 = 10_000_000;

impl Mechanism {
    pub fn new(kind: MechanismKind, domains: &[Domain], epsilon: &Rational) -> Result<Self> {
        match kind {
            MechanismKind::KMinded => Self::k_minded(domains, epsilon),
            MechanismKind::General => Self::general(domains, epsilon),
            MechanismKind::SingleMinded => Ok(Mechanism::SingleMinded { epsilon: epsilon.clone() }),
            MechanismKind::Vcg => Ok(Mechanism::Vcg { cap: VCG_DEFAULT_CAP }),
        }
    }

    /// Step sets inferred as the quantities where some valuation increases.
    pub fn k_minded(domains: &[Domain], epsilon: &Rational) -> Result<Self> {
        let step_sets = domains
            .iter()
            .map(|d| {
                d.ensure_materializable(MATERIALIZE_CAP)?;
                KMindedStructure::infer(d)
            })
            .collect::<Result<_>>()?;
        Ok(Mechanism::KMinded { epsilon: epsilon.clone(), step_sets })
    }

    /// Sketches built with accuracy `epsilon / 2n`.
    pub fn general(domains: &[Domain], epsilon: &Rational) -> Result<Self> {
        let accuracy = epsilon / Rational::from_integer((2 * domains.len()).into());
        let sketches = domains
            .iter()
            .map(|d| build_sketch(d, &accuracy))
            .collect::<Result<_>>()?;
        Ok(Mechanism::General { epsilon: epsilon.clone(), sketches })
    }

    pub fn kind(&self) -> MechanismKind {
        match self {
            Mechanism::KMinded { .. } => MechanismKind::KMinded,
            Mechanism::General { .. } => MechanismKind::General,
            Mechanism::SingleMinded { .. } => MechanismKind::SingleMinded,
            Mechanism::Vcg { .. } => MechanismKind::Vcg,
        }
    }

    pub fn run(&self, instance: &AuctionInstance) -> Result<MechanismResult> {
        match self {
            Mechanism::KMinded { epsilon, step_sets } => {
                check_players(step_sets.len(), instance)?;
                fptas_k_minded(instance, step_sets, epsilon)
            }
            Mechanism::General { epsilon, sketches } => {
                check_players(sketches.len(), instance)?;
                fptas::general_with_sketches(instance, sketches, epsilon)
            }
            Mechanism::SingleMinded { epsilon } => fptas_single_minded(instance, epsilon),
            Mechanism::Vcg { cap } => vcg_exact_capped(instance, *cap),
        }
    }
}

fn check_players(expected: usize, instance: &AuctionInstance) -> Result<()> {
    if expected != instance.n() {
        return Err(Error::Parameter(format!(
            "mechanism prepared for {expected} players, instance has {}",
            instance.n()
        )));
    }
    Ok(())
}

impl AllocationRule for Mechanism {
    fn allocate(&self, instance: &AuctionInstance) -> Result<Allocation> {
        Ok(self.run(instance)?.allocation)
    }
}

//! Valuations, single-crossing domains and auction instances.

mod cnf;
pub mod generators;
pub mod instance_file;
mod valuation;

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cnf::{clause_universe, universe_size, Clause, CnfFormula, Literal};
pub use valuation::Valuation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Alice,
    Bob,
}

/// Predicate `(x, s)` telling whether quantity `s` is a witness for index `x`.
#[derive(Clone)]
pub enum Witness {
    /// `s == 2 + x mod (m - 1)`: exactly one witness in `2..=m` per index.
    Modular,
    Custom(Arc<dyn Fn(u64, u64) -> bool + Send + Sync>),
}

impl Witness {
    pub fn holds(&self, x: u64, s: u64, m: u64) -> bool {
        match self {
            Witness::Modular => m >= 2 && s == 2 + x % (m - 1),
            Witness::Custom(f) => f(x, s),
        }
    }

    /// Smallest witness quantity above 1 for `x`, if any.
    pub fn find(&self, x: u64, m: u64) -> Option<u64> {
        (2..=m).find(|&s| self.holds(x, s, m))
    }
}

impl fmt::Debug for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Modular => f.write_str("Modular"),
            Witness::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug)]
enum Backing {
    Explicit(Vec<Valuation>),
    Separation { bits: u32, role: Role, witness: Witness },
    Sat { vars: u32, role: Role },
    Linear,
}

/// An ordered family of valuations over `m` items answering extended value
/// queries `(t, s)`. Cloning is cheap.
#[derive(Clone)]
pub struct Domain {
    m: u64,
    size: u64,
    bits: u64,
    backing: Arc<Backing>,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("m", &self.m)
            .field("size", &self.size)
            .field("backing", &self.backing)
            .finish()
    }
}

impl Domain {
    /// Materialized domain in the order given.
    pub fn explicit(valuations: Vec<Valuation>) -> Result<Self> {
        let Some(first) = valuations.first() else {
            return Err(Error::InvalidDomain("domain has no valuations".into()));
        };
        let m = first.m();
        if let Some(v) = valuations.iter().find(|v| v.m() != m) {
            return Err(Error::InvalidDomain(format!(
                "valuations disagree on m: {} vs {}",
                m,
                v.m()
            )));
        }
        let bits = valuations
            .iter()
            .flat_map(|v| v.values().iter().map(BigUint::bits))
            .max()
            .unwrap_or(0);
        Ok(Domain {
            m,
            size: valuations.len() as u64,
            bits,
            backing: Arc::new(Backing::Explicit(valuations)),
        })
    }

    pub fn from_tables(tables: &[&[u64]]) -> Result<Self> {
        Self::explicit(
            tables
                .iter()
                .map(|t| Valuation::from_u64s(t))
                .collect::<Result<_>>()?,
        )
    }

    pub(crate) fn separation(bits: u32, role: Role, witness: Witness) -> Result<Self> {
        if bits == 0 || bits > 20 {
            return Err(Error::Parameter(format!(
                "separation bits must be in 1..=20, got {bits}"
            )));
        }
        let m = 1u64 << bits;
        Ok(Self::computed(m, m, Backing::Separation { bits, role, witness }))
    }

    pub(crate) fn sat(vars: u32, role: Role) -> Result<Self> {
        if vars == 0 || vars > 20 {
            return Err(Error::Parameter(format!(
                "number of variables must be in 1..=20, got {vars}"
            )));
        }
        let size = CnfFormula::count(vars)?;
        Ok(Self::computed(1u64 << vars, size, Backing::Sat { vars, role }))
    }

    /// `v^[t](s) = t * s` for `t` in `0..size`.
    pub fn linear(m: u64, size: u64) -> Result<Self> {
        if m == 0 || size == 0 {
            return Err(Error::Parameter("linear domain needs m, size >= 1".into()));
        }
        Ok(Self::computed(m, size, Backing::Linear))
    }

    fn computed(m: u64, size: u64, backing: Backing) -> Self {
        let mut d = Domain {
            m,
            size,
            bits: 0,
            backing: Arc::new(backing),
        };
        // Grand-bundle values grow along the order, so the last one is the max.
        d.bits = d.compute(size - 1, m).bits();
        d
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    /// Maximum bit length of any value in the domain.
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_explicit(&self) -> bool {
        matches!(*self.backing, Backing::Explicit(_))
    }

    /// Extended value query `v^[t](s)`.
    pub fn value(&self, t: u64, s: u64) -> Result<BigUint> {
        self.check(t, s)?;
        Ok(self.compute(t, s))
    }

    pub fn grand_bundle(&self, t: u64) -> Result<BigUint> {
        self.value(t, self.m)
    }

    pub fn valuation(&self, t: u64) -> Result<Cow<'_, Valuation>> {
        self.check(t, 0)?;
        if let Backing::Explicit(vals) = &*self.backing {
            return Ok(Cow::Borrowed(&vals[t as usize]));
        }
        let values = (0..=self.m).map(|s| self.compute(t, s)).collect();
        Ok(Cow::Owned(Valuation::new(values)?))
    }

    /// All valuations, refusing when more than `cap` values would be built.
    pub fn materialize(&self, cap: u64) -> Result<Vec<Valuation>> {
        self.ensure_materializable(cap)?;
        (0..self.size)
            .map(|t| self.valuation(t).map(Cow::into_owned))
            .collect()
    }

    pub fn ensure_materializable(&self, cap: u64) -> Result<()> {
        let cells = self.size.saturating_mul(self.m + 1);
        if cells > cap {
            return Err(Error::Capacity(format!(
                "domain has {} valuations over {} items ({cells} values, cap {cap})",
                self.size, self.m
            )));
        }
        Ok(())
    }

    fn check(&self, t: u64, s: u64) -> Result<()> {
        if t >= self.size {
            return Err(Error::Range(format!(
                "valuation index {t} outside 0..{}",
                self.size
            )));
        }
        if s > self.m {
            return Err(Error::Range(format!("quantity {s} outside 0..={}", self.m)));
        }
        Ok(())
    }

    fn compute(&self, t: u64, s: u64) -> BigUint {
        if s == 0 {
            return match &*self.backing {
                Backing::Explicit(vals) => vals[t as usize].value(0).clone(),
                _ => BigUint::zero(),
            };
        }
        match &*self.backing {
            Backing::Explicit(vals) => vals[t as usize].value(s).clone(),
            Backing::Separation { bits, role, witness } => {
                let linear = BigUint::from(10 * t) + BigUint::from(4 * s) * t;
                match role {
                    Role::Bob => linear,
                    Role::Alice => {
                        let bonus = t > 0 && s > 1 && witness.holds(t, s, self.m);
                        BigUint::from(10u32).pow(*bits) + linear + u32::from(bonus)
                    }
                }
            }
            Backing::Sat { vars, role } => {
                let base = BigUint::from(4 * s) * t;
                match role {
                    Role::Bob => base,
                    Role::Alice => {
                        let phi = CnfFormula::from_ordinal(*vars, &BigUint::from(t))
                            .expect("index within formula count");
                        let assignment = s % (1u64 << vars);
                        base + u32::from(phi.satisfied_by(assignment))
                    }
                }
            }
            Backing::Linear => BigUint::from(t) * s,
        }
    }
}

/// First way a domain fails to be a valid single-crossing family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainViolation {
    NotNormalized { t: u64 },
    NotMonotone { t: u64, s: u64 },
    /// `v^[t2](s2) - v^[t2](s) < v^[t](s2) - v^[t](s)` with `t < t2`, `s < s2`.
    NotSingleCrossing { t: u64, t2: u64, s: u64, s2: u64 },
}

/// Checks normalization, monotonicity and the single-crossing inequality,
/// reporting the lexicographically first violating `(t, t2, s, s2)`.
pub fn validate_domain(domain: &Domain) -> std::result::Result<(), DomainViolation> {
    let m = domain.m();
    let table: Vec<Vec<BigUint>> = (0..domain.size())
        .map(|t| (0..=m).map(|s| domain.compute(t, s)).collect())
        .collect();
    for (t, row) in table.iter().enumerate() {
        let t = t as u64;
        if !row[0].is_zero() {
            return Err(DomainViolation::NotNormalized { t });
        }
        if let Some(s) = (1..row.len()).find(|&s| row[s] < row[s - 1]) {
            return Err(DomainViolation::NotMonotone { t, s: s as u64 });
        }
    }
    // Adjacent marginal dominance is equivalent to the full condition.
    let dominated = table.windows(2).all(|w| {
        (1..w[0].len()).all(|s| &w[1][s] + &w[0][s - 1] >= &w[0][s] + &w[1][s - 1])
    });
    if dominated {
        return Ok(());
    }
    for t in 0..table.len() {
        for t2 in t + 1..table.len() {
            if let Some((s, s2)) = first_crossing(&table[t], &table[t2]) {
                return Err(DomainViolation::NotSingleCrossing {
                    t: t as u64,
                    t2: t2 as u64,
                    s,
                    s2,
                });
            }
        }
    }
    unreachable!("adjacent dominance failed, so some pair violates")
}

/// First `(s, s2)` with `hi(s2) - hi(s) < lo(s2) - lo(s)`, i.e. where the gap
/// `hi - lo` drops.
fn first_crossing(lo: &[BigUint], hi: &[BigUint]) -> Option<(u64, u64)> {
    let n = lo.len();
    // gap(a) < gap(b), compared without leaving the naturals.
    let gap_less = |a: usize, b: usize| &hi[a] + &lo[b] < &hi[b] + &lo[a];
    let mut suffix_min = vec![n - 1; n];
    for s in (0..n - 1).rev() {
        let next = suffix_min[s + 1];
        suffix_min[s] = if gap_less(s, next) { s } else { next };
    }
    for s in 0..n - 1 {
        if gap_less(suffix_min[s + 1], s) {
            let s2 = (s + 1..n).find(|&s2| gap_less(s2, s)).expect("exists");
            return Some((s as u64, s2 as u64));
        }
    }
    None
}

/// Step set of a k-minded valuation family.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KMindedStructure {
    steps: Vec<u64>,
}

impl KMindedStructure {
    pub fn new(steps: Vec<u64>, m: u64) -> Result<Self> {
        if steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("step set must be strictly increasing".into()));
        }
        if steps.iter().any(|&s| s == 0 || s > m) {
            return Err(Error::Parameter(format!("step set must lie in 1..={m}")));
        }
        Ok(KMindedStructure { steps })
    }

    /// Union of the quantities where some valuation of the domain increases.
    pub fn infer(domain: &Domain) -> Result<Self> {
        let mut positive = vec![false; domain.m() as usize + 1];
        for t in 0..domain.size() {
            for s in domain.valuation(t)?.steps() {
                positive[s as usize] = true;
            }
        }
        let steps = (1..=domain.m()).filter(|&s| positive[s as usize]).collect();
        Ok(KMindedStructure { steps })
    }

    pub fn steps(&self) -> &[u64] {
        &self.steps
    }

    pub fn k(&self) -> usize {
        self.steps.len()
    }

    /// Number of steps at or below `s`.
    pub fn count_at_most(&self, s: u64) -> usize {
        self.steps.partition_point(|&q| q <= s)
    }

    pub fn admits(&self, v: &Valuation) -> bool {
        v.steps().iter().all(|s| self.steps.binary_search(s).is_ok())
    }
}

/// Quantities `(s_1, ..., s_n)` handed to the players.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(pub Vec<u64>);

impl Allocation {
    pub fn zeros(n: usize) -> Self {
        Allocation(vec![0; n])
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u64 {
        self.0[i]
    }

    pub fn quantities(&self) -> &[u64] {
        &self.0
    }
}

/// Per-player domains over shared `m` together with reported indices.
#[derive(Clone, Debug)]
pub struct AuctionInstance {
    m: u64,
    domains: Vec<Domain>,
    reports: Vec<u64>,
}

impl AuctionInstance {
    pub fn new(m: u64, domains: Vec<Domain>, reports: Vec<u64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("m must be positive".into()));
        }
        if domains.is_empty() {
            return Err(Error::Parameter("instance has no players".into()));
        }
        if domains.len() != reports.len() {
            return Err(Error::Parameter(format!(
                "{} domains but {} reports",
                domains.len(),
                reports.len()
            )));
        }
        for (i, (d, &t)) in domains.iter().zip(&reports).enumerate() {
            if d.m() != m {
                return Err(Error::InvalidDomain(format!(
                    "player {i} domain has m = {}, instance has m = {m}",
                    d.m()
                )));
            }
            if t >= d.size() {
                return Err(Error::Range(format!(
                    "player {i} reports {t}, domain size is {}",
                    d.size()
                )));
            }
        }
        Ok(AuctionInstance { m, domains, reports })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn domain(&self, i: usize) -> &Domain {
        &self.domains[i]
    }

    pub fn reports(&self) -> &[u64] {
        &self.reports
    }

    pub fn report(&self, i: usize) -> u64 {
        self.reports[i]
    }

    /// Reported valuation of player `i`.
    pub fn valuation(&self, i: usize) -> Cow<'_, Valuation> {
        self.domains[i]
            .valuation(self.reports[i])
            .expect("reports validated on construction")
    }

    pub fn valuations(&self) -> Vec<Valuation> {
        (0..self.n()).map(|i| self.valuation(i).into_owned()).collect()
    }

    /// Same instance with player `i` reporting `t` instead.
    pub fn with_report(&self, i: usize, t: u64) -> Result<Self> {
        let mut reports = self.reports.clone();
        reports[i] = t;
        Self::new(self.m, self.domains.clone(), reports)
    }

    pub fn with_reports(&self, reports: Vec<u64>) -> Result<Self> {
        Self::new(self.m, self.domains.clone(), reports)
    }

    /// Sum of the reported values of `allocation`.
    pub fn welfare(&self, allocation: &Allocation) -> Result<BigUint> {
        self.check_allocation(allocation)?;
        let mut total = BigUint::zero();
        for (i, &s) in allocation.quantities().iter().enumerate() {
            total += self.domains[i].value(self.reports[i], s)?;
        }
        Ok(total)
    }

    pub fn check_allocation(&self, allocation: &Allocation) -> Result<()> {
        if allocation.len() != self.n() {
            return Err(Error::Parameter(format!(
                "allocation has {} entries for {} players",
                allocation.len(),
                self.n()
            )));
        }
        if allocation.total() > self.m {
            return Err(Error::Parameter(format!(
                "allocation uses {} of {} items",
                allocation.total(),
                self.m
            )));
        }
        Ok(())
    }

    /// Number of report profiles, saturating.
    pub fn profile_count(&self) -> u64 {
        self.domains
            .iter()
            .fold(1u64, |acc, d| acc.saturating_mul(d.size()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_lookup_and_range_errors() {
        let d = Domain::from_tables(&[&[0, 0], &[0, 5]]).unwrap();
        assert_eq!(d.value(1, 1).unwrap(), BigUint::from(5u32));
        assert_eq!(d.value(0, 0).unwrap(), BigUint::zero());
        assert!(matches!(d.value(2, 0), Err(Error::Range(_))));
        assert!(matches!(d.value(0, 2), Err(Error::Range(_))));
        assert_eq!(d.bits(), 3);
    }

    #[test]
    fn validate_reports_first_crossing() {
        let d = Domain::from_tables(&[&[0, 2, 2], &[0, 1, 3]]).unwrap();
        assert_eq!(
            validate_domain(&d),
            Err(DomainViolation::NotSingleCrossing { t: 0, t2: 1, s: 0, s2: 1 })
        );
        let single = Domain::from_tables(&[&[0, 4, 4, 9]]).unwrap();
        assert_eq!(validate_domain(&single), Ok(()));
    }

    #[test]
    fn validate_finds_non_adjacent_first() {
        // (0,1) fine, (0,2) violates at (1,2), (1,2) violates at (0,1).
        let d = Domain::from_tables(&[&[0, 1, 2], &[0, 2, 3], &[0, 3, 3]]).unwrap();
        assert_eq!(
            validate_domain(&d),
            Err(DomainViolation::NotSingleCrossing { t: 0, t2: 2, s: 1, s2: 2 })
        );
    }

    #[test]
    fn first_crossing_matches_naive_scan() {
        let rows: [&[u64]; 5] = [
            &[0, 1, 2, 3],
            &[0, 3, 3, 4],
            &[0, 0, 5, 5],
            &[0, 2, 2, 2],
            &[0, 1, 4, 9],
        ];
        let big = |r: &[u64]| r.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>();
        for a in rows {
            for b in rows {
                let naive = (0..4u64)
                    .flat_map(|s| (s + 1..4).map(move |s2| (s, s2)))
                    .find(|&(s, s2)| {
                        b[s2 as usize] + a[s as usize] < a[s2 as usize] + b[s as usize]
                    });
                assert_eq!(first_crossing(&big(a), &big(b)), naive, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn k_minded_structure() {
        let k = KMindedStructure::new(vec![2, 5], 6).unwrap();
        assert_eq!(k.count_at_most(1), 0);
        assert_eq!(k.count_at_most(3), 1);
        assert_eq!(k.count_at_most(5), 2);
        assert!(KMindedStructure::new(vec![3, 3], 6).is_err());
        assert!(KMindedStructure::new(vec![0], 6).is_err());
        let d = Domain::from_tables(&[&[0, 0, 1, 1], &[0, 0, 2, 5]]).unwrap();
        assert_eq!(KMindedStructure::infer(&d).unwrap().steps(), &[2, 3]);
    }

    #[test]
    fn instance_validation() {
        let d = Domain::from_tables(&[&[0, 1, 2], &[0, 2, 4]]).unwrap();
        assert!(AuctionInstance::new(2, vec![d.clone()], vec![2]).is_err());
        assert!(AuctionInstance::new(3, vec![d.clone()], vec![0]).is_err());
        let inst = AuctionInstance::new(2, vec![d.clone(), d], vec![1, 0]).unwrap();
        assert_eq!(
            inst.welfare(&Allocation(vec![1, 1])).unwrap(),
            BigUint::from(3u32)
        );
        assert!(inst.welfare(&Allocation(vec![2, 1])).is_err());
        assert_eq!(inst.profile_count(), 4);
    }
}

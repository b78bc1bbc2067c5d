use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};

/// A normalized, monotone valuation over quantities `0..=m`, stored as an
/// explicit value table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Valuation {
    values: Vec<BigUint>,
}

impl Valuation {
    pub fn new(values: Vec<BigUint>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidDomain(
                "a valuation needs values for quantities 0..=m with m >= 1".into(),
            ));
        }
        if !values[0].is_zero() {
            return Err(Error::InvalidDomain(format!(
                "valuation not normalized: v(0) = {}",
                values[0]
            )));
        }
        if let Some(s) = (1..values.len()).find(|&s| values[s] < values[s - 1]) {
            return Err(Error::InvalidDomain(format!(
                "valuation not monotone at quantity {s}: {} < {}",
                values[s],
                values[s - 1]
            )));
        }
        Ok(Valuation { values })
    }

    pub fn from_u64s(values: &[u64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| BigUint::from(v)).collect())
    }

    /// All-zero valuation over `m` items.
    pub fn zero(m: u64) -> Self {
        Valuation {
            values: vec![BigUint::zero(); m as usize + 1],
        }
    }

    /// `x` for every quantity at least `q`, zero below it.
    pub fn single_minded(m: u64, x: BigUint, q: u64) -> Result<Self> {
        if q > m {
            return Err(Error::Range(format!("demand {q} exceeds m = {m}")));
        }
        let values = (0..=m)
            .map(|s| if s >= q && s > 0 { x.clone() } else { BigUint::zero() })
            .collect();
        Self::new(values)
    }

    pub fn m(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    /// Panics when `s > m`; use [`Valuation::get`] for a checked lookup.
    pub fn value(&self, s: u64) -> &BigUint {
        &self.values[s as usize]
    }

    pub fn get(&self, s: u64) -> Option<&BigUint> {
        self.values.get(s as usize)
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    pub fn grand_bundle(&self) -> &BigUint {
        self.values.last().expect("non-empty by construction")
    }

    /// `v(s) - v(s-1)` for `s >= 1`.
    pub fn marginal(&self, s: u64) -> BigUint {
        let s = s as usize;
        &self.values[s] - &self.values[s - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.grand_bundle().is_zero()
    }

    /// Quantities where the value strictly increases.
    pub fn steps(&self) -> Vec<u64> {
        (1..self.values.len())
            .filter(|&s| self.values[s] > self.values[s - 1])
            .map(|s| s as u64)
            .collect()
    }

    /// Smallest quantity `s` with `v(s) >= target`, if any.
    pub fn min_quantity_reaching(&self, target: &BigUint) -> Option<u64> {
        if self.grand_bundle() < target {
            return None;
        }
        Some(self.values.partition_point(|v| v < target) as u64)
    }

    /// Interprets the valuation as single-minded, returning `(x, q)`.
    /// A zero valuation maps to `(0, 0)`.
    pub fn as_single_minded(&self) -> Option<(BigUint, u64)> {
        let x = self.grand_bundle().clone();
        if x.is_zero() {
            return Some((x, 0));
        }
        let q = self.min_quantity_reaching(&x)?;
        let ok = self.values[..q as usize].iter().all(Zero::is_zero);
        ok.then_some((x, q))
    }
}

impl fmt::Debug for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.values.iter().map(|v| v.to_string())).finish()
    }
}

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};

/// A possibly negated variable, `var` counted from 1.
/// Ordered by variable, the positive literal first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: u32,
    pub negated: bool,
}

impl Literal {
    pub fn from_signed(lit: i64) -> Result<Self> {
        if lit == 0 {
            return Err(Error::Parameter("literal 0 is not a variable".into()));
        }
        let var = u32::try_from(lit.unsigned_abs())
            .map_err(|_| Error::Parameter(format!("literal {lit} out of range")))?;
        Ok(Literal { var, negated: lit < 0 })
    }

    pub fn to_signed(self) -> i64 {
        if self.negated {
            -i64::from(self.var)
        } else {
            i64::from(self.var)
        }
    }

    /// Bit `var - 1` of the assignment gives the variable's truth value.
    pub fn holds(self, assignment: u64) -> bool {
        let value = (assignment >> (self.var - 1)) & 1 == 1;
        value != self.negated
    }

    fn from_position(p: u32) -> Self {
        Literal {
            var: p / 2 + 1,
            negated: p % 2 == 1,
        }
    }
}

/// Disjunction of up to three literals. Stored sorted with duplicates removed
/// and padded by repeating the largest literal, so equal clauses compare equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause([Literal; 3]);

impl Clause {
    pub fn new(a: Literal, b: Literal, c: Literal) -> Self {
        let mut lits = [a, b, c];
        lits.sort();
        let mut distinct = vec![lits[0]];
        for l in &lits[1..] {
            if Some(l) != distinct.last() {
                distinct.push(*l);
            }
        }
        let last = *distinct.last().expect("non-empty");
        distinct.resize(3, last);
        Clause([distinct[0], distinct[1], distinct[2]])
    }

    /// Whether the three literals are distinct, i.e. the clause has a place
    /// in the ordinal encoding.
    pub fn is_proper(&self) -> bool {
        self.0[0] != self.0[1] && self.0[1] != self.0[2]
    }

    pub fn distinct_literals(&self) -> Vec<Literal> {
        let mut out = self.0.to_vec();
        out.dedup();
        out
    }

    pub fn literals(&self) -> &[Literal; 3] {
        &self.0
    }

    pub fn holds(&self, assignment: u64) -> bool {
        self.0.iter().any(|l| l.holds(assignment))
    }

    fn max_var(&self) -> u32 {
        self.0[2].var
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .distinct_literals()
            .iter()
            .map(|l| l.to_signed().to_string())
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Number of clauses over `num_vars` variables: 3-subsets of the `2 * num_vars`
/// literals.
pub fn universe_size(num_vars: u32) -> u64 {
    let l = 2 * u64::from(num_vars);
    if l < 3 {
        0
    } else {
        l * (l - 1) * (l - 2) / 6
    }
}

/// Every clause over `num_vars` variables in ascending order.
pub fn clause_universe(num_vars: u32) -> Vec<Clause> {
    let l = 2 * num_vars;
    let mut out = Vec::with_capacity(universe_size(num_vars) as usize);
    for a in 0..l {
        for b in a + 1..l {
            for c in b + 1..l {
                out.push(Clause([
                    Literal::from_position(a),
                    Literal::from_position(b),
                    Literal::from_position(c),
                ]));
            }
        }
    }
    out
}

/// A 3-CNF formula, stored as a sorted set of clauses.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, mut clauses: Vec<Clause>) -> Result<Self> {
        if num_vars == 0 || num_vars > 63 {
            return Err(Error::Parameter(format!(
                "number of variables must be in 1..=63, got {num_vars}"
            )));
        }
        if let Some(c) = clauses.iter().find(|c| c.max_var() > num_vars) {
            return Err(Error::Parameter(format!(
                "clause ({c}) references a variable above {num_vars}"
            )));
        }
        clauses.sort();
        clauses.dedup();
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn empty(num_vars: u32) -> Result<Self> {
        Self::new(num_vars, Vec::new())
    }

    /// Parses clauses written as signed integers, separated by `;`,
    /// e.g. `"1 2 -3; -1 2 3"`. Shorter clauses repeat their last literal.
    pub fn parse(num_vars: u32, text: &str) -> Result<Self> {
        let mut clauses = Vec::new();
        for part in text.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let lits = part
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<i64>()
                        .map_err(|_| Error::Parse(format!("bad literal {tok:?}")))
                        .and_then(Literal::from_signed)
                })
                .collect::<Result<Vec<_>>>()?;
            let (a, b, c) = match lits[..] {
                [a] => (a, a, a),
                [a, b] => (a, b, b),
                [a, b, c] => (a, b, c),
                _ => {
                    return Err(Error::Parse(format!(
                        "clause {part:?} must have one to three literals"
                    )))
                }
            };
            clauses.push(Clause::new(a, b, c));
        }
        Self::new(num_vars, clauses)
    }

    /// Picks a uniform clause count in `0..=2*num_vars`, then that many
    /// distinct clauses uniformly.
    pub fn random<R: Rng + ?Sized>(num_vars: u32, rng: &mut R) -> Result<Self> {
        let universe = clause_universe(num_vars);
        let count = rng.gen_range(0..=(2 * num_vars as usize).min(universe.len()));
        let clauses = sample(rng, universe.len(), count)
            .into_iter()
            .map(|i| universe[i])
            .collect();
        Self::new(num_vars, clauses)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn satisfied_by(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|c| c.holds(assignment))
    }

    /// Bit vector over the clause universe, the first clause being the most
    /// significant bit. Clauses with a repeated literal have no bit.
    pub fn ordinal(&self) -> Result<BigUint> {
        let universe = clause_universe(self.num_vars);
        let n = universe.len() as u64;
        let mut x = BigUint::zero();
        for c in &self.clauses {
            let idx = universe.binary_search(c).map_err(|_| {
                Error::Parameter(format!(
                    "clause ({c}) repeats a literal and has no ordinal encoding"
                ))
            })? as u64;
            x.set_bit(n - 1 - idx, true);
        }
        Ok(x)
    }

    pub fn ordinal_u64(&self) -> Result<u64> {
        self.ordinal()?.to_u64().ok_or_else(|| {
            Error::Capacity(format!(
                "formula ordinal over {} variables exceeds 64 bits",
                self.num_vars
            ))
        })
    }

    pub fn from_ordinal(num_vars: u32, x: &BigUint) -> Result<Self> {
        let universe = clause_universe(num_vars);
        let n = universe.len() as u64;
        if x.bits() > n {
            return Err(Error::Range(format!(
                "ordinal {x} exceeds the {n}-clause universe"
            )));
        }
        let clauses = (0..n)
            .filter(|&idx| x.bit(n - 1 - idx))
            .map(|idx| universe[idx as usize])
            .collect();
        Self::new(num_vars, clauses)
    }

    /// Number of distinct formulas, `2^N`, if it fits in 64 bits.
    pub fn count(num_vars: u32) -> Result<u64> {
        let n = universe_size(num_vars);
        if n >= 64 {
            return Err(Error::Capacity(format!(
                "2^{n} formulas over {num_vars} variables do not fit in 64 bits"
            )));
        }
        Ok(1u64 << n)
    }

    pub fn count_big(num_vars: u32) -> BigUint {
        BigUint::one() << universe_size(num_vars)
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.clauses.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn universe_sizes() {
        assert_eq!(universe_size(1), 0);
        assert_eq!(universe_size(2), 4);
        assert_eq!(universe_size(3), 20);
        assert_eq!(universe_size(4), 56);
        for k in 1..=4 {
            let u = clause_universe(k);
            assert_eq!(u.len() as u64, universe_size(k));
            assert!(u.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn literal_order_puts_positive_first() {
        let u = clause_universe(2);
        assert_eq!(u[0].to_string(), "1 -1 2");
        assert_eq!(u[3].to_string(), "-1 2 -2");
    }

    #[test]
    fn ordinal_is_a_bijection_up_to_three_vars() {
        for k in 1..=3u32 {
            let total = CnfFormula::count(k).unwrap();
            let step = if k == 3 { 997 } else { 1 };
            for x in (0..total).step_by(step) {
                let phi = CnfFormula::from_ordinal(k, &BigUint::from(x)).unwrap();
                assert_eq!(phi.ordinal_u64().unwrap(), x);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let phi = CnfFormula::random(3, &mut rng).unwrap();
            let back = CnfFormula::from_ordinal(3, &phi.ordinal().unwrap()).unwrap();
            assert_eq!(back, phi);
        }
    }

    #[test]
    fn first_clause_is_most_significant() {
        let u = clause_universe(2);
        let phi = CnfFormula::new(2, vec![u[0]]).unwrap();
        assert_eq!(phi.ordinal_u64().unwrap(), 8);
        let phi = CnfFormula::new(2, vec![u[3]]).unwrap();
        assert_eq!(phi.ordinal_u64().unwrap(), 1);
    }

    #[test]
    fn parse_and_evaluate() {
        let phi = CnfFormula::parse(3, "1 2 3").unwrap();
        let sat = (0..8).filter(|&a| phi.satisfied_by(a)).count();
        assert_eq!(sat, 7);
        assert!(CnfFormula::parse(2, "1 2 3").is_err());
        assert!(CnfFormula::parse(3, "1 2 3 -1").is_err());
        assert!(CnfFormula::parse(3, "1 x 2").is_err());
        assert_eq!(CnfFormula::parse(3, "").unwrap().clauses().len(), 0);
    }

    #[test]
    fn repeated_literals_normalize() {
        let a = CnfFormula::parse(2, "1 2 1").unwrap();
        let b = CnfFormula::parse(2, "2 1").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "1 2");
        assert!(!a.clauses()[0].is_proper());
        assert!(matches!(a.ordinal(), Err(Error::Parameter(_))));
        let contradiction = CnfFormula::parse(1, "1 1 1; -1 -1 -1").unwrap();
        assert!((0..2).all(|x| !contradiction.satisfied_by(x)));
    }

    #[test]
    fn five_vars_exceed_64_bits() {
        assert!(matches!(CnfFormula::count(5), Err(Error::Capacity(_))));
        assert_eq!(CnfFormula::count(4).unwrap(), 1 << 56);
    }
}

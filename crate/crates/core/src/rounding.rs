//! Rounding parameters, marginal rounding, rewards and sketches.

use num_bigint::BigUint;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::domain::{Domain, KMindedStructure, Valuation};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// `delta = base^exp`, exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RoundingParam {
    pub base: u64,
    pub exp: i64,
}

impl RoundingParam {
    pub fn unit() -> Self {
        RoundingParam { base: 1, exp: 0 }
    }

    pub fn value(&self) -> Rational {
        let b = Rational::from_integer(self.base.into());
        if self.exp >= 0 {
            Pow::pow(b, self.exp as u64)
        } else {
            Pow::pow(b.recip(), self.exp.unsigned_abs())
        }
    }

    /// `floor(x / delta)` for a natural `x`.
    pub fn units_of(&self, x: &BigUint) -> BigUint {
        let scale = BigUint::from(self.base).pow(self.exp.unsigned_abs() as u32);
        if self.exp >= 0 {
            x / scale
        } else {
            x * scale
        }
    }

    /// `units * delta` as an exact rational.
    pub fn to_value(&self, units: &BigUint) -> Rational {
        rational::from_uint(units) * self.value()
    }
}

/// Largest `base^p` (over all integers `p`) not exceeding `bound`.
pub fn largest_power_at_most(base: u64, bound: &Rational) -> Result<RoundingParam> {
    if base < 2 {
        return Err(Error::Parameter(format!("rounding base must be at least 2, got {base}")));
    }
    if !bound.is_positive() {
        return Err(Error::Degenerate("rounding bound must be positive".into()));
    }
    let b = Rational::from_integer(base.into());
    let mut exp = 0i64;
    let mut power = Rational::one();
    if &power <= bound {
        while &(&power * &b) <= bound {
            power *= &b;
            exp += 1;
        }
    } else {
        while &power > bound {
            power /= &b;
            exp -= 1;
        }
    }
    Ok(RoundingParam { base, exp })
}

/// Largest `(4kn)^p` not exceeding `epsilon * v_max / (3 n^2 k^2)`.
pub fn select_delta(epsilon: &Rational, n: u64, k: u64, v_max: &BigUint) -> Result<RoundingParam> {
    if n == 0 || k == 0 {
        return Err(Error::Parameter("n and k must be positive".into()));
    }
    if v_max.is_zero() {
        return Err(Error::Degenerate("all reported valuations are zero".into()));
    }
    let bound = epsilon * rational::from_uint(v_max) / Rational::from_integer((3 * n * n * k * k).into());
    largest_power_at_most(4 * k * n, &bound)
}

/// Valuation whose values are `units[s] * delta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundedValuation {
    pub delta: RoundingParam,
    pub units: Vec<BigUint>,
}

impl RoundedValuation {
    pub fn m(&self) -> u64 {
        (self.units.len() - 1) as u64
    }

    pub fn value(&self, s: u64) -> Rational {
        self.delta.to_value(&self.units[s as usize])
    }
}

/// Floors every marginal to a multiple of `delta` and re-sums.
pub fn marginal_round(v: &Valuation, delta: RoundingParam) -> RoundedValuation {
    let mut units = Vec::with_capacity(v.values().len());
    let mut acc = BigUint::zero();
    units.push(acc.clone());
    for s in 1..=v.m() {
        acc += delta.units_of(&v.marginal(s));
        units.push(acc.clone());
    }
    RoundedValuation { delta, units }
}

/// Players whose grand-bundle value reaches `3 delta n^2 k^2 / epsilon`.
pub fn top_set(originals: &[Valuation], delta: RoundingParam, epsilon: &Rational, k: u64) -> Vec<bool> {
    let n = originals.len() as u64;
    let threshold = delta.value() * Rational::from_integer((3 * n * n * k * k).into());
    originals
        .iter()
        .map(|v| rational::from_uint(v.grand_bundle()) * epsilon >= threshold)
        .collect()
}

/// Adds `2kn` units per step at or below `s` to every player in the top set.
pub fn apply_rewards(
    rounded: &[RoundedValuation],
    originals: &[Valuation],
    delta: RoundingParam,
    epsilon: &Rational,
    k: u64,
    step_sets: &[KMindedStructure],
) -> Vec<RoundedValuation> {
    let n = rounded.len() as u64;
    let top = top_set(originals, delta, epsilon, k);
    let per_step = BigUint::from(2 * k * n);
    rounded
        .iter()
        .zip(step_sets)
        .zip(top)
        .map(|((r, steps), is_top)| {
            if !is_top {
                return r.clone();
            }
            let units = r
                .units
                .iter()
                .enumerate()
                .map(|(s, u)| u + &per_step * steps.count_at_most(s as u64))
                .collect();
            RoundedValuation { delta, units }
        })
        .collect()
}

/// Quantity set containing 0 onto which valuations are projected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sketch {
    points: Vec<u64>,
    epsilon: Rational,
}

impl Sketch {
    pub fn new(mut points: Vec<u64>, epsilon: Rational) -> Self {
        points.push(0);
        points.sort_unstable();
        points.dedup();
        Sketch { points, epsilon }
    }

    /// `{0, 1, ..., m}`.
    pub fn full(m: u64, epsilon: Rational) -> Self {
        Self::new((0..=m).collect(), epsilon)
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    /// Largest sketch point at most `s`.
    pub fn round_down(&self, s: u64) -> u64 {
        self.points[self.points.partition_point(|&p| p <= s) - 1]
    }

    /// Sketch points other than 0 as a step set.
    pub fn step_set(&self, m: u64) -> Result<KMindedStructure> {
        KMindedStructure::new(self.points[1..].to_vec(), m)
    }

    /// `(L + 1)^2 + 1` with `L` the least integer such that
    /// `(1 + epsilon/2)^L >= 2^b`.
    pub fn size_bound(bits: u64, epsilon: &Rational) -> u64 {
        let l = least_growth_exponent(bits, epsilon);
        (l + 1) * (l + 1) + 1
    }
}

/// Least `L` with `(1 + eps/2)^L >= 2^bits`. A floating-point estimate seeds
/// the search; the answer is confirmed exactly.
fn least_growth_exponent(bits: u64, epsilon: &Rational) -> u64 {
    let p = epsilon.numer().magnitude();
    let q = epsilon.denom().magnitude();
    let den: BigUint = q << 1;
    let num: BigUint = &den + p;
    // (num/den)^l >= 2^bits
    let reaches = |l: u64| Pow::pow(&num, l) >= (Pow::pow(&den, l) << bits);
    let ratio = 1.0 + epsilon.to_f64().unwrap_or(f64::MAX) / 2.0;
    let guess = (bits as f64 * std::f64::consts::LN_2 / ratio.ln()).ceil();
    let mut l = if guess.is_finite() && guess >= 0.0 { guess as u64 } else { 0 };
    while !reaches(l) {
        l += 1;
    }
    while l > 0 && reaches(l - 1) {
        l -= 1;
    }
    l
}

/// `v^K(s)`: value of the largest sketch point at most `s`.
pub fn project(v: &Valuation, sketch: &Sketch) -> Valuation {
    let values = (0..=v.m())
        .map(|s| v.value(sketch.round_down(s)).clone())
        .collect();
    Valuation::new(values).expect("projection of a valid valuation is valid")
}

/// `a >= (1 + eps/2) * b`, with `eps = p/q`: `2q a >= (2q + p) b`.
fn grows(a: &BigUint, b: &BigUint, eps: &Rational) -> bool {
    let p = eps.numer().magnitude();
    let q = eps.denom().magnitude();
    let two_q: BigUint = q << 1;
    &two_q * a >= (&two_q + p) * b
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

/// Picks anchor valuations whose grand bundles grow by `1 + eps/2` and, for
/// each, the quantities where its value grows by `1 + eps/2`. Uses binary
/// searches over the domain order and over quantities.
pub fn build_sketch(domain: &Domain, epsilon: &Rational) -> Result<Sketch> {
    if !epsilon.is_positive() {
        return Err(Error::Parameter("epsilon must be positive".into()));
    }
    let m = domain.m();
    let size = domain.size();
    let mut points = Vec::new();
    let mut anchor = first_true(0, size, |t| Ok(!domain.grand_bundle(t)?.is_zero()))?;
    while let Some(t) = anchor {
        let value = |s: u64| domain.value(t, s);
        let mut s = first_true(1, m + 1, |s| Ok(!value(s)?.is_zero()))?
            .expect("anchor has a positive grand bundle");
        points.push(s);
        loop {
            let base = value(s)?;
            match first_true(s + 1, m + 1, |x| Ok(grows(&value(x)?, &base, epsilon)))? {
                Some(next) => {
                    points.push(next);
                    s = next;
                }
                None => break,
            }
        }
        let grand = domain.grand_bundle(t)?;
        anchor = first_true(t + 1, size, |u| Ok(grows(&domain.grand_bundle(u)?, &grand, epsilon)))?;
    }
    let sketch = Sketch::new(points, epsilon.clone());
    let bound = Sketch::size_bound(domain.bits(), epsilon);
    if sketch.len() as u64 > bound {
        return Err(Error::Integrity(format!(
            "sketch has {} points, above the bound {bound}",
            sketch.len()
        )));
    }
    Ok(sketch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::generators::gen_random_single_crossing;
    use crate::rational::parse;

    fn q(s: &str) -> Rational {
        parse(s).unwrap()
    }

    fn units(r: &RoundedValuation) -> Vec<u64> {
        r.units.iter().map(|u| u64::try_from(u).unwrap()).collect()
    }

    #[test]
    fn growth_exponent_matches_repeated_multiplication() {
        for eps in ["1/60", "1/2", "3/1", "1000/1", "1/997"] {
            let e = q(eps);
            let den: BigUint = e.denom().magnitude() << 1;
            let num: BigUint = &den + e.numer().magnitude();
            for bits in [0u64, 1, 2, 7, 16, 40] {
                let (mut l, mut a, mut b) = (0u64, BigUint::one(), BigUint::one() << bits);
                while a < b {
                    a *= &num;
                    b *= &den;
                    l += 1;
                }
                assert_eq!(least_growth_exponent(bits, &e), l, "eps {eps} bits {bits}");
            }
        }
    }

    #[test]
    fn select_delta_examples() {
        let d = select_delta(&q("1/2"), 2, 2, &100u32.into()).unwrap();
        assert_eq!(d, RoundingParam { base: 16, exp: 0 });
        let d = select_delta(&q("1/10"), 2, 1, &4u32.into()).unwrap();
        assert_eq!(d, RoundingParam { base: 8, exp: -2 });
        assert_eq!(d.value(), q("1/64"));
        assert!(matches!(
            select_delta(&q("1/2"), 1, 1, &BigUint::zero()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn select_delta_is_maximal() {
        for (eps, n, k, v) in [("1/2", 3u64, 5u64, 1000u32), ("1/10", 1, 1, 1), ("3/1", 2, 4, 77), ("1/4", 3, 2, 999)] {
            let eps = q(eps);
            let d = select_delta(&eps, n, k, &v.into()).unwrap();
            let bound = &eps * Rational::from_integer(v.into()) / Rational::from_integer((3 * n * n * k * k).into());
            assert!(d.value() <= bound);
            let next = RoundingParam { exp: d.exp + 1, ..d };
            assert!(next.value() > bound);
            // delta >= eps v_max / (12 n^3 k^3)
            assert!(d.value() * Rational::from_integer((4 * k * n).into()) >= bound);
        }
    }

    #[test]
    fn marginal_round_examples() {
        let v = Valuation::from_u64s(&[0, 3, 5, 10]).unwrap();
        let two = RoundingParam { base: 2, exp: 1 };
        assert_eq!(units(&marginal_round(&v, two)), vec![0, 1, 2, 4]);
        assert_eq!(units(&marginal_round(&v, RoundingParam::unit())), vec![0, 3, 5, 10]);
        let quarter = RoundingParam { base: 4, exp: -1 };
        let r = marginal_round(&v, quarter);
        assert!((0..=3).all(|s| r.value(s) == Rational::from_integer(v.value(s).clone().into())));
    }

    #[test]
    fn rewards_count_steps() {
        let v = Valuation::from_u64s(&[0, 0, 5, 5, 5, 9]).unwrap();
        let small = Valuation::from_u64s(&[0, 0, 0, 0, 0, 0]).unwrap();
        let delta = RoundingParam::unit();
        let rounded = vec![marginal_round(&v, delta), marginal_round(&small, delta)];
        let steps = vec![KMindedStructure::new(vec![2, 5], 5).unwrap(); 2];
        let eps = q("1/2");
        // threshold 3 * 1 * 4 * 4 / (1/2) = 96, so nobody is on top
        let out = apply_rewards(&rounded, &[v.clone(), small.clone()], delta, &eps, 2, &steps);
        assert_eq!(out, rounded);
        let eps = q("100");
        let out = apply_rewards(&rounded, &[v, small], delta, &eps, 2, &steps);
        // 2kn = 8 per step
        assert_eq!(units(&out[0]), vec![0, 0, 13, 13, 13, 25]);
        assert_eq!(out[1], rounded[1]);
    }

    #[test]
    fn sketch_of_identity_valuation() {
        let d = Domain::from_tables(&[&[0, 1, 2, 3, 4, 5, 6, 7, 8]]).unwrap();
        let k = build_sketch(&d, &q("1")).unwrap();
        assert_eq!(k.points(), &[0, 1, 2, 3, 5, 8]);
        let one_step = Domain::from_tables(&[&[0, 0, 0, 4, 4]]).unwrap();
        assert_eq!(build_sketch(&one_step, &q("1/3")).unwrap().points(), &[0, 3]);
        let zero = Domain::from_tables(&[&[0, 0, 0], &[0, 0, 0]]).unwrap();
        assert_eq!(build_sketch(&zero, &q("1/3")).unwrap().points(), &[0]);
    }

    #[test]
    fn sketch_error_bound_on_random_domains() {
        for seed in 0..60 {
            let d = gen_random_single_crossing(seed, 1 + seed % 8, 1 + seed % 40, 200).unwrap();
            for eps in ["1/2", "1/10", "2"] {
                let eps = q(eps);
                let k = build_sketch(&d, &eps).unwrap();
                for t in 0..d.size() {
                    let v = d.valuation(t).unwrap();
                    let p = project(&v, &k);
                    let vm = Rational::from_integer(v.grand_bundle().clone().into());
                    for s in 0..=d.m() {
                        let gap = Rational::from_integer((v.value(s) - p.value(s)).into());
                        assert!(gap <= &eps * &vm, "seed {seed} t {t} s {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn projection() {
        let v = Valuation::from_u64s(&[0, 1, 2, 3, 4, 5]).unwrap();
        let k = Sketch::new(vec![2, 4], q("1"));
        assert_eq!(project(&v, &k), Valuation::from_u64s(&[0, 0, 2, 2, 4, 4]).unwrap());
        assert_eq!(project(&v, &Sketch::full(5, q("1"))), v);
        assert_eq!(k.round_down(3), 2);
        assert_eq!(k.round_down(1), 0);
    }

    #[test]
    fn size_bound_values() {
        // (1 + 1/2)^L >= 2: L = 2
        assert_eq!(Sketch::size_bound(1, &q("1")), 10);
        assert_eq!(Sketch::size_bound(0, &q("1")), 2);
    }
}

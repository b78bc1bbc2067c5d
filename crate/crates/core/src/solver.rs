//! Exact welfare maximization over valuations given in integer units, with
//! the allocation tie-breaking order.

use std::cmp::Ordering;

use num_bigint::BigUint;

use crate::domain::{Allocation, Valuation};
use crate::error::{Error, Result};
use crate::rounding::{RoundedValuation, RoundingParam};

/// Compares allocations by the tie-breaking order. `Greater` means `a` is
/// preferred: it uses fewer items in total, or on equal totals it gives more
/// to the highest-indexed player where the two differ.
pub fn tie_compare(a: &Allocation, b: &Allocation) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::Parameter(format!(
            "cannot compare allocations of {} and {} players",
            a.len(),
            b.len()
        )));
    }
    let by_total = b.total().cmp(&a.total());
    if by_total != Ordering::Equal {
        return Ok(by_total);
    }
    let (qa, qb) = (a.quantities(), b.quantities());
    Ok((0..qa.len())
        .rev()
        .find(|&l| qa[l] != qb[l])
        .map_or(Ordering::Equal, |l| qa[l].cmp(&qb[l])))
}

/// Smallest `s` with `units[s] >= w`, by binary search.
pub fn min_items_for_value(u: &RoundedValuation, w: &BigUint) -> Option<u64> {
    let units = &u.units;
    if units.last()? < w {
        return None;
    }
    Some(units.partition_point(|x| x < w) as u64)
}

/// One cell of the table: the preferred allocation to players `1..=i` reaching
/// welfare `w` uses `items` items, gives `choice` to player `i`, and continues
/// at cell `(i - 1, prev_w)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DpCell {
    pub items: u64,
    pub choice: u64,
    pub prev_w: u128,
}

/// Minimum items `T(i, w)` needed by players `1..=i` to reach welfare `w`.
///
/// Stored compactly: `best[i][c]` is the largest welfare players `1..=i` can
/// reach with `c` items, and `T(i, w)` is the least `c` with `best[i][c] >= w`.
#[derive(Clone, Debug)]
pub struct DpTable {
    m: u64,
    units: Vec<Vec<u128>>,
    best: Vec<Vec<u128>>,
}

fn checked_add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b)
        .ok_or_else(|| Error::Capacity("welfare does not fit in 128 bits".into()))
}

impl DpTable {
    /// `units[i][s]` is player `i`'s value for `s` items; each row must be
    /// non-decreasing with `m + 1` entries.
    pub fn build(units: Vec<Vec<u128>>, m: u64) -> Result<Self> {
        let width = m as usize + 1;
        if units.iter().any(|u| u.len() != width) {
            return Err(Error::Parameter(format!("value rows must have {width} entries")));
        }
        let mut best = vec![vec![0u128; width]];
        for u in &units {
            let prev = best.last().expect("row 0 exists");
            let mut row = vec![0u128; width];
            for c in 0..width {
                let mut top = 0u128;
                for s in 0..=c {
                    top = top.max(checked_add(u[s], prev[c - s])?);
                }
                row[c] = top;
            }
            best.push(row);
        }
        Ok(DpTable { m, units, best })
    }

    pub fn players(&self) -> usize {
        self.units.len()
    }

    /// Number of welfare rows, `0..=max_welfare`.
    pub fn rows(&self) -> u128 {
        self.max_welfare() + 1
    }

    pub fn max_welfare(&self) -> u128 {
        self.best[self.players()][self.m as usize]
    }

    /// `T(i, w)`, `None` when more than `m` items would be needed.
    pub fn min_items(&self, i: usize, w: u128) -> Option<u64> {
        let row = &self.best[i];
        if *row.last()? < w {
            return None;
        }
        Some(row.partition_point(|&x| x < w) as u64)
    }

    /// The cell for players `1..=i` (with `i >= 1`) and welfare `w`.
    pub fn cell(&self, i: usize, w: u128) -> Option<DpCell> {
        let total = self.min_items(i, w)?;
        let u = &self.units[i - 1];
        // Among choices reaching `total`, the largest share for player `i` is
        // preferred.
        (0..=total).rev().find_map(|s| {
            let prev_w = w.saturating_sub(u[s as usize]);
            let rest = self.min_items(i - 1, prev_w)?;
            (s + rest == total).then_some(DpCell { items: total, choice: s, prev_w })
        })
    }

    /// Preferred allocation among those reaching welfare `w`.
    pub fn allocation_for(&self, w: u128) -> Option<Allocation> {
        let n = self.players();
        let mut out = vec![0u64; n];
        let mut w = w;
        for i in (1..=n).rev() {
            let cell = self.cell(i, w)?;
            out[i - 1] = cell.choice;
            w = cell.prev_w;
        }
        Some(Allocation(out))
    }

    /// Preferred welfare-maximizing allocation.
    pub fn allocation(&self) -> Allocation {
        self.allocation_for(self.max_welfare())
            .expect("maximum welfare is reachable")
    }
}

fn units_u128(values: &[BigUint]) -> Result<Vec<u128>> {
    values
        .iter()
        .map(|x| {
            u128::try_from(x).map_err(|_| Error::Capacity(format!("value {x} does not fit in 128 bits")))
        })
        .collect()
}

/// Preferred welfare-maximizing allocation for rounded valuations sharing
/// `delta` and `m`.
pub fn max_welfare_dp(us: &[RoundedValuation], m: u64) -> Result<Allocation> {
    Ok(max_welfare_table(us, m)?.allocation())
}

pub fn max_welfare_table(us: &[RoundedValuation], m: u64) -> Result<DpTable> {
    let delta: Option<RoundingParam> = us.first().map(|u| u.delta);
    if us.iter().any(|u| Some(u.delta) != delta) {
        return Err(Error::Parameter("rounded valuations use different deltas".into()));
    }
    if us.iter().any(|u| u.m() != m) {
        return Err(Error::Parameter(format!("rounded valuations must cover {m} items")));
    }
    let units = us.iter().map(|u| units_u128(&u.units)).collect::<Result<_>>()?;
    DpTable::build(units, m)
}

/// Preferred welfare-maximizing allocation for raw integer valuations, with its
/// welfare.
pub fn max_welfare_exact(vals: &[&Valuation], m: u64) -> Result<(Allocation, BigUint)> {
    if vals.iter().any(|v| v.m() != m) {
        return Err(Error::Parameter(format!("valuations must cover {m} items")));
    }
    let units = vals.iter().map(|v| units_u128(v.values())).collect::<Result<_>>()?;
    let table = DpTable::build(units, m)?;
    Ok((table.allocation(), BigUint::from(table.max_welfare())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn alloc(q: &[u64]) -> Allocation {
        Allocation(q.to_vec())
    }

    fn rounded(units: &[u64]) -> RoundedValuation {
        RoundedValuation {
            delta: RoundingParam::unit(),
            units: units.iter().map(|&x| BigUint::from(x)).collect(),
        }
    }

    #[test]
    fn tie_compare_examples() {
        assert_eq!(tie_compare(&alloc(&[2, 0]), &alloc(&[1, 2])).unwrap(), Ordering::Greater);
        assert_eq!(tie_compare(&alloc(&[1, 2]), &alloc(&[0, 3])).unwrap(), Ordering::Less);
        assert_eq!(tie_compare(&alloc(&[1, 2]), &alloc(&[1, 2])).unwrap(), Ordering::Equal);
        assert!(tie_compare(&alloc(&[1]), &alloc(&[1, 2])).is_err());
    }

    #[test]
    fn min_items_examples() {
        let u = rounded(&[0, 0, 3, 3, 7]);
        assert_eq!(min_items_for_value(&u, &0u32.into()), Some(0));
        assert_eq!(min_items_for_value(&u, &3u32.into()), Some(2));
        assert_eq!(min_items_for_value(&u, &8u32.into()), None);
    }

    #[test]
    fn dp_examples() {
        assert_eq!(max_welfare_dp(&[rounded(&[0, 5, 5, 5])], 3).unwrap(), alloc(&[1]));
        let two = [rounded(&[0, 3]), rounded(&[0, 3])];
        assert_eq!(max_welfare_dp(&two, 1).unwrap(), alloc(&[0, 1]));
        let mixed = [
            rounded(&[0, 3]),
            RoundedValuation { delta: RoundingParam { base: 2, exp: 1 }, units: vec![0u32.into(), 1u32.into()] },
        ];
        assert!(max_welfare_dp(&mixed, 1).is_err());
    }

    /// All allocations of `m` items to `n` players.
    fn all_allocations(n: usize, m: u64) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            let mut next = Vec::new();
            for partial in &out {
                let used: u64 = partial.iter().sum();
                for s in 0..=m - used {
                    let mut p = partial.clone();
                    p.push(s);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    /// Brute force: the preferred allocation among the welfare maximizers.
    fn brute(units: &[Vec<u128>], m: u64) -> (u128, Allocation) {
        let mut best: Option<(u128, Allocation)> = None;
        for a in all_allocations(units.len(), m) {
            let w: u128 = a.iter().enumerate().map(|(i, &s)| units[i][s as usize]).sum();
            let a = Allocation(a);
            best = match best {
                None => Some((w, a)),
                Some((bw, ba)) => {
                    if w > bw || (w == bw && tie_compare(&a, &ba).unwrap() == Ordering::Greater) {
                        Some((w, a))
                    } else {
                        Some((bw, ba))
                    }
                }
            };
        }
        best.unwrap()
    }

    /// Dense table over every welfare row: `T(i, w)` minimizes over the split
    /// `j` of `w` between players `1..i-1` and player `i`, keeping the preferred
    /// partial allocation on ties.
    fn dense(units: &[Vec<u128>], m: u64) -> Allocation {
        let n = units.len();
        let top: u128 = units.iter().map(|u| u[m as usize]).sum();
        let min_s = |u: &[u128], w: u128| u.iter().position(|&x| x >= w).map(|s| s as u64);
        // cells[w] = preferred partial allocation (padded to n) reaching w
        let mut cells: Vec<Option<Allocation>> = (0..=top)
            .map(|w| min_s(&units[0], w).map(|s| {
                let mut a = vec![0; n];
                a[0] = s;
                Allocation(a)
            }))
            .collect();
        for (i, row) in units.iter().enumerate().skip(1) {
            let mut next: Vec<Option<Allocation>> = vec![None; cells.len()];
            for w in 0..=top {
                for j in 0..=w {
                    let (Some(prev), Some(s)) = (&cells[j as usize], min_s(row, w - j)) else {
                        continue;
                    };
                    let mut a = prev.clone();
                    a.0[i] = s;
                    if a.total() > m {
                        continue;
                    }
                    let slot = &mut next[w as usize];
                    if slot.as_ref().is_none_or(|b| tie_compare(&a, b).unwrap() == Ordering::Greater) {
                        *slot = Some(a);
                    }
                }
            }
            cells = next;
        }
        let w = (0..=top).rev().find(|&w| cells[w as usize].as_ref().is_some_and(|a| a.total() <= m)).unwrap();
        cells[w as usize].clone().unwrap()
    }

    fn monotone_rows(n: usize, m: u64) -> impl Strategy<Value = Vec<Vec<u128>>> {
        prop::collection::vec(prop::collection::vec(0u128..=4, m as usize), n).prop_map(|rows| {
            rows.into_iter()
                .map(|marg| {
                    let mut acc = 0;
                    std::iter::once(0)
                        .chain(marg.into_iter().map(|x| {
                            acc += x;
                            acc
                        }))
                        .collect()
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn dp_matches_brute_force_and_dense_table(
            (m, rows) in (1u64..=6, 1usize..=3).prop_flat_map(|(m, n)| (Just(m), monotone_rows(n, m)))
        ) {
            let table = DpTable::build(rows.clone(), m).unwrap();
            let (w, a) = brute(&rows, m);
            prop_assert_eq!(table.max_welfare(), w);
            prop_assert_eq!(&table.allocation(), &a);
            prop_assert_eq!(&dense(&rows, m), &a);
            for i in 1..=rows.len() {
                let t: Vec<_> = (0..=table.rows()).map(|w| table.min_items(i, w)).collect();
                // None sorts below Some, so check the reached prefix is monotone.
                let reached: Vec<u64> = t.iter().map_while(|x| *x).collect();
                prop_assert!(reached.windows(2).all(|p| p[0] <= p[1]));
                prop_assert!(t[reached.len()..].iter().all(Option::is_none));
            }
        }
    }

    #[test]
    fn exhaustive_tiny_box() {
        // n = 2, m = 3, values <= 2: every monotone table pair.
        let rows: Vec<Vec<u128>> = {
            let mut all = Vec::new();
            for a in 0..=2u128 {
                for b in a..=2 {
                    for c in b..=2 {
                        all.push(vec![0, a, b, c]);
                    }
                }
            }
            all
        };
        for r1 in &rows {
            for r2 in &rows {
                let units = vec![r1.clone(), r2.clone()];
                let table = DpTable::build(units.clone(), 3).unwrap();
                assert_eq!((table.max_welfare(), table.allocation()), brute(&units, 3));
            }
        }
    }
}

//! First helix (HEL) and first stem (STM, helices per stem) tables.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::dyck::catalan_numbers;
use super::motzkin::motzkin_numbers;
use super::pfold::{pfold_hel_probs, PfoldParams};
use super::{convolve_big, AnyTable, CountTable, Model, Stat};
use crate::error::{Error, Result};

/// HEL, STM or StemHelices at size `n`.
///
/// Supported: Dyck x HEL, Motzkin x {HEL, STM, StemHelices}, Pfold x HEL.
/// Pfold tables are conditional on length `n` and use the default
/// parameters when `p` is `None`.
pub fn hel_stm_counts(
    model: Model,
    n: usize,
    stat: Stat,
    p: Option<&PfoldParams>,
) -> Result<AnyTable> {
    match (model, stat) {
        (Model::Dyck, Stat::Hel) => Ok(AnyTable::Exact(dyck_hel_counts(n))),
        (Model::Motzkin, Stat::Hel) => Ok(AnyTable::Exact(motzkin_hel_counts(n))),
        (Model::Motzkin, Stat::Stm) => Ok(AnyTable::Exact(motzkin_stm_counts(n))),
        (Model::Motzkin, Stat::StemHelices) => {
            Ok(AnyTable::Exact(motzkin_stem_helices_counts(n)))
        }
        (Model::Pfold, Stat::Hel) => {
            let params = p.copied().unwrap_or_default();
            Ok(AnyTable::Real(pfold_hel_probs(n, &params)?))
        }
        _ => Err(Error::UnsupportedCombination { model, stat }),
    }
}

/// Dyck paths of semilength `n` by height of the first mountain.
///
/// Inside an arch of height `h` sits a path that is not itself a single
/// arch, counted by `A[m] = Cat(m) - Cat(m-1)`; the count at `h` is
/// `(A * Cat)[n - h]`.
pub fn dyck_hel_counts(n: usize) -> CountTable<BigUint> {
    let mut table = CountTable::new(Model::Dyck, n, vec![Stat::Hel]);
    if n == 0 {
        table.add_absent(&BigUint::one());
        return table;
    }
    let cat = catalan_numbers(n);
    let a: Vec<BigUint> = (0..n)
        .map(|m| if m == 0 { BigUint::one() } else { &cat[m] - &cat[m - 1] })
        .collect();
    let b = convolve_big(&a, &cat, n);
    for h in 1..=n {
        table.add(vec![h as u32], &b[n - h]);
    }
    table
}

/// Motzkin paths of length `n` by first-helix length.
///
/// An arch of depth `h` wraps an inner path that is not a single arch,
/// counted by `A[m] = M(m) - M(m-2)`; leading dots leave the depth
/// unchanged, which turns the arch counts into prefix sums.
pub fn motzkin_hel_counts(n: usize) -> CountTable<BigUint> {
    let mut table = CountTable::new(Model::Motzkin, n, vec![Stat::Hel]);
    table.add_absent(&BigUint::one());
    if n < 2 {
        return table;
    }
    let mot = motzkin_numbers(n);
    let a: Vec<BigUint> = (0..=n - 2)
        .map(|m| {
            if m < 2 {
                mot[m].clone()
            } else {
                &mot[m] - &mot[m - 2]
            }
        })
        .collect();
    let b = convolve_big(&a, &mot, n - 1);
    let mut prefix = Vec::with_capacity(b.len());
    let mut acc = BigUint::zero();
    for x in &b {
        acc += x;
        prefix.push(acc.clone());
    }
    for h in 1..=n / 2 {
        table.add(vec![h as u32], &prefix[n - 2 * h]);
    }
    table
}

/// Motzkin paths of length `n` by number of base pairs in the first stem.
pub fn motzkin_stm_counts(n: usize) -> CountTable<BigUint> {
    stem_table(n, Stat::Stm)
}

/// Motzkin paths of length `n` by number of helices in the first stem.
pub fn motzkin_stem_helices_counts(n: usize) -> CountTable<BigUint> {
    stem_table(n, Stat::StemHelices)
}

/// Stem grammar:
///
/// ```text
/// Mf -> e | . Mf | ( M* ) M
/// M* -> L | L ( M* ) L | L ( M ) L ( M ) M
/// ```
///
/// with `L` any run of dots. For helices, `L ( M* ) L` starts a new helix
/// only when one of the two runs is nonempty.
fn stem_table(n: usize, stat: Stat) -> CountTable<BigUint> {
    let helices = stat == Stat::StemHelices;
    let mut table = CountTable::new(Model::Motzkin, n, vec![stat]);
    table.add_absent(&BigUint::one());
    if n < 2 {
        return table;
    }
    let top = n - 2;
    let len = top + 1;
    let mot = motzkin_numbers(top);
    // z^4 L^2 M^3: two arches over arbitrary paths, dots around the first two.
    let l2: Vec<BigUint> = (0..len).map(|m| BigUint::from(m + 1)).collect();
    let m2 = convolve_big(&mot, &mot, len);
    let m3 = convolve_big(&m2, &mot, len);
    let l2m3 = convolve_big(&l2, &m3, len);
    let branch = |j: usize| -> BigUint {
        if j >= 4 {
            l2m3[j - 4].clone()
        } else {
            BigUint::zero()
        }
    };

    // star[j][k]: M* derivations of length j with k marked stem steps.
    let width = len / 2 + 1;
    let mut star = vec![vec![BigUint::zero(); width]; len];
    for j in 0..len {
        let mut row = vec![BigUint::zero(); width];
        row[0] = BigUint::one() + branch(j);
        if helices && j >= 2 {
            let carried = star[j - 2][0].clone();
            row[0] += carried;
        }
        for (k, cell) in row.iter_mut().enumerate().skip(1) {
            if j < 2 {
                break;
            }
            let mut acc = BigUint::zero();
            if helices {
                acc += &star[j - 2][k];
            }
            let first = usize::from(helices);
            for m in first..=(j - 2) {
                let inner = &star[j - 2 - m][k - 1];
                if !inner.is_zero() {
                    acc += inner * BigUint::from(m + 1);
                }
            }
            *cell = acc;
        }
        star[j] = row;
    }

    let mut prefix = Vec::with_capacity(len);
    let mut acc = BigUint::zero();
    for x in &mot {
        acc += x;
        prefix.push(acc.clone());
    }
    for v in 1..=width {
        let mut total = BigUint::zero();
        for j in 0..len {
            let s = &star[j][v - 1];
            if !s.is_zero() {
                total += s * &prefix[top - j];
            }
        }
        table.add(vec![v as u32], &total);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::enumerate::enumerate_all;
    use crate::stats::{first_helix_length, first_stem};
    use std::collections::BTreeMap;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn exact(t: AnyTable) -> CountTable<BigUint> {
        match t {
            AnyTable::Exact(t) => t,
            AnyTable::Real(_) => panic!("expected exact table"),
        }
    }

    #[test]
    fn dyck_small() {
        let t = dyck_hel_counts(3);
        assert_eq!(t.get(&[1]), big(3));
        assert_eq!(t.get(&[2]), big(1));
        assert_eq!(t.get(&[3]), big(1));
        assert!(t.absent().is_zero());
    }

    #[test]
    fn motzkin_small() {
        let t = motzkin_hel_counts(3);
        assert_eq!(t.absent(), &big(1));
        assert_eq!(t.get(&[1]), big(3));
        assert_eq!(t.len(), 1);
        let s = motzkin_stm_counts(2);
        assert_eq!(s.absent(), &big(1));
        assert_eq!(s.get(&[1]), big(1));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn unsupported_pairs() {
        for (m, s) in [
            (Model::Pfold, Stat::Stm),
            (Model::Pfold, Stat::StemHelices),
            (Model::Dyck, Stat::Stm),
            (Model::Motzkin, Stat::Deg),
        ] {
            assert_eq!(
                hel_stm_counts(m, 5, s, None).unwrap_err(),
                Error::UnsupportedCombination { model: m, stat: s }
            );
        }
    }

    /// Oracle histogram: (absent count, value -> count).
    fn brute(model: Model, n: usize, stat: Stat) -> (u64, BTreeMap<u32, u64>) {
        let mut absent = 0;
        let mut hist = BTreeMap::new();
        for s in enumerate_all(model, n).unwrap() {
            let v = match stat {
                Stat::Hel => first_helix_length(&s),
                Stat::Stm => first_stem(&s).map(|f| f.stm),
                Stat::StemHelices => first_stem(&s).map(|f| f.helices),
                _ => unreachable!(),
            };
            match v {
                Some(v) => *hist.entry(v as u32).or_insert(0) += 1,
                None => absent += 1,
            }
        }
        (absent, hist)
    }

    fn assert_matches(model: Model, n: usize, stat: Stat) {
        let t = exact(hel_stm_counts(model, n, stat, None).unwrap());
        let (absent, hist) = brute(model, n, stat);
        assert_eq!(t.absent(), &big(absent), "{model} {stat} n={n}");
        assert_eq!(t.len(), hist.len(), "{model} {stat} n={n}");
        for (v, c) in hist {
            assert_eq!(t.get(&[v]), big(c), "{model} {stat} n={n} v={v}");
        }
    }

    #[test]
    fn dyck_hel_matches_enumeration() {
        for n in 0..=10 {
            assert_matches(Model::Dyck, n, Stat::Hel);
        }
    }

    #[test]
    fn motzkin_tables_match_enumeration() {
        for n in 0..=12 {
            for stat in [Stat::Hel, Stat::Stm, Stat::StemHelices] {
                assert_matches(Model::Motzkin, n, stat);
            }
        }
    }

    #[test]
    fn totals() {
        for n in [20usize, 45] {
            let mot = &motzkin_numbers(n)[n];
            assert_eq!(&motzkin_hel_counts(n).total(), mot);
            assert_eq!(&motzkin_stm_counts(n).total(), mot);
            assert_eq!(&motzkin_stem_helices_counts(n).total(), mot);
            assert_eq!(dyck_hel_counts(n).total(), catalan_numbers(n)[n]);
        }
    }
}

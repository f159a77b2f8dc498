//! Dyck paths of semilength `n`, counted by returns to the axis.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{CountTable, Model, Stat};

/// Catalan numbers `Cat(0..=n)`.
pub fn catalan_numbers(n: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(n + 1);
    let mut c = BigUint::one();
    for k in 0..=n {
        out.push(c.clone());
        c = c * BigUint::from(2 * (2 * k + 1)) / BigUint::from(k + 2);
    }
    out
}

/// Dyck paths of semilength `n` by number of returns to zero (DEG).
///
/// Row `m` holds the coefficients of `C^l` at `z^(m-l)`; the identity
/// `C^l = C^(l+1) - z C^(l+2)` gives `D[m][l] = D[m-1][l-1] + D[m][l+1]`
/// with `D[m][m] = 1`, so only two rows are kept.
pub fn dyck_deg_counts(n: usize) -> CountTable<BigUint> {
    let mut table = CountTable::new(Model::Dyck, n, vec![Stat::Deg]);
    if n == 0 {
        table.add(vec![0], &BigUint::one());
        return table;
    }
    let mut prev: Vec<BigUint> = vec![BigUint::one()];
    for m in 1..=n {
        let mut row = vec![BigUint::zero(); m + 1];
        row[m] = BigUint::one();
        for l in (1..m).rev() {
            let (lo, hi) = row.split_at_mut(l + 1);
            lo[l] = &prev[l - 1] + &hi[0];
        }
        prev = row;
    }
    for (l, w) in prev.iter().enumerate() {
        table.add(vec![l as u32], w);
    }
    table
}

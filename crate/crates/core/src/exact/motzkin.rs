//! Motzkin paths (nested structures without length constraints) of length `n`.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

use super::{CountTable, Model, Stat};

/// Motzkin numbers `M(0..=n)`.
pub fn motzkin_numbers(n: usize) -> Vec<BigUint> {
    let mut out: Vec<BigUint> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let v = match k {
            0 | 1 => BigUint::one(),
            _ => {
                (BigUint::from(2 * k + 1) * &out[k - 1] + BigUint::from(3 * k - 3) * &out[k - 2])
                    / BigUint::from(k + 2)
            }
        };
        out.push(v);
    }
    out
}

/// Coefficient columns of `M(z)^l`, `l = 0, 1, ...`, each truncated to the
/// lengths still reachable at total size `n` (column `l` needs `n - 2l + 1`
/// entries).
///
/// Uses `z^2 M^2 = (1 - z) M - 1`, i.e.
/// `Q_(l+2)[m] = Q_(l+1)[m+2] - Q_(l+1)[m+1] - Q_l[m+2]`.
struct PowerColumns {
    n: usize,
    l: usize,
    prev: Vec<BigUint>,
    cur: Vec<BigUint>,
}

impl PowerColumns {
    fn new(n: usize) -> Self {
        let mut q0 = vec![BigUint::zero(); n + 1];
        q0[0] = BigUint::one();
        PowerColumns {
            n,
            l: 0,
            prev: Vec::new(),
            cur: q0,
        }
    }

    fn advance(&mut self) {
        let next_len = (self.n + 1).saturating_sub(2 * (self.l + 1));
        let next = if self.l == 0 {
            let mut m = motzkin_numbers(self.n);
            m.truncate(next_len);
            m
        } else {
            (0..next_len)
                .map(|m| {
                    let sub = &self.cur[m + 1] + &self.prev[m + 2];
                    &self.cur[m + 2] - sub
                })
                .collect()
        };
        self.prev = std::mem::replace(&mut self.cur, next);
        self.l += 1;
    }
}

fn for_each_joint_cell(n: usize, mut f: impl FnMut(u32, u32, BigUint)) {
    let mut cols = PowerColumns::new(n);
    loop {
        let l = cols.l;
        if 2 * l > n {
            break;
        }
        // C(k + l, k), built up along k.
        let mut binom = BigUint::one();
        for k in 0..=(n - 2 * l) {
            if k > 0 {
                binom = binom * BigUint::from(k + l) / BigUint::from(k);
            }
            let q = &cols.cur[n - k - 2 * l];
            if !q.is_zero() {
                f(l as u32, k as u32, &binom * q);
            }
        }
        if 2 * (l + 1) > n {
            break;
        }
        cols.advance();
    }
}

/// Motzkin paths of length `n` by (DEG, UNP).
///
/// A path is a sequence of `k` exterior dots and `l` arches over arbitrary
/// paths, so the count is `C(k+l, k)` times the `z^(n-k-2l)` coefficient of
/// `M(z)^l`.
pub fn motzkin_joint_counts(n: usize) -> CountTable<BigUint> {
    let mut table = CountTable::new(Model::Motzkin, n, vec![Stat::Deg, Stat::Unp]);
    for_each_joint_cell(n, |l, k, w| table.add(vec![l, k], &w));
    table
}

/// Motzkin paths of length `n` by UNP.
pub fn motzkin_unp_counts(n: usize) -> CountTable<BigUint> {
    let mut table = CountTable::new(Model::Motzkin, n, vec![Stat::Unp]);
    for_each_joint_cell(n, |_, k, w| table.add(vec![k], &w));
    table
}

/// Motzkin paths of length `n` by DEG, without tracking UNP.
///
/// With `T = z^2 M / (1 - z)` the DEG = l class is `T^l / (1 - z)`. Powers of
/// `T` follow `(1-z)^2 T^(l+2) = (1-z)^2 T^(l+1) - z^2 T^l`.
pub fn motzkin_deg_counts(n: usize) -> CountTable<BigUint> {
    let mut table = CountTable::new(Model::Motzkin, n, vec![Stat::Deg]);
    let mot = motzkin_numbers(n);
    let len = n + 1;

    let mut t0 = vec![BigInt::zero(); len];
    t0[0] = BigInt::one();
    let mut t1 = vec![BigInt::zero(); len];
    let mut acc = BigInt::zero();
    for m in 2..len {
        acc += BigInt::from_biguint(Sign::Plus, mot[m - 2].clone());
        t1[m] = acc.clone();
    }

    let emit = |table: &mut CountTable<BigUint>, l: usize, t: &[BigInt]| {
        let total: BigInt = t.iter().sum();
        table.add(vec![l as u32], &total.to_biguint().expect("nonnegative count"));
    };
    emit(&mut table, 0, &t0);
    if n >= 2 {
        emit(&mut table, 1, &t1);
    }

    let at = |v: &[BigInt], i: isize| -> BigInt {
        if i < 0 {
            BigInt::zero()
        } else {
            v[i as usize].clone()
        }
    };
    let mut l = 2;
    while 2 * l <= n {
        let mut t2 = vec![BigInt::zero(); len];
        for m in 0..len as isize {
            let r = at(&t1, m) - 2 * at(&t1, m - 1) + at(&t1, m - 2) - at(&t0, m - 2);
            t2[m as usize] = r + 2 * at(&t2, m - 1) - at(&t2, m - 2);
        }
        emit(&mut table, l, &t2);
        t0 = std::mem::replace(&mut t1, t2);
        l += 1;
    }
    table
}

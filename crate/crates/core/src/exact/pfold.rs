//! The Pfold stochastic grammar
//!
//! ```text
//! S -> L S (p1) | L (q1)
//! L -> ( F ) (p2) | . (q2)
//! F -> ( F ) (p3) | L S (q3)
//! ```
//!
//! All tables hold the probability that a symbol derives a string of the
//! given length.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CountTable, Model, Stat};
use crate::error::{Error, Result};
use crate::structure::SecondaryStructure;

/// Rule probabilities; `q_i = 1 - p_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfoldParams {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl Default for PfoldParams {
    fn default() -> Self {
        PfoldParams {
            p1: 0.868534,
            p2: 0.105397,
            p3: 0.787640,
        }
    }
}

impl PfoldParams {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Result<Self> {
        let p = PfoldParams { p1, p2, p3 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p1", self.p1), ("p2", self.p2), ("p3", self.p3)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidPfoldParams(format!(
                    "{name} = {v} is not in (0, 1)"
                )));
            }
        }
        Ok(())
    }

    pub fn q1(&self) -> f64 {
        1.0 - self.p1
    }

    pub fn q2(&self) -> f64 {
        1.0 - self.p2
    }

    pub fn q3(&self) -> f64 {
        1.0 - self.p3
    }
}

impl FromStr for PfoldParams {
    type Err = Error;

    /// Accepts `{"p1":..,"p2":..,"p3":..}` or three numbers separated by
    /// whitespace or commas.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let p: PfoldParams = if t.starts_with('{') {
            serde_json::from_str(t).map_err(|e| Error::InvalidPfoldParams(e.to_string()))?
        } else {
            let nums: Vec<f64> = t
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|x| !x.is_empty())
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|_| Error::InvalidPfoldParams(format!("not a number: {x:?}")))
                })
                .collect::<Result<_>>()?;
            if nums.len() != 3 {
                return Err(Error::InvalidPfoldParams(format!(
                    "expected 3 numbers, found {}",
                    nums.len()
                )));
            }
            PfoldParams {
                p1: nums[0],
                p2: nums[1],
                p3: nums[2],
            }
        };
        p.validate()?;
        Ok(p)
    }
}

/// Length-indexed derivation probabilities of `S`, `L`, `F` and `L S`.
#[derive(Debug, Clone)]
pub struct PfoldInside {
    pub params: PfoldParams,
    pub s: Vec<f64>,
    pub l: Vec<f64>,
    pub f: Vec<f64>,
    pub ls: Vec<f64>,
}

impl PfoldInside {
    pub fn new(params: PfoldParams, nmax: usize) -> Self {
        let p = params;
        let len = nmax + 1;
        let mut s = vec![0.0; len];
        let mut l = vec![0.0; len];
        let mut f = vec![0.0; len];
        let mut ls = vec![0.0; len];
        for n in 1..len {
            l[n] = if n >= 2 { p.p2 * f[n - 2] } else { 0.0 } + if n == 1 { p.q2() } else { 0.0 };
            ls[n] = (1..n).map(|t| l[t] * s[n - t]).sum();
            f[n] = if n >= 2 { p.p3 * f[n - 2] } else { 0.0 } + p.q3() * ls[n];
            s[n] = p.p1 * ls[n] + p.q1() * l[n];
        }
        PfoldInside {
            params,
            s,
            l,
            f,
            ls,
        }
    }

    pub fn nmax(&self) -> usize {
        self.s.len() - 1
    }

    fn check_mass(&self, n: usize) -> Result<f64> {
        let mass = self.s[n];
        if mass > 0.0 {
            Ok(mass)
        } else {
            Err(Error::ZeroMassLength(n))
        }
    }

    /// HEL at length `n`, unconditional; structures without a pair go to the
    /// absent bucket.
    ///
    /// The first arch contributes `q3 p3^(h-1) B[n - 2h]` with `B = LS * G`,
    /// `G = p1 p2 S + q1 p2 [len 0]` the continuation after the arch; leading
    /// dots multiply by `p1 q2` each.
    pub fn first_helix(&self, n: usize) -> CountTable<f64> {
        assert!(n <= self.nmax());
        let p = self.params;
        let mut table = CountTable::new(Model::Pfold, n, vec![Stat::Hel]);
        if n == 0 {
            return table;
        }
        let mut g: Vec<f64> = self.s[..=n].iter().map(|x| p.p1 * p.p2 * x).collect();
        g[0] = p.q1() * p.p2;
        let b: Vec<f64> = (0..=n)
            .map(|t| (0..=t).map(|i| self.ls[i] * g[t - i]).sum())
            .collect();
        let dot = p.p1 * p.q2();
        for h in 1..=n / 2 {
            let mut acc = 0.0;
            let mut lead = 1.0;
            let mut pw3 = p.q3() * p.p3.powi(h as i32 - 1);
            if pw3 == 0.0 {
                break;
            }
            // a leading dots, arch of depth h over the remaining length.
            for a in 0..=(n - 2 * h) {
                acc += lead * b[n - a - 2 * h];
                lead *= dot;
            }
            pw3 *= acc;
            table.add(vec![h as u32], &pw3);
        }
        table.add_absent(&(dot.powi(n as i32 - 1) * p.q1() * p.q2()));
        table
    }
}

/// Exterior-loop tables over all lengths up to `nmax`.
///
/// The exterior is a sequence of `k` dots and `l` arches, so
/// `S_ex(n, k, l) = q1 p1^(k+l-1) C(k+l, k) q2^k p2^l [z^(n-k-2l)] F^l`.
/// The convolution powers `F^l` are built once for every length.
#[derive(Debug, Clone)]
pub struct PfoldExterior {
    pub inside: PfoldInside,
    phi: Vec<Vec<f64>>,
}

impl PfoldExterior {
    pub fn new(inside: PfoldInside) -> Self {
        let n = inside.nmax();
        let mut phi = Vec::new();
        let mut cur = vec![0.0; n + 1];
        cur[0] = 1.0;
        let mut l = 0usize;
        loop {
            // F^(l+1) lives on [2(l+1), n - 2(l+1)] for the lengths we query.
            let lo = 2 * l;
            let top = n.checked_sub(2 * (l + 1)).filter(|&t| t >= lo + 2);
            let next = top.map(|top| {
                let mut next = vec![0.0; n + 1];
                for (m, slot) in next.iter_mut().enumerate().take(top + 1).skip(lo + 2) {
                    let mut acc = 0.0;
                    for (i, &x) in cur.iter().enumerate().take(m - 1).skip(lo) {
                        acc += x * inside.f[m - i];
                    }
                    *slot = acc;
                }
                next
            });
            phi.push(cur);
            match next {
                Some(v) => cur = v,
                None => break,
            }
            l += 1;
        }
        PfoldExterior { inside, phi }
    }

    pub fn nmax(&self) -> usize {
        self.inside.nmax()
    }

    fn for_each_cell(&self, n: usize, mut f: impl FnMut(usize, usize, f64)) {
        assert!(n <= self.nmax());
        if n == 0 {
            return;
        }
        let p = self.inside.params;
        let (lq1, lp1, lq2, lp2) = (p.q1().ln(), p.p1.ln(), p.q2().ln(), p.p2.ln());
        for (l, phi) in self.phi.iter().enumerate() {
            if 2 * l > n {
                break;
            }
            let mut ln_binom = 0.0;
            for k in 0..=(n - 2 * l) {
                if k > 0 {
                    ln_binom += ((k + l) as f64).ln() - (k as f64).ln();
                }
                let v = phi[n - k - 2 * l];
                if k + l == 0 || v <= 0.0 {
                    continue;
                }
                let ln_w =
                    lq1 + (k + l - 1) as f64 * lp1 + ln_binom + k as f64 * lq2 + l as f64 * lp2;
                f(k, l, ln_w.exp() * v);
            }
        }
    }

    /// Unconditional `S_ex(n, ., .)` keyed by (UNP, DEG).
    pub fn joint(&self, n: usize) -> CountTable<f64> {
        let mut table = CountTable::new(Model::Pfold, n, vec![Stat::Unp, Stat::Deg]);
        self.for_each_cell(n, |k, l, w| table.add(vec![k as u32, l as u32], &w));
        table
    }

    /// `sum_(k,l) S_ex(n, k, l)`, without building the table.
    pub fn mass(&self, n: usize) -> f64 {
        let mut acc = 0.0;
        self.for_each_cell(n, |_, _, w| acc += w);
        acc
    }
}

/// Joint (UNP, DEG) law of the exterior loop conditional on length `n`.
pub fn pfold_joint_probs(n: usize, p: &PfoldParams) -> Result<CountTable<f64>> {
    p.validate()?;
    let inside = PfoldInside::new(*p, n);
    let mass = inside.check_mass(n)?;
    Ok(scale(PfoldExterior::new(inside).joint(n), 1.0 / mass))
}

/// HEL conditional on length `n`.
pub fn pfold_hel_probs(n: usize, p: &PfoldParams) -> Result<CountTable<f64>> {
    p.validate()?;
    let inside = PfoldInside::new(*p, n);
    let mass = inside.check_mass(n)?;
    Ok(scale(inside.first_helix(n), 1.0 / mass))
}

fn scale(t: CountTable<f64>, factor: f64) -> CountTable<f64> {
    let mut out = CountTable::new(t.model, t.size, t.stats.clone());
    for (k, w) in t.iter() {
        out.add(k.clone(), &(w * factor));
    }
    out.add_absent(&(t.absent() * factor));
    out
}

/// Natural log of the probability that the grammar emits exactly `s`
/// (`-inf` if it cannot). The derivation is unique when it exists.
pub fn pfold_structure_log_prob(s: &SecondaryStructure, p: &PfoldParams) -> f64 {
    if s.is_crossing() || s.is_empty() {
        return f64::NEG_INFINITY;
    }
    let partner: Vec<Option<usize>> = (0..s.len()).map(|i| s.partner(i)).collect();
    let lp = LogParams::new(p);
    seq_log_prob(&partner, 0, s.len(), &lp)
}

struct LogParams {
    p1: f64,
    q1: f64,
    p2: f64,
    q2: f64,
    p3: f64,
    q3: f64,
}

impl LogParams {
    fn new(p: &PfoldParams) -> Self {
        LogParams {
            p1: p.p1.ln(),
            q1: p.q1().ln(),
            p2: p.p2.ln(),
            q2: p.q2().ln(),
            p3: p.p3.ln(),
            q3: p.q3().ln(),
        }
    }
}

/// Top-level items of `[a, b)`: each item is `(start, end_exclusive)`.
fn items(partner: &[Option<usize>], a: usize, b: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = a;
    while i < b {
        let end = match partner[i] {
            Some(j) => j + 1,
            None => i + 1,
        };
        out.push((i, end));
        i = end;
    }
    out
}

fn item_log_prob(partner: &[Option<usize>], it: (usize, usize), lp: &LogParams) -> f64 {
    if it.1 - it.0 == 1 {
        lp.q2
    } else {
        lp.p2 + f_log_prob(partner, it.0 + 1, it.1 - 1, lp)
    }
}

fn seq_log_prob(partner: &[Option<usize>], a: usize, b: usize, lp: &LogParams) -> f64 {
    let its = items(partner, a, b);
    if its.is_empty() {
        return f64::NEG_INFINITY;
    }
    let mut acc = lp.q1 + (its.len() - 1) as f64 * lp.p1;
    for it in its {
        acc += item_log_prob(partner, it, lp);
    }
    acc
}

fn f_log_prob(partner: &[Option<usize>], mut a: usize, mut b: usize, lp: &LogParams) -> f64 {
    let mut acc = 0.0;
    // Direct stacks: F -> ( F ).
    loop {
        let its = items(partner, a, b);
        match its.len() {
            0 => return f64::NEG_INFINITY,
            1 if its[0].1 - its[0].0 >= 2 => {
                acc += lp.p3;
                a += 1;
                b -= 1;
            }
            1 => return f64::NEG_INFINITY,
            _ => {
                let first = its[0];
                return acc
                    + lp.q3
                    + item_log_prob(partner, first, lp)
                    + seq_log_prob(partner, first.1, b, lp);
            }
        }
    }
}

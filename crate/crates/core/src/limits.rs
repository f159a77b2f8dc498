//! Limiting distributions as the structure size grows.
//!
//! Every exterior statistic is a function of the joint (UNP, DEG) law with
//! PGF `c v / (1 - a u - b v)^2`, `c = (1 - a - b)^2`; first-helix and stem
//! statistics are shifted geometric laws.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::exact::pfold::PfoldParams;
use crate::exact::{Model, Stat};
use crate::stats::EteModel;

/// Number field the laws are evaluated in: `f64` or exact rationals.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Num + Neg<Output = Self> {
    fn from_u64(v: u64) -> Self;
    fn to_f64(&self) -> f64;

    fn ratio(num: u64, den: u64) -> Self {
        Self::from_u64(num) / Self::from_u64(den)
    }
}

impl Scalar for f64 {
    fn from_u64(v: u64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// `offset + NB(r, p)`: failures before the `r`-th success.
#[derive(Debug, Clone, PartialEq)]
pub struct NegBinomial<T> {
    pub offset: u32,
    pub r: u32,
    pub p: T,
}

/// Joint law of (UNP, DEG) = (i, j) with PGF `c v / (1 - a u - b v)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointNb<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

/// `unp_weight * UNP + deg_weight * DEG` under a joint law.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearJoint<T> {
    pub joint: JointNb<T>,
    pub unp_weight: u32,
    pub deg_weight: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LimitDist<T> {
    NegBinomial(NegBinomial<T>),
    /// Keys of joint pmfs are `[deg, unp]`.
    Joint(JointNb<T>),
    Linear(LinearJoint<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Moments<T> {
    pub mean: T,
    pub variance: T,
}

/// Mean and variance with an absolute error bound on each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub certified_error: f64,
}

impl<T: Scalar> NegBinomial<T> {
    pub fn new(offset: u32, r: u32, p: T) -> Self {
        NegBinomial { offset, r, p }
    }

    pub fn moments(&self) -> Moments<T> {
        let r = T::from_u64(self.r as u64);
        let q = T::one() - self.p.clone();
        let spread = r * q / self.p.clone();
        Moments {
            mean: T::from_u64(self.offset as u64) + spread.clone(),
            variance: spread / self.p.clone(),
        }
    }
}

impl NegBinomial<f64> {
    pub fn pmf(&self, k: u64) -> f64 {
        let Some(m) = k.checked_sub(self.offset as u64) else {
            return 0.0;
        };
        if self.p >= 1.0 {
            return if m == 0 { 1.0 } else { 0.0 };
        }
        let r = self.r as u64;
        let ln = ln_binomial(m + r - 1, m) + r as f64 * self.p.ln() + m as f64 * (1.0 - self.p).ln();
        ln.exp()
    }
}

impl<T: Scalar> JointNb<T> {
    pub fn new(a: T, b: T) -> Self {
        let s = T::one() - a.clone() - b.clone();
        JointNb {
            c: s.clone() * s,
            a,
            b,
        }
    }

    fn s(&self) -> T {
        T::one() - self.a.clone() - self.b.clone()
    }

    /// DEG: `1 + NB(2, 1 - b/(1-a))`.
    pub fn deg_marginal(&self) -> NegBinomial<T> {
        let one = T::one();
        NegBinomial::new(1, 2, one.clone() - self.b.clone() / (one - self.a.clone()))
    }

    /// UNP: `NB(2, 1 - a/(1-b))`.
    pub fn unp_marginal(&self) -> NegBinomial<T> {
        let one = T::one();
        NegBinomial::new(0, 2, one.clone() - self.a.clone() / (one - self.b.clone()))
    }

    /// CHN = UNP + DEG - 1: `NB(2, 1 - a - b)`.
    pub fn chain(&self) -> NegBinomial<T> {
        NegBinomial::new(0, 2, self.s())
    }

    /// (E[i], E[j], Var i, Var j, Cov(i, j)) for i = UNP, j = DEG.
    pub fn second_order(&self) -> [T; 5] {
        let s = self.s();
        let (a, b) = (self.a.clone(), self.b.clone());
        let two = T::from_u64(2);
        let six = T::from_u64(6);
        let s2 = s.clone() * s.clone();
        let ei = two.clone() * a.clone() / s.clone();
        let ej = T::one() + two * b.clone() / s.clone();
        let fi = six.clone() * a.clone() * a.clone() / s2.clone();
        let fj = T::from_u64(4) * b.clone() / s.clone() + six.clone() * b.clone() * b.clone() / s2.clone();
        let eij = ei.clone() + six * a * b / s2;
        let vi = fi + ei.clone() - ei.clone() * ei.clone();
        let vj = fj + ej.clone() - ej.clone() * ej.clone();
        let cov = eij - ei.clone() * ej.clone();
        [ei, ej, vi, vj, cov]
    }

    /// `p(i, j)` evaluated in `T`; intended for small arguments.
    pub fn pmf_exact(&self, i: u64, j: u64) -> T {
        if j == 0 {
            return T::zero();
        }
        let n = i + j;
        let mut binom = T::one();
        for t in 0..i {
            binom = binom * T::from_u64(n - 1 - t) / T::from_u64(t + 1);
        }
        let mut w = self.c.clone() * T::from_u64(n) * binom;
        for _ in 0..i {
            w = w * self.a.clone();
        }
        for _ in 1..j {
            w = w * self.b.clone();
        }
        w
    }
}

impl JointNb<f64> {
    /// `p(i, j) = c (i+j) C(i+j-1, i) a^i b^(j-1)`, `i` = UNP, `j` = DEG.
    pub fn pmf(&self, i: u64, j: u64) -> f64 {
        if j == 0 {
            return 0.0;
        }
        if i > 0 && self.a <= 0.0 {
            return 0.0;
        }
        let n = i + j;
        let mut ln = self.c.ln() + (n as f64).ln() + ln_binomial(n - 1, i);
        if i > 0 {
            ln += i as f64 * self.a.ln();
        }
        if j > 1 {
            ln += (j - 1) as f64 * self.b.ln();
        }
        ln.exp()
    }

    /// `P(i + j = n) = c n (a+b)^(n-1)`.
    pub fn diagonal(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.c * n as f64 * (self.a + self.b).powi(n as i32 - 1)
    }
}

impl<T: Scalar> LinearJoint<T> {
    pub fn moments(&self) -> Moments<T> {
        let [ei, ej, vi, vj, cov] = self.joint.second_order();
        let wu = T::from_u64(self.unp_weight as u64);
        let wd = T::from_u64(self.deg_weight as u64);
        Moments {
            mean: wu.clone() * ei + wd.clone() * ej,
            variance: wu.clone() * wu.clone() * vi
                + wd.clone() * wd.clone() * vj
                + T::from_u64(2) * wu * wd * cov,
        }
    }
}

impl LinearJoint<f64> {
    pub fn pmf(&self, t: u64) -> f64 {
        let (wu, wd) = (self.unp_weight as u64, self.deg_weight as u64);
        let mut acc = 0.0;
        let mut j = 1;
        while wd * j <= t {
            let rest = t - wd * j;
            if wu == 0 {
                if rest == 0 {
                    acc += self.joint.deg_marginal().pmf(j);
                }
            } else if rest % wu == 0 {
                acc += self.joint.pmf(rest / wu, j);
            }
            j += 1;
        }
        acc
    }
}

impl<T: Scalar> LimitDist<T> {
    /// Mean and variance; `None` for a bivariate law.
    pub fn moments(&self) -> Option<Moments<T>> {
        match self {
            LimitDist::NegBinomial(nb) => Some(nb.moments()),
            LimitDist::Joint(_) => None,
            LimitDist::Linear(l) => Some(l.moments()),
        }
    }

    pub fn to_f64(&self) -> LimitDist<f64> {
        let jf = |j: &JointNb<T>| JointNb {
            a: j.a.to_f64(),
            b: j.b.to_f64(),
            c: j.c.to_f64(),
        };
        match self {
            LimitDist::NegBinomial(nb) => LimitDist::NegBinomial(NegBinomial::new(
                nb.offset,
                nb.r,
                nb.p.to_f64(),
            )),
            LimitDist::Joint(j) => LimitDist::Joint(jf(j)),
            LimitDist::Linear(l) => LimitDist::Linear(LinearJoint {
                joint: jf(&l.joint),
                unp_weight: l.unp_weight,
                deg_weight: l.deg_weight,
            }),
        }
    }
}

/// Mean and variance of a univariate law.
pub fn moments<T: Scalar>(d: &LimitDist<T>) -> Option<Moments<T>> {
    d.moments()
}

impl LimitDist<f64> {
    pub fn is_joint(&self) -> bool {
        matches!(self, LimitDist::Joint(_))
    }

    pub fn summary(&self) -> Option<MomentSummary> {
        self.moments().map(|m| MomentSummary {
            mean: m.mean,
            variance: m.variance,
            certified_error: 0.0,
        })
    }

    /// Probability of `key`: `[value]`, or `[deg, unp]` for a joint law.
    pub fn prob(&self, key: &[u32]) -> f64 {
        match self {
            LimitDist::NegBinomial(nb) => nb.pmf(key[0] as u64),
            LimitDist::Linear(l) => l.pmf(key[0] as u64),
            LimitDist::Joint(j) => j.pmf(key[1] as u64, key[0] as u64),
        }
    }

    /// JSON description `{kind, offset, r, p}` or `{kind, a, b, c, ...}`.
    pub fn law_json(&self) -> serde_json::Value {
        match self {
            LimitDist::NegBinomial(nb) => json!({
                "kind": "neg_binomial",
                "offset": nb.offset,
                "r": nb.r,
                "p": nb.p,
            }),
            LimitDist::Joint(j) => json!({
                "kind": "joint_neg_binomial",
                "a": j.a,
                "b": j.b,
                "c": j.c,
            }),
            LimitDist::Linear(l) => json!({
                "kind": "linear_joint",
                "a": l.joint.a,
                "b": l.joint.b,
                "c": l.joint.c,
                "unp_weight": l.unp_weight,
                "deg_weight": l.deg_weight,
            }),
        }
    }

    /// Smallest `k` with `P(X <= k) >= q`, searching up to `limit`.
    pub fn quantile(&self, q: f64, limit: u64) -> u64 {
        let mut acc = 0.0;
        for k in 0..=limit {
            acc += self.prob(&[k as u32]);
            if acc >= q {
                return k;
            }
        }
        limit
    }
}

/// `pmf(0..=kmax)` of a univariate law.
pub fn pmf_expand(d: &LimitDist<f64>, kmax: usize) -> Result<Vec<f64>> {
    if d.is_joint() {
        return Err(Error::NotUnivariate);
    }
    Ok((0..=kmax).map(|k| d.prob(&[k as u32])).collect())
}

/// `p(i, j)` of a joint law (`i` = UNP, `j` = DEG).
pub fn joint_pmf(d: &JointNb<f64>, i: u64, j: u64) -> f64 {
    d.pmf(i, j)
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|t| ((n - t) as f64).ln() - ((t + 1) as f64).ln()).sum()
}

// Pfold singularity

/// Smallest positive root `rho` of `R(z)` and `delta = p1 q2 rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PfoldDerived {
    pub rho: f64,
    pub delta: f64,
}

impl PfoldDerived {
    /// Success probability of the HEL law, `1 - rho^2 p3`.
    pub fn helix_p(&self, p: &PfoldParams) -> f64 {
        1.0 - self.rho * self.rho * p.p3
    }
}

/// `R(z) = (1 - a z)^2 (1 - p3 z^2) - beta z^3` with `a = p1 q2`,
/// `beta = 4 p2 q1 q2 q3`, as coefficients of `z^0..z^4`.
pub fn pfold_quartic(p: &PfoldParams) -> [f64; 5] {
    let a = p.p1 * p.q2();
    let beta = 4.0 * p.p2 * p.q1() * p.q2() * p.q3();
    [
        1.0,
        -2.0 * a,
        a * a - p.p3,
        2.0 * a * p.p3 - beta,
        -a * a * p.p3,
    ]
}

/// `R(z)` evaluated in factored form.
pub fn pfold_r_factored(p: &PfoldParams, z: f64) -> f64 {
    let a = p.p1 * p.q2();
    let beta = 4.0 * p.p2 * p.q1() * p.q2() * p.q3();
    (1.0 - a * z).powi(2) * (1.0 - p.p3 * z * z) - beta * z.powi(3)
}

fn horner(c: &[f64; 5], z: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &x| acc * z + x)
}

fn horner_deriv(c: &[f64; 5], z: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &x)| acc * z + k as f64 * x)
}

/// Locates `rho` on `(0, 1/sqrt(p3))`: scan for the first sign change,
/// bisect to `1e-6`, then Newton steps kept inside the bracket.
pub fn pfold_rho_delta(p: &PfoldParams, tol: f64) -> Result<PfoldDerived> {
    p.validate()?;
    let c = pfold_quartic(p);
    let upper = 1.0 / p.p3.sqrt();
    const STEPS: usize = 4096;
    let h = upper / STEPS as f64;
    let mut bracket = None;
    let mut prev = horner(&c, 0.0);
    for t in 1..STEPS {
        let z = t as f64 * h;
        let v = horner(&c, z);
        if prev > 0.0 && v <= 0.0 {
            bracket = Some((z - h, z));
            break;
        }
        prev = v;
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NoRootInRange { upper })?;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if horner(&c, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..100 {
        let step = horner(&c, z) / horner_deriv(&c, z);
        let next = z - step;
        z = if next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if horner(&c, z) > 0.0 {
            lo = lo.max(z);
        } else {
            hi = hi.min(z);
        }
        if step.abs() < tol * 0.1 || hi - lo < tol {
            break;
        }
    }
    Ok(PfoldDerived {
        rho: z,
        delta: p.p1 * p.q2() * z,
    })
}

// Laws per model

fn joint_params<T: Scalar>(model: Model, delta: Option<T>) -> JointNb<T> {
    match model {
        Model::Dyck => JointNb::new(T::zero(), T::ratio(1, 2)),
        Model::Motzkin => JointNb::new(T::ratio(1, 3), T::ratio(1, 3)),
        Model::Pfold => {
            let d = delta.expect("Pfold law needs delta");
            let one = T::one();
            let b = d.clone() * (one.clone() - d.clone()) / (one + d.clone());
            JointNb::new(d, b)
        }
    }
}

fn law_of<T: Scalar>(model: Model, stat: Stat, delta: Option<T>, pfold_hel: Option<T>) -> Result<LimitDist<T>> {
    let joint = joint_params(model, delta);
    let unsupported = Err(Error::UnsupportedCombination { model, stat });
    let geometric = |p: T| Ok(LimitDist::NegBinomial(NegBinomial::new(1, 1, p)));
    match stat {
        Stat::Deg => Ok(LimitDist::NegBinomial(joint.deg_marginal())),
        Stat::Unp => Ok(LimitDist::NegBinomial(joint.unp_marginal())),
        Stat::Chn => Ok(LimitDist::NegBinomial(joint.chain())),
        Stat::Len => Ok(LimitDist::Linear(LinearJoint {
            joint,
            unp_weight: 1,
            deg_weight: 2,
        })),
        Stat::Joint => Ok(LimitDist::Joint(joint)),
        Stat::Hel => match model {
            Model::Dyck => geometric(T::ratio(3, 4)),
            Model::Motzkin => geometric(T::ratio(8, 9)),
            Model::Pfold => match pfold_hel {
                Some(p) => geometric(p),
                None => unsupported,
            },
        },
        Stat::Stm if model == Model::Motzkin => geometric(T::ratio(3, 4)),
        Stat::StemHelices if model == Model::Motzkin => geometric(T::ratio(27, 32)),
        _ => unsupported,
    }
}

/// The limit law of `stat` under `model` (Pfold uses the default parameters
/// when `p` is `None`).
pub fn limit_of(model: Model, stat: Stat, p: Option<&PfoldParams>) -> Result<LimitDist<f64>> {
    if model == Model::Pfold {
        let params = p.copied().unwrap_or_default();
        let derived = pfold_rho_delta(&params, 1e-13)?;
        law_of(
            model,
            stat,
            Some(derived.delta),
            Some(derived.helix_p(&params)),
        )
    } else {
        law_of(model, stat, None, None)
    }
}

/// The limit law with exact rational parameters (Dyck and Motzkin only).
pub fn exact_limit_of(model: Model, stat: Stat) -> Result<LimitDist<BigRational>> {
    if model == Model::Pfold {
        return Err(Error::UnsupportedCombination { model, stat });
    }
    law_of(model, stat, None, None)
}

// ETE moments

/// Sums of `E[ETE]` and `E[ETE^2]` over `UNP + DEG < k_terms`.
pub fn ete_partial_moments(joint: &JointNb<f64>, m: &EteModel, k_terms: u64) -> (f64, f64) {
    let mut ln_fact = vec![0.0f64; k_terms.max(1) as usize];
    for t in 1..ln_fact.len() {
        ln_fact[t] = ln_fact[t - 1] + (t as f64).ln();
    }
    let (ln_a, ln_b, ln_c) = (joint.a.ln(), joint.b.ln(), joint.c.ln());
    let (mut s1, mut s2) = (0.0, 0.0);
    for n in 1..k_terms {
        let nu = n as usize;
        let e_chain = (n - 1) as usize;
        for j in 1..=n {
            let i = n - j;
            if i > 0 && joint.a <= 0.0 {
                continue;
            }
            let iu = i as usize;
            let mut ln = ln_c + (n as f64).ln() + ln_fact[nu - 1] - ln_fact[iu] - ln_fact[nu - 1 - iu];
            if i > 0 {
                ln += i as f64 * ln_a;
            }
            if j > 1 {
                ln += (j - 1) as f64 * ln_b;
            }
            let p = ln.exp();
            let e = m.ete(j as usize, e_chain);
            s1 += p * e;
            s2 += p * e * e;
        }
    }
    (s1, s2)
}

/// `ln sum_(n >= k) n^pow x^n` for `pow <= 3`, from the shifted power sums.
fn ln_power_tail(x: f64, k: u64, pow: u32) -> f64 {
    let d = 1.0 - x;
    let s = [
        1.0 / d,
        x / d.powi(2),
        x * (1.0 + x) / d.powi(3),
        x * (1.0 + 4.0 * x + x * x) / d.powi(4),
    ];
    let binom = [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0],
        [1.0, 3.0, 3.0, 1.0],
    ];
    let kf = k as f64;
    let p = pow as usize;
    let body: f64 = (0..=p)
        .map(|q| binom[p][q] * kf.powi((p - q) as i32) * s[q])
        .sum();
    kf * x.ln() + body.ln()
}

/// Logs of certified bounds on the parts of `E[ETE]` and `E[ETE^2]` from
/// `UNP + DEG >= k`, using `ETE <= sqrt(b^2 + c^2) (UNP + DEG)` and the
/// diagonal law `c n s^(n-1)`.
pub fn ete_ln_tail_bounds(joint: &JointNb<f64>, m: &EteModel, k: u64) -> (f64, f64) {
    let s = joint.a + joint.b;
    let w2 = m.b_nm * m.b_nm + m.c_nm * m.c_nm;
    let ln_scale = joint.c.ln() - s.ln();
    (
        0.5 * w2.ln() + ln_scale + ln_power_tail(s, k, 2),
        w2.ln() + ln_scale + ln_power_tail(s, k, 3),
    )
}

/// Mean and variance of ETE under the limiting (UNP, DEG) law, truncated
/// where the certified tail falls below `tol`.
pub fn ete_limit_moments(
    model: Model,
    m: &EteModel,
    tol: f64,
    p: Option<&PfoldParams>,
) -> Result<MomentSummary> {
    m.validate()?;
    let LimitDist::Joint(joint) = limit_of(model, Stat::Joint, p)? else {
        unreachable!("joint law requested");
    };
    ete_moments_of_joint(&joint, m, tol)
}

/// Truncation cap on `UNP + DEG`.
pub const ETE_TERM_CAP: u64 = 1_000_000;

/// [`ete_limit_moments`] for an explicit joint law.
pub fn ete_moments_of_joint(joint: &JointNb<f64>, m: &EteModel, tol: f64) -> Result<MomentSummary> {
    // The variance also absorbs the error of the squared mean; the mean is
    // at most w E[i + j].
    let s = joint.a + joint.b;
    let w = (m.b_nm * m.b_nm + m.c_nm * m.c_nm).sqrt();
    let mean_cap = w * (1.0 + s) / (1.0 - s);
    let ln_err = |k: u64| {
        let (l1, l2) = ete_ln_tail_bounds(joint, m, k);
        let l_sq = (2.0 * mean_cap + 1.0).ln() + l1;
        let hi = l2.max(l_sq);
        let l_var = hi + ((l2 - hi).exp() + (l_sq - hi).exp()).ln();
        l1.max(l_var)
    };
    let ln_tol = tol.ln();
    let mut k = 8u64;
    while ln_err(k) >= ln_tol {
        if k >= ETE_TERM_CAP {
            return Err(Error::TolNotAchievable {
                tol,
                cap: ETE_TERM_CAP as usize,
            });
        }
        k = (k + k / 2).min(ETE_TERM_CAP);
    }
    let (m1, m2) = ete_partial_moments(joint, m, k);
    Ok(MomentSummary {
        mean: m1,
        variance: m2 - m1 * m1,
        certified_error: ln_err(k).exp(),
    })
}

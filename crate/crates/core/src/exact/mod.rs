//! Exact finite-size distributions under the three structure models.
//!
//! Uniform models (Dyck, Motzkin) are tabulated with arbitrary-precision
//! counts; the Pfold grammar with `f64` probabilities.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::ops::AddAssign;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod dyck;
pub mod enumerate;
pub mod helix;
pub mod motzkin;
pub mod pfold;
pub mod table;

/// Structure model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Dyck,
    Motzkin,
    Pfold,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Dyck => "dyck",
            Model::Motzkin => "motzkin",
            Model::Pfold => "pfold",
        })
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "dyck" => Ok(Model::Dyck),
            "motzkin" => Ok(Model::Motzkin),
            "pfold" => Ok(Model::Pfold),
            other => Err(format!("unknown model {other:?} (dyck, motzkin, pfold)")),
        }
    }
}

/// End-proximity statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stat {
    Deg,
    Unp,
    Chn,
    Len,
    Hel,
    Stm,
    StemHelices,
    /// The pair (DEG, UNP).
    Joint,
    Ete,
}

impl Stat {
    pub const ALL: [Stat; 9] = [
        Stat::Deg,
        Stat::Unp,
        Stat::Chn,
        Stat::Len,
        Stat::Hel,
        Stat::Stm,
        Stat::StemHelices,
        Stat::Joint,
        Stat::Ete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stat::Deg => "deg",
            Stat::Unp => "unp",
            Stat::Chn => "chn",
            Stat::Len => "len",
            Stat::Hel => "hel",
            Stat::Stm => "stm",
            Stat::StemHelices => "stem_helices",
            Stat::Joint => "joint",
            Stat::Ete => "ete",
        }
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let lower = s.to_ascii_lowercase().replace('-', "_");
        Stat::ALL
            .into_iter()
            .find(|st| st.name() == lower)
            .ok_or_else(|| format!("unknown statistic {s:?}"))
    }
}

/// Table weights: exact counts or grammar probabilities.
pub trait Weight: Clone + Zero + for<'a> AddAssign<&'a Self> + fmt::Display {
    /// `self / total` as a float.
    fn ratio(&self, total: &Self) -> f64;
}

impl Weight for BigUint {
    fn ratio(&self, total: &Self) -> f64 {
        big_ratio(self, total)
    }
}

impl Weight for f64 {
    fn ratio(&self, total: &Self) -> f64 {
        self / total
    }
}

/// `num / den` for integers far beyond the `f64` range.
pub fn big_ratio(num: &BigUint, den: &BigUint) -> f64 {
    let shift = den.bits().saturating_sub(960);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

/// Distribution of one or more statistics at a fixed size.
///
/// Keys follow the order of `stats`. Structures for which the statistic is
/// undefined (no base pair, for HEL/STM) are collected in a separate
/// "absent" bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable<W> {
    pub model: Model,
    pub size: usize,
    pub stats: Vec<Stat>,
    entries: BTreeMap<Vec<u32>, W>,
    absent: W,
}

impl<W: Weight> CountTable<W> {
    pub fn new(model: Model, size: usize, stats: Vec<Stat>) -> Self {
        CountTable {
            model,
            size,
            stats,
            entries: BTreeMap::new(),
            absent: W::zero(),
        }
    }

    /// Adds `w` at `key`; zero weights are not stored.
    pub fn add(&mut self, key: Vec<u32>, w: &W) {
        debug_assert_eq!(key.len(), self.stats.len());
        if w.is_zero() {
            return;
        }
        *self.entries.entry(key).or_insert_with(W::zero) += w;
    }

    pub fn add_absent(&mut self, w: &W) {
        self.absent += w;
    }

    pub fn get(&self, key: &[u32]) -> W {
        self.entries.get(key).cloned().unwrap_or_else(W::zero)
    }

    pub fn absent(&self) -> &W {
        &self.absent
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u32>, &W)> {
        self.entries.iter()
    }

    /// Number of stored (nonzero) cells, excluding the absent bucket.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.absent.is_zero()
    }

    pub fn total(&self) -> W {
        let mut t = self.absent.clone();
        for w in self.entries.values() {
            t += w;
        }
        t
    }

    /// Sums out every axis except `axis`.
    pub fn marginal(&self, axis: usize) -> CountTable<W> {
        let mut out = CountTable::new(self.model, self.size, vec![self.stats[axis]]);
        for (k, w) in &self.entries {
            out.add(vec![k[axis]], w);
        }
        out.absent = self.absent.clone();
        out
    }

    /// Regroups the cells under keys `f(key)` for the statistics `stats`.
    pub fn map_keys(&self, stats: Vec<Stat>, f: impl Fn(&[u32]) -> Vec<u32>) -> CountTable<W> {
        let mut out = CountTable::new(self.model, self.size, stats);
        for (k, w) in &self.entries {
            out.add(f(k), w);
        }
        out.absent = self.absent.clone();
        out
    }

    /// Normalized probabilities: present cells, then the absent mass.
    pub fn probabilities(&self) -> (Vec<(Vec<u32>, f64)>, f64) {
        let total = self.total();
        let cells = self
            .entries
            .iter()
            .map(|(k, w)| (k.clone(), w.ratio(&total)))
            .collect();
        (cells, self.absent.ratio(&total))
    }

    /// Probability vector of a univariate table indexed by value; the absent
    /// bucket is dropped.
    pub fn pmf_vec(&self) -> Vec<f64> {
        assert_eq!(self.stats.len(), 1, "pmf_vec needs a univariate table");
        let total = self.total();
        let top = self.entries.keys().map(|k| k[0]).max().unwrap_or(0) as usize;
        let mut out = vec![0.0; top + 1];
        for (k, w) in &self.entries {
            out[k[0] as usize] = w.ratio(&total);
        }
        out
    }

    /// Mean of a univariate table over the structures where it is defined.
    pub fn mean(&self) -> f64 {
        let (cells, absent) = self.probabilities();
        let mass = 1.0 - absent;
        cells.iter().map(|(k, p)| k[0] as f64 * p).sum::<f64>() / mass
    }

    /// CSV with header `model,n,stat_name,stat_values,weight`. Multi-axis
    /// names and values are joined with `;`; the absent bucket is `NA`.
    pub fn write_csv<Wr: Write>(&self, out: Wr) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["model", "n", "stat_name", "stat_values", "weight"])
            .map_err(io)?;
        let name = self
            .stats
            .iter()
            .map(|s| s.name())
            .collect::<Vec<_>>()
            .join(";");
        let model = self.model.to_string();
        let size = self.size.to_string();
        if !self.absent.is_zero() {
            w.write_record([&model, &size, &name, "NA", &self.absent.to_string()])
                .map_err(io)?;
        }
        for (k, v) in &self.entries {
            let vals = k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
            w.write_record([&model, &size, &name, &vals, &v.to_string()])
                .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A table with exact or real weights.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyTable {
    Exact(CountTable<BigUint>),
    Real(CountTable<f64>),
}

impl AnyTable {
    pub fn probabilities(&self) -> (Vec<(Vec<u32>, f64)>, f64) {
        match self {
            AnyTable::Exact(t) => t.probabilities(),
            AnyTable::Real(t) => t.probabilities(),
        }
    }

    pub fn pmf_vec(&self) -> Vec<f64> {
        match self {
            AnyTable::Exact(t) => t.pmf_vec(),
            AnyTable::Real(t) => t.pmf_vec(),
        }
    }

    pub fn write_csv<Wr: Write>(&self, out: Wr) -> Result<()> {
        match self {
            AnyTable::Exact(t) => t.write_csv(out),
            AnyTable::Real(t) => t.write_csv(out),
        }
    }

    pub fn stats(&self) -> &[Stat] {
        match self {
            AnyTable::Exact(t) => &t.stats,
            AnyTable::Real(t) => &t.stats,
        }
    }

    /// `{model, n, stats, absent, cells: [{values, weight, probability}]}`;
    /// exact weights are written as decimal strings.
    pub fn to_json(&self) -> serde_json::Value {
        fn build<W: Weight>(t: &CountTable<W>, weight: impl Fn(&W) -> serde_json::Value) -> serde_json::Value {
            let total = t.total();
            let cells: Vec<_> = t
                .iter()
                .map(|(k, w)| {
                    serde_json::json!({
                        "values": k,
                        "weight": weight(w),
                        "probability": w.ratio(&total),
                    })
                })
                .collect();
            serde_json::json!({
                "model": t.model,
                "n": t.size,
                "stats": t.stats,
                "absent": weight(t.absent()),
                "cells": cells,
            })
        }
        match self {
            AnyTable::Exact(t) => build(t, |w| serde_json::Value::String(w.to_string())),
            AnyTable::Real(t) => build(t, |w| serde_json::json!(w)),
        }
    }
}

/// Length-truncated convolution `(a * b)[0..len]`.
pub(crate) fn convolve_big(a: &[BigUint], b: &[BigUint], len: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

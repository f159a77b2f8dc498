//! Dataset pipeline: per-structure statistics, group summaries, DEG/UNP
//! heatmaps and comparisons against limit laws.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::pfold::PfoldParams;
use crate::exact::{Model, Stat};
use crate::limits::{limit_of, LimitDist};
use crate::stats::{exterior_stats, shortest_path_stats, EteModel};
use crate::structure::{parse_bpseq, parse_dot_bracket, read_dot_bracket_records};

/// Quantile of the limit law up to which histograms are compared bin by bin.
pub const COMPARE_QUANTILE: f64 = 1.0 - 1e-6;

/// One input file.
#[derive(Debug, Clone)]
pub struct StructureInput {
    /// File name; its stem is the default group label.
    pub name: String,
    pub text: String,
}

impl StructureInput {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        StructureInput {
            name: name.into(),
            text: text.into(),
        }
    }

    fn default_group(&self) -> String {
        Path::new(&self.name)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or(&self.name)
            .to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub id: String,
    pub length: usize,
    pub deg: usize,
    pub unp: usize,
    pub chn: usize,
    pub len_ext: usize,
    pub ete_nm: f64,
    pub rms_nm: f64,
    pub hel: Option<usize>,
    pub stm: Option<usize>,
    pub stem_helices: Option<usize>,
    pub pseudoknotted: bool,
    pub group: String,
}

impl StatsRow {
    /// Value of a univariate statistic, `None` where it is undefined.
    pub fn value(&self, stat: Stat) -> Option<f64> {
        let v = match stat {
            Stat::Deg => self.deg,
            Stat::Unp => self.unp,
            Stat::Chn => self.chn,
            Stat::Len => self.len_ext,
            Stat::Hel => self.hel?,
            Stat::Stm => self.stm?,
            Stat::StemHelices => self.stem_helices?,
            Stat::Ete => return Some(self.ete_nm),
            Stat::Joint => return None,
        };
        Some(v as f64)
    }

    /// Histogram key of `stat`; `[deg, unp]` for the joint statistic.
    pub fn key(&self, stat: Stat) -> Option<Vec<u32>> {
        match stat {
            Stat::Joint => Some(vec![self.deg as u32, self.unp as u32]),
            Stat::Ete => None,
            _ => self.value(stat).map(|v| vec![v as u32]),
        }
    }
}

/// Mean and population variance of one statistic within a group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub statistic: String,
    /// Structures on which the statistic is defined.
    pub count: usize,
    pub mean: Option<f64>,
    pub variance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryBlock {
    pub group: String,
    pub n_structures: usize,
    pub stats: Vec<StatSummary>,
}

/// A record that could not be processed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordError {
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub rows: Vec<StatsRow>,
    pub summaries: Vec<SummaryBlock>,
    pub errors: Vec<RecordError>,
}

struct Record {
    id: String,
    group: String,
    parsed: Result<crate::structure::SecondaryStructure>,
}

fn looks_like_bpseq(text: &str) -> bool {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'));
    match first {
        Some(line) => {
            let fields: Vec<&str> = line.split_whitespace().collect();
            fields.len() == 3 && fields[0].parse::<usize>().is_ok() && fields[2].parse::<usize>().is_ok()
        }
        None => false,
    }
}

fn records_of(input: &StructureInput) -> Vec<Record> {
    let default_group = input.default_group();
    if looks_like_bpseq(&input.text) {
        return vec![Record {
            id: default_group.clone(),
            group: default_group,
            parsed: parse_bpseq(&input.text),
        }];
    }
    read_dot_bracket_records(&input.text)
        .into_iter()
        .map(|r| Record {
            id: r.id,
            group: r.group.unwrap_or_else(|| default_group.clone()),
            parsed: parse_dot_bracket(&r.structure),
        })
        .collect()
}

fn row_of(record: &Record, m: &EteModel) -> Result<StatsRow> {
    let s = record.parsed.as_ref().map_err(Clone::clone)?;
    let pseudoknotted = s.is_crossing();
    let st = if pseudoknotted {
        shortest_path_stats(s, m)?
    } else {
        exterior_stats(s, m)?
    };
    Ok(StatsRow {
        id: record.id.clone(),
        length: s.len(),
        deg: st.deg,
        unp: st.unp,
        chn: st.chn,
        len_ext: st.len_ext,
        ete_nm: st.ete_nm,
        rms_nm: st.rms_nm,
        hel: st.hel,
        stm: st.stm,
        stem_helices: st.stem_helices,
        pseudoknotted,
        group: record.group.clone(),
    })
}

/// Statistics for every record of `inputs`, in input order, with one
/// summary per group (groups in order of first appearance).
///
/// Dot-bracket files may hold many records (`>id group=NAME` headers); a
/// bpseq file is one record. Records that fail to parse are reported in
/// `errors` and skipped. `jobs` bounds the worker threads.
pub fn run_stats(inputs: &[StructureInput], m: &EteModel, jobs: Option<usize>) -> Result<StatsReport> {
    m.validate()?;
    let records: Vec<Record> = inputs.iter().flat_map(records_of).collect();
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    let compute = || records.par_iter().map(|r| row_of(r, m)).collect::<Vec<_>>();
    let results = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::Io(e.to_string()))?
            .install(compute),
        None => compute(),
    };
    let mut rows = Vec::with_capacity(records.len());
    let mut errors = Vec::new();
    for (record, res) in records.iter().zip(results) {
        match res {
            Ok(row) => rows.push(row),
            Err(e) => errors.push(RecordError {
                id: record.id.clone(),
                message: e.to_string(),
            }),
        }
    }
    if rows.is_empty() {
        return Err(Error::AllRecordsFailed(errors.len()));
    }
    let summaries = summarize(&rows);
    Ok(StatsReport {
        rows,
        summaries,
        errors,
    })
}

type Getter = fn(&StatsRow) -> Option<f64>;

const SUMMARY_STATS: [(&str, Getter); 9] = [
    ("deg", |r| Some(r.deg as f64)),
    ("unp", |r| Some(r.unp as f64)),
    ("chn", |r| Some(r.chn as f64)),
    ("len_ext", |r| Some(r.len_ext as f64)),
    ("ete_nm", |r| Some(r.ete_nm)),
    ("rms_nm", |r| Some(r.rms_nm)),
    ("hel", |r| r.hel.map(|v| v as f64)),
    ("stm", |r| r.stm.map(|v| v as f64)),
    ("stem_helices", |r| r.stem_helices.map(|v| v as f64)),
];

/// Mean and population variance; `None` for an empty sample.
pub fn mean_variance(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var))
}

/// Per-group summaries of `rows`.
pub fn summarize(rows: &[StatsRow]) -> Vec<SummaryBlock> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&StatsRow>> = BTreeMap::new();
    for r in rows {
        let entry = groups.entry(&r.group).or_default();
        if entry.is_empty() {
            order.push(&r.group);
        }
        entry.push(r);
    }
    order
        .into_iter()
        .map(|g| {
            let members = &groups[g];
            let stats = SUMMARY_STATS
                .iter()
                .map(|(name, get)| {
                    let values: Vec<f64> = members.iter().filter_map(|r| get(r)).collect();
                    let mv = mean_variance(&values);
                    StatSummary {
                        statistic: name.to_string(),
                        count: values.len(),
                        mean: mv.map(|x| x.0),
                        variance: mv.map(|x| x.1),
                    }
                })
                .collect();
            SummaryBlock {
                group: g.to_string(),
                n_structures: members.len(),
                stats,
            }
        })
        .collect()
}

/// ETE bands in nm; the last band is closed on the right.
pub const ETE_BANDS: [(f64, f64); 6] = [
    (1.5, 2.5),
    (2.5, 3.5),
    (3.5, 4.5),
    (4.5, 5.5),
    (5.5, 6.5),
    (6.5, 7.5),
];

/// Band label such as `"2.5-3.5"`, or `"other"` outside all bands.
pub fn ete_band(ete_nm: f64) -> String {
    let last = ETE_BANDS.len() - 1;
    for (i, &(lo, hi)) in ETE_BANDS.iter().enumerate() {
        if ete_nm >= lo && (ete_nm < hi || (i == last && ete_nm <= hi)) {
            return format!("{lo}-{hi}");
        }
    }
    "other".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatCell {
    pub deg: usize,
    pub unp: usize,
    pub count: usize,
    pub percent: f64,
    pub ete_nm: f64,
    pub band: String,
}

/// Percentage of structures in each occupied (DEG, UNP) cell, sorted by
/// `(deg, unp)`, with the ETE of the cell and its band.
pub fn heatmap(rows: &[StatsRow], m: &EteModel) -> Vec<HeatCell> {
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for r in rows {
        *counts.entry((r.deg, r.unp)).or_insert(0) += 1;
    }
    let total = rows.len() as f64;
    counts
        .into_iter()
        .map(|((deg, unp), count)| {
            let ete = m.ete(deg, (deg + unp).saturating_sub(1));
            HeatCell {
                deg,
                unp,
                count,
                percent: 100.0 * count as f64 / total,
                ete_nm: ete,
                band: ete_band(ete),
            }
        })
        .collect()
}

/// Keys of the compared domain: values `0..=cap`, or `deg + unp <= cap`.
fn in_domain(key: &[u32], cap: u64) -> bool {
    key.iter().map(|&v| v as u64).sum::<u64>() <= cap
}

fn domain_keys(d: &LimitDist<f64>, cap: u64) -> Vec<Vec<u32>> {
    let cap = cap as u32;
    if d.is_joint() {
        (0..=cap)
            .flat_map(|deg| (0..=cap - deg).map(move |unp| vec![deg, unp]))
            .collect()
    } else {
        (0..=cap).map(|k| vec![k]).collect()
    }
}

/// Total variation between the normalized histogram `h` and `d`, computed
/// bin by bin up to `cap` (for a joint law, over `deg + unp <= cap`) with
/// the mass beyond `cap` on either side counted in full.
pub fn total_variation(h: &BTreeMap<Vec<u32>, f64>, d: &LimitDist<f64>, cap: u64) -> Result<f64> {
    let total: f64 = h.values().sum();
    if h.is_empty() || total <= 0.0 || h.values().any(|&w| w < 0.0) {
        return Err(Error::EmptyHistogram);
    }
    let mut acc = 0.0;
    let mut law_mass = 0.0;
    for key in domain_keys(d, cap) {
        let p = d.prob(&key);
        let e = h.get(&key).copied().unwrap_or(0.0) / total;
        acc += (e - p).abs();
        law_mass += p;
    }
    let outside: f64 = h
        .iter()
        .filter(|(k, _)| !in_domain(k, cap))
        .map(|(_, w)| w / total)
        .sum();
    acc += outside + (1.0 - law_mass).max(0.0);
    Ok((0.5 * acc).clamp(0.0, 1.0))
}

/// Quantile cap used by [`compare`].
pub fn compare_cap(d: &LimitDist<f64>) -> u64 {
    match d {
        // deg + unp = chn + 1
        LimitDist::Joint(j) => {
            LimitDist::NegBinomial(j.chain()).quantile(COMPARE_QUANTILE, 1 << 20) + 1
        }
        _ => d.quantile(COMPARE_QUANTILE, 1 << 20),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareBin {
    /// The value, or `deg;unp` for the joint statistic.
    pub value: String,
    pub empirical: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub model: Model,
    pub stat: Stat,
    /// Structures on which the statistic is defined.
    pub n_structures: usize,
    pub empirical_mean: Option<f64>,
    pub empirical_variance: Option<f64>,
    pub limit_mean: Option<f64>,
    pub limit_variance: Option<f64>,
    pub total_variation: f64,
    pub cap: u64,
    pub bins: Vec<CompareBin>,
}

/// Empirical distribution of `stat` in `rows` against its limit law.
pub fn compare(rows: &[StatsRow], model: Model, stat: Stat, p: Option<&PfoldParams>) -> Result<CompareReport> {
    if stat == Stat::Ete {
        return Err(Error::UnsupportedCombination { model, stat });
    }
    let law = limit_of(model, stat, p)?;
    let mut hist: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for key in rows.iter().filter_map(|r| r.key(stat)) {
        *hist.entry(key).or_insert(0.0) += 1.0;
    }
    let cap = compare_cap(&law);
    let tv = total_variation(&hist, &law, cap)?;
    let n: f64 = hist.values().sum();
    let values: Vec<f64> = rows.iter().filter_map(|r| r.value(stat)).collect();
    let mv = mean_variance(&values);
    let mut keys = domain_keys(&law, cap);
    keys.extend(hist.keys().filter(|k| !in_domain(k, cap)).cloned());
    let bins = keys
        .into_iter()
        .map(|k| CompareBin {
            value: k.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"),
            empirical: hist.get(&k).copied().unwrap_or(0.0) / n,
            limit: law.prob(&k),
        })
        .collect();
    let summary = law.summary();
    Ok(CompareReport {
        model,
        stat,
        n_structures: n as usize,
        empirical_mean: mv.map(|x| x.0),
        empirical_variance: mv.map(|x| x.1),
        limit_mean: summary.map(|s| s.mean),
        limit_variance: summary.map(|s| s.variance),
        total_variation: tv,
        cap,
        bins,
    })
}

/// RFC 4180 CSV with a header row.
pub fn write_csv<T: Serialize, W: Write>(items: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for item in items {
        w.serialize(item).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// Long-form summary row used for CSV output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow<'a> {
    pub group: &'a str,
    pub n_structures: usize,
    pub statistic: &'a str,
    pub count: usize,
    pub mean: Option<f64>,
    pub variance: Option<f64>,
}

pub fn summary_rows(blocks: &[SummaryBlock]) -> Vec<SummaryRow<'_>> {
    blocks
        .iter()
        .flat_map(|b| {
            b.stats.iter().map(move |s| SummaryRow {
                group: &b.group,
                n_structures: b.n_structures,
                statistic: &s.statistic,
                count: s.count,
                mean: s.mean,
                variance: s.variance,
            })
        })
        .collect()
}

//! End-proximity statistics of a single structure.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::SecondaryStructure;

/// Step lengths of the two-scale freely jointed chain used for the
/// end-to-end distance estimate, plus the single-scale RMS step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EteModel {
    /// Hydrogen-bridge step in nm.
    pub b_nm: f64,
    /// Covalent (backbone) step in nm.
    pub c_nm: f64,
    /// Scaling exponent applied to both step counts.
    pub exponent: f64,
    /// Average step for the RMS estimate `a * sqrt(LEN - 1)`.
    pub a_nm: f64,
}

impl Default for EteModel {
    fn default() -> Self {
        EteModel {
            b_nm: 1.5,
            c_nm: 0.62,
            exponent: 1.2,
            a_nm: 0.75,
        }
    }
}

impl EteModel {
    pub fn new(b_nm: f64, c_nm: f64, exponent: f64, a_nm: f64) -> Result<Self> {
        let m = EteModel {
            b_nm,
            c_nm,
            exponent,
            a_nm,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("b", self.b_nm), ("c", self.c_nm), ("a", self.a_nm)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidEteModel(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.exponent > 1.0 && self.exponent < 2.0) {
            return Err(Error::InvalidEteModel(format!(
                "exponent must lie in (1, 2), got {}",
                self.exponent
            )));
        }
        Ok(())
    }

    /// `sqrt(b^2 deg^e + c^2 chn^e)`.
    pub fn ete(&self, deg: usize, chn: usize) -> f64 {
        let e = self.exponent;
        let d = (deg as f64).powf(e);
        let c = (chn as f64).powf(e);
        (self.b_nm * self.b_nm * d + self.c_nm * self.c_nm * c).sqrt()
    }

    /// `a * sqrt(len - 1)`, zero for `len <= 1`.
    pub fn rms(&self, len: usize) -> f64 {
        self.a_nm * (len.saturating_sub(1) as f64).sqrt()
    }
}

pub fn ete_distance(deg: usize, chn: usize, m: &EteModel) -> f64 {
    m.ete(deg, chn)
}

pub fn rms_distance(len: usize, m: &EteModel) -> f64 {
    m.rms(len)
}

/// The end-proximity measurements of one structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorStats {
    pub deg: usize,
    pub unp: usize,
    pub chn: usize,
    pub len_ext: usize,
    pub ete_nm: f64,
    pub rms_nm: f64,
    pub hel: Option<usize>,
    pub stm: Option<usize>,
    pub stem_helices: Option<usize>,
}

/// Exterior-loop statistics of a nested structure.
pub fn exterior_stats(s: &SecondaryStructure, m: &EteModel) -> Result<ExteriorStats> {
    if s.is_crossing() {
        return Err(Error::CrossingStructure);
    }
    let (mut deg, mut unp) = (0usize, 0usize);
    let mut i = 0;
    while i < s.len() {
        match s.partner(i) {
            Some(j) => {
                deg += 1;
                i = j + 1;
            }
            None => {
                unp += 1;
                i += 1;
            }
        }
    }
    let chn = (deg + unp).saturating_sub(1);
    let len_ext = 2 * deg + unp;
    let stem = first_stem(s);
    Ok(ExteriorStats {
        deg,
        unp,
        chn,
        len_ext,
        ete_nm: m.ete(deg, chn),
        rms_nm: m.rms(len_ext),
        hel: first_helix_length(s),
        stm: stem.map(|st| st.stm),
        stem_helices: stem.map(|st| st.helices),
    })
}

fn first_pair(s: &SecondaryStructure) -> Option<(usize, usize)> {
    s.pairs().next()
}

/// Length of the run of directly stacked pairs `(i+t, j-t)` starting at the
/// pair with the smallest 5' position.
pub fn first_helix_length(s: &SecondaryStructure) -> Option<usize> {
    let (i, j) = first_pair(s)?;
    let mut h = 1;
    while i + h < j - h && s.partner(i + h) == Some(j - h) {
        h += 1;
    }
    Some(h)
}

/// Size of the first stem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FirstStem {
    /// Base pairs in the stem.
    pub stm: usize,
    /// Maximal helices the stem is made of.
    pub helices: usize,
}

/// Follows the first pair inward while each pair encloses exactly one child
/// pair. Bulges and interior loops do not end the stem; a hairpin or a
/// multiloop does. Absent for unpaired or crossing structures.
pub fn first_stem(s: &SecondaryStructure) -> Option<FirstStem> {
    if s.is_crossing() {
        return None;
    }
    let (mut i, mut j) = first_pair(s)?;
    let mut stem = FirstStem { stm: 1, helices: 1 };
    loop {
        let mut child = None;
        let mut children = 0;
        let mut k = i + 1;
        while k < j {
            match s.partner(k) {
                Some(l) => {
                    children += 1;
                    child = Some((k, l));
                    k = l + 1;
                }
                None => k += 1,
            }
        }
        match (children, child) {
            (1, Some((k, l))) => {
                stem.stm += 1;
                if k != i + 1 || l + 1 != j {
                    stem.helices += 1;
                }
                (i, j) = (k, l);
            }
            _ => return Some(stem),
        }
    }
}

fn bfs(s: &SecondaryStructure, src: usize) -> Vec<usize> {
    let n = s.len();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::from([src]);
    dist[src] = 0;
    while let Some(u) = queue.pop_front() {
        for v in neighbours(s, u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

fn neighbours(s: &SecondaryStructure, u: usize) -> impl Iterator<Item = usize> {
    let n = s.len();
    let back = u.checked_sub(1);
    let fwd = (u + 1 < n).then_some(u + 1);
    let pair = s.partner(u);
    [back, fwd, pair].into_iter().flatten()
}

// An edge between paired positions is a hydrogen bridge even when the two
// positions are also adjacent on the backbone.
fn is_pair_edge(s: &SecondaryStructure, u: usize, v: usize) -> bool {
    s.partner(u) == Some(v)
}

/// Statistics along a shortest 5'-to-3' path through the backbone and pair
/// graph. Works for pseudoknotted structures.
///
/// Among minimum-edge paths the one with the smallest ETE is taken, then the
/// lexicographically smallest node sequence. `deg` counts pair edges on the
/// path, `chn` backbone edges, `unp` unpaired nodes on the path and `len_ext`
/// all nodes on the path. The first stem is not reported for crossing
/// structures.
pub fn shortest_path_stats(s: &SecondaryStructure, m: &EteModel) -> Result<ExteriorStats> {
    let path = shortest_path(s, m)?;
    let mut deg = 0;
    for w in path.windows(2) {
        if is_pair_edge(s, w[0], w[1]) {
            deg += 1;
        }
    }
    let chn = path.len() - 1 - deg;
    let unp = path.iter().filter(|&&v| s.partner(v).is_none()).count();
    let len_ext = path.len();
    let stem = if s.is_crossing() { None } else { first_stem(s) };
    Ok(ExteriorStats {
        deg,
        unp,
        chn,
        len_ext,
        ete_nm: m.ete(deg, chn),
        rms_nm: m.rms(len_ext),
        hel: first_helix_length(s),
        stm: stem.map(|st| st.stm),
        stem_helices: stem.map(|st| st.helices),
    })
}

/// The node sequence selected by [`shortest_path_stats`].
pub fn shortest_path(s: &SecondaryStructure, m: &EteModel) -> Result<Vec<usize>> {
    let n = s.len();
    if n == 0 {
        return Err(Error::EmptyStructure);
    }
    let from_start = bfs(s, 0);
    let to_end = bfs(s, n - 1);
    let total = from_start[n - 1];
    let on_path = |v: usize| from_start[v] + to_end[v] == total;
    let dag_next = |u: usize| {
        let next: Vec<usize> = neighbours(s, u)
            .filter(|&v| on_path(v) && from_start[v] == from_start[u] + 1)
            .collect();
        next
    };

    // reach[v][d]: a DAG path from v to the end uses exactly d pair edges.
    let mut order: Vec<usize> = (0..n).filter(|&v| on_path(v)).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(from_start[v]));
    let mut reach: Vec<Vec<bool>> = vec![Vec::new(); n];
    for &u in &order {
        let mut r = vec![false; total + 1];
        if u == n - 1 {
            r[0] = true;
        }
        for v in dag_next(u) {
            let w = usize::from(is_pair_edge(s, u, v));
            for d in 0..total {
                if reach[v].get(d).copied().unwrap_or(false) && d + w <= total {
                    r[d + w] = true;
                }
            }
        }
        reach[u] = r;
    }

    let best = (0..=total)
        .filter(|&d| reach[0][d])
        .map(|d| m.ete(d, total - d))
        .fold(f64::INFINITY, f64::min);
    let target: Vec<bool> = (0..=total)
        .map(|d| reach[0][d] && m.ete(d, total - d) == best)
        .collect();

    let mut path = vec![0];
    let mut used = 0;
    let mut u = 0;
    while u != n - 1 {
        let mut next = dag_next(u);
        next.sort_unstable();
        let (v, w) = next
            .into_iter()
            .map(|v| (v, usize::from(is_pair_edge(s, u, v))))
            .find(|&(v, w)| {
                reach[v]
                    .iter()
                    .enumerate()
                    .any(|(d, &ok)| ok && used + w + d <= total && target[used + w + d])
            })
            .expect("shortest-path DAG always has a completion");
        used += w;
        path.push(v);
        u = v;
    }
    Ok(path)
}

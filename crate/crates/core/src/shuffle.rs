//! Shuffles that preserve k-let counts.
//!
//! For `k >= 2` the sequence is an Euler path in the multigraph whose
//! vertices are (k-1)-mers and whose edges are k-let occurrences. A uniform
//! spanning arborescence toward the final vertex fixes the last exit of every
//! other vertex; the remaining exits are permuted freely.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::sample::RngHandle;

/// A uniformly random sequence with the same k-let multiset as `s`, and the
/// same first and last (k-1)-mers. `k = 0` behaves like `k = 1`.
pub fn klet_shuffle(s: &str, k: usize, rng: &mut RngHandle) -> Result<String> {
    let chars: Vec<char> = s.chars().collect();
    if k > chars.len() {
        return Err(Error::KTooLarge {
            k,
            len: chars.len(),
        });
    }
    if k <= 1 {
        let mut out = chars;
        out.shuffle(rng);
        return Ok(out.into_iter().collect());
    }
    Ok(euler_shuffle(&chars, k, rng).into_iter().collect())
}

fn euler_shuffle(chars: &[char], k: usize, rng: &mut impl Rng) -> Vec<char> {
    // Vertices numbered in order of first appearance.
    let mut index: HashMap<&[char], usize> = HashMap::new();
    let mut vertex_of = Vec::with_capacity(chars.len() - k + 2);
    for w in chars.windows(k - 1) {
        let next = index.len();
        vertex_of.push(*index.entry(w).or_insert(next));
    }
    let nv = index.len();
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for t in 0..vertex_of.len() - 1 {
        out_edges[vertex_of[t]].push(vertex_of[t + 1]);
    }
    let start = vertex_of[0];
    let root = *vertex_of.last().unwrap();

    // Wilson's algorithm: loop-erased random walks toward the root. The
    // chosen exit is stored as an index into out_edges.
    let mut in_tree = vec![false; nv];
    in_tree[root] = true;
    let mut next_edge = vec![usize::MAX; nv];
    for u in 0..nv {
        let mut v = u;
        while !in_tree[v] {
            next_edge[v] = rng.gen_range(0..out_edges[v].len());
            v = out_edges[v][next_edge[v]];
        }
        let mut v = u;
        while !in_tree[v] {
            in_tree[v] = true;
            v = out_edges[v][next_edge[v]];
        }
    }

    // Permute the other exits; the tree exit goes last.
    for v in 0..nv {
        let edges = &mut out_edges[v];
        if v != root {
            let last = edges.len() - 1;
            edges.swap(next_edge[v], last);
            edges[..last].shuffle(rng);
        } else {
            edges.shuffle(rng);
        }
        edges.reverse();
    }

    // Label of vertex v: its first occurrence; emit the last letter per step.
    let mut label_end = vec![0usize; nv];
    for (t, &v) in vertex_of.iter().enumerate().rev() {
        label_end[v] = t + k - 2;
    }
    let mut out: Vec<char> = chars[..k - 1].to_vec();
    let mut v = start;
    while let Some(w) = out_edges[v].pop() {
        out.push(chars[label_end[w]]);
        v = w;
    }
    debug_assert_eq!(out.len(), chars.len());
    out
}

/// Whether `a` and `b` have equal k-let multisets.
pub fn validate_klets(a: &str, b: &str, k: usize) -> bool {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if k == 0 {
        return a.len() == b.len();
    }
    fn count(s: &[char], k: usize) -> HashMap<&[char], usize> {
        let mut m = HashMap::new();
        if s.len() >= k {
            for w in s.windows(k) {
                *m.entry(w).or_insert(0) += 1;
            }
        }
        m
    }
    count(&a, k) == count(&b, k)
}

//! Exhaustive enumeration of small Dyck and Motzkin structures.

use super::Model;
use crate::error::{Error, Result};
use crate::structure::{parse_dot_bracket, SecondaryStructure};

/// Largest size accepted by [`enumerate_all`].
pub const ENUMERATION_LIMIT: usize = 16;

/// Every structure of size `n` exactly once, in lexicographic order of the
/// dot-bracket string (`(` < `)` < `.`). Dyck size is the semilength.
pub fn enumerate_all(model: Model, n: usize) -> Result<Structures> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::SizeTooLarge {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    match model {
        Model::Dyck => Ok(Structures::new(2 * n, false)),
        Model::Motzkin => Ok(all_nested(n)),
        Model::Pfold => Err(Error::UnsupportedCombination {
            model,
            stat: crate::exact::Stat::Joint,
        }),
    }
}

/// All nested structures of length `n`, without the size guard.
pub(crate) fn all_nested(n: usize) -> Structures {
    Structures::new(n, true)
}

/// Lazy depth-first walk over bracket strings.
#[derive(Debug, Clone)]
pub struct Structures {
    len: usize,
    dots: bool,
    buf: Vec<u8>,
    depth: usize,
    started: bool,
    done: bool,
}

const ORDER: [u8; 3] = *b"().";

impl Structures {
    fn new(len: usize, dots: bool) -> Self {
        Structures {
            len,
            dots,
            buf: Vec::with_capacity(len),
            depth: 0,
            started: false,
            done: false,
        }
    }

    /// Depth after placing `c`, if the string can still be completed.
    fn step(&self, c: u8) -> Option<usize> {
        let remaining = self.len - self.buf.len() - 1;
        let d = match c {
            b'(' => self.depth + 1,
            b')' => self.depth.checked_sub(1)?,
            _ if self.dots => self.depth,
            _ => return None,
        };
        (d <= remaining).then_some(d)
    }

    fn push_from(&mut self, start: usize) -> bool {
        for &c in &ORDER[start..] {
            if let Some(d) = self.step(c) {
                self.buf.push(c);
                self.depth = d;
                return true;
            }
        }
        false
    }

    fn fill(&mut self) {
        while self.buf.len() < self.len {
            let ok = self.push_from(0);
            debug_assert!(ok, "prefix is always completable");
        }
    }

    fn pop(&mut self) -> Option<u8> {
        let c = self.buf.pop()?;
        self.depth = match c {
            b'(' => self.depth - 1,
            b')' => self.depth + 1,
            _ => self.depth,
        };
        Some(c)
    }

    fn advance(&mut self) -> bool {
        while let Some(c) = self.pop() {
            let idx = ORDER.iter().position(|&x| x == c).unwrap();
            if self.push_from(idx + 1) {
                self.fill();
                return true;
            }
        }
        false
    }
}

impl Iterator for Structures {
    type Item = SecondaryStructure;

    fn next(&mut self) -> Option<SecondaryStructure> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.fill();
        } else if !self.advance() {
            self.done = true;
            return None;
        }
        let text = std::str::from_utf8(&self.buf).expect("ascii");
        Some(parse_dot_bracket(text).expect("generated strings are balanced"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::dyck::catalan_numbers;
    use crate::exact::motzkin::motzkin_numbers;
    use std::collections::BTreeSet;

    #[test]
    fn counts() {
        assert_eq!(enumerate_all(Model::Motzkin, 3).unwrap().count(), 4);
        assert_eq!(enumerate_all(Model::Dyck, 3).unwrap().count(), 5);
        let empty: Vec<_> = enumerate_all(Model::Motzkin, 0).unwrap().collect();
        assert_eq!(empty.len(), 1);
        assert!(empty[0].is_empty());
        let cat = catalan_numbers(9);
        let mot = motzkin_numbers(12);
        for n in 0..=9 {
            let c = enumerate_all(Model::Dyck, n).unwrap().count();
            assert_eq!(num_bigint::BigUint::from(c), cat[n]);
        }
        for n in 0..=12 {
            let c = enumerate_all(Model::Motzkin, n).unwrap().count();
            assert_eq!(num_bigint::BigUint::from(c), mot[n]);
        }
    }

    #[test]
    fn distinct_and_sorted() {
        let all: Vec<String> = enumerate_all(Model::Motzkin, 8)
            .unwrap()
            .map(|s| s.to_dot_bracket().unwrap())
            .collect();
        let set: BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
        let firsts: Vec<String> = enumerate_all(Model::Motzkin, 3)
            .unwrap()
            .map(|s| s.to_dot_bracket().unwrap())
            .collect();
        assert_eq!(firsts, vec!["().", "(.)", ".()", "..."]);
    }

    #[test]
    fn size_guard() {
        assert_eq!(
            enumerate_all(Model::Motzkin, 17).unwrap_err(),
            Error::SizeTooLarge { n: 17, limit: 16 }
        );
        assert!(enumerate_all(Model::Dyck, 16).is_ok());
    }
}

//! Exact samplers for the three models.
//!
//! Streams are driven by ChaCha8 seeded from a `u64`, so a seed reproduces
//! the same structures on every platform.

use num_bigint::{BigUint, RandBigInt};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::dyck::catalan_numbers;
use crate::exact::pfold::{PfoldInside, PfoldParams};
use crate::structure::{parse_dot_bracket, SecondaryStructure};

/// Seeded random stream.
#[derive(Debug, Clone)]
pub struct RngHandle {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        RngHandle {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent stream derived from this seed (ChaCha stream id).
    pub fn substream(&self, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        RngHandle {
            seed: self.seed,
            rng,
        }
    }
}

impl RngCore for RngHandle {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

fn from_brackets(buf: &[u8]) -> SecondaryStructure {
    parse_dot_bracket(std::str::from_utf8(buf).expect("ascii")).expect("balanced by construction")
}

/// Uniform Dyck path of semilength `n` as a bracket string.
///
/// Shuffles `n` up and `n + 1` down steps and rotates to start just after
/// the first minimum of the prefix sums (cycle lemma); the final down step is
/// dropped.
fn dyck_brackets(n: usize, rng: &mut impl Rng) -> Vec<u8> {
    let mut steps: Vec<u8> = std::iter::repeat(b'(')
        .take(n)
        .chain(std::iter::repeat(b')').take(n + 1))
        .collect();
    steps.shuffle(rng);
    let (mut height, mut low, mut at) = (0i64, 0i64, 0usize);
    for (i, &c) in steps.iter().enumerate() {
        height += if c == b'(' { 1 } else { -1 };
        if height < low {
            low = height;
            at = i + 1;
        }
    }
    let len = steps.len();
    steps.rotate_left(at % len);
    steps.pop();
    steps
}

/// Uniform Dyck path of semilength `n` (all `2n` positions paired).
pub fn sample_dyck(n: usize, rng: &mut RngHandle) -> SecondaryStructure {
    from_brackets(&dyck_brackets(n, rng))
}

/// Uniform Motzkin path of length `n`.
///
/// The number of pairs `k` is drawn with weight `C(n, 2k) Cat(k)`, then the
/// paired positions uniformly, then a uniform Dyck path on them.
pub fn sample_motzkin(n: usize, rng: &mut RngHandle) -> SecondaryStructure {
    MotzkinSampler::new(n).sample(rng)
}

/// Uniform Motzkin sampler with the pair-count weights cached.
#[derive(Debug, Clone)]
pub struct MotzkinSampler {
    n: usize,
    cumulative: Vec<BigUint>,
}

impl MotzkinSampler {
    pub fn new(n: usize) -> Self {
        let mut acc = BigUint::from(0u32);
        let cumulative = motzkin_pair_weights(n)
            .into_iter()
            .map(|w| {
                acc += w;
                acc.clone()
            })
            .collect();
        MotzkinSampler { n, cumulative }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn sample(&self, rng: &mut RngHandle) -> SecondaryStructure {
        let total = self.cumulative.last().expect("at least one weight");
        let r = rng.gen_biguint_below(total);
        let k = self.cumulative.partition_point(|c| c <= &r);
        let n = self.n;
        let mut positions = rand::seq::index::sample(rng, n, 2 * k).into_vec();
        positions.sort_unstable();
        let path = dyck_brackets(k, rng);
        let mut buf = vec![b'.'; n];
        for (&pos, &c) in positions.iter().zip(&path) {
            buf[pos] = c;
        }
        from_brackets(&buf)
    }
}

/// `C(n, 2k) Cat(k)` for `k = 0..=n/2`; they sum to the Motzkin number.
fn motzkin_pair_weights(n: usize) -> Vec<BigUint> {
    let cat = catalan_numbers(n / 2);
    let mut out = Vec::with_capacity(n / 2 + 1);
    let mut binom = BigUint::from(1u32);
    for (k, c) in cat.iter().enumerate() {
        if k > 0 {
            // C(n, 2k) from C(n, 2k - 2).
            let a = n - 2 * k + 2;
            binom = binom * BigUint::from(a * (a - 1)) / BigUint::from((2 * k) * (2 * k - 1));
        }
        out.push(&binom * c);
    }
    out
}

/// Length-conditioned Pfold sampler over shared inside tables.
#[derive(Debug, Clone)]
pub struct PfoldSampler {
    inside: PfoldInside,
}

#[derive(Clone, Copy)]
enum Sym {
    S,
    L,
    F,
    /// The `L S` body of an `F` or `S` rule.
    Ls,
}

impl PfoldSampler {
    pub fn new(params: PfoldParams, nmax: usize) -> Result<Self> {
        params.validate()?;
        Ok(PfoldSampler {
            inside: PfoldInside::new(params, nmax),
        })
    }

    pub fn inside(&self) -> &PfoldInside {
        &self.inside
    }

    /// A structure drawn from the grammar conditioned on length `n`.
    pub fn sample(&self, n: usize, rng: &mut RngHandle) -> Result<SecondaryStructure> {
        if n > self.inside.nmax() {
            return Err(Error::SizeTooLarge {
                n,
                limit: self.inside.nmax(),
            });
        }
        if self.inside.s[n] <= 0.0 {
            return Err(Error::ZeroMassLength(n));
        }
        let t = &self.inside;
        let p = t.params;
        let mut buf = vec![b'.'; n];
        let mut stack = vec![(Sym::S, 0usize, n)];
        while let Some((sym, at, len)) = stack.pop() {
            match sym {
                Sym::S => {
                    let ls = p.p1 * t.ls[len];
                    if rng.gen::<f64>() * t.s[len] < ls {
                        stack.push((Sym::Ls, at, len));
                    } else {
                        stack.push((Sym::L, at, len));
                    }
                }
                Sym::L => {
                    if len == 1 {
                        buf[at] = b'.';
                    } else {
                        buf[at] = b'(';
                        buf[at + len - 1] = b')';
                        stack.push((Sym::F, at + 1, len - 2));
                    }
                }
                Sym::F => {
                    let stacked = if len >= 2 { p.p3 * t.f[len - 2] } else { 0.0 };
                    if rng.gen::<f64>() * t.f[len] < stacked {
                        buf[at] = b'(';
                        buf[at + len - 1] = b')';
                        stack.push((Sym::F, at + 1, len - 2));
                    } else {
                        stack.push((Sym::Ls, at, len));
                    }
                }
                Sym::Ls => {
                    let split = pick(rng, t.ls[len], (1..len).map(|i| (i, t.l[i] * t.s[len - i])));
                    stack.push((Sym::L, at, split));
                    stack.push((Sym::S, at + split, len - split));
                }
            }
        }
        Ok(from_brackets(&buf))
    }
}

/// Draws an item with probability proportional to its weight; `total` is
/// the sum of the weights.
fn pick(rng: &mut impl Rng, total: f64, items: impl Iterator<Item = (usize, f64)>) -> usize {
    let mut u = rng.gen::<f64>() * total;
    let mut last = None;
    for (i, w) in items {
        if w > 0.0 {
            last = Some(i);
            if u < w {
                return i;
            }
            u -= w;
        }
    }
    last.expect("positive total weight")
}

/// One Pfold structure of length `n`; builds the inside tables on each
/// call, so prefer [`PfoldSampler`] for repeated draws.
pub fn sample_pfold(n: usize, p: &PfoldParams, rng: &mut RngHandle) -> Result<SecondaryStructure> {
    PfoldSampler::new(*p, n)?.sample(n, rng)
}

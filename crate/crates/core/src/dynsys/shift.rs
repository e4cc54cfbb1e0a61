//! Full shift on `s` symbols.
//!
//! Points are restricted to sequences with finite descriptions: eventually
//! periodic sequences `pre · per^∞`, and shifted copies of the enumeration
//! stream (all words of length 1, 2, 3, … concatenated in lexicographic order),
//! optionally behind a finite prefix. The stream has a dense orbit, which makes
//! it the canonical transitive point.

use std::fmt;

use crate::metric::Dist;

use super::{DynError, OrbitStructure};

/// Upper bound on how far two stream-based points are scanned for a disagreement.
const STREAM_SCAN_LIMIT: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShiftPoint {
    /// `pre · per^∞` in canonical form: `per` primitive, `pre` not ending in `per`'s last symbol.
    Eventual { pre: Vec<u8>, per: Vec<u8> },
    /// `prefix · E[offset..]` where `E` is the enumeration stream over `symbols` letters.
    Stream { symbols: u8, prefix: Vec<u8>, offset: u64 },
}

impl ShiftPoint {
    pub fn eventual(pre: &[u8], per: &[u8]) -> Self {
        assert!(!per.is_empty(), "period word must be nonempty");
        let mut per = primitive_root(per).to_vec();
        let mut pre = pre.to_vec();
        while let Some(&last) = pre.last() {
            if last != *per.last().expect("nonempty") {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        ShiftPoint::Eventual { pre, per }
    }

    pub fn periodic(word: &[u8]) -> Self {
        Self::eventual(&[], word)
    }

    /// Constant sequence `a^∞`.
    pub fn constant(a: u8) -> Self {
        Self::periodic(&[a])
    }

    /// The enumeration stream itself.
    pub fn stream(symbols: u8) -> Self {
        ShiftPoint::Stream { symbols, prefix: Vec::new(), offset: 0 }
    }

    fn stream_canonical(symbols: u8, mut prefix: Vec<u8>, mut offset: u64) -> Self {
        while offset > 0 {
            match prefix.last() {
                Some(&last) if last == stream_symbol(symbols, offset - 1) => {
                    prefix.pop();
                    offset -= 1;
                }
                _ => break,
            }
        }
        ShiftPoint::Stream { symbols, prefix, offset }
    }

    pub fn is_eventually_periodic(&self) -> bool {
        matches!(self, ShiftPoint::Eventual { .. })
    }

    pub fn symbol(&self, i: usize) -> u8 {
        match self {
            ShiftPoint::Eventual { pre, per } => {
                if i < pre.len() {
                    pre[i]
                } else {
                    per[(i - pre.len()) % per.len()]
                }
            }
            ShiftPoint::Stream { symbols, prefix, offset } => {
                if i < prefix.len() {
                    prefix[i]
                } else {
                    stream_symbol(*symbols, offset + (i - prefix.len()) as u64)
                }
            }
        }
    }

    pub fn prefix(&self, len: usize) -> Vec<u8> {
        (0..len).map(|i| self.symbol(i)).collect()
    }

    pub fn starts_with(&self, word: &[u8]) -> bool {
        word.iter().enumerate().all(|(i, &a)| self.symbol(i) == a)
    }

    /// The shift map `σ`.
    pub fn shift(&self) -> ShiftPoint {
        match self {
            ShiftPoint::Eventual { pre, per } => {
                if pre.is_empty() {
                    let mut per = per.clone();
                    per.rotate_left(1);
                    ShiftPoint::Eventual { pre: Vec::new(), per }
                } else {
                    ShiftPoint::Eventual { pre: pre[1..].to_vec(), per: per.clone() }
                }
            }
            ShiftPoint::Stream { symbols, prefix, offset } => {
                if prefix.is_empty() {
                    ShiftPoint::Stream { symbols: *symbols, prefix: Vec::new(), offset: offset + 1 }
                } else {
                    ShiftPoint::Stream { symbols: *symbols, prefix: prefix[1..].to_vec(), offset: *offset }
                }
            }
        }
    }

    pub fn shift_by(&self, k: usize) -> ShiftPoint {
        match self {
            ShiftPoint::Eventual { pre, per } if k >= pre.len() => {
                let mut per = per.clone();
                let r = (k - pre.len()) % per.len();
                per.rotate_left(r);
                ShiftPoint::Eventual { pre: Vec::new(), per }
            }
            ShiftPoint::Eventual { pre, per } => ShiftPoint::Eventual { pre: pre[k..].to_vec(), per: per.clone() },
            ShiftPoint::Stream { symbols, prefix, offset } if k >= prefix.len() => {
                ShiftPoint::Stream { symbols: *symbols, prefix: Vec::new(), offset: offset + (k - prefix.len()) as u64 }
            }
            ShiftPoint::Stream { symbols, prefix, offset } => {
                ShiftPoint::Stream { symbols: *symbols, prefix: prefix[k..].to_vec(), offset: *offset }
            }
        }
    }

    /// `word · self`.
    pub fn prepend(&self, word: &[u8]) -> ShiftPoint {
        match self {
            ShiftPoint::Eventual { pre, per } => {
                let mut p = word.to_vec();
                p.extend_from_slice(pre);
                ShiftPoint::eventual(&p, per)
            }
            ShiftPoint::Stream { symbols, prefix, offset } => {
                let mut p = word.to_vec();
                p.extend_from_slice(prefix);
                ShiftPoint::stream_canonical(*symbols, p, *offset)
            }
        }
    }

    /// Index of the first symbol where the sequences differ, `None` if equal.
    pub fn first_disagreement(&self, other: &ShiftPoint) -> Option<usize> {
        if self == other {
            return None;
        }
        let limit = match (self, other) {
            (ShiftPoint::Eventual { pre: p1, per: q1 }, ShiftPoint::Eventual { pre: p2, per: q2 }) => {
                p1.len().max(p2.len()) + q1.len() * q2.len()
            }
            _ => STREAM_SCAN_LIMIT,
        };
        (0..limit)
            .find(|&i| self.symbol(i) != other.symbol(i))
            .or_else(|| panic!("no disagreement within {limit} symbols between {self} and {other}"))
    }

    /// Length of the longest common prefix (`usize::MAX` for equal points).
    pub fn common_prefix(&self, other: &ShiftPoint) -> usize {
        self.first_disagreement(other).unwrap_or(usize::MAX)
    }

    /// `d(x, y) = 2^-k` with `k` the first disagreement index.
    pub fn dist(&self, other: &ShiftPoint) -> Dist {
        match self.first_disagreement(other) {
            None => Dist::ZERO,
            Some(k) => Dist::pow2_neg(k as u32),
        }
    }

    /// Transient and period of an eventually periodic point.
    pub fn orbit_structure(&self) -> Result<OrbitStructure, DynError> {
        match self {
            ShiftPoint::Eventual { pre, per } => Ok(OrbitStructure { transient: pre.len(), period: per.len() }),
            ShiftPoint::Stream { .. } => Err(DynError::NotEventuallyPeriodic),
        }
    }
}

impl fmt::Display for ShiftPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = |w: &[u8]| w.iter().map(|a| char::from_digit(*a as u32, 36).unwrap_or('?')).collect::<String>();
        match self {
            ShiftPoint::Eventual { pre, per } => write!(f, "{}({})", word(pre), word(per)),
            ShiftPoint::Stream { prefix, offset, .. } => {
                write!(f, "{}E[{}..]", word(prefix), offset)
            }
        }
    }
}

fn primitive_root(word: &[u8]) -> &[u8] {
    let n = word.len();
    for p in 1..=n {
        if n.is_multiple_of(p) && (p..n).all(|i| word[i] == word[i - p]) {
            return &word[..p];
        }
    }
    word
}

/// Symbol at `pos` of the enumeration stream over `symbols` letters.
pub fn stream_symbol(symbols: u8, mut pos: u64) -> u8 {
    let s = symbols as u64;
    let mut len = 1u32;
    let mut count = s;
    loop {
        let block = count * len as u64;
        if pos < block {
            let word = pos / len as u64;
            let digit = len - 1 - (pos % len as u64) as u32;
            return ((word / s.pow(digit)) % s) as u8;
        }
        pos -= block;
        len += 1;
        count *= s;
    }
}

/// Offset of the first occurrence of `word` as a listed word in the enumeration stream.
pub fn stream_word_offset(symbols: u8, word: &[u8]) -> u64 {
    let s = symbols as u64;
    let mut start = 0u64;
    for len in 1..word.len() as u32 {
        start += len as u64 * s.pow(len);
    }
    let index = word.iter().fold(0u64, |acc, &a| acc * s + a as u64);
    start + index * word.len() as u64
}

/// Full shift on `symbols` letters with a cylinder basis of words up to `cylinder_len`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftSystem {
    pub name: String,
    pub symbols: u8,
    pub cylinder_len: usize,
}

impl ShiftSystem {
    pub fn new(symbols: u8, cylinder_len: usize) -> Result<Self, DynError> {
        if symbols < 2 {
            return Err(DynError::Malformed("full shift needs at least 2 symbols".into()));
        }
        if cylinder_len == 0 || cylinder_len > 16 {
            return Err(DynError::Malformed("cylinder length must be in 1..=16".into()));
        }
        Ok(ShiftSystem { name: format!("shift{symbols}"), symbols, cylinder_len })
    }

    /// All words of length `1..=cylinder_len` in length-lexicographic order.
    pub fn cylinders(&self) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut layer: Vec<Vec<u8>> = vec![Vec::new()];
        for _ in 0..self.cylinder_len {
            layer = layer
                .iter()
                .flat_map(|w| {
                    (0..self.symbols).map(move |a| {
                        let mut w = w.clone();
                        w.push(a);
                        w
                    })
                })
                .collect();
            out.extend(layer.iter().cloned());
        }
        out
    }

    pub fn iterate(&self, x: &ShiftPoint, k: usize) -> ShiftPoint {
        x.shift_by(k)
    }

    /// `σ^{-1}[w]` as the union of cylinders `[a·w]`.
    pub fn preimage_cylinder(&self, word: &[u8]) -> Vec<Vec<u8>> {
        (0..self.symbols)
            .map(|a| {
                let mut w = vec![a];
                w.extend_from_slice(word);
                w
            })
            .collect()
    }

    /// Largest distance strictly inside a cylinder of length `len`: the cylinder is the ball of this radius.
    pub fn cylinder_radius(len: usize) -> Dist {
        Dist::pow2_neg(len.saturating_sub(1) as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_absorbs_preperiod() {
        let x = ShiftPoint::eventual(&[0, 1], &[1]);
        assert_eq!(x, ShiftPoint::Eventual { pre: vec![0], per: vec![1] });
        assert_eq!(ShiftPoint::periodic(&[0, 1, 0, 1]), ShiftPoint::periodic(&[0, 1]));
        assert_eq!(ShiftPoint::eventual(&[1, 0, 1], &[0, 1]), ShiftPoint::eventual(&[1], &[0, 1]).prepend(&[]));
    }

    #[test]
    fn shifting_drops_prefix() {
        let x = ShiftPoint::eventual(&[0, 1], &[1]);
        assert_eq!(x.shift_by(2), ShiftPoint::constant(1));
        assert_eq!(x.shift().shift(), x.shift_by(2));
        let y = ShiftPoint::eventual(&[1, 1, 0], &[0, 1, 1]);
        for k in 0..12 {
            for i in 0..20 {
                assert_eq!(y.shift_by(k).symbol(i), y.symbol(i + k));
            }
        }
    }

    #[test]
    fn enumeration_stream_lists_words() {
        let e = ShiftPoint::stream(2);
        let head: Vec<u8> = e.prefix(14);
        // 0 1 00 01 10 11 000 ...
        assert_eq!(head, vec![0, 1, 0, 0, 0, 1, 1, 0, 1, 1, 0, 0, 0, 0]);
        let w = [1, 0, 1, 1];
        let off = stream_word_offset(2, &w) as usize;
        assert!(e.shift_by(off).starts_with(&w));
    }

    #[test]
    fn stream_prefix_canonicalizes() {
        let e = ShiftPoint::stream(2).shift_by(3);
        // E[2] = 0, so `0 · E[3..]` is `E[2..]`.
        assert_eq!(e.prepend(&[0]), ShiftPoint::stream(2).shift_by(2));
        assert_eq!(e.prepend(&[1]).symbol(0), 1);
    }

    #[test]
    fn shift_metric_examples() {
        let a = ShiftPoint::constant(0);
        let b = ShiftPoint::eventual(&[0, 0], &[1]);
        assert_eq!(a.dist(&b), Dist::new(1, 4));
        assert_eq!(a.dist(&a), Dist::ZERO);
        assert_eq!(a.dist(&ShiftPoint::constant(1)), Dist::ONE);
        assert_eq!(ShiftPoint::stream(2).dist(&a), Dist::new(1, 2));
        assert_eq!(ShiftPoint::stream(2).dist(&ShiftPoint::constant(1)), Dist::ONE);
    }

    #[test]
    fn cylinder_enumeration_and_preimage() {
        let sys = ShiftSystem::new(2, 3).unwrap();
        assert_eq!(sys.cylinders().len(), 2 + 4 + 8);
        assert_eq!(sys.preimage_cylinder(&[0, 1]), vec![vec![0, 0, 1], vec![1, 0, 1]]);
    }
}

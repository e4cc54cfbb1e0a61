//! Exact metric-space primitives.
//!
//! Every distance in the crate is an exact rational ([`Dist`]). Finite spaces
//! store their distances as *ranks* into a sorted table of the distinct values
//! that occur; Hausdorff distances, Chebyshev radii and the suspension metric
//! are all max/min combinations of base distances, so every derived level can
//! work on ranks and convert back only at the edges.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by metric operations and metric-file parsing.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("operation requires a nonempty point set")]
    EmptySet,
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(Dist),
    #[error("point {0} is out of range for a space with {1} points")]
    PointOutOfRange(usize, usize),
    #[error("invalid rational `{0}`")]
    BadRational(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An exact, nonnegative rational distance.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Dist(Ratio<i64>);

impl Dist {
    pub const ZERO: Dist = Dist(Ratio::new_raw(0, 1));
    pub const ONE: Dist = Dist(Ratio::new_raw(1, 1));

    /// Builds `num/den`; panics on a zero denominator or a negative value.
    pub fn new(num: i64, den: i64) -> Self {
        let r = Ratio::new(num, den);
        assert!(!r.is_negative(), "distances are nonnegative");
        Dist(r)
    }

    pub fn from_int(v: i64) -> Self {
        Dist::new(v, 1)
    }

    /// `2^-k`, the shift metric's value for first disagreement index `k`.
    pub fn pow2_neg(k: u32) -> Self {
        assert!(k < 62, "shift distances below 2^-61 are not representable");
        Dist(Ratio::new_raw(1, 1i64 << k))
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn scale(&self, num: i64, den: i64) -> Dist {
        Dist(self.0 * Ratio::new(num, den))
    }

    pub fn half(&self) -> Dist {
        self.scale(1, 2)
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// Upper bound on `arctan(self)` from the alternating series
    /// `x - x^3/3 + x^5/5`, valid for `0 <= x <= 1`.
    pub fn arctan_upper(&self) -> Dist {
        assert!(self.0 <= Ratio::from_integer(1), "series bound needs x <= 1");
        let x = self.0;
        let x3 = x * x * x;
        let x5 = x3 * x * x;
        Dist(x - x3 / 3 + x5 / 5)
    }
}

impl fmt::Debug for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self.0.denom() == 1 {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Dist {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || MetricError::BadRational(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim().parse::<i64>().map_err(|_| bad())?, d.trim().parse::<i64>().map_err(|_| bad())?),
            None => (s.parse::<i64>().map_err(|_| bad())?, 1),
        };
        if den <= 0 || num < 0 {
            return Err(bad());
        }
        Ok(Dist(Ratio::new(num, den)))
    }
}

impl Serialize for Dist {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dist {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Canonical sorted set of point indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointSet(Vec<usize>);

impl PointSet {
    pub fn empty() -> Self {
        PointSet(Vec::new())
    }

    pub fn singleton(x: usize) -> Self {
        PointSet(vec![x])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.0.iter().all(|x| other.contains(*x))
    }

    pub fn is_disjoint(&self, other: &PointSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        self.iter().filter(|x| other.contains(*x)).collect()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl FromIterator<usize> for PointSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        PointSet(v)
    }
}

impl From<Vec<usize>> for PointSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// A finite space whose distances are ranks into a shared table of exact values.
///
/// `scale()[0]` is always zero and the table is strictly increasing, so rank
/// comparisons agree with distance comparisons.
pub trait FiniteMetric: Send + Sync {
    fn len(&self) -> usize;
    fn rank(&self, i: usize, j: usize) -> u32;
    fn scale(&self) -> &Arc<[Dist]>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dist(&self, i: usize, j: usize) -> Dist {
        self.scale()[self.rank(i, j) as usize]
    }
}

/// Finite metric space with an explicit distance table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricSpace {
    n: usize,
    labels: Vec<String>,
    scale: Arc<[Dist]>,
    ranks: Vec<u32>,
}

impl MetricSpace {
    /// Builds a space from a distance function. No axioms are checked here;
    /// use [`check_metric_axioms`].
    pub fn from_fn(n: usize, mut dist: impl FnMut(usize, usize) -> Dist) -> Self {
        let mut raw = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                raw.push(dist(i, j));
            }
        }
        let mut values: Vec<Dist> = raw.clone();
        values.push(Dist::ZERO);
        values.sort_unstable();
        values.dedup();
        let ranks = raw.iter().map(|d| values.binary_search(d).expect("value present") as u32).collect();
        MetricSpace { n, labels: (0..n).map(|i| i.to_string()).collect(), scale: values.into(), ranks }
    }

    /// Cycle metric on `m` points: `min(|i-j|, m-|i-j|) / floor(m/2)`, diameter 1.
    pub fn cycle(m: usize) -> Self {
        let half = (m / 2).max(1) as i64;
        Self::from_fn(m, |i, j| {
            let d = i.abs_diff(j);
            Dist::new(d.min(m - d) as i64, half)
        })
    }

    /// Circle of circumference 1 sampled at `m` points: `min(|i-j|, m-|i-j|) / m`.
    pub fn circle_grid(m: usize) -> Self {
        Self::from_fn(m, |i, j| {
            let d = i.abs_diff(j);
            Dist::new(d.min(m - d) as i64, m as i64)
        })
    }

    /// Path metric `|i-j| / (m-1)`, i.e. `m` equally spaced points of `[0,1]`.
    pub fn path(m: usize) -> Self {
        let den = (m.max(2) - 1) as i64;
        Self::from_fn(m, |i, j| Dist::new(i.abs_diff(j) as i64, den))
    }

    /// Discrete metric: distance 1 between distinct points.
    pub fn discrete(m: usize) -> Self {
        Self::from_fn(m, |i, j| if i == j { Dist::ZERO } else { Dist::ONE })
    }

    /// Builds a space from the strictly lower triangle, `rows[i-1][j] = d(i, j)` for `j < i`.
    pub fn from_lower_triangle(n: usize, rows: &[Vec<Dist>]) -> Result<Self, MetricError> {
        if rows.len() + 1 != n.max(1) {
            return Err(MetricError::Parse {
                line: 0,
                msg: format!("expected {} table rows, found {}", n.saturating_sub(1), rows.len()),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(MetricError::Parse { line: 0, msg: format!("row {} must have {} entries", i + 1, i + 1) });
            }
        }
        Ok(Self::from_fn(n, |i, j| match i.cmp(&j) {
            Ordering::Equal => Dist::ZERO,
            Ordering::Greater => rows[i - 1][j],
            Ordering::Less => rows[j - 1][i],
        }))
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n);
        self.labels = labels;
        self
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn points(&self) -> PointSet {
        (0..self.n).collect()
    }

    pub fn diameter(&self) -> Dist {
        *self.scale.last().unwrap_or(&Dist::ZERO)
    }

    /// Smallest positive distance, if any two points differ.
    pub fn min_positive(&self) -> Option<Dist> {
        self.scale.get(1).copied()
    }

    /// Parses the structured text format (see the crate README).
    pub fn parse(text: &str) -> Result<Self, MetricError> {
        let mut points = None;
        let mut labels = None;
        let mut metric = None;
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| MetricError::Parse { line: lineno + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            let value = value.trim();
            match key.trim() {
                "points" => points = Some(value.parse::<usize>().map_err(|e| err(e.to_string()))?),
                "labels" => labels = Some(value.split_whitespace().map(str::to_string).collect::<Vec<_>>()),
                "metric" => metric = Some(value.to_string()),
                "row" => rows.push(
                    value
                        .split_whitespace()
                        .map(|t| t.parse::<Dist>().map_err(|e| err(e.to_string())))
                        .collect::<Result<Vec<_>, _>>()?,
                ),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        let n = points.ok_or(MetricError::Parse { line: 0, msg: "missing `points`".into() })?;
        let space = match metric.as_deref().unwrap_or("table") {
            "cycle" => Self::cycle(n),
            "path" => Self::path(n),
            "circle" => Self::circle_grid(n),
            "discrete" => Self::discrete(n),
            "table" => Self::from_lower_triangle(n, &rows)?,
            other => return Err(MetricError::Parse { line: 0, msg: format!("unknown metric `{other}`") }),
        };
        match labels {
            Some(l) if l.len() == n => Ok(space.with_labels(l)),
            Some(l) => Err(MetricError::Parse { line: 0, msg: format!("{} labels for {} points", l.len(), n) }),
            None => Ok(space),
        }
    }
}

impl FiniteMetric for MetricSpace {
    fn len(&self) -> usize {
        self.n
    }

    fn rank(&self, i: usize, j: usize) -> u32 {
        self.ranks[i * self.n + j]
    }

    fn scale(&self) -> &Arc<[Dist]> {
        &self.scale
    }
}

/// First violated metric axiom, if any.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AxiomViolation {
    NonzeroSelfDistance { x: usize },
    Identity { x: usize, y: usize },
    Symmetry { x: usize, y: usize },
    Triangle { x: usize, y: usize, z: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub points: usize,
    pub violation: Option<AxiomViolation>,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.violation.is_none()
    }
}

/// Scans all pairs and triples; reports the first violation in index order.
pub fn check_metric_axioms<M: FiniteMetric + ?Sized>(space: &M) -> AxiomReport {
    let n = space.len();
    let violation = (|| {
        for x in 0..n {
            if !space.dist(x, x).is_zero() {
                return Some(AxiomViolation::NonzeroSelfDistance { x });
            }
        }
        for x in 0..n {
            for y in 0..n {
                if x != y && space.dist(x, y).is_zero() {
                    return Some(AxiomViolation::Identity { x, y });
                }
                if space.dist(x, y) != space.dist(y, x) {
                    return Some(AxiomViolation::Symmetry { x, y });
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                let rxy = space.rank(x, y);
                let dxy = space.dist(x, y).ratio();
                for z in 0..n {
                    let rxz = space.rank(x, z);
                    // d(x,z) <= max(d(x,y), d(y,z)) already satisfies the triangle inequality
                    if rxz <= rxy.max(space.rank(y, z)) {
                        continue;
                    }
                    if space.dist(x, z).ratio() > dxy + space.dist(y, z).ratio() {
                        return Some(AxiomViolation::Triangle { x, y, z });
                    }
                }
            }
        }
        None
    })();
    AxiomReport { points: n, violation }
}

/// Open ball `{y : d(center, y) < radius}`.
pub fn ball<M: FiniteMetric + ?Sized>(space: &M, center: usize, radius: Dist) -> Result<PointSet, MetricError> {
    if radius.is_zero() {
        return Err(MetricError::NonPositiveRadius(radius));
    }
    if center >= space.len() {
        return Err(MetricError::PointOutOfRange(center, space.len()));
    }
    Ok((0..space.len()).filter(|&y| space.dist(center, y) < radius).collect())
}

/// Directed sup-inf distance on ranks.
pub(crate) fn directed_rank<M: FiniteMetric + ?Sized>(space: &M, a: &[usize], b: &[usize]) -> u32 {
    a.iter().map(|&x| b.iter().map(|&y| space.rank(x, y)).min().unwrap_or(0)).max().unwrap_or(0)
}

pub(crate) fn hausdorff_rank<M: FiniteMetric + ?Sized>(space: &M, a: &[usize], b: &[usize]) -> u32 {
    directed_rank(space, a, b).max(directed_rank(space, b, a))
}

/// Chebyshev radius on ranks: `min_x max_{a in A} d(a, x)` over all points `x`.
pub(crate) fn chebyshev_rank<M: FiniteMetric + ?Sized>(space: &M, a: &[usize]) -> u32 {
    (0..space.len()).map(|x| a.iter().map(|&p| space.rank(p, x)).max().unwrap_or(0)).min().unwrap_or(0)
}

/// Hausdorff distance between nonempty point sets.
pub fn hausdorff<M: FiniteMetric + ?Sized>(space: &M, a: &PointSet, b: &PointSet) -> Result<Dist, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptySet);
    }
    Ok(space.scale()[hausdorff_rank(space, a.as_slice(), b.as_slice()) as usize])
}

/// Chebyshev radius `min_x max_{a in A} d(a, x)`.
pub fn chebyshev_radius<M: FiniteMetric + ?Sized>(space: &M, a: &PointSet) -> Result<Dist, MetricError> {
    if a.is_empty() {
        return Err(MetricError::EmptySet);
    }
    Ok(space.scale()[chebyshev_rank(space, a.as_slice()) as usize])
}

//! Dynamical systems over three backends: finite exact, grid-discretized
//! interval and circle maps, and the full shift.

pub mod shift;

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{ball, check_metric_axioms, Dist, FiniteMetric, MetricError, MetricSpace, PointSet};

pub use shift::{stream_word_offset, ShiftPoint, ShiftSystem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynError {
    #[error("malformed system: {0}")]
    Malformed(String),
    #[error("grid doubling needs an odd modulus, got {0}")]
    EvenDoublingModulus(usize),
    #[error("operation requires a finite backend")]
    NotFinite,
    #[error("point is not eventually periodic")]
    NotEventuallyPeriodic,
    #[error("preimage of a non-ball set is unsupported on the grid backend")]
    UnsupportedPreimage,
    #[error("metric axioms fail: {0}")]
    MetricAxioms(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Finite,
    Grid,
    Shift,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Finite => "finite",
            Backend::Grid => "grid",
            Backend::Shift => "shift",
        })
    }
}

/// Total self-map of `0..n` given by a lookup table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Endomap {
    table: Vec<usize>,
    is_bijection: bool,
}

impl Endomap {
    pub fn new(table: Vec<usize>) -> Result<Self, DynError> {
        let n = table.len();
        if let Some(bad) = table.iter().find(|&&y| y >= n) {
            return Err(DynError::Malformed(format!("map image {bad} outside 0..{n}")));
        }
        let mut seen = vec![false; n];
        let mut injective = true;
        for &y in &table {
            injective &= !std::mem::replace(&mut seen[y], true);
        }
        Ok(Endomap { table, is_bijection: injective })
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn is_bijection(&self) -> bool {
        self.is_bijection
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// Transient length and period of an eventually periodic orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrbitStructure {
    pub transient: usize,
    pub period: usize,
}

/// Functional-graph decomposition of a map table: every point's transient and
/// period, the cycles, and the global constants that make set-valued
/// trajectories eventually periodic.
#[derive(Clone, Debug)]
pub struct MapAnalysis {
    pub transient: Vec<usize>,
    pub period: Vec<usize>,
    /// Cycles listed from their smallest point, in order of that point.
    pub cycles: Vec<Vec<usize>>,
    /// Longest transient over all points.
    pub max_transient: usize,
    /// Least common multiple of all cycle lengths, `None` past `u64` range.
    pub global_period: Option<u64>,
}

impl MapAnalysis {
    pub fn new(map: &[usize]) -> Self {
        let n = map.len();
        const UNSEEN: usize = usize::MAX;
        let mut transient = vec![UNSEEN; n];
        let mut period = vec![0; n];
        let mut cycles = Vec::new();
        let mut pos_in_path = vec![UNSEEN; n];
        for start in 0..n {
            if transient[start] != UNSEEN {
                continue;
            }
            let mut path = Vec::new();
            let mut x = start;
            while transient[x] == UNSEEN && pos_in_path[x] == UNSEEN {
                pos_in_path[x] = path.len();
                path.push(x);
                x = map[x];
            }
            let tail_end = if transient[x] == UNSEEN {
                // closed a new cycle at x
                let at = pos_in_path[x];
                let cycle: Vec<usize> = path[at..].to_vec();
                for &c in &cycle {
                    transient[c] = 0;
                    period[c] = cycle.len();
                }
                let min_pos = cycle.iter().enumerate().min_by_key(|(_, &c)| c).map(|(i, _)| i).unwrap();
                let mut rotated = cycle.clone();
                rotated.rotate_left(min_pos);
                cycles.push(rotated);
                at
            } else {
                path.len()
            };
            for i in (0..tail_end).rev() {
                let p = path[i];
                let next = map[p];
                transient[p] = transient[next] + 1;
                period[p] = period[next];
            }
            for &p in &path {
                pos_in_path[p] = UNSEEN;
            }
        }
        cycles.sort_by_key(|c| c[0]);
        let max_transient = transient.iter().copied().max().unwrap_or(0);
        let global_period = cycles.iter().try_fold(1u64, |acc, c| {
            let l = acc.lcm(&(c.len() as u64));
            (l < u64::MAX / 4).then_some(l)
        });
        MapAnalysis { transient, period, cycles, max_transient, global_period }
    }

    pub fn is_periodic(&self, x: usize) -> bool {
        self.transient[x] == 0
    }
}

/// Finite or grid dynamical system: a metric space, a total endomap and an open-set basis.
#[derive(Clone, Debug)]
pub struct DynSystem {
    pub name: String,
    pub backend: Backend,
    pub space: Arc<MetricSpace>,
    pub map: Endomap,
    pub basis: Vec<PointSet>,
    pub resolution: Dist,
    pub faithful_compactum: bool,
}

impl DynSystem {
    /// Assembles a system and validates metric axioms and map totality.
    pub fn new(
        name: impl Into<String>,
        backend: Backend,
        space: MetricSpace,
        map: Endomap,
        resolution: Option<Dist>,
    ) -> Result<Self, DynError> {
        Self::assemble(name.into(), backend, space, map, resolution, true)
    }

    fn assemble(
        name: String,
        backend: Backend,
        space: MetricSpace,
        map: Endomap,
        resolution: Option<Dist>,
        check_axioms: bool,
    ) -> Result<Self, DynError> {
        if backend == Backend::Shift {
            return Err(DynError::Malformed("use ShiftSystem for the shift backend".into()));
        }
        if space.len() != map.len() {
            return Err(DynError::Malformed(format!("map has {} entries for {} points", map.len(), space.len())));
        }
        if space.is_empty() {
            return Err(DynError::Malformed("empty space".into()));
        }
        if check_axioms {
            if let Some(v) = check_metric_axioms(&space).violation {
                return Err(DynError::MetricAxioms(format!("{v:?}")));
            }
        }
        let resolution = match resolution {
            Some(r) if r.is_zero() => return Err(DynError::Malformed("basis resolution must be positive".into())),
            Some(r) => r,
            None => match backend {
                Backend::Grid => Dist::new(1, 16).max(space.min_positive().unwrap_or(Dist::ONE)),
                _ => space.min_positive().unwrap_or(Dist::ONE),
            },
        };
        let basis = ball_basis(&space, resolution, backend)?;
        Ok(DynSystem { name, backend, space: Arc::new(space), map, basis, resolution, faithful_compactum: false })
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map.apply(x)
    }

    /// `f^k(x)`.
    pub fn iterate(&self, x: usize, k: usize) -> usize {
        (0..k).fold(x, |y, _| self.map.apply(y))
    }

    pub fn image(&self, s: &PointSet) -> PointSet {
        s.iter().map(|x| self.map.apply(x)).collect()
    }

    /// Exact `f^{-1}(S)`.
    pub fn preimage(&self, s: &PointSet) -> Result<PointSet, DynError> {
        if self.backend == Backend::Grid && !self.basis.contains(s) {
            return Err(DynError::UnsupportedPreimage);
        }
        Ok(self.preimage_unchecked(s))
    }

    fn preimage_unchecked(&self, s: &PointSet) -> PointSet {
        (0..self.len()).filter(|&x| s.contains(self.map.apply(x))).collect()
    }

    pub fn orbit_structure(&self, x: usize) -> OrbitStructure {
        let mut seen = HashMap::new();
        let mut y = x;
        for k in 0.. {
            if let Some(&first) = seen.get(&y) {
                return OrbitStructure { transient: first, period: k - first };
            }
            seen.insert(y, k);
            y = self.map.apply(y);
        }
        unreachable!()
    }

    /// Minimal transient and period of `S, f(S), f^2(S), …` (or of the preimage sequence).
    pub fn subset_trajectory_period(&self, s: &PointSet, direction: Direction) -> Result<OrbitStructure, DynError> {
        if self.backend != Backend::Finite {
            return Err(DynError::NotFinite);
        }
        let mut seen: HashMap<PointSet, usize> = HashMap::new();
        let mut cur = s.clone();
        for k in 0.. {
            if let Some(&first) = seen.get(&cur) {
                return Ok(OrbitStructure { transient: first, period: k - first });
            }
            let next = match direction {
                Direction::Forward => self.image(&cur),
                Direction::Preimage => self.preimage_unchecked(&cur),
            };
            seen.insert(std::mem::replace(&mut cur, next), k);
        }
        unreachable!()
    }

    pub fn analysis(&self) -> MapAnalysis {
        MapAnalysis::new(self.map.table())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Preimage,
}

/// Balls of radius `resolution`. Finite backends center a ball at every point;
/// grid backends center them on a lattice whose spacing is the resolution.
fn ball_basis(space: &MetricSpace, resolution: Dist, backend: Backend) -> Result<Vec<PointSet>, DynError> {
    let n = space.len();
    let stride = match (backend, space.min_positive()) {
        (Backend::Grid, Some(unit)) => {
            let r = resolution.ratio() / unit.ratio();
            (r.to_integer() as usize).max(1)
        }
        _ => 1,
    };
    let mut basis: Vec<PointSet> = Vec::new();
    let mut centers: Vec<usize> = (0..n).step_by(stride).collect();
    if backend == Backend::Grid && *centers.last().unwrap() != n - 1 {
        centers.push(n - 1);
    }
    for c in centers {
        basis.push(ball(space, c, resolution)?);
    }
    basis.sort();
    basis.dedup();
    Ok(basis)
}

/// A system on any backend.
#[derive(Clone, Debug)]
pub enum System {
    Finite(Arc<DynSystem>),
    Shift(Arc<ShiftSystem>),
}

impl System {
    pub fn name(&self) -> &str {
        match self {
            System::Finite(s) => &s.name,
            System::Shift(s) => &s.name,
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            System::Finite(s) => s.backend,
            System::Shift(_) => Backend::Shift,
        }
    }

    pub fn faithful_compactum(&self) -> bool {
        match self {
            System::Finite(s) => s.faithful_compactum,
            System::Shift(_) => true,
        }
    }

    pub fn as_finite(&self) -> Option<&Arc<DynSystem>> {
        match self {
            System::Finite(s) => Some(s),
            System::Shift(_) => None,
        }
    }
}

/// Declarative description of a system, as read from a system file or the CLI.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemSpec {
    FiniteRotation { m: usize, k: usize },
    Identity { m: usize },
    GridDoubling { m: usize },
    GridTent { m: usize },
    GridRotation { m: usize, k: usize },
    FullShift { symbols: u8, cylinder_len: usize },
    Custom { name: String, backend: Backend, space: MetricSpace, table: Vec<usize>, resolution: Option<Dist> },
}

/// Builds a system from its description.
pub fn build_system(spec: &SystemSpec) -> Result<System, DynError> {
    // built-in metrics are valid by construction; only custom tables are checked
    let checked = matches!(spec, SystemSpec::Custom { .. });
    let finite = |name: String, backend, space, table: Vec<usize>, res: Option<Dist>| -> Result<System, DynError> {
        let map = Endomap::new(table)?;
        Ok(System::Finite(Arc::new(DynSystem::assemble(name, backend, space, map, res, checked)?)))
    };
    match spec {
        SystemSpec::FiniteRotation { m, k } => {
            if *m == 0 {
                return Err(DynError::Malformed("rotation needs m >= 1".into()));
            }
            finite(
                format!("rot{m}_{k}"),
                Backend::Finite,
                MetricSpace::cycle(*m),
                (0..*m).map(|i| (i + k) % m).collect(),
                None,
            )
        }
        SystemSpec::Identity { m } => {
            if *m == 0 {
                return Err(DynError::Malformed("identity needs m >= 1".into()));
            }
            finite(format!("id{m}"), Backend::Finite, MetricSpace::cycle(*m), (0..*m).collect(), None)
        }
        SystemSpec::GridDoubling { m } => {
            if m % 2 == 0 {
                return Err(DynError::EvenDoublingModulus(*m));
            }
            finite(
                format!("doubling{m}"),
                Backend::Grid,
                MetricSpace::circle_grid(*m),
                (0..*m).map(|i| (2 * i) % m).collect(),
                None,
            )
        }
        SystemSpec::GridTent { m } => {
            if *m < 2 {
                return Err(DynError::Malformed("tent grid needs m >= 2".into()));
            }
            // x_i = i/(m-1); T(x) = 1 - |1 - 2x| lands on the grid index 2i or 2(m-1-i)
            let last = m - 1;
            let table = (0..*m).map(|i| if 2 * i <= last { 2 * i } else { 2 * (last - i) }).collect();
            finite(format!("tent{m}"), Backend::Grid, MetricSpace::path(*m), table, None)
        }
        SystemSpec::GridRotation { m, k } => finite(
            format!("gridrot{m}_{k}"),
            Backend::Grid,
            MetricSpace::circle_grid(*m),
            (0..*m).map(|i| (i + k) % m).collect(),
            None,
        ),
        SystemSpec::FullShift { symbols, cylinder_len } => {
            Ok(System::Shift(Arc::new(ShiftSystem::new(*symbols, *cylinder_len)?)))
        }
        SystemSpec::Custom { name, backend, space, table, resolution } => {
            finite(name.clone(), *backend, space.clone(), table.clone(), *resolution)
        }
    }
}

impl SystemSpec {
    /// Parses the system file format: `key = value` lines with keys
    /// `name`, `backend`, `points`, `map`, `metric`, `row`, `labels`,
    /// `basis_resolution`, `symbols`, `cylinder_len`.
    pub fn parse(text: &str) -> Result<Self, DynError> {
        let mut kv: Vec<(usize, String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| DynError::Malformed(format!("line {}: expected key=value", lineno + 1)))?;
            kv.push((lineno + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let get = |key: &str| kv.iter().rev().find(|(_, k, _)| k == key).map(|(_, _, v)| v.as_str());
        let num = |key: &str| -> Result<Option<usize>, DynError> {
            get(key).map(|v| v.parse::<usize>().map_err(|e| DynError::Malformed(format!("{key}: {e}")))).transpose()
        };
        let backend = match get("backend").unwrap_or("finite") {
            "finite" => Backend::Finite,
            "grid" => Backend::Grid,
            "shift" => Backend::Shift,
            other => return Err(DynError::Malformed(format!("unknown backend `{other}`"))),
        };
        if backend == Backend::Shift {
            return Ok(SystemSpec::FullShift {
                symbols: num("symbols")?.unwrap_or(2) as u8,
                cylinder_len: num("cylinder_len")?.unwrap_or(4),
            });
        }
        let map = get("map").ok_or_else(|| DynError::Malformed("missing `map`".into()))?;
        let points = num("points")?;
        let mut words = map.split_whitespace();
        let head = words.next().unwrap_or("");
        let arg = |w: Option<&str>| -> Result<usize, DynError> {
            w.ok_or_else(|| DynError::Malformed(format!("map `{head}` needs a parameter")))?
                .parse::<usize>()
                .map_err(|e| DynError::Malformed(e.to_string()))
        };
        let need_points = || points.ok_or_else(|| DynError::Malformed("missing `points`".into()));
        match head {
            "rotation" if backend == Backend::Finite => {
                return Ok(SystemSpec::FiniteRotation { m: need_points()?, k: arg(words.next())? })
            }
            "rotation" => return Ok(SystemSpec::GridRotation { m: need_points()?, k: arg(words.next())? }),
            "identity" => return Ok(SystemSpec::Identity { m: need_points()? }),
            "doubling" => return Ok(SystemSpec::GridDoubling { m: need_points()? }),
            "tent" => return Ok(SystemSpec::GridTent { m: need_points()? }),
            _ => {}
        }
        let n = need_points()?;
        let mut table = vec![usize::MAX; n];
        for pair in map.split_whitespace() {
            let (a, b) =
                pair.split_once(':').ok_or_else(|| DynError::Malformed(format!("map entry `{pair}` is not i:j")))?;
            let parse = |s: &str| s.parse::<usize>().map_err(|e| DynError::Malformed(format!("`{pair}`: {e}")));
            let (a, b) = (parse(a)?, parse(b)?);
            if a >= n {
                return Err(DynError::Malformed(format!("map source {a} outside 0..{n}")));
            }
            table[a] = b;
        }
        if let Some(missing) = table.iter().position(|&y| y == usize::MAX) {
            return Err(DynError::Malformed(format!("map is not total: no image for {missing}")));
        }
        let mut metric_text = format!("points = {n}\nmetric = {}\n", get("metric").unwrap_or("cycle"));
        for (_, k, v) in &kv {
            if k == "row" || k == "labels" {
                metric_text.push_str(&format!("{k} = {v}\n"));
            }
        }
        let space = MetricSpace::parse(&metric_text)?;
        let resolution = get("basis_resolution").map(|v| v.parse::<Dist>()).transpose()?;
        Ok(SystemSpec::Custom { name: get("name").unwrap_or("custom").to_string(), backend, space, table, resolution })
    }

    pub fn from_file(path: &Path) -> Result<Self, DynError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DynError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite(spec: SystemSpec) -> Arc<DynSystem> {
        build_system(&spec).unwrap().as_finite().unwrap().clone()
    }

    fn custom(table: Vec<usize>) -> Arc<DynSystem> {
        let n = table.len();
        finite(SystemSpec::Custom {
            name: "t".into(),
            backend: Backend::Finite,
            space: MetricSpace::cycle(n),
            table,
            resolution: None,
        })
    }

    #[test]
    fn builtin_systems() {
        let rot = finite(SystemSpec::FiniteRotation { m: 5, k: 1 });
        assert_eq!(rot.len(), 5);
        assert!(rot.map.is_bijection());
        assert!(!rot.faithful_compactum);
        assert_eq!(rot.iterate(0, 7), 2);
        let dbl = finite(SystemSpec::GridDoubling { m: 729 });
        assert!(dbl.map.is_bijection());
        assert_eq!(dbl.iterate(1, 8), 256);
        assert_eq!(build_system(&SystemSpec::GridDoubling { m: 64 }).unwrap_err(), DynError::EvenDoublingModulus(64));
        let shift = build_system(&SystemSpec::FullShift { symbols: 2, cylinder_len: 4 }).unwrap();
        assert_eq!(shift.backend(), Backend::Shift);
        assert!(shift.faithful_compactum());
    }

    #[test]
    fn finite_basis_is_singletons_and_grid_basis_covers() {
        let rot = finite(SystemSpec::FiniteRotation { m: 5, k: 1 });
        assert_eq!(rot.basis, (0..5).map(PointSet::singleton).collect::<Vec<_>>());
        let tent = finite(SystemSpec::GridTent { m: 256 });
        let covered: PointSet = tent.basis.iter().flat_map(|b| b.iter()).collect();
        assert_eq!(covered.len(), 256);
        assert!(tent.basis.len() < 40);
    }

    #[test]
    fn orbit_structures() {
        let rot = finite(SystemSpec::FiniteRotation { m: 5, k: 1 });
        assert_eq!(rot.orbit_structure(0), OrbitStructure { transient: 0, period: 5 });
        let tail = custom(vec![1, 2, 1]);
        assert_eq!(tail.orbit_structure(0), OrbitStructure { transient: 1, period: 2 });
        let fixed = custom(vec![0, 0]);
        assert_eq!(fixed.orbit_structure(0), OrbitStructure { transient: 0, period: 1 });
        let a = tail.analysis();
        assert_eq!(a.transient, vec![1, 0, 0]);
        assert_eq!(a.period, vec![2, 2, 2]);
        assert_eq!(a.cycles, vec![vec![1, 2]]);
        assert_eq!(a.global_period, Some(2));
    }

    #[test]
    fn subset_trajectories() {
        let rot = finite(SystemSpec::FiniteRotation { m: 4, k: 1 });
        assert_eq!(
            rot.subset_trajectory_period(&PointSet::singleton(0), Direction::Forward).unwrap(),
            OrbitStructure { transient: 0, period: 4 }
        );
        let tail = custom(vec![1, 2, 1]);
        assert_eq!(
            tail.subset_trajectory_period(&PointSet::from(vec![0, 1]), Direction::Forward).unwrap(),
            OrbitStructure { transient: 1, period: 1 }
        );
        // {1}, {0,2}, {1}, ...
        assert_eq!(
            tail.subset_trajectory_period(&PointSet::singleton(1), Direction::Preimage).unwrap(),
            OrbitStructure { transient: 0, period: 2 }
        );
        let dbl = finite(SystemSpec::GridDoubling { m: 9 });
        assert_eq!(dbl.subset_trajectory_period(&PointSet::singleton(1), Direction::Forward), Err(DynError::NotFinite));
    }

    #[test]
    fn preimages() {
        let rot = finite(SystemSpec::FiniteRotation { m: 5, k: 1 });
        assert_eq!(rot.preimage(&PointSet::singleton(2)).unwrap(), PointSet::singleton(1));
        let tail = custom(vec![1, 2, 1]);
        assert_eq!(tail.preimage(&PointSet::singleton(1)).unwrap(), PointSet::from(vec![0, 2]));
        let dbl = finite(SystemSpec::GridDoubling { m: 9 });
        assert_eq!(dbl.preimage(&PointSet::from(vec![0, 4])), Err(DynError::UnsupportedPreimage));
    }

    #[test]
    fn parses_system_files() {
        let spec = SystemSpec::parse("name = tail\npoints = 3\nmap = 0:1 1:2 2:1\nmetric = cycle\n").unwrap();
        let sys = build_system(&spec).unwrap();
        assert_eq!(sys.name(), "tail");
        assert_eq!(sys.as_finite().unwrap().map.table(), &[1, 2, 1]);
        assert_eq!(
            SystemSpec::parse("backend = grid\npoints = 729\nmap = doubling\n").unwrap(),
            SystemSpec::GridDoubling { m: 729 }
        );
        assert_eq!(
            SystemSpec::parse("backend = shift\nsymbols = 3\ncylinder_len = 2\n").unwrap(),
            SystemSpec::FullShift { symbols: 3, cylinder_len: 2 }
        );
        assert!(SystemSpec::parse("points = 3\nmap = 0:1 1:2\n").is_err());
        let table = "points = 3\nmap = 0:0 1:1 2:2\nmetric = table\nrow = 1\nrow = 1 1\n";
        assert!(build_system(&SystemSpec::parse(table).unwrap()).is_ok());
        let broken = "points = 3\nmap = 0:0 1:1 2:2\nmetric = table\nrow = 1\nrow = 3 1\n";
        assert!(matches!(build_system(&SystemSpec::parse(broken).unwrap()), Err(DynError::MetricAxioms(_))));
    }
}

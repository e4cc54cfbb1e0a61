//! Detection on finite spaces: the base system, its enumerated symmetric
//! product, or the suspension, all seen as a map table plus a basis.
//!
//! Set-valued trajectories of a finite map are eventually periodic with
//! offset `max(max transient, 1)` and period `lcm(cycle lengths)`, so one
//! window of that length decides every "exists n" and "infinitely many n".

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use fixedbitset::FixedBitSet;
use num_integer::Integer;

use super::{Budget, HitVariant, HittingTimeSet, Level, PointKind, Property, Separation, Verdict, Witness};
use crate::dynsys::{Backend, DynSystem, MapAnalysis};
use crate::hyperspace::SymmetricProduct;
use crate::metric::{Dist, FiniteMetric, MetricSpace, PointSet};
use crate::suspension::SuspensionSpace;

/// Longest exact window before an exact backend falls back to horizon search.
const EXACT_WINDOW_CAP: usize = 1 << 12;
/// Basis sets listed in a witness before eliding the rest.
const LISTED: usize = 6;

pub(crate) fn label_set(space: &MetricSpace, s: &PointSet) -> String {
    let labels = space.labels();
    let parts: Vec<&str> = s.iter().map(|x| labels[x].as_str()).collect();
    format!("{{{}}}", parts.join(","))
}

type Labeler = Arc<dyn Fn(usize) -> String + Send + Sync>;

/// Iterates considered by a detector: `1..=end`, with `[t0, end]` one full
/// period of the eventual behaviour when `complete`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub end: usize,
    pub t0: usize,
    pub period: Option<usize>,
    /// Negative answers are exact for the table itself.
    pub complete: bool,
    /// Answers are exact for the system the table stands for.
    pub definitive: bool,
}

impl Window {
    /// Start of the range treated as "arbitrarily late".
    pub fn tail_start(&self) -> usize {
        if self.complete {
            self.t0
        } else {
            (self.end / 2).max(1)
        }
    }

    /// Representative of `n` inside the window, if one is known.
    pub fn reduce(&self, n: usize) -> Option<usize> {
        if n <= self.end {
            Some(n)
        } else if self.complete {
            let p = self.period.expect("complete windows have a period");
            Some(self.t0 + (n - self.t0) % p)
        } else {
            None
        }
    }
}

struct Tables {
    /// `traj[u][n] = f^n(basis[u])`, sorted.
    traj: Vec<Vec<Vec<u32>>>,
    /// `hits[u * B + v]` has bit `n` when `f^n(U) ∩ V ≠ ∅`, `n ≥ 1`.
    hits: Vec<FixedBitSet>,
}

pub struct FiniteLevel {
    level: Level,
    system: String,
    metric: Arc<dyn FiniteMetric>,
    map: Vec<usize>,
    basis: Vec<PointSet>,
    exact_backend: bool,
    discrete: bool,
    labels: Labeler,
    analysis: MapAnalysis,
    member_of: Vec<Vec<u32>>,
    cache: Mutex<Option<(usize, Arc<Tables>)>>,
}

impl std::fmt::Debug for FiniteLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiniteLevel")
            .field("level", &self.level)
            .field("system", &self.system)
            .field("points", &self.map.len())
            .field("basis", &self.basis.len())
            .finish()
    }
}

impl FiniteLevel {
    pub fn new(
        level: Level,
        system: impl Into<String>,
        metric: Arc<dyn FiniteMetric>,
        map: Vec<usize>,
        basis: Vec<PointSet>,
        exact_backend: bool,
        labels: Labeler,
    ) -> Self {
        let n = map.len();
        let mut member_of = vec![Vec::new(); n];
        for (i, b) in basis.iter().enumerate() {
            for x in b.iter() {
                member_of[x].push(i as u32);
            }
        }
        let discrete = {
            let singles: Vec<bool> = {
                let mut s = vec![false; n];
                for b in &basis {
                    if b.len() == 1 {
                        s[b.first().unwrap()] = true;
                    }
                }
                s
            };
            singles.iter().all(|&x| x)
        };
        let analysis = MapAnalysis::new(&map);
        FiniteLevel {
            level,
            system: system.into(),
            metric,
            map,
            basis,
            exact_backend,
            discrete,
            labels,
            analysis,
            member_of,
            cache: Mutex::new(None),
        }
    }

    pub fn base(sys: &Arc<DynSystem>) -> Self {
        let space = sys.space.clone();
        let labels: Labeler = Arc::new(move |i| space.labels()[i].clone());
        Self::new(
            Level::Base,
            sys.name.clone(),
            sys.space.clone(),
            sys.map.table().to_vec(),
            sys.basis.clone(),
            sys.backend == Backend::Finite,
            labels,
        )
    }

    pub fn product(p: &Arc<SymmetricProduct>) -> Self {
        let q = p.clone();
        let labels: Labeler = Arc::new(move |i| label_set(&q.base().space, q.element(i)));
        Self::new(
            Level::Product,
            p.base().name.clone(),
            p.clone(),
            p.induced_table().to_vec(),
            p.vietoris_basis(),
            p.base().backend == Backend::Finite,
            labels,
        )
    }

    pub fn suspension(s: &Arc<SuspensionSpace>) -> Self {
        let q = s.clone();
        let labels: Labeler = Arc::new(move |i| match q.product_index(i) {
            None => "F_X".to_string(),
            Some(pe) => format!("q{}", label_set(&q.product().base().space, q.product().element(pe))),
        });
        let base = s.product().base();
        Self::new(
            Level::Suspension,
            base.name.clone(),
            s.clone(),
            s.induced_table().to_vec(),
            s.basis(),
            base.backend == Backend::Finite,
            labels,
        )
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn system(&self) -> &str {
        &self.system
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn basis(&self) -> &[PointSet] {
        &self.basis
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_discrete(&self) -> bool {
        self.discrete
    }

    pub fn analysis(&self) -> &MapAnalysis {
        &self.analysis
    }

    pub fn label(&self, x: usize) -> String {
        (self.labels)(x)
    }

    pub fn basis_label(&self, u: usize) -> String {
        let b = &self.basis[u];
        let shown: Vec<String> = b.iter().take(4).map(|x| self.label(x)).collect();
        if b.len() <= 4 {
            format!("[{}]", shown.join(" "))
        } else {
            format!("[{} … {} ({} points)]", shown.join(" "), self.label(b.as_slice()[b.len() - 1]), b.len())
        }
    }

    fn cycle_lengths(&self) -> Vec<usize> {
        self.analysis.cycles.iter().map(Vec::len).collect()
    }

    pub fn window(&self, budget: &Budget) -> Window {
        let t0 = self.analysis.max_transient.max(1);
        let period = self.analysis.global_period.and_then(|p| usize::try_from(p).ok());
        let full_end = period.and_then(|p| t0.checked_add(p - 1));
        match full_end {
            Some(e) if self.exact_backend && e <= EXACT_WINDOW_CAP => {
                Window { end: e, t0, period, complete: true, definitive: true }
            }
            _ => {
                let end = budget.horizon.min(full_end.unwrap_or(usize::MAX)).min(EXACT_WINDOW_CAP);
                let complete = full_end.is_some_and(|e| e <= end);
                Window { end, t0, period, complete, definitive: false }
            }
        }
    }

    pub fn iterate(&self, x: usize, k: usize) -> usize {
        let tr = self.analysis.transient[x];
        let (mut y, rest) = if k > tr { (x, tr + (k - tr) % self.analysis.period[x]) } else { (x, k) };
        for _ in 0..rest {
            y = self.map[y];
        }
        y
    }

    fn image(&self, s: &[u32]) -> Vec<u32> {
        let mut v: Vec<u32> = s.iter().map(|&x| self.map[x as usize] as u32).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    fn tables(&self, w: &Window, budget: &Budget) -> Option<Arc<Tables>> {
        if let Some((end, t)) = self.cache.lock().expect("cache lock").as_ref() {
            if *end == w.end {
                return Some(t.clone());
            }
        }
        let total_membership: usize = self.member_of.iter().map(Vec::len).sum();
        let avg_membership = (total_membership / self.len().max(1)).max(1) as u64;
        let set_volume: u64 = self.basis.iter().map(|b| b.len() as u64).sum();
        let work = set_volume * (w.end as u64 + 1) * (avg_membership + 1);
        let bits = (self.basis.len() as u64).pow(2) * (w.end as u64 + 1);
        if work > budget.work_cap || bits > budget.work_cap * 8 {
            return None;
        }
        let b = self.basis.len();
        let traj: Vec<Vec<Vec<u32>>> = self
            .basis
            .iter()
            .map(|u| {
                let mut cur: Vec<u32> = u.iter().map(|x| x as u32).collect();
                let mut out = Vec::with_capacity(w.end + 1);
                for _ in 0..w.end {
                    let next = self.image(&cur);
                    out.push(std::mem::replace(&mut cur, next));
                }
                out.push(cur);
                out
            })
            .collect();
        let mut hits = vec![FixedBitSet::with_capacity(w.end + 1); b * b];
        for (u, tr) in traj.iter().enumerate() {
            for (n, set) in tr.iter().enumerate().skip(1) {
                for &y in set {
                    for &v in &self.member_of[y as usize] {
                        hits[u * b + v as usize].insert(n);
                    }
                }
            }
        }
        let t = Arc::new(Tables { traj, hits });
        *self.cache.lock().expect("cache lock") = Some((w.end, t.clone()));
        Some(t)
    }

    /// Work units charged per distance evaluation; hyperspace ranks are Hausdorff computations.
    fn rank_cost(&self) -> u64 {
        match self.level {
            Level::Base => 1,
            Level::Product => 8,
            Level::Suspension => 16,
        }
    }

    fn over_budget(&self, w: &Window) -> Verdict {
        Verdict::unknown(format!(
            "work cap exceeded ({} points, {} basis sets, window {})",
            self.len(),
            self.basis.len(),
            w.end
        ))
    }

    fn negative(&self, w: &Window, witness: Witness) -> Verdict {
        if w.complete {
            Verdict::fails(w.definitive, witness)
        } else {
            Verdict::unknown(format!("no witness within horizon {}", w.end))
        }
    }

    fn pair_label(&self, u: usize, v: usize) -> String {
        format!("U={}, V={}", self.basis_label(u), self.basis_label(v))
    }

    pub fn detect(&self, property: Property, budget: &Budget) -> Verdict {
        let w = self.window(budget);
        use Property::*;
        match property {
            Sensitive | CofinitelySensitive | MultiSensitive => self.sensitivity(property, &w, budget),
            Transitive => self.transitive(&w, budget),
            ZTransitive => self.z_transitive(&w, budget),
            WeaklyMixing => self.weakly_mixing(&w, budget),
            Mixing => self.mixing(&w, budget),
            TotallyTransitive => self.totally_transitive(&w, budget),
            StronglyTransitive => self.strongly_transitive(&w, budget),
            MultiTransitive => self.multi_transitive(&w, budget),
            TtPlusPlus => self.tt_plus_plus(&w, budget),
            TwoSided => self.two_sided(&w, budget),
            FullyExact => self.fully_exact(&w, budget),
            DeltaTransitive => self.delta_transitive(&w, budget),
            DeltaMixing => self.delta_mixing(&w, budget),
            Accessible => self.accessible(&w, budget),
            Indecomposable => self.indecomposable(&w),
            Minimal => self.minimal(&w),
            FSystem => self.f_system(&w, budget),
            Touhey => self.touhey(&w),
            Martelli => self.martelli(&w, budget),
            DenseOmega => self.dense_omega(&w),
            DenseTransitivePoints => self.dense_transitive_points(&w),
            TransitiveTimesPoint => self.transitive_times(1, &w, budget),
            TransitiveTimesRot2 => self.transitive_times(2, &w, budget),
        }
    }

    // ---- sensitivity family -------------------------------------------------

    /// Diameter rank of a set: exact for small sets, a double-sweep lower bound otherwise.
    fn diam_rank(&self, s: &[u32]) -> u32 {
        if s.len() < 2 {
            return 0;
        }
        if s.len() <= 48 {
            let mut best = 0;
            for (i, &a) in s.iter().enumerate() {
                for &b in &s[i + 1..] {
                    best = best.max(self.metric.rank(a as usize, b as usize));
                }
            }
            return best;
        }
        let far =
            |from: u32| s.iter().map(|&y| (self.metric.rank(from as usize, y as usize), y)).max().expect("nonempty");
        let (r1, y1) = far(s[0]);
        let (r2, _) = far(y1);
        r1.max(r2)
    }

    /// Two points of `U` whose `n`-th images are at distance above `delta`.
    fn separation(&self, u: usize, n: usize, delta: Dist) -> Option<Separation> {
        let pts: Vec<(usize, usize)> = self.basis[u].iter().map(|x| (x, self.iterate(x, n))).collect();
        let mut best: Option<(Dist, usize, usize)> = None;
        for (i, &(x, fx)) in pts.iter().enumerate() {
            for &(y, fy) in &pts[i + 1..] {
                let d = self.metric.dist(fx, fy);
                if d > delta && best.is_none_or(|(bd, _, _)| d > bd) {
                    best = Some((d, x, y));
                }
            }
            if pts.len() > 48 && best.is_some() {
                break;
            }
        }
        best.map(|(distance, x, y)| Separation {
            basis_set: self.basis_label(u),
            x: self.label(x),
            y: self.label(y),
            n,
            distance,
        })
    }

    fn sensitivity(&self, property: Property, w: &Window, budget: &Budget) -> Verdict {
        let Some(t) = self.tables(w, budget) else {
            return self.over_budget(w);
        };
        let scale = self.metric.scale();
        let diameter = *scale.last().expect("nonempty scale");
        let diam: Vec<Vec<u32>> = t.traj.iter().map(|tr| tr.iter().map(|s| self.diam_rank(s)).collect()).collect();
        let tail = w.tail_start();
        let (critical, worst) = match property {
            Property::Sensitive => diam
                .iter()
                .enumerate()
                .map(|(u, d)| (d[1..].iter().copied().max().unwrap_or(0), u))
                .min()
                .map(|(c, u)| (c, Some(u)))
                .unwrap_or((0, None)),
            Property::CofinitelySensitive => diam
                .iter()
                .enumerate()
                .map(|(u, d)| (d[tail..].iter().copied().min().unwrap_or(0), u))
                .min()
                .map(|(c, u)| (c, Some(u)))
                .unwrap_or((0, None)),
            _ => ((1..=w.end).map(|n| diam.iter().map(|d| d[n]).min().unwrap_or(0)).max().unwrap_or(0), None),
        };
        if critical == 0 {
            let summary = match (property, worst) {
                (Property::Sensitive, Some(u)) => {
                    format!(
                        "{} never spreads: every image f^n(U), n in 1..={}, is a single point",
                        self.basis_label(u),
                        w.end
                    )
                }
                (Property::CofinitelySensitive, Some(u)) => {
                    format!("{} collapses to a single point at some n >= {} in every period", self.basis_label(u), tail)
                }
                _ => format!("no n in 1..={} makes every basis image a non-singleton", w.end),
            };
            return self.negative(w, Witness::text(summary).with_cycles(self.cycle_lengths()));
        }
        let critical_dist = scale[critical as usize];
        let delta =
            budget.deltas(diameter).into_iter().find(|d| *d < critical_dist).unwrap_or_else(|| critical_dist.half());
        let mut seps = Vec::new();
        let mut step = 0;
        match property {
            Property::MultiSensitive => {
                let n = (1..=w.end)
                    .find(|&n| diam.iter().all(|d| scale[d[n] as usize] > delta))
                    .expect("critical time exists");
                step = n;
                for u in 0..self.basis.len().min(LISTED) {
                    seps.extend(self.separation(u, n, delta));
                }
            }
            _ => {
                let range = if property == Property::Sensitive { 1 } else { tail };
                for (u, d) in diam.iter().enumerate() {
                    let n = (range..=w.end).find(|&n| scale[d[n] as usize] > delta).expect("critical time exists");
                    step = step.max(n);
                    if seps.len() < LISTED {
                        seps.extend(self.separation(u, n, delta));
                    }
                }
            }
        }
        let summary = match property {
            Property::Sensitive => {
                format!("every basis set separates beyond delta={delta} by n={step}")
            }
            Property::CofinitelySensitive => {
                format!("every basis set separates beyond delta={delta} at every n >= {tail}")
            }
            _ => format!("all basis sets separate beyond delta={delta} simultaneously at n={step}"),
        };
        let mut witness = Witness::text(summary).with_delta(delta).with_step(step);
        witness.separations = seps;
        Verdict::holds(w.definitive, witness)
    }

    // ---- hitting-time family ------------------------------------------------

    fn hit<'a>(&self, t: &'a Tables, u: usize, v: usize) -> &'a FixedBitSet {
        &t.hits[u * self.basis.len() + v]
    }

    fn first_hit(bits: &FixedBitSet) -> Option<usize> {
        bits.ones().find(|&n| n >= 1)
    }

    pub fn hitting_times(&self, u: usize, v: usize, variant: HitVariant, budget: &Budget) -> Option<HittingTimeSet> {
        self.hitting_times_of(&self.basis[u].clone(), &self.basis[v].clone(), variant, budget)
    }

    /// Hitting times between arbitrary sets of this level.
    pub fn hitting_times_of(
        &self,
        u: &PointSet,
        v: &PointSet,
        variant: HitVariant,
        budget: &Budget,
    ) -> Option<HittingTimeSet> {
        let w = self.window(budget);
        let mut found = Vec::new();
        match variant {
            HitVariant::Forward => {
                let mut cur: Vec<u32> = u.iter().map(|x| x as u32).collect();
                for n in 1..=w.end {
                    cur = self.image(&cur);
                    if cur.iter().any(|&y| v.contains(y as usize)) {
                        found.push(n);
                    }
                }
            }
            HitVariant::Preimage => {
                let mut cur = FixedBitSet::with_capacity(self.len());
                for y in v.iter() {
                    cur.insert(y);
                }
                for n in 1..=w.end {
                    let mut pre = FixedBitSet::with_capacity(self.len());
                    for x in 0..self.len() {
                        if cur.contains(self.map[x]) {
                            pre.insert(x);
                        }
                    }
                    cur = pre;
                    if u.iter().any(|x| cur.contains(x)) {
                        found.push(n);
                    }
                }
            }
        }
        Some(if w.complete {
            HittingTimeSet::Eventual {
                transient: found.iter().copied().filter(|&n| n < w.t0).collect(),
                offset: w.t0,
                period: w.period.expect("complete"),
                residues: found.into_iter().filter(|&n| n >= w.t0).collect(),
            }
        } else {
            HittingTimeSet::Truncated { hits: found, horizon: w.end }
        })
    }

    fn transitive(&self, w: &Window, budget: &Budget) -> Verdict {
        let Some(t) = self.tables(w, budget) else {
            return self.over_budget(w);
        };
        let b = self.basis.len();
        let mut step = 0;
        for u in 0..b {
            for v in 0..b {
                match Self::first_hit(self.hit(&t, u, v)) {
                    Some(n) => step = step.max(n),
                    None => {
                        let s = format!("{}: f^n(U) misses V for every n >= 1", self.pair_label(u, v));
                        return self.negative(w, Witness::text(s).with_cycles(self.cycle_lengths()));
                    }
                }
            }
        }
        Verdict::holds(
            w.definitive,
            Witness::text(format!("every pair of basis sets meets within n <= {step}")).with_step(step),
        )
    }

    fn z_transitive(&self, w: &Window, budget: &Budget) -> Verdict {
        let Some(t) = self.tables(w, budget) else {
            return self.over_budget(w);
        };
        let b = self.basis.len();
        for u in 0..b {
            for v in u + 1..b {
                let ok = !self.basis[u].is_disjoint(&self.basis[v])
                    || Self::first_hit(self.hit(&t, u, v)).is_some()
                    || Self::first_hit(self.hit(&t, v, u)).is_some();
                if !ok {
                    let s = format!(
                        "{}: disjoint, and neither reaches the other forward or backward",
                        self.pair_label(u, v)
                    );
                    return self.negative(w, Witness::text(s).with_cycles(self.cycle_lengths()));
                }
            }
        }
        Verdict::holds(w.definitive, Witness::text("every pair of basis sets meets at some integer time"))
    }

    fn weakly_mixing(&self, w: &Window, budget: &Budget) -> Verdict {
        let Some(t) = self.tables(w, budget) else {
            return self.over_budget(w);
        };
        let b = self.basis.len();
        let mut classes: HashMap<&[u32], usize> = HashMap::new();
        let mut reps: Vec<&FixedBitSet> = Vec::new();
        let class_of: Vec<usize> = t.hits[..b * b]
            .iter()
            .map(|bits| {
                *classes.entry(bits.as_slice()).or_insert_with(|| {
                    reps.push(bits);
                    reps.len() - 1
                })
            })
            .collect();
        let c = reps.len();
        if (c as u64).pow(2) > budget.work_cap {
            return self.over_budget(w);
        }
        let mut bad = vec![false; c];
        for i in 0..c {
            for j in i..c {
                if reps[i].is_disjoint(reps[j]) {
                    bad[i] = true;
                    bad[j] = true;
                }
            }
        }
        if let Some(p1) = (0..b * b).find(|&p| bad[class_of[p]]) {
            let p2 = (0..b * b).find(|&p| reps[class_of[p1]].is_disjoint(reps[class_of[p]])).expect("partner");
            let s = format!(
                "U1={}, V1={}, U2={}, V2={}: no common hitting time",
                self.basis_label(p1 / b),
                self.basis_label(p1 % b),
                self.basis_label(p2 / b),
                self.basis_label(p2 % b)
            );
            return self.negative(w, Witness::text(s).with_cycles(self.cycle_lengths()));
        }
        Verdict::holds(w.definitive, Witness::text(format!("all {c} distinct hitting-time sets pairwise intersect")))
    }

    fn mixing(&self, w: &Window, budget: &Budget) -> Verdict {
        let Some(t) = self.tables(w, budget) else {
            return self.over_budget(w);
        };
        let b = self.basis.len();
        let tail = w.tail_start();
        let mut step = 0;
        for u in 0..b {
            for v in 0..b {
                let bits = self.hit(&t, u, v);
                if let Some(miss) = (tail..=w.end).rev().find(|&n| !bits.contains(n)) {
                    if w.complete {
                        let s = format!("{}: misses at n = {miss} + k*{}", self.pair_label(u, v), w.period.unwrap());
                        return Verdict::fails(w.definitive, Witness::text(s).with_cycles(self.cycle_lengths()));
                    }
                    return Verdict::unknown(format!("no uniform tail within horizon {}", w.end));
                }
                let first = (1..tail).rev().find(|&n| !bits.contains(n)).map_or(1, |n| n + 1);
                step = step.max(first);
            }
        }
        Verdict::holds(
            w.definitive,
            Witness::text(format!("f^n(U) meets V for all n >= {step}, all basis pairs")).with_step(step),
        )
    }

    fn totally_transitive(&self, w: &Window, budget: &Budget) -> Verdict {
        let Some(t) = self.tables(w, budget) else {
            return self.over_budget(w);
        };
        let b = self.basis.len();
        let kmax = if w.complete { w.t0 + w.period.unwrap() - 1 } else { w.end.min(8) };
        let work = (kmax as u64) * (b as u64).pow(2) * (w.end as u64);
        if work > budget.work_cap {
            return self.over_budget(w);
        }
        for k in 1..=kmax {
            let mmax = if w.complete { w.end } else { w.end / k };
            for u in 0..b {
                for v in 0..b {
                    let bits = self.hit(&t, u, v);
                    let ok = (1..=mmax).any(|m| w.reduce(k * m).is_some_and(|n| bits.contains(n)));
                    if !ok {
                        let s = format!("f^{k} is not transitive: {}", self.pair_label(u, v));
                        return self.negative(w, Witness::text(s).with_step(k).with_cycles(self.cycle_lengths()));
                    }
                }
            }
        }
        let note = if w.complete { "every power" } else { "powers up to 8" };
        Verdict::holds(w.definitive, Witness::text(format!("{note} of f is transitive")).with_step(kmax))
    }

    fn reach(&self, t: &Tables, u: usize, upto: usize) -> (FixedBitSet, Option<usize>) {
        let mut seen = FixedBitSet::with_capacity(self.len());
        let mut full_at = None;
        for n in 1..=upto {
            for &y in &t.traj[u][n] {
                seen.insert(y as usize);
            }
            if full_at.is_none() && seen.count_ones(..) == self.len() {
                full_at = Some(n);
            }
        }
        (seen, full_at)
    }

    fn strongly_transitive(&self, w: &Window, budget: &Budget) -> Verdict {
        let Some(t) = self.tables(w, budget) else {
            return self.over_budget(w);
        };
        let mut step = 0;
        for u in 0..self.basis.len() {
            let (seen, full) = self.reach(&t, u, w.end);
            match full {
                Some(m) => step = step.max(m),
                None => {
                    let missing = (0..self.len()).find(|&x| !seen.contains(x)).expect("missing point");
                    let s = format!("images of {} never cover {}", self.basis_label(u), self.label(missing));
                    return self.negative(w, Witness::text(s));
                }
            }
        }
        Verdict::holds(
            w.definitive,
            Witness::text(format!("f^1(U) ∪ … ∪ f^{step}(U) is the whole space for every basis set")).with_step(step),
        )
    }

    fn multi_transitive(&self, w: &Window, budget: &Budget) -> Verdict {
        let Some(t) = self.tables(w, budget) else {
            return self.over_budget(w);
        };
        let b = self.basis.len();
        for m in 1..=budget.m_max {
            let nmax = if w.complete { w.end } else { w.end / m };
            if nmax == 0 {
                return Verdict::unknown(format!("horizon {} too short for arity {m}", w.end));
            }
            // distinct hitting sets of f^i, i = 1..=m, over n in 1..=nmax
            let mut per_power: Vec<Vec<(FixedBitSet, usize)>> = Vec::new();
            for i in 1..=m {
                let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
                let mut list = Vec::new();
                for p in 0..b * b {
                    let bits = &t.hits[p];
                    let mut s = FixedBitSet::with_capacity(nmax + 1);
                    for n in 1..=nmax {
                        if w.reduce(i * n).is_some_and(|r| bits.contains(r)) {
                            s.insert(n);
                        }
                    }
                    if !seen.contains_key(s.as_slice()) {
                        seen.insert(s.as_slice().to_vec(), p);
                        list.push((s, p));
                    }
                }
                per_power.push(list);
            }
            let combos: u64 = per_power.iter().map(|l| l.len() as u64).product();
            if combos > budget.work_cap {
                return self.over_budget(w);
            }
            let mut choice = Vec::new();
            let all = {
                let mut full = FixedBitSet::with_capacity(nmax + 1);
                full.insert_range(1..nmax + 1);
                full
            };
            if let Some(bad) = empty_intersection(&per_power, 0, &all, &mut choice) {
                let pairs: Vec<String> = bad
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| format!("f^{}: {}", i + 1, self.pair_label(p / b, p % b)))
                    .collect();
                let s = format!("f×…×f^{m} is not transitive: {}", pairs.join("; "));
                return self.negative(w, Witness::text(s).with_step(m));
            }
        }
        Verdict::holds(false, Witness::text(format!("f×f^2×…×f^m transitive for m <= {}", budget.m_max)))
    }

    fn tt_plus_plus(&self, w: &Window, budget: &Budget) -> Verdict {
        let b = self.basis.len();
        let work = (b as u64).pow(2) * (w.end as u64) * (self.len() as u64);
        if work > budget.work_cap {
            return self.over_budget(w);
        }
        let tail = w.tail_start();
        for v in 0..b {
            // preimage trajectory of V
            let mut cur = FixedBitSet::with_capacity(self.len());
            for y in self.basis[v].iter() {
                cur.insert(y);
            }
            let mut pre_traj = Vec::with_capacity(w.end + 1);
            pre_traj.push(cur.clone());
            for _ in 1..=w.end {
                let mut pre = FixedBitSet::with_capacity(self.len());
                for x in 0..self.len() {
                    if cur.contains(self.map[x]) {
                        pre.insert(x);
                    }
                }
                cur = pre;
                pre_traj.push(cur.clone());
            }
            for u in 0..b {
                let late = (tail..=w.end).any(|n| self.basis[u].iter().any(|x| pre_traj[n].contains(x)));
                if !late {
                    let s = format!("{}: U ∩ f^-n(V) is empty for all large n", self.pair_label(u, v));
                    return self.negative(w, Witness::text(s).with_cycles(self.cycle_lengths()));
                }
            }
        }
        Verdict::holds(
            w.definitive,
            Witness::text(format!("U ∩ f^-n(V) ≠ ∅ for infinitely many n (recurring in [{tail}, {}])", w.end)),
        )
    }

    /// Whether the forward orbit of `x` (including `x`) meets every basis set within the window.
    fn orbit_dense(&self, x: usize, w: &Window) -> Result<(), usize> {
        let mut hit = vec![false; self.basis.len()];
        let mut y = x;
        for n in 0..=w.end {
            for &v in &self.member_of[y] {
                hit[v as usize] = true;
            }
            if n < w.end {
                y = self.map[y];
            }
        }
        match hit.iter().position(|h| !h) {
            Some(v) => Err(v),
            None => Ok(()),
        }
    }

    fn transitive_points(&self, w: &Window) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.orbit_dense(x, w).is_ok()).collect()
    }

    fn two_sided(&self, w: &Window, _budget: &Budget) -> Verdict {
        let mut seen = vec![false; self.len()];
        for (x, &y) in self.map.iter().enumerate() {
            if seen[y] {
                let other = (0..x).find(|&z| self.map[z] == y).expect("collision");
                let s =
                    format!("not injective: {} and {} both map to {}", self.label(other), self.label(x), self.label(y));
                return Verdict::fails(self.exact_backend, Witness::text(s));
            }
            seen[y] = true;
        }
        match self.transitive_points(w).first() {
            Some(&x) => Verdict::holds(
                w.definitive,
                Witness::text(format!("bijective, and the orbit of {} is dense", self.label(x))),
            ),
            None => self.negative(
                w,
                Witness::text("bijective but no forward orbit is dense").with_cycles(self.cycle_lengths()),
            ),
        }
    }

    fn has_interior(&self, s: &FixedBitSet, members: &[usize]) -> bool {
        if members.is_empty() {
            return false;
        }
        if self.discrete {
            return true;
        }
        members.iter().any(|&y| self.member_of[y].iter().any(|&b| self.basis[b as usize].iter().all(|z| s.contains(z))))
    }

    fn fully_exact(&self, w: &Window, budget: &Budget) -> Verdict {
        let Some(t) = self.tables(w, budget) else {
            return self.over_budget(w);
        };
        let b = self.basis.len();
        let mut step = 0;
        for u in 0..b {
            for v in u..b {
                let found = (1..=w.end).find(|&k| {
                    let mut s = FixedBitSet::with_capacity(self.len());
                    for &y in &t.traj[u][k] {
                        s.insert(y as usize);
                    }
                    let common: Vec<usize> =
                        t.traj[v][k].iter().map(|&y| y as usize).filter(|&y| s.contains(y)).collect();
                    let mut cs = FixedBitSet::with_capacity(self.len());
                    for &y in &common {
                        cs.insert(y);
                    }
                    self.has_interior(&cs, &common)
                });
                match found {
                    Some(k) => step = step.max(k),
                    None => {
                        let s = format!("{}: f^k(U) ∩ f^k(V) has empty interior for every k", self.pair_label(u, v));
                        return self.negative(w, Witness::text(s).with_cycles(self.cycle_lengths()));
                    }
                }
            }
        }
        Verdict::holds(
            w.definitive,
            Witness::text(format!("f^k(U) ∩ f^k(V) has interior for some k <= {step}")).with_step(step),
        )
    }

    /// Orbit of `y` at times `times`, checked for density of the tuple
    /// `(f^n y, f^2n y, …, f^mn y)` in the m-fold product basis.
    fn tuple_orbit_dense(&self, y: usize, m: usize, times: &[usize]) -> bool {
        let b = self.basis.len();
        let cells = b.pow(m as u32);
        let mut covered = FixedBitSet::with_capacity(cells);
        let mut count = 0;
        for &n in times {
            let pts: Vec<usize> = (1..=m).map(|i| self.iterate(y, i * n)).collect();
            let mut idx = vec![0usize; m];
            let lists: Vec<&Vec<u32>> = pts.iter().map(|&p| &self.member_of[p]).collect();
            if lists.iter().any(|l| l.is_empty()) {
                continue;
            }
            loop {
                let cell = (0..m).fold(0usize, |acc, i| acc * b + lists[i][idx[i]] as usize);
                if !covered.put(cell) {
                    count += 1;
                    if count == cells {
                        return true;
                    }
                }
                let mut i = m;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    idx[i] += 1;
                    if idx[i] < lists[i].len() {
                        break;
                    }
                    idx[i] = 0;
                    if i == 0 {
                        i = usize::MAX;
                        break;
                    }
                }
                if i == usize::MAX {
                    break;
                }
            }
        }
        false
    }

    /// A basis set containing no point whose tuple orbit along `times` is dense.
    fn delta_gap(&self, m: usize, times: &[usize], budget: &Budget) -> Result<Option<usize>, ()> {
        let b = self.basis.len() as u64;
        let cells = b.checked_pow(m as u32).ok_or(())?;
        let work = cells.saturating_add(times.len() as u64 * (m as u64) * 4).saturating_mul(self.len() as u64);
        if cells > 1 << 22 || work > budget.work_cap {
            return Err(());
        }
        let mut good: Vec<Option<bool>> = vec![None; self.len()];
        for (u, set) in self.basis.iter().enumerate() {
            let mut any = false;
            for y in set.iter() {
                let g = *good[y].get_or_insert_with(|| self.tuple_orbit_dense(y, m, times));
                if g {
                    any = true;
                    break;
                }
            }
            if !any {
                return Ok(Some(u));
            }
        }
        Ok(None)
    }

    fn delta_transitive(&self, w: &Window, budget: &Budget) -> Verdict {
        for m in 1..=budget.m_max {
            let last = if w.complete { w.end } else { w.end / m };
            let times: Vec<usize> = (0..=last).collect();
            match self.delta_gap(m, &times, budget) {
                Err(()) => return self.over_budget(w),
                Ok(Some(u)) => {
                    let s = format!("m={m}: no point of {} has a dense diagonal orbit", self.basis_label(u));
                    return self.negative(w, Witness::text(s).with_step(m));
                }
                Ok(None) => {}
            }
        }
        Verdict::holds(false, Witness::text(format!("dense diagonal orbits for m <= {}", budget.m_max)))
    }

    fn delta_mixing(&self, w: &Window, budget: &Budget) -> Verdict {
        let mut steps: Vec<usize> = vec![1, 2, 3, 4];
        if let (true, Some(p)) = (w.complete, w.period) {
            if p > 4 {
                steps.push(p);
            }
        }
        for m in 1..=budget.m_max {
            for &b in &steps {
                for a in 0..b {
                    let jmax = if w.complete { w.end } else { w.end / (m * b) };
                    let times: Vec<usize> = (0..=jmax).map(|j| a + b * j).collect();
                    match self.delta_gap(m, &times, budget) {
                        Err(()) => return self.over_budget(w),
                        Ok(Some(u)) => {
                            let s = format!(
                                "m={m}, B={{{a} + {b}j}}: no point of {} has a dense diagonal orbit along B",
                                self.basis_label(u)
                            );
                            return self.negative(w, Witness::text(s).with_step(m));
                        }
                        Ok(None) => {}
                    }
                }
            }
        }
        Verdict::holds(
            false,
            Witness::text(format!("dense diagonal orbits along sampled progressions, m <= {}", budget.m_max)),
        )
    }

    fn accessible(&self, w: &Window, budget: &Budget) -> Verdict {
        let Some(t) = self.tables(w, budget) else {
            return self.over_budget(w);
        };
        let b = self.basis.len();
        let diameter = *self.metric.scale().last().expect("nonempty scale");
        let eps = budget.epsilons(diameter);
        let smallest = eps.last().copied();
        let mut step = 0;
        let mut work = 0u64;
        for u in 0..b {
            for v in u..b {
                let meet = (1..=w.end).find(|&n| {
                    let (a, c) = (&t.traj[u][n], &t.traj[v][n]);
                    work += (a.len() + c.len()) as u64;
                    let (mut i, mut j) = (0, 0);
                    while i < a.len() && j < c.len() {
                        match a[i].cmp(&c[j]) {
                            std::cmp::Ordering::Equal => return true,
                            std::cmp::Ordering::Less => i += 1,
                            std::cmp::Ordering::Greater => j += 1,
                        }
                    }
                    false
                });
                if work > budget.work_cap {
                    return Verdict::unknown(format!(
                        "image intersection search exceeds the work cap {} within horizon {}",
                        budget.work_cap, w.end
                    ));
                }
                match meet {
                    Some(n) => step = step.max(n),
                    None if w.complete => {
                        let s = format!(
                            "{}: images never meet, so no pair gets closer than the smallest positive distance",
                            self.pair_label(u, v)
                        );
                        return Verdict::fails(w.definitive, Witness::text(s));
                    }
                    None => {
                        // truncated backends accept a pair closer than every tolerance in the grid
                        let Some(e) = smallest else {
                            return self.negative(w, Witness::default());
                        };
                        let close = (1..=w.end).any(|n| {
                            let (a, c) = (&t.traj[u][n], &t.traj[v][n]);
                            work += (a.len() * c.len()) as u64 * self.rank_cost();
                            // ranks below `below` are exactly the distances under `e`
                            let below = self.metric.scale().partition_point(|d| *d < e) as u32;
                            work <= budget.work_cap
                                && a.iter()
                                    .any(|&x| c.iter().any(|&y| self.metric.rank(x as usize, y as usize) < below))
                        });
                        if work > budget.work_cap {
                            return Verdict::unknown(format!(
                                "distance search exceeds the work cap {} within horizon {}",
                                budget.work_cap, w.end
                            ));
                        }
                        if !close {
                            return Verdict::unknown(format!("no pair closer than {e} within horizon {}", w.end));
                        }
                    }
                }
            }
        }
        Verdict::holds(
            w.definitive,
            Witness::text(format!("f^n(U) and f^n(V) share a point for some n <= {step}, every basis pair"))
                .with_step(step),
        )
    }

    fn indecomposable(&self, w: &Window) -> Verdict {
        if !(self.discrete && w.complete) {
            return Verdict::unknown("invariant closed sets are only enumerated on discrete exact levels");
        }
        let cycles = &self.analysis.cycles;
        if cycles.len() == 1 {
            return Verdict::holds(
                w.definitive,
                Witness::text("single cycle: every invariant set contains it").with_cycles(self.cycle_lengths()),
            );
        }
        let show = |c: &Vec<usize>| {
            let v: Vec<String> = c.iter().take(6).map(|&x| self.label(x)).collect();
            format!("{{{}}}", v.join(","))
        };
        let s = format!("disjoint invariant sets A={} and B={}", show(&cycles[0]), show(&cycles[1]));
        Verdict::fails(w.definitive, Witness::text(s).with_cycles(self.cycle_lengths()))
    }

    fn minimal(&self, w: &Window) -> Verdict {
        for x in 0..self.len() {
            if let Err(v) = self.orbit_dense(x, w) {
                let s = format!("orbit of {} misses {}", self.label(x), self.basis_label(v));
                return self.negative(w, Witness::text(s).with_cycles(self.cycle_lengths()));
            }
        }
        Verdict::holds(w.definitive, Witness::text("every orbit is dense").with_cycles(self.cycle_lengths()))
    }

    fn periodic_points_dense(&self) -> Result<(), usize> {
        match self.basis.iter().position(|b| !b.iter().any(|x| self.analysis.is_periodic(x))) {
            Some(u) => Err(u),
            None => Ok(()),
        }
    }

    fn f_system(&self, w: &Window, budget: &Budget) -> Verdict {
        let per = match self.periodic_points_dense() {
            Ok(()) => Verdict::holds(w.definitive, Witness::text("periodic points are dense")),
            Err(u) => Verdict::fails(
                w.definitive || self.exact_backend,
                Witness::text(format!("{} contains no periodic point", self.basis_label(u))),
            ),
        };
        if per.outcome() == super::Outcome::Fails {
            return per;
        }
        self.totally_transitive(w, budget).and(per)
    }

    fn touhey(&self, w: &Window) -> Verdict {
        let mut cycle_of = vec![usize::MAX; self.len()];
        for (c, cyc) in self.analysis.cycles.iter().enumerate() {
            for &x in cyc {
                cycle_of[x] = c;
            }
        }
        let nc = self.analysis.cycles.len();
        let meets: Vec<FixedBitSet> = self
            .basis
            .iter()
            .map(|b| {
                let mut s = FixedBitSet::with_capacity(nc);
                for x in b.iter().filter(|&x| cycle_of[x] != usize::MAX) {
                    s.insert(cycle_of[x]);
                }
                s
            })
            .collect();
        let b = self.basis.len();
        for u in 0..b {
            for v in 0..b {
                if meets[u].is_disjoint(&meets[v]) {
                    let s = format!("{}: no periodic point of U has an orbit point in V", self.pair_label(u, v));
                    return Verdict::fails(
                        w.definitive || self.exact_backend,
                        Witness::text(s).with_cycles(self.cycle_lengths()),
                    );
                }
            }
        }
        Verdict::holds(w.definitive, Witness::text("every U holds a periodic point whose cycle meets V"))
    }

    /// `min over basis sets U ∋ x` of `max over y ∈ U, n in the window` of `d(f^n x, f^n y)`.
    fn instability(&self, x: usize, w: &Window) -> Dist {
        let scale = self.metric.scale();
        let mut best = u32::MAX;
        for &u in &self.member_of[x] {
            let mut worst = 0;
            for y in self.basis[u as usize].iter() {
                let (mut a, mut c) = (x, y);
                for _ in 0..=w.end {
                    worst = worst.max(self.metric.rank(a, c));
                    a = self.map[a];
                    c = self.map[c];
                }
            }
            best = best.min(worst);
        }
        if best == u32::MAX {
            Dist::ZERO
        } else {
            scale[best as usize]
        }
    }

    fn martelli(&self, w: &Window, budget: &Budget) -> Verdict {
        let diameter = *self.metric.scale().last().expect("nonempty scale");
        let trans = self.transitive_points(w);
        if trans.is_empty() {
            return self.negative(w, Witness::text("no point has a dense orbit").with_cycles(self.cycle_lengths()));
        }
        for &x in &trans {
            let inst = self.instability(x, w);
            if inst.is_zero() {
                continue;
            }
            let delta = budget
                .deltas(diameter)
                .into_iter()
                .find(|d| d.arctan_upper() < inst)
                .unwrap_or_else(|| inst.half().min(Dist::ONE));
            let s = format!(
                "{} has a dense orbit and every basis neighbourhood separates by {inst} > arctan({delta})",
                self.label(x)
            );
            return Verdict::holds(w.definitive, Witness::text(s).with_delta(delta));
        }
        let s = format!("all {} dense-orbit points are stable: a basis neighbourhood never separates", trans.len());
        self.negative(w, Witness::text(s))
    }

    /// Points visited at times in `[tail_start, end]` whose basis sets are all revisited.
    pub fn omega_limit(&self, x: usize, budget: &Budget) -> PointSet {
        let w = self.window(budget);
        let mut late = vec![false; self.basis.len()];
        let mut y = self.iterate(x, w.tail_start());
        for _ in w.tail_start()..=w.end {
            for &v in &self.member_of[y] {
                late[v as usize] = true;
            }
            y = self.map[y];
        }
        (0..self.len()).filter(|&z| self.member_of[z].iter().all(|&v| late[v as usize])).collect()
    }

    /// Number of basis sets visited by the orbit of `x` at times in `[tail_start, end]`.
    fn late_coverage(&self, x: usize, w: &Window, seen: &mut FixedBitSet) -> usize {
        seen.clear();
        let mut y = self.iterate(x, w.tail_start());
        for _ in w.tail_start()..=w.end {
            for &v in &self.member_of[y] {
                seen.insert(v as usize);
            }
            y = self.map[y];
        }
        seen.count_ones(..)
    }

    fn dense_omega(&self, w: &Window) -> Verdict {
        // ω(x) = X iff the late orbit meets every basis set; on a complete
        // window ω(x) is the cycle x falls into, so periodic points suffice
        let analysis = self.analysis();
        let mut seen = FixedBitSet::with_capacity(self.basis.len());
        let found = (0..self.len())
            .filter(|&x| !w.complete || analysis.is_periodic(x))
            .find(|&x| self.late_coverage(x, w, &mut seen) == self.basis.len());
        match found {
            Some(x) => Verdict::holds(w.definitive, Witness::text(format!("ω({}) is the whole space", self.label(x)))),
            None => self
                .negative(w, Witness::text("every ω-limit set is a proper subset").with_cycles(self.cycle_lengths())),
        }
    }

    fn dense_transitive_points(&self, w: &Window) -> Verdict {
        let trans = self.transitive_points(w);
        let mut is_trans = vec![false; self.len()];
        for &x in &trans {
            is_trans[x] = true;
        }
        match self.basis.iter().position(|b| !b.iter().any(|x| is_trans[x])) {
            None => Verdict::holds(
                w.definitive,
                Witness::text(format!("{} transitive points meet every basis set", trans.len())),
            ),
            Some(u) => self.negative(
                w,
                Witness::text(format!("{} contains no transitive point", self.basis_label(u)))
                    .with_cycles(self.cycle_lengths()),
            ),
        }
    }

    /// `f × g` transitive, `g` the cyclic rotation of `k` points (`k = 1` is the one-point map).
    fn transitive_times(&self, k: usize, w: &Window, budget: &Budget) -> Verdict {
        let Some(t) = self.tables(w, budget) else {
            return self.over_budget(w);
        };
        let b = self.basis.len();
        let last = match (w.complete, w.period) {
            (true, Some(p)) => w.t0 + p.lcm(&k) - 1,
            _ => w.end,
        };
        for u in 0..b {
            for v in 0..b {
                let bits = self.hit(&t, u, v);
                for r in 0..k {
                    let ok = (1..=last).filter(|n| n % k == r).any(|n| w.reduce(n).is_some_and(|m| bits.contains(m)));
                    if !ok {
                        let s = format!("{}: no hitting time congruent to {r} mod {k}", self.pair_label(u, v));
                        return self.negative(w, Witness::text(s).with_cycles(self.cycle_lengths()));
                    }
                }
            }
        }
        Verdict::holds(w.definitive, Witness::text(format!("f × rot{k} is transitive")))
    }

    // ---- points ------------------------------------------------------------

    pub fn classify_point(&self, x: usize, kind: PointKind, budget: &Budget) -> Verdict {
        let w = self.window(budget);
        let definitive = w.definitive;
        match kind {
            PointKind::Periodic => {
                let s = format!(
                    "{}: transient {}, period {}",
                    self.label(x),
                    self.analysis.transient[x],
                    self.analysis.period[x]
                );
                if self.analysis.is_periodic(x) {
                    Verdict::holds(definitive, Witness::text(s).with_step(self.analysis.period[x]))
                } else {
                    Verdict::fails(definitive || self.exact_backend, Witness::text(s))
                }
            }
            PointKind::TransitivePoint => match self.orbit_dense(x, &w) {
                Ok(()) => Verdict::holds(definitive, Witness::text(format!("orbit of {} is dense", self.label(x)))),
                Err(v) => self
                    .negative(&w, Witness::text(format!("orbit of {} misses {}", self.label(x), self.basis_label(v)))),
            },
            PointKind::Recurrent => {
                for &u in &self.member_of[x] {
                    let ok = (1..=w.end).any(|m| self.basis[u as usize].contains(self.iterate(x, m)));
                    if !ok {
                        let s = format!("orbit of {} never returns to {}", self.label(x), self.basis_label(u as usize));
                        return self.negative(&w, Witness::text(s));
                    }
                }
                Verdict::holds(
                    definitive,
                    Witness::text(format!("{} returns to each basis neighbourhood", self.label(x))),
                )
            }
            PointKind::Nonwandering => {
                let Some(t) = self.tables(&w, budget) else {
                    return self.over_budget(&w);
                };
                for &u in &self.member_of[x] {
                    let u = u as usize;
                    if Self::first_hit(self.hit(&t, u, u)).is_none() {
                        let s = format!("{} is wandering", self.basis_label(u));
                        return self.negative(&w, Witness::text(s));
                    }
                }
                Verdict::holds(definitive, Witness::text(format!("{} is nonwandering", self.label(x))))
            }
            PointKind::QuasiPeriodic => {
                let (mmax, kmax) = if w.complete { (w.end, w.end + 1) } else { (w.end / 2, 2) };
                let mut step = 0;
                for &u in &self.member_of[x] {
                    let set = &self.basis[u as usize];
                    let found = (1..=mmax).find(|&m| {
                        (1..=kmax).all(|k| match w.reduce(k * m) {
                            Some(r) if w.complete => set.contains(self.iterate(x, r)),
                            _ => set.contains(self.iterate(x, k * m)),
                        })
                    });
                    match found {
                        Some(m) => step = step.max(m),
                        None => {
                            let s = format!(
                                "no m keeps every f^km({}) inside {}",
                                self.label(x),
                                self.basis_label(u as usize)
                            );
                            return self.negative(&w, Witness::text(s));
                        }
                    }
                }
                Verdict::holds(
                    definitive,
                    Witness::text(format!("{} returns along multiples of m <= {step}", self.label(x))).with_step(step),
                )
            }
        }
    }
}

/// Depth-first search for one hitting set per power with empty common intersection.
fn empty_intersection(
    per_power: &[Vec<(FixedBitSet, usize)>],
    depth: usize,
    acc: &FixedBitSet,
    choice: &mut Vec<usize>,
) -> Option<Vec<usize>> {
    if depth == per_power.len() {
        return (acc.count_ones(..) == 0).then(|| choice.clone());
    }
    for (set, rep) in &per_power[depth] {
        let mut next = acc.clone();
        next.intersect_with(set);
        choice.push(*rep);
        if let Some(found) = empty_intersection(per_power, depth + 1, &next, choice) {
            return Some(found);
        }
        choice.pop();
    }
    None
}

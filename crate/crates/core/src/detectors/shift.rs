//! Detection on the full shift and its symmetric products and suspension.
//!
//! Every basis set `U` has an entry time `N(U)` (its longest word, or the
//! cylinder length for the ball around the basepoint) after which `T^m(U)`
//! is the whole level. Verdicts are built from explicit preimages realising
//! that fact and are checked by evaluating memberships on the constructed
//! points.

use std::sync::{Arc, OnceLock};

use super::{Budget, HittingTimeSet, Level, PointKind, Property, Separation, Verdict, Witness};
use crate::dynsys::{stream_word_offset, ShiftPoint, ShiftSystem};
use crate::hyperspace::{for_each_combination, ShiftNSubset};
use crate::metric::Dist;

/// Basis pairs checked by evaluation before switching to an even sample.
const VERIFY_PAIRS: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ShiftBasisSet {
    Cylinder(Vec<u8>),
    /// `⟨[w_1], …, [w_k]⟩`; on the suspension level the words are pairwise non-nested.
    Vietoris(Vec<Vec<u8>>),
    /// Ball around the basepoint of the suspension.
    CollapsedBall,
}

fn word(w: &[u8]) -> String {
    w.iter().map(|a| char::from(b'0' + a)).collect()
}

impl std::fmt::Display for ShiftBasisSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShiftBasisSet::Cylinder(w) => write!(f, "[{}]", word(w)),
            ShiftBasisSet::Vietoris(parts) => {
                let p: Vec<String> = parts.iter().map(|w| format!("[{}]", word(w))).collect();
                write!(f, "<{}>", p.join(","))
            }
            ShiftBasisSet::CollapsedBall => write!(f, "B(F_X)"),
        }
    }
}

fn nested(a: &[u8], b: &[u8]) -> bool {
    a.starts_with(b) || b.starts_with(a)
}

#[derive(Clone, Debug)]
struct LemmaCheck {
    checked: usize,
    total: usize,
    failure: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ShiftLevel {
    system: Arc<ShiftSystem>,
    level: Level,
    n: usize,
    lemma: Arc<OnceLock<LemmaCheck>>,
}

impl ShiftLevel {
    pub fn new(system: Arc<ShiftSystem>, level: Level, n: usize) -> Self {
        ShiftLevel { system, level, n, lemma: Arc::new(OnceLock::new()) }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn system(&self) -> &ShiftSystem {
        &self.system
    }

    fn len_cap(&self) -> usize {
        self.system.cylinder_len
    }

    pub fn basis(&self) -> Vec<ShiftBasisSet> {
        let words = self.system.cylinders();
        match self.level {
            Level::Base => words.into_iter().map(ShiftBasisSet::Cylinder).collect(),
            Level::Product | Level::Suspension => {
                let suspension = self.level == Level::Suspension;
                let mut out = Vec::new();
                let lo = if suspension { 2 } else { 1 };
                for k in lo..=self.n.min(words.len()) {
                    for_each_combination(words.len(), k, |combo| {
                        let parts: Vec<Vec<u8>> = combo.iter().map(|&i| words[i].clone()).collect();
                        let disjoint = (0..k).all(|i| (i + 1..k).all(|j| !nested(&parts[i], &parts[j])));
                        if !suspension || disjoint {
                            out.push(ShiftBasisSet::Vietoris(parts));
                        }
                    });
                }
                if suspension {
                    out.push(ShiftBasisSet::CollapsedBall);
                }
                out
            }
        }
    }

    /// Membership of `A` (read as `q(A)` on the suspension level).
    pub fn contains(&self, set: &ShiftBasisSet, a: &ShiftNSubset) -> bool {
        match set {
            ShiftBasisSet::Cylinder(w) => a.len() == 1 && a.points()[0].starts_with(w),
            ShiftBasisSet::Vietoris(parts) => {
                if self.level == Level::Suspension && a.len() < 2 {
                    return false;
                }
                a.points().iter().all(|x| parts.iter().any(|w| x.starts_with(w)))
                    && parts.iter().all(|w| a.points().iter().any(|x| x.starts_with(w)))
            }
            ShiftBasisSet::CollapsedBall => a.chebyshev_radius() < ShiftSystem::cylinder_radius(self.len_cap()),
        }
    }

    /// Distance on this level: Hausdorff on the base and product, `ρ` on the suspension.
    pub fn dist(&self, a: &ShiftNSubset, b: &ShiftNSubset) -> Dist {
        let h = a.hausdorff(b);
        if self.level != Level::Suspension {
            return h;
        }
        match (a.len() == 1, b.len() == 1) {
            (true, true) => Dist::ZERO,
            (true, false) => b.chebyshev_radius(),
            (false, true) => a.chebyshev_radius(),
            (false, false) => a.chebyshev_radius().min(h).max(b.chebyshev_radius().min(h)),
        }
    }

    fn prefixes(&self, set: &ShiftBasisSet) -> Vec<Vec<u8>> {
        match set {
            ShiftBasisSet::Cylinder(w) => vec![w.clone()],
            ShiftBasisSet::Vietoris(parts) => parts.clone(),
            ShiftBasisSet::CollapsedBall => vec![vec![0; self.len_cap()]],
        }
    }

    /// Time after which `T^m(U)` is the whole level.
    pub fn entry_time(&self, set: &ShiftBasisSet) -> usize {
        self.prefixes(set).iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Some element of `V`.
    pub fn sample(&self, set: &ShiftBasisSet) -> ShiftNSubset {
        match set {
            ShiftBasisSet::CollapsedBall => ShiftNSubset::new([ShiftPoint::constant(0)]),
            _ => ShiftNSubset::new(self.prefixes(set).iter().map(|w| ShiftPoint::constant(0).prepend(w))),
        }
    }

    /// `A ∈ U` with `T^m(A) = target`, for `m >= entry_time(U)` and `target` of
    /// at most `n` points (a single point on the base level).
    pub fn preimage_witness(&self, set: &ShiftBasisSet, target: &ShiftNSubset, m: usize) -> ShiftNSubset {
        let pre = self.prefixes(set);
        let tgt = target.points();
        let count = pre.len().max(tgt.len());
        ShiftNSubset::new((0..count).map(|i| {
            let mut w = pre[i.min(pre.len() - 1)].clone();
            w.resize(m, 0);
            tgt[i.min(tgt.len() - 1)].prepend(&w)
        }))
    }

    /// A periodic `A ∈ U` with `T^k(A) ∈ V`; returns `(A, k, period)`.
    pub fn periodic_witness(&self, u: &ShiftBasisSet, v: &ShiftBasisSet) -> (ShiftNSubset, usize, usize) {
        let pu = self.prefixes(u);
        let pv = self.prefixes(v);
        let k = pu.iter().map(Vec::len).max().unwrap_or(0);
        let lv = pv.iter().map(Vec::len).max().unwrap_or(0);
        let count = pu.len().max(pv.len());
        let a = ShiftNSubset::new((0..count).map(|i| {
            let mut w = pu[i.min(pu.len() - 1)].clone();
            w.resize(k, 0);
            w.extend_from_slice(&pv[i.min(pv.len() - 1)]);
            w.resize(k + lv, 0);
            ShiftPoint::periodic(&w)
        }));
        (a, k, k + lv)
    }

    fn pairs_to_check(&self, total: usize) -> impl Iterator<Item = usize> {
        let stride = total.div_ceil(VERIFY_PAIRS).max(1);
        (0..total).step_by(stride)
    }

    /// Evaluates `A ∈ U`, `T^m(A) ∈ V` for the constructed preimages at `m = N(U)` and `N(U) + 1`.
    fn lemma(&self) -> &LemmaCheck {
        self.lemma.get_or_init(|| {
            let basis = self.basis();
            let b = basis.len();
            let total = b * b;
            let mut checked = 0;
            for p in self.pairs_to_check(total) {
                let (u, v) = (&basis[p / b], &basis[p % b]);
                let target = self.sample(v);
                for m in [self.entry_time(u), self.entry_time(u) + 1] {
                    let a = self.preimage_witness(u, &target, m);
                    if a.len() > self.n || !self.contains(u, &a) || !self.contains(v, &a.shift_by(m)) {
                        return LemmaCheck {
                            checked,
                            total,
                            failure: Some(format!("construction failed for U={u}, V={v}, m={m}")),
                        };
                    }
                }
                checked += 1;
            }
            LemmaCheck { checked, total, failure: None }
        })
    }

    fn lemma_verdict(&self, summary: String, step: usize) -> Verdict {
        let l = self.lemma();
        match &l.failure {
            Some(f) => Verdict::unknown(f.clone()),
            None => Verdict::holds(
                true,
                Witness::text(format!(
                    "{summary} (constructed preimages evaluated on {} of {} basis pairs)",
                    l.checked, l.total
                ))
                .with_step(step),
            ),
        }
    }

    fn max_entry(&self) -> usize {
        self.len_cap()
    }

    /// Exact hitting times between two cylinders of the base level.
    pub fn hitting_times(&self, u: &[u8], v: &[u8]) -> HittingTimeSet {
        let offset = u.len().max(1);
        let transient = (1..u.len()).filter(|&n| nested(&u[n..], v)).collect();
        HittingTimeSet::Eventual { transient, offset, period: 1, residues: vec![offset] }
    }

    pub fn detect(&self, property: Property, _budget: &Budget) -> Verdict {
        use Property::*;
        let l = self.max_entry();
        match property {
            Transitive => self.lemma_verdict(format!("T^m(U) meets V for every m >= N(U), N(U) <= {l}"), l),
            ZTransitive => self.lemma_verdict(format!("forward hitting at m = N(U) <= {l}"), l),
            Mixing => self.lemma_verdict(format!("T^m(U) is the whole level for m >= {l}"), l),
            WeaklyMixing => self.lemma_verdict(format!("common hitting time m = {l} for any two pairs"), l),
            TotallyTransitive => self.lemma_verdict(format!("T^(k·j) hits once k·j >= {l}"), l),
            TtPlusPlus => self.lemma_verdict(format!("U ∩ T^-m(V) ≠ ∅ for all m >= {l}"), l),
            StronglyTransitive => self.lemma_verdict(format!("T^1(U) ∪ … ∪ T^{l}(U) is the whole level"), l),
            MultiTransitive => {
                self.lemma_verdict(format!("n = {l} serves all powers T^n, …, T^mn at once, every m"), l)
            }
            FullyExact => self.lemma_verdict(format!("T^{l}(U) ∩ T^{l}(V) is the whole level"), l),
            Indecomposable => self.lemma_verdict(
                "an invariant closed set with interior contains some T^N(U), the whole level".to_string(),
                l,
            ),
            TransitiveTimesPoint | TransitiveTimesRot2 => {
                self.lemma_verdict(format!("hitting times contain every m >= {l}, both parities"), l)
            }
            Sensitive | CofinitelySensitive | MultiSensitive => self.sensitivity(property),
            Accessible => self.accessible(),
            Touhey => self.touhey(),
            FSystem => self.f_system(),
            Martelli => self.martelli(),
            Minimal => self.minimal(),
            TwoSided => self.two_sided(),
            DenseOmega | DenseTransitivePoints if self.level == Level::Base => self.base_dense(property),
            DenseOmega | DenseTransitivePoints => {
                Verdict::unknown("no finitely described point with a dense orbit on this level")
            }
            DeltaTransitive | DeltaMixing => {
                Verdict::unknown("diagonal orbits of infinite sequences are not decided on the shift")
            }
        }
    }

    fn spread_targets(&self) -> (ShiftNSubset, ShiftNSubset) {
        let zero = ShiftPoint::constant(0);
        let one = ShiftPoint::constant(1);
        match self.level {
            Level::Suspension => (ShiftNSubset::new([zero.clone(), one]), ShiftNSubset::new([zero])),
            _ => (ShiftNSubset::new([zero]), ShiftNSubset::new([one])),
        }
    }

    fn sensitivity(&self, property: Property) -> Verdict {
        let delta = Dist::new(1, 2);
        let (t1, t2) = self.spread_targets();
        let basis = self.basis();
        let l = self.max_entry();
        let mut seps = Vec::new();
        for u in &basis {
            let times = match property {
                Property::Sensitive => vec![self.entry_time(u)],
                Property::CofinitelySensitive => vec![l, l + 1, l + 2],
                _ => vec![l],
            };
            for m in times {
                let a = self.preimage_witness(u, &t1, m);
                let b = self.preimage_witness(u, &t2, m);
                let d = self.dist(&a.shift_by(m), &b.shift_by(m));
                if !(self.contains(u, &a) && self.contains(u, &b) && d > delta) {
                    return Verdict::unknown(format!("separating construction failed for {u} at m={m}"));
                }
                if seps.len() < 4 {
                    seps.push(Separation { basis_set: u.to_string(), x: show(&a), y: show(&b), n: m, distance: d });
                }
            }
        }
        let summary = match property {
            Property::Sensitive => {
                format!("every basis set splits to distance 1 > {delta} at m = N(U) <= {l}")
            }
            Property::CofinitelySensitive => format!("splitting holds at every m >= {l}"),
            _ => format!("all basis sets split simultaneously at m = {l}"),
        };
        let mut w = Witness::text(summary).with_delta(delta).with_step(l);
        w.separations = seps;
        Verdict::holds(true, w)
    }

    fn accessible(&self) -> Verdict {
        let basis = self.basis();
        let l = self.max_entry();
        let target = self.sample(&basis[0]);
        for (i, u) in basis.iter().enumerate().step_by(basis.len().div_ceil(2_000).max(1)) {
            let v = &basis[(i * 7 + 3) % basis.len()];
            let a = self.preimage_witness(u, &target, l);
            let b = self.preimage_witness(v, &target, l);
            if !(self.contains(u, &a) && self.contains(v, &b) && self.dist(&a.shift_by(l), &b.shift_by(l)).is_zero()) {
                return Verdict::unknown(format!("accessibility construction failed for {u}, {v}"));
            }
        }
        Verdict::holds(
            true,
            Witness::text(format!("points of U and V with identical images after m = {l}: distance 0 < every ε"))
                .with_step(l),
        )
    }

    fn touhey_check(&self, same: bool) -> Result<usize, String> {
        let basis = self.basis();
        let b = basis.len();
        let mut checked = 0;
        let pairs: Vec<usize> =
            if same { (0..b).map(|u| u * b + u).collect() } else { self.pairs_to_check(b * b).collect() };
        for p in pairs {
            let (u, v) = (&basis[p / b], &basis[p % b]);
            let (a, k, period) = self.periodic_witness(u, v);
            let periodic = a.shift_by(period) == a;
            if !(a.len() <= self.n && periodic && self.contains(u, &a) && self.contains(v, &a.shift_by(k))) {
                return Err(format!("periodic construction failed for U={u}, V={v}"));
            }
            checked += 1;
        }
        Ok(checked)
    }

    fn touhey(&self) -> Verdict {
        match self.touhey_check(false) {
            Ok(c) => Verdict::holds(
                true,
                Witness::text(format!(
                    "periodic A = {{(u_i v_i)^∞}} in U reaches V after |u|; evaluated on {c} basis pairs"
                )),
            ),
            Err(e) => Verdict::unknown(e),
        }
    }

    fn f_system(&self) -> Verdict {
        let per = match self.touhey_check(true) {
            Ok(c) => Verdict::holds(true, Witness::text(format!("periodic points in all {c} basis sets"))),
            Err(e) => Verdict::unknown(e),
        };
        self.detect(Property::TotallyTransitive, &Budget::default()).and(per)
    }

    /// The enumeration stream: dense orbit, and every prefix neighbourhood splits to distance 1.
    fn martelli(&self) -> Verdict {
        if self.level != Level::Base {
            return Verdict::unknown("no finitely described point with a dense orbit on this level");
        }
        let s = self.system.symbols;
        let e = ShiftPoint::stream(s);
        for w in self.system.cylinders() {
            let at = stream_word_offset(s, &w) as usize;
            if !e.shift_by(at).starts_with(&w) {
                return Verdict::unknown(format!("stream offset check failed for {}", word(&w)));
            }
        }
        let delta = Dist::new(1, 2);
        for k in 1..=self.len_cap() {
            let mut p = e.prefix(k);
            p.push((e.symbol(k) + 1) % s);
            let y = e.shift_by(k + 1).prepend(&p);
            let d = e.shift_by(k).dist(&y.shift_by(k));
            if !(y.starts_with(&e.prefix(k)) && d > delta.arctan_upper()) {
                return Verdict::unknown("instability check failed");
            }
        }
        Verdict::holds(
            true,
            Witness::text(format!(
                "the enumeration stream E visits every cylinder; flipping symbol k of E stays in [E_0..E_k-1] and splits to 1 > arctan({delta}) at step k"
            ))
            .with_delta(delta),
        )
    }

    fn fixed_point(&self) -> (ShiftNSubset, ShiftBasisSet) {
        let zero = ShiftNSubset::new([ShiftPoint::constant(0)]);
        let missed = match self.level {
            Level::Base => ShiftBasisSet::Cylinder(vec![1]),
            Level::Product => ShiftBasisSet::Vietoris(vec![vec![1]]),
            Level::Suspension => ShiftBasisSet::Vietoris(vec![vec![0], vec![1]]),
        };
        (zero, missed)
    }

    fn minimal(&self) -> Verdict {
        let (fixed, missed) = self.fixed_point();
        if fixed.shift_by(1) != fixed || self.contains(&missed, &fixed) {
            return Verdict::unknown("fixed-point check failed");
        }
        Verdict::fails(true, Witness::text(format!("{} is fixed and never enters {missed}", show(&fixed))))
    }

    fn two_sided(&self) -> Verdict {
        let (a, b) = match self.level {
            Level::Suspension => (
                ShiftNSubset::new([ShiftPoint::constant(0), ShiftPoint::eventual(&[1], &[0])]),
                ShiftNSubset::new([ShiftPoint::constant(0)]),
            ),
            _ => (ShiftNSubset::new([ShiftPoint::eventual(&[1], &[0])]), ShiftNSubset::new([ShiftPoint::constant(0)])),
        };
        let same = self.dist(&a.shift_by(1), &b.shift_by(1)).is_zero() && !self.dist(&a, &b).is_zero();
        if !same {
            return Verdict::unknown("non-injectivity check failed");
        }
        Verdict::fails(true, Witness::text(format!("not injective: {} and {} have the same image", show(&a), show(&b))))
    }

    fn base_dense(&self, property: Property) -> Verdict {
        let s = self.system.symbols;
        let e = ShiftPoint::stream(s);
        for w in self.system.cylinders() {
            let x = e.prepend(&w);
            if !x.starts_with(&w) {
                return Verdict::unknown("prefix check failed");
            }
            // every word recurs in E past any offset: it begins the listing of w·0^j for each j
            let late = stream_word_offset(s, &[w.clone(), vec![0; 3]].concat()) as usize;
            if !e.shift_by(late).starts_with(&w) {
                return Verdict::unknown("recurrence check failed");
            }
        }
        let summary = match property {
            Property::DenseOmega => "every cylinder recurs in E at arbitrarily late times, so ω(E) is the whole space",
            _ => "w·E is a transitive point inside each cylinder [w]",
        };
        Verdict::holds(true, Witness::text(summary))
    }

    /// Points of the orbits of the eventually periodic members of `a`.
    fn eventual_orbit(a: &ShiftNSubset) -> Vec<ShiftPoint> {
        let mut out = Vec::new();
        for x in a.points() {
            if let ShiftPoint::Eventual { pre, per } = x {
                for j in 0..pre.len() + per.len() {
                    out.push(x.shift_by(j));
                }
            }
        }
        out
    }

    /// Up to `count` pairwise non-nested cylinders avoiding every point of `orbit`.
    fn avoiding_words(&self, orbit: &[ShiftPoint], count: usize) -> Option<Vec<Vec<u8>>> {
        let words: Vec<Vec<u8>> =
            self.system.cylinders().into_iter().filter(|w| !orbit.iter().any(|x| x.starts_with(w))).collect();
        let mut chosen: Vec<Vec<u8>> = Vec::new();
        for w in words {
            if chosen.iter().all(|c| !nested(c, &w)) {
                chosen.push(w);
                if chosen.len() == count {
                    return Some(chosen);
                }
            }
        }
        None
    }

    pub fn classify(&self, a: &ShiftNSubset, kind: PointKind) -> Verdict {
        let collapsed = self.level == Level::Suspension && a.len() == 1;
        let all_eventual = a.points().iter().all(ShiftPoint::is_eventually_periodic);
        let all_periodic = a.points().iter().all(|x| matches!(x, ShiftPoint::Eventual { pre, .. } if pre.is_empty()));
        let label = if collapsed { "F_X".to_string() } else { show(a) };
        match kind {
            PointKind::Nonwandering => {
                self.lemma_verdict(format!("{label}: every neighbourhood returns (mixing)"), self.max_entry())
            }
            PointKind::Periodic | PointKind::QuasiPeriodic | PointKind::Recurrent => {
                if collapsed {
                    return Verdict::holds(true, Witness::text("F_X is fixed").with_step(1));
                }
                if all_periodic {
                    return Verdict::holds(true, Witness::text(format!("{label} is periodic")));
                }
                if kind == PointKind::Periodic || all_eventual {
                    // a finite orbit returns near its start only by returning to it
                    return Verdict::fails(
                        true,
                        Witness::text(format!("{label} has a finite orbit and is not periodic")),
                    );
                }
                if kind == PointKind::Recurrent && a.len() == 1 {
                    return Verdict::holds(
                        true,
                        Witness::text(format!("{label} has a dense orbit in a perfect space")),
                    );
                }
                Verdict::unknown(format!("{kind} is not decided for {label}"))
            }
            PointKind::TransitivePoint => self.classify_transitive(a, &label, collapsed),
        }
    }

    fn classify_transitive(&self, a: &ShiftNSubset, label: &str, collapsed: bool) -> Verdict {
        let orbit = Self::eventual_orbit(a);
        match self.level {
            Level::Base => {
                if orbit.is_empty() {
                    return Verdict::holds(true, Witness::text(format!("{label} is a tail of the enumeration stream")));
                }
                match self.avoiding_words(&orbit, 1) {
                    Some(w) => Verdict::fails(
                        true,
                        Witness::text(format!("orbit of {label} is finite and misses [{}]", word(&w[0]))),
                    ),
                    None => Verdict::unknown("no cylinder avoids the orbit at this resolution"),
                }
            }
            _ if a.len() == 1 => {
                let missed = ShiftBasisSet::Vietoris(vec![vec![0], vec![1]]);
                let why = if collapsed { "F_X is fixed" } else { "singletons stay singletons" };
                Verdict::fails(true, Witness::text(format!("{why}; the orbit of {label} never enters {missed}")))
            }
            _ if orbit.is_empty() => Verdict::unknown(format!("orbit of {label} under T is not decided")),
            level => {
                let need = if level == Level::Suspension { 2 } else { 1 };
                match self.avoiding_words(&orbit, need) {
                    Some(ws) => {
                        let missed = ShiftBasisSet::Vietoris(ws);
                        Verdict::fails(
                            true,
                            Witness::text(format!(
                                "every iterate of {label} keeps a point of a finite orbit, so it never enters {missed}"
                            )),
                        )
                    }
                    None => Verdict::unknown("no cylinders avoid the finite orbit at this resolution"),
                }
            }
        }
    }

    /// Finitely described elements of `F_n` used for pointwise statements.
    pub fn sample_subsets(&self) -> Vec<ShiftNSubset> {
        let z = ShiftPoint::constant(0);
        let o = ShiftPoint::constant(1);
        let e = ShiftPoint::stream(self.system.symbols);
        let mut out = vec![
            ShiftNSubset::new([z.clone()]),
            ShiftNSubset::new([ShiftPoint::periodic(&[0, 1])]),
            ShiftNSubset::new([ShiftPoint::eventual(&[0], &[1])]),
            ShiftNSubset::new([e.clone()]),
        ];
        if self.n >= 2 {
            out.extend([
                ShiftNSubset::new([z.clone(), o]),
                ShiftNSubset::new([ShiftPoint::periodic(&[0, 1]), ShiftPoint::periodic(&[1, 0])]),
                ShiftNSubset::new([z.clone(), ShiftPoint::eventual(&[1], &[0])]),
                ShiftNSubset::new([e, z]),
            ]);
        }
        out
    }
}

fn show(a: &ShiftNSubset) -> String {
    let p: Vec<String> = a.points().iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", p.join(","))
}

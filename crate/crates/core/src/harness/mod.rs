//! Theorem table, system catalog, suite runner, exhaustive small-map oracle
//! and report emission.
//!
//! Every arrow of every theorem is checked on every requested (system, n).
//! A counterexample needs a definitive Holds for the premise and a definitive
//! Fails for the conclusion; anything weaker is reported inconclusive.

mod catalog;
mod config;
mod report;
mod selftest;
mod theorems;

use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

pub use catalog::{all_endomaps, catalog_system, cycle_map, endomap_name, DEFAULT_CATALOG, SHIFT_CYLINDER_LEN};
pub use config::{catalog_names, parse_list, HarnessConfig};
pub use report::{
    emit_report, ArrowRecord, CheckResult, EnumerationSummary, Report, ReportFormat, Status, REPORT_VERSION,
};
pub use selftest::{metric_selftest, SelftestCheck, SELFTEST_POINT_LIMIT, SEMICONJUGACY_STEPS};
pub use theorems::{
    parse_anchor, select_theorems, theorem_table, Arrow, ArrowKind, Claim, Hypotheses, Statement, TheoremSpec,
};

use crate::detectors::{Budget, Level, SubsetRef, SystemLevels, Verdict};
use crate::dynsys::{build_system, DynError, System};

/// Largest number of `A ∈ F_n(X)` examined per pointwise theorem and system.
pub const POINTWISE_LIMIT: usize = 512;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HarnessError {
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("unknown theorem `{0}`")]
    UnknownTheorem(String),
    #[error("unknown report format `{0}`")]
    UnknownFormat(String),
    #[error("malformed anchor {0}")]
    Anchor(String),
    #[error("config: {0}")]
    Config(String),
    #[error("report parse: {0}")]
    Parse(String),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("point count {0} is outside 1..=4")]
    PointCount(usize),
    #[error(transparent)]
    System(#[from] DynError),
}

/// Outcome of one arrow on one pair of verdicts.
pub fn arrow_status(kind: ArrowKind, premise: &Verdict, conclusion: &Verdict) -> Status {
    let exhibited = premise.holds_definitively() && conclusion.fails_definitively();
    match kind {
        ArrowKind::Implies if exhibited => Status::Counterexample,
        ArrowKind::Implies if premise.fails_definitively() || conclusion.holds_definitively() => Status::Consistent,
        ArrowKind::Implies => Status::Inconclusive,
        ArrowKind::NotImplies if exhibited => Status::Witnessed,
        ArrowKind::NotImplies => Status::Unwitnessed,
    }
}

fn explain(status: Status, premise: &Verdict, conclusion: &Verdict) -> Option<String> {
    match status {
        Status::Counterexample | Status::Witnessed => Some(format!("premise {premise}; conclusion {conclusion}")),
        Status::Consistent if premise.fails_definitively() => Some(format!("premise {premise}")),
        Status::Consistent => Some(format!("conclusion {conclusion}")),
        Status::Inconclusive | Status::Unwitnessed => Some(format!("premise {premise}; conclusion {conclusion}")),
        Status::HypothesisNotMet => None,
    }
}

fn is_bijection(system: &System) -> bool {
    system.as_finite().is_some_and(|s| s.map.is_bijection())
}

/// Why `system` at arity `n` lies outside the hypotheses of this arrow, if it does.
fn hypothesis_gap(theorem: &TheoremSpec, arrow: &Arrow, system: &System, n: usize) -> Option<String> {
    let levels = [theorem.statement(arrow.premise).level, theorem.statement(arrow.conclusion).level];
    if n < 2 && levels.contains(&Level::Suspension) {
        return Some(format!("suspension needs n >= 2, got {n}"));
    }
    let perfect = system.faithful_compactum();
    if (theorem.hypotheses.faithful_compactum || theorem.perfect_only(arrow)) && !perfect {
        return Some("phase space is not a perfect compactum".into());
    }
    if theorem.hypotheses.no_isolated_points && !perfect {
        return Some("phase space has isolated points".into());
    }
    if theorem.hypotheses.bijection && !is_bijection(system) {
        return Some("map is not a bijection".into());
    }
    None
}

/// Verdicts for one (system, n), computed on first use.
struct VerdictCache<'a> {
    levels: &'a SystemLevels,
    budget: &'a Budget,
    global: HashMap<Statement, Verdict>,
    pointwise: HashMap<(usize, crate::detectors::PointKind), [Verdict; 3]>,
    instances: Option<(Vec<SubsetRef>, usize)>,
}

impl<'a> VerdictCache<'a> {
    fn new(levels: &'a SystemLevels, budget: &'a Budget) -> Self {
        VerdictCache { levels, budget, global: HashMap::new(), pointwise: HashMap::new(), instances: None }
    }

    fn global(&mut self, s: Statement) -> Verdict {
        let Claim::Global(p) = s.claim else { unreachable!("global lookup of a pointwise claim") };
        let (levels, budget) = (self.levels, self.budget);
        self.global.entry(s).or_insert_with(|| levels.detect(s.level, p, budget)).clone()
    }

    fn instances(&mut self) -> &(Vec<SubsetRef>, usize) {
        let levels = self.levels;
        self.instances.get_or_insert_with(|| levels.subset_instances(POINTWISE_LIMIT))
    }

    fn pointwise(&mut self, i: usize, s: Statement) -> Verdict {
        let Claim::Pointwise(kind) = s.claim else { unreachable!("pointwise lookup of a global claim") };
        if !self.pointwise.contains_key(&(i, kind)) {
            let subset = self.instances().0[i].clone();
            let v = self.levels.classify_subset(&subset, kind, self.budget);
            self.pointwise.insert((i, kind), v);
        }
        let idx = Level::ALL.iter().position(|&l| l == s.level).expect("level listed");
        self.pointwise[&(i, kind)][idx].clone()
    }

    /// `level:claim` → outcome tally over every verdict computed so far.
    fn tally(&self, into: &mut BTreeMap<String, BTreeMap<String, usize>>) {
        let mut add = |key: String, v: &Verdict| {
            let outcome = format!("{:?}{}", v.outcome(), if v.definitive() { "" } else { "(bounded)" }).to_lowercase();
            *into.entry(key).or_default().entry(outcome).or_insert(0) += 1;
        };
        for (s, v) in &self.global {
            add(s.key(true), v);
        }
        for ((_, kind), vs) in &self.pointwise {
            for (level, v) in Level::ALL.iter().zip(vs) {
                add(format!("{level}:{kind}"), v);
            }
        }
    }
}

fn arrow_record(theorem: &TheoremSpec, arrow: &Arrow) -> ArrowRecord {
    let (p, c) = (theorem.statement(arrow.premise), theorem.statement(arrow.conclusion));
    ArrowRecord {
        premise_level: p.level,
        conclusion_level: c.level,
        premise: p.claim.to_string(),
        conclusion: c.claim.to_string(),
        statements: (arrow.premise, arrow.conclusion),
        kind: arrow.kind,
    }
}

fn check_global(theorem: &TheoremSpec, levels: &SystemLevels, cache: &mut VerdictCache) -> Vec<CheckResult> {
    let qualified = theorem.mixed_claims();
    let verdicts: BTreeMap<String, Verdict> =
        theorem.statements.iter().map(|&s| (s.key(qualified), cache.global(s))).collect();
    theorem
        .arrows()
        .iter()
        .map(|arrow| {
            let premise = &verdicts[&theorem.statement(arrow.premise).key(qualified)];
            let conclusion = &verdicts[&theorem.statement(arrow.conclusion).key(qualified)];
            let probe = arrow_status(arrow.kind, premise, conclusion);
            let (status, witness) = match hypothesis_gap(theorem, arrow, &levels.system, levels.n) {
                Some(gap) => (Status::HypothesisNotMet, Some(format!("{gap}; probe {}", probe.name()))),
                None => (probe, explain(probe, premise, conclusion)),
            };
            CheckResult {
                theorem: theorem.id.to_string(),
                system: levels.system.name().to_string(),
                n: levels.n,
                arrow: arrow_record(theorem, arrow),
                status,
                witness,
                verdicts: verdicts.clone(),
            }
        })
        .collect()
}

/// Pointwise theorems: each arrow is checked on every instance `A`, and the
/// decisive instance (counterexample, witness, or first inconclusive) is reported.
fn check_pointwise(theorem: &TheoremSpec, levels: &SystemLevels, cache: &mut VerdictCache) -> Vec<CheckResult> {
    let qualified = theorem.mixed_claims();
    let count = cache.instances().0.len();
    let total = cache.instances().1;
    let mut out = Vec::new();
    for arrow in theorem.arrows() {
        let (ps, cs) = (*theorem.statement(arrow.premise), *theorem.statement(arrow.conclusion));
        let mut decisive: Option<(usize, Status)> = None;
        let mut consistent = 0;
        for i in 0..count {
            let status = arrow_status(arrow.kind, &cache.pointwise(i, ps), &cache.pointwise(i, cs));
            match status {
                Status::Counterexample | Status::Witnessed => {
                    decisive = Some((i, status));
                    break;
                }
                Status::Consistent => consistent += 1,
                Status::Inconclusive => {
                    decisive.get_or_insert((i, status));
                }
                Status::Unwitnessed | Status::HypothesisNotMet => {}
            }
        }
        let coverage = if total > count { format!(" (sample of {count} out of {total})") } else { String::new() };
        let (status, shown, mut witness) = match decisive {
            Some((i, status)) => {
                let (p, c) = (cache.pointwise(i, ps), cache.pointwise(i, cs));
                let detail = explain(status, &p, &c).unwrap_or_default();
                (status, Some(i), format!("A = {}: {detail}", levels.describe_subset(&cache.instances().0[i])))
            }
            None if arrow.kind == ArrowKind::NotImplies => {
                (Status::Unwitnessed, None, format!("no instance among {count}"))
            }
            None if count == 0 => (Status::Inconclusive, None, "no instances available".to_string()),
            None => (Status::Consistent, None, format!("all {consistent} instances consistent")),
        };
        witness.push_str(&coverage);
        let status = match hypothesis_gap(theorem, &arrow, &levels.system, levels.n) {
            Some(gap) => {
                witness = format!("{gap}; probe {}: {witness}", status.name());
                Status::HypothesisNotMet
            }
            None => status,
        };
        let verdicts = match shown {
            Some(i) => theorem.statements.iter().map(|&s| (s.key(qualified), cache.pointwise(i, s))).collect(),
            None => BTreeMap::new(),
        };
        out.push(CheckResult {
            theorem: theorem.id.to_string(),
            system: levels.system.name().to_string(),
            n: levels.n,
            arrow: arrow_record(theorem, &arrow),
            status,
            witness: Some(witness),
            verdicts,
        });
    }
    out
}

/// Checks every theorem on one (system, n).
fn check_system(
    levels: &SystemLevels,
    theorems: &[TheoremSpec],
    budget: &Budget,
    tally: Option<&mut BTreeMap<String, BTreeMap<String, usize>>>,
) -> Vec<CheckResult> {
    let mut cache = VerdictCache::new(levels, budget);
    let mut out = Vec::new();
    for theorem in theorems {
        if theorem.is_pointwise() {
            out.extend(check_pointwise(theorem, levels, &mut cache));
        } else {
            out.extend(check_global(theorem, levels, &mut cache));
        }
    }
    if let Some(t) = tally {
        cache.tally(t);
    }
    out
}

/// Runs `work` over `items` on scoped worker threads; results keep item order.
fn sort_results(results: &mut [CheckResult], system_order: &HashMap<String, usize>) {
    let theorem_number = |id: &str| id[1..].parse::<usize>().unwrap_or(usize::MAX);
    results.sort_by(|a, b| {
        (theorem_number(&a.theorem), system_order.get(&a.system), a.n).cmp(&(
            theorem_number(&b.theorem),
            system_order.get(&b.system),
            b.n,
        ))
    });
}

/// Runs the theorem table over `catalog × ns`.
///
/// Results are ordered by theorem, catalog position, `n`, then arrow order,
/// independent of scheduling.
pub fn run_theorem_suite(catalog: &[System], theorems: &[TheoremSpec], ns: &[usize], budget: &Budget) -> Report {
    let jobs: Vec<(&System, usize)> = catalog.iter().flat_map(|s| ns.iter().map(move |&n| (s, n))).collect();
    let per_job: Vec<_> = jobs
        .par_iter()
        .map(|&(system, n)| {
            let levels = SystemLevels::build(system, n);
            let mut notes = Vec::new();
            for level in [Level::Product, Level::Suspension] {
                if let Err(e) = levels.level(level) {
                    notes.push(format!(
                        "{} n={n}: {level} level unavailable ({e}); its verdicts are Unknown",
                        system.name()
                    ));
                }
            }
            if theorems.iter().any(TheoremSpec::is_pointwise) {
                let (shown, total) = levels.subset_instances(POINTWISE_LIMIT);
                if total > shown.len() {
                    notes.push(format!(
                        "{} n={n}: pointwise theorems examine {} evenly spaced elements out of {total}",
                        system.name(),
                        shown.len()
                    ));
                }
            }
            (check_system(&levels, theorems, budget, None), notes)
        })
        .collect();
    let mut report = Report::new(budget.clone());
    let order: HashMap<String, usize> = catalog.iter().enumerate().map(|(i, s)| (s.name().to_string(), i)).collect();
    for (results, notes) in per_job {
        report.results.extend(results);
        report.notes.extend(notes);
    }
    sort_results(&mut report.results, &order);
    if theorems.iter().any(|t| t.id == "T24") && catalog.iter().any(|s| s.name().starts_with("gridrot")) {
        report.notes.push(
            "T24: irrational rotations are not representable; rational grid rotations with large \
             denominators stand in as probes"
                .into(),
        );
    }
    report
}

/// Builds the named systems, in order.
pub fn build_catalog(names: &[String]) -> Result<Vec<System>, HarnessError> {
    names.iter().map(|name| Ok(build_system(&catalog_system(name)?)?)).collect()
}

/// Checks `theorems` on all `point_count^point_count` endomaps of the cycle
/// metric on `point_count` points, at `n = 2`.
pub fn brute_force_enumeration(
    point_count: usize,
    theorems: &[TheoremSpec],
    budget: &Budget,
) -> Result<Report, HarnessError> {
    if !(1..=4).contains(&point_count) {
        return Err(HarnessError::PointCount(point_count));
    }
    let systems: Vec<System> = all_endomaps(point_count)
        .map(|table| build_system(&cycle_map(&endomap_name(&table), table)))
        .collect::<Result<_, _>>()?;
    let per_map: Vec<_> = systems
        .par_iter()
        .map(|system| {
            let levels = SystemLevels::build(system, 2);
            let mut tally = BTreeMap::new();
            let results = check_system(&levels, theorems, budget, Some(&mut tally));
            (results, tally)
        })
        .collect();
    let mut report = Report::new(budget.clone());
    let mut summary = EnumerationSummary { point_count, maps: systems.len(), ..Default::default() };
    for (results, tally) in per_map {
        report.results.extend(results);
        for (key, outcomes) in tally {
            let slot = summary.verdict_counts.entry(key).or_default();
            for (outcome, c) in outcomes {
                *slot.entry(outcome).or_insert(0) += c;
            }
        }
    }
    let order: HashMap<String, usize> = systems.iter().enumerate().map(|(i, s)| (s.name().to_string(), i)).collect();
    sort_results(&mut report.results, &order);
    summary.status_counts = report.status_counts();
    summary.counterexamples = report.counterexamples().count();
    report.enumeration = Some(summary);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::Witness;

    fn holds(d: bool) -> Verdict {
        Verdict::holds(d, Witness::text("h"))
    }

    fn fails(d: bool) -> Verdict {
        Verdict::fails(d, Witness::text("f"))
    }

    #[test]
    fn counterexamples_need_definitive_verdicts() {
        let unknown = Verdict::unknown("cap");
        use ArrowKind::*;
        assert_eq!(arrow_status(Implies, &holds(true), &fails(true)), Status::Counterexample);
        for (p, c) in [
            (holds(false), fails(true)),
            (holds(true), fails(false)),
            (unknown.clone(), fails(true)),
            (holds(true), unknown.clone()),
            (unknown.clone(), unknown.clone()),
        ] {
            assert_eq!(arrow_status(Implies, &p, &c), Status::Inconclusive, "{p} / {c}");
            assert_ne!(arrow_status(NotImplies, &p, &c), Status::Witnessed);
        }
        assert_eq!(arrow_status(Implies, &fails(true), &unknown), Status::Consistent);
        assert_eq!(arrow_status(Implies, &unknown, &holds(true)), Status::Consistent);
        assert_eq!(arrow_status(NotImplies, &holds(true), &fails(true)), Status::Witnessed);
    }

    #[test]
    fn rotation_suite_has_no_counterexamples() {
        let systems = build_catalog(&["rot5".to_string(), "collapse3".to_string()]).unwrap();
        let report = run_theorem_suite(&systems, &theorem_table(), &[2], &Budget::default());
        assert_eq!(report.counterexamples().count(), 0);
        let t12: Vec<_> = report.results.iter().filter(|r| r.theorem == "T12" && r.system == "rot5_1").collect();
        assert_eq!(t12.len(), 42);
        assert!(t12.iter().all(|r| r.status == Status::Consistent));
        let wm = &t12[0].verdicts["base:weakly_mixing"];
        assert!(wm.fails_definitively());
        assert!(t12[0].verdicts["product:transitive"].fails_definitively());
    }

    #[test]
    fn isolated_points_gate_martelli_equivalences() {
        let systems = build_catalog(&["rot4".to_string()]).unwrap();
        let report = run_theorem_suite(&systems, &select_theorems("T14").unwrap(), &[2], &Budget::default());
        assert_eq!(report.results.len(), 56);
        assert!(report.results.iter().all(|r| r.status == Status::HypothesisNotMet));
    }
}

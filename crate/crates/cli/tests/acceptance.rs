//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the `cargo test` output.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use hyperdyn::harness::{
    brute_force_enumeration, build_catalog, select_theorems, theorem_table, Status, DEFAULT_CATALOG,
};
use hyperdyn::suspension::{sfn_apply, SuspensionPoint};
use hyperdyn::{
    build_system, Backend, Budget, Dist, DynSystem, FiniteMetric, Level, MetricSpace, PointSet, Property, ShiftPoint,
    SuspensionSpace, SymmetricProduct, System, SystemLevels, SystemSpec, Verdict,
};

// ---------- independent oracles ----------

fn custom(space: MetricSpace, table: Vec<usize>) -> Arc<DynSystem> {
    let spec = SystemSpec::Custom { name: "oracle".into(), backend: Backend::Finite, space, table, resolution: None };
    build_system(&spec).expect("valid custom system").as_finite().expect("finite").clone()
}

fn hausdorff(d: &dyn Fn(usize, usize) -> Dist, a: &[usize], b: &[usize]) -> Dist {
    let directed =
        |from: &[usize], to: &[usize]| from.iter().map(|&x| to.iter().map(|&y| d(x, y)).min().unwrap()).max().unwrap();
    directed(a, b).max(directed(b, a))
}

/// `G_n(χ)` as plain vectors: every singleton plus the class itself.
fn gn(points: usize, chi: &SuspensionPoint) -> Vec<Vec<usize>> {
    let mut family: Vec<Vec<usize>> = (0..points).map(|x| vec![x]).collect();
    if let SuspensionPoint::Class(a) = chi {
        family.push(a.as_slice().to_vec());
    }
    family
}

fn rho_oracle(space: &MetricSpace, a: &SuspensionPoint, b: &SuspensionPoint) -> Dist {
    let d = |x: usize, y: usize| space.dist(x, y);
    let (ga, gb) = (gn(space.len(), a), gn(space.len(), b));
    let directed = |from: &[Vec<usize>], to: &[Vec<usize>]| {
        from.iter().map(|s| to.iter().map(|t| hausdorff(&d, s, t)).min().unwrap()).max().unwrap()
    };
    directed(&ga, &gb).max(directed(&gb, &ga))
}

/// Shortest-path closure of integer edge weights on `m` points.
#[allow(clippy::needless_range_loop)]
fn path_metric(m: usize, weights: &[i64]) -> MetricSpace {
    let mut d = vec![vec![0i64; m]; m];
    let mut w = weights.iter();
    for i in 0..m {
        for j in i + 1..m {
            let v = *w.next().unwrap();
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    MetricSpace::from_fn(m, |i, j| Dist::from_int(d[i][j]))
}

/// Spaces with at most five points: named families plus every shortest-path
/// metric with edge weights in `{1,2,3}` on four points and `{1,2}` on five.
fn small_spaces() -> Vec<MetricSpace> {
    let mut out = Vec::new();
    for m in 1..=5 {
        out.extend([MetricSpace::cycle(m), MetricSpace::discrete(m), MetricSpace::circle_grid(m)]);
        if m >= 2 {
            out.push(MetricSpace::path(m));
        }
    }
    let mut seen = BTreeSet::new();
    for (m, alphabet) in [(3usize, 3i64), (4, 3), (5, 2)] {
        let edges = m * (m - 1) / 2;
        for code in 0..alphabet.pow(edges as u32) {
            let weights: Vec<i64> = (0..edges).map(|e| (code / alphabet.pow(e as u32)) % alphabet + 1).collect();
            let space = path_metric(m, &weights);
            let key: Vec<Dist> =
                (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| space.dist(i, j)).collect();
            if seen.insert(key) {
                out.push(space);
            }
        }
    }
    out
}

fn suspension_of(space: &MetricSpace, n: usize) -> SuspensionSpace {
    let sys = custom(space.clone(), (0..space.len()).collect());
    let product = Arc::new(SymmetricProduct::build(&sys, n).unwrap());
    SuspensionSpace::build(&product).unwrap()
}

/// Calls `visit` on every nonempty subset of `0..m` with at most `n` members, as a sorted slice.
fn for_each_subset(m: usize, n: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(m: usize, n: usize, start: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if !cur.is_empty() {
            visit(cur);
        }
        if cur.len() == n {
            return;
        }
        for x in start..m {
            cur.push(x);
            rec(m, n, x + 1, cur, visit);
            cur.pop();
        }
    }
    rec(m, n, 0, &mut Vec::new(), &mut visit);
}

fn image(table: &[usize], a: &[usize]) -> Vec<usize> {
    let mut img: Vec<usize> = a.iter().map(|&x| table[x]).collect();
    img.sort_unstable();
    img.dedup();
    img
}

fn quotient(a: &[usize]) -> SuspensionPoint {
    if a.len() == 1 {
        SuspensionPoint::Collapsed
    } else {
        SuspensionPoint::Class(PointSet::from(a.to_vec()))
    }
}

fn iterate(table: &[usize], x: usize, n: usize) -> usize {
    (0..n).fold(x, |y, _| table[y])
}

/// `f × f` transitive on a discrete space: every pair of pairs is joined at a common time.
fn weakly_mixing_oracle(table: &[usize]) -> bool {
    let m = table.len();
    let horizon = 2 * m * m + 2;
    let points: Vec<(usize, usize)> = (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).collect();
    points.iter().all(|&(a, b)| {
        points.iter().all(|&(c, e)| (1..=horizon).any(|n| iterate(table, a, n) == c && iterate(table, b, n) == e))
    })
}

/// `F_2(f)` Z-transitive on a discrete space: any two elements are equal or one reaches the other.
fn product_z_transitive_oracle(table: &[usize]) -> bool {
    let mut elements = Vec::new();
    for_each_subset(table.len(), 2, |a| elements.push(a.to_vec()));
    let horizon = elements.len() + 1;
    let reaches = |a: &Vec<usize>, b: &Vec<usize>| {
        let mut cur = a.clone();
        (1..=horizon).any(|_| {
            cur = image(table, &cur);
            &cur == b
        })
    };
    elements.iter().all(|a| elements.iter().all(|b| a == b || reaches(a, b) || reaches(b, a)))
}

fn endomaps(m: usize) -> Vec<Vec<usize>> {
    (0..m.pow(m as u32))
        .map(|mut code| {
            (0..m)
                .map(|_| {
                    let x = code % m;
                    code /= m;
                    x
                })
                .collect()
        })
        .collect()
}

fn detect(system: &System, level: Level, p: Property, budget: &Budget) -> Verdict {
    SystemLevels::build(system, 2).detect(level, p, budget)
}

fn named(name: &str) -> System {
    build_catalog(&[name.to_string()]).unwrap().remove(0)
}

fn within(limit: Duration, start: Instant, what: &str) -> String {
    let took = start.elapsed();
    assert!(took < limit, "{what} took {took:?}, limit {limit:?}");
    format!("{took:.2?}")
}

// ---------- criteria ----------

fn rho_matches_oracle() -> String {
    let start = Instant::now();
    let spaces = small_spaces();
    let mut pairs = 0usize;
    for space in &spaces {
        for n in [2, 3] {
            let s = suspension_of(space, n);
            for i in 0..s.len() {
                for j in 0..s.len() {
                    let (a, b) = (s.point(i), s.point(j));
                    let rho = s.rho(&a, &b).unwrap();
                    assert_eq!(rho, s.rho_direct_oracle(&a, &b).unwrap(), "{a} {b} n={n}");
                    assert_eq!(rho, rho_oracle(space, &a, &b), "{a} {b} n={n}");
                    pairs += 1;
                }
            }
        }
    }
    let t = within(Duration::from_secs(10), start, "rho oracle sweep");
    format!("{} spaces, {pairs} pairs exact, {t}", spaces.len())
}

fn rho_is_metric_below_hausdorff() -> String {
    let mut checked = 0usize;
    for space in small_spaces() {
        for n in [2, 3] {
            let s = suspension_of(&space, n);
            let k = s.len();
            let r = |i: usize, j: usize| s.dist(i, j);
            for x in 0..k {
                assert!(r(x, x).is_zero());
                for y in 0..k {
                    assert_eq!(r(x, y), r(y, x));
                    assert!(x == y || !r(x, y).is_zero(), "distinct points at distance zero");
                    for z in 0..k {
                        assert!(r(x, z).ratio() <= r(x, y).ratio() + r(y, z).ratio(), "triangle {x} {y} {z}");
                    }
                }
            }
            let d = |x: usize, y: usize| space.dist(x, y);
            let mut multi = Vec::new();
            for_each_subset(space.len(), n, |a| {
                if a.len() >= 2 {
                    multi.push(a.to_vec())
                }
            });
            for a in &multi {
                for b in &multi {
                    let (qa, qb) = (quotient(a), quotient(b));
                    assert!(s.rho(&qa, &qb).unwrap() <= hausdorff(&d, a, b), "{qa} {qb}");
                    checked += 1;
                }
            }
        }
    }
    format!("axioms exact on every suspension, {checked} multi-point pairs satisfy rho <= H")
}

fn semiconjugacy() -> String {
    // exhaustive k = 1 gives every k by induction; k <= 20 is also checked
    // literally wherever F_n has at most LITERAL elements, and on an even sample elsewhere
    const LITERAL: u64 = 3_000_000;
    const SAMPLE: u64 = 200_000;
    let mut elements = 0u64;
    let mut literal = 0u64;
    for name in DEFAULT_CATALOG {
        let System::Finite(sys) = named(name) else {
            continue;
        };
        let table = sys.map.table().to_vec();
        for n in [2usize, 3] {
            let size = hyperdyn::hyperspace::product_size(table.len(), n) as u64;
            let stride = if size <= LITERAL { 1 } else { size / SAMPLE };
            let mut index = 0u64;
            for_each_subset(table.len(), n, |a| {
                let img = image(&table, a);
                assert_eq!(quotient(&img), sfn_apply(&sys, &quotient(a)), "{name} n={n} {a:?}");
                if index.is_multiple_of(stride) {
                    let (mut cur, mut chi) = (a.to_vec(), quotient(a));
                    for k in 1..=20 {
                        cur = image(&table, &cur);
                        chi = sfn_apply(&sys, &chi);
                        assert_eq!(quotient(&cur), chi, "{name} n={n} {a:?} k={k}");
                    }
                    literal += 1;
                }
                index += 1;
            });
            elements += index;
        }
    }
    format!("{elements} elements with k = 1, {literal} iterated to k = 20, zero violations")
}

fn brute_force_oracle() -> String {
    let start = Instant::now();
    let theorems = theorem_table();
    let mut summary = Vec::new();
    for (m, maps) in [(3, 27), (4, 256)] {
        let report = brute_force_enumeration(m, &theorems, &Budget::default()).unwrap();
        let e = report.enumeration.as_ref().unwrap();
        assert_eq!(e.maps, maps);
        let bad: Vec<String> = report
            .counterexamples()
            .take(5)
            .map(|c| format!("{} {} {}", c.theorem, c.system, c.arrow.label()))
            .collect();
        assert_eq!(e.counterexamples, 0, "counterexamples: {bad:?}");
        summary.push(format!("{maps} maps on {m} points"));
    }
    let t = within(Duration::from_secs(300), start, "brute force");
    format!("{}, T1-T24, zero counterexamples, {t}", summary.join(" + "))
}

fn rotation_example() -> String {
    let start = Instant::now();
    let rot = named("rot5");
    let budget = Budget::default();
    for p in [Property::Transitive, Property::StronglyTransitive, Property::Minimal] {
        assert!(detect(&rot, Level::Base, p, &budget).holds_definitively(), "base {p}");
    }
    assert!(detect(&rot, Level::Base, Property::TotallyTransitive, &budget).fails_definitively());

    // orbit decomposition of F_2 for the rotation, computed here from scratch
    let table: Vec<usize> = (0..5).map(|i| (i + 1) % 5).collect();
    let mut elements = Vec::new();
    for_each_subset(5, 2, |a| elements.push(a.to_vec()));
    let mut cycles = Vec::new();
    let mut seen = BTreeSet::new();
    for a in &elements {
        if seen.contains(a) {
            continue;
        }
        let mut cur = a.clone();
        let mut len = 0;
        loop {
            seen.insert(cur.clone());
            cur = image(&table, &cur);
            len += 1;
            if &cur == a {
                break;
            }
        }
        cycles.push(len);
    }
    assert_eq!((elements.len(), cycles.clone()), (15, vec![5, 5, 5]));

    let product = detect(&rot, Level::Product, Property::Transitive, &budget);
    assert!(product.fails_definitively(), "{product}");
    let mut shown = product.witness().unwrap().cycles.clone();
    shown.sort_unstable();
    assert_eq!(shown, cycles, "product witness cycles");

    // the singleton cycle collapses to the fixed basepoint
    let susp = detect(&rot, Level::Suspension, Property::Transitive, &budget);
    assert!(susp.fails_definitively(), "{susp}");
    let mut shown = susp.witness().unwrap().cycles.clone();
    shown.sort_unstable();
    assert_eq!(shown, [1, 5, 5], "suspension witness cycles");
    let t = within(Duration::from_secs(1), start, "rotation example");
    format!("base transitive/strongly transitive/minimal Holds, F_2: 15 elements in cycles {cycles:?}, {t}")
}

fn shift_positives() -> String {
    let start = Instant::now();
    let shift = named("shift2");
    let budget = Budget::default();
    let base = [
        Property::Sensitive,
        Property::CofinitelySensitive,
        Property::Mixing,
        Property::WeaklyMixing,
        Property::Transitive,
        Property::TtPlusPlus,
        Property::Touhey,
        Property::FullyExact,
        Property::Martelli,
    ];
    let levels = SystemLevels::build(&shift, 2);
    for p in base {
        let v = levels.detect(Level::Base, p, &budget);
        assert!(v.holds_definitively(), "base {p}: {v}");
        assert!(!v.witness().unwrap().summary.is_empty(), "base {p} witness");
    }
    let sens = levels.detect(Level::Base, Property::Sensitive, &budget);
    let w = sens.witness().unwrap();
    assert_eq!(w.delta, Some(Dist::new(1, 2)));
    assert!(w.separations.iter().all(|s| s.distance > Dist::new(1, 2)));
    for level in [Level::Product, Level::Suspension] {
        let v = levels.detect(level, Property::Transitive, &budget);
        assert!(v.holds_definitively(), "{level} transitive: {v}");
    }
    // every cylinder [w] holds w0^∞ and w1^∞, which are at distance 1 after |w| shifts
    for len in 0..=6usize {
        for code in 0..(1u32 << len) {
            let word: Vec<u8> = (0..len).map(|i| ((code >> i) & 1) as u8).collect();
            let (x, y) = (ShiftPoint::constant(0).prepend(&word), ShiftPoint::constant(1).prepend(&word));
            assert!(x.starts_with(&word) && y.starts_with(&word));
            assert!(x.shift_by(len).dist(&y.shift_by(len)) > Dist::new(1, 2));
        }
    }
    let t = within(Duration::from_secs(30), start, "shift positives");
    format!("9 base properties and product/suspension transitivity Holds definitively, {t}")
}

fn sensitivity_contrast() -> String {
    let doubling = named("doubling729");
    let budget = Budget { horizon: 10, delta_grid: vec![Dist::new(1, 4)], ..Budget::default() };
    let v = detect(&doubling, Level::Base, Property::Sensitive, &budget);
    assert!(matches!(v, Verdict::Holds { .. }), "{v}");
    let w = v.witness().unwrap();
    assert_eq!(w.delta, Some(Dist::new(1, 4)));
    assert!(w.step.unwrap() <= 10);

    // every basis set of the grid splits beyond 1/4 within 10 steps
    let sys = doubling.as_finite().unwrap();
    let table = sys.map.table();
    let worst = sys
        .basis
        .iter()
        .map(|u| {
            (0..=10)
                .find(|&n| {
                    u.iter().any(|x| {
                        u.iter().any(|y| sys.space.dist(iterate(table, x, n), iterate(table, y, n)) > Dist::new(1, 4))
                    })
                })
                .expect("basis set splits within 10 steps")
        })
        .max()
        .unwrap();

    let mut rotations = 0;
    for m in 2..=9usize {
        for k in 0..m {
            let rot = build_system(&SystemSpec::FiniteRotation { m, k }).unwrap();
            let space = MetricSpace::cycle(m);
            let mut deltas: Vec<Dist> = (1..m).map(|j| space.dist(0, j)).collect();
            deltas.sort();
            deltas.dedup();
            for delta in deltas {
                let b = Budget { delta_grid: vec![delta], ..Budget::default() };
                let v = detect(&rot, Level::Base, Property::Sensitive, &b);
                assert!(v.fails_definitively(), "rot{m}_{k} delta {delta}: {v}");
            }
            rotations += 1;
        }
    }
    format!(
        "doubling729 splits every basis set by n = {worst} <= 10 at delta 1/4; {rotations} rotations Fail definitively"
    )
}

fn weak_mixing_equivalence() -> String {
    let t5 = select_theorems("T5").unwrap();
    let mut maps = 0;
    for m in 1..=4usize {
        let report = brute_force_enumeration(m, &t5, &Budget::default()).unwrap();
        assert!(report.results.iter().all(|r| r.status == Status::Consistent), "T5 on {m} points");
        for table in endomaps(m) {
            let (wm, z) = (weakly_mixing_oracle(&table), product_z_transitive_oracle(&table));
            assert_eq!(wm, z, "oracle disagrees with the equivalence on {table:?}");
            let sys = System::Finite(custom(MetricSpace::cycle(m), table.clone()));
            let levels = SystemLevels::build(&sys, 2);
            let b = Budget::default();
            let lib_wm = levels.detect(Level::Base, Property::WeaklyMixing, &b);
            let lib_z = levels.detect(Level::Product, Property::ZTransitive, &b);
            assert!(lib_wm.definitive() && lib_z.definitive(), "{table:?}");
            assert_eq!(lib_wm.holds_definitively(), wm, "weak mixing on {table:?}");
            assert_eq!(lib_z.holds_definitively(), z, "Z-transitivity on {table:?}");
            maps += 1;
        }
    }
    let b = Budget::default();
    let shift = SystemLevels::build(&named("shift2"), 2);
    assert!(shift.detect(Level::Base, Property::WeaklyMixing, &b).holds_definitively());
    assert!(shift.detect(Level::Product, Property::ZTransitive, &b).holds_definitively());
    let rot = SystemLevels::build(&named("rot5"), 2);
    assert!(rot.detect(Level::Base, Property::WeaklyMixing, &b).fails_definitively());
    assert!(rot.detect(Level::Product, Property::ZTransitive, &b).fails_definitively());
    format!("{maps} maps on <= 4 points agree with brute-force oracles; shift2 both Holds, rot5 both Fail")
}

fn deterministic_reports() -> String {
    let dir = tempfile::tempdir().unwrap();
    let run = |file: &str| {
        let path = dir.path().join(file);
        let status = Command::new(env!("CARGO_BIN_EXE_hyperdyn"))
            .args(["verify", "--theorems", "all", "--catalog", "default", "--out"])
            .arg(&path)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert!(!a.is_empty());
    assert!(a == b, "reports differ");
    format!("two runs, {} identical bytes", a.len())
}

type Criterion = (&'static str, fn() -> String);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 suspension metric equals its definition", rho_matches_oracle),
        ("2 suspension metric is a metric below Hausdorff", rho_is_metric_below_hausdorff),
        ("3 semiconjugacy", semiconjugacy),
        ("4 brute-force theorem oracle", brute_force_oracle),
        ("5 rotation of five points", rotation_example),
        ("6 full shift positives", shift_positives),
        ("7 sensitivity contrast", sensitivity_contrast),
        ("8 product Z-transitivity versus weak mixing", weak_mixing_equivalence),
        ("9 deterministic reports", deterministic_reports),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        match catch_unwind(AssertUnwindSafe(check)) {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL criterion {name}: {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

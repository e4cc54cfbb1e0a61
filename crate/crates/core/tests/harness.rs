use hyperdyn::harness::{build_catalog, parse_anchor, select_theorems, theorem_table, ArrowKind};
use hyperdyn::{emit_report, run_theorem_suite, Budget, Report, ReportFormat, Status};

const ANCHORS: [(&str, usize, &str); 24] = [
    ("T1", 3, "3=>2, 2=>1"),
    ("T2", 3, "1<=>2, 3=>2"),
    ("T3", 3, "1<=>2, 3=>2"),
    ("T4", 3, "2<=>3, 2=>1, 1!=>2"),
    ("T5", 2, "1<=>2"),
    ("T6", 3, "1=>2, 2=>3"),
    ("T7", 3, "2=>1, 2=>3"),
    ("T8", 3, "2<=>3, 2=>1"),
    ("T9", 3, "2<=>3, 2=>1"),
    ("T10", 3, "2=>1, 2=>3"),
    ("T11", 3, "2=>1, 2=>3"),
    ("T12", 7, "1<=>2<=>3<=>4<=>5<=>6<=>7"),
    ("T13", 2, "1=>2"),
    ("T14", 8, "1<=>2<=>3<=>4<=>5<=>6<=>7<=>8"),
    ("T15", 3, "2<=>3, 2=>1, 1!=>2"),
    ("T16", 3, "2<=>3, 2=>1"),
    ("T17", 3, "2<=>3, 2=>1, 1!=>2"),
    ("T18", 6, "2<=>3, 2=>1, 1!=>2, 5<=>6, 5=>4, 4!=>5"),
    ("T19", 3, "2<=>3, 2=>1"),
    ("T20", 3, "2<=>3, 2=>1, 1!=>2"),
    ("T21", 3, "2<=>3, 2=>1, 1!=>2"),
    ("T22", 3, "2<=>3, 2=>1"),
    ("T23", 3, "2<=>3, 2=>1"),
    ("T24", 3, "2=>3, 3=>1, 1!=>2, 1!=>3"),
];

#[test]
fn theorem_table_is_complete() {
    let table = theorem_table();
    assert_eq!(table.len(), ANCHORS.len());
    for (spec, (id, statements, anchor)) in table.iter().zip(ANCHORS) {
        assert_eq!(spec.id, id);
        assert_eq!(spec.statements.len(), statements, "{id}");
        assert_eq!(spec.anchor, anchor, "{id}");
        assert!(!spec.arrows().is_empty());
    }
    assert_eq!(select_theorems("all").unwrap().len(), 24);
    assert_eq!(
        select_theorems("T12-T14, 1").unwrap().iter().map(|t| t.id).collect::<Vec<_>>(),
        ["T1", "T12", "T13", "T14"]
    );
    assert!(select_theorems("T25").is_err());
}

#[test]
fn anchor_chains_expand_to_every_ordered_pair() {
    let arrows = parse_anchor("1<=>2<=>3, 3!=>4", 4).unwrap();
    assert_eq!(arrows.iter().filter(|a| a.kind == ArrowKind::Implies).count(), 6);
    assert_eq!(arrows.iter().filter(|a| a.kind == ArrowKind::NotImplies).count(), 1);
    assert!(parse_anchor("1=>5", 4).is_err());
    assert!(parse_anchor("1=>2, 1=>2", 2).is_err());
    assert!(parse_anchor("1->2", 2).is_err());
}

fn sample_report() -> Report {
    let systems = build_catalog(&["rot5".into(), "collapse3".into()]).unwrap();
    run_theorem_suite(&systems, &select_theorems("T1,T5,T12").unwrap(), &[2], &Budget::default())
}

#[test]
fn json_round_trip_through_a_file() {
    let report = sample_report();
    assert!(report.counterexamples().next().is_none());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    emit_report(&report, ReportFormat::Json, &path).unwrap();
    let back = Report::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, report);

    let empty = Report::new(Budget::default());
    assert_eq!(Report::from_json(&empty.to_json()).unwrap(), empty);
    assert!(Report::from_json("{").is_err());
}

#[test]
fn csv_rows_mirror_results() {
    let report = sample_report();
    let text = report.to_csv();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["theorem", "system", "n", "arrow", "premise", "conclusion", "status", "witness"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), report.results.len());
    for (row, result) in rows.iter().zip(&report.results) {
        assert_eq!(&row[0], result.theorem);
        assert_eq!(&row[1], result.system);
        assert_eq!(row[2].parse::<usize>().unwrap(), result.n);
        assert_eq!(&row[3], result.arrow.label());
        assert_eq!(&row[6], result.status.name());
    }
}

#[test]
fn markdown_and_formats() {
    let report = sample_report();
    let md = report.render(ReportFormat::Markdown);
    assert!(md.contains("| theorem | system | n | arrow | premise | conclusion | status | witness |"));
    assert_eq!(md.lines().filter(|l| l.starts_with("| T")).count(), report.results.len());
    for name in ["json", "csv", "markdown", "md"] {
        assert!(name.parse::<ReportFormat>().is_ok());
    }
    assert!("yaml".parse::<ReportFormat>().is_err());
    let total: usize = report.status_counts().values().sum();
    assert_eq!(total, report.results.len());
    assert!(report.status_counts().keys().all(|s| Status::ALL.contains(s)));
}

#[test]
fn weak_mixing_chain_holds_throughout_on_the_full_shift() {
    let systems = build_catalog(&["shift2".into()]).unwrap();
    let report = run_theorem_suite(&systems, &select_theorems("T12").unwrap(), &[2], &Budget::default());
    let wm = &report.results.iter().find(|r| r.arrow.statements == (1, 6)).unwrap();
    assert_eq!(wm.status, Status::Consistent);
    assert!(wm.verdicts["base:weakly_mixing"].holds_definitively());
    assert!(wm.verdicts["product:transitive"].holds_definitively());
    assert!(report.counterexamples().next().is_none());
}

use twistlab::relations::{mutation_sweep, Catalog, Status};
use twistlab::run_suite;

#[test]
fn builtin_catalog_passes() {
    let report = run_suite(&Catalog::builtin(), None, true);
    let bad: Vec<_> = report.fixtures.iter().filter(|f| f.status != Status::Pass).collect();
    assert!(bad.is_empty(), "{}", report.to_text());
}

#[test]
fn filters() {
    let cat = Catalog::builtin();
    assert_eq!(run_suite(&cat, Some("R-PSz"), false).fixtures.len(), 6);
    assert!(run_suite(&cat, Some("no-such-prefix"), false).fixtures.is_empty());
}

#[test]
fn every_fixture_is_mutation_sensitive() {
    let sweep = mutation_sweep(&Catalog::builtin(), None);
    let weak: Vec<_> = sweep.iter().filter(|m| !m.killed_all()).collect();
    assert!(weak.is_empty(), "{weak:#?}");
}

//! End-to-end runs of the bundled claim scenarios.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qle::scenario::{load_config, run_scenarios};

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn slurp_outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        out.insert(
            entry.file_name().to_string_lossy().into_owned(),
            std::fs::read(entry.path()).unwrap(),
        );
    }
    out
}

#[test]
fn bundled_claims_pass_under_check() {
    let dir = scenarios_dir();
    let scenarios = load_config(&dir.join("paper_claims.cfg")).unwrap();
    assert_eq!(scenarios.len(), 15);

    let out = tempfile::tempdir().unwrap();
    let outcomes = run_scenarios(&scenarios, &dir, out.path(), true).unwrap();
    for o in &outcomes {
        assert!(
            o.check_failures.is_empty(),
            "{} failed checks: {:?}",
            o.name,
            o.check_failures
        );
    }

    let by_name: BTreeMap<&str, &str> = outcomes
        .iter()
        .map(|o| (o.name.as_str(), o.verdict.as_str()))
        .collect();
    assert_eq!(by_name["eq9_passive"], "PassiveConsistent tbp=2.000");
    assert_eq!(by_name["active_tbp_ten"], "ActiveConsistent tbp=10.000");
    assert!(by_name["fig3a_violation"].starts_with("SECOND-LAW VIOLATION at t="));
    assert!(by_name["fig3_reciprocal_control"].starts_with("second law holds"));
    assert!(by_name["fig3b_third_bath"].contains("capped"));
    assert!(by_name["circulator_breaks_time_reversal"].starts_with("TIME-REVERSAL BROKEN"));

    // One output file per scenario.
    assert_eq!(slurp_outputs(out.path()).len(), scenarios.len());
}

#[test]
fn identical_configs_produce_byte_identical_outputs() {
    let dir = scenarios_dir();
    let scenarios = load_config(&dir.join("paper_claims.cfg")).unwrap();
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    run_scenarios(&scenarios, &dir, first.path(), false).unwrap();
    run_scenarios(&scenarios, &dir, second.path(), false).unwrap();
    assert_eq!(slurp_outputs(first.path()), slurp_outputs(second.path()));
}

#[test]
fn empty_scenario_list_writes_nothing() {
    let out = tempfile::tempdir().unwrap();
    let target = out.path().join("untouched");
    let outcomes = run_scenarios(&[], Path::new("."), &target, true).unwrap();
    assert!(outcomes.is_empty());
    assert!(!target.exists());
}

#[test]
fn check_failures_are_reported_not_fatal() {
    let text = "\
[scenario.wrong_expectation]
kind = TbpReport
tau = 1
gamma = 2
expect_tbp = 3
";
    let scenarios = qle::scenario::parse_config(text).unwrap();
    let out = tempfile::tempdir().unwrap();
    let outcomes = run_scenarios(&scenarios, Path::new("."), out.path(), true).unwrap();
    assert_eq!(outcomes[0].check_failures.len(), 1);
    assert!(outcomes[0].check_failures[0].contains("expect_tbp"));

    // Without --check the same scenario reports no failures.
    let outcomes = run_scenarios(&scenarios, Path::new("."), out.path(), false).unwrap();
    assert!(outcomes[0].check_failures.is_empty());
}

#[test]
fn missing_matrix_file_is_an_execution_error_with_scenario_name() {
    let text = "[scenario.lost]\nkind = GaugeCheck\nmatrix = nowhere.mat\n";
    let scenarios = qle::scenario::parse_config(text).unwrap();
    let out = tempfile::tempdir().unwrap();
    let err = run_scenarios(&scenarios, Path::new("/nonexistent-base"), out.path(), false)
        .unwrap_err();
    assert!(err.to_string().contains("lost"), "{err}");
}

//! Byte-for-byte snapshots of the output files. Set `UPDATE_GOLDEN=1` to
//! regenerate them after an intended change.

use deptsim::config::bundled_scenario;
use deptsim::engine::run_replication;
use deptsim::harness::{emit_report, run_experiment, ExperimentSpec};
use deptsim::metrics::{write_outputs, OUTPUT_FILES};
use std::path::{Path, PathBuf};

fn golden_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn check(name: &str, produced: &Path, files: &[&str]) {
    let golden = golden_dir(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(&golden).unwrap();
        for f in files {
            std::fs::copy(produced.join(f), golden.join(f)).unwrap();
        }
        return;
    }
    for f in files {
        let want = std::fs::read_to_string(golden.join(f)).unwrap_or_else(|e| panic!("{name}/{f}: {e}"));
        let got = std::fs::read_to_string(produced.join(f)).unwrap();
        assert!(got == want, "{name}/{f} differs from the snapshot");
    }
}

#[test]
fn single_run_outputs_match_snapshot() {
    let mut c = bundled_scenario("atv").unwrap();
    c.pool_size = 80;
    c.run_length_days = 2;
    c.seed = 7;
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&run_replication(&c, 0).unwrap(), dir.path()).unwrap();
    check("run", dir.path(), &OUTPUT_FILES);
}

#[test]
fn experiment_report_matches_snapshot() {
    let spec = ExperimentSpec::from_toml_str(
        "name = \"golden\"\nscenario = \"ww\"\nparameter = \"pool_size\"\nlevels = [60, 120]\n\
         replications = 2\ndays = 2\nseed = 5\ntests = [[0, 1]]\n",
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_report(&run_experiment(&spec, Path::new(""), 2).unwrap(), dir.path()).unwrap();
    check(
        "report",
        dir.path(),
        &["experiment.toml", "runs.csv", "descriptives.csv", "tests.csv", "daily.csv", "daily_means.csv"],
    );
}

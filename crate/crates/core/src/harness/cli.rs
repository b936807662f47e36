//! `deptsim` command line.

use super::experiment::{bundled_experiment_names, resolve_experiment, run_experiment};
use super::report::{emit_report, rebuild_report, summary_text, MeasureTable, SUMMARY_MEASURES};
use crate::config::{bundled_scenario_names, resolve_scenario, OperationMode};
use crate::engine::run_replication;
use crate::metrics::write_outputs;
use anyhow::Context;
use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "deptsim", version, about = "Agent-based retail department simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single replication of a scenario.
    Run {
        /// Scenario file, or a bundled scenario name (atv, ww).
        #[arg(long)]
        scenario: String,
        /// normal or noise-reduction.
        #[arg(long)]
        mode: Option<OperationMode>,
        #[arg(long)]
        days: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Replication index, selecting the random stream lineage.
        #[arg(long, default_value_t = 0)]
        replication: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a replicated experiment and write its report.
    Experiment {
        /// Spec file, or a bundled spec name (pool-size-sweep,
        /// mode-comparison, wom-sweep).
        #[arg(long)]
        spec: String,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
        /// Defaults to results/<experiment name>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute descriptives and tests of an experiment directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// List bundled scenarios and experiment specs.
    List,
}

pub fn execute(cli: Cli, stdout: &mut impl Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            mode,
            days,
            seed,
            replication,
            out,
        } => {
            let mut config = resolve_scenario(&scenario).with_context(|| format!("loading scenario {scenario}"))?;
            if let Some(mode) = mode {
                config.mode = mode;
            }
            if let Some(days) = days {
                config.run_length_days = days;
            }
            if let Some(seed) = seed {
                config.seed = seed;
            }
            config.validate()?;
            let output = run_replication(&config, replication)?;
            let files = write_outputs(&output, &out).with_context(|| format!("writing to {}", out.display()))?;
            writeln!(
                stdout,
                "{}: {} days, {} visits, {:.1} customers per open day, {} transactions",
                output.department,
                config.run_length_days,
                output.visits(),
                output.mean_daily_customers(),
                output.transactions()
            )?;
            for (name, value) in output.measures() {
                if name.starts_with("share_") || name.starts_with("utilisation_") {
                    writeln!(stdout, "  {name:40} {value:.4}")?;
                }
            }
            for f in files {
                writeln!(stdout, "wrote {}", f.display())?;
            }
        }
        Command::Experiment { spec, jobs, out } => {
            let (spec, base_dir) = resolve_experiment(&spec)?;
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let out = out.unwrap_or_else(|| PathBuf::from("results").join(&spec.name));
            writeln!(
                stdout,
                "{}: {} levels x {} replications x {} days on {jobs} threads",
                spec.name,
                spec.level_count(),
                spec.replications,
                spec.days
            )?;
            let result = run_experiment(&spec, &base_dir, jobs)?;
            emit_report(&result, &out)?;
            let table = MeasureTable::from_result(&result);
            let tests = table.comparisons(&spec.tests);
            write!(stdout, "{}", summary_text(&table, &tests, &SUMMARY_MEASURES))?;
            writeln!(stdout, "report written to {}", out.display())?;
        }
        Command::Report { input } => {
            let (spec, table, tests) = rebuild_report(&input)?;
            writeln!(stdout, "{} ({} levels)", spec.name, table.levels.len())?;
            write!(stdout, "{}", summary_text(&table, &tests, &SUMMARY_MEASURES))?;
            writeln!(stdout, "rewrote descriptives.csv and tests.csv in {}", input.display())?;
        }
        Command::List => {
            writeln!(stdout, "scenarios: {}", bundled_scenario_names().collect::<Vec<_>>().join(", "))?;
            writeln!(stdout, "experiments: {}", bundled_experiment_names().collect::<Vec<_>>().join(", "))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> anyhow::Result<String> {
        let cli = Cli::try_parse_from(std::iter::once("deptsim").chain(args.iter().copied()))?;
        let mut buf = Vec::new();
        execute(cli, &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn run_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let text = run(&["run", "--scenario", "atv", "--days", "2", "--mode", "noise-reduction", "--out", out]).unwrap();
        assert!(text.contains("wrote"));
        for f in crate::metrics::OUTPUT_FILES {
            assert!(dir.path().join(f).is_file());
        }
        let params = std::fs::read_to_string(dir.path().join("params.csv")).unwrap();
        assert!(params.contains("mode,noise-reduction"));
    }

    #[test]
    fn bad_inputs_fail() {
        assert!(run(&["run", "--scenario", "nowhere"]).is_err());
        assert!(run(&["run", "--scenario", "atv", "--mode", "quiet"]).is_err());
        assert!(run(&["experiment", "--spec", "nowhere"]).is_err());
        assert!(run(&["report", "--in", "/nonexistent/dir"]).is_err());
    }

    #[test]
    fn experiment_then_report() {
        let dir = tempfile::tempdir().unwrap();
        let spec = dir.path().join("spec.toml");
        std::fs::write(
            &spec,
            "name = \"cli\"\nscenario = \"ww\"\nparameter = \"pool_size\"\nlevels = [300, 600]\n\
             replications = 2\ndays = 2\ntests = [[0, 1]]\n",
        )
        .unwrap();
        let out = dir.path().join("res");
        let text = run(&[
            "experiment",
            "--spec",
            spec.to_str().unwrap(),
            "--jobs",
            "2",
            "--out",
            out.to_str().unwrap(),
        ])
        .unwrap();
        assert!(text.contains("mean_daily_customers"));
        let text = run(&["report", "--in", out.to_str().unwrap()]).unwrap();
        assert!(text.starts_with("cli (2 levels)"));
    }

    #[test]
    fn list_names_bundled_inputs() {
        let text = run(&["list"]).unwrap();
        assert!(text.contains("atv") && text.contains("wom-sweep"));
    }
}

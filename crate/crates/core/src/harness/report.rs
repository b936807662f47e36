//! Experiment reports.
//!
//! | file                | columns                                                    |
//! |---------------------|------------------------------------------------------------|
//! | `experiment.toml`   | the spec that produced the results                         |
//! | `runs.csv`          | `level,label,replication,measure,value`                    |
//! | `descriptives.csv`  | `level,label,measure,n,mean,sd`                            |
//! | `tests.csv`         | see [`TESTS_HEADER`]                                       |
//! | `daily.csv`         | see [`DAILY_SERIES_HEADER`], one row per run and day       |
//! | `daily_means.csv`   | see [`DAILY_MEANS_HEADER`], averaged over replications     |
//!
//! `descriptives.csv` and `tests.csv` are pure functions of `runs.csv` and
//! the spec, so [`rebuild_report`] can regenerate them from disk.

use super::experiment::{ExperimentError, ExperimentResult, ExperimentSpec};
use super::stats::{compare, descriptives, Comparison, StatsError};
use crate::metrics::fmt_value;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Spec(#[from] ExperimentError),
}

pub const TESTS_HEADER: &str = "measure,level_a,level_b,label_a,label_b,levene_w,levene_p,\
student_t,student_df,student_p,welch_t,welch_df,welch_p,selected,t,df,p,eta_squared,note";

pub const DAILY_SERIES_HEADER: &str = "level,label,replication,day,weekday,customers,transactions,\
refunds,reneged,epv_satisfied,epv_neutral,epv_dissatisfied,ahd_satisfied,ahd_neutral,ahd_dissatisfied,wom_extra";

pub const DAILY_MEANS_HEADER: &str = "level,label,day,weekday,customers_mean,customers_sd,\
transactions_mean,reneged_mean,wom_extra_mean";

/// Replication-level scalar measures, grouped by level.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasureTable {
    pub levels: Vec<LevelMeasures>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelMeasures {
    pub label: String,
    pub runs: Vec<(u64, Vec<(String, f64)>)>,
}

impl MeasureTable {
    pub fn from_result(result: &ExperimentResult) -> Self {
        Self {
            levels: result
                .levels
                .iter()
                .map(|l| LevelMeasures {
                    label: l.label.clone(),
                    runs: l.runs.iter().map(|r| (r.replication, r.measures())).collect(),
                })
                .collect(),
        }
    }

    /// Measure names in order of first appearance.
    pub fn measure_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for (_, ms) in self.levels.iter().flat_map(|l| &l.runs) {
            for (name, _) in ms {
                if !names.contains(name) {
                    names.push(name.clone());
                }
            }
        }
        names
    }

    /// Values of one measure at one level, in replication order. Runs
    /// that lack the measure are skipped.
    pub fn values(&self, level: usize, measure: &str) -> Vec<f64> {
        self.levels[level]
            .runs
            .iter()
            .filter_map(|(_, ms)| ms.iter().find(|(n, _)| n == measure).map(|(_, v)| *v))
            .collect()
    }

    pub fn runs_csv(&self) -> String {
        let mut s = String::from("level,label,replication,measure,value\n");
        for (i, level) in self.levels.iter().enumerate() {
            for (rep, ms) in &level.runs {
                for (name, v) in ms {
                    // Shortest round-trip form.
                    let _ = writeln!(s, "{i},{},{rep},{name},{v}", level.label);
                }
            }
        }
        s
    }

    pub fn parse_runs_csv(text: &str, path: &Path) -> Result<Self, ReportError> {
        let mut table = MeasureTable::default();
        let malformed = |line: usize, message: String| ReportError::Malformed {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "level,label,replication,measure,value")) => {}
            _ => return Err(malformed(1, "unexpected header".into())),
        }
        for (i, line) in lines {
            let line_no = i + 1;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(malformed(line_no, format!("expected 5 fields, got {}", f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| malformed(line_no, format!("{s}: {e}")));
            let level: usize = f[0].parse().map_err(|_| malformed(line_no, "bad level".into()))?;
            let rep: u64 = f[2].parse().map_err(|_| malformed(line_no, "bad replication".into()))?;
            let value = num(f[4])?;
            if level > table.levels.len() {
                return Err(malformed(line_no, "levels out of order".into()));
            }
            if level == table.levels.len() {
                table.levels.push(LevelMeasures {
                    label: f[1].to_string(),
                    runs: Vec::new(),
                });
            }
            let runs = &mut table.levels[level].runs;
            if runs.last().map(|(r, _)| *r) != Some(rep) {
                runs.push((rep, Vec::new()));
            }
            runs.last_mut().expect("just pushed").1.push((f[3].to_string(), value));
        }
        Ok(table)
    }

    pub fn descriptives_csv(&self) -> String {
        let mut s = String::from("level,label,measure,n,mean,sd\n");
        let names = self.measure_names();
        for (i, level) in self.levels.iter().enumerate() {
            for name in &names {
                let xs = self.values(i, name);
                if xs.is_empty() {
                    continue;
                }
                let d = descriptives(&xs);
                let sd = d.sd.map(fmt_value).unwrap_or_default();
                let _ = writeln!(s, "{i},{},{name},{},{},{sd}", level.label, d.n, fmt_value(d.mean));
            }
        }
        s
    }

    /// Every measure compared between each requested level pair.
    pub fn comparisons(&self, pairs: &[[usize; 2]]) -> Vec<TestRow> {
        let names = self.measure_names();
        let mut rows = Vec::new();
        for &[a, b] in pairs {
            if a >= self.levels.len() || b >= self.levels.len() {
                continue;
            }
            for name in &names {
                let (xa, xb) = (self.values(a, name), self.values(b, name));
                if xa.is_empty() && xb.is_empty() {
                    continue;
                }
                rows.push(TestRow {
                    measure: name.clone(),
                    levels: [a, b],
                    labels: [self.levels[a].label.clone(), self.levels[b].label.clone()],
                    outcome: compare(&xa, &xb),
                });
            }
        }
        rows
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestRow {
    pub measure: String,
    pub levels: [usize; 2],
    pub labels: [String; 2],
    pub outcome: Result<Comparison, StatsError>,
}

pub fn tests_csv(rows: &[TestRow]) -> String {
    let mut s = String::from(TESTS_HEADER);
    s.push('\n');
    for row in rows {
        let head = format!(
            "{},{},{},{},{}",
            row.measure, row.levels[0], row.levels[1], row.labels[0], row.labels[1]
        );
        match &row.outcome {
            Ok(c) => {
                let chosen = c.chosen();
                let note = if c.degenerate { "degenerate" } else { "" };
                let _ = writeln!(
                    s,
                    "{head},{},{},{},{},{},{},{},{},{},{},{},{},{},{note}",
                    fmt_value(c.levene.statistic),
                    fmt_value(c.levene.p),
                    fmt_value(c.student.statistic),
                    fmt_value(c.student.df),
                    fmt_value(c.student.p),
                    fmt_value(c.welch.statistic),
                    fmt_value(c.welch.df),
                    fmt_value(c.welch.p),
                    c.selected.name(),
                    fmt_value(chosen.statistic),
                    fmt_value(chosen.df),
                    fmt_value(chosen.p),
                    fmt_value(c.eta_squared),
                );
            }
            Err(e) => {
                let _ = writeln!(s, "{head},,,,,,,,,,,,,,{}", e.to_string().replace(',', ";"));
            }
        }
    }
    s
}

pub fn daily_series_csv(result: &ExperimentResult) -> String {
    let mut s = String::from(DAILY_SERIES_HEADER);
    s.push('\n');
    for (i, level) in result.levels.iter().enumerate() {
        for run in &level.runs {
            for d in &run.daily {
                let _ = writeln!(
                    s,
                    "{i},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    level.label,
                    run.replication,
                    d.day + 1,
                    d.weekday.name(),
                    d.customers,
                    d.transactions,
                    d.refunds,
                    d.reneged,
                    d.epv.satisfied,
                    d.epv.neutral,
                    d.epv.dissatisfied,
                    d.ahd.satisfied,
                    d.ahd.neutral,
                    d.ahd.dissatisfied,
                    d.wom_extra,
                );
            }
        }
    }
    s
}

pub fn daily_means_csv(result: &ExperimentResult) -> String {
    let mut s = String::from(DAILY_MEANS_HEADER);
    s.push('\n');
    for (i, level) in result.levels.iter().enumerate() {
        let Some(first) = level.runs.first() else {
            continue;
        };
        for (day, tally) in first.daily.iter().enumerate() {
            let column = |f: &dyn Fn(&crate::metrics::DailyTally) -> f64| -> Vec<f64> {
                level.runs.iter().map(|r| f(&r.daily[day])).collect()
            };
            let customers = descriptives(&column(&|d| d.customers as f64));
            let _ = writeln!(
                s,
                "{i},{},{},{},{},{},{},{},{}",
                level.label,
                day + 1,
                tally.weekday.name(),
                fmt_value(customers.mean),
                customers.sd.map(fmt_value).unwrap_or_default(),
                fmt_value(descriptives(&column(&|d| d.transactions as f64)).mean),
                fmt_value(descriptives(&column(&|d| d.reneged as f64)).mean),
                fmt_value(descriptives(&column(&|d| d.wom_extra as f64)).mean),
            );
        }
    }
    s
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf, ReportError> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|source| ReportError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes the full report for a finished experiment.
pub fn emit_report(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let table = MeasureTable::from_result(result);
    let tests = table.comparisons(&result.spec.tests);
    [
        ("experiment.toml", result.spec.to_toml_string()),
        ("runs.csv", table.runs_csv()),
        ("descriptives.csv", table.descriptives_csv()),
        ("tests.csv", tests_csv(&tests)),
        ("daily.csv", daily_series_csv(result)),
        ("daily_means.csv", daily_means_csv(result)),
    ]
    .iter()
    .map(|(name, body)| write(dir, name, body))
    .collect()
}

/// Reads `experiment.toml` and `runs.csv` from a report directory and
/// rewrites the descriptives and tests. Returns the rebuilt table and
/// test rows.
pub fn rebuild_report(dir: &Path) -> Result<(ExperimentSpec, MeasureTable, Vec<TestRow>), ReportError> {
    let read = |name: &str| {
        let path = dir.join(name);
        std::fs::read_to_string(&path)
            .map(|text| (text, path.clone()))
            .map_err(|source| ReportError::Io { path, source })
    };
    let (spec_text, _) = read("experiment.toml")?;
    let spec = ExperimentSpec::from_toml_str(&spec_text)?;
    let (runs_text, runs_path) = read("runs.csv")?;
    let table = MeasureTable::parse_runs_csv(&runs_text, &runs_path)?;
    let tests = table.comparisons(&spec.tests);
    write(dir, "descriptives.csv", &table.descriptives_csv())?;
    write(dir, "tests.csv", &tests_csv(&tests))?;
    Ok((spec, table, tests))
}

/// Human-readable summary of selected measures.
pub fn summary_text(table: &MeasureTable, tests: &[TestRow], measures: &[&str]) -> String {
    let mut s = String::new();
    let width = measures.iter().map(|m| m.len()).max().unwrap_or(0).max(7);
    let _ = write!(s, "{:width$}", "measure");
    for level in &table.levels {
        let _ = write!(s, "  {:>22}", level.label);
    }
    s.push('\n');
    for &m in measures {
        let _ = write!(s, "{m:width$}");
        for i in 0..table.levels.len() {
            let xs = table.values(i, m);
            if xs.is_empty() {
                let _ = write!(s, "  {:>22}", "-");
                continue;
            }
            let d = descriptives(&xs);
            let cell = match d.sd {
                Some(sd) => format!("{:.2} ({:.2})", d.mean, sd),
                None => format!("{:.2}", d.mean),
            };
            let _ = write!(s, "  {cell:>22}");
        }
        s.push('\n');
    }
    let shown: Vec<&TestRow> = tests.iter().filter(|r| measures.contains(&r.measure.as_str())).collect();
    if !shown.is_empty() {
        s.push('\n');
        for row in shown {
            let _ = write!(s, "{:width$}  {} vs {}: ", row.measure, row.labels[0], row.labels[1]);
            match &row.outcome {
                Ok(c) => {
                    let t = c.chosen();
                    let _ = writeln!(
                        s,
                        "{} t = {:.3}, df = {:.1}, p = {:.4}, eta2 = {:.3}",
                        c.selected.name(),
                        t.statistic,
                        t.df,
                        t.p,
                        c.eta_squared
                    );
                }
                Err(e) => {
                    let _ = writeln!(s, "{e}");
                }
            }
        }
    }
    s
}

/// Measures shown on the console by default.
pub const SUMMARY_MEASURES: [&str; 8] = [
    "mean_daily_customers",
    "transactions",
    "share_left_after_purchase",
    "share_left_while_waiting_to_pay",
    "share_left_before_normal_help",
    "share_ahd_neutral",
    "share_epv_neutral",
    "utilisation_cashier",
];

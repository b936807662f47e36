//! Satisfaction classification, per-run performance measures and their
//! CSV serialisation.
//!
//! Two satisfaction measures are kept side by side:
//!
//! * **EPV** (experience per visit) classifies the score of the visit that
//!   just ended.
//! * **AHD** (accumulated historical data) classifies the customer's
//!   lifetime score after adding that visit.
//!
//! Output files, all comma-separated with a header row and LF endings:
//!
//! | file                  | columns                                   |
//! |-----------------------|-------------------------------------------|
//! | `params.csv`          | `key,value`                               |
//! | `counters.csv`        | `measure,value`                           |
//! | `daily.csv`           | see [`DAILY_HEADER`]                      |
//! | `score_histogram.csv` | `score,count`                             |

use crate::agents::{CustomerAgent, ExitReason, ExitRecord, QueueKind, QueueStats};
use crate::config::{ScenarioConfig, StaffRole, Weekday};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SatisfactionClass {
    Satisfied,
    Neutral,
    Dissatisfied,
}

impl SatisfactionClass {
    pub const ALL: [SatisfactionClass; 3] = [Self::Satisfied, Self::Neutral, Self::Dissatisfied];

    pub fn name(self) -> &'static str {
        match self {
            Self::Satisfied => "satisfied",
            Self::Neutral => "neutral",
            Self::Dissatisfied => "dissatisfied",
        }
    }
}

pub fn classify(score: i64) -> SatisfactionClass {
    classify_with_band(score, 0)
}

/// Scores within `band` of zero are neutral.
pub fn classify_with_band(score: i64, band: u32) -> SatisfactionClass {
    let band = i64::from(band);
    if score > band {
        SatisfactionClass::Satisfied
    } else if score < -band {
        SatisfactionClass::Dissatisfied
    } else {
        SatisfactionClass::Neutral
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub satisfied: u64,
    pub neutral: u64,
    pub dissatisfied: u64,
}

impl ClassCounts {
    pub fn add(&mut self, class: SatisfactionClass) {
        match class {
            SatisfactionClass::Satisfied => self.satisfied += 1,
            SatisfactionClass::Neutral => self.neutral += 1,
            SatisfactionClass::Dissatisfied => self.dissatisfied += 1,
        }
    }

    pub fn get(&self, class: SatisfactionClass) -> u64 {
        match class {
            SatisfactionClass::Satisfied => self.satisfied,
            SatisfactionClass::Neutral => self.neutral,
            SatisfactionClass::Dissatisfied => self.dissatisfied,
        }
    }

    pub fn total(&self) -> u64 {
        self.satisfied + self.neutral + self.dissatisfied
    }
}

/// Per-day measures; `epv.satisfied` and `epv.dissatisfied` feed the next
/// day's word of mouth.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyTally {
    pub day: usize,
    pub weekday: Weekday,
    pub customers: u64,
    pub transactions: u64,
    pub refunds: u64,
    pub epv: ClassCounts,
    pub ahd: ClassCounts,
    pub visit_score_sum: i64,
    pub lifetime_score_sum: i64,
    pub reneged: u64,
    pub wom_extra: i64,
}

impl DailyTally {
    pub fn new(day: usize, weekday: Weekday, wom_extra: i64) -> Self {
        Self {
            day,
            weekday,
            customers: 0,
            transactions: 0,
            refunds: 0,
            epv: ClassCounts::default(),
            ahd: ClassCounts::default(),
            visit_score_sum: 0,
            lifetime_score_sum: 0,
            reneged: 0,
            wom_extra,
        }
    }

    pub fn n_satisfied(&self) -> u64 {
        self.epv.satisfied
    }

    pub fn n_dissatisfied(&self) -> u64 {
        self.epv.dissatisfied
    }

    pub fn mean_visit_score(&self) -> f64 {
        mean_or_zero(self.visit_score_sum as f64, self.customers)
    }

    pub fn mean_lifetime_score(&self) -> f64 {
        mean_or_zero(self.lifetime_score_sum as f64, self.customers)
    }
}

fn mean_or_zero(sum: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Utilisation {
    pub busy_minutes: f64,
    pub rostered_minutes: f64,
}

impl Utilisation {
    pub fn ratio(&self) -> f64 {
        if self.rostered_minutes > 0.0 {
            self.busy_minutes / self.rostered_minutes
        } else {
            0.0
        }
    }
}

/// Everything measured in one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub department: String,
    pub replication: u64,
    pub params: Vec<(String, String)>,
    pub exits: BTreeMap<ExitReason, u64>,
    pub ahd: ClassCounts,
    pub epv: ClassCounts,
    pub refunds: u64,
    pub queues: [QueueStats; 4],
    pub daily: Vec<DailyTally>,
    pub score_histogram: BTreeMap<i64, u64>,
    /// Keyed by dedicated role; `GenericPt` holds the pooled part-timers.
    pub utilisation: BTreeMap<StaffRole, Utilisation>,
    neutral_band: u32,
}

impl RunOutput {
    pub fn new(config: &ScenarioConfig, replication: u64) -> Self {
        Self {
            department: config.department_name.clone(),
            replication,
            params: flatten_params(config),
            exits: ExitReason::ALL.iter().map(|&r| (r, 0)).collect(),
            ahd: ClassCounts::default(),
            epv: ClassCounts::default(),
            refunds: 0,
            queues: [QueueStats::default(); 4],
            daily: Vec::new(),
            score_histogram: BTreeMap::new(),
            utilisation: BTreeMap::new(),
            neutral_band: config.neutral_band,
        }
    }

    pub fn visits(&self) -> u64 {
        self.exits.values().sum()
    }

    pub fn exit_count(&self, reason: ExitReason) -> u64 {
        self.exits.get(&reason).copied().unwrap_or(0)
    }

    pub fn transactions(&self) -> u64 {
        self.exit_count(ExitReason::Purchased)
    }

    /// Books a finished visit: exit counter, EPV on the visit score, then
    /// the lifetime update and AHD on the new lifetime score.
    pub fn record_exit(&mut self, customer: &mut CustomerAgent, exit: &ExitRecord, day: usize) {
        debug_assert_eq!(customer.id, exit.customer);
        *self.exits.entry(exit.reason).or_default() += 1;
        let epv = classify_with_band(exit.visit_score, self.neutral_band);
        customer.lifetime_score += exit.visit_score;
        customer.visits += 1;
        let ahd = classify_with_band(customer.lifetime_score, self.neutral_band);
        self.epv.add(epv);
        self.ahd.add(ahd);
        *self.score_histogram.entry(exit.visit_score).or_default() += 1;
        if exit.refunded {
            self.refunds += 1;
        }

        let tally = &mut self.daily[day];
        tally.customers += 1;
        tally.epv.add(epv);
        tally.ahd.add(ahd);
        tally.visit_score_sum += exit.visit_score;
        tally.lifetime_score_sum += customer.lifetime_score;
        match exit.reason {
            ExitReason::Purchased => tally.transactions += 1,
            ExitReason::RenegedTill
            | ExitReason::RenegedNormalHelp
            | ExitReason::RenegedExpertHelp
            | ExitReason::RenegedRefund => tally.reneged += 1,
            _ => {}
        }
        if exit.refunded {
            tally.refunds += 1;
        }
    }

    pub fn mean_daily_customers(&self) -> f64 {
        let open: Vec<&DailyTally> = self.daily.iter().filter(|d| d.customers > 0).collect();
        mean_or_zero(open.iter().map(|d| d.customers as f64).sum(), open.len() as u64)
    }

    /// Named scalar measures used for cross-replication statistics, in a
    /// fixed order.
    pub fn measures(&self) -> Vec<(String, f64)> {
        let visits = self.visits();
        let share = |n: u64| mean_or_zero(n as f64, visits);
        let mut m = vec![
            ("visits".to_string(), visits as f64),
            ("mean_daily_customers".to_string(), self.mean_daily_customers()),
            ("transactions".to_string(), self.transactions() as f64),
            ("refunds_granted".to_string(), self.refunds as f64),
        ];
        for (&reason, &n) in &self.exits {
            m.push((reason.name().to_string(), n as f64));
        }
        for (label, counts) in [("ahd", &self.ahd), ("epv", &self.epv)] {
            for class in SatisfactionClass::ALL {
                m.push((format!("{label}_{}", class.name()), counts.get(class) as f64));
            }
        }
        for kind in QueueKind::ALL {
            let q = self.queues[kind.index()];
            m.push((format!("queue_{}_queued", kind.name()), q.queued as f64));
            m.push((format!("queue_{}_reneged", kind.name()), q.reneged as f64));
        }
        for (&reason, &n) in &self.exits {
            m.push((format!("share_{}", reason.name()), share(n)));
        }
        for (label, counts) in [("ahd", &self.ahd), ("epv", &self.epv)] {
            for class in SatisfactionClass::ALL {
                m.push((format!("share_{label}_{}", class.name()), share(counts.get(class))));
            }
        }
        for (role, u) in &self.utilisation {
            m.push((format!("utilisation_{}", role.name()), u.ratio()));
        }
        m
    }

    pub fn counters_csv(&self) -> String {
        let mut s = String::from("measure,value\n");
        for (name, value) in self.measures() {
            let _ = writeln!(s, "{name},{}", fmt_value(value));
        }
        s
    }

    pub fn daily_csv(&self) -> String {
        let mut s = String::from(DAILY_HEADER);
        s.push('\n');
        let mut prev: Option<&DailyTally> = None;
        for d in &self.daily {
            let (visit_growth, lifetime_growth) = match prev {
                Some(p) => (
                    d.mean_visit_score() - p.mean_visit_score(),
                    d.mean_lifetime_score() - p.mean_lifetime_score(),
                ),
                None => (0.0, 0.0),
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
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
                d.mean_visit_score(),
                d.mean_lifetime_score(),
                visit_growth,
                lifetime_growth,
                d.wom_extra,
            );
            prev = Some(d);
        }
        s
    }

    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("score,count\n");
        for (score, count) in &self.score_histogram {
            let _ = writeln!(s, "{score},{count}");
        }
        s
    }

    pub fn params_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        let _ = writeln!(s, "replication,{}", self.replication);
        for (k, v) in &self.params {
            let _ = writeln!(s, "{k},{}", csv_field(v));
        }
        s
    }
}

pub const DAILY_HEADER: &str = "day,weekday,customers,transactions,refunds,reneged,\
epv_satisfied,epv_neutral,epv_dissatisfied,ahd_satisfied,ahd_neutral,ahd_dissatisfied,\
mean_visit_score,mean_lifetime_score,visit_score_growth,lifetime_score_growth,wom_extra";

pub fn fmt_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.6}")
    }
}

fn csv_field(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

/// Flattens the scenario into dotted `key = value` pairs.
pub fn flatten_params(config: &ScenarioConfig) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &toml::Value, out: &mut Vec<(String, String)>) {
        match v {
            toml::Value::Table(t) => {
                for (k, v) in t {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, v, out);
                }
            }
            toml::Value::Array(items) if items.iter().any(|i| i.is_table()) => {
                for (i, item) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), item, out);
                }
            }
            toml::Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect();
                out.push((prefix.to_string(), parts.join(" ")));
            }
            other => out.push((prefix.to_string(), scalar(other))),
        }
    }
    fn scalar(v: &toml::Value) -> String {
        match v {
            toml::Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }
    let value = toml::Value::try_from(config).expect("scenario converts to TOML");
    let mut out = Vec::new();
    walk("", &value, &mut out);
    out
}

pub const OUTPUT_FILES: [&str; 4] = ["params.csv", "counters.csv", "daily.csv", "score_histogram.csv"];

pub fn write_outputs(output: &RunOutput, directory: &Path) -> std::io::Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(directory)?;
    let contents = [
        output.params_csv(),
        output.counters_csv(),
        output.daily_csv(),
        output.histogram_csv(),
    ];
    OUTPUT_FILES
        .iter()
        .zip(contents)
        .map(|(name, body)| {
            let path = directory.join(name);
            std::fs::write(&path, body)?;
            Ok(path)
        })
        .collect()
}

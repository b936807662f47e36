//! Scenario files: loading, validation, saving and the noise-reduction
//! transformation.
//!
//! A scenario is a TOML document whose keys are the field names of
//! [`ScenarioConfig`]. Everything except `department_name`, `pool_size`,
//! `customer_type_split` and `calendar` has a default, so a minimal file
//! only needs those four. See `scenarios/atv.toml` for a complete example.

use crate::stochastic::{LikelihoodLevel, TriangularParams};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

pub const MINUTES_PER_DAY: u32 = 24 * 60;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("invalid scenario field `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("unknown bundled scenario `{0}`")]
    UnknownScenario(String),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CustomerType {
    ShoppingEnthusiast,
    SolutionDemander,
    ServiceSeeker,
    DisinterestedShopper,
    InternetShopper,
}

impl CustomerType {
    pub const ALL: [CustomerType; 5] = [
        Self::ShoppingEnthusiast,
        Self::SolutionDemander,
        Self::ServiceSeeker,
        Self::DisinterestedShopper,
        Self::InternetShopper,
    ];
}

/// Likelihood of performing each action, per customer type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomerTypeProfile {
    pub likelihood_buy: LikelihoodLevel,
    pub likelihood_wait: LikelihoodLevel,
    pub likelihood_ask_help: LikelihoodLevel,
    pub likelihood_ask_refund: LikelihoodLevel,
}

impl CustomerTypeProfile {
    /// Default behaviour profile of each customer type.
    pub fn standard(kind: CustomerType) -> Self {
        use LikelihoodLevel::*;
        let (buy, wait, help, refund) = match kind {
            CustomerType::ShoppingEnthusiast => (High, Moderate, Moderate, Low),
            CustomerType::SolutionDemander => (High, Low, Low, Low),
            CustomerType::ServiceSeeker => (Moderate, High, High, Low),
            CustomerType::DisinterestedShopper => (Low, Low, Low, High),
            CustomerType::InternetShopper => (Low, High, High, Low),
        };
        Self {
            likelihood_buy: buy,
            likelihood_wait: wait,
            likelihood_ask_help: help,
            likelihood_ask_refund: refund,
        }
    }
}

fn standard_profiles() -> BTreeMap<CustomerType, CustomerTypeProfile> {
    CustomerType::ALL
        .iter()
        .map(|&t| (t, CustomerTypeProfile::standard(t)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StaffRole {
    NormalService,
    Expert,
    Cashier,
    Manager,
    GenericPt,
}

impl StaffRole {
    /// Roles that appear in daily staffing requirements.
    pub const DEDICATED: [StaffRole; 4] = [
        Self::NormalService,
        Self::Expert,
        Self::Cashier,
        Self::Manager,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::NormalService => "normal_service",
            Self::Expert => "expert",
            Self::Cashier => "cashier",
            Self::Manager => "manager",
            Self::GenericPt => "generic_pt",
        }
    }
}

/// State-chart transitions that carry a satisfaction weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionKind {
    ImmediateService,
    ServiceCompleted,
    Reneged,
    PurchaseMade,
    LeftEmptyHanded,
    RefundGranted,
    QuickExit,
}

impl TransitionKind {
    pub const ALL: [TransitionKind; 7] = [
        Self::ImmediateService,
        Self::ServiceCompleted,
        Self::Reneged,
        Self::PurchaseMade,
        Self::LeftEmptyHanded,
        Self::RefundGranted,
        Self::QuickExit,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionPoint {
    PurchaseAfterBrowse,
    RequiresHelp,
    PurchaseAfterHelp,
    ExpertHelp,
    RefundGranted,
    ReshopAfterRefund,
}

/// Base probabilities of every branch in the customer state chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecisionTable {
    pub purchase_after_browse: f64,
    pub requires_help: f64,
    pub purchase_after_help: f64,
    /// Share of help requests that go to the expert queue.
    pub expert_help: f64,
    pub refund_granted: f64,
    pub reshop_after_refund: f64,
}

impl Default for DecisionTable {
    fn default() -> Self {
        Self {
            purchase_after_browse: 0.37,
            requires_help: 0.38,
            purchase_after_help: 0.56,
            expert_help: 0.25,
            refund_granted: 0.9,
            reshop_after_refund: 0.5,
        }
    }
}

impl DecisionTable {
    pub fn get(&self, point: DecisionPoint) -> f64 {
        match point {
            DecisionPoint::PurchaseAfterBrowse => self.purchase_after_browse,
            DecisionPoint::RequiresHelp => self.requires_help,
            DecisionPoint::PurchaseAfterHelp => self.purchase_after_help,
            DecisionPoint::ExpertHelp => self.expert_help,
            DecisionPoint::RefundGranted => self.refund_granted,
            DecisionPoint::ReshopAfterRefund => self.reshop_after_refund,
        }
    }

    fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("purchase_after_browse", self.purchase_after_browse),
            ("requires_help", self.requires_help),
            ("purchase_after_help", self.purchase_after_help),
            ("expert_help", self.expert_help),
            ("refund_granted", self.refund_granted),
            ("reshop_after_refund", self.reshop_after_refund),
        ]
    }
}

/// Triangular durations (minutes) for browsing, services and patience.
/// Optional entries fall back to the closest specified one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelayTable {
    pub browse: TriangularParams,
    pub help: TriangularParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expert_help: Option<TriangularParams>,
    pub payment: TriangularParams,
    pub refund_decision: TriangularParams,
    pub pay_queue_patience: TriangularParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub help_queue_patience: Option<TriangularParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refund_queue_patience: Option<TriangularParams>,
}

impl Default for DelayTable {
    fn default() -> Self {
        Self {
            browse: TriangularParams::new(1.0, 7.0, 15.0),
            help: TriangularParams::new(3.0, 15.0, 30.0),
            expert_help: None,
            // Estimates; no observed values for paying and refund handling.
            payment: TriangularParams::new(1.0, 2.0, 4.0),
            refund_decision: TriangularParams::new(2.0, 5.0, 10.0),
            pay_queue_patience: TriangularParams::new(5.0, 12.0, 20.0),
            help_queue_patience: None,
            refund_queue_patience: None,
        }
    }
}

impl DelayTable {
    pub fn expert_help(&self) -> TriangularParams {
        self.expert_help.unwrap_or(self.help)
    }

    pub fn help_queue_patience(&self) -> TriangularParams {
        self.help_queue_patience.unwrap_or(self.pay_queue_patience)
    }

    pub fn refund_queue_patience(&self) -> TriangularParams {
        self.refund_queue_patience.unwrap_or(self.pay_queue_patience)
    }

    fn entries(&self) -> Vec<(&'static str, TriangularParams)> {
        let mut v = vec![
            ("browse", self.browse),
            ("help", self.help),
            ("payment", self.payment),
            ("refund_decision", self.refund_decision),
            ("pay_queue_patience", self.pay_queue_patience),
        ];
        v.extend(self.expert_help.map(|p| ("expert_help", p)));
        v.extend(self.help_queue_patience.map(|p| ("help_queue_patience", p)));
        v.extend(self.refund_queue_patience.map(|p| ("refund_queue_patience", p)));
        v
    }
}

pub type WeightTable = BTreeMap<TransitionKind, i32>;

pub fn default_weights() -> WeightTable {
    use TransitionKind::*;
    [
        (ImmediateService, 2),
        (ServiceCompleted, 2),
        (Reneged, -2),
        (PurchaseMade, 1),
        (LeftEmptyHanded, -1),
        (RefundGranted, 1),
        (QuickExit, 0),
    ]
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weekday {
    Mon,
    Tue,
    Wed,
    Thu,
    Fri,
    Sat,
    Sun,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Self::Mon,
        Self::Tue,
        Self::Wed,
        Self::Thu,
        Self::Fri,
        Self::Sat,
        Self::Sun,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i % 7]
    }

    pub fn plus_days(self, days: usize) -> Self {
        Self::from_index(self.index() + days)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Mon => "mon",
            Self::Tue => "tue",
            Self::Wed => "wed",
            Self::Thu => "thu",
            Self::Fri => "fri",
            Self::Sat => "sat",
            Self::Sun => "sun",
        }
    }
}

/// Minutes after midnight, written as `"HH:MM"` in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockTime(pub u32);

impl ClockTime {
    pub fn hm(hours: u32, minutes: u32) -> Self {
        Self(hours * 60 + minutes)
    }

    pub fn minutes(self) -> u32 {
        self.0
    }
}

impl fmt::Display for ClockTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

impl FromStr for ClockTime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (h, m) = s
            .split_once(':')
            .ok_or_else(|| format!("expected HH:MM, got `{s}`"))?;
        let h: u32 = h.parse().map_err(|_| format!("bad hour in `{s}`"))?;
        let m: u32 = m.parse().map_err(|_| format!("bad minute in `{s}`"))?;
        if m >= 60 || h * 60 + m > MINUTES_PER_DAY {
            return Err(format!("time `{s}` out of range"));
        }
        Ok(Self(h * 60 + m))
    }
}

impl Serialize for ClockTime {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClockTime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One day of the week. A day without `open`/`close` is closed.
///
/// `footfall` holds the expected number of arrivals per open hour, one
/// entry per started hour; a trailing partial hour is prorated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DaySchedule {
    pub weekday: Weekday,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open: Option<ClockTime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub close: Option<ClockTime>,
    #[serde(default)]
    pub footfall: Vec<f64>,
    #[serde(default)]
    pub staff: BTreeMap<StaffRole, u32>,
}

impl DaySchedule {
    pub fn closed(weekday: Weekday) -> Self {
        Self {
            weekday,
            open: None,
            close: None,
            footfall: Vec::new(),
            staff: BTreeMap::new(),
        }
    }

    pub fn is_open(&self) -> bool {
        self.open.is_some()
    }

    /// Open interval in minutes after midnight.
    pub fn hours(&self) -> Option<(u32, u32)> {
        Some((self.open?.minutes(), self.close?.minutes()))
    }

    pub fn open_minutes(&self) -> u32 {
        self.hours().map_or(0, |(o, c)| c - o)
    }

    /// Piecewise-constant arrival intensity as (start, end, arrivals per
    /// hour) segments, in minutes after midnight.
    pub fn segments(&self) -> Vec<(f64, f64, f64)> {
        let Some((open, close)) = self.hours() else {
            return Vec::new();
        };
        self.footfall
            .iter()
            .enumerate()
            .map(|(h, &rate)| {
                let start = open + 60 * h as u32;
                let end = (start + 60).min(close);
                (start as f64, end as f64, rate)
            })
            .filter(|(s, e, _)| e > s)
            .collect()
    }

    pub fn expected_arrivals(&self) -> f64 {
        self.segments()
            .iter()
            .map(|(s, e, rate)| rate * (e - s) / 60.0)
            .sum()
    }

    pub fn required(&self, role: StaffRole) -> u32 {
        self.staff.get(&role).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeekCalendar {
    /// Weekday of simulated day 0.
    #[serde(default = "default_start_weekday")]
    pub start_weekday: Weekday,
    pub days: Vec<DaySchedule>,
}

fn default_start_weekday() -> Weekday {
    Weekday::Mon
}

impl WeekCalendar {
    pub fn day(&self, weekday: Weekday) -> &DaySchedule {
        self.days
            .iter()
            .find(|d| d.weekday == weekday)
            .expect("calendar validated to cover every weekday")
    }

    pub fn for_sim_day(&self, day: usize) -> &DaySchedule {
        self.day(self.start_weekday.plus_days(day))
    }

    pub fn expected_weekly_arrivals(&self) -> f64 {
        self.days.iter().map(DaySchedule::expected_arrivals).sum()
    }
}

/// Which days full-timers cover; the remaining requirement on other days
/// is filled by generic part-timers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StaffingPlan {
    pub fulltime_days: Vec<Weekday>,
}

impl Default for StaffingPlan {
    fn default() -> Self {
        Self {
            fulltime_days: Weekday::ALL[..5].to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct WomConfig {
    pub adoption_fraction: f64,
    pub contact_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OperationMode {
    #[default]
    Normal,
    NoiseReduction,
}

impl FromStr for OperationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(Self::Normal),
            "noise-reduction" | "noise_reduction" => Ok(Self::NoiseReduction),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PickPolicy {
    #[default]
    Uniform,
    TypeQuota(BTreeMap<CustomerType, f64>),
    SatisfactionBiased,
}

/// Full parameterisation of one department.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub department_name: String,
    pub pool_size: usize,
    pub customer_type_split: BTreeMap<CustomerType, f64>,
    #[serde(default = "standard_profiles")]
    pub type_profiles: BTreeMap<CustomerType, CustomerTypeProfile>,
    #[serde(default = "default_refund_goal")]
    pub refund_goal_probability: f64,
    #[serde(default)]
    pub decision_table: DecisionTable,
    #[serde(default)]
    pub delay_table: DelayTable,
    #[serde(default = "default_weights")]
    pub weight_table: WeightTable,
    /// Scores with |score| <= neutral_band classify as neutral.
    #[serde(default)]
    pub neutral_band: u32,
    pub calendar: WeekCalendar,
    #[serde(default)]
    pub staffing: StaffingPlan,
    #[serde(default)]
    pub wom: WomConfig,
    #[serde(default)]
    pub mode: OperationMode,
    #[serde(default)]
    pub pick_policy: PickPolicy,
    #[serde(default = "default_run_length")]
    pub run_length_days: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_refund_goal() -> f64 {
    0.05
}

fn default_run_length() -> usize {
    70
}

const BUNDLED: [(&str, &str); 2] = [
    ("atv", include_str!("../scenarios/atv.toml")),
    ("ww", include_str!("../scenarios/ww.toml")),
];

pub fn bundled_scenario_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn bundled_scenario(name: &str) -> Result<ScenarioConfig, ConfigError> {
    let name = name.trim_end_matches(".scenario").trim_end_matches(".toml");
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ScenarioConfig::from_toml_str(text))
        .unwrap_or_else(|| Err(ConfigError::UnknownScenario(name.to_string())))
}

/// Loads a bundled scenario by name, or a scenario file by path.
pub fn resolve_scenario(name_or_path: &str) -> Result<ScenarioConfig, ConfigError> {
    let path = Path::new(name_or_path);
    if path.exists() {
        load_scenario(path)
    } else {
        bundled_scenario(name_or_path)
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioConfig::from_toml_str(&text)
}

pub fn save_scenario(config: &ScenarioConfig, path: &Path) -> Result<(), ConfigError> {
    std::fs::write(path, config.to_toml_string()).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn check_probability(field: String, p: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(field, format!("probability {p} outside [0, 1]")))
    }
}

fn check_split(field: &str, split: &BTreeMap<CustomerType, f64>) -> Result<(), ConfigError> {
    if split.is_empty() {
        return Err(invalid(field, "no customer types given"));
    }
    for (kind, &f) in split {
        check_probability(format!("{field}.{kind:?}"), f)?;
    }
    let total: f64 = split.values().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(field, format!("fractions sum to {total}, expected 1")));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serialises to TOML")
    }

    pub fn profile(&self, kind: CustomerType) -> CustomerTypeProfile {
        self.type_profiles[&kind]
    }

    pub fn weight(&self, kind: TransitionKind) -> i32 {
        self.weight_table[&kind]
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.pool_size == 0 {
            return Err(invalid("pool_size", "must be positive"));
        }
        if i64::try_from(self.seed).is_err() {
            return Err(invalid("seed", "must fit a TOML integer (at most 2^63 - 1)"));
        }
        check_split("customer_type_split", &self.customer_type_split)?;
        for kind in self.customer_type_split.keys() {
            if !self.type_profiles.contains_key(kind) {
                return Err(invalid(
                    format!("type_profiles.{kind:?}"),
                    "missing profile for a type in the split",
                ));
            }
        }
        check_probability("refund_goal_probability".into(), self.refund_goal_probability)?;
        for (name, p) in self.decision_table.entries() {
            check_probability(format!("decision_table.{name}"), p)?;
        }
        for (name, t) in self.delay_table.entries() {
            if !t.is_valid() {
                return Err(invalid(
                    format!("delay_table.{name}"),
                    format!("{t} violates 0 <= min <= mode <= max"),
                ));
            }
        }
        for kind in TransitionKind::ALL {
            if !self.weight_table.contains_key(&kind) {
                return Err(invalid(format!("weight_table.{kind:?}"), "missing weight"));
            }
        }
        self.validate_calendar()?;
        for (name, v) in [
            ("wom.adoption_fraction", self.wom.adoption_fraction),
            ("wom.contact_rate", self.wom.contact_rate),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(name, format!("{v} must be finite and >= 0")));
            }
        }
        if self.wom.adoption_fraction > 1.0 {
            return Err(invalid("wom.adoption_fraction", "must be <= 1"));
        }
        if let PickPolicy::TypeQuota(quota) = &self.pick_policy {
            check_split("pick_policy.type_quota", quota)?;
        }
        Ok(())
    }

    fn validate_calendar(&self) -> Result<(), ConfigError> {
        let days = &self.calendar.days;
        if days.len() != 7 {
            return Err(invalid(
                "calendar.days",
                format!("expected 7 day entries, got {}", days.len()),
            ));
        }
        for weekday in Weekday::ALL {
            if days.iter().filter(|d| d.weekday == weekday).count() != 1 {
                return Err(invalid(
                    "calendar.days",
                    format!("weekday {} must appear exactly once", weekday.name()),
                ));
            }
        }
        for day in days {
            let path = format!("calendar.days[{}]", day.weekday.name());
            match (day.open, day.close) {
                (None, None) => {
                    if !day.footfall.is_empty() {
                        return Err(invalid(format!("{path}.footfall"), "closed day has footfall"));
                    }
                }
                (Some(open), Some(close)) => {
                    if open >= close {
                        return Err(invalid(path, format!("empty open interval {open}-{close}")));
                    }
                    let hours = (close.minutes() - open.minutes()).div_ceil(60) as usize;
                    if day.footfall.len() != hours {
                        return Err(invalid(
                            format!("{path}.footfall"),
                            format!("expected {hours} hourly entries, got {}", day.footfall.len()),
                        ));
                    }
                    if day.footfall.iter().any(|w| !w.is_finite() || *w < 0.0) {
                        return Err(invalid(format!("{path}.footfall"), "negative footfall"));
                    }
                    if !day.footfall.iter().any(|w| *w > 0.0) {
                        return Err(invalid(
                            format!("{path}.footfall"),
                            "open day needs at least one positive hour",
                        ));
                    }
                }
                _ => return Err(invalid(path, "open and close must be given together")),
            }
            if day.staff.contains_key(&StaffRole::GenericPt) {
                return Err(invalid(
                    format!("{path}.staff"),
                    "requirements are per dedicated role; part-timers are derived",
                ));
            }
        }
        Ok(())
    }
}

/// Switches a scenario to noise-reduction mode: every open day gets the
/// mean opening hours, one constant hourly arrival rate that preserves the
/// weekly expected arrivals, and the per-role mean staffing (rounded half
/// up). Closed days stay closed.
pub fn to_noise_reduction(config: &ScenarioConfig) -> Result<ScenarioConfig, ConfigError> {
    let mut out = config.clone();
    out.mode = OperationMode::NoiseReduction;
    if is_uniform(&config.calendar) {
        return Ok(out);
    }

    let open_days: Vec<&DaySchedule> = config.calendar.days.iter().filter(|d| d.is_open()).collect();
    let n = open_days.len() as f64;
    let total_minutes: u32 = open_days.iter().map(|d| d.open_minutes()).sum();
    let duration = (total_minutes as f64 / n).round() as u32;
    let mean_open = open_days
        .iter()
        .map(|d| d.open.map_or(0, ClockTime::minutes) as f64)
        .sum::<f64>()
        / n;
    let open = (mean_open.round() as u32).min(MINUTES_PER_DAY - duration);
    let close = open + duration;
    let rate = config.calendar.expected_weekly_arrivals() / (n * duration as f64 / 60.0);
    let staff: BTreeMap<StaffRole, u32> = StaffRole::DEDICATED
        .iter()
        .filter_map(|&role| {
            let total: u32 = open_days.iter().map(|d| d.required(role)).sum();
            let mean = (total as f64 / n + 0.5).floor() as u32;
            (mean > 0).then_some((role, mean))
        })
        .collect();

    for day in out.calendar.days.iter_mut().filter(|d| d.is_open()) {
        day.open = Some(ClockTime(open));
        day.close = Some(ClockTime(close));
        day.footfall = vec![rate; duration.div_ceil(60) as usize];
        day.staff = staff.clone();
    }
    out.validate()?;
    Ok(out)
}

fn is_uniform(calendar: &WeekCalendar) -> bool {
    let mut open = calendar.days.iter().filter(|d| d.is_open());
    let Some(first) = open.next() else {
        return true;
    };
    let constant = |d: &DaySchedule| d.footfall.windows(2).all(|w| w[0] == w[1]);
    constant(first)
        && open.all(|d| {
            d.open == first.open
                && d.close == first.close
                && d.footfall == first.footfall
                && d.staff == first.staff
        })
}

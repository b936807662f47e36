//! Event loop, day cycle and the word-of-mouth feedback between days.
//!
//! A replication runs day by day. Each open day the engine draws the
//! roster, generates the arrival times (base footfall plus yesterday's
//! word-of-mouth extras), picks that many resting customers from the pool
//! and processes events until the department is empty after closing time.

mod arrivals;
mod pool;
mod roster;
mod wom;

pub use arrivals::{arrivals_for, daily_arrival_schedule};
pub use pool::{largest_remainder, pick_customers, populate};
pub use roster::{select_roster, StaffPool};
pub use wom::wom_additional;

use crate::agents::{AgentEvent, CustomerId, Department, ExitRecord, Scheduler, SimError};
use crate::config::{to_noise_reduction, OperationMode, ScenarioConfig, StaffRole, Weekday, MINUTES_PER_DAY};
use crate::metrics::{DailyTally, RunOutput, Utilisation};
use crate::stochastic::Streams;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimClock {
    /// Minutes since the start of the run.
    pub now: f64,
    pub day: usize,
    pub weekday: Weekday,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Arrival(CustomerId),
    Agent(AgentEvent),
    Close,
}

#[derive(Debug, Clone, Copy)]
struct Scheduled {
    at: f64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // Reversed so the max-heap pops the earliest event; ties keep
    // insertion order.
    fn cmp(&self, other: &Self) -> Ordering {
        other.at.total_cmp(&self.at).then(other.seq.cmp(&self.seq))
    }
}

/// Future event list ordered by time, then insertion.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Scheduled>,
    seq: u64,
}

impl EventQueue {
    pub fn push(&mut self, at: f64, event: Event) {
        self.seq += 1;
        self.heap.push(Scheduled {
            at,
            seq: self.seq,
            event,
        });
    }

    pub fn pop(&mut self) -> Option<(f64, Event)> {
        self.heap.pop().map(|s| (s.at, s.event))
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

impl Scheduler for EventQueue {
    fn schedule(&mut self, at: f64, event: AgentEvent) {
        self.push(at, Event::Agent(event));
    }
}

/// What an observer sees after every processed event.
pub struct Observation<'a> {
    pub clock: SimClock,
    pub department: &'a Department,
    pub event: Event,
    /// Visits that ended while processing `event`, already booked.
    pub exits: &'a [ExitRecord],
    /// Absolute closing time of the current day.
    pub closes_at: f64,
}

/// Runs one replication and returns its measures.
pub fn run_replication(config: &ScenarioConfig, replication: u64) -> Result<RunOutput, SimError> {
    Replication::new(config, replication).run(|_| {})
}

/// Like [`run_replication`], with the department exposed to `observer`
/// after every event.
pub fn run_replication_observed(
    config: &ScenarioConfig,
    replication: u64,
    observer: impl FnMut(&Observation<'_>),
) -> Result<RunOutput, SimError> {
    Replication::new(config, replication).run(observer)
}

pub struct Replication {
    config: ScenarioConfig,
    dept: Department,
    streams: Streams,
    events: EventQueue,
    output: RunOutput,
}

impl Replication {
    pub fn new(config: &ScenarioConfig, replication: u64) -> Self {
        let config = if config.mode == OperationMode::NoiseReduction {
            to_noise_reduction(config).expect("noise reduction of a valid scenario is valid")
        } else {
            config.clone()
        };
        let staff = StaffPool::from_config(&config).staff;
        let dept = Department::new(populate(&config), staff);
        Self {
            streams: Streams::new(config.seed, replication),
            output: RunOutput::new(&config, replication),
            dept,
            events: EventQueue::default(),
            config,
        }
    }

    pub fn run(mut self, mut observer: impl FnMut(&Observation<'_>)) -> Result<RunOutput, SimError> {
        let mut utilisation: BTreeMap<StaffRole, Utilisation> = BTreeMap::new();
        for day in 0..self.config.run_length_days {
            let schedule = self.config.calendar.for_sim_day(day).clone();
            let wom_extra = wom_additional(self.output.daily.last(), &self.config.wom);
            self.output
                .daily
                .push(DailyTally::new(day, schedule.weekday, wom_extra));
            let Some((open, close)) = schedule.hours() else {
                continue;
            };
            let day_start = (day as u32 * MINUTES_PER_DAY) as f64;
            let roster = select_roster(&self.dept.staff, &schedule, day, &mut self.streams.staffing)?;
            self.dept.open(&roster);
            let busy_before: Vec<f64> = roster.iter().map(|&id| self.dept.busy_minutes(id)).collect();

            let times = daily_arrival_schedule(&self.config, day, wom_extra, &mut self.streams.arrivals);
            let picked = pick_customers(
                &self.dept.customers,
                times.len(),
                &self.config.pick_policy,
                &mut self.streams.picks,
            );
            for (t, id) in times.iter().zip(picked) {
                self.events.push(day_start + t, Event::Arrival(id));
            }
            let closes_at = day_start + close as f64;
            self.events.push(closes_at, Event::Close);
            self.process_day(day, schedule.weekday, closes_at, &mut observer)?;

            let open_minutes = f64::from(close - open);
            for (&id, before) in roster.iter().zip(busy_before) {
                let u = utilisation.entry(self.dept.staff[id].role).or_default();
                u.busy_minutes += self.dept.busy_minutes(id) - before;
                u.rostered_minutes += open_minutes;
            }
        }
        self.output.queues = self.dept.queue_stats;
        self.output.utilisation = utilisation;
        Ok(self.output)
    }

    fn process_day(
        &mut self,
        day: usize,
        weekday: Weekday,
        closes_at: f64,
        observer: &mut impl FnMut(&Observation<'_>),
    ) -> Result<(), SimError> {
        let Self {
            config,
            dept,
            streams,
            events,
            output,
        } = self;
        while let Some((now, event)) = events.pop() {
            match event {
                Event::Arrival(id) => {
                    dept.begin_visit(id, config, streams, now, events)?;
                }
                Event::Agent(AgentEvent::BrowseDone { customer, token }) => {
                    dept.after_browse(customer, token, config, streams, now, events)?;
                }
                Event::Agent(AgentEvent::ServiceDone { staff, token }) => {
                    dept.complete_service(staff, token, config, streams, now, events)?;
                }
                Event::Agent(AgentEvent::PatienceExpired) => {
                    dept.renege(now, config);
                }
                Event::Close => {
                    dept.close(config, streams, now, events);
                }
            }
            let exits = dept.take_exits();
            for exit in &exits {
                output.record_exit(&mut dept.customers[exit.customer], exit, day);
                dept.return_to_pool(exit.customer);
            }
            observer(&Observation {
                clock: SimClock { now, day, weekday },
                department: dept,
                event,
                exits: &exits,
                closes_at,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::CustomerState;
    use crate::config::bundled_scenario;

    fn short(name: &str, days: usize) -> ScenarioConfig {
        let mut c = bundled_scenario(name).unwrap();
        c.run_length_days = days;
        c
    }

    #[test]
    fn event_queue_orders_by_time_then_insertion() {
        let mut q = EventQueue::default();
        q.push(5.0, Event::Close);
        q.push(1.0, Event::Arrival(1));
        q.push(5.0, Event::Arrival(2));
        q.push(1.0, Event::Arrival(3));
        let order: Vec<Event> = std::iter::from_fn(|| q.pop().map(|(_, e)| e)).collect();
        assert_eq!(
            order,
            vec![Event::Arrival(1), Event::Arrival(3), Event::Close, Event::Arrival(2)]
        );
    }

    #[test]
    fn zero_arrivals_gives_zero_counters() {
        let mut c = short("atv", 7);
        for d in c.calendar.days.iter_mut() {
            d.footfall.iter_mut().for_each(|f| *f = 0.0);
        }
        let out = run_replication(&c, 0).unwrap();
        assert_eq!(out.visits(), 0);
        assert!(out.measures().iter().all(|(k, v)| *v == 0.0 || k.starts_with("utilisation")));
        assert_eq!(out.daily.len(), 7);
    }

    #[test]
    fn identical_inputs_identical_output() {
        let c = short("ww", 3);
        assert_eq!(run_replication(&c, 4).unwrap(), run_replication(&c, 4).unwrap());
        assert_ne!(
            run_replication(&c, 4).unwrap().visits(),
            run_replication(&c, 5).unwrap().visits()
        );
    }

    #[test]
    fn clock_is_monotone_and_everyone_rests_overnight() {
        let c = short("atv", 3);
        let mut last = f64::NEG_INFINITY;
        let mut last_day = 0;
        let mut in_dept_last_event = 0;
        let mut in_dept_at_day_change = 0;
        run_replication_observed(&c, 0, |obs| {
            assert!(obs.clock.now >= last);
            last = obs.clock.now;
            if obs.clock.day != last_day {
                in_dept_at_day_change += in_dept_last_event;
                last_day = obs.clock.day;
            }
            in_dept_last_event = obs.department.customers_in_department();
        })
        .unwrap();
        in_dept_at_day_change += in_dept_last_event;
        assert_eq!(in_dept_at_day_change, 0);
    }

    #[test]
    fn lifetime_scores_sum_visit_scores() {
        let mut c = short("atv", 7);
        c.pool_size = 500;
        let mut totals = (0i64, 0u64, 0usize);
        let out = run_replication_observed(&c, 0, |obs| {
            let d = obs.department;
            totals = (
                d.customers.iter().map(|c| c.lifetime_score).sum(),
                d.customers.iter().map(|c| u64::from(c.visits)).sum(),
                d.customers.iter().filter(|c| c.state != CustomerState::Resting).count(),
            );
        })
        .unwrap();
        let hist_sum: i64 = out.score_histogram.iter().map(|(s, n)| s * *n as i64).sum();
        assert_eq!(totals.0, hist_sum);
        assert_eq!(totals.1, out.visits());
        assert_eq!(totals.2, 0);
    }

    #[test]
    fn daily_counts_sum_to_visits() {
        let out = run_replication(&short("atv", 7), 1).unwrap();
        let daily: u64 = out.daily.iter().map(|d| d.customers).sum();
        assert_eq!(daily, out.visits());
        assert_eq!(out.epv.total(), out.visits());
        assert_eq!(out.ahd.total(), out.visits());
        for q in out.queues {
            assert!(q.reneged <= q.queued);
        }
    }

    #[test]
    fn noise_reduction_flag_alone_triggers_transformation() {
        let mut c = short("atv", 7);
        c.mode = OperationMode::NoiseReduction;
        let out = run_replication(&c, 0).unwrap();
        let nr = to_noise_reduction(&c).unwrap();
        assert_eq!(run_replication(&nr, 0).unwrap(), out);
        let opens: Vec<&String> = out
            .params
            .iter()
            .filter(|(k, _)| k.ends_with(".open"))
            .map(|(_, v)| v)
            .collect();
        assert!(opens.windows(2).all(|w| w[0] == w[1]), "{opens:?}");
    }
}

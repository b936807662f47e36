use crate::agents::{Contract, SimError, StaffAgent, StaffId};
use crate::config::{DaySchedule, ScenarioConfig, StaffRole};
use crate::stochastic::RandomStream;
use rand::seq::SliceRandom;
use std::collections::BTreeMap;

/// Full-timers per dedicated role, sized to the busiest full-time day, and
/// generic part-timers sized to the largest residual gap of any day.
#[derive(Debug, Clone)]
pub struct StaffPool {
    pub staff: Vec<StaffAgent>,
}

impl StaffPool {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        let days = &config.calendar.days;
        let fulltime: BTreeMap<StaffRole, u32> = StaffRole::DEDICATED
            .iter()
            .map(|&role| {
                let max = days
                    .iter()
                    .filter(|d| d.is_open() && config.staffing.fulltime_days.contains(&d.weekday))
                    .map(|d| d.required(role))
                    .max()
                    .unwrap_or(0);
                (role, max)
            })
            .collect();
        let part_timers = days
            .iter()
            .filter(|d| d.is_open())
            .map(|d| {
                StaffRole::DEDICATED
                    .iter()
                    .map(|r| d.required(*r).saturating_sub(fulltime[r]))
                    .sum::<u32>()
            })
            .max()
            .unwrap_or(0);

        let mut staff = Vec::new();
        for (&role, &n) in &fulltime {
            for _ in 0..n {
                staff.push(StaffAgent::new(staff.len(), role, Contract::FullTime));
            }
        }
        for _ in 0..part_timers {
            staff.push(StaffAgent::new(staff.len(), StaffRole::GenericPt, Contract::PartTime));
        }
        Self { staff }
    }

    pub fn count(&self, role: StaffRole) -> usize {
        self.staff.iter().filter(|s| s.role == role).count()
    }
}

/// Picks the day's staff at random: full-timers of each role first, then
/// part-timers for whatever is still missing.
pub fn select_roster(
    staff: &[StaffAgent],
    schedule: &DaySchedule,
    day: usize,
    stream: &mut RandomStream,
) -> Result<Vec<StaffId>, SimError> {
    let mut part_timers: Vec<StaffId> = staff
        .iter()
        .filter(|s| s.role == StaffRole::GenericPt)
        .map(|s| s.id)
        .collect();
    part_timers.shuffle(stream.rng());
    let mut roster = Vec::new();
    for role in StaffRole::DEDICATED {
        let required = schedule.required(role);
        let mut fulltime: Vec<StaffId> = staff
            .iter()
            .filter(|s| s.role == role && s.contract == Contract::FullTime)
            .map(|s| s.id)
            .collect();
        fulltime.shuffle(stream.rng());
        fulltime.truncate(required as usize);
        let gap = required as usize - fulltime.len();
        if gap > part_timers.len() {
            return Err(SimError::RosterInfeasible {
                day,
                role,
                required,
            });
        }
        roster.extend(fulltime);
        roster.extend(part_timers.drain(..gap));
    }
    roster.sort_unstable();
    Ok(roster)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{bundled_scenario, Weekday};
    use crate::stochastic::StreamTag;

    fn atv() -> ScenarioConfig {
        bundled_scenario("atv").unwrap()
    }

    #[test]
    fn pool_sized_from_weekday_max_and_weekend_gap() {
        let cfg = atv();
        let pool = StaffPool::from_config(&cfg);
        assert_eq!(pool.count(StaffRole::NormalService), 4);
        assert_eq!(pool.count(StaffRole::Cashier), 2);
        assert_eq!(pool.count(StaffRole::GenericPt), 3);
    }

    #[test]
    fn weekday_roster_is_all_fulltime() {
        let cfg = atv();
        let pool = StaffPool::from_config(&cfg);
        let mut s = RandomStream::new(1, StreamTag::Staffing, 0);
        let roster = select_roster(&pool.staff, cfg.calendar.day(Weekday::Tue), 0, &mut s).unwrap();
        let ft: Vec<StaffId> = pool
            .staff
            .iter()
            .filter(|s| s.contract == Contract::FullTime)
            .map(|s| s.id)
            .collect();
        assert_eq!(roster, ft);
    }

    #[test]
    fn saturday_adds_part_timers() {
        let mut cfg = atv();
        for d in cfg.calendar.days.iter_mut() {
            let cashiers = if d.weekday == Weekday::Sat { 4 } else { 2 };
            d.staff.insert(StaffRole::Cashier, cashiers);
            d.staff.insert(StaffRole::NormalService, 4);
        }
        let pool = StaffPool::from_config(&cfg);
        let mut s = RandomStream::new(2, StreamTag::Staffing, 0);
        let roster = select_roster(&pool.staff, cfg.calendar.day(Weekday::Sat), 5, &mut s).unwrap();
        let pts = roster
            .iter()
            .filter(|&&id| pool.staff[id].role == StaffRole::GenericPt)
            .count();
        assert_eq!(pts, 2);
    }

    #[test]
    fn short_weekday_picks_subset_of_fulltimers() {
        let mut cfg = atv();
        cfg.calendar.days[0].staff.insert(StaffRole::NormalService, 1);
        let pool = StaffPool::from_config(&cfg);
        let mut s = RandomStream::new(3, StreamTag::Staffing, 0);
        let roster = select_roster(&pool.staff, &cfg.calendar.days[0], 0, &mut s).unwrap();
        let normal = roster
            .iter()
            .filter(|&&id| pool.staff[id].role == StaffRole::NormalService)
            .count();
        assert_eq!(normal, 1);
    }

    #[test]
    fn requirement_beyond_pool_is_infeasible() {
        let cfg = atv();
        let pool = StaffPool::from_config(&cfg);
        let mut day = cfg.calendar.day(Weekday::Sat).clone();
        day.staff.insert(StaffRole::Manager, 10);
        let mut s = RandomStream::new(4, StreamTag::Staffing, 0);
        assert!(matches!(
            select_roster(&pool.staff, &day, 5, &mut s),
            Err(SimError::RosterInfeasible { role: StaffRole::Manager, .. })
        ));
    }
}

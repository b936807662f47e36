use crate::config::{DaySchedule, ScenarioConfig};
use crate::stochastic::RandomStream;
use rand_distr::{Distribution, Exp};

/// Arrival times (minutes after midnight) for one simulated day.
///
/// Arrivals follow a Poisson process whose intensity is piecewise constant
/// per open hour. `wom_extra` shifts the day's expected total, spread in
/// proportion to the hourly intensities; the total never drops below zero.
pub fn daily_arrival_schedule(
    config: &ScenarioConfig,
    day: usize,
    wom_extra: i64,
    stream: &mut RandomStream,
) -> Vec<f64> {
    arrivals_for(config.calendar.for_sim_day(day), wom_extra, stream)
}

pub fn arrivals_for(schedule: &DaySchedule, wom_extra: i64, stream: &mut RandomStream) -> Vec<f64> {
    let segments = schedule.segments();
    if segments.is_empty() {
        return Vec::new();
    }
    let base = schedule.expected_arrivals();
    let target = (base + wom_extra as f64).max(0.0);
    let open_minutes: f64 = segments.iter().map(|(s, e, _)| e - s).sum();
    let rate_of = |rate: f64| -> f64 {
        if base > 0.0 {
            rate * target / base
        } else {
            target * 60.0 / open_minutes
        }
    };

    let mut times = Vec::new();
    for &(start, end, rate) in &segments {
        let per_minute = rate_of(rate) / 60.0;
        if per_minute <= 0.0 {
            continue;
        }
        let gap = Exp::new(per_minute).expect("positive rate");
        let mut t = start;
        loop {
            t += gap.sample(stream.rng());
            if t >= end {
                break;
            }
            times.push(t);
        }
    }
    times
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ClockTime, Weekday};
    use crate::stochastic::StreamTag;

    fn ten_hours_at(rate: f64) -> DaySchedule {
        DaySchedule {
            weekday: Weekday::Mon,
            open: Some(ClockTime::hm(8, 0)),
            close: Some(ClockTime::hm(18, 0)),
            footfall: vec![rate; 10],
            staff: Default::default(),
        }
    }

    fn mean_count(schedule: &DaySchedule, extra: i64, days: usize) -> f64 {
        let mut s = RandomStream::new(3, StreamTag::Arrivals, 0);
        (0..days).map(|_| arrivals_for(schedule, extra, &mut s).len()).sum::<usize>() as f64
            / days as f64
    }

    #[test]
    fn closed_day_is_empty() {
        let mut s = RandomStream::new(1, StreamTag::Arrivals, 0);
        assert!(arrivals_for(&DaySchedule::closed(Weekday::Sun), 50, &mut s).is_empty());
    }

    #[test]
    fn constant_rate_mean_count() {
        let m = mean_count(&ten_hours_at(10.0), 0, 1000);
        assert!((m - 100.0).abs() < 3.0, "mean {m}");
    }

    #[test]
    fn negative_extra_floors_at_zero() {
        assert_eq!(mean_count(&ten_hours_at(10.0), -100, 200), 0.0);
        assert_eq!(mean_count(&ten_hours_at(10.0), -500, 200), 0.0);
    }

    #[test]
    fn positive_extra_raises_mean() {
        let m = mean_count(&ten_hours_at(10.0), 50, 1000);
        assert!((m - 150.0).abs() < 3.0, "mean {m}");
    }

    #[test]
    fn times_lie_within_opening_hours_and_are_sorted() {
        let mut s = RandomStream::new(2, StreamTag::Arrivals, 0);
        let mut d = ten_hours_at(10.0);
        d.close = Some(ClockTime::hm(17, 30));
        let times = arrivals_for(&d, 0, &mut s);
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
        assert!(times.iter().all(|&t| (480.0..1050.0).contains(&t)));
    }
}

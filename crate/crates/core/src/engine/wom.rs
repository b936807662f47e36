use crate::config::WomConfig;
use crate::metrics::DailyTally;

/// Extra (or, if negative, fewer) customers expected today given
/// yesterday's satisfied and dissatisfied counts, rounded half away from
/// zero. Pass `None` on the first day.
pub fn wom_additional(yesterday: Option<&DailyTally>, wom: &WomConfig) -> i64 {
    let Some(y) = yesterday else {
        return 0;
    };
    let net = y.n_satisfied() as f64 - y.n_dissatisfied() as f64;
    (net * wom.adoption_fraction * wom.contact_rate).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Weekday;

    fn tally(satisfied: u64, dissatisfied: u64) -> DailyTally {
        let mut t = DailyTally::new(0, Weekday::Mon, 0);
        t.epv.satisfied = satisfied;
        t.epv.dissatisfied = dissatisfied;
        t
    }

    fn wom(adoption_fraction: f64, contact_rate: f64) -> WomConfig {
        WomConfig {
            adoption_fraction,
            contact_rate,
        }
    }

    #[test]
    fn zero_adoption_means_no_extras() {
        assert_eq!(wom_additional(Some(&tally(500, 3)), &wom(0.0, 7.0)), 0);
    }

    #[test]
    fn hand_evaluated_cases() {
        assert_eq!(wom_additional(Some(&tally(100, 40)), &wom(0.5, 2.0)), 60);
        assert_eq!(wom_additional(Some(&tally(40, 100)), &wom(1.0, 1.0)), -60);
    }

    #[test]
    fn first_day_has_no_predecessor() {
        assert_eq!(wom_additional(None, &wom(1.0, 5.0)), 0);
    }

    #[test]
    fn rounds_half_away_from_zero() {
        assert_eq!(wom_additional(Some(&tally(1, 0)), &wom(0.5, 1.0)), 1);
        assert_eq!(wom_additional(Some(&tally(0, 1)), &wom(0.5, 1.0)), -1);
        assert_eq!(wom_additional(Some(&tally(3, 0)), &wom(0.5, 1.0)), 2);
    }
}

use super::*;
use crate::config::{bundled_scenario, CustomerType};
use crate::stochastic::Streams;

type Events = Vec<(f64, AgentEvent)>;

fn config() -> ScenarioConfig {
    bundled_scenario("atv").unwrap()
}

fn department(config: &ScenarioConfig, kinds: &[CustomerType], roles: &[StaffRole]) -> Department {
    let customers = kinds
        .iter()
        .enumerate()
        .map(|(i, &k)| CustomerAgent::new(i, k, config))
        .collect();
    let staff = roles
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let contract = if r == StaffRole::GenericPt {
                Contract::PartTime
            } else {
                Contract::FullTime
            };
            StaffAgent::new(i, r, contract)
        })
        .collect();
    let mut dept = Department::new(customers, staff);
    let all: Vec<StaffId> = (0..roles.len()).collect();
    dept.open(&all);
    dept
}

fn service_done(events: &Events) -> Vec<(f64, StaffId, u64)> {
    events
        .iter()
        .filter_map(|&(t, e)| match e {
            AgentEvent::ServiceDone { staff, token } => Some((t, staff, token)),
            _ => None,
        })
        .collect()
}

#[test]
fn refund_goal_extremes() {
    let mut cfg = config();
    let mut streams = Streams::new(1, 0);
    let mut ev = Events::new();
    for (p, expect) in [(0.0, Goal::Buy), (1.0, Goal::Refund)] {
        cfg.refund_goal_probability = p;
        for kind in CustomerType::ALL {
            let mut dept = department(&cfg, &[kind], &[StaffRole::Manager]);
            assert_eq!(dept.begin_visit(0, &cfg, &mut streams, 0.0, &mut ev).unwrap(), expect);
        }
    }
}

#[test]
fn disinterested_refund_rate_is_corrected() {
    let mut cfg = config();
    cfg.refund_goal_probability = 0.2;
    let mut streams = Streams::new(2, 0);
    let mut ev = Events::new();
    let mut dept = department(&cfg, &[CustomerType::DisinterestedShopper], &[StaffRole::Manager]);
    let n = 50_000;
    let mut refunds = 0;
    for _ in 0..n {
        dept.customers[0].state = CustomerState::Resting;
        dept.staff[0].state = StaffState::Idle;
        if dept.begin_visit(0, &cfg, &mut streams, 0.0, &mut ev).unwrap() == Goal::Refund {
            refunds += 1;
        }
        ev.clear();
    }
    let freq = refunds as f64 / n as f64;
    assert!((freq - 0.3).abs() < 0.007, "refund frequency {freq}");
}

#[test]
fn forced_no_help_buy_goes_to_till() {
    let mut cfg = config();
    cfg.decision_table.requires_help = 0.0;
    cfg.decision_table.purchase_after_browse = 1.0;
    let mut streams = Streams::new(3, 0);
    let mut ev = Events::new();
    let mut dept = department(&cfg, &[CustomerType::ShoppingEnthusiast], &[StaffRole::Cashier]);
    dept.begin_visit(0, &cfg, &mut streams, 0.0, &mut ev).unwrap();
    let (t, token) = match ev[0] {
        (t, AgentEvent::BrowseDone { token, .. }) => (t, token),
        other => panic!("{other:?}"),
    };
    let out = dept.after_browse(0, token, &cfg, &mut streams, t, &mut ev).unwrap();
    assert_eq!(out, Some(BrowseOutcome::Pay));
    assert_eq!(dept.customers[0].state, CustomerState::Paying);
}

#[test]
fn help_request_frequency_for_solution_demanders() {
    let cfg = config();
    let mut streams = Streams::new(4, 0);
    let mut ev = Events::new();
    let mut dept = department(
        &cfg,
        &[CustomerType::SolutionDemander],
        &[StaffRole::NormalService, StaffRole::Expert, StaffRole::Cashier],
    );
    let n = 100_000;
    let mut help = 0;
    for _ in 0..n {
        let c = &mut dept.customers[0];
        c.state = CustomerState::Browsing;
        let token = c.browse_token;
        dept.staff.iter_mut().for_each(|s| s.state = StaffState::Idle);
        if let Some(BrowseOutcome::Help(_)) =
            dept.after_browse(0, token, &cfg, &mut streams, 0.0, &mut ev).unwrap()
        {
            help += 1;
        }
        ev.clear();
        dept.take_exits();
    }
    let freq = help as f64 / n as f64;
    assert!((freq - 0.19).abs() < 0.005, "help frequency {freq}");
}

#[test]
fn stale_browse_timer_is_ignored() {
    let cfg = config();
    let mut streams = Streams::new(5, 0);
    let mut ev = Events::new();
    let mut dept = department(&cfg, &[CustomerType::ServiceSeeker], &[StaffRole::Cashier]);
    dept.customers[0].state = CustomerState::Browsing;
    let token = dept.customers[0].browse_token;
    assert_eq!(
        dept.after_browse(0, token + 1, &cfg, &mut streams, 0.0, &mut ev).unwrap(),
        None
    );
}

#[test]
fn immediate_service_scores_plus_two() {
    let cfg = config();
    let mut streams = Streams::new(6, 0);
    let mut ev = Events::new();
    let mut dept = department(&cfg, &[CustomerType::ShoppingEnthusiast], &[StaffRole::Cashier]);
    dept.customers[0].state = CustomerState::Browsing;
    let r = dept.request_service(0, QueueKind::Till, &cfg, &mut streams, 10.0, &mut ev).unwrap();
    assert_eq!(r, ServiceRequest::Assigned(0));
    assert_eq!(dept.customers[0].visit_score, 2);
    assert_eq!(dept.staff[0].state, StaffState::Serving(0));
    assert!(dept.queue(QueueKind::Till).is_empty());
    dept.check_invariants().unwrap();
}

#[test]
fn queued_deadline_within_patience_support() {
    let cfg = config();
    let mut streams = Streams::new(7, 0);
    let mut ev = Events::new();
    let kinds = vec![CustomerType::ShoppingEnthusiast; 200];
    let mut dept = department(&cfg, &kinds, &[StaffRole::Cashier]);
    dept.customers[0].state = CustomerState::Browsing;
    dept.request_service(0, QueueKind::Till, &cfg, &mut streams, 100.0, &mut ev).unwrap();
    for id in 1..200 {
        dept.customers[id].state = CustomerState::Browsing;
        match dept.request_service(id, QueueKind::Till, &cfg, &mut streams, 100.0, &mut ev).unwrap() {
            ServiceRequest::Queued { deadline } => assert!((105.0..=120.0).contains(&deadline)),
            other => panic!("{other:?}"),
        }
        assert_eq!(dept.customers[id].visit_score, 0);
    }
    assert_eq!(dept.queue_stats[QueueKind::Till.index()].queued, 199);
    dept.check_invariants().unwrap();
}

#[test]
fn generic_part_timer_serves_expert_queue() {
    let cfg = config();
    let mut streams = Streams::new(8, 0);
    let mut ev = Events::new();
    let mut dept = department(
        &cfg,
        &[CustomerType::ServiceSeeker],
        &[StaffRole::Cashier, StaffRole::GenericPt],
    );
    dept.customers[0].state = CustomerState::Browsing;
    let r = dept.request_service(0, QueueKind::ExpertHelp, &cfg, &mut streams, 0.0, &mut ev).unwrap();
    assert_eq!(r, ServiceRequest::Assigned(1));
}

#[test]
fn dedicated_staff_preferred_over_part_timer() {
    let cfg = config();
    let mut streams = Streams::new(8, 1);
    let mut ev = Events::new();
    let mut dept = department(
        &cfg,
        &[CustomerType::ServiceSeeker],
        &[StaffRole::GenericPt, StaffRole::Cashier, StaffRole::Cashier],
    );
    dept.customers[0].state = CustomerState::Browsing;
    let r = dept.request_service(0, QueueKind::Till, &cfg, &mut streams, 0.0, &mut ev).unwrap();
    assert_eq!(r, ServiceRequest::Assigned(1));
}

#[test]
fn no_qualified_staff_is_an_error() {
    let cfg = config();
    let mut streams = Streams::new(9, 0);
    let mut ev = Events::new();
    let mut dept = department(&cfg, &[CustomerType::ServiceSeeker], &[StaffRole::Cashier]);
    dept.customers[0].state = CustomerState::Browsing;
    assert_eq!(
        dept.request_service(0, QueueKind::RefundDecision, &cfg, &mut streams, 0.0, &mut ev),
        Err(SimError::NoStaffConfigured(QueueKind::RefundDecision))
    );
}

#[test]
fn renege_removes_only_expired() {
    let cfg = config();
    let mut streams = Streams::new(10, 0);
    let mut ev = Events::new();
    let kinds = vec![CustomerType::ShoppingEnthusiast; 3];
    let mut dept = department(&cfg, &kinds, &[StaffRole::Cashier]);
    assert!(dept.renege(0.0, &cfg).is_empty());
    for id in 0..3 {
        dept.customers[id].state = CustomerState::Browsing;
        dept.request_service(id, QueueKind::Till, &cfg, &mut streams, 0.0, &mut ev).unwrap();
    }
    let d1 = dept.customers[1].patience_deadline.unwrap();
    let d2 = dept.customers[2].patience_deadline.unwrap();
    let now = d1.min(d2);
    let expired = if d1 <= d2 { 1 } else { 2 };
    let removed = dept.renege(now, &cfg);
    assert_eq!(removed, vec![expired]);
    assert_eq!(dept.customers[expired].visit_score, -2);
    assert_eq!(dept.customers[expired].state, CustomerState::Exiting);
    let left: Vec<_> = dept.queue(QueueKind::Till).iter().map(|e| e.customer).collect();
    assert_eq!(left, vec![3 - expired]);
    assert_eq!(dept.queue_stats[0].reneged, 1);
    let exits = dept.take_exits();
    assert_eq!(exits[0].reason, ExitReason::RenegedTill);
}

#[test]
fn worked_example_scores_plus_two() {
    // Browse, ask for help, get it at once (+2), finish help (+2), give up
    // in the till queue (-2).
    let mut cfg = config();
    cfg.decision_table.requires_help = 1.0;
    cfg.decision_table.expert_help = 0.0;
    cfg.decision_table.purchase_after_help = 1.0;
    cfg.refund_goal_probability = 0.0;
    let mut streams = Streams::new(11, 0);
    let mut ev = Events::new();
    let kinds = [CustomerType::ServiceSeeker, CustomerType::ShoppingEnthusiast];
    let mut dept = department(&cfg, &kinds, &[StaffRole::NormalService, StaffRole::Cashier]);
    // Customer 1 occupies the only cashier for the whole example.
    dept.customers[1].state = CustomerState::Browsing;
    dept.request_service(1, QueueKind::Till, &cfg, &mut streams, 0.0, &mut ev).unwrap();
    ev.clear();

    dept.begin_visit(0, &cfg, &mut streams, 0.0, &mut ev).unwrap();
    let (t, token) = match ev.pop().unwrap() {
        (t, AgentEvent::BrowseDone { token, .. }) => (t, token),
        other => panic!("{other:?}"),
    };
    let out = dept.after_browse(0, token, &cfg, &mut streams, t, &mut ev).unwrap();
    assert_eq!(out, Some(BrowseOutcome::Help(QueueKind::NormalHelp)));
    assert_eq!(dept.customers[0].visit_score, 2);
    let (t, staff, token) = service_done(&ev)[0];
    assert_eq!(staff, 0);
    let out = dept.complete_service(staff, token, &cfg, &mut streams, t, &mut ev).unwrap();
    assert!(matches!(out, Some(ServiceOutcome::ToTill(ServiceRequest::Queued { .. }))));
    assert_eq!(dept.customers[0].visit_score, 4);
    let deadline = dept.customers[0].patience_deadline.unwrap();
    assert_eq!(dept.renege(deadline, &cfg), vec![0]);
    assert_eq!(dept.customers[0].visit_score, 2);
    let exit = dept.take_exits().pop().unwrap();
    assert_eq!((exit.visit_score, exit.reason), (2, ExitReason::RenegedTill));
}

#[test]
fn completion_pulls_next_customer_without_gap() {
    let cfg = config();
    let mut streams = Streams::new(12, 0);
    let mut ev = Events::new();
    let kinds = vec![CustomerType::ShoppingEnthusiast; 2];
    let mut dept = department(&cfg, &kinds, &[StaffRole::Cashier]);
    for id in 0..2 {
        dept.customers[id].state = CustomerState::Browsing;
        dept.request_service(id, QueueKind::Till, &cfg, &mut streams, 0.0, &mut ev).unwrap();
    }
    let (t, staff, token) = service_done(&ev)[0];
    let out = dept.complete_service(staff, token, &cfg, &mut streams, t, &mut ev).unwrap();
    assert_eq!(out, Some(ServiceOutcome::Exited(ExitReason::Purchased)));
    assert_eq!(dept.staff[0].state, StaffState::Serving(1));
    assert_eq!(dept.staff[0].busy_since, t);
    // immediate +2, completed +2, purchase +1
    assert_eq!(dept.customers[0].visit_score, 5);
    let later = service_done(&ev);
    assert_eq!(later.len(), 2);
    assert!(later[1].0 >= t);
}

#[test]
fn help_completion_scores_four_then_heads_to_till() {
    let mut cfg = config();
    cfg.decision_table.purchase_after_help = 1.0;
    let mut streams = Streams::new(13, 0);
    let mut ev = Events::new();
    let mut dept = department(
        &cfg,
        &[CustomerType::ServiceSeeker],
        &[StaffRole::NormalService, StaffRole::Cashier],
    );
    dept.customers[0].state = CustomerState::Browsing;
    dept.request_service(0, QueueKind::NormalHelp, &cfg, &mut streams, 0.0, &mut ev).unwrap();
    let (t, staff, token) = service_done(&ev)[0];
    let out = dept.complete_service(staff, token, &cfg, &mut streams, t, &mut ev).unwrap();
    assert_eq!(out, Some(ServiceOutcome::ToTill(ServiceRequest::Assigned(1))));
    // +2 +2 so far, then immediate till service +2
    assert_eq!(dept.customers[0].visit_score, 6);
}

#[test]
fn refund_then_reshop_returns_to_browsing() {
    let mut cfg = config();
    cfg.refund_goal_probability = 1.0;
    cfg.decision_table.refund_granted = 1.0;
    cfg.decision_table.reshop_after_refund = 1.0;
    let mut streams = Streams::new(14, 0);
    let mut ev = Events::new();
    let mut dept = department(&cfg, &[CustomerType::DisinterestedShopper], &[StaffRole::Manager]);
    dept.begin_visit(0, &cfg, &mut streams, 0.0, &mut ev).unwrap();
    assert_eq!(dept.customers[0].state, CustomerState::InRefund);
    let (t, staff, token) = service_done(&ev)[0];
    let out = dept.complete_service(staff, token, &cfg, &mut streams, t, &mut ev).unwrap();
    assert_eq!(out, Some(ServiceOutcome::BackToBrowsing));
    assert_eq!(dept.customers[0].state, CustomerState::Browsing);
    assert_eq!(dept.customers[0].goal, Goal::Buy);
    assert!(dept.customers[0].refunded_this_visit);
}

#[test]
fn refund_without_reshop_exits() {
    let mut cfg = config();
    cfg.refund_goal_probability = 1.0;
    cfg.decision_table.refund_granted = 0.0;
    let mut streams = Streams::new(15, 0);
    let mut ev = Events::new();
    let mut dept = department(&cfg, &[CustomerType::DisinterestedShopper], &[StaffRole::Manager]);
    dept.begin_visit(0, &cfg, &mut streams, 0.0, &mut ev).unwrap();
    let (t, staff, token) = service_done(&ev)[0];
    let out = dept.complete_service(staff, token, &cfg, &mut streams, t, &mut ev).unwrap();
    assert_eq!(out, Some(ServiceOutcome::Exited(ExitReason::RefundCompleted)));
    assert!(!dept.take_exits()[0].refunded);
}

#[test]
fn closing_exits_browsers_but_not_till_customers() {
    let cfg = config();
    let mut streams = Streams::new(16, 0);
    let mut ev = Events::new();
    let kinds = vec![CustomerType::ShoppingEnthusiast; 4];
    let mut dept = department(&cfg, &kinds, &[StaffRole::Cashier, StaffRole::NormalService]);
    // 0 browsing, 1 paying, 2 waiting to pay, 3 receiving help
    dept.customers[0].state = CustomerState::Browsing;
    for id in 1..3 {
        dept.customers[id].state = CustomerState::Browsing;
        dept.request_service(id, QueueKind::Till, &cfg, &mut streams, 0.0, &mut ev).unwrap();
    }
    dept.customers[3].state = CustomerState::Browsing;
    dept.request_service(3, QueueKind::NormalHelp, &cfg, &mut streams, 0.0, &mut ev).unwrap();

    let exits = dept.close(&cfg, &mut streams, 5.0, &mut ev);
    let ids: Vec<_> = exits.iter().map(|e| e.customer).collect();
    assert_eq!(ids, vec![0, 3]);
    assert!(exits.iter().all(|e| e.reason == ExitReason::QuickExit));
    assert_eq!(dept.customers[1].state, CustomerState::Paying);
    assert_eq!(dept.customers[2].state, CustomerState::WaitingToPay);
    assert!(dept.staff[1].is_idle());
    for e in dept.take_exits() {
        dept.return_to_pool(e.customer);
    }
    dept.check_invariants().unwrap();
}

#[test]
fn closing_empty_department_has_no_records() {
    let cfg = config();
    let mut streams = Streams::new(17, 0);
    let mut ev = Events::new();
    let mut dept = department(&cfg, &[CustomerType::InternetShopper; 3], &[StaffRole::Cashier]);
    assert!(dept.close(&cfg, &mut streams, 0.0, &mut ev).is_empty());
    assert!(ev.is_empty());
}

#[test]
fn stale_service_timer_after_quick_exit_is_ignored() {
    let cfg = config();
    let mut streams = Streams::new(18, 0);
    let mut ev = Events::new();
    let mut dept = department(&cfg, &[CustomerType::ServiceSeeker], &[StaffRole::NormalService]);
    dept.customers[0].state = CustomerState::Browsing;
    dept.request_service(0, QueueKind::NormalHelp, &cfg, &mut streams, 0.0, &mut ev).unwrap();
    let (t, staff, token) = service_done(&ev)[0];
    dept.close(&cfg, &mut streams, 1.0, &mut ev);
    assert_eq!(dept.complete_service(staff, token, &cfg, &mut streams, t, &mut ev).unwrap(), None);
}

//! Customer and staff agents and the department they meet in.
//!
//! Customers drive the simulation; staff react to service requests. Every
//! customer block (till, normal help, expert help, refund decision) works
//! the same way: take an idle qualified staff member if there is one,
//! otherwise queue until served or until patience runs out.

mod customer;
mod queue;
mod staff;

pub use customer::{CustomerAgent, CustomerId, CustomerState, Goal};
pub use queue::{QueueEntry, QueueKind, ServiceQueue};
pub use staff::{Contract, StaffAgent, StaffId, StaffState};

use crate::config::{DecisionPoint, ScenarioConfig, StaffRole, TransitionKind};
use crate::stochastic::{
    correct_delay, corrected_bernoulli, sample_triangular, LikelihoodLevel, Streams, TriangularParams,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("no staff on the roster can serve the {} queue", .0.name())]
    NoStaffConfigured(QueueKind),
    #[error("staffing requirement of {required} {role:?} on day {day} exceeds the staff pool")]
    RosterInfeasible {
        day: usize,
        role: StaffRole,
        required: u32,
    },
}

/// Timed follow-ups that agent operations ask the engine to schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AgentEvent {
    BrowseDone { customer: CustomerId, token: u64 },
    ServiceDone { staff: StaffId, token: u64 },
    PatienceExpired,
}

pub trait Scheduler {
    fn schedule(&mut self, at: f64, event: AgentEvent);
}

impl Scheduler for Vec<(f64, AgentEvent)> {
    fn schedule(&mut self, at: f64, event: AgentEvent) {
        self.push((at, event));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExitReason {
    Purchased,
    LeftEmptyHanded,
    RenegedNormalHelp,
    RenegedExpertHelp,
    RenegedTill,
    RenegedRefund,
    RefundCompleted,
    QuickExit,
}

impl ExitReason {
    pub const ALL: [ExitReason; 8] = [
        Self::Purchased,
        Self::LeftEmptyHanded,
        Self::RenegedNormalHelp,
        Self::RenegedExpertHelp,
        Self::RenegedTill,
        Self::RenegedRefund,
        Self::RefundCompleted,
        Self::QuickExit,
    ];

    pub fn reneged_from(kind: QueueKind) -> Self {
        match kind {
            QueueKind::Till => Self::RenegedTill,
            QueueKind::NormalHelp => Self::RenegedNormalHelp,
            QueueKind::ExpertHelp => Self::RenegedExpertHelp,
            QueueKind::RefundDecision => Self::RenegedRefund,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Purchased => "left_after_purchase",
            Self::LeftEmptyHanded => "left_before_finding_anything",
            Self::RenegedNormalHelp => "left_before_normal_help",
            Self::RenegedExpertHelp => "left_before_expert_help",
            Self::RenegedTill => "left_while_waiting_to_pay",
            Self::RenegedRefund => "left_before_refund_decision",
            Self::RefundCompleted => "left_after_refund",
            Self::QuickExit => "left_at_closing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitRecord {
    pub customer: CustomerId,
    pub reason: ExitReason,
    pub visit_score: i64,
    pub at: f64,
    pub refunded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrowseOutcome {
    Help(QueueKind),
    Pay,
    LeftEmptyHanded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ServiceRequest {
    Assigned(StaffId),
    Queued { deadline: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ServiceOutcome {
    ToTill(ServiceRequest),
    BackToBrowsing,
    Exited(ExitReason),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueueStats {
    pub queued: u64,
    pub reneged: u64,
}

/// Live state of the department: every pool customer, every pool staff
/// member, today's roster and the four service queues.
#[derive(Debug, Clone)]
pub struct Department {
    pub customers: Vec<CustomerAgent>,
    pub staff: Vec<StaffAgent>,
    on_duty: Vec<bool>,
    queues: [ServiceQueue; 4],
    pub queue_stats: [QueueStats; 4],
    busy_minutes: Vec<f64>,
    closed: bool,
    exits: Vec<ExitRecord>,
    seq: u64,
}

fn service_delay(config: &ScenarioConfig, kind: QueueKind) -> TriangularParams {
    let d = &config.delay_table;
    match kind {
        QueueKind::Till => d.payment,
        QueueKind::NormalHelp => d.help,
        QueueKind::ExpertHelp => d.expert_help(),
        QueueKind::RefundDecision => d.refund_decision,
    }
}

fn patience(config: &ScenarioConfig, kind: QueueKind) -> TriangularParams {
    let d = &config.delay_table;
    match kind {
        QueueKind::Till => d.pay_queue_patience,
        QueueKind::NormalHelp | QueueKind::ExpertHelp => d.help_queue_patience(),
        QueueKind::RefundDecision => d.refund_queue_patience(),
    }
}

fn probability(config: &ScenarioConfig, point: DecisionPoint) -> f64 {
    config.decision_table.get(point)
}

impl Department {
    pub fn new(customers: Vec<CustomerAgent>, staff: Vec<StaffAgent>) -> Self {
        let n_staff = staff.len();
        Self {
            customers,
            staff,
            on_duty: vec![false; n_staff],
            queues: QueueKind::ALL.map(ServiceQueue::new),
            queue_stats: [QueueStats::default(); 4],
            busy_minutes: vec![0.0; n_staff],
            closed: false,
            exits: Vec::new(),
            seq: 0,
        }
    }

    pub fn queue(&self, kind: QueueKind) -> &ServiceQueue {
        &self.queues[kind.index()]
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn is_on_duty(&self, staff: StaffId) -> bool {
        self.on_duty[staff]
    }

    pub fn roster(&self) -> impl Iterator<Item = &StaffAgent> {
        self.staff.iter().filter(|s| self.on_duty[s.id])
    }

    pub fn busy_minutes(&self, staff: StaffId) -> f64 {
        self.busy_minutes[staff]
    }

    /// Starts a trading day with the given roster. All staff must be idle.
    pub fn open(&mut self, roster: &[StaffId]) {
        debug_assert!(self.staff.iter().all(StaffAgent::is_idle));
        self.on_duty.iter_mut().for_each(|d| *d = false);
        for &id in roster {
            self.on_duty[id] = true;
        }
        self.closed = false;
    }

    pub fn take_exits(&mut self) -> Vec<ExitRecord> {
        std::mem::take(&mut self.exits)
    }

    pub fn customers_in_department(&self) -> usize {
        self.customers.iter().filter(|c| c.in_department()).count()
    }

    fn exit(&mut self, id: CustomerId, reason: ExitReason, now: f64) {
        let c = &mut self.customers[id];
        c.state = CustomerState::Exiting;
        c.patience_deadline = None;
        self.exits.push(ExitRecord {
            customer: id,
            reason,
            visit_score: c.visit_score,
            at: now,
            refunded: c.refunded_this_visit,
        });
    }

    fn start_browsing(
        &mut self,
        id: CustomerId,
        config: &ScenarioConfig,
        streams: &mut Streams,
        now: f64,
        sched: &mut impl Scheduler,
    ) {
        if self.closed {
            self.customers[id].apply(TransitionKind::QuickExit, config);
            self.exit(id, ExitReason::QuickExit, now);
            return;
        }
        let c = &mut self.customers[id];
        c.goal = Goal::Buy;
        c.state = CustomerState::Browsing;
        c.browse_token += 1;
        let params = correct_delay(config.delay_table.browse, c.profile.likelihood_buy);
        let until = now + sample_triangular(params, &mut streams.delays);
        sched.schedule(
            until,
            AgentEvent::BrowseDone {
                customer: id,
                token: c.browse_token,
            },
        );
    }

    /// Releases a resting customer into the department and decides the
    /// goal of the visit.
    pub fn begin_visit(
        &mut self,
        id: CustomerId,
        config: &ScenarioConfig,
        streams: &mut Streams,
        now: f64,
        sched: &mut impl Scheduler,
    ) -> Result<Goal, SimError> {
        let c = &mut self.customers[id];
        debug_assert_eq!(c.state, CustomerState::Resting);
        c.visit_score = 0;
        c.refunded_this_visit = false;
        let refund = corrected_bernoulli(
            config.refund_goal_probability,
            c.profile.likelihood_ask_refund,
            &mut streams.decisions,
        )
        .expect("validated probability");
        if refund {
            c.goal = Goal::Refund;
            c.state = CustomerState::WaitingRefundDecision;
            self.request_service(id, QueueKind::RefundDecision, config, streams, now, sched)?;
            Ok(Goal::Refund)
        } else {
            self.start_browsing(id, config, streams, now, sched);
            Ok(Goal::Buy)
        }
    }

    /// Handles a finished browse. Stale timers (for customers that already
    /// left) are ignored and yield `None`.
    pub fn after_browse(
        &mut self,
        id: CustomerId,
        token: u64,
        config: &ScenarioConfig,
        streams: &mut Streams,
        now: f64,
        sched: &mut impl Scheduler,
    ) -> Result<Option<BrowseOutcome>, SimError> {
        let c = &self.customers[id];
        if c.state != CustomerState::Browsing || c.browse_token != token {
            return Ok(None);
        }
        let profile = c.profile;
        let d = &mut streams.decisions;
        let wants_help = corrected_bernoulli(
            probability(config, DecisionPoint::RequiresHelp),
            profile.likelihood_ask_help,
            d,
        )
        .expect("validated probability");
        let outcome = if wants_help {
            let expert = corrected_bernoulli(
                probability(config, DecisionPoint::ExpertHelp),
                LikelihoodLevel::Moderate,
                d,
            )
            .expect("validated probability");
            BrowseOutcome::Help(if expert {
                QueueKind::ExpertHelp
            } else {
                QueueKind::NormalHelp
            })
        } else if corrected_bernoulli(
            probability(config, DecisionPoint::PurchaseAfterBrowse),
            profile.likelihood_buy,
            d,
        )
        .expect("validated probability")
        {
            BrowseOutcome::Pay
        } else {
            BrowseOutcome::LeftEmptyHanded
        };
        match outcome {
            BrowseOutcome::Help(kind) => {
                self.request_service(id, kind, config, streams, now, sched)?;
            }
            BrowseOutcome::Pay => {
                self.request_service(id, QueueKind::Till, config, streams, now, sched)?;
            }
            BrowseOutcome::LeftEmptyHanded => {
                self.customers[id].apply(TransitionKind::LeftEmptyHanded, config);
                self.exit(id, ExitReason::LeftEmptyHanded, now);
            }
        }
        Ok(Some(outcome))
    }

    /// Idle on-duty staff able to serve `kind`: dedicated staff before
    /// part-timers, then lowest id.
    fn idle_staff_for(&self, kind: QueueKind) -> Option<StaffId> {
        self.roster()
            .filter(|s| s.is_idle() && s.can_serve(kind))
            .min_by_key(|s| (s.role == StaffRole::GenericPt, s.id))
            .map(|s| s.id)
    }

    #[allow(clippy::too_many_arguments)]
    fn start_service(
        &mut self,
        staff: StaffId,
        customer: CustomerId,
        kind: QueueKind,
        config: &ScenarioConfig,
        streams: &mut Streams,
        now: f64,
        sched: &mut impl Scheduler,
    ) {
        let c = &mut self.customers[customer];
        c.state = kind.service_state();
        c.patience_deadline = None;
        let likelihood = match kind {
            QueueKind::NormalHelp | QueueKind::ExpertHelp => c.profile.likelihood_ask_help,
            QueueKind::RefundDecision => c.profile.likelihood_ask_refund,
            QueueKind::Till => LikelihoodLevel::Moderate,
        };
        let duration = sample_triangular(
            correct_delay(service_delay(config, kind), likelihood),
            &mut streams.delays,
        );
        let s = &mut self.staff[staff];
        s.state = StaffState::Serving(customer);
        s.token += 1;
        s.busy_since = now;
        sched.schedule(
            now + duration,
            AgentEvent::ServiceDone {
                staff,
                token: s.token,
            },
        );
    }

    /// Direct service if a qualified staff member is idle, otherwise join
    /// the queue with a patience deadline.
    pub fn request_service(
        &mut self,
        id: CustomerId,
        kind: QueueKind,
        config: &ScenarioConfig,
        streams: &mut Streams,
        now: f64,
        sched: &mut impl Scheduler,
    ) -> Result<ServiceRequest, SimError> {
        if !self.roster().any(|s| s.can_serve(kind)) {
            return Err(SimError::NoStaffConfigured(kind));
        }
        if let Some(staff) = self.idle_staff_for(kind) {
            self.customers[id].apply(TransitionKind::ImmediateService, config);
            self.start_service(staff, id, kind, config, streams, now, sched);
            return Ok(ServiceRequest::Assigned(staff));
        }
        let c = &mut self.customers[id];
        let params = correct_delay(patience(config, kind), c.profile.likelihood_wait);
        let deadline = now + sample_triangular(params, &mut streams.delays);
        c.state = kind.waiting_state();
        c.patience_deadline = Some(deadline);
        self.seq += 1;
        self.queues[kind.index()].push(QueueEntry {
            customer: id,
            enqueued_at: now,
            deadline,
            seq: self.seq,
        });
        self.queue_stats[kind.index()].queued += 1;
        sched.schedule(deadline, AgentEvent::PatienceExpired);
        Ok(ServiceRequest::Queued { deadline })
    }

    /// Removes every queued customer whose patience has run out.
    pub fn renege(&mut self, now: f64, config: &ScenarioConfig) -> Vec<CustomerId> {
        let mut removed = Vec::new();
        for kind in QueueKind::ALL {
            for entry in self.queues[kind.index()].remove_expired(now) {
                self.queue_stats[kind.index()].reneged += 1;
                self.customers[entry.customer].apply(TransitionKind::Reneged, config);
                self.exit(entry.customer, ExitReason::reneged_from(kind), now);
                removed.push(entry.customer);
            }
        }
        removed
    }

    /// Hands an idle staff member the longest-waiting customer among the
    /// queues it can serve.
    fn dispatch(
        &mut self,
        staff: StaffId,
        config: &ScenarioConfig,
        streams: &mut Streams,
        now: f64,
        sched: &mut impl Scheduler,
    ) -> Option<CustomerId> {
        if !self.on_duty[staff] || !self.staff[staff].is_idle() {
            return None;
        }
        let s = &self.staff[staff];
        let kind = QueueKind::ALL
            .into_iter()
            .filter(|&k| s.can_serve(k))
            .filter_map(|k| self.queues[k.index()].peek_next().map(|e| (e.enqueued_at, e.seq, k)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))?
            .2;
        let entry = self.queues[kind.index()].pop_next()?;
        self.start_service(staff, entry.customer, kind, config, streams, now, sched);
        Some(entry.customer)
    }

    fn release(&mut self, staff: StaffId, now: f64) -> Option<CustomerId> {
        let s = &mut self.staff[staff];
        let StaffState::Serving(customer) = s.state else {
            return None;
        };
        s.state = StaffState::Idle;
        self.busy_minutes[staff] += now - s.busy_since;
        Some(customer)
    }

    /// Ends a service. The staff member immediately takes the next queued
    /// customer; the served customer moves on through the state chart.
    /// Returns `None` for stale timers.
    pub fn complete_service(
        &mut self,
        staff: StaffId,
        token: u64,
        config: &ScenarioConfig,
        streams: &mut Streams,
        now: f64,
        sched: &mut impl Scheduler,
    ) -> Result<Option<ServiceOutcome>, SimError> {
        if self.staff[staff].token != token {
            return Ok(None);
        }
        let Some(customer) = self.release(staff, now) else {
            return Ok(None);
        };
        self.dispatch(staff, config, streams, now, sched);

        let c = &mut self.customers[customer];
        c.apply(TransitionKind::ServiceCompleted, config);
        let profile = c.profile;
        let outcome = match c.state {
            CustomerState::ReceivingNormalHelp | CustomerState::ReceivingExpertHelp => {
                let buy = corrected_bernoulli(
                    probability(config, DecisionPoint::PurchaseAfterHelp),
                    profile.likelihood_buy,
                    &mut streams.decisions,
                )
                .expect("validated probability");
                if buy {
                    let req = self.request_service(customer, QueueKind::Till, config, streams, now, sched)?;
                    ServiceOutcome::ToTill(req)
                } else {
                    self.customers[customer].apply(TransitionKind::LeftEmptyHanded, config);
                    self.exit(customer, ExitReason::LeftEmptyHanded, now);
                    ServiceOutcome::Exited(ExitReason::LeftEmptyHanded)
                }
            }
            CustomerState::Paying => {
                c.apply(TransitionKind::PurchaseMade, config);
                self.exit(customer, ExitReason::Purchased, now);
                ServiceOutcome::Exited(ExitReason::Purchased)
            }
            CustomerState::InRefund => {
                let d = &mut streams.decisions;
                let granted = corrected_bernoulli(
                    probability(config, DecisionPoint::RefundGranted),
                    LikelihoodLevel::Moderate,
                    d,
                )
                .expect("validated probability");
                let reshop = granted
                    && corrected_bernoulli(
                        probability(config, DecisionPoint::ReshopAfterRefund),
                        LikelihoodLevel::Moderate,
                        d,
                    )
                    .expect("validated probability");
                if granted {
                    c.refunded_this_visit = true;
                    c.apply(TransitionKind::RefundGranted, config);
                }
                if reshop {
                    self.start_browsing(customer, config, streams, now, sched);
                    if self.customers[customer].state == CustomerState::Browsing {
                        ServiceOutcome::BackToBrowsing
                    } else {
                        ServiceOutcome::Exited(ExitReason::QuickExit)
                    }
                } else {
                    self.exit(customer, ExitReason::RefundCompleted, now);
                    ServiceOutcome::Exited(ExitReason::RefundCompleted)
                }
            }
            other => unreachable!("staff served customer in state {other:?}"),
        };
        Ok(Some(outcome))
    }

    /// Closing-time exit for one customer. Customers at the till are left
    /// alone. Staff freed by the exit pick up queued customers.
    pub fn quick_exit(
        &mut self,
        id: CustomerId,
        config: &ScenarioConfig,
        streams: &mut Streams,
        now: f64,
        sched: &mut impl Scheduler,
    ) -> Option<ExitRecord> {
        let state = self.customers[id].state;
        if !self.customers[id].in_department()
            || state == CustomerState::Exiting
            || state.is_committed_to_pay()
        {
            return None;
        }
        if state.is_waiting() {
            let kind = QueueKind::for_state(state).expect("waiting state has a queue");
            self.queues[kind.index()].remove(id);
        } else if state.is_being_served() {
            let staff = self
                .staff
                .iter()
                .position(|s| s.state == StaffState::Serving(id))
                .expect("served customer has a server");
            self.release(staff, now);
            self.dispatch(staff, config, streams, now, sched);
        }
        self.customers[id].apply(TransitionKind::QuickExit, config);
        self.exit(id, ExitReason::QuickExit, now);
        self.exits.last().copied()
    }

    /// Closes the doors: everyone not committed to paying leaves now.
    pub fn close(
        &mut self,
        config: &ScenarioConfig,
        streams: &mut Streams,
        now: f64,
        sched: &mut impl Scheduler,
    ) -> Vec<ExitRecord> {
        self.closed = true;
        (0..self.customers.len())
            .filter_map(|id| self.quick_exit(id, config, streams, now, sched))
            .collect()
    }

    /// Returns a customer who has been recorded as exiting to the pool.
    pub fn return_to_pool(&mut self, id: CustomerId) {
        debug_assert_eq!(self.customers[id].state, CustomerState::Exiting);
        self.customers[id].state = CustomerState::Resting;
    }

    /// Checks the structural invariants that must hold between events.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = vec![0u8; self.customers.len()];
        for q in &self.queues {
            for e in q.iter() {
                seen[e.customer] += 1;
                let st = self.customers[e.customer].state;
                if st != q.kind.waiting_state() {
                    return Err(format!(
                        "customer {} queued at {} in state {st:?}",
                        e.customer,
                        q.kind.name()
                    ));
                }
            }
        }
        for s in &self.staff {
            if let StaffState::Serving(c) = s.state {
                if !self.on_duty[s.id] {
                    return Err(format!("off-duty staff {} is serving", s.id));
                }
                seen[c] += 1;
                if !self.customers[c].state.is_being_served() {
                    return Err(format!(
                        "staff {} serves customer {c} in state {:?}",
                        s.id, self.customers[c].state
                    ));
                }
            }
        }
        if let Some(c) = seen.iter().position(|&n| n > 1) {
            return Err(format!("customer {c} occupies {} places", seen[c]));
        }
        for c in &self.customers {
            let placed = seen[c.id] == 1;
            let should = c.state.is_waiting() || c.state.is_being_served();
            if placed != should {
                return Err(format!("customer {} in state {:?} misplaced", c.id, c.state));
            }
            if c.state == CustomerState::Exiting {
                return Err(format!("customer {} stuck exiting", c.id));
            }
        }
        for s in self.roster().filter(|s| s.is_idle()) {
            if let Some(k) = QueueKind::ALL
                .into_iter()
                .find(|&k| s.can_serve(k) && !self.queues[k.index()].is_empty())
            {
                return Err(format!("staff {} idle while {} queue waits", s.id, k.name()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;

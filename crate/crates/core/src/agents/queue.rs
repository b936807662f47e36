use super::customer::{CustomerId, CustomerState};
use crate::config::StaffRole;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QueueKind {
    Till,
    NormalHelp,
    ExpertHelp,
    RefundDecision,
}

impl QueueKind {
    pub const ALL: [QueueKind; 4] = [
        Self::Till,
        Self::NormalHelp,
        Self::ExpertHelp,
        Self::RefundDecision,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Till => "till",
            Self::NormalHelp => "normal_help",
            Self::ExpertHelp => "expert_help",
            Self::RefundDecision => "refund_decision",
        }
    }

    /// Dedicated role that staffs this queue.
    pub fn role(self) -> StaffRole {
        match self {
            Self::Till => StaffRole::Cashier,
            Self::NormalHelp => StaffRole::NormalService,
            Self::ExpertHelp => StaffRole::Expert,
            Self::RefundDecision => StaffRole::Manager,
        }
    }

    pub fn waiting_state(self) -> CustomerState {
        match self {
            Self::Till => CustomerState::WaitingToPay,
            Self::NormalHelp => CustomerState::WaitingNormalHelp,
            Self::ExpertHelp => CustomerState::WaitingExpertHelp,
            Self::RefundDecision => CustomerState::WaitingRefundDecision,
        }
    }

    pub fn service_state(self) -> CustomerState {
        match self {
            Self::Till => CustomerState::Paying,
            Self::NormalHelp => CustomerState::ReceivingNormalHelp,
            Self::ExpertHelp => CustomerState::ReceivingExpertHelp,
            Self::RefundDecision => CustomerState::InRefund,
        }
    }

    pub fn for_state(state: CustomerState) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.waiting_state() == state || k.service_state() == state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueEntry {
    pub customer: CustomerId,
    pub enqueued_at: f64,
    pub deadline: f64,
    pub(crate) seq: u64,
}

/// A first-come first-served queue that also supports removal of
/// impatient customers from any position.
#[derive(Debug, Clone)]
pub struct ServiceQueue {
    pub kind: QueueKind,
    entries: VecDeque<QueueEntry>,
}

impl ServiceQueue {
    pub fn new(kind: QueueKind) -> Self {
        Self {
            kind,
            entries: VecDeque::new(),
        }
    }

    pub fn push(&mut self, entry: QueueEntry) {
        self.entries.push_back(entry);
    }

    pub fn peek_next(&self) -> Option<&QueueEntry> {
        self.entries.front()
    }

    pub fn pop_next(&mut self) -> Option<QueueEntry> {
        self.entries.pop_front()
    }

    pub fn remove(&mut self, customer: CustomerId) -> Option<QueueEntry> {
        let pos = self.entries.iter().position(|e| e.customer == customer)?;
        self.entries.remove(pos)
    }

    /// Removes every entry whose deadline has passed, in queue order.
    pub fn remove_expired(&mut self, now: f64) -> Vec<QueueEntry> {
        let mut expired = Vec::new();
        self.entries.retain(|e| {
            if e.deadline <= now {
                expired.push(*e);
                false
            } else {
                true
            }
        });
        expired
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &QueueEntry> {
        self.entries.iter()
    }
}

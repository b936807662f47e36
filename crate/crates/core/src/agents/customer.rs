use crate::config::{CustomerType, CustomerTypeProfile, ScenarioConfig, TransitionKind};

pub type CustomerId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Buy,
    Refund,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CustomerState {
    Resting,
    Browsing,
    WaitingNormalHelp,
    ReceivingNormalHelp,
    WaitingExpertHelp,
    ReceivingExpertHelp,
    WaitingToPay,
    Paying,
    WaitingRefundDecision,
    InRefund,
    Exiting,
}

impl CustomerState {
    pub fn is_waiting(self) -> bool {
        matches!(
            self,
            Self::WaitingNormalHelp
                | Self::WaitingExpertHelp
                | Self::WaitingToPay
                | Self::WaitingRefundDecision
        )
    }

    pub fn is_being_served(self) -> bool {
        matches!(
            self,
            Self::ReceivingNormalHelp | Self::ReceivingExpertHelp | Self::Paying | Self::InRefund
        )
    }

    /// States without a closing-time exit: customers already at the till
    /// stay until served.
    pub fn is_committed_to_pay(self) -> bool {
        matches!(self, Self::WaitingToPay | Self::Paying)
    }
}

#[derive(Debug, Clone)]
pub struct CustomerAgent {
    pub id: CustomerId,
    pub kind: CustomerType,
    pub profile: CustomerTypeProfile,
    pub goal: Goal,
    pub state: CustomerState,
    pub visit_score: i64,
    pub lifetime_score: i64,
    /// Completed visits.
    pub visits: u32,
    pub patience_deadline: Option<f64>,
    pub(crate) browse_token: u64,
    pub(crate) refunded_this_visit: bool,
}

impl CustomerAgent {
    pub fn new(id: CustomerId, kind: CustomerType, config: &ScenarioConfig) -> Self {
        Self {
            id,
            kind,
            profile: config.profile(kind),
            goal: Goal::Buy,
            state: CustomerState::Resting,
            visit_score: 0,
            lifetime_score: 0,
            visits: 0,
            patience_deadline: None,
            browse_token: 0,
            refunded_this_visit: false,
        }
    }

    pub fn apply(&mut self, kind: TransitionKind, config: &ScenarioConfig) {
        self.visit_score += i64::from(config.weight(kind));
    }

    pub fn in_department(&self) -> bool {
        self.state != CustomerState::Resting
    }
}

use super::customer::CustomerId;
use super::queue::QueueKind;
use crate::config::StaffRole;

pub type StaffId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contract {
    FullTime,
    PartTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaffState {
    Idle,
    Serving(CustomerId),
}

#[derive(Debug, Clone)]
pub struct StaffAgent {
    pub id: StaffId,
    pub role: StaffRole,
    pub contract: Contract,
    pub state: StaffState,
    pub(crate) token: u64,
    pub(crate) busy_since: f64,
}

impl StaffAgent {
    pub fn new(id: StaffId, role: StaffRole, contract: Contract) -> Self {
        Self {
            id,
            role,
            contract,
            state: StaffState::Idle,
            token: 0,
            busy_since: 0.0,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.state == StaffState::Idle
    }

    /// Generic part-timers can take on any role.
    pub fn can_serve(&self, kind: QueueKind) -> bool {
        self.role == StaffRole::GenericPt || self.role == kind.role()
    }
}

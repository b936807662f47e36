//! Agent-based discrete-event simulation of a retail department.
//!
//! Customers drawn from a finite pool visit the department, browse, ask for
//! help, queue, pay or ask for refunds, and collect a satisfaction score
//! from weighted state-chart transitions. Daily satisfied/dissatisfied
//! counts feed back into the next day's arrivals via word of mouth.

pub mod agents;
pub mod config;
pub mod engine;
pub mod harness;
pub mod metrics;
pub mod stochastic;

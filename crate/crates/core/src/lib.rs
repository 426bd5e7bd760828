//! Structured Text front end, scan-cycle semantics and a bounded explicit-state
//! model checker for PLC safety logic.

pub mod bmc;
pub mod cli;
pub mod harness;
pub mod pipeline;
pub mod plc;
pub mod report;
pub mod requirements;
pub mod st;

pub mod catalytic;
pub mod census;
pub mod compile;
pub mod dqc1;
pub mod limits;
pub mod qstate;
pub mod regprog;

pub use limits::Limits;

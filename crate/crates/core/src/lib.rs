//! Freeze-tag toolkit: wake-up trees in normed planes.

pub mod cone;
pub mod error;
pub mod exact;
pub mod harness;
pub mod l1;
pub mod norm;
pub mod point;
pub mod wakeup;

pub use error::{FtkError, Result};
pub use norm::{Cone, Norm, NormKind, EPS};
pub use point::Point;
pub use wakeup::{
    check, makespan, trivial_lower_bound, validate, Agent, Instance, Schedule, ScheduleBuilder, WakeupTree,
};

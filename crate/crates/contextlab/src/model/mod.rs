//! Measurement scenarios, distributions, and behaviors.

mod behavior;
mod distribution;
mod joint;
mod scenario;

pub use behavior::{Behavior, BehaviorViolation, DisturbanceWitness};
pub use distribution::Distribution;
pub use joint::{enumerate_joint_outcomes, JointSpace};
pub use scenario::{Context, Observable, Scenario};

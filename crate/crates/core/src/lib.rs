//! Hierarchical fast–slow planning stack: symbolic driving directives are turned into
//! semantic-guided grid paths, tuned by a feedback loop with memory, and tracked by a
//! switching model predictive controller inside a kinematic closed-loop simulator.

pub mod geometry;
pub mod worldmodel;
pub mod decision;
pub mod planner;
pub mod refinement;
pub mod control;
pub mod sim;
pub mod bundled;
pub mod cli;

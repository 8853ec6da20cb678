pub mod agent;
pub mod bench;
pub mod compiler;
pub mod engine;
pub mod games;
pub mod kb;
pub mod pddl;
pub mod planner;
pub mod problem;
pub mod vgdl;

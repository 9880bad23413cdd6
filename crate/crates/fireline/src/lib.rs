//! Minimum-time fronts, barrier verification and sparse-barrier detours for
//! the dynamic blocking problem.

pub mod burnedcost;
pub mod detour;
pub mod eikonal_exact;
pub mod eikonal_grid;
pub mod firefront;
pub mod flowbox;
pub mod geometry;
pub mod strategy;

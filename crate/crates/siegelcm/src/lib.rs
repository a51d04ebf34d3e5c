//! Exact-arithmetic engine and floating-point oracle for CM values of Siegel
//! theta constants and Rosenhain invariants on the level-2 Siegel threefold.

pub mod lattices;
pub mod weilrep;
pub mod nfield;
pub mod qseries;
pub mod geometry;
pub mod thetanum;
pub mod eisenstein;
pub mod engine;

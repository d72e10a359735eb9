//! Grid-sweep execution.
//!
//! Every grid point is a pure function of its parameters, so points run in
//! parallel under the `parallel` feature (rayon) and sequentially otherwise.
//! Output order is the input grid order either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::Result;
use crate::feasibility::FeasibilitySpec;
use crate::protocols::{
    concentrate_via_swapping, remote_prepare, teleport, ConcentrateInputs, RemotePrepareInputs,
    TeleportInputs,
};
use crate::report::AnyReport;

/// One grid point of a sweep.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum SweepPoint {
    Teleport(TeleportInputs),
    Concentrate(ConcentrateInputs),
    RemotePrepare(RemotePrepareInputs),
    Feasibility(FeasibilitySpec),
}

/// Run a single point.
pub fn run_point(point: &SweepPoint) -> Result<AnyReport> {
    match point {
        SweepPoint::Teleport(inputs) => teleport(inputs).map(AnyReport::Protocol),
        SweepPoint::Concentrate(inputs) => {
            concentrate_via_swapping(inputs).map(AnyReport::Protocol)
        }
        SweepPoint::RemotePrepare(inputs) => remote_prepare(inputs).map(AnyReport::Protocol),
        SweepPoint::Feasibility(spec) => spec.evaluate().map(AnyReport::Feasibility),
    }
}

/// Run all points, in parallel when the `parallel` feature is enabled.
/// Results come back in grid order regardless of scheduling.
pub fn run_points(points: &[SweepPoint]) -> Result<Vec<AnyReport>> {
    #[cfg(feature = "parallel")]
    {
        points.par_iter().map(run_point).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_points_sequential(points)
    }
}

/// Single-threaded execution path; also the reference for the benchmark
/// comparison against the parallel path.
pub fn run_points_sequential(points: &[SweepPoint]) -> Result<Vec<AnyReport>> {
    points.iter().map(run_point).collect()
}

//! Incident waves, the manufactured test case, simulation presets, error
//! metrics and the convergence-study harness.

mod experiments;
mod incident;
mod manufactured;
mod signals;
mod study;

pub use experiments::{gaussian_lens_kappa, Experiment, ExperimentSetup};
pub use incident::{plane_wave_incident, PlaneWave};
pub use manufactured::{cylindrical_wave, manufactured_case_1, ManufacturedCase, ManufacturedKappa};
pub use signals::{smooth_ramp, CausalSignal, Jet};
pub use study::{
    convergence_study, error_metrics, ConvergenceReport, ErrorMetrics, LevelRecord, StudyOptions, CSV_HEADER,
    OBSERVATION_POINTS,
};

use crate::bem::{BoundaryProjector, SpaceKind};
use crate::cq::TimeGrid;
use crate::fem::FemSystem;
use crate::parallel::{map_indexed, Execution};
use crate::{Point, Result};

/// `(β₀ samples in Y_h, β₁ samples in X_h)`.
pub type BoundaryData = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// `L²` projections of `β₀(x, t_n)` onto `Y_h` and of `β₁(x, ν, t_n)` onto
/// `X_h` for every time step.
pub fn sample_boundary_data(
    fem: &FemSystem,
    grid: &TimeGrid,
    beta0: impl Fn(Point, f64) -> f64 + Sync + Send,
    beta1: impl Fn(Point, Point, f64) -> f64 + Sync + Send,
    exec: Execution,
) -> Result<BoundaryData> {
    let b = &fem.bmesh;
    let py = BoundaryProjector::new(b, &fem.spaces, SpaceKind::Y)?;
    let px = BoundaryProjector::new(b, &fem.spaces, SpaceKind::X)?;
    let times = grid.times();
    let pairs = map_indexed(exec, times.len(), |n| {
        let t = times[n];
        (
            py.project(b, &fem.spaces, |_, x| beta0(x, t)),
            px.project(b, &fem.spaces, |p, x| beta1(x, b.normal(p), t)),
        )
    });
    Ok(pairs.into_iter().unzip())
}

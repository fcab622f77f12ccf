use super::incident::{plane_wave_incident, PlaneWave};
use super::signals::CausalSignal;
use crate::fem::{CoefficientField, ConstantCoefficients, FnCoefficients, PerComponentCoefficients};
use crate::mesh::{extract_boundary, generate_boxes_mesh, generate_masked_grid, AxisBox, Mesh};
use crate::{Error, Result};
use std::f64::consts::FRAC_1_SQRT_2;

/// `κ = (1 − 1.65 e^{−1/(1−r²)}) I` for `r < 1`, `κ = I` beyond; `c ≡ 1`.
pub fn gaussian_lens_kappa() -> FnCoefficients {
    FnCoefficients::new(
        |_| 1.0,
        |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let a = if r2 < 1.0 { 1.0 - 1.65 * (-1.0 / (1.0 - r2)).exp() } else { 1.0 };
            [[a, 0.0], [0.0, a]]
        },
    )
}

/// Built-in simulation setups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    /// Plane wave on `[−0.5, 0.5]²` with the Gaussian lens coefficient.
    GaussianLens,
    /// Four anisotropic boxes.
    FourBoxes,
    /// A non-convex cup that traps waves.
    Trapping,
}

/// Mesh, coefficients, incident wave and time parameters of an experiment.
pub struct ExperimentSetup {
    pub mesh: Mesh,
    pub coefficients: Box<dyn CoefficientField>,
    pub wave: PlaneWave,
    pub t_final: f64,
    pub k: f64,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::GaussianLens => "gaussian_lens",
            Experiment::FourBoxes => "four_boxes",
            Experiment::Trapping => "trapping",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Experiment::GaussianLens, Experiment::FourBoxes, Experiment::Trapping]
            .into_iter()
            .find(|e| e.name() == name)
    }

    /// Geometry with mesh size about `h`.
    pub fn mesh(self, h: f64) -> Result<Mesh> {
        if !(h > 0.0 && h <= 0.25) {
            return Err(Error::InvalidInput(format!("mesh size must lie in (0, 0.25], got {h}")));
        }
        match self {
            Experiment::GaussianLens => {
                let n = (1.0 / h).ceil() as usize;
                generate_masked_grid([-0.5, -0.5], 1.0 / n as f64, n, n, |_, _| true)
            }
            Experiment::FourBoxes => {
                // Top left, top right, bottom left, bottom right.
                let boxes = [
                    AxisBox::new([-0.6, 0.2], [-0.2, 0.6])?,
                    AxisBox::new([0.2, 0.2], [0.6, 0.6])?,
                    AxisBox::new([-0.6, -0.6], [-0.2, -0.2])?,
                    AxisBox::new([0.2, -0.6], [0.6, -0.2])?,
                ];
                generate_boxes_mesh(&boxes, h)
            }
            Experiment::Trapping => {
                // [−0.5, 0.5]² minus the slot [−0.25, 0.25] × [−0.5, 0.25],
                // opening towards the incoming wave.
                let n = 4 * (0.25 / h).ceil() as usize;
                let cell = 1.0 / n as f64;
                generate_masked_grid([-0.5, -0.5], cell, n, n, |i, j| {
                    let x = -0.5 + (i as f64 + 0.5) * cell;
                    let y = -0.5 + (j as f64 + 0.5) * cell;
                    !(x.abs() < 0.25 && y < 0.25)
                })
            }
        }
    }

    pub fn coefficients(self) -> Box<dyn CoefficientField> {
        match self {
            Experiment::GaussianLens => Box::new(gaussian_lens_kappa()),
            Experiment::FourBoxes => {
                let strong = ConstantCoefficients::diagonal(4.0, 0.25);
                let weak = ConstantCoefficients::diagonal(2.0, 0.5);
                Box::new(PerComponentCoefficients {
                    fields: vec![Box::new(strong), Box::new(weak), Box::new(weak), Box::new(strong)],
                })
            }
            Experiment::Trapping => Box::new(ConstantCoefficients::diagonal(0.25, 0.125)),
        }
    }

    /// `(T, k)` of the time grid.
    pub fn time_parameters(self) -> (f64, f64) {
        match self {
            Experiment::GaussianLens => (3.5, 4.375e-3),
            Experiment::FourBoxes => (4.0, 2e-2),
            Experiment::Trapping => (2.5, 2.5 / 375.0),
        }
    }

    /// Everything needed to run the experiment at mesh size `h`.
    pub fn setup(self, h: f64) -> Result<ExperimentSetup> {
        let mesh = self.mesh(h)?;
        let bmesh = extract_boundary(&mesh)?;
        let direction = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
        let delay = PlaneWave::min_delay(direction, &bmesh);
        let wave = plane_wave_incident(direction, CausalSignal::interior_default(), delay)?;
        let (t_final, k) = self.time_parameters();
        Ok(ExperimentSetup {
            mesh,
            coefficients: self.coefficients(),
            wave,
            t_final,
            k,
        })
    }
}

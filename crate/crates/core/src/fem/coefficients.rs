use crate::Point;

/// A symmetric 2×2 matrix, row-major.
pub type Tensor = [[f64; 2]; 2];

/// Material coefficients `c` (positive scalar) and `κ` (symmetric positive
/// definite matrix), possibly depending on the obstacle component.
pub trait CoefficientField: Send + Sync {
    fn c(&self, x: Point, component: usize) -> f64;
    fn kappa(&self, x: Point, component: usize) -> Tensor;
}

/// Spatially constant coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantCoefficients {
    pub c: f64,
    pub kappa: Tensor,
}

impl ConstantCoefficients {
    pub const IDENTITY: Tensor = [[1.0, 0.0], [0.0, 1.0]];

    /// `c ≡ 1`, `κ ≡ I`.
    pub fn unit() -> Self {
        ConstantCoefficients {
            c: 1.0,
            kappa: Self::IDENTITY,
        }
    }

    /// `c ≡ 1`, `κ = diag(a, b)`.
    pub fn diagonal(a: f64, b: f64) -> Self {
        ConstantCoefficients {
            c: 1.0,
            kappa: [[a, 0.0], [0.0, b]],
        }
    }
}

impl CoefficientField for ConstantCoefficients {
    fn c(&self, _: Point, _: usize) -> f64 {
        self.c
    }

    fn kappa(&self, _: Point, _: usize) -> Tensor {
        self.kappa
    }
}

/// One set of coefficients per component; components past the end reuse the
/// last entry.
pub struct PerComponentCoefficients {
    pub fields: Vec<Box<dyn CoefficientField>>,
}

impl PerComponentCoefficients {
    fn pick(&self, component: usize) -> &dyn CoefficientField {
        let i = component.min(self.fields.len().saturating_sub(1));
        self.fields[i].as_ref()
    }
}

impl CoefficientField for PerComponentCoefficients {
    fn c(&self, x: Point, component: usize) -> f64 {
        self.pick(component).c(x, component)
    }

    fn kappa(&self, x: Point, component: usize) -> Tensor {
        self.pick(component).kappa(x, component)
    }
}

type ScalarFn = Box<dyn Fn(Point) -> f64 + Send + Sync>;
type TensorFn = Box<dyn Fn(Point) -> Tensor + Send + Sync>;

/// Coefficients given by closures of position.
pub struct FnCoefficients {
    pub c: ScalarFn,
    pub kappa: TensorFn,
}

impl FnCoefficients {
    pub fn new(
        c: impl Fn(Point) -> f64 + Send + Sync + 'static,
        kappa: impl Fn(Point) -> Tensor + Send + Sync + 'static,
    ) -> Self {
        FnCoefficients {
            c: Box::new(c),
            kappa: Box::new(kappa),
        }
    }
}

impl CoefficientField for FnCoefficients {
    fn c(&self, x: Point, _: usize) -> f64 {
        (self.c)(x)
    }

    fn kappa(&self, x: Point, _: usize) -> Tensor {
        (self.kappa)(x)
    }
}

//! Named catalog of observables. Everything here is `C^1` with bounded value
//! and gradient except the raw coordinate, which is kept for diagnostics.

/// Observable `f(x)` evaluated at the slow endpoint.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// `x_i` (0-based index).
    Coordinate(usize),
    /// `tanh(x_i)`.
    TanhCoordinate(usize),
    /// `exp(-||x - center||^2 / width^2)`.
    SmoothBump { center: Vec<f64>, width: f64 },
}

impl Observable {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Observable::Coordinate(i) => x[*i],
            Observable::TanhCoordinate(i) => x[*i].tanh(),
            Observable::SmoothBump { center, width } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (width * width)).exp()
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Observable::Coordinate(i) => format!("coordinate_{}", i + 1),
            Observable::TanhCoordinate(i) => format!("tanh_coordinate_{}", i + 1),
            Observable::SmoothBump { width, .. } => format!("smooth_bump_w{width:?}"),
        }
    }

    /// Largest coordinate index the observable reads, for validation.
    pub fn max_index(&self) -> usize {
        match self {
            Observable::Coordinate(i) | Observable::TanhCoordinate(i) => *i,
            Observable::SmoothBump { center, .. } => center.len().saturating_sub(1),
        }
    }
}

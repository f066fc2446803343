//! The slow-component drift `a(x, v)`.

use std::sync::Arc;

type DriftFn = dyn Fn(&[f64], usize, &mut [f64]) + Send + Sync;

enum Kind {
    /// `a(x, v)` independent of `x`: one velocity vector per fast state.
    /// The slow ODE between jumps is then exactly linear and the integrator
    /// advances in closed form.
    Table(Vec<Vec<f64>>),
    General(Arc<DriftFn>),
}

/// Bounded continuous drift field with a declared sup bound on `||a||_1`.
#[derive(Clone)]
pub struct DriftField {
    kind: Arc<Kind>,
    dim: usize,
    sup_bound: f64,
}

impl DriftField {
    /// Drift depending only on the fast state: row `v` of `table` is `a(., v)`.
    pub fn from_state_table(table: Vec<Vec<f64>>, sup_bound: f64) -> Self {
        let dim = table.first().map_or(0, Vec::len);
        Self {
            kind: Arc::new(Kind::Table(table)),
            dim,
            sup_bound,
        }
    }

    pub fn from_fn<F>(dim: usize, sup_bound: f64, f: F) -> Self
    where
        F: Fn(&[f64], usize, &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            kind: Arc::new(Kind::General(Arc::new(f))),
            dim,
            sup_bound,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared bound on `sup_{x,v} ||a(x, v)||_1`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    #[inline]
    pub fn eval(&self, x: &[f64], v: usize, out: &mut [f64]) {
        match &*self.kind {
            Kind::Table(t) => out.copy_from_slice(&t[v]),
            Kind::General(f) => f(x, v, out),
        }
    }

    /// Velocity table when the drift is independent of `x`.
    pub fn state_table(&self) -> Option<&[Vec<f64>]> {
        match &*self.kind {
            Kind::Table(t) => Some(t),
            Kind::General(_) => None,
        }
    }
}

impl std::fmt::Debug for DriftField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DriftField")
            .field("dim", &self.dim)
            .field("sup_bound", &self.sup_bound)
            .field("state_table", &self.state_table().is_some())
            .finish()
    }
}

//! Time series of fields with a uniform snapshot step.
//!
//! Every time integral in the crate is the composite trapezoid rule over the
//! snapshot times; the series type enforces the preconditions once.

use crate::error::{Error, Result};
use crate::fields::field::HasGrid;
use crate::fields::grid::Grid;

#[derive(Debug, Clone)]
pub struct FieldSeries<T> {
    times: Vec<f64>,
    fields: Vec<T>,
}

pub type ScalarSeries = FieldSeries<crate::fields::field::ScalarField>;
pub type VectorSeries = FieldSeries<crate::fields::field::VectorField>;

impl<T: HasGrid> FieldSeries<T> {
    /// Validates: at least two snapshots, shared grid, times starting at 0,
    /// strictly increasing with uniform step.
    pub fn new(snapshots: Vec<(f64, T)>) -> Result<Self> {
        if snapshots.len() < 2 {
            return Err(Error::EmptyRange("series needs at least 2 snapshots".into()));
        }
        let t_total = snapshots.last().unwrap().0;
        if !(t_total > 0.0 && t_total.is_finite()) {
            return Err(Error::InvalidParameter(format!("final time {t_total} must be positive")));
        }
        let tol = 1e-9 * t_total;
        if snapshots[0].0.abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "series must start at t=0, got {}",
                snapshots[0].0
            )));
        }
        let dt = t_total / (snapshots.len() - 1) as f64;
        let grid = snapshots[0].1.grid().clone();
        let ncomp = snapshots[0].1.components();
        for (i, (t, f)) in snapshots.iter().enumerate() {
            if (t - i as f64 * dt).abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "non-uniform time step at snapshot {i}: t={t}, expected {}",
                    i as f64 * dt
                )));
            }
            if f.grid() != &grid || f.components() != ncomp {
                return Err(Error::GridMismatch(format!("snapshot {i} grid/components differ")));
            }
        }
        let (times, fields) = snapshots.into_iter().unzip();
        Ok(FieldSeries { times, fields })
    }

    /// Replicates one field across `count >= 2` uniformly spaced snapshots.
    pub fn time_constant(field: T, t_total: f64, count: usize) -> Result<Self>
    where
        T: Clone,
    {
        if count < 2 {
            return Err(Error::InvalidParameter("time_constant needs count >= 2".into()));
        }
        let dt = t_total / (count - 1) as f64;
        FieldSeries::new((0..count).map(|i| (i as f64 * dt, field.clone())).collect())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn dt(&self) -> f64 {
        self.duration() / (self.len() - 1) as f64
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn field(&self, i: usize) -> &T {
        &self.fields[i]
    }

    pub fn last_field(&self) -> &T {
        self.fields.last().unwrap()
    }

    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    /// Trapezoid weight of snapshot `i` (dt/2 at the ends, dt inside).
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        let dt = self.dt();
        if i == 0 || i == self.len() - 1 {
            0.5 * dt
        } else {
            dt
        }
    }

    /// (1/T) * trapezoid sum of per-snapshot values.
    pub fn time_average(&self, per_snapshot: &[f64]) -> f64 {
        assert_eq!(per_snapshot.len(), self.len());
        let weighted: Vec<f64> = per_snapshot
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.trapezoid_weight(i))
            .collect();
        crate::numeric::tree_sum(&weighted) / self.duration()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::field::ScalarField;

    fn field(v: f64) -> ScalarField {
        let g = Grid::new(1, &[4], &[0.0], &[1.0], &[false]).unwrap();
        ScalarField::from_data(g, vec![v; 4]).unwrap()
    }

    #[test]
    fn rejects_single_snapshot() {
        assert!(FieldSeries::new(vec![(0.0, field(1.0))]).is_err());
    }

    #[test]
    fn rejects_nonuniform_step() {
        let s = vec![(0.0, field(0.0)), (0.4, field(1.0)), (1.0, field(2.0))];
        assert!(FieldSeries::new(s).is_err());
    }

    #[test]
    fn rejects_nonzero_start() {
        let s = vec![(0.5, field(0.0)), (1.0, field(1.0))];
        assert!(FieldSeries::new(s).is_err());
    }

    #[test]
    fn trapezoid_integrates_linear_ramp_exactly() {
        let s = FieldSeries::new(
            (0..5).map(|i| (i as f64 * 0.25, field(i as f64))).collect(),
        )
        .unwrap();
        let vals: Vec<f64> = (0..5).map(|i| i as f64).collect();
        // (1/T) int_0^1 4t dt = 2
        assert!((s.time_average(&vals) - 2.0).abs() < 1e-14);
    }
}

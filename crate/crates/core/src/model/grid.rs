//! Cartesian grid discretization of the decision space.

use crate::error::{Error, Result};
use crate::parallel::map_indexed;
use crate::point::{Point, PointSet};

use super::ProblemDefinition;

/// Default cap on the number of grid points.
pub const DEFAULT_GRID_CAP: u64 = 10_000_000;

fn axis_values(min: f64, max: f64, steps: u32) -> Vec<f64> {
    if steps == 1 {
        return vec![min];
    }
    let h = (max - min) / (steps - 1) as f64;
    (0..steps)
        .map(|k| {
            if k == steps - 1 {
                // endpoints are inclusive and exact
                max
            } else {
                min + k as f64 * h
            }
        })
        .collect()
}

/// The full candidate grid: per variable, `steps` evenly spaced values over
/// `[min, max]`, combined as a Cartesian product in lexicographic order
/// (last variable varies fastest).
pub fn candidate_grid(p: &ProblemDefinition, cap: u64) -> Result<PointSet> {
    let axes: Vec<Vec<f64>> = p
        .variables
        .iter()
        .map(|v| axis_values(v.min, v.max, v.steps))
        .collect();
    let mut total: u128 = 1;
    for axis in &axes {
        total = total.saturating_mul(axis.len() as u128);
    }
    if total > cap as u128 {
        return Err(Error::GridCapExceeded { points: total, cap });
    }
    let total = total as usize;

    let points = map_indexed(total, |mut idx| {
        let mut coords = vec![0.0; axes.len()];
        for (k, axis) in axes.iter().enumerate().rev() {
            coords[k] = axis[idx % axis.len()];
            idx /= axis.len();
        }
        Point::new(coords)
    });
    Ok(PointSet::from_canonical(points))
}

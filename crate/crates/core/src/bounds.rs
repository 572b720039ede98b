//! Ideal-point lower bounds at subsystem and system level.
//!
//! For each subsystem the componentwise minimum of its objective block can be
//! taken over its own feasible set (subsystem level) or over the system valid
//! set (system level). Stacked over subsystems these give the two lower
//! bounds `subsystem level <= system level = all-in-one ideal`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::dominance::{superior_set, SuperiorKind};
use crate::model::{filter_valid, ProblemDefinition, Scope};
use crate::point::{Point, PointSet};
use crate::tol::Tolerance;

/// Per-subsystem ideal points at both levels.
#[derive(Debug, Clone, Serialize)]
pub struct IdealBounds {
    /// Componentwise minima over each subsystem's own feasible candidates.
    pub subsystem_level: Vec<Vec<f64>>,
    /// Componentwise minima over the system valid candidates.
    pub system_level: Vec<Vec<f64>>,
}

impl IdealBounds {
    pub fn stacked_subsystem_level(&self) -> Vec<f64> {
        self.subsystem_level.iter().flatten().copied().collect()
    }

    pub fn stacked_system_level(&self) -> Vec<f64> {
        self.system_level.iter().flatten().copied().collect()
    }
}

fn componentwise_min(
    p: &ProblemDefinition,
    i: usize,
    valid: &PointSet,
    what: &str,
) -> Result<Vec<f64>> {
    if valid.is_empty() {
        return Err(Error::EmptySet(format!(
            "no {what} candidates for subsystem {i}"
        )));
    }
    let cp = p.compile()?;
    let mut min: Option<Vec<f64>> = None;
    for x in valid.iter() {
        let vals = cp.block_values(i, x.coords());
        match &mut min {
            None => min = Some(vals),
            Some(m) => {
                for (mk, v) in m.iter_mut().zip(vals) {
                    if v < *mk {
                        *mk = v;
                    }
                }
            }
        }
    }
    Ok(min.expect("nonempty set"))
}

/// Componentwise minimum of subsystem `i`'s objectives over its own feasible
/// candidates (linking ignored).
pub fn subsystem_ideal_point(
    p: &ProblemDefinition,
    i: usize,
    candidates: &PointSet,
    tol: Tolerance,
) -> Result<Vec<f64>> {
    if i >= p.num_subsystems() {
        return Err(Error::Argument(format!("subsystem index {i} out of range")));
    }
    let valid = filter_valid(p, candidates, &[i], &[], tol)?;
    componentwise_min(p, i, &valid, "feasible")
}

/// Componentwise minimum of subsystem `i`'s objectives over the system valid
/// candidates.
pub fn system_ideal_point(
    p: &ProblemDefinition,
    i: usize,
    candidates: &PointSet,
    tol: Tolerance,
) -> Result<Vec<f64>> {
    if i >= p.num_subsystems() {
        return Err(Error::Argument(format!("subsystem index {i} out of range")));
    }
    let all: Vec<usize> = (0..p.num_subsystems()).collect();
    let links: Vec<usize> = (0..p.num_linking()).collect();
    let valid = filter_valid(p, candidates, &all, &links, tol)?;
    componentwise_min(p, i, &valid, "system valid")
}

/// Both ideal-point families for every subsystem.
pub fn ideal_bounds(
    p: &ProblemDefinition,
    candidates: &PointSet,
    tol: Tolerance,
) -> Result<IdealBounds> {
    let subsystem_level = (0..p.num_subsystems())
        .map(|i| subsystem_ideal_point(p, i, candidates, tol))
        .collect::<Result<Vec<_>>>()?;
    let system_level = (0..p.num_subsystems())
        .map(|i| system_ideal_point(p, i, candidates, tol))
        .collect::<Result<Vec<_>>>()?;
    for (ss, s) in subsystem_level.iter().zip(&system_level) {
        for (a, b) in ss.iter().zip(s) {
            if !tol.le(*a, *b) {
                return Err(Error::Inconsistent(format!(
                    "subsystem-level ideal {a} exceeds system-level ideal {b}"
                )));
            }
        }
    }
    Ok(IdealBounds {
        subsystem_level,
        system_level,
    })
}

/// The all-in-one ideal point: componentwise minimum of the concatenated
/// objective over the system valid candidates.
pub fn aio_ideal_point(
    p: &ProblemDefinition,
    candidates: &PointSet,
    tol: Tolerance,
) -> Result<Vec<f64>> {
    let bounds = (0..p.num_subsystems())
        .map(|i| system_ideal_point(p, i, candidates, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(bounds.into_iter().flatten().collect())
}

/// Objective-space images of the two per-subsystem superior sets: the image
/// of the subsystem's own efficient candidates and the image of its
/// system-valid efficient candidates. Returned as objective-space point sets.
pub fn ideal_sets(
    p: &ProblemDefinition,
    i: usize,
    candidates: &PointSet,
    tol: Tolerance,
) -> Result<(PointSet, PointSet)> {
    let own = Scope::new(p, &[i], &[i], &[])?;
    let full_links: Vec<usize> = (0..p.num_linking()).collect();
    let all: Vec<usize> = (0..p.num_subsystems()).collect();
    let system = Scope::new(p, &[i], &all, &full_links)?;
    let cp = p.compile()?;
    let image = |set: &PointSet| -> PointSet {
        PointSet::from_points(
            set.iter()
                .map(|x| Point::new(cp.block_values(i, x.coords())))
                .collect(),
            tol,
        )
    };
    let own_sup = superior_set(p, &own, candidates, SuperiorKind::Plain, tol)?;
    let sys_sup = superior_set(p, &system, candidates, SuperiorKind::Plain, tol)?;
    Ok((image(&own_sup), image(&sys_sup)))
}

/// Cartesian product of per-subsystem objective-space images, stacked into
/// full-dimension objective vectors. Capped because products explode.
pub fn ideal_set_product(factors: &[PointSet], cap: usize) -> Result<PointSet> {
    let mut total: usize = 1;
    for f in factors {
        if f.is_empty() {
            return Err(Error::EmptySet("empty image factor".into()));
        }
        total = total
            .checked_mul(f.len())
            .filter(|&t| t <= cap)
            .ok_or_else(|| Error::Argument(format!("ideal set product exceeds cap {cap}")))?;
    }
    let mut tuples: Vec<Point> = vec![Point::new(Vec::new())];
    for f in factors {
        let mut next = Vec::with_capacity(tuples.len() * f.len());
        for t in &tuples {
            for q in f.iter() {
                let mut coords = t.coords().to_vec();
                coords.extend_from_slice(q.coords());
                next.push(Point::new(coords));
            }
        }
        tuples = next;
    }
    debug_assert_eq!(tuples.len(), total);
    Ok(PointSet::from_points(tuples, Tolerance::default()))
}

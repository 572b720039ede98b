//! Scoped validity: subsystem feasibility plus linking consistency.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::parallel::map_indexed;
use crate::point::{Point, PointSet};
use crate::tol::Tolerance;

use super::{ProblemDefinition, Relation};

/// A linear function with name-resolution done once.
#[derive(Debug, Clone)]
pub(crate) struct CompiledFunction {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl CompiledFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(i, c)| acc + c * x[i])
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledConstraint {
    pub function: CompiledFunction,
    pub relation: Relation,
    pub rhs: f64,
}

impl CompiledConstraint {
    pub fn holds(&self, x: &[f64], tol: Tolerance) -> bool {
        let lhs = self.function.eval(x);
        match self.relation {
            Relation::Le => tol.le(lhs, self.rhs),
            Relation::Ge => tol.ge(lhs, self.rhs),
            Relation::Eq => tol.eq(lhs, self.rhs),
            Relation::Lt => tol.lt(lhs, self.rhs),
            Relation::Gt => tol.gt(lhs, self.rhs),
        }
    }
}

/// Index-resolved form of a problem, built once per operation.
#[derive(Debug, Clone)]
pub(crate) struct CompiledProblem {
    /// Objective functions per subsystem.
    pub objectives: Vec<Vec<CompiledFunction>>,
    /// Local constraints per subsystem.
    pub locals: Vec<Vec<CompiledConstraint>>,
    /// Linking constraints in problem order.
    pub linking: Vec<CompiledConstraint>,
    /// Concatenated objective block of each subsystem.
    pub blocks: Vec<Range<usize>>,
    /// Total objective dimension.
    pub width: usize,
}

impl CompiledProblem {
    /// Evaluates subsystem `i`'s objective block at `x`.
    pub fn block_values(&self, i: usize, x: &[f64]) -> Vec<f64> {
        self.objectives[i].iter().map(|f| f.eval(x)).collect()
    }

    /// True when `x` satisfies all local constraints of every subsystem in
    /// `subsystems` and every linking constraint in `linking`.
    pub fn is_valid(&self, x: &[f64], subsystems: &[usize], linking: &[usize], tol: Tolerance) -> bool {
        subsystems
            .iter()
            .all(|&i| self.locals[i].iter().all(|c| c.holds(x, tol)))
            && linking.iter().all(|&j| self.linking[j].holds(x, tol))
    }
}

fn compile_function(
    p: &ProblemDefinition,
    terms: &std::collections::BTreeMap<String, f64>,
    constant: f64,
) -> Result<CompiledFunction> {
    let resolved = terms
        .iter()
        .map(|(name, &coeff)| {
            p.variable_index(name)
                .map(|i| (i, coeff))
                .ok_or_else(|| Error::Invalid(format!("unknown variable `{name}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompiledFunction {
        terms: resolved,
        constant,
    })
}

pub(crate) fn compile(p: &ProblemDefinition) -> Result<CompiledProblem> {
    let mut objectives = Vec::with_capacity(p.num_subsystems());
    let mut locals = Vec::with_capacity(p.num_subsystems());
    let mut blocks = Vec::with_capacity(p.num_subsystems());
    let mut offset = 0;
    for sub in &p.subsystems {
        let objs = sub
            .objectives
            .iter()
            .map(|o| compile_function(p, &o.terms, o.constant))
            .collect::<Result<Vec<_>>>()?;
        blocks.push(offset..offset + objs.len());
        offset += objs.len();
        objectives.push(objs);
        locals.push(
            sub.constraints
                .iter()
                .map(|c| {
                    Ok(CompiledConstraint {
                        function: compile_function(p, &c.terms, c.constant)?,
                        relation: c.relation,
                        rhs: c.rhs,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let linking = p
        .linking
        .iter()
        .map(|l| {
            Ok(CompiledConstraint {
                function: compile_function(p, &l.terms, l.constant)?,
                relation: l.relation,
                rhs: l.rhs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompiledProblem {
        objectives,
        locals,
        linking,
        blocks,
        width: offset,
    })
}

fn check_scope_indices(label: &str, idx: &[usize], n: usize) -> Result<()> {
    match idx.iter().find(|&&i| i >= n) {
        Some(&bad) => Err(Error::Argument(format!(
            "{label} index {bad} out of range (count {n})"
        ))),
        None => Ok(()),
    }
}

/// Keeps exactly the candidates that are feasible for every subsystem in
/// `subsystems` and consistent with every linking constraint in `linking`.
/// Empty scopes return the input unchanged.
pub fn filter_valid(
    p: &ProblemDefinition,
    candidates: &PointSet,
    subsystems: &[usize],
    linking: &[usize],
    tol: Tolerance,
) -> Result<PointSet> {
    check_scope_indices("subsystem", subsystems, p.num_subsystems())?;
    check_scope_indices("linking", linking, p.num_linking())?;
    let cp = p.compile()?;
    let mask = map_indexed(candidates.len(), |i| {
        cp.is_valid(candidates.get(i).coords(), subsystems, linking, tol)
    });
    let points = candidates
        .iter()
        .zip(mask)
        .filter_map(|(pt, keep)| keep.then(|| pt.clone()))
        .collect();
    Ok(PointSet::from_canonical(points))
}

/// Per-point validity predicate; the reference semantics that `filter_valid`
/// must agree with pointwise.
pub fn is_valid_point(
    p: &ProblemDefinition,
    x: &Point,
    subsystems: &[usize],
    linking: &[usize],
    tol: Tolerance,
) -> Result<bool> {
    check_scope_indices("subsystem", subsystems, p.num_subsystems())?;
    check_scope_indices("linking", linking, p.num_linking())?;
    if x.dim() != p.num_variables() {
        return Err(Error::Argument(format!(
            "point dimension {} does not match variable count {}",
            x.dim(),
            p.num_variables()
        )));
    }
    let cp = p.compile()?;
    Ok(cp.is_valid(x.coords(), subsystems, linking, tol))
}

/// True when every coordinate of `x` lies within its variable's range. Grid
/// points satisfy this by construction; off-grid points (e.g. compromise
/// solutions) need the explicit check.
pub fn within_ranges(p: &ProblemDefinition, x: &Point, tol: Tolerance) -> bool {
    x.dim() == p.num_variables()
        && p.variables
            .iter()
            .zip(x.coords())
            .all(|(v, &c)| tol.ge(c, v.min) && tol.le(c, v.max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::candidate_grid;

    #[test]
    fn halfplane_scoping() {
        let tol = Tolerance::default();
        let p = fixtures::halfplane_pair(5);
        let grid = candidate_grid(&p, 1 << 20).unwrap();
        assert_eq!(grid.len(), 25);

        let origin = Point::new(vec![0.0, 0.0]);
        let s1_only = filter_valid(&p, &grid, &[0], &[], tol).unwrap();
        assert_eq!(s1_only.len(), 25);
        assert!(s1_only.contains(&origin));

        let both = filter_valid(&p, &grid, &[0, 1], &[], tol).unwrap();
        assert!(!both.contains(&origin));
        assert!(both
            .iter()
            .all(|pt| pt.coords()[0] + pt.coords()[1] >= 2.0 - 1e-9));

        let identity = filter_valid(&p, &grid, &[], &[], tol).unwrap();
        assert_eq!(identity, grid);
    }

    #[test]
    fn strict_relations_exclude_boundary() {
        let tol = Tolerance::default();
        let p = fixtures::strict_gap_pair(9);
        let grid = candidate_grid(&p, 1 << 20).unwrap();
        let valid = filter_valid(&p, &grid, &[0, 1], &[], tol).unwrap();
        // x1 + x2 > 0.5 on a 0.25-step grid keeps sums from 0.75 upward
        assert!(valid
            .iter()
            .all(|pt| pt.coords()[0] + pt.coords()[1] >= 0.75 - 1e-9));
        assert!(!valid.contains(&Point::new(vec![0.25, 0.25])));
        assert!(valid.contains(&Point::new(vec![0.25, 0.5])));
    }

    #[test]
    fn filter_matches_pointwise_predicate() {
        let tol = Tolerance::default();
        let p = fixtures::linked_pair(5);
        let grid = candidate_grid(&p, 1 << 20).unwrap();
        let subsystems = [0, 1];
        let linking = [0];
        let valid = filter_valid(&p, &grid, &subsystems, &linking, tol).unwrap();
        for pt in grid.iter() {
            let expect = is_valid_point(&p, pt, &subsystems, &linking, tol).unwrap();
            assert_eq!(valid.contains(pt), expect);
        }
    }

    #[test]
    fn scope_monotonicity() {
        let tol = Tolerance::default();
        let p = fixtures::linked_pair(5);
        let grid = candidate_grid(&p, 1 << 20).unwrap();
        let wide = filter_valid(&p, &grid, &[0], &[], tol).unwrap();
        let narrow = filter_valid(&p, &grid, &[0, 1], &[0], tol).unwrap();
        assert!(narrow.is_subset(&wide));
    }
}

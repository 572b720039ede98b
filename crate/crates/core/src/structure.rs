//! Structural shortcuts: block-diagonal independence and weighted-sum
//! scalarization of additively separable systems.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dominance::{superior_set, SuperiorKind};
use crate::error::{Error, Result};
use crate::model::{
    candidate_grid, ProblemDefinition, Relation, Scope, Subsystem, VariableSpec,
};
use crate::point::{Point, PointSet};
use crate::tol::Tolerance;

/// How the subsystems clump together once linking constraints are inlined.
#[derive(Debug, Clone, Serialize)]
pub struct IndependenceReport {
    /// Partition of the subsystem indices into coupling components.
    pub components: Vec<Vec<usize>>,
    /// True exactly when every component is a single subsystem: no linking
    /// constraints and no shared variables.
    pub independent: bool,
}

/// Connected components of the coupling relation "shares a variable after
/// inlining all linking constraints".
pub fn detect_independence(p: &ProblemDefinition) -> Result<IndependenceReport> {
    let inlined = crate::transform::inline_linking(p)?;
    let n = inlined.num_subsystems();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for v in &inlined.variables {
        let owners: Vec<usize> = (0..n)
            .filter(|&i| inlined.subsystems[i].variables.contains(&v.name))
            .collect();
        for w in owners.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut components: Vec<Vec<usize>> = groups.into_values().collect();
    components.sort_by_key(|c| c[0]);
    let independent = components.iter().all(|c| c.len() == 1);
    Ok(IndependenceReport {
        components,
        independent,
    })
}

/// The subproblem of one subsystem in isolation: its variables, objectives,
/// and local constraints, with no linking.
fn block_problem(p: &ProblemDefinition, i: usize) -> Result<ProblemDefinition> {
    let indices = p.subsystem_variable_indices(i)?;
    let variables: Vec<VariableSpec> = indices.iter().map(|&k| p.variables[k].clone()).collect();
    let sub = Subsystem {
        variables: variables.iter().map(|v| v.name.clone()).collect(),
        ..p.subsystems[i].clone()
    };
    let block = ProblemDefinition {
        variables,
        subsystems: vec![sub],
        linking: vec![],
    };
    block.validate()?;
    Ok(block)
}

/// Per-subsystem superior sets computed on each block's own grid, projected
/// to block coordinates. Meaningful for independent decompositions, where
/// the block grids tile the full grid.
pub fn block_superior_sets(
    p: &ProblemDefinition,
    kind: SuperiorKind,
    cap: u64,
    tol: Tolerance,
) -> Result<Vec<PointSet>> {
    (0..p.num_subsystems())
        .map(|i| {
            let block = block_problem(p, i)?;
            let grid = candidate_grid(&block, cap)?;
            superior_set(&block, &Scope::full(&block), &grid, kind, tol)
        })
        .collect()
}

/// Cartesian product of per-block point sets, lifted back to full points.
/// Requires an independent decomposition, whose blocks partition the
/// variables.
pub fn compose_block_diagonal(
    p: &ProblemDefinition,
    per_block: &[PointSet],
) -> Result<PointSet> {
    let report = detect_independence(p)?;
    if !report.independent {
        return Err(Error::Argument(
            "block composition requires an independent decomposition".into(),
        ));
    }
    if per_block.len() != p.num_subsystems() {
        return Err(Error::Argument(format!(
            "expected {} block sets, got {}",
            p.num_subsystems(),
            per_block.len()
        )));
    }
    let layouts: Vec<Vec<usize>> = (0..p.num_subsystems())
        .map(|i| p.subsystem_variable_indices(i))
        .collect::<Result<_>>()?;
    let mut total: usize = 1;
    for set in per_block {
        if set.is_empty() {
            return Ok(PointSet::empty());
        }
        total = total
            .checked_mul(set.len())
            .ok_or_else(|| Error::Argument("block product overflows".into()))?;
    }
    let mut partial: Vec<Vec<f64>> = vec![vec![f64::NAN; p.num_variables()]];
    for (set, layout) in per_block.iter().zip(&layouts) {
        let mut next = Vec::with_capacity(partial.len() * set.len());
        for base in &partial {
            for pt in set.iter() {
                if pt.dim() != layout.len() {
                    return Err(Error::Argument(format!(
                        "block point dimension {} does not match block width {}",
                        pt.dim(),
                        layout.len()
                    )));
                }
                let mut coords = base.clone();
                for (&k, &v) in layout.iter().zip(pt.coords()) {
                    coords[k] = v;
                }
                next.push(coords);
            }
        }
        partial = next;
    }
    debug_assert_eq!(partial.len(), total);
    Ok(PointSet::from_points(
        partial.into_iter().map(Point::new).collect(),
        Tolerance::default(),
    ))
}

/// An additively separable system: every subsystem sees the shared variables
/// plus its own private ones, constraints touch only one of the two groups,
/// and there are no linking constraints.
#[derive(Debug, Clone)]
pub struct SeparableSystem<'a> {
    problem: &'a ProblemDefinition,
    shared: Vec<usize>,
    private: Vec<Vec<usize>>,
}

/// Result of solving the scalarized decomposition on its grids.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarizedSolution {
    /// Concatenated minimizer in problem variable order.
    pub point: Point,
    /// Shared-block contribution to the weighted sum.
    pub shared_value: f64,
    /// Per-subsystem private contributions, constants included.
    pub block_values: Vec<f64>,
    /// Total weighted-sum value; equals the direct all-in-one weighted-sum
    /// minimum over the same grid.
    pub total_value: f64,
}

impl<'a> SeparableSystem<'a> {
    /// Checks the separable shape and splits the variables into the shared
    /// group and per-subsystem private groups.
    pub fn from_problem(p: &'a ProblemDefinition) -> Result<Self> {
        if !p.linking.is_empty() {
            return Err(Error::Argument(
                "separable form admits no linking constraints".into(),
            ));
        }
        for v in &p.variables {
            if v.min < 0.0 {
                return Err(Error::Argument(format!(
                    "separable form requires nonnegative ranges; variable `{}` has min {}",
                    v.name, v.min
                )));
            }
        }
        let n = p.num_subsystems();
        let mut shared = Vec::new();
        let mut private: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (k, v) in p.variables.iter().enumerate() {
            let owners: Vec<usize> = (0..n)
                .filter(|&i| p.subsystems[i].variables.contains(&v.name))
                .collect();
            if owners.len() == 1 {
                private[owners[0]].push(k);
            } else if owners.len() == n {
                shared.push(k);
            } else {
                return Err(Error::Argument(format!(
                    "variable `{}` is shared by {} of {} subsystems; the separable \
                     form needs shared variables in every subsystem",
                    v.name,
                    owners.len(),
                    n
                )));
            }
        }
        // constraints must stay within one group
        for (i, sub) in p.subsystems.iter().enumerate() {
            for c in &sub.constraints {
                let on_shared = c.terms.keys().all(|name| {
                    shared.contains(&p.variable_index(name).expect("validated"))
                });
                let on_private = c.terms.keys().all(|name| {
                    private[i].contains(&p.variable_index(name).expect("validated"))
                });
                if !(on_shared || on_private) {
                    return Err(Error::Argument(format!(
                        "constraint `{}` of subsystem `{}` mixes shared and private \
                         variables",
                        c.name, sub.name
                    )));
                }
                if c.relation != Relation::Le && c.relation != Relation::Ge && c.relation != Relation::Eq
                {
                    return Err(Error::Argument(format!(
                        "constraint `{}` uses a strict relation; separable form \
                         expects closed constraints",
                        c.name
                    )));
                }
            }
        }
        Ok(SeparableSystem {
            problem: p,
            shared,
            private,
        })
    }

    pub fn shared_variables(&self) -> &[usize] {
        &self.shared
    }

    pub fn private_variables(&self, i: usize) -> &[usize] {
        &self.private[i]
    }

    /// Minimizes each block's weighted objective part on its own grid and the
    /// shared part on the shared grid, then concatenates. Ties break to the
    /// lexicographically smallest grid point.
    pub fn scalarize(
        &self,
        weights: &[Vec<f64>],
        cap: u64,
        tol: Tolerance,
    ) -> Result<ScalarizedSolution> {
        let p = self.problem;
        let n = p.num_subsystems();
        if weights.len() != n {
            return Err(Error::Argument(format!(
                "expected {} weight vectors, got {}",
                n,
                weights.len()
            )));
        }
        for (i, w) in weights.iter().enumerate() {
            if w.len() != p.subsystems[i].objectives.len() {
                return Err(Error::Argument(format!(
                    "weight vector {i} has length {}, expected {}",
                    w.len(),
                    p.subsystems[i].objectives.len()
                )));
            }
            if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::Argument("weights must be nonnegative".into()));
            }
        }
        if weights.iter().flatten().all(|&x| x == 0.0) {
            return Err(Error::Argument("weights must not be all zero".into()));
        }

        let mut coords = vec![f64::NAN; p.num_variables()];

        // shared subproblem: sum of weighted shared objective parts subject
        // to every shared constraint
        let shared_objective = |x: &[f64]| -> f64 {
            let mut total = 0.0;
            for (i, sub) in p.subsystems.iter().enumerate() {
                for (q, obj) in sub.objectives.iter().enumerate() {
                    let w = weights[i][q];
                    if w == 0.0 {
                        continue;
                    }
                    for (name, &c) in &obj.terms {
                        let k = p.variable_index(name).expect("validated");
                        if let Some(pos) = self.shared.iter().position(|&s| s == k) {
                            total += w * c * x[pos];
                        }
                    }
                }
            }
            total
        };
        let shared_cons: Vec<(usize, &crate::model::Constraint)> = p
            .subsystems
            .iter()
            .flat_map(|s| s.constraints.iter())
            .filter(|c| {
                c.terms.keys().all(|name| {
                    self.shared
                        .contains(&p.variable_index(name).expect("validated"))
                })
            })
            .map(|c| (0usize, c))
            .collect();
        let shared_value = if self.shared.is_empty() {
            0.0
        } else {
            let (best, value) = minimize_on_subgrid(
                p,
                &self.shared,
                &shared_cons.iter().map(|&(_, c)| c).collect::<Vec<_>>(),
                shared_objective,
                cap,
                tol,
            )?
            .ok_or_else(|| Error::EmptySet("shared block has no feasible grid point".into()))?;
            for (&k, &v) in self.shared.iter().zip(&best) {
                coords[k] = v;
            }
            value
        };

        // per-subsystem private subproblems
        let mut block_values = Vec::with_capacity(n);
        for i in 0..n {
            let sub = &p.subsystems[i];
            let constant: f64 = sub
                .objectives
                .iter()
                .enumerate()
                .map(|(q, o)| weights[i][q] * o.constant)
                .sum();
            if self.private[i].is_empty() {
                block_values.push(constant);
                continue;
            }
            let objective = |x: &[f64]| -> f64 {
                let mut total = constant;
                for (q, obj) in sub.objectives.iter().enumerate() {
                    let w = weights[i][q];
                    if w == 0.0 {
                        continue;
                    }
                    for (name, &c) in &obj.terms {
                        let k = p.variable_index(name).expect("validated");
                        if let Some(pos) = self.private[i].iter().position(|&s| s == k) {
                            total += w * c * x[pos];
                        }
                    }
                }
                total
            };
            let cons: Vec<&crate::model::Constraint> = sub
                .constraints
                .iter()
                .filter(|c| {
                    c.terms.keys().all(|name| {
                        self.private[i]
                            .contains(&p.variable_index(name).expect("validated"))
                    })
                })
                .collect();
            let (best, value) =
                minimize_on_subgrid(p, &self.private[i], &cons, objective, cap, tol)?
                    .ok_or_else(|| {
                        Error::EmptySet(format!(
                            "subsystem `{}` has no feasible grid point",
                            sub.name
                        ))
                    })?;
            for (&k, &v) in self.private[i].iter().zip(&best) {
                coords[k] = v;
            }
            block_values.push(value);
        }

        debug_assert!(coords.iter().all(|c| c.is_finite()));
        let total_value = shared_value + block_values.iter().sum::<f64>();
        Ok(ScalarizedSolution {
            point: Point::new(coords),
            shared_value,
            block_values,
            total_value,
        })
    }
}

/// Exhaustive scan of the subgrid spanned by `variables`, keeping the first
/// (lexicographically smallest) strict minimizer among feasible points.
fn minimize_on_subgrid<F: Fn(&[f64]) -> f64>(
    p: &ProblemDefinition,
    variables: &[usize],
    constraints: &[&crate::model::Constraint],
    objective: F,
    cap: u64,
    tol: Tolerance,
) -> Result<Option<(Vec<f64>, f64)>> {
    let axes: Vec<Vec<f64>> = variables
        .iter()
        .map(|&k| {
            let v = &p.variables[k];
            if v.steps == 1 {
                vec![v.min]
            } else {
                let h = (v.max - v.min) / (v.steps - 1) as f64;
                (0..v.steps)
                    .map(|s| if s == v.steps - 1 { v.max } else { v.min + s as f64 * h })
                    .collect()
            }
        })
        .collect();
    let mut total: u128 = 1;
    for a in &axes {
        total = total.saturating_mul(a.len() as u128);
    }
    if total > cap as u128 {
        return Err(Error::GridCapExceeded { points: total, cap });
    }
    // constraints re-indexed onto the subgrid coordinates
    let compiled: Vec<(Vec<(usize, f64)>, f64, Relation, f64)> = constraints
        .iter()
        .map(|c| {
            let terms = c
                .terms
                .iter()
                .map(|(name, &co)| {
                    let k = p.variable_index(name).expect("validated");
                    let pos = variables
                        .iter()
                        .position(|&s| s == k)
                        .expect("constraint stays in group");
                    (pos, co)
                })
                .collect();
            (terms, c.constant, c.relation, c.rhs)
        })
        .collect();

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut x = vec![0usize; axes.len()];
    loop {
        let coords: Vec<f64> = x.iter().zip(&axes).map(|(&s, a)| a[s]).collect();
        let feasible = compiled.iter().all(|(terms, constant, rel, rhs)| {
            let lhs = terms
                .iter()
                .fold(*constant, |acc, &(pos, co)| acc + co * coords[pos]);
            match rel {
                Relation::Le => tol.le(lhs, *rhs),
                Relation::Ge => tol.ge(lhs, *rhs),
                Relation::Eq => tol.eq(lhs, *rhs),
                Relation::Lt => tol.lt(lhs, *rhs),
                Relation::Gt => tol.gt(lhs, *rhs),
            }
        });
        if feasible {
            let value = objective(&coords);
            match &best {
                Some((_, v)) if value >= *v => {}
                _ => best = Some((coords, value)),
            }
        }
        // odometer, last axis fastest: lexicographic ascent
        let mut carry = true;
        for pos in (0..x.len()).rev() {
            if !carry {
                break;
            }
            x[pos] += 1;
            if x[pos] == axes[pos].len() {
                x[pos] = 0;
            } else {
                carry = false;
            }
        }
        if carry {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dominance::aio_efficient_set;
    use crate::fixtures;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn independence_of_fixture_decompositions() {
        let triplet = detect_independence(&fixtures::separable_triplet(3)).unwrap();
        assert!(triplet.independent);
        assert_eq!(triplet.components, vec![vec![0], vec![1], vec![2]]);

        let pair = detect_independence(&fixtures::entangled_pair(3)).unwrap();
        assert!(!pair.independent);
        assert_eq!(pair.components, vec![vec![0, 1]]);

        let linked = detect_independence(&fixtures::linked_pair(5)).unwrap();
        assert!(!linked.independent);
        assert_eq!(linked.components, vec![vec![0, 1]]);
    }

    #[test]
    fn independence_ignores_subsystem_order() {
        let mut p = fixtures::separable_triplet(3);
        p.subsystems.reverse();
        p.validate().unwrap();
        let report = detect_independence(&p).unwrap();
        assert!(report.independent);
        assert_eq!(report.components.len(), 3);
    }

    #[test]
    fn product_law_on_triplet() {
        let p = fixtures::separable_triplet(3);
        let blocks = block_superior_sets(&p, SuperiorKind::Plain, 1 << 16, tol()).unwrap();
        assert_eq!(blocks[0].len(), 1); // x1 = 0
        assert_eq!(blocks[1].len(), 1); // x2 = 0
        assert_eq!(blocks[2].len(), 3); // the conflicting pair keeps everything
        let composed = compose_block_diagonal(&p, &blocks).unwrap();
        let grid = candidate_grid(&p, 1 << 16).unwrap();
        let efficient = aio_efficient_set(&p, &grid, SuperiorKind::Plain, tol()).unwrap();
        assert_eq!(composed, efficient);
    }

    #[test]
    fn weak_product_lands_in_weak_efficient() {
        let p = fixtures::separable_triplet(3);
        let blocks = block_superior_sets(&p, SuperiorKind::Weak, 1 << 16, tol()).unwrap();
        let composed = compose_block_diagonal(&p, &blocks).unwrap();
        let grid = candidate_grid(&p, 1 << 16).unwrap();
        let weak = aio_efficient_set(&p, &grid, SuperiorKind::Weak, tol()).unwrap();
        assert!(composed.is_subset(&weak));
    }

    #[test]
    fn composition_rejects_coupled_systems() {
        let p = fixtures::entangled_pair(3);
        let err = compose_block_diagonal(&p, &[PointSet::empty(), PointSet::empty()]);
        assert!(err.is_err());
    }

    #[test]
    fn single_block_composition_is_identity() {
        let p = fixtures::single_box_biobjective(3);
        let blocks = block_superior_sets(&p, SuperiorKind::Plain, 1 << 16, tol()).unwrap();
        let composed = compose_block_diagonal(&p, &blocks).unwrap();
        assert_eq!(composed, blocks[0]);
    }

    #[test]
    fn singleton_minimizers_compose_to_ideal() {
        // two independent single-objective blocks with unique minimizers
        let p = fixtures::random::independent_instance(11);
        let blocks = block_superior_sets(&p, SuperiorKind::Plain, 1 << 16, tol()).unwrap();
        let composed = compose_block_diagonal(&p, &blocks).unwrap();
        let grid = candidate_grid(&p, 1 << 16).unwrap();
        let efficient = aio_efficient_set(&p, &grid, SuperiorKind::Plain, tol()).unwrap();
        assert_eq!(composed, efficient);
    }

    #[test]
    fn scalarization_matches_direct_minimum() {
        let p = fixtures::random::separable_instance(5);
        let sep = SeparableSystem::from_problem(&p).unwrap();
        let weights = fixtures::random::weight_vectors(5, &p, 3);
        let grid = candidate_grid(&p, 1 << 16).unwrap();
        let all: Vec<usize> = (0..p.num_subsystems()).collect();
        let valid = crate::model::filter_valid(&p, &grid, &all, &[], tol()).unwrap();
        for w in &weights {
            let sol = sep.scalarize(w, 1 << 16, tol()).unwrap();
            // direct weighted-sum minimum over the full valid grid
            let direct = valid
                .iter()
                .map(|x| {
                    let mut total = 0.0;
                    for (i, wi) in w.iter().enumerate() {
                        let f = crate::dominance::objective_value(&p, i, x).unwrap();
                        total += wi.iter().zip(f).map(|(a, b)| a * b).sum::<f64>();
                    }
                    total
                })
                .fold(f64::INFINITY, f64::min);
            assert!(
                (sol.total_value - direct).abs() <= 1e-9,
                "decomposed {} vs direct {}",
                sol.total_value,
                direct
            );
            // the composed point is weakly efficient on the grid
            let weak = aio_efficient_set(&p, &grid, SuperiorKind::Weak, tol()).unwrap();
            assert!(weak.contains(&sol.point));
        }
    }

    #[test]
    fn symmetric_blocks_give_symmetric_solution() {
        let p = fixtures::separable_triplet(3);
        let sep = SeparableSystem::from_problem(&p).unwrap();
        let weights = vec![vec![1.0], vec![1.0], vec![1.0, 1.0]];
        let sol = sep.scalarize(&weights, 1 << 16, tol()).unwrap();
        // first two blocks are identical copies, so their coordinates agree
        assert_eq!(sol.point.coords()[0], sol.point.coords()[1]);
        assert_eq!(sol.block_values[0], sol.block_values[1]);
    }

    #[test]
    fn zero_weight_blocks_take_lexicographic_smallest() {
        let p = fixtures::separable_triplet(3);
        let sep = SeparableSystem::from_problem(&p).unwrap();
        let weights = vec![vec![0.0], vec![1.0], vec![0.0, 0.0]];
        let sol = sep.scalarize(&weights, 1 << 16, tol()).unwrap();
        assert_eq!(sol.point.coords(), &[0.0, 0.0, 0.0]);
        assert!(sep.scalarize(&vec![vec![0.0], vec![0.0], vec![0.0, 0.0]], 1 << 16, tol()).is_err());
    }
}

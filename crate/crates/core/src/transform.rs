//! Rewritings between linking constraints and global variables.
//!
//! Linking constraints can be pushed into the local constraint sets of the
//! subsystems they couple, which turns the referenced variables into global
//! ones. Global variables in turn can be split into per-subsystem copies tied
//! together by easy-linking equalities. Applying both yields the standard
//! form: only local variables, local constraints, and easy-linking.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{LinkingConstraint, ProblemDefinition, Relation, VariableSpec};
use crate::point::Point;

/// Moves every linking constraint into the local constraint set of each
/// subsystem it couples, extending those subsystems' variable lists by the
/// referenced variables. The all-in-one feasible set is unchanged; scoped
/// subsystem validity generally is not.
pub fn inline_linking(p: &ProblemDefinition) -> Result<ProblemDefinition> {
    let mut out = p.clone();
    for (j, link) in p.linking.iter().enumerate() {
        let coupled = p.linking_subsystem_indices(j)?;
        for &i in &coupled {
            let sub = &mut out.subsystems[i];
            let mut con = link.as_constraint();
            while sub.constraints.iter().any(|c| c.name == con.name) {
                con.name.push('\'');
            }
            sub.constraints.push(con);
            // referenced variables become visible, in problem order
            for spec in &p.variables {
                if link.terms.contains_key(&spec.name)
                    && !sub.variables.contains(&spec.name)
                {
                    sub.variables.push(spec.name.clone());
                }
            }
        }
    }
    out.linking.clear();
    out.validate()?;
    Ok(out)
}

/// Outcome of the standard-form rewriting.
#[derive(Debug, Clone, Serialize)]
pub struct StandardFormResult {
    /// The rewritten problem: all variables local, easy-linking equalities as
    /// the only linking constraints.
    pub problem: ProblemDefinition,
    /// Original variable name to its copies as `(subsystem index, copy name)`
    /// pairs; variables that stayed local map to themselves.
    pub copy_map: BTreeMap<String, Vec<(usize, String)>>,
    /// Arc-incidence matrix of the easy-linking equalities: one row per
    /// equality, one column per new variable, entries in `{-1, 0, 1}`.
    pub incidence_matrix: Vec<Vec<f64>>,
    /// Original variable index behind each new column.
    pub column_sources: Vec<usize>,
}

impl StandardFormResult {
    /// Embeds an original-space point by giving every copy its source
    /// coordinate.
    pub fn lift(&self, x: &Point) -> Point {
        Point::new(
            self.column_sources
                .iter()
                .map(|&k| x.coords()[k])
                .collect(),
        )
    }

    /// Projects a standard-form point back by reading each original variable
    /// off its first copy.
    pub fn project(&self, x: &Point, original_dim: usize) -> Point {
        let mut coords = vec![f64::NAN; original_dim];
        for (col, &src) in self.column_sources.iter().enumerate() {
            if coords[src].is_nan() {
                coords[src] = x.coords()[col];
            }
        }
        Point::new(coords)
    }
}

/// Rewrites the problem into standard form: linking constraints are inlined
/// first, then every global variable is replaced by one local copy per
/// subsystem that sees it, equated along a path of easy-linking constraints.
///
/// New variables are ordered by original variable, copies within one variable
/// by subsystem index; copies are named `<var>#<subsystem>`. The dimension
/// grows by exactly the number of variable-subsystem incidences minus the
/// number of variables.
pub fn to_standard_form(p: &ProblemDefinition) -> Result<StandardFormResult> {
    let inlined = inline_linking(p)?;

    // subsystems seeing each variable, ascending
    let seen_by: Vec<Vec<usize>> = inlined
        .variables
        .iter()
        .map(|v| {
            (0..inlined.subsystems.len())
                .filter(|&i| inlined.subsystems[i].variables.contains(&v.name))
                .collect()
        })
        .collect();

    let mut variables: Vec<VariableSpec> = Vec::new();
    let mut column_sources: Vec<usize> = Vec::new();
    let mut copy_map: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
    // per (variable, subsystem): the name that subsystem now uses
    let mut rename: BTreeMap<(usize, usize), String> = BTreeMap::new();

    for (k, spec) in inlined.variables.iter().enumerate() {
        let owners = &seen_by[k];
        let copies: Vec<(usize, String)> = if owners.len() == 1 {
            vec![(owners[0], spec.name.clone())]
        } else {
            owners
                .iter()
                .map(|&i| (i, format!("{}#{}", spec.name, inlined.subsystems[i].name)))
                .collect()
        };
        for (i, name) in &copies {
            variables.push(VariableSpec {
                name: name.clone(),
                min: spec.min,
                max: spec.max,
                steps: spec.steps,
            });
            column_sources.push(k);
            rename.insert((k, *i), name.clone());
        }
        copy_map.insert(spec.name.clone(), copies);
    }

    let column_of = |name: &str| -> usize {
        variables
            .iter()
            .position(|v| v.name == name)
            .expect("copy registered above")
    };

    // rewrite subsystems onto their own copies
    let mut subsystems = inlined.subsystems.clone();
    for (i, sub) in subsystems.iter_mut().enumerate() {
        let map_name = |name: &str| -> String {
            let k = inlined
                .variables
                .iter()
                .position(|v| v.name == name)
                .expect("validated problem");
            rename[&(k, i)].clone()
        };
        sub.variables = sub.variables.iter().map(|n| map_name(n)).collect();
        for o in &mut sub.objectives {
            o.terms = o
                .terms
                .iter()
                .map(|(n, &c)| (map_name(n), c))
                .collect();
        }
        for c in &mut sub.constraints {
            c.terms = c
                .terms
                .iter()
                .map(|(n, &co)| (map_name(n), co))
                .collect();
        }
    }

    // easy-linking path per global variable, plus its incidence rows
    let mut linking = Vec::new();
    let mut incidence = Vec::new();
    for (k, spec) in inlined.variables.iter().enumerate() {
        let copies = &copy_map[&spec.name];
        for w in copies.windows(2) {
            let (ia, a) = (&w[0].0, &w[0].1);
            let (ib, b) = (&w[1].0, &w[1].1);
            let mut row = vec![0.0; variables.len()];
            row[column_of(a)] = 1.0;
            row[column_of(b)] = -1.0;
            incidence.push(row);
            linking.push(LinkingConstraint {
                name: format!(
                    "{}#{}={}",
                    spec.name, inlined.subsystems[*ia].name, inlined.subsystems[*ib].name
                ),
                terms: [(a.clone(), 1.0), (b.clone(), -1.0)].into_iter().collect(),
                constant: 0.0,
                relation: Relation::Eq,
                rhs: 0.0,
                subsystems: None,
            });
        }
        let _ = k;
    }

    let problem = ProblemDefinition {
        variables,
        subsystems,
        linking,
    };
    problem.validate()?;

    let added = problem.num_variables() - p.num_variables();
    let expected: usize = seen_by.iter().map(|s| s.len()).sum::<usize>() - p.num_variables();
    if added != expected {
        return Err(Error::Inconsistent(format!(
            "copy count {added} does not match incidence count {expected}"
        )));
    }

    Ok(StandardFormResult {
        problem,
        copy_map,
        incidence_matrix: incidence,
        column_sources,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{candidate_grid, filter_valid};
    use crate::Tolerance;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn inline_is_identity_without_linking() {
        let p = fixtures::shared_box_pair(1.0, 3);
        let q = inline_linking(&p).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn inline_extends_coupled_subsystems() {
        let p = fixtures::linked_triple();
        let q = inline_linking(&p).unwrap();
        assert!(q.linking.is_empty());
        // both coupled subsystems now carry the constraint and see x1, x4
        assert_eq!(q.subsystems[0].variables, vec!["x1", "x4"]);
        assert_eq!(q.subsystems[2].variables, vec!["x4", "x1"]);
        assert!(q.subsystems[0].constraints.iter().any(|c| c.name == "budget"));
        assert!(q.subsystems[2].constraints.iter().any(|c| c.name == "budget"));
        // the bystander subsystem is untouched
        assert_eq!(q.subsystems[1], p.subsystems[1]);
    }

    #[test]
    fn inline_preserves_system_validity() {
        let p = fixtures::linked_pair(5);
        let q = inline_linking(&p).unwrap();
        let grid = candidate_grid(&p, 1 << 22).unwrap();
        let all = [0, 1];
        let before = filter_valid(&p, &grid, &all, &[0], tol()).unwrap();
        let after = filter_valid(&q, &grid, &all, &[], tol()).unwrap();
        assert_eq!(before, after);
        assert!(!before.is_empty());
    }

    #[test]
    fn standard_form_of_linked_triple() {
        let p = fixtures::linked_triple();
        let sf = to_standard_form(&p).unwrap();
        let names: Vec<&str> = sf
            .problem
            .variables
            .iter()
            .map(|v| v.name.as_str())
            .collect();
        assert_eq!(
            names,
            vec!["x1#s1", "x1#s2", "x1#s3", "x2", "x3", "x4#s1", "x4#s3"]
        );
        assert_eq!(
            sf.incidence_matrix,
            vec![
                vec![1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                vec![0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0],
            ]
        );
        // every row has exactly one +1 and one -1
        for row in &sf.incidence_matrix {
            assert_eq!(row.iter().filter(|&&v| v == 1.0).count(), 1);
            assert_eq!(row.iter().filter(|&&v| v == -1.0).count(), 1);
            assert!(row.iter().all(|&v| v == 0.0 || v == 1.0 || v == -1.0));
        }
    }

    #[test]
    fn standard_form_without_globals_is_trivial() {
        let q = fixtures::separable_triplet(3);
        let sf = to_standard_form(&q).unwrap();
        assert!(sf.incidence_matrix.is_empty());
        assert!(sf.problem.linking.is_empty());
        assert_eq!(sf.problem.num_variables(), q.num_variables());
        assert_eq!(sf.problem, q);
    }

    #[test]
    fn standard_form_dimension_growth() {
        let p = fixtures::linked_pair(5);
        let sf = to_standard_form(&p).unwrap();
        // inlining makes both x1 and x1p global between the two subsystems
        assert_eq!(sf.problem.num_variables(), 6);
        assert_eq!(sf.incidence_matrix.len(), 2);
        let inlined = inline_linking(&p).unwrap();
        let incidences: usize = (0..inlined.num_subsystems())
            .map(|i| inlined.subsystems[i].variables.len())
            .sum();
        assert_eq!(
            sf.problem.num_variables() - p.num_variables(),
            incidences - p.num_variables()
        );
    }

    #[test]
    fn lifted_validity_equivalence() {
        let p = fixtures::linked_pair(5);
        let sf = to_standard_form(&p).unwrap();
        let tol = tol();

        let orig_grid = candidate_grid(&p, 1 << 22).unwrap();
        let orig_all: Vec<usize> = (0..p.num_subsystems()).collect();
        let orig_links: Vec<usize> = (0..p.num_linking()).collect();
        let orig_valid = filter_valid(&p, &orig_grid, &orig_all, &orig_links, tol).unwrap();

        let sf_grid = candidate_grid(&sf.problem, 1 << 22).unwrap();
        let sf_all: Vec<usize> = (0..sf.problem.num_subsystems()).collect();
        let sf_links: Vec<usize> = (0..sf.problem.num_linking()).collect();
        let sf_valid = filter_valid(&sf.problem, &sf_grid, &sf_all, &sf_links, tol).unwrap();

        // lifts of valid points are valid
        for x in orig_valid.iter() {
            assert!(sf_valid.contains(&sf.lift(x)));
        }
        // valid standard-form points have equal copies and valid projections
        for y in sf_valid.iter() {
            for copies in sf.copy_map.values() {
                let cols: Vec<usize> = copies
                    .iter()
                    .map(|(_, name)| {
                        sf.problem.variable_index(name).expect("copy exists")
                    })
                    .collect();
                for w in cols.windows(2) {
                    assert!(tol.eq(y.coords()[w[0]], y.coords()[w[1]]));
                }
            }
            assert!(orig_valid.contains(&sf.project(y, p.num_variables())));
        }
        assert_eq!(orig_valid.len(), sf_valid.len());
    }

    #[test]
    fn full_scope_superiority_projects() {
        use crate::dominance::{superior_set, SuperiorKind};
        use crate::model::Scope;
        use crate::point::PointSet;

        let p = fixtures::linked_pair(5);
        let sf = to_standard_form(&p).unwrap();
        let tol = tol();

        let orig_grid = candidate_grid(&p, 1 << 22).unwrap();
        let sup = superior_set(&p, &Scope::full(&p), &orig_grid, SuperiorKind::Plain, tol).unwrap();

        let sf_grid = candidate_grid(&sf.problem, 1 << 22).unwrap();
        let sf_sup = superior_set(
            &sf.problem,
            &Scope::full(&sf.problem),
            &sf_grid,
            SuperiorKind::Plain,
            tol,
        )
        .unwrap();

        let projected = PointSet::from_points(
            sf_sup
                .iter()
                .map(|y| sf.project(y, p.num_variables()))
                .collect(),
            tol,
        );
        assert_eq!(projected, sup);
    }
}

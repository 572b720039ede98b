//! Problem definition, decomposition graph, grids, and scoped validity.
//!
//! A problem is a list of variables with grid ranges, a list of subsystems
//! (each a multiobjective problem over a subset of the variables), and a list
//! of linking constraints spanning two or more subsystems. Feasibility with
//! respect to a set of subsystems `S` and consistency with respect to a set
//! of linking constraints `C` together form `(S, C)`-validity, the scoped
//! notion of feasibility that conditions every dominance query.

mod graph;
mod grid;
mod parse;
mod validity;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use graph::{build_graph, classify_variables, ComplexSystemGraph, VariableKind};
pub use grid::{candidate_grid, DEFAULT_GRID_CAP};
pub use validity::{filter_valid, is_valid_point, within_ranges};

pub(crate) use validity::CompiledProblem;

/// A decision variable with its discretization: `steps` grid values evenly
/// spaced over the inclusive range `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: u32,
}

/// A linear expression over named variables.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearFunction {
    #[serde(default)]
    pub terms: BTreeMap<String, f64>,
    #[serde(default)]
    pub constant: f64,
}

impl LinearFunction {
    pub fn new(terms: impl IntoIterator<Item = (String, f64)>, constant: f64) -> Self {
        LinearFunction {
            terms: terms.into_iter().collect(),
            constant,
        }
    }
}

/// Constraint relation symbols. Strict forms are permitted so that open
/// feasible sets can be modeled; on a grid they exclude boundary points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
            Relation::Lt => "<",
            Relation::Gt => ">",
        };
        f.write_str(s)
    }
}

/// A named objective to be minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Objective {
    pub name: String,
    #[serde(default)]
    pub terms: BTreeMap<String, f64>,
    #[serde(default)]
    pub constant: f64,
}

impl Objective {
    pub fn function(&self) -> LinearFunction {
        LinearFunction {
            terms: self.terms.clone(),
            constant: self.constant,
        }
    }
}

/// A named linear constraint `terms . x + constant  <relation>  rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    pub name: String,
    #[serde(default)]
    pub terms: BTreeMap<String, f64>,
    #[serde(default)]
    pub constant: f64,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn function(&self) -> LinearFunction {
        LinearFunction {
            terms: self.terms.clone(),
            constant: self.constant,
        }
    }
}

/// A constraint relating variables across two or more subsystems.
///
/// The subsystems a linking constraint couples are modeling data. By default
/// they are derived as every subsystem that sees one of the referenced
/// variables; the optional `subsystems` field pins a smaller coupling when
/// shared variables would otherwise drag in bystander subsystems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkingConstraint {
    pub name: String,
    #[serde(default)]
    pub terms: BTreeMap<String, f64>,
    #[serde(default)]
    pub constant: f64,
    pub relation: Relation,
    pub rhs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsystems: Option<Vec<String>>,
}

impl LinkingConstraint {
    pub fn as_constraint(&self) -> Constraint {
        Constraint {
            name: self.name.clone(),
            terms: self.terms.clone(),
            constant: self.constant,
            relation: self.relation,
            rhs: self.rhs,
        }
    }
}

/// A subsystem: a multiobjective problem over the variables it sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subsystem {
    pub name: String,
    pub variables: Vec<String>,
    pub objectives: Vec<Objective>,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
}

/// The discretized all-in-one problem with its decomposition into subsystems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDefinition {
    pub variables: Vec<VariableSpec>,
    pub subsystems: Vec<Subsystem>,
    #[serde(default)]
    pub linking: Vec<LinkingConstraint>,
}

impl ProblemDefinition {
    /// Parses and validates a problem file.
    pub fn parse(text: &str) -> Result<Self> {
        parse::parse_problem(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serialization cannot fail")
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_subsystems(&self) -> usize {
        self.subsystems.len()
    }

    pub fn num_linking(&self) -> usize {
        self.linking.len()
    }

    /// Total objective dimension: the sum of the subsystems' block sizes.
    pub fn num_objectives(&self) -> usize {
        self.subsystems.iter().map(|s| s.objectives.len()).sum()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn subsystem_index(&self, name: &str) -> Option<usize> {
        self.subsystems.iter().position(|s| s.name == name)
    }

    /// Variable indices seen by subsystem `i`, ascending in problem order.
    pub fn subsystem_variable_indices(&self, i: usize) -> Result<Vec<usize>> {
        let sub = self
            .subsystems
            .get(i)
            .ok_or_else(|| Error::Argument(format!("subsystem index {i} out of range")))?;
        let mut idx: Vec<usize> = sub
            .variables
            .iter()
            .map(|name| {
                self.variable_index(name)
                    .ok_or_else(|| Error::Invalid(format!("unknown variable `{name}`")))
            })
            .collect::<Result<_>>()?;
        idx.sort_unstable();
        Ok(idx)
    }

    /// Variables referenced by linking constraint `j`, ascending.
    pub fn linking_variable_indices(&self, j: usize) -> Result<Vec<usize>> {
        let link = self
            .linking
            .get(j)
            .ok_or_else(|| Error::Argument(format!("linking index {j} out of range")))?;
        let mut idx: Vec<usize> = link
            .terms
            .keys()
            .map(|name| {
                self.variable_index(name)
                    .ok_or_else(|| Error::Invalid(format!("unknown variable `{name}`")))
            })
            .collect::<Result<_>>()?;
        idx.sort_unstable();
        Ok(idx)
    }

    /// Subsystems coupled by linking constraint `j`: the explicit list when
    /// given, otherwise every subsystem seeing one of the referenced
    /// variables.
    pub fn linking_subsystem_indices(&self, j: usize) -> Result<Vec<usize>> {
        let link = self
            .linking
            .get(j)
            .ok_or_else(|| Error::Argument(format!("linking index {j} out of range")))?;
        let mut out: BTreeSet<usize> = BTreeSet::new();
        if let Some(names) = &link.subsystems {
            for name in names {
                let i = self
                    .subsystem_index(name)
                    .ok_or_else(|| Error::Invalid(format!("unknown subsystem `{name}`")))?;
                out.insert(i);
            }
        } else {
            for (i, sub) in self.subsystems.iter().enumerate() {
                if link.terms.keys().any(|v| sub.variables.contains(v)) {
                    out.insert(i);
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Checks every structural invariant; `parse` calls this automatically.
    pub fn validate(&self) -> Result<()> {
        parse::validate(self)
    }

    pub(crate) fn compile(&self) -> Result<CompiledProblem> {
        validity::compile(self)
    }
}

/// The query scope: which objective blocks `F`, subsystem feasibility sets
/// `S`, and linking constraints `C` condition a dominance or superiority
/// question. `F` must be nonempty; `S` and `C` may be empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scope {
    objectives: Vec<usize>,
    subsystems: Vec<usize>,
    linking: Vec<usize>,
}

impl Scope {
    pub fn new(
        p: &ProblemDefinition,
        objectives: &[usize],
        subsystems: &[usize],
        linking: &[usize],
    ) -> Result<Self> {
        if objectives.is_empty() {
            return Err(Error::Argument("objective scope must be nonempty".into()));
        }
        let dedup_check = |label: &str, idx: &[usize], n: usize| -> Result<Vec<usize>> {
            let set: BTreeSet<usize> = idx.iter().copied().collect();
            if let Some(&bad) = set.iter().find(|&&i| i >= n) {
                return Err(Error::Argument(format!(
                    "{label} index {bad} out of range (count {n})"
                )));
            }
            Ok(set.into_iter().collect())
        };
        Ok(Scope {
            objectives: dedup_check("objective", objectives, p.num_subsystems())?,
            subsystems: dedup_check("subsystem", subsystems, p.num_subsystems())?,
            linking: dedup_check("linking", linking, p.num_linking())?,
        })
    }

    /// The full system scope: all objectives, all subsystems, all linking.
    pub fn full(p: &ProblemDefinition) -> Self {
        let all: Vec<usize> = (0..p.num_subsystems()).collect();
        Scope {
            objectives: all.clone(),
            subsystems: all,
            linking: (0..p.num_linking()).collect(),
        }
    }

    pub fn objectives(&self) -> &[usize] {
        &self.objectives
    }

    pub fn subsystems(&self) -> &[usize] {
        &self.subsystems
    }

    pub fn linking(&self) -> &[usize] {
        &self.linking
    }
}

/// Components of `x` at the given variable indices, in problem order.
///
/// This realizes both subsystem subvectors (indices of the variables a
/// subsystem sees) and linking subvectors (indices referenced by a linking
/// constraint).
pub fn extract_subvector(x: &crate::Point, indices: &[usize]) -> Result<Vec<f64>> {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted
        .into_iter()
        .map(|i| {
            x.coords()
                .get(i)
                .copied()
                .ok_or_else(|| Error::Argument(format!("variable index {i} out of range")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point;

    #[test]
    fn subvector_extraction() {
        let x = Point::new(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(extract_subvector(&x, &[0, 2]).unwrap(), vec![1.0, 3.0]);
        assert_eq!(
            extract_subvector(&x, &[0, 1, 2, 3]).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0]
        );
        assert!(extract_subvector(&x, &[4]).is_err());
    }

    #[test]
    fn subvector_of_linking_support() {
        let p = crate::fixtures::linked_pair(9);
        let x = Point::new(vec![1.0, 0.0, 1.0, 2.0]);
        let support = p.linking_variable_indices(0).unwrap();
        assert_eq!(support, vec![0, 2]);
        assert_eq!(extract_subvector(&x, &support).unwrap(), vec![1.0, 1.0]);
    }
}

//! The decomposition graph: variable, subsystem, and linking nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ProblemDefinition;

/// Bipartite directed graph with arcs variable -> subsystem and
/// subsystem -> linking. Node lists keep problem order; arc lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexSystemGraph {
    pub variable_nodes: Vec<String>,
    pub subsystem_nodes: Vec<String>,
    pub linking_nodes: Vec<String>,
    pub var_to_sub_arcs: Vec<(usize, usize)>,
    pub sub_to_link_arcs: Vec<(usize, usize)>,
}

impl ComplexSystemGraph {
    /// Variable predecessors of subsystem node `i`.
    pub fn subsystem_variables(&self, i: usize) -> Vec<usize> {
        self.var_to_sub_arcs
            .iter()
            .filter(|&&(_, s)| s == i)
            .map(|&(v, _)| v)
            .collect()
    }

    /// Subsystem predecessors of linking node `j`.
    pub fn linking_subsystems(&self, j: usize) -> Vec<usize> {
        self.sub_to_link_arcs
            .iter()
            .filter(|&&(_, l)| l == j)
            .map(|&(s, _)| s)
            .collect()
    }

    /// Variables reachable two steps back from linking node `j`: the union of
    /// the variables of its predecessor subsystems.
    pub fn linking_variable_closure(&self, j: usize) -> Vec<usize> {
        let mut vars: Vec<usize> = self
            .linking_subsystems(j)
            .into_iter()
            .flat_map(|s| self.subsystem_variables(s))
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// Subsystems adjacent to variable node `k`.
    pub fn variable_subsystems(&self, k: usize) -> Vec<usize> {
        self.var_to_sub_arcs
            .iter()
            .filter(|&&(v, _)| v == k)
            .map(|&(_, s)| s)
            .collect()
    }
}

/// Builds the decomposition graph of a validated problem. Identical input
/// yields identical node and arc orderings.
pub fn build_graph(p: &ProblemDefinition) -> ComplexSystemGraph {
    let mut var_to_sub = Vec::new();
    for (i, sub) in p.subsystems.iter().enumerate() {
        for name in &sub.variables {
            let k = p.variable_index(name).expect("validated problem");
            var_to_sub.push((k, i));
        }
    }
    var_to_sub.sort_unstable();
    var_to_sub.dedup();

    let mut sub_to_link = Vec::new();
    for j in 0..p.num_linking() {
        for i in p.linking_subsystem_indices(j).expect("validated problem") {
            sub_to_link.push((i, j));
        }
    }
    sub_to_link.sort_unstable();
    sub_to_link.dedup();

    ComplexSystemGraph {
        variable_nodes: p.variables.iter().map(|v| v.name.clone()).collect(),
        subsystem_nodes: p.subsystems.iter().map(|s| s.name.clone()).collect(),
        linking_nodes: p.linking.iter().map(|l| l.name.clone()).collect(),
        var_to_sub_arcs: var_to_sub,
        sub_to_link_arcs: sub_to_link,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    /// Seen by exactly one subsystem.
    Local,
    /// Shared between two or more subsystems.
    Global,
}

/// Partitions variables into local and global ones. A variable adjacent to no
/// subsystem has no role in the decomposition and is an error.
pub fn classify_variables(g: &ComplexSystemGraph) -> Result<Vec<VariableKind>> {
    let mut counts = vec![0usize; g.variable_nodes.len()];
    for &(v, _) in &g.var_to_sub_arcs {
        counts[v] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(k, &c)| match c {
            0 => Err(Error::Invalid(format!(
                "variable `{}` is not seen by any subsystem",
                g.variable_nodes[k]
            ))),
            1 => Ok(VariableKind::Local),
            _ => Ok(VariableKind::Global),
        })
        .collect()
}

//! System dominance, scoped superior sets, and all-in-one efficiency.
//!
//! Dominance between two solutions is judged blockwise: the scope's objective
//! set picks which subsystems' objective blocks take part, and the three
//! flavors differ in how strictness is distributed over the blocks. Superior
//! sets are the nondominated solutions of the scoped valid set under the
//! corresponding flavor.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::model::{filter_valid, CompiledProblem, ProblemDefinition, Scope};
use crate::parallel::map_indexed;
use crate::point::{Point, PointSet};
use crate::tol::Tolerance;

/// Dominance flavor selecting a superior-set notion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuperiorKind {
    Weak,
    Plain,
    Strict,
}

/// Objective values of every candidate, evaluated once.
#[derive(Debug, Clone)]
pub(crate) struct ObjectiveTable {
    pub width: usize,
    pub blocks: Vec<Range<usize>>,
    values: Vec<f64>,
}

impl ObjectiveTable {
    pub fn build(cp: &CompiledProblem, candidates: &PointSet) -> Self {
        let width = cp.width;
        let rows = map_indexed(candidates.len(), |i| {
            let x = candidates.get(i).coords();
            let mut row = Vec::with_capacity(width);
            for funcs in &cp.objectives {
                for f in funcs {
                    row.push(f.eval(x));
                }
            }
            row
        });
        let mut values = Vec::with_capacity(candidates.len() * width);
        for row in rows {
            values.extend(row);
        }
        ObjectiveTable {
            width,
            blocks: cp.blocks.clone(),
            values,
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }
}

/// `scale * a <= b` componentwise over one block.
#[inline]
fn block_weak(a: &[f64], b: &[f64], r: &Range<usize>, scale: f64, tol: Tolerance) -> bool {
    (r.start..r.end).all(|k| tol.le(scale * a[k], b[k]))
}

/// `scale * a <= b` componentwise with at least one strict component.
#[inline]
fn block_strictish(a: &[f64], b: &[f64], r: &Range<usize>, scale: f64, tol: Tolerance) -> bool {
    block_weak(a, b, r, scale, tol) && (r.start..r.end).any(|k| tol.lt(scale * a[k], b[k]))
}

/// Does row `a` system-dominate row `b` at the given flavor over `blocks`?
#[inline]
fn row_dominates(
    a: &[f64],
    b: &[f64],
    blocks: &[Range<usize>],
    kind: SuperiorKind,
    scale: f64,
    tol: Tolerance,
) -> bool {
    match kind {
        // every block weakly better and one block strictly better somewhere
        SuperiorKind::Plain => {
            blocks.iter().all(|r| block_weak(a, b, r, scale, tol))
                && blocks.iter().any(|r| {
                    (r.start..r.end).any(|k| tol.lt(scale * a[k], b[k]))
                })
        }
        // every block better with a strict component
        SuperiorKind::Weak => blocks.iter().all(|r| block_strictish(a, b, r, scale, tol)),
        // every block weakly better; strains out ties except the point itself
        SuperiorKind::Strict => blocks.iter().all(|r| block_weak(a, b, r, scale, tol)),
    }
}

/// Indices of `pool` not dominated (under `kind`, dominator values scaled by
/// `scale`) by any other pool member. The dominated flavor used per kind:
/// weak superiority filters by strict dominance, plain by plain dominance,
/// strict by weak dominance excluding the point itself.
pub(crate) fn nondominated_indices(
    table: &ObjectiveTable,
    pool: &[usize],
    objective_blocks: &[usize],
    kind: SuperiorKind,
    scale: f64,
    tol: Tolerance,
) -> Vec<usize> {
    let blocks: Vec<Range<usize>> = objective_blocks
        .iter()
        .map(|&i| table.blocks[i].clone())
        .collect();
    let dominating = match kind {
        SuperiorKind::Weak => SuperiorKind::Weak,     // strict system dominance
        SuperiorKind::Plain => SuperiorKind::Plain,   // plain system dominance
        SuperiorKind::Strict => SuperiorKind::Strict, // weak system dominance
    };
    let keep = map_indexed(pool.len(), |bi| {
        let b = table.row(pool[bi]);
        !pool.iter().enumerate().any(|(ai, &a_idx)| {
            if kind == SuperiorKind::Strict && ai == bi {
                return false; // a point never strains itself out
            }
            row_dominates(table.row(a_idx), b, &blocks, dominating, scale, tol)
        })
    });
    pool.iter()
        .zip(keep)
        .filter_map(|(&idx, k)| k.then_some(idx))
        .collect()
}

/// Subsystem `i`'s objective block evaluated at `x`.
pub fn objective_value(p: &ProblemDefinition, i: usize, x: &Point) -> Result<Vec<f64>> {
    if i >= p.num_subsystems() {
        return Err(Error::Argument(format!("subsystem index {i} out of range")));
    }
    if x.dim() != p.num_variables() {
        return Err(Error::Argument(format!(
            "point dimension {} does not match variable count {}",
            x.dim(),
            p.num_variables()
        )));
    }
    let cp = p.compile()?;
    Ok(cp.block_values(i, x.coords()))
}

/// The concatenated all-in-one objective vector at `x`, blocks in subsystem
/// order.
pub fn objective_vector(p: &ProblemDefinition, x: &Point) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(p.num_objectives());
    for i in 0..p.num_subsystems() {
        out.extend(objective_value(p, i, x)?);
    }
    Ok(out)
}

/// Does `xbar` system-dominate `x` under the scope's objective blocks?
///
/// Both points are expected to be valid for the scope's subsystem and linking
/// sets; this precondition is checked in debug builds only.
pub fn system_dominates(
    p: &ProblemDefinition,
    scope: &Scope,
    xbar: &Point,
    x: &Point,
    kind: SuperiorKind,
    tol: Tolerance,
) -> Result<bool> {
    debug_assert!(
        crate::model::is_valid_point(p, xbar, scope.subsystems(), scope.linking(), tol)?
            && crate::model::is_valid_point(p, x, scope.subsystems(), scope.linking(), tol)?,
        "system dominance compares valid points"
    );
    let cp = p.compile()?;
    for &i in scope.objectives() {
        if i >= p.num_subsystems() {
            return Err(Error::Argument(format!("subsystem index {i} out of range")));
        }
    }
    let fa: Vec<Vec<f64>> = scope
        .objectives()
        .iter()
        .map(|&i| cp.block_values(i, xbar.coords()))
        .collect();
    let fb: Vec<Vec<f64>> = scope
        .objectives()
        .iter()
        .map(|&i| cp.block_values(i, x.coords()))
        .collect();
    let weak_all = fa
        .iter()
        .zip(&fb)
        .all(|(a, b)| a.iter().zip(b).all(|(&u, &v)| tol.le(u, v)));
    let result = match kind {
        SuperiorKind::Weak => weak_all,
        SuperiorKind::Plain => {
            weak_all
                && fa
                    .iter()
                    .zip(&fb)
                    .any(|(a, b)| a.iter().zip(b).any(|(&u, &v)| tol.lt(u, v)))
        }
        SuperiorKind::Strict => fa
            .iter()
            .zip(&fb)
            .all(|(a, b)| {
                a.iter().zip(b.iter()).all(|(&u, &v)| tol.le(u, v))
                    && a.iter().zip(b.iter()).any(|(&u, &v)| tol.lt(u, v))
            }),
    };
    Ok(result)
}

fn scoped_pool(
    p: &ProblemDefinition,
    scope: &Scope,
    candidates: &PointSet,
    tol: Tolerance,
) -> Result<(PointSet, ObjectiveTable)> {
    let valid = filter_valid(p, candidates, scope.subsystems(), scope.linking(), tol)?;
    let cp = p.compile()?;
    let table = ObjectiveTable::build(&cp, &valid);
    Ok((valid, table))
}

fn collect(valid: &PointSet, survivors: Vec<usize>) -> PointSet {
    PointSet::from_canonical(survivors.into_iter().map(|i| valid.get(i).clone()).collect())
}

/// The scoped superior set: valid candidates not system-dominated by any
/// other valid candidate under the chosen flavor.
pub fn superior_set(
    p: &ProblemDefinition,
    scope: &Scope,
    candidates: &PointSet,
    kind: SuperiorKind,
    tol: Tolerance,
) -> Result<PointSet> {
    let (valid, table) = scoped_pool(p, scope, candidates, tol)?;
    let pool: Vec<usize> = (0..valid.len()).collect();
    let survivors = nondominated_indices(&table, &pool, scope.objectives(), kind, 1.0, tol);
    Ok(collect(&valid, survivors))
}

/// Relaxed superiority: a dominator must still dominate after its objective
/// values are multiplied by `1 + eps`. With `eps = 0` this is exactly the
/// plain superior set.
///
/// Scaling is applied to the dominator's raw values, negative or not; for
/// negative objective values the relaxation loosens instead of tightens, and
/// a warning is logged.
pub fn eps_superior_set(
    p: &ProblemDefinition,
    scope: &Scope,
    candidates: &PointSet,
    eps: f64,
    tol: Tolerance,
) -> Result<PointSet> {
    if !(eps >= 0.0) {
        return Err(Error::Argument(format!("eps must be >= 0, got {eps}")));
    }
    let (valid, table) = scoped_pool(p, scope, candidates, tol)?;
    if eps > 0.0 {
        warn_on_negative(&table, scope.objectives(), &(0..valid.len()).collect::<Vec<_>>(), tol);
    }
    let pool: Vec<usize> = (0..valid.len()).collect();
    let survivors = nondominated_indices(
        &table,
        &pool,
        scope.objectives(),
        SuperiorKind::Plain,
        1.0 + eps,
        tol,
    );
    Ok(collect(&valid, survivors))
}

pub(crate) fn warn_on_negative(
    table: &ObjectiveTable,
    objective_blocks: &[usize],
    pool: &[usize],
    tol: Tolerance,
) {
    let negative = pool.iter().any(|&i| {
        let row = table.row(i);
        objective_blocks
            .iter()
            .any(|&b| row[table.blocks[b].clone()].iter().any(|&v| v < -tol.0))
    });
    if negative {
        log::warn!(
            "objective values in scope are negative; multiplicative relaxation \
             loosens rather than tightens dominance there"
        );
    }
}

/// Classical (weak/plain/strict) efficiency of the concatenated objective
/// over the system valid candidates.
///
/// Weak efficiency requires a dominator to improve *every* component, which
/// differs from weak superiority's per-block strictness; the two coincide
/// only when every subsystem has a single objective.
pub fn aio_efficient_set(
    p: &ProblemDefinition,
    candidates: &PointSet,
    kind: SuperiorKind,
    tol: Tolerance,
) -> Result<PointSet> {
    let scope = Scope::full(p);
    let (valid, table) = scoped_pool(p, &scope, candidates, tol)?;
    let n = valid.len();
    let keep = map_indexed(n, |bi| {
        let b = table.row(bi);
        !(0..n).any(|ai| {
            if ai == bi {
                return false;
            }
            let a = table.row(ai);
            match kind {
                SuperiorKind::Plain => {
                    a.iter().zip(b).all(|(&u, &v)| tol.le(u, v))
                        && a.iter().zip(b).any(|(&u, &v)| tol.lt(u, v))
                }
                SuperiorKind::Weak => a.iter().zip(b).all(|(&u, &v)| tol.lt(u, v)),
                SuperiorKind::Strict => a.iter().zip(b).all(|(&u, &v)| tol.le(u, v)),
            }
        })
    });
    let points = valid
        .iter()
        .zip(keep)
        .filter_map(|(pt, k)| k.then(|| pt.clone()))
        .collect();
    Ok(PointSet::from_canonical(points))
}

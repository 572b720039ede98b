//! Sample systems used throughout the tests, benches, and docs.
//!
//! Each builder returns a validated [`ProblemDefinition`]. Grid resolutions
//! are parameters so unit tests can run coarse and acceptance checks fine.

use std::collections::BTreeMap;

use crate::model::{
    Constraint, LinkingConstraint, Objective, ProblemDefinition, Relation, Subsystem, VariableSpec,
};
use crate::point::Point;

fn var(name: &str, min: f64, max: f64, steps: u32) -> VariableSpec {
    VariableSpec {
        name: name.into(),
        min,
        max,
        steps,
    }
}

fn terms(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(n, c)| (n.to_string(), *c)).collect()
}

fn obj(name: &str, pairs: &[(&str, f64)], constant: f64) -> Objective {
    Objective {
        name: name.into(),
        terms: terms(pairs),
        constant,
    }
}

fn con(name: &str, pairs: &[(&str, f64)], relation: Relation, rhs: f64) -> Constraint {
    Constraint {
        name: name.into(),
        terms: terms(pairs),
        constant: 0.0,
        relation,
        rhs,
    }
}

fn link(
    name: &str,
    pairs: &[(&str, f64)],
    relation: Relation,
    rhs: f64,
    subsystems: Option<&[&str]>,
) -> LinkingConstraint {
    LinkingConstraint {
        name: name.into(),
        terms: terms(pairs),
        constant: 0.0,
        relation,
        rhs,
        subsystems: subsystems.map(|s| s.iter().map(|n| n.to_string()).collect()),
    }
}

fn finish(p: ProblemDefinition) -> ProblemDefinition {
    p.validate().expect("fixture must be valid");
    p
}

/// Four variables, three subsystems, one linking constraint that couples the
/// first and third subsystem through `x1` and `x4`. The coupling is pinned
/// explicitly: `x1` is also seen by the middle subsystem, which stays a
/// bystander to the negotiation.
pub fn linked_triple() -> ProblemDefinition {
    finish(ProblemDefinition {
        variables: vec![
            var("x1", 0.0, 1.0, 3),
            var("x2", 0.0, 1.0, 3),
            var("x3", 0.0, 1.0, 3),
            var("x4", 0.0, 1.0, 3),
        ],
        subsystems: vec![
            Subsystem {
                name: "s1".into(),
                variables: vec!["x1".into()],
                objectives: vec![obj("cost1", &[("x1", 1.0)], 0.0)],
                constraints: vec![],
            },
            Subsystem {
                name: "s2".into(),
                variables: vec!["x1".into(), "x2".into(), "x3".into()],
                objectives: vec![obj("cost2", &[("x1", 1.0), ("x2", 1.0), ("x3", 1.0)], 0.0)],
                constraints: vec![],
            },
            Subsystem {
                name: "s3".into(),
                variables: vec!["x4".into()],
                objectives: vec![obj("gain3", &[("x4", -1.0)], 0.0)],
                constraints: vec![],
            },
        ],
        linking: vec![link(
            "budget",
            &[("x1", 1.0), ("x4", 1.0)],
            Relation::Le,
            1.0,
            Some(&["s1", "s3"]),
        )],
    })
}

/// Two subsystems over a shared box `[0, side]^2`, each minimizing one
/// coordinate. No local constraints, no linking.
pub fn shared_box_pair(side: f64, steps: u32) -> ProblemDefinition {
    finish(ProblemDefinition {
        variables: vec![var("x1", 0.0, side, steps), var("x2", 0.0, side, steps)],
        subsystems: vec![
            Subsystem {
                name: "s1".into(),
                variables: vec!["x1".into(), "x2".into()],
                objectives: vec![obj("first", &[("x1", 1.0)], 0.0)],
                constraints: vec![],
            },
            Subsystem {
                name: "s2".into(),
                variables: vec!["x1".into(), "x2".into()],
                objectives: vec![obj("second", &[("x2", 1.0)], 0.0)],
                constraints: vec![],
            },
        ],
        linking: vec![],
    })
}

/// Two subsystems on `[0, 2]^2`: the first minimizes the coordinate sum over
/// the nonnegative quadrant, the second has a constant objective but shifts
/// feasibility to the halfplane `x1 + x2 >= 2`.
pub fn halfplane_pair(steps: u32) -> ProblemDefinition {
    finish(ProblemDefinition {
        variables: vec![var("x1", 0.0, 2.0, steps), var("x2", 0.0, 2.0, steps)],
        subsystems: vec![
            Subsystem {
                name: "s1".into(),
                variables: vec!["x1".into(), "x2".into()],
                objectives: vec![obj("sum", &[("x1", 1.0), ("x2", 1.0)], 0.0)],
                constraints: vec![
                    con("x1_nonneg", &[("x1", 1.0)], Relation::Ge, 0.0),
                    con("x2_nonneg", &[("x2", 1.0)], Relation::Ge, 0.0),
                ],
            },
            Subsystem {
                name: "s2".into(),
                variables: vec!["x1".into(), "x2".into()],
                objectives: vec![obj("flat", &[], 0.0)],
                constraints: vec![con(
                    "halfplane",
                    &[("x1", 1.0), ("x2", 1.0)],
                    Relation::Ge,
                    2.0,
                )],
            },
        ],
        linking: vec![],
    })
}

/// Two single-objective subsystems on `[0, 2]^2` whose shared feasible set is
/// open: the strict constraint `x1 + x2 > 1/2` cuts the corner off.
pub fn strict_gap_pair(steps: u32) -> ProblemDefinition {
    let gap = con("gap", &[("x1", 1.0), ("x2", 1.0)], Relation::Gt, 0.5);
    finish(ProblemDefinition {
        variables: vec![var("x1", 0.0, 2.0, steps), var("x2", 0.0, 2.0, steps)],
        subsystems: vec![
            Subsystem {
                name: "s1".into(),
                variables: vec!["x1".into(), "x2".into()],
                objectives: vec![obj("first", &[("x1", 1.0)], 0.0)],
                constraints: vec![gap.clone()],
            },
            Subsystem {
                name: "s2".into(),
                variables: vec!["x1".into(), "x2".into()],
                objectives: vec![obj("second", &[("x2", 1.0)], 0.0)],
                constraints: vec![gap],
            },
        ],
        linking: vec![],
    })
}

/// Two biobjective subsystems tied by the equality `x1 = x1p`.
///
/// `steps` is the grid resolution of the `[0, 2]` axes and must be odd so the
/// `[0, 3]` axis meshes with the same spacing; `steps = 9` gives spacing 1/4.
pub fn linked_pair(steps: u32) -> ProblemDefinition {
    assert!(steps >= 3 && steps % 2 == 1, "steps must be odd");
    let wide_steps = 3 * (steps - 1) / 2 + 1;
    finish(ProblemDefinition {
        variables: vec![
            var("x1", 0.0, 2.0, steps),
            var("x2", 0.0, 2.0, steps),
            var("x1p", 0.0, 3.0, wide_steps),
            var("x3", 0.0, 2.0, steps),
        ],
        subsystems: vec![
            Subsystem {
                name: "s1".into(),
                variables: vec!["x1".into(), "x2".into()],
                objectives: vec![
                    obj("f11", &[("x1", -1.0), ("x2", -1.0)], 0.0),
                    obj("f12", &[("x1", 2.0), ("x2", 1.0)], 0.0),
                ],
                constraints: vec![con(
                    "sum_lo",
                    &[("x1", 1.0), ("x2", 1.0)],
                    Relation::Ge,
                    0.5,
                )],
            },
            Subsystem {
                name: "s2".into(),
                variables: vec!["x1p".into(), "x3".into()],
                objectives: vec![
                    obj("f21", &[("x1p", -1.0)], 0.0),
                    obj("f22", &[("x1p", -1.0), ("x3", -1.0)], 0.0),
                ],
                constraints: vec![con(
                    "sum_hi",
                    &[("x1p", 1.0), ("x3", 1.0)],
                    Relation::Le,
                    3.5,
                )],
            },
        ],
        linking: vec![link(
            "tie",
            &[("x1", 1.0), ("x1p", -1.0)],
            Relation::Eq,
            0.0,
            None,
        )],
    })
}

/// One subsystem minimizing both coordinates over `[0, 1]^2`; the standard
/// witness separating weak efficiency from efficiency.
pub fn single_box_biobjective(steps: u32) -> ProblemDefinition {
    finish(ProblemDefinition {
        variables: vec![var("x1", 0.0, 1.0, steps), var("x2", 0.0, 1.0, steps)],
        subsystems: vec![Subsystem {
            name: "s1".into(),
            variables: vec!["x1".into(), "x2".into()],
            objectives: vec![
                obj("first", &[("x1", 1.0)], 0.0),
                obj("second", &[("x2", 1.0)], 0.0),
            ],
            constraints: vec![],
        }],
        linking: vec![],
    })
}

/// Three independent single-variable subsystems; the third carries two
/// conflicting objectives.
pub fn separable_triplet(steps: u32) -> ProblemDefinition {
    finish(ProblemDefinition {
        variables: vec![
            var("x1", 0.0, 1.0, steps),
            var("x2", 0.0, 1.0, steps),
            var("x3", 0.0, 1.0, steps),
        ],
        subsystems: vec![
            Subsystem {
                name: "s1".into(),
                variables: vec!["x1".into()],
                objectives: vec![obj("g1", &[("x1", 1.0)], 0.0)],
                constraints: vec![],
            },
            Subsystem {
                name: "s2".into(),
                variables: vec!["x2".into()],
                objectives: vec![obj("g2", &[("x2", 1.0)], 0.0)],
                constraints: vec![],
            },
            Subsystem {
                name: "s3".into(),
                variables: vec!["x3".into()],
                objectives: vec![
                    obj("g3", &[("x3", 1.0)], 0.0),
                    obj("g4", &[("x3", -1.0)], 1.0),
                ],
                constraints: vec![],
            },
        ],
        linking: vec![],
    })
}

/// The same all-in-one problem as [`separable_triplet`], decomposed into two
/// subsystems that share `x3` as a global variable.
pub fn entangled_pair(steps: u32) -> ProblemDefinition {
    finish(ProblemDefinition {
        variables: vec![
            var("x1", 0.0, 1.0, steps),
            var("x2", 0.0, 1.0, steps),
            var("x3", 0.0, 1.0, steps),
        ],
        subsystems: vec![
            Subsystem {
                name: "s1".into(),
                variables: vec!["x1".into(), "x3".into()],
                objectives: vec![
                    obj("g1", &[("x1", 1.0)], 0.0),
                    obj("g3", &[("x3", 1.0)], 0.0),
                ],
                constraints: vec![],
            },
            Subsystem {
                name: "s2".into(),
                variables: vec!["x2".into(), "x3".into()],
                objectives: vec![
                    obj("g2", &[("x2", 1.0)], 0.0),
                    obj("g4", &[("x3", -1.0)], 1.0),
                ],
                constraints: vec![],
            },
        ],
        linking: vec![],
    })
}

/// Three planar subsystems whose constraint polygons trace the compromise
/// running example: a sum-minimizer, a wedge, and a pull to the right edge.
/// `per_unit` grid values per unit length; 4 gives spacing 1/4.
pub fn compromise_triple(per_unit: u32) -> ProblemDefinition {
    finish(ProblemDefinition {
        variables: vec![
            var("x1", 0.0, 3.0, 3 * per_unit + 1),
            var("x2", 0.0, 2.0, 2 * per_unit + 1),
        ],
        subsystems: vec![
            Subsystem {
                name: "s1".into(),
                variables: vec!["x1".into(), "x2".into()],
                objectives: vec![obj("sum", &[("x1", 1.0), ("x2", 1.0)], 0.0)],
                constraints: vec![
                    con("sum_lo", &[("x1", 1.0), ("x2", 1.0)], Relation::Ge, 0.5),
                    con("x1_cap", &[("x1", 1.0)], Relation::Le, 2.0),
                ],
            },
            Subsystem {
                name: "s2".into(),
                variables: vec!["x1".into(), "x2".into()],
                objectives: vec![obj("tilt", &[("x1", 2.0 / 3.0), ("x2", -1.0)], 0.0)],
                constraints: vec![
                    con(
                        "wedge_lo",
                        &[("x1", 2.0 / 3.0), ("x2", -1.0)],
                        Relation::Le,
                        1.0,
                    ),
                    con(
                        "wedge_hi",
                        &[("x1", 1.5), ("x2", -1.0)],
                        Relation::Le,
                        2.5,
                    ),
                ],
            },
            Subsystem {
                name: "s3".into(),
                variables: vec!["x1".into()],
                objectives: vec![obj("reach", &[("x1", -1.0)], 0.0)],
                constraints: vec![],
            },
        ],
        linking: vec![],
    })
}

/// The six reference points of the compromise running example, duplicates
/// included; ranks in the coordinatewise median depend on them.
pub fn compromise_triple_references() -> Vec<Point> {
    vec![
        Point::new(vec![0.5, 0.0]),
        Point::new(vec![0.5, 0.0]),
        Point::new(vec![1.5, 0.0]),
        Point::new(vec![1.8, 0.2]),
        Point::new(vec![2.0, 0.5]),
        Point::new(vec![2.0, 0.5]),
    ]
}

/// Two triangles overlapping only near their base. Each subsystem pushes to
/// its own apex, so reference points sit far apart and the coordinatewise
/// median lands between the triangles, outside the system valid set.
pub fn apex_triangles(per_unit: u32) -> ProblemDefinition {
    finish(ProblemDefinition {
        variables: vec![
            var("x1", 0.0, 10.0, 10 * per_unit + 1),
            var("x2", 0.0, 4.0, 4 * per_unit + 1),
        ],
        subsystems: vec![
            Subsystem {
                name: "left".into(),
                variables: vec!["x1".into(), "x2".into()],
                objectives: vec![obj("height", &[("x2", -1.0)], 0.0)],
                constraints: vec![
                    con("lhs", &[("x1", 4.0), ("x2", -3.0)], Relation::Ge, 0.0),
                    con("rhs", &[("x1", 4.0), ("x2", 3.0)], Relation::Le, 24.0),
                ],
            },
            Subsystem {
                name: "right".into(),
                variables: vec!["x1".into(), "x2".into()],
                objectives: vec![obj("height", &[("x2", -1.0)], 0.0)],
                constraints: vec![
                    con("lhs", &[("x1", 4.0), ("x2", -3.0)], Relation::Ge, 16.0),
                    con("rhs", &[("x1", 4.0), ("x2", 3.0)], Relation::Le, 40.0),
                ],
            },
        ],
        linking: vec![],
    })
}

/// Two single-variable subsystems whose stage-one optima all violate the
/// linking constraint: the first stage pins `x1 = 0`, and `x2` cannot close
/// the remaining gap to `x1 + x2 >= 1.5`.
pub fn blocked_ladder() -> ProblemDefinition {
    finish(ProblemDefinition {
        variables: vec![var("x1", 0.0, 1.0, 3), var("x2", 0.0, 1.0, 3)],
        subsystems: vec![
            Subsystem {
                name: "s1".into(),
                variables: vec!["x1".into()],
                objectives: vec![obj("a", &[("x1", 1.0)], 0.0)],
                constraints: vec![],
            },
            Subsystem {
                name: "s2".into(),
                variables: vec!["x2".into()],
                objectives: vec![obj("b", &[("x2", 1.0)], 0.0)],
                constraints: vec![],
            },
        ],
        linking: vec![link(
            "gap",
            &[("x1", 1.0), ("x2", 1.0)],
            Relation::Ge,
            1.5,
            None,
        )],
    })
}

/// Like [`blocked_ladder`] but with strictly positive objectives, so the
/// multiplicative relaxation has bite: the staged filter first succeeds at
/// relaxation 1/2.
pub fn relaxation_ladder() -> ProblemDefinition {
    finish(ProblemDefinition {
        variables: vec![var("x1", 1.0, 2.0, 3), var("x2", 1.0, 2.0, 3)],
        subsystems: vec![
            Subsystem {
                name: "s1".into(),
                variables: vec!["x1".into()],
                objectives: vec![obj("a", &[("x1", 1.0)], 0.0)],
                constraints: vec![],
            },
            Subsystem {
                name: "s2".into(),
                variables: vec!["x2".into()],
                objectives: vec![obj("b", &[("x2", 1.0)], 0.0)],
                constraints: vec![],
            },
        ],
        linking: vec![link(
            "gap",
            &[("x1", 1.0), ("x2", 1.0)],
            Relation::Ge,
            3.5,
            None,
        )],
    })
}

/// Seeded generators for randomized property checks. All draws go through a
/// counter-based RNG, so a seed pins the instance exactly.
pub mod random {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    const COEFFS: [f64; 6] = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];
    const NONNEG_COEFFS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

    fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
        xs[rng.gen_range(0..xs.len())]
    }

    struct Draft {
        vars: Vec<VariableSpec>,
        seen: Vec<Vec<usize>>, // subsystem -> variable indices
    }

    fn draft(rng: &mut ChaCha8Rng, nonneg: bool) -> Draft {
        let n_vars = rng.gen_range(2..=3);
        let vars: Vec<VariableSpec> = (0..n_vars)
            .map(|k| {
                let min = if nonneg {
                    [0.0, 0.5][rng.gen_range(0..2)]
                } else {
                    [-1.0, -0.5, 0.0, 0.5][rng.gen_range(0..4)]
                };
                let span = [1.0, 2.0][rng.gen_range(0..2)];
                let steps = rng.gen_range(3..=5);
                var(&format!("x{}", k + 1), min, min + span, steps)
            })
            .collect();

        let n_subs = rng.gen_range(2..=n_vars.min(3));
        // every variable must be seen somewhere; deal them round-robin first
        let mut seen: Vec<Vec<usize>> = vec![Vec::new(); n_subs];
        for k in 0..n_vars {
            seen[k % n_subs].push(k);
        }
        for (_, sub_vars) in seen.iter_mut().enumerate() {
            for k in 0..n_vars {
                if !sub_vars.contains(&k) && rng.gen_bool(0.35) {
                    sub_vars.push(k);
                }
            }
            sub_vars.sort_unstable();
        }
        Draft { vars, seen }
    }

    fn grid_value(rng: &mut ChaCha8Rng, v: &VariableSpec) -> f64 {
        if v.steps == 1 {
            return v.min;
        }
        let k = rng.gen_range(0..v.steps);
        if k == v.steps - 1 {
            v.max
        } else {
            v.min + k as f64 * (v.max - v.min) / (v.steps - 1) as f64
        }
    }

    fn function_over(
        rng: &mut ChaCha8Rng,
        vars: &[VariableSpec],
        indices: &[usize],
        nonneg: bool,
    ) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for &k in indices {
            if out.is_empty() || rng.gen_bool(0.7) {
                let c = if nonneg {
                    pick(rng, &NONNEG_COEFFS)
                } else {
                    pick(rng, &COEFFS)
                };
                out.insert(vars[k].name.clone(), c);
            }
        }
        if out.is_empty() {
            out.insert(vars[indices[0]].name.clone(), 1.0);
        }
        out
    }

    fn build(rng: &mut ChaCha8Rng, nonneg: bool, with_linking: bool) -> ProblemDefinition {
        let Draft { vars, seen } = draft(rng, nonneg);
        // one shared anchor point keeps the system valid set nonempty
        let anchor: Vec<f64> = vars.iter().map(|v| grid_value(rng, v)).collect();
        let eval = |terms: &BTreeMap<String, f64>| -> f64 {
            terms
                .iter()
                .map(|(n, c)| {
                    let k = vars.iter().position(|v| &v.name == n).unwrap();
                    c * anchor[k]
                })
                .sum()
        };

        let subsystems: Vec<Subsystem> = seen
            .iter()
            .enumerate()
            .map(|(i, indices)| {
                let n_obj = rng.gen_range(1..=2);
                let objectives = (0..n_obj)
                    .map(|q| Objective {
                        name: format!("f{}{}", i + 1, q + 1),
                        terms: function_over(rng, &vars, indices, nonneg),
                        constant: if nonneg {
                            [0.0, 0.5][rng.gen_range(0..2)]
                        } else {
                            [-1.0, 0.0, 1.0][rng.gen_range(0..3)]
                        },
                    })
                    .collect();
                let n_con = rng.gen_range(0..=2);
                let constraints = (0..n_con)
                    .map(|q| {
                        let t = function_over(rng, &vars, indices, false);
                        let lhs = eval(&t);
                        let relation = if rng.gen_bool(0.5) {
                            Relation::Le
                        } else {
                            Relation::Ge
                        };
                        Constraint {
                            name: format!("c{}{}", i + 1, q + 1),
                            terms: t,
                            constant: 0.0,
                            relation,
                            rhs: lhs, // anchored, so the anchor stays feasible
                        }
                    })
                    .collect();
                Subsystem {
                    name: format!("s{}", i + 1),
                    variables: indices.iter().map(|&k| vars[k].name.clone()).collect(),
                    objectives,
                    constraints,
                }
            })
            .collect();

        let mut linking = Vec::new();
        if with_linking {
            let n_links = rng.gen_range(0..=2);
            for q in 0..n_links {
                // one variable from each of two distinct subsystems
                let a = rng.gen_range(0..subsystems.len());
                let mut b = rng.gen_range(0..subsystems.len());
                while b == a {
                    b = rng.gen_range(0..subsystems.len());
                }
                let va = seen[a][rng.gen_range(0..seen[a].len())];
                let vb = seen[b][rng.gen_range(0..seen[b].len())];
                if va == vb {
                    continue;
                }
                let mut t = BTreeMap::new();
                t.insert(vars[va].name.clone(), pick(rng, &COEFFS));
                t.insert(vars[vb].name.clone(), pick(rng, &COEFFS));
                let lhs = eval(&t);
                let relation = match rng.gen_range(0..3) {
                    0 => Relation::Le,
                    1 => Relation::Ge,
                    _ => Relation::Eq,
                };
                linking.push(LinkingConstraint {
                    name: format!("k{}", q + 1),
                    terms: t,
                    constant: 0.0,
                    relation,
                    rhs: lhs,
                    subsystems: None,
                });
            }
        }

        let p = ProblemDefinition {
            variables: vars,
            subsystems,
            linking,
        };
        p.validate().expect("generated instance must be valid");
        p
    }

    /// A small random complex system with a nonempty system valid grid.
    pub fn instance(seed: u64) -> ProblemDefinition {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        build(&mut rng, false, true)
    }

    /// Like [`instance`] but all objective values on the grid are >= 0, the
    /// regime where multiplicative relaxation behaves monotonically.
    pub fn nonneg_instance(seed: u64) -> ProblemDefinition {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        build(&mut rng, true, true)
    }

    /// Independent blocks: disjoint variables, no linking.
    pub fn independent_instance(seed: u64) -> ProblemDefinition {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1234_5678_9abc_def0);
        let n_blocks = rng.gen_range(2..=3);
        let vars: Vec<VariableSpec> = (0..n_blocks)
            .map(|k| {
                let min = [-1.0, 0.0, 0.5][rng.gen_range(0..3)];
                let span = [1.0, 2.0][rng.gen_range(0..2)];
                var(&format!("x{}", k + 1), min, min + span, rng.gen_range(3..=5))
            })
            .collect();
        let subsystems = (0..n_blocks)
            .map(|i| {
                let n_obj = rng.gen_range(1..=2);
                let objectives = (0..n_obj)
                    .map(|q| Objective {
                        name: format!("f{}{}", i + 1, q + 1),
                        terms: [(vars[i].name.clone(), pick(&mut rng, &COEFFS))]
                            .into_iter()
                            .collect(),
                        constant: [-1.0, 0.0, 1.0][rng.gen_range(0..3)],
                    })
                    .collect();
                // at most one anchored box-tightening constraint
                let constraints = if rng.gen_bool(0.4) {
                    let anchor = grid_value(&mut rng, &vars[i]);
                    vec![Constraint {
                        name: format!("c{}", i + 1),
                        terms: [(vars[i].name.clone(), 1.0)].into_iter().collect(),
                        constant: 0.0,
                        relation: if rng.gen_bool(0.5) {
                            Relation::Le
                        } else {
                            Relation::Ge
                        },
                        rhs: anchor,
                    }]
                } else {
                    Vec::new()
                };
                Subsystem {
                    name: format!("s{}", i + 1),
                    variables: vec![vars[i].name.clone()],
                    objectives,
                    constraints,
                }
            })
            .collect();
        let p = ProblemDefinition {
            variables: vars,
            subsystems,
            linking: vec![],
        };
        p.validate().expect("generated instance must be valid");
        p
    }

    /// An additively separable system: an optional shared variable seen by
    /// every subsystem plus one private variable per subsystem. Nonnegative
    /// ranges, inequality constraints only.
    pub fn separable_instance(seed: u64) -> ProblemDefinition {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0fed_cba9_8765_4321);
        let shared = rng.gen_bool(0.7);
        let n_blocks = 2;
        let mut vars = Vec::new();
        if shared {
            vars.push(var("x0", 0.0, [1.0, 2.0][rng.gen_range(0..2)], rng.gen_range(3..=5)));
        }
        for k in 0..n_blocks {
            vars.push(var(
                &format!("x{}", k + 1),
                0.0,
                [1.0, 2.0][rng.gen_range(0..2)],
                rng.gen_range(3..=5),
            ));
        }
        let shared_con = if shared && rng.gen_bool(0.5) {
            let anchor = grid_value(&mut rng, &vars[0]);
            Some(Constraint {
                name: "c0".into(),
                terms: [("x0".to_string(), 1.0)].into_iter().collect(),
                constant: 0.0,
                relation: Relation::Le,
                rhs: anchor.max(vars[0].min),
            })
        } else {
            None
        };
        let subsystems = (0..n_blocks)
            .map(|i| {
                let own = format!("x{}", i + 1);
                let n_obj = rng.gen_range(1..=2);
                let objectives = (0..n_obj)
                    .map(|q| {
                        let mut t = BTreeMap::new();
                        t.insert(own.clone(), pick(&mut rng, &COEFFS));
                        if shared && rng.gen_bool(0.8) {
                            t.insert("x0".to_string(), pick(&mut rng, &COEFFS));
                        }
                        Objective {
                            name: format!("f{}{}", i + 1, q + 1),
                            terms: t,
                            constant: [-1.0, 0.0, 1.0][rng.gen_range(0..3)],
                        }
                    })
                    .collect();
                let mut constraints = Vec::new();
                if let Some(c) = &shared_con {
                    constraints.push(c.clone());
                }
                if rng.gen_bool(0.5) {
                    let spec = vars.iter().find(|v| v.name == own).unwrap();
                    let anchor = grid_value(&mut rng, spec);
                    constraints.push(Constraint {
                        name: format!("c{}", i + 1),
                        terms: [(own.clone(), 1.0)].into_iter().collect(),
                        constant: 0.0,
                        relation: Relation::Le,
                        rhs: anchor.max(spec.min),
                    });
                }
                let mut seen = vec![own];
                if shared {
                    seen.insert(0, "x0".to_string());
                }
                Subsystem {
                    name: format!("s{}", i + 1),
                    variables: seen,
                    objectives,
                    constraints,
                }
            })
            .collect();
        let p = ProblemDefinition {
            variables: vars,
            subsystems,
            linking: vec![],
        };
        p.validate().expect("generated instance must be valid");
        p
    }

    /// `count` nonnegative, not-all-zero weight vectors shaped like the
    /// problem's objective blocks.
    pub fn weight_vectors(seed: u64, p: &ProblemDefinition, count: usize) -> Vec<Vec<Vec<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5555_aaaa_5555_aaaa);
        let choices = [0.0, 0.5, 1.0, 2.0];
        (0..count)
            .map(|_| loop {
                let w: Vec<Vec<f64>> = p
                    .subsystems
                    .iter()
                    .map(|s| {
                        (0..s.objectives.len())
                            .map(|_| pick(&mut rng, &choices))
                            .collect()
                    })
                    .collect();
                if w.iter().flatten().any(|&x| x > 0.0) {
                    break w;
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{candidate_grid, filter_valid};
    use crate::Tolerance;

    #[test]
    fn fixtures_validate() {
        // builders call validate already; exercise them all once
        linked_triple();
        shared_box_pair(2.0, 5);
        halfplane_pair(5);
        strict_gap_pair(9);
        linked_pair(5);
        single_box_biobjective(5);
        separable_triplet(3);
        entangled_pair(3);
        compromise_triple(2);
        apex_triangles(2);
        blocked_ladder();
        relaxation_ladder();
    }

    #[test]
    fn random_instances_have_valid_points() {
        let tol = Tolerance::default();
        for seed in 0..25 {
            let p = random::instance(seed);
            let grid = candidate_grid(&p, 1 << 20).unwrap();
            let all: Vec<usize> = (0..p.num_subsystems()).collect();
            let links: Vec<usize> = (0..p.num_linking()).collect();
            let valid = filter_valid(&p, &grid, &all, &links, tol).unwrap();
            assert!(!valid.is_empty(), "seed {seed} lost its anchor point");
        }
    }

    #[test]
    fn nonneg_instances_have_nonneg_objectives() {
        let tol = Tolerance::default();
        for seed in 0..10 {
            let p = random::nonneg_instance(seed);
            let grid = candidate_grid(&p, 1 << 20).unwrap();
            for i in 0..p.num_subsystems() {
                for pt in grid.iter() {
                    for v in crate::dominance::objective_value(&p, i, pt).unwrap() {
                        assert!(v >= -tol.0, "seed {seed}: negative objective {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        assert_eq!(random::instance(7), random::instance(7));
        assert_eq!(random::separable_instance(3), random::separable_instance(3));
    }
}

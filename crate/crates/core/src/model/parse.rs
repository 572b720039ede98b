//! Problem-file parsing and structural validation.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

use super::ProblemDefinition;

pub(super) fn parse_problem(text: &str) -> Result<ProblemDefinition> {
    let problem: ProblemDefinition = serde_json::from_str(text).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            Error::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        } else {
            Error::Invalid(format!(
                "line {}, column {}: {}",
                e.line(),
                e.column(),
                e
            ))
        }
    })?;
    validate(&problem)?;
    Ok(problem)
}

fn finite(label: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{label} must be finite, got {v}")))
    }
}

fn unique<'a>(label: &str, names: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for name in names {
        if name.is_empty() {
            return Err(Error::Invalid(format!("{label} name must be nonempty")));
        }
        if !seen.insert(name) {
            return Err(Error::Invalid(format!("duplicate {label} name `{name}`")));
        }
    }
    Ok(())
}

pub(super) fn validate(p: &ProblemDefinition) -> Result<()> {
    if p.subsystems.is_empty() {
        return Err(Error::Invalid("problem has no subsystems".into()));
    }
    unique("variable", p.variables.iter().map(|v| v.name.as_str()))?;
    unique("subsystem", p.subsystems.iter().map(|s| s.name.as_str()))?;
    unique("linking constraint", p.linking.iter().map(|l| l.name.as_str()))?;

    for v in &p.variables {
        finite(&format!("variable `{}` min", v.name), v.min)?;
        finite(&format!("variable `{}` max", v.name), v.max)?;
        if v.steps == 0 {
            return Err(Error::Invalid(format!(
                "variable `{}` must have steps >= 1",
                v.name
            )));
        }
        if v.min > v.max {
            return Err(Error::Invalid(format!(
                "variable `{}` has min {} > max {}",
                v.name, v.min, v.max
            )));
        }
        if v.steps == 1 && v.min != v.max {
            return Err(Error::Invalid(format!(
                "variable `{}` with steps = 1 requires min = max",
                v.name
            )));
        }
    }

    let var_exists = |name: &String| p.variables.iter().any(|v| &v.name == name);

    for sub in &p.subsystems {
        if sub.variables.is_empty() {
            return Err(Error::Invalid(format!(
                "subsystem `{}` sees no variables",
                sub.name
            )));
        }
        unique(
            &format!("subsystem `{}` variable", sub.name),
            sub.variables.iter().map(|s| s.as_str()),
        )?;
        for name in &sub.variables {
            if !var_exists(name) {
                return Err(Error::Invalid(format!(
                    "subsystem `{}` references unknown variable `{name}`",
                    sub.name
                )));
            }
        }
        if sub.objectives.is_empty() {
            return Err(Error::Invalid(format!(
                "subsystem `{}` must have at least one objective",
                sub.name
            )));
        }
        unique(
            &format!("subsystem `{}` objective", sub.name),
            sub.objectives.iter().map(|o| o.name.as_str()),
        )?;
        unique(
            &format!("subsystem `{}` constraint", sub.name),
            sub.constraints.iter().map(|c| c.name.as_str()),
        )?;
        for obj in &sub.objectives {
            finite(&format!("objective `{}` constant", obj.name), obj.constant)?;
            for (var, coeff) in &obj.terms {
                finite(&format!("objective `{}` coefficient", obj.name), *coeff)?;
                if !sub.variables.contains(var) {
                    return Err(Error::Invalid(format!(
                        "objective `{}` of subsystem `{}` uses variable `{var}` \
                         outside the subsystem's variable list",
                        obj.name, sub.name
                    )));
                }
            }
        }
        for con in &sub.constraints {
            finite(&format!("constraint `{}` constant", con.name), con.constant)?;
            finite(&format!("constraint `{}` rhs", con.name), con.rhs)?;
            for (var, coeff) in &con.terms {
                finite(&format!("constraint `{}` coefficient", con.name), *coeff)?;
                if !sub.variables.contains(var) {
                    return Err(Error::Invalid(format!(
                        "constraint `{}` of subsystem `{}` uses variable `{var}` \
                         outside the subsystem's variable list",
                        con.name, sub.name
                    )));
                }
            }
        }
    }

    // Orphan variables have no role in any decomposition.
    for v in &p.variables {
        if !p.subsystems.iter().any(|s| s.variables.contains(&v.name)) {
            return Err(Error::Invalid(format!(
                "variable `{}` is not seen by any subsystem",
                v.name
            )));
        }
    }

    for (j, link) in p.linking.iter().enumerate() {
        finite(&format!("linking `{}` constant", link.name), link.constant)?;
        finite(&format!("linking `{}` rhs", link.name), link.rhs)?;
        if link.terms.is_empty() {
            return Err(Error::Invalid(format!(
                "linking constraint `{}` references no variables",
                link.name
            )));
        }
        for (var, coeff) in &link.terms {
            finite(&format!("linking `{}` coefficient", link.name), *coeff)?;
            if !var_exists(var) {
                return Err(Error::Invalid(format!(
                    "linking constraint `{}` references unknown variable `{var}`",
                    link.name
                )));
            }
        }
        if let Some(names) = &link.subsystems {
            unique(
                &format!("linking `{}` subsystem", link.name),
                names.iter().map(|s| s.as_str()),
            )?;
            for name in names {
                if p.subsystem_index(name).is_none() {
                    return Err(Error::Invalid(format!(
                        "linking constraint `{}` names unknown subsystem `{name}`",
                        link.name
                    )));
                }
            }
            // Every referenced variable must be seen by a listed subsystem.
            for var in link.terms.keys() {
                let covered = names.iter().any(|n| {
                    let i = p.subsystem_index(n).expect("checked above");
                    p.subsystems[i].variables.contains(var)
                });
                if !covered {
                    return Err(Error::Invalid(format!(
                        "linking constraint `{}` references variable `{var}` not seen \
                         by any of its listed subsystems",
                        link.name
                    )));
                }
            }
        }
        let coupled = p.linking_subsystem_indices(j)?;
        if coupled.len() < 2 {
            return Err(Error::Invalid(format!(
                "linking constraint `{}` must relate at least two subsystems, found {}",
                link.name,
                coupled.len()
            )));
        }
    }

    Ok(())
}

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// A named measurement with a finite, ordered outcome set.
///
/// Outcome order is significant: serialized keys, joint-outcome enumeration,
/// and the "positive outcome is the second one" convention of the binary
/// coupling criterion all follow declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observable {
    pub name: String,
    pub outcomes: Vec<String>,
}

impl Observable {
    pub fn new(name: impl Into<String>, outcomes: &[&str]) -> Self {
        Observable {
            name: name.into(),
            outcomes: outcomes.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// A set of observables measured together, in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub name: String,
    pub observables: Vec<String>,
}

impl Context {
    pub fn new(name: impl Into<String>, observables: &[&str]) -> Self {
        Context {
            name: name.into(),
            observables: observables.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// A measurement scenario: observables, contexts, and the incidence relation
/// given by context membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    observables: Vec<Observable>,
    contexts: Vec<Context>,
}

fn check_label(kind: &str, owner: &str, label: &str) -> Result<()> {
    if label.is_empty() {
        return Err(Error::Scenario(format!("{kind} `{owner}` has an empty label")));
    }
    if label.contains(',') {
        return Err(Error::Scenario(format!(
            "{kind} `{owner}`: label `{label}` contains a comma, which is reserved as the tuple separator"
        )));
    }
    Ok(())
}

impl Scenario {
    pub fn new(observables: Vec<Observable>, contexts: Vec<Context>) -> Result<Self> {
        for (i, o) in observables.iter().enumerate() {
            check_label("observable", &o.name, &o.name)?;
            if observables[..i].iter().any(|p| p.name == o.name) {
                return Err(Error::Scenario(format!("duplicate observable `{}`", o.name)));
            }
            if o.outcomes.is_empty() {
                return Err(Error::Scenario(format!(
                    "observable `{}` has no outcomes",
                    o.name
                )));
            }
            for (j, out) in o.outcomes.iter().enumerate() {
                check_label("observable", &o.name, out)?;
                if o.outcomes[..j].contains(out) {
                    return Err(Error::Scenario(format!(
                        "observable `{}` lists outcome `{}` twice",
                        o.name, out
                    )));
                }
            }
        }
        for (i, c) in contexts.iter().enumerate() {
            check_label("context", &c.name, &c.name)?;
            if contexts[..i].iter().any(|p| p.name == c.name) {
                return Err(Error::Scenario(format!("duplicate context `{}`", c.name)));
            }
            if c.observables.is_empty() {
                return Err(Error::Scenario(format!("context `{}` is empty", c.name)));
            }
            for (j, q) in c.observables.iter().enumerate() {
                if !observables.iter().any(|o| &o.name == q) {
                    return Err(Error::UnknownObservable(q.clone()));
                }
                if c.observables[..j].contains(q) {
                    return Err(Error::Scenario(format!(
                        "context `{}` lists observable `{}` twice",
                        c.name, q
                    )));
                }
            }
        }
        Ok(Scenario {
            observables,
            contexts,
        })
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn observable(&self, name: &str) -> Result<&Observable> {
        self.observables
            .iter()
            .find(|o| o.name == name)
            .ok_or_else(|| Error::UnknownObservable(name.to_string()))
    }

    pub fn context(&self, name: &str) -> Result<&Context> {
        self.contexts
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownContext(name.to_string()))
    }

    pub fn context_index(&self, name: &str) -> Result<usize> {
        self.contexts
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownContext(name.to_string()))
    }

    /// Contexts measuring `name`, in context declaration order.
    pub fn contexts_of(&self, name: &str) -> Vec<&Context> {
        self.contexts
            .iter()
            .filter(|c| c.observables.iter().any(|q| q == name))
            .collect()
    }

    /// Incidence pairs (observable, context) in canonical order: contexts in
    /// declaration order, observables in within-context order.
    pub fn incidences(&self) -> Vec<(&str, &str)> {
        self.contexts
            .iter()
            .flat_map(|c| {
                c.observables
                    .iter()
                    .map(move |q| (q.as_str(), c.name.as_str()))
            })
            .collect()
    }

    /// Observables shared by two contexts, in observable declaration order.
    pub fn shared_observables(&self, a: &str, b: &str) -> Result<Vec<String>> {
        let ca = self.context(a)?;
        let cb = self.context(b)?;
        Ok(self
            .observables
            .iter()
            .map(|o| &o.name)
            .filter(|q| ca.observables.contains(q) && cb.observables.contains(q))
            .cloned()
            .collect())
    }

    /// The observable records for a context, in within-context order.
    pub fn context_observables(&self, name: &str) -> Result<Vec<Observable>> {
        let c = self.context(name)?;
        c.observables
            .iter()
            .map(|q| self.observable(q).cloned())
            .collect()
    }
}

use crate::error::Error;
use crate::model::{Distribution, Observable, Scenario};
use crate::scalar::Scalar;
use crate::Result;

/// One joint distribution per context of a scenario.
///
/// Construction checks structure only (one distribution per context, over
/// that context's observables in context order). Normalization, key validity
/// and nonnegativity are reported by [`Behavior::validate`] so that malformed
/// data can be loaded for inspection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Behavior<T: Scalar = crate::Rational> {
    scenario: Scenario,
    distributions: Vec<Distribution<T>>,
}

/// Two contexts whose marginals on their shared observables disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisturbanceWitness<T: Scalar = crate::Rational> {
    pub context_a: String,
    pub context_b: String,
    pub shared: Vec<String>,
    pub marginal_a: Distribution<T>,
    pub marginal_b: Distribution<T>,
}

/// A single invariant violation, attributed to a context when one is at
/// fault.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorViolation {
    pub context: Option<String>,
    pub message: String,
}

impl std::fmt::Display for BehaviorViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.context {
            Some(c) => write!(f, "context `{}`: {}", c, self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl<T: Scalar> Behavior<T> {
    /// `distributions` aligned with `scenario.contexts()` order.
    pub fn new(scenario: Scenario, distributions: Vec<Distribution<T>>) -> Result<Self> {
        if distributions.len() != scenario.contexts().len() {
            return Err(Error::Behavior(format!(
                "{} distributions for {} contexts",
                distributions.len(),
                scenario.contexts().len()
            )));
        }
        for (c, d) in scenario.contexts().iter().zip(&distributions) {
            let expected = scenario.context_observables(&c.name)?;
            if d.variables() != expected.as_slice() {
                return Err(Error::Behavior(format!(
                    "distribution for context `{}` is over [{}], expected [{}]",
                    c.name,
                    d.variable_names().join(","),
                    c.observables.join(",")
                )));
            }
        }
        Ok(Behavior {
            scenario,
            distributions,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn distributions(&self) -> &[Distribution<T>] {
        &self.distributions
    }

    pub fn distribution(&self, context: &str) -> Result<&Distribution<T>> {
        let i = self.scenario.context_index(context)?;
        Ok(&self.distributions[i])
    }

    /// Every invariant violation across all contexts.
    pub fn validate(&self) -> Vec<BehaviorViolation> {
        let mut out = Vec::new();
        for (c, d) in self.scenario.contexts().iter().zip(&self.distributions) {
            for message in d.validate() {
                out.push(BehaviorViolation {
                    context: Some(c.name.clone()),
                    message,
                });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.distributions.iter().all(|d| d.is_valid())
    }

    /// `None` when every pair of contexts agrees on its shared observables.
    /// Marginals are compared on the shared set in observable declaration
    /// order, so the comparison does not depend on context order. Expects a
    /// valid behavior.
    pub fn check_nondisturbance(&self) -> Option<DisturbanceWitness<T>> {
        let contexts = self.scenario.contexts();
        for i in 0..contexts.len() {
            for j in i + 1..contexts.len() {
                let shared = self
                    .scenario
                    .shared_observables(&contexts[i].name, &contexts[j].name)
                    .expect("contexts come from this scenario");
                if shared.is_empty() {
                    continue;
                }
                let ma = self.distributions[i]
                    .marginalize(&shared)
                    .expect("shared observables are measured in context");
                let mb = self.distributions[j]
                    .marginalize(&shared)
                    .expect("shared observables are measured in context");
                if ma != mb {
                    return Some(DisturbanceWitness {
                        context_a: contexts[i].name.clone(),
                        context_b: contexts[j].name.clone(),
                        shared,
                        marginal_a: ma,
                        marginal_b: mb,
                    });
                }
            }
        }
        None
    }

    pub fn is_nondisturbing(&self) -> bool {
        self.check_nondisturbance().is_none()
    }

    /// The observable records of a context, convenience for builders.
    pub fn context_variables(&self, context: &str) -> Result<Vec<Observable>> {
        self.scenario.context_observables(context)
    }
}

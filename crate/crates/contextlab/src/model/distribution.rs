use std::collections::BTreeMap;

use crate::error::Error;
use crate::model::Observable;
use crate::scalar::Scalar;
use crate::Result;

/// A finitely supported weight assignment over the outcome tuples of an
/// ordered variable list. Sparse: absent tuples weigh zero; exact zeros are
/// never stored, so structural equality is semantic equality.
///
/// A probability distribution is the validated special case (nonnegative,
/// total one); raw weights are representable so that validation can report
/// what is wrong with a file instead of refusing to look at it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution<T: Scalar = crate::Rational> {
    variables: Vec<Observable>,
    weights: BTreeMap<Vec<String>, T>,
}

impl<T: Scalar> Distribution<T> {
    /// Builds without invariant checks, dropping exact zeros.
    pub fn from_weights(variables: Vec<Observable>, weights: BTreeMap<Vec<String>, T>) -> Self {
        let weights = weights.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        Distribution { variables, weights }
    }

    /// Builds and validates; the first violation becomes the error.
    pub fn new(variables: Vec<Observable>, weights: BTreeMap<Vec<String>, T>) -> Result<Self> {
        let d = Self::from_weights(variables, weights);
        match d.validate().into_iter().next() {
            None => Ok(d),
            Some(msg) => Err(Error::Distribution(msg)),
        }
    }

    pub fn point_mass(variables: Vec<Observable>, tuple: Vec<String>) -> Result<Self> {
        let mut weights = BTreeMap::new();
        weights.insert(tuple, T::one());
        Self::new(variables, weights)
    }

    pub fn variables(&self) -> &[Observable] {
        &self.variables
    }

    pub fn variable_names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    /// Weight of a tuple; zero when absent.
    pub fn weight(&self, tuple: &[String]) -> T {
        self.weights.get(tuple).cloned().unwrap_or_else(T::zero)
    }

    /// Nonzero entries in canonical key order.
    pub fn support(&self) -> impl Iterator<Item = (&Vec<String>, &T)> {
        self.weights.iter()
    }

    pub fn total(&self) -> T {
        self.weights
            .values()
            .fold(T::zero(), |acc, w| acc + w.clone())
    }

    /// All invariant violations, as human-readable messages.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, v) in self.variables.iter().enumerate() {
            if self.variables[..i].iter().any(|p| p.name == v.name) {
                out.push(format!("variable `{}` appears twice", v.name));
            }
        }
        for (tuple, w) in &self.weights {
            if tuple.len() != self.variables.len() {
                out.push(format!(
                    "key [{}] has {} entries, expected {}",
                    tuple.join(","),
                    tuple.len(),
                    self.variables.len()
                ));
                continue;
            }
            for (v, label) in self.variables.iter().zip(tuple) {
                if !v.outcomes.contains(label) {
                    out.push(format!(
                        "key [{}]: `{}` is not an outcome of observable `{}`",
                        tuple.join(","),
                        label,
                        v.name
                    ));
                }
            }
            if w.is_negative() {
                out.push(format!("key [{}] has negative weight {}", tuple.join(","), w));
            }
        }
        let total = self.total();
        if !total.is_one() {
            out.push(format!("weights sum to {}, expected 1", total));
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Pushes the distribution forward onto a subset of its variables, in the
    /// order given by `subset`.
    pub fn marginalize(&self, subset: &[String]) -> Result<Distribution<T>> {
        let mut positions = Vec::with_capacity(subset.len());
        for name in subset {
            let pos = self
                .variables
                .iter()
                .position(|v| &v.name == name)
                .ok_or_else(|| Error::UnknownObservable(name.clone()))?;
            if positions.contains(&pos) {
                return Err(Error::Distribution(format!(
                    "marginal subset lists `{name}` twice"
                )));
            }
            positions.push(pos);
        }
        let variables: Vec<Observable> =
            positions.iter().map(|&p| self.variables[p].clone()).collect();
        let mut weights: BTreeMap<Vec<String>, T> = BTreeMap::new();
        for (tuple, w) in &self.weights {
            if tuple.len() != self.variables.len() {
                return Err(Error::Distribution(format!(
                    "cannot marginalize: key [{}] has wrong arity",
                    tuple.join(",")
                )));
            }
            let projected: Vec<String> = positions.iter().map(|&p| tuple[p].clone()).collect();
            let slot = weights.entry(projected).or_insert_with(T::zero);
            *slot = slot.clone() + w.clone();
        }
        weights.retain(|_, w| !w.is_zero());
        Ok(Distribution { variables, weights })
    }

    /// Same weights over renamed variables (outcome sets unchanged).
    pub fn rename_variables(&self, names: &[String]) -> Result<Distribution<T>> {
        if names.len() != self.variables.len() {
            return Err(Error::Dimension(format!(
                "{} names for {} variables",
                names.len(),
                self.variables.len()
            )));
        }
        let variables = self
            .variables
            .iter()
            .zip(names)
            .map(|(v, n)| Observable {
                name: n.clone(),
                outcomes: v.outcomes.clone(),
            })
            .collect();
        Ok(Distribution {
            variables,
            weights: self.weights.clone(),
        })
    }
}

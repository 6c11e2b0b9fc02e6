//! On-disk JSON representation of behaviors, verdicts, and witnesses.
//!
//! Numbers are strings like `"3/4"` or `"2"` so that files stay exact; joint
//! outcomes are comma-joined label tuples in context order. Structural
//! problems (unknown labels, wrong arities, malformed numbers) are always
//! errors; probabilistic validity (nonnegative, summing to one) is checked
//! only when the caller asks, so that invalid behaviors can still be loaded
//! for diagnosis.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::model::{Behavior, Context, Distribution, DisturbanceWitness, Observable, Scenario};
use crate::scalar::Scalar;
use crate::transforms::ConsistifiedTag;
use crate::Result;

/// Parses an exact scalar from `"a/b"` or `"a"` decimal forms.
pub fn parse_scalar<T: Scalar>(s: &str) -> Result<T> {
    let t = s.trim();
    let bad = || Error::Parse(format!("invalid number `{s}`"));
    // Rational scalars only accept the `a/b` form in from_str_radix, integer
    // scalars only the plain form, so each atom tries both spellings.
    let atom = |a: &str| {
        T::from_str_radix(a, 10)
            .or_else(|_| T::from_str_radix(&format!("{a}/1"), 10))
            .map_err(|_| bad())
    };
    match t.split_once('/') {
        None => atom(t),
        Some((n, d)) => {
            let (n, d) = (n.trim(), d.trim());
            if d.contains('/') {
                return Err(bad());
            }
            let n = atom(n)?;
            let d = atom(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(n / d)
        }
    }
}

fn join_key(tuple: &[String]) -> String {
    tuple.join(",")
}

fn split_key(key: &str) -> Vec<String> {
    if key.is_empty() {
        Vec::new()
    } else {
        key.split(',').map(str::to_string).collect()
    }
}

/// One context of a behavior document: its member observables in
/// measurement order and a sparse map of joint outcomes to weights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextDoc {
    pub name: String,
    pub observables: Vec<String>,
    pub distribution: BTreeMap<String, String>,
}

/// A behavior as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorDoc {
    pub observables: Vec<Observable>,
    pub contexts: Vec<ContextDoc>,
    /// Present iff the file records the output of the incidence
    /// construction; carried through so it can be undone later.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ConsistifiedTag>,
}

pub fn behavior_to_doc<T: Scalar>(b: &Behavior<T>) -> BehaviorDoc {
    let contexts = b
        .scenario()
        .contexts()
        .iter()
        .zip(b.distributions())
        .map(|(c, d)| ContextDoc {
            name: c.name.clone(),
            observables: c.observables.clone(),
            distribution: d
                .support()
                .map(|(tuple, w)| (join_key(tuple), w.to_string()))
                .collect(),
        })
        .collect();
    BehaviorDoc {
        observables: b.scenario().observables().to_vec(),
        contexts,
        provenance: None,
    }
}

/// Rebuilds a behavior from its document. With `validate` set, weights must
/// be nonnegative and sum to one per context; without it only structure is
/// enforced.
pub fn doc_to_behavior<T: Scalar>(doc: &BehaviorDoc, validate: bool) -> Result<Behavior<T>> {
    let contexts: Vec<Context> = doc
        .contexts
        .iter()
        .map(|c| Context {
            name: c.name.clone(),
            observables: c.observables.clone(),
        })
        .collect();
    let scenario = Scenario::new(doc.observables.clone(), contexts)?;
    let mut distributions = Vec::with_capacity(doc.contexts.len());
    for c in &doc.contexts {
        let vars = scenario.context_observables(&c.name)?;
        let mut weights: BTreeMap<Vec<String>, T> = BTreeMap::new();
        for (key, value) in &c.distribution {
            let tuple = split_key(key);
            if tuple.len() != vars.len() {
                return Err(Error::Parse(format!(
                    "context `{}`: key `{key}` has {} labels, expected {}",
                    c.name,
                    tuple.len(),
                    vars.len()
                )));
            }
            for (label, var) in tuple.iter().zip(&vars) {
                if !var.outcomes.contains(label) {
                    return Err(Error::Parse(format!(
                        "context `{}`: `{label}` is not an outcome of `{}`",
                        c.name, var.name
                    )));
                }
            }
            let w = parse_scalar::<T>(value)?;
            if weights.insert(tuple, w).is_some() {
                return Err(Error::Parse(format!(
                    "context `{}`: key `{key}` appears twice",
                    c.name
                )));
            }
        }
        let d = Distribution::from_weights(vars, weights);
        if validate {
            let problems = d.validate();
            if !problems.is_empty() {
                return Err(Error::Behavior(format!(
                    "context `{}`: {}",
                    c.name,
                    problems.join("; ")
                )));
            }
        }
        distributions.push(d);
    }
    Behavior::new(scenario, distributions)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// A behavior read from disk, with the hash of the exact bytes read.
pub struct LoadedBehavior<T: Scalar = crate::Rational> {
    pub behavior: Behavior<T>,
    pub provenance: Option<ConsistifiedTag>,
    pub sha256: String,
}

pub fn read_behavior_doc(path: &Path) -> Result<(BehaviorDoc, String)> {
    let bytes = fs::read(path)?;
    let doc: BehaviorDoc =
        serde_json::from_slice(&bytes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok((doc, sha256_hex(&bytes)))
}

pub fn load_behavior<T: Scalar>(path: &Path, validate: bool) -> Result<LoadedBehavior<T>> {
    let (doc, sha256) = read_behavior_doc(path)?;
    let behavior = doc_to_behavior(&doc, validate)?;
    Ok(LoadedBehavior {
        behavior,
        provenance: doc.provenance,
        sha256,
    })
}

pub fn write_behavior_doc(path: &Path, doc: &BehaviorDoc) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// A distribution rendered for JSON output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionDoc {
    pub variables: Vec<String>,
    pub weights: BTreeMap<String, String>,
}

pub fn distribution_to_doc<T: Scalar>(d: &Distribution<T>) -> DistributionDoc {
    DistributionDoc {
        variables: d.variable_names().iter().map(|s| s.to_string()).collect(),
        weights: d
            .support()
            .map(|(tuple, w)| (join_key(tuple), w.to_string()))
            .collect(),
    }
}

/// A decision rendered for JSON output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub theory: String,
    pub verdict: crate::deciders::Contextuality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<DistributionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<String>>,
}

pub fn verdict_to_doc<T: Scalar>(v: &crate::deciders::Verdict<T>) -> VerdictDoc {
    VerdictDoc {
        theory: v.theory.clone(),
        verdict: v.value,
        witness: v.witness.as_ref().map(distribution_to_doc),
        certificate: v
            .certificate
            .as_ref()
            .map(|ys| ys.iter().map(|y| y.to_string()).collect()),
    }
}

/// A disagreement of marginals rendered for JSON output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisturbanceDoc {
    pub context_a: String,
    pub context_b: String,
    pub shared: Vec<String>,
    pub marginal_a: DistributionDoc,
    pub marginal_b: DistributionDoc,
}

pub fn disturbance_to_doc<T: Scalar>(w: &DisturbanceWitness<T>) -> DisturbanceDoc {
    DisturbanceDoc {
        context_a: w.context_a.clone(),
        context_b: w.context_b.clone(),
        shared: w.shared.clone(),
        marginal_a: distribution_to_doc(&w.marginal_a),
        marginal_b: distribution_to_doc(&w.marginal_b),
    }
}

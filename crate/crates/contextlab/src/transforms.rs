//! Behavior transforms.
//!
//! Three of these (restriction to a sub-scenario, outcome coarse-graining,
//! adding a post-processed observable) are the operations a reasonable
//! notion of contextuality should be monotone under: they discard or merely
//! rearrange information, so they should not manufacture contextuality from
//! a noncontextual behavior. The fourth, consistification, rebuilds a
//! behavior over its incidence pairs so that the result is always
//! nondisturbing; it is injective, and its inverse reads the row contexts
//! back off under the provenance tag.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::deciders::{incidence_name, CouplingCriterion};
use crate::error::Error;
use crate::model::{Behavior, Context, Distribution, Observable, Scenario};
use crate::scalar::Scalar;
use crate::Result;

/// Restriction to a sub-scenario. `None` keeps everything of that kind; the
/// kept incidence relation is intersected with the kept observables and
/// contexts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NestSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contexts: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incidences: Option<BTreeSet<(String, String)>>,
}

/// Per-observable total outcome relabelings; unmentioned observables keep
/// their outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseGrainSpec {
    pub maps: BTreeMap<String, BTreeMap<String, String>>,
}

/// A new observable computed pointwise from jointly measured sources and
/// adjoined to every context measuring all of them. Table keys are
/// comma-joined source outcomes in `sources` order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostProcessSpec {
    pub sources: Vec<String>,
    pub name: String,
    pub outcomes: Vec<String>,
    pub table: BTreeMap<String, String>,
}

/// Any supported transform, as serialized in spec files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "transform", rename_all = "kebab-case")]
pub enum TransformSpec {
    Nest(NestSpec),
    CoarseGrain(CoarseGrainSpec),
    PostProcess(PostProcessSpec),
    Consistify { criterion: String },
    Deconsistify,
}

impl TransformSpec {
    /// Applies one of the three monotonicity transforms; the incidence
    /// construction and its inverse are not in that family and error here.
    pub fn apply_principle<T: Scalar>(&self, b: &Behavior<T>) -> Result<Behavior<T>> {
        match self {
            TransformSpec::Nest(s) => nest(b, s),
            TransformSpec::CoarseGrain(s) => coarse_grain(b, s),
            TransformSpec::PostProcess(s) => post_process(b, s),
            TransformSpec::Consistify { .. } | TransformSpec::Deconsistify => Err(
                Error::TransformSpec("not a monotonicity-family transform".into()),
            ),
        }
    }
}

/// Restricts a behavior to kept observables, contexts, and incidences.
/// Contexts that would end up empty are an error; observables kept but no
/// longer measured anywhere stay in the scenario.
pub fn nest<T: Scalar>(b: &Behavior<T>, spec: &NestSpec) -> Result<Behavior<T>> {
    let scenario = b.scenario();
    if let Some(keep) = &spec.observables {
        for q in keep {
            scenario.observable(q)?;
        }
    }
    if let Some(keep) = &spec.contexts {
        for c in keep {
            scenario.context(c)?;
        }
    }
    if let Some(keep) = &spec.incidences {
        for (q, c) in keep {
            let ctx = scenario.context(c)?;
            scenario.observable(q)?;
            if !ctx.observables.contains(q) {
                return Err(Error::TransformSpec(format!(
                    "`{q}` is not measured in context `{c}`"
                )));
            }
        }
    }
    let keep_obs = |q: &str| {
        spec.observables
            .as_ref()
            .map_or(true, |s| s.contains(q))
    };
    let keep_ctx = |c: &str| spec.contexts.as_ref().map_or(true, |s| s.contains(c));
    let keep_inc = |q: &str, c: &str| {
        keep_obs(q)
            && keep_ctx(c)
            && spec
                .incidences
                .as_ref()
                .map_or(true, |s| s.contains(&(q.to_string(), c.to_string())))
    };

    let observables: Vec<Observable> = scenario
        .observables()
        .iter()
        .filter(|o| keep_obs(&o.name))
        .cloned()
        .collect();
    let mut contexts = Vec::new();
    let mut distributions = Vec::new();
    for (c, d) in scenario.contexts().iter().zip(b.distributions()) {
        if !keep_ctx(&c.name) {
            continue;
        }
        let members: Vec<String> = c
            .observables
            .iter()
            .filter(|q| keep_inc(q, &c.name))
            .cloned()
            .collect();
        if members.is_empty() {
            return Err(Error::TransformSpec(format!(
                "context `{}` would be empty after restriction",
                c.name
            )));
        }
        distributions.push(d.marginalize(&members)?);
        contexts.push(Context {
            name: c.name.clone(),
            observables: members,
        });
    }
    Behavior::new(Scenario::new(observables, contexts)?, distributions)
}

/// Pushes every context distribution forward through per-observable outcome
/// maps. New outcome lists are ordered by first occurrence of each image
/// along the original outcome order.
pub fn coarse_grain<T: Scalar>(b: &Behavior<T>, spec: &CoarseGrainSpec) -> Result<Behavior<T>> {
    let scenario = b.scenario();
    for (q, map) in &spec.maps {
        let o = scenario.observable(q)?;
        for outcome in &o.outcomes {
            if !map.contains_key(outcome) {
                return Err(Error::TransformSpec(format!(
                    "map for `{q}` misses outcome `{outcome}`"
                )));
            }
        }
        for k in map.keys() {
            if !o.outcomes.contains(k) {
                return Err(Error::TransformSpec(format!(
                    "map for `{q}` mentions `{k}`, which is not one of its outcomes"
                )));
            }
        }
    }
    let image = |q: &str, outcome: &str| -> String {
        spec.maps
            .get(q)
            .and_then(|m| m.get(outcome))
            .cloned()
            .unwrap_or_else(|| outcome.to_string())
    };
    let observables: Vec<Observable> = scenario
        .observables()
        .iter()
        .map(|o| {
            let mut outcomes = Vec::new();
            for out in &o.outcomes {
                let img = image(&o.name, out);
                if !outcomes.contains(&img) {
                    outcomes.push(img);
                }
            }
            Observable {
                name: o.name.clone(),
                outcomes,
            }
        })
        .collect();
    let mut distributions = Vec::new();
    for (c, d) in scenario.contexts().iter().zip(b.distributions()) {
        let vars: Vec<Observable> = c
            .observables
            .iter()
            .map(|q| {
                observables
                    .iter()
                    .find(|o| &o.name == q)
                    .cloned()
                    .expect("context observable exists")
            })
            .collect();
        let mut weights: BTreeMap<Vec<String>, T> = BTreeMap::new();
        for (tuple, w) in d.support() {
            let mapped: Vec<String> = c
                .observables
                .iter()
                .zip(tuple)
                .map(|(q, out)| image(q, out))
                .collect();
            let slot = weights.entry(mapped).or_insert_with(T::zero);
            *slot = slot.clone() + w.clone();
        }
        distributions.push(Distribution::from_weights(vars, weights));
    }
    Behavior::new(
        Scenario::new(observables, scenario.contexts().to_vec())?,
        distributions,
    )
}

/// Adjoins `spec.name`, computed from `spec.sources` via `spec.table`, to
/// every context jointly measuring all sources. At least one such context
/// must exist.
pub fn post_process<T: Scalar>(b: &Behavior<T>, spec: &PostProcessSpec) -> Result<Behavior<T>> {
    let scenario = b.scenario();
    if spec.sources.is_empty() {
        return Err(Error::TransformSpec("no source observables".into()));
    }
    for (i, q) in spec.sources.iter().enumerate() {
        scenario.observable(q)?;
        if spec.sources[..i].contains(q) {
            return Err(Error::TransformSpec(format!("source `{q}` repeated")));
        }
    }
    if scenario.observables().iter().any(|o| o.name == spec.name) {
        return Err(Error::TransformSpec(format!(
            "observable `{}` already exists",
            spec.name
        )));
    }

    let source_vars: Vec<Observable> = spec
        .sources
        .iter()
        .map(|q| scenario.observable(q).cloned())
        .collect::<Result<_>>()?;
    let mut table: BTreeMap<Vec<String>, String> = BTreeMap::new();
    for (k, v) in &spec.table {
        let tuple: Vec<String> = if k.is_empty() {
            Vec::new()
        } else {
            k.split(',').map(str::to_string).collect()
        };
        if !spec.outcomes.contains(v) {
            return Err(Error::TransformSpec(format!(
                "table value `{v}` is not an outcome of `{}`",
                spec.name
            )));
        }
        table.insert(tuple, v.clone());
    }
    for tuple in crate::model::enumerate_joint_outcomes(&source_vars) {
        if !table.contains_key(&tuple) {
            return Err(Error::TransformSpec(format!(
                "table misses source tuple [{}]",
                tuple.join(",")
            )));
        }
    }
    if table.len() != source_vars.iter().map(|v| v.outcomes.len()).product::<usize>() {
        return Err(Error::TransformSpec(
            "table has entries outside the source outcome space".into(),
        ));
    }

    let extended: Vec<bool> = scenario
        .contexts()
        .iter()
        .map(|c| spec.sources.iter().all(|q| c.observables.contains(q)))
        .collect();
    if !extended.iter().any(|&e| e) {
        return Err(Error::TransformSpec(
            "the sources are never jointly measured".into(),
        ));
    }

    let new_obs = Observable {
        name: spec.name.clone(),
        outcomes: spec.outcomes.clone(),
    };
    let mut observables = scenario.observables().to_vec();
    observables.push(new_obs.clone());
    let mut contexts = Vec::new();
    let mut distributions = Vec::new();
    for ((c, d), ext) in scenario
        .contexts()
        .iter()
        .zip(b.distributions())
        .zip(&extended)
    {
        if !ext {
            contexts.push(c.clone());
            distributions.push(d.clone());
            continue;
        }
        let mut members = c.observables.clone();
        members.push(spec.name.clone());
        let positions: Vec<usize> = spec
            .sources
            .iter()
            .map(|q| {
                c.observables
                    .iter()
                    .position(|m| m == q)
                    .expect("extended context measures every source")
            })
            .collect();
        let mut vars: Vec<Observable> = d.variables().to_vec();
        vars.push(new_obs.clone());
        let mut weights: BTreeMap<Vec<String>, T> = BTreeMap::new();
        for (tuple, w) in d.support() {
            let src: Vec<String> = positions.iter().map(|&p| tuple[p].clone()).collect();
            let value = table
                .get(&src)
                .ok_or_else(|| {
                    Error::TransformSpec(format!("table misses source tuple [{}]", src.join(",")))
                })?
                .clone();
            let mut extended_tuple = tuple.clone();
            extended_tuple.push(value);
            weights.insert(extended_tuple, w.clone());
        }
        contexts.push(Context {
            name: c.name.clone(),
            observables: members,
        });
        distributions.push(Distribution::from_weights(vars, weights));
    }
    Behavior::new(Scenario::new(observables, contexts)?, distributions)
}

/// Where a consistified context came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ContextProvenance {
    Row { context: String },
    Col { observable: String },
}

/// Name maps carried alongside a consistified behavior so the construction
/// inverts without parsing names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistifiedTag {
    /// Incidence observable name to (original observable, original context).
    pub observables: BTreeMap<String, (String, String)>,
    pub contexts: BTreeMap<String, ContextProvenance>,
}

/// Rebuilds the behavior over incidence pairs `q@c`: each row context
/// `row:c` carries the original distribution of `c`, each column context
/// `col:q` carries the criterion's coupling of the copies of `q`. The result
/// is nondisturbing whatever the input was: distinct rows share nothing, a
/// row and a column overlap in a single copy whose marginal both sides pin
/// to the same value.
pub fn consistify<T: Scalar>(
    b: &Behavior<T>,
    criterion: &dyn CouplingCriterion<T>,
) -> Result<(Behavior<T>, ConsistifiedTag)> {
    criterion.in_domain(b)?;
    let scenario = b.scenario();
    for o in scenario.observables() {
        if scenario.contexts_of(&o.name).is_empty() {
            return Err(Error::TransformSpec(format!(
                "observable `{}` is measured in no context, so no copy of it would survive",
                o.name
            )));
        }
    }

    let mut observables = Vec::new();
    let mut obs_tag = BTreeMap::new();
    for c in scenario.contexts() {
        for q in &c.observables {
            let name = incidence_name(q, &c.name);
            observables.push(Observable {
                name: name.clone(),
                outcomes: scenario.observable(q)?.outcomes.clone(),
            });
            obs_tag.insert(name, (q.clone(), c.name.clone()));
        }
    }

    let mut contexts = Vec::new();
    let mut ctx_tag = BTreeMap::new();
    let mut distributions = Vec::new();
    for (c, d) in scenario.contexts().iter().zip(b.distributions()) {
        let name = format!("row:{}", c.name);
        let members: Vec<String> = c
            .observables
            .iter()
            .map(|q| incidence_name(q, &c.name))
            .collect();
        distributions.push(d.rename_variables(&members)?);
        contexts.push(Context {
            name: name.clone(),
            observables: members,
        });
        ctx_tag.insert(
            name,
            ContextProvenance::Row {
                context: c.name.clone(),
            },
        );
    }
    for o in scenario.observables() {
        let name = format!("col:{}", o.name);
        let cs = scenario.contexts_of(&o.name);
        let mut members = Vec::with_capacity(cs.len());
        let mut marginals = Vec::with_capacity(cs.len());
        for c in cs {
            let copy = incidence_name(&o.name, &c.name);
            let m = b
                .distribution(&c.name)?
                .marginalize(std::slice::from_ref(&o.name))?
                .rename_variables(std::slice::from_ref(&copy))?;
            members.push(copy);
            marginals.push(m);
        }
        distributions.push(criterion.couple(&marginals)?);
        contexts.push(Context {
            name: name.clone(),
            observables: members,
        });
        ctx_tag.insert(
            name,
            ContextProvenance::Col {
                observable: o.name.clone(),
            },
        );
    }

    let out = Behavior::new(Scenario::new(observables, contexts)?, distributions)?;
    debug_assert!(out.is_nondisturbing());
    Ok((
        out,
        ConsistifiedTag {
            observables: obs_tag,
            contexts: ctx_tag,
        },
    ))
}

/// Inverts [`consistify`] using only the row contexts and the tag; column
/// distributions are ignored, so a hand-edited row survives the round trip.
pub fn deconsistify<T: Scalar>(b: &Behavior<T>, tag: &ConsistifiedTag) -> Result<Behavior<T>> {
    let scenario = b.scenario();
    for o in scenario.observables() {
        if !tag.observables.contains_key(&o.name) {
            return Err(Error::Provenance(format!(
                "observable `{}` has no tag entry",
                o.name
            )));
        }
    }
    for name in tag.observables.keys() {
        scenario.observable(name)?;
    }
    for c in scenario.contexts() {
        if !tag.contexts.contains_key(&c.name) {
            return Err(Error::Provenance(format!(
                "context `{}` has no tag entry",
                c.name
            )));
        }
    }
    for name in tag.contexts.keys() {
        scenario.context(name)?;
    }

    // Every copy must sit in exactly one row and one column context.
    for o in scenario.observables() {
        let mut rows = 0;
        let mut cols = 0;
        for c in scenario.contexts_of(&o.name) {
            match &tag.contexts[&c.name] {
                ContextProvenance::Row { .. } => rows += 1,
                ContextProvenance::Col { .. } => cols += 1,
            }
        }
        if rows != 1 || cols != 1 {
            return Err(Error::Provenance(format!(
                "copy `{}` belongs to {rows} row and {cols} column contexts; expected one of each",
                o.name
            )));
        }
    }

    let mut observables: Vec<Observable> = Vec::new();
    let mut contexts = Vec::new();
    let mut distributions = Vec::new();
    for (c, d) in scenario.contexts().iter().zip(b.distributions()) {
        match &tag.contexts[&c.name] {
            ContextProvenance::Row { context } => {
                let mut members = Vec::with_capacity(c.observables.len());
                for copy in &c.observables {
                    let (q, origin) = &tag.observables[copy];
                    if origin != context {
                        return Err(Error::Provenance(format!(
                            "copy `{copy}` is tagged for context `{origin}` but sits in row `{context}`"
                        )));
                    }
                    members.push(q.clone());
                }
                distributions.push(d.rename_variables(&members)?);
                contexts.push(Context {
                    name: context.clone(),
                    observables: members,
                });
            }
            ContextProvenance::Col { observable } => {
                let mut outcomes: Option<Vec<String>> = None;
                for copy in &c.observables {
                    let (q, _) = &tag.observables[copy];
                    if q != observable {
                        return Err(Error::Provenance(format!(
                            "copy `{copy}` of `{q}` sits in the column context of `{observable}`"
                        )));
                    }
                    let copy_outcomes = scenario.observable(copy)?.outcomes.clone();
                    match &outcomes {
                        None => outcomes = Some(copy_outcomes),
                        Some(prev) if *prev != copy_outcomes => {
                            return Err(Error::Provenance(format!(
                                "copies of `{observable}` disagree on outcomes"
                            )));
                        }
                        Some(_) => {}
                    }
                }
                observables.push(Observable {
                    name: observable.clone(),
                    outcomes: outcomes.expect("column contexts are nonempty"),
                });
            }
        }
    }
    for c in &contexts {
        for q in &c.observables {
            if !observables.iter().any(|o| &o.name == q) {
                return Err(Error::Provenance(format!(
                    "observable `{q}` appears in a row but has no column context"
                )));
            }
        }
    }
    Behavior::new(Scenario::new(observables, contexts)?, distributions)
}

//! Monotonicity checks and a randomized counterexample search.
//!
//! A contextuality notion is monotone under a transform when the transform
//! never turns a noncontextual behavior contextual. This module checks that
//! property for single (behavior, transform) pairs, verifies the structural
//! properties of the incidence construction, and scans seeded random
//! behaviors over small scenario shapes for violations. Everything here is
//! concrete at [`crate::Rational`]; the search writes candidate behaviors
//! through their serialized form and decides them again before reporting,
//! so a reported violation replays from its own record.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::deciders::{
    decide_c, decide_ks, Contextuality, Multimaximal, SizeLimits, Verdict,
};
use crate::error::Error;
use crate::format::{behavior_to_doc, doc_to_behavior, sha256_hex, verdict_to_doc, BehaviorDoc, VerdictDoc};
use crate::model::{Behavior, Context, Distribution, Observable, Scenario};
use crate::transforms::{
    consistify, deconsistify, CoarseGrainSpec, NestSpec, PostProcessSpec, TransformSpec,
};
use crate::{Rational, Result};
use std::collections::{BTreeMap, BTreeSet};

/// Which decision procedure to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeciderKind {
    Ks,
    Cbd2,
}

impl DeciderKind {
    pub fn name(self) -> &'static str {
        match self {
            DeciderKind::Ks => "ks",
            DeciderKind::Cbd2 => "cbd2",
        }
    }

    pub fn decide(self, b: &Behavior<Rational>, limits: &SizeLimits) -> Result<Verdict<Rational>> {
        match self {
            DeciderKind::Ks => decide_ks(b, limits),
            DeciderKind::Cbd2 => decide_c(b, &Multimaximal, limits),
        }
    }
}

/// One behavior put through one transform, decided on both sides.
#[derive(Debug, Clone)]
pub struct PrincipleCheck {
    pub before: Verdict<Rational>,
    pub after: Verdict<Rational>,
    pub transformed: Behavior<Rational>,
    /// Noncontextual in, contextual out: the monotonicity failure.
    pub violated: bool,
}

pub fn check_principle(
    b: &Behavior<Rational>,
    spec: &TransformSpec,
    decider: DeciderKind,
    limits: &SizeLimits,
) -> Result<PrincipleCheck> {
    let before = decider.decide(b, limits)?;
    let transformed = spec.apply_principle(b)?;
    let after = decider.decide(&transformed, limits)?;
    let violated = before.value == Contextuality::Noncontextual
        && after.value == Contextuality::Contextual;
    Ok(PrincipleCheck {
        before,
        after,
        transformed,
        violated,
    })
}

/// The contract of the incidence construction on one behavior: the output
/// is nondisturbing, the construction inverts exactly, and deciding the
/// behavior directly agrees with deciding its consistified form globally.
#[derive(Debug, Clone)]
pub struct ConsistificationReport {
    pub nondisturbing: bool,
    pub round_trip: bool,
    pub direct: Verdict<Rational>,
    pub through: Verdict<Rational>,
    pub agree: bool,
}

impl ConsistificationReport {
    pub fn all_hold(&self) -> bool {
        self.nondisturbing && self.round_trip && self.agree
    }
}

pub fn verify_consistification_properties(
    b: &Behavior<Rational>,
    limits: &SizeLimits,
) -> Result<ConsistificationReport> {
    let (cb, tag) = consistify(b, &Multimaximal)?;
    let nondisturbing = cb.is_nondisturbing();
    let round_trip = deconsistify(&cb, &tag)? == *b;
    let direct = decide_c(b, &Multimaximal, limits)?;
    let through = decide_ks(&cb, limits)?;
    let agree = direct.value == through.value;
    Ok(ConsistificationReport {
        nondisturbing,
        round_trip,
        direct,
        through,
        agree,
    })
}

/// Scenario shapes the search samples over. All observables are two-valued
/// with outcomes `-1`, `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    /// `size` observables in a ring, adjacent pairs measured together.
    Cycle,
    /// `size` observables in a line, adjacent pairs measured together.
    Path,
    /// Two observables measured together in two separate contexts.
    RepeatedPair,
}

pub fn shape_scenario(kind: ShapeKind, size: usize) -> Result<Scenario> {
    let pm = |name: String| Observable {
        name,
        outcomes: vec!["-1".to_string(), "+1".to_string()],
    };
    match kind {
        ShapeKind::Cycle => {
            if size < 3 {
                return Err(Error::Scenario(
                    "a cycle needs at least 3 observables; use repeated-pair for 2".into(),
                ));
            }
            let observables: Vec<Observable> = (1..=size).map(|i| pm(format!("q{i}"))).collect();
            let contexts: Vec<Context> = (1..=size)
                .map(|i| {
                    let j = i % size + 1;
                    Context {
                        name: format!("c{i}"),
                        observables: vec![format!("q{i}"), format!("q{j}")],
                    }
                })
                .collect();
            Scenario::new(observables, contexts)
        }
        ShapeKind::Path => {
            if size < 2 {
                return Err(Error::Scenario("a path needs at least 2 observables".into()));
            }
            let observables: Vec<Observable> = (1..=size).map(|i| pm(format!("q{i}"))).collect();
            let contexts: Vec<Context> = (1..size)
                .map(|i| Context {
                    name: format!("c{i}"),
                    observables: vec![format!("q{i}"), format!("q{}", i + 1)],
                })
                .collect();
            Scenario::new(observables, contexts)
        }
        ShapeKind::RepeatedPair => {
            if size != 2 {
                return Err(Error::Scenario("a repeated pair has exactly 2 observables".into()));
            }
            let observables = vec![pm("q1".into()), pm("q2".into())];
            let contexts = vec![
                Context {
                    name: "c1".into(),
                    observables: vec!["q1".into(), "q2".into()],
                },
                Context {
                    name: "c2".into(),
                    observables: vec!["q1".into(), "q2".into()],
                },
            ];
            Scenario::new(observables, contexts)
        }
    }
}

/// How candidate behaviors are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleClass {
    /// Independent context distributions; may disturb.
    Unrestricted,
    /// Per-observable marginals pinned across contexts.
    Nondisturbing,
    /// Independent context distributions, redrawn until some shared
    /// marginal disagrees.
    Disturbing,
    /// Marginals of one global joint, hence noncontextual for the
    /// global-joint notion.
    KsNoncontextual,
    /// A noise-mixed anticorrelation box on the 4-cycle with one shared
    /// marginal redrawn: near-boundary candidates where violations
    /// concentrate.
    PrDeformation,
}

fn grid_fraction(rng: &mut ChaCha8Rng, denominator: u32) -> Rational {
    use crate::scalar::Scalar as _;
    Rational::ratio(rng.gen_range(0..=denominator) as i64, denominator as i64)
}

fn tuples(vars: &[Observable]) -> Vec<Vec<String>> {
    crate::model::enumerate_joint_outcomes(vars)
}

fn sample_unrestricted(
    rng: &mut ChaCha8Rng,
    scenario: &Scenario,
    denominator: u32,
) -> Behavior<Rational> {
    use num_traits::Zero;
    let mut distributions = Vec::new();
    for c in scenario.contexts() {
        let vars = scenario.context_observables(&c.name).expect("context exists");
        let outcomes = tuples(&vars);
        loop {
            let raw: Vec<u32> = outcomes.iter().map(|_| rng.gen_range(0..=denominator)).collect();
            let total: u32 = raw.iter().sum();
            if total == 0 {
                continue;
            }
            use crate::scalar::Scalar as _;
            let weights: BTreeMap<Vec<String>, Rational> = outcomes
                .iter()
                .zip(&raw)
                .filter(|(_, &k)| k != 0)
                .map(|(t, &k)| (t.clone(), Rational::ratio(k as i64, total as i64)))
                .collect();
            let d = Distribution::from_weights(vars.clone(), weights);
            debug_assert!(!d.total().is_zero());
            distributions.push(d);
            break;
        }
    }
    Behavior::new(scenario.clone(), distributions).expect("sampled behavior aligns")
}

/// Draws one marginal per observable, then fills each two-observable
/// context inside the interval of joints with those marginals.
fn sample_nondisturbing(
    rng: &mut ChaCha8Rng,
    scenario: &Scenario,
    denominator: u32,
) -> Behavior<Rational> {
    use num_traits::One;
    let mut positive: BTreeMap<String, Rational> = BTreeMap::new();
    for o in scenario.observables() {
        positive.insert(o.name.clone(), grid_fraction(rng, denominator));
    }
    let mut distributions = Vec::new();
    for c in scenario.contexts() {
        let vars = scenario.context_observables(&c.name).expect("context exists");
        assert!(vars.len() <= 2, "shapes measure at most pairs");
        if vars.len() == 1 {
            let p = positive[&vars[0].name].clone();
            let mut weights: BTreeMap<Vec<String>, Rational> = BTreeMap::new();
            weights.insert(vec!["+1".into()], p.clone());
            weights.insert(vec!["-1".into()], Rational::one() - p);
            distributions
                .push(Distribution::new(vars, weights).expect("marginal is a distribution"));
        } else {
            let pa = positive[&vars[0].name].clone();
            let pb = positive[&vars[1].name].clone();
            distributions.push(frechet_fill(vars, pa, pb, grid_fraction(rng, denominator)));
        }
    }
    Behavior::new(scenario.clone(), distributions).expect("sampled behavior aligns")
}

/// Draws one joint over all observables and takes its context marginals.
fn sample_ks_noncontextual(
    rng: &mut ChaCha8Rng,
    scenario: &Scenario,
    denominator: u32,
) -> Behavior<Rational> {
    use crate::scalar::Scalar as _;
    let vars = scenario.observables().to_vec();
    let outcomes = tuples(&vars);
    let global = loop {
        let raw: Vec<u32> = outcomes.iter().map(|_| rng.gen_range(0..=denominator)).collect();
        let total: u32 = raw.iter().sum();
        if total == 0 {
            continue;
        }
        let weights: BTreeMap<Vec<String>, Rational> = outcomes
            .iter()
            .zip(&raw)
            .filter(|(_, &k)| k != 0)
            .map(|(t, &k)| (t.clone(), Rational::ratio(k as i64, total as i64)))
            .collect();
        break Distribution::from_weights(vars, weights);
    };
    let distributions: Vec<Distribution<Rational>> = scenario
        .contexts()
        .iter()
        .map(|c| global.marginalize(&c.observables).expect("members are global variables"))
        .collect();
    Behavior::new(scenario.clone(), distributions).expect("marginals align")
}

/// Two-observable joint with prescribed positive-outcome marginals; the
/// joint positive mass sits at `fill` along the interval of admissible
/// values.
fn frechet_fill(
    vars: Vec<Observable>,
    pa: Rational,
    pb: Rational,
    fill: Rational,
) -> Distribution<Rational> {
    use num_traits::{One, Zero};
    let lo = (pa.clone() + pb.clone() - Rational::one()).max(Rational::zero());
    let hi = pa.clone().min(pb.clone());
    let both = lo.clone() + (hi - lo) * fill;
    let mut weights: BTreeMap<Vec<String>, Rational> = BTreeMap::new();
    weights.insert(vec!["+1".into(), "+1".into()], both.clone());
    weights.insert(vec!["+1".into(), "-1".into()], pa.clone() - both.clone());
    weights.insert(vec!["-1".into(), "+1".into()], pb.clone() - both.clone());
    weights.insert(
        vec!["-1".into(), "-1".into()],
        Rational::one() - pa - pb + both,
    );
    Distribution::new(vars, weights).expect("interval fill is a distribution")
}

const CONDITIONING_RETRIES: u32 = 64;

fn sample_disturbing(
    rng: &mut ChaCha8Rng,
    scenario: &Scenario,
    denominator: u32,
) -> Result<Behavior<Rational>> {
    for _ in 0..CONDITIONING_RETRIES {
        let b = sample_unrestricted(rng, scenario, denominator);
        if !b.is_nondisturbing() {
            return Ok(b);
        }
    }
    Err(Error::BudgetExhausted(format!(
        "no disturbing draw in {CONDITIONING_RETRIES} attempts; raise the denominator"
    )))
}

/// Mixes the anticorrelation box toward uniform noise by a sampled weight,
/// then redraws the second marginal of one context, pushing disturbance
/// into a single shared observable.
fn sample_pr_deformation(
    rng: &mut ChaCha8Rng,
    scenario: &Scenario,
    denominator: u32,
) -> Result<Behavior<Rational>> {
    use crate::scalar::Scalar as _;
    use num_traits::One;
    let n = scenario.contexts().len();
    if scenario.observables().len() != 4 || n != 4 {
        return Err(Error::Scenario(
            "boundary deformation sampling needs the 4-observable cycle".into(),
        ));
    }
    let lambda = grid_fraction(rng, denominator);
    let noise = Rational::ratio(1, 4) * (Rational::one() - lambda.clone());
    let half = Rational::ratio(1, 2);
    let deformed = rng.gen_range(0..n);
    let pb = grid_fraction(rng, denominator);
    let fill = grid_fraction(rng, denominator);
    let mut distributions = Vec::with_capacity(n);
    for (i, c) in scenario.contexts().iter().enumerate() {
        let vars = scenario.context_observables(&c.name).expect("context exists");
        if i == deformed {
            distributions.push(frechet_fill(vars, half.clone(), pb.clone(), fill.clone()));
            continue;
        }
        // Perfect correlation in every context but the last, which
        // anticorrelates; each mixed with uniform noise.
        let on_diagonal = i != n - 1;
        let heavy = lambda.clone() * half.clone() + noise.clone();
        let mut weights: BTreeMap<Vec<String>, Rational> = BTreeMap::new();
        for (a, b) in [("-1", "-1"), ("-1", "+1"), ("+1", "-1"), ("+1", "+1")] {
            let w = if (a == b) == on_diagonal {
                heavy.clone()
            } else {
                noise.clone()
            };
            weights.insert(vec![a.to_string(), b.to_string()], w);
        }
        distributions
            .push(Distribution::new(vars, weights).expect("mixture is a distribution"));
    }
    Ok(Behavior::new(scenario.clone(), distributions).expect("sampled behavior aligns"))
}

pub fn sample_behavior(
    class: SampleClass,
    rng: &mut ChaCha8Rng,
    scenario: &Scenario,
    denominator: u32,
) -> Result<Behavior<Rational>> {
    match class {
        SampleClass::Unrestricted => Ok(sample_unrestricted(rng, scenario, denominator)),
        SampleClass::Nondisturbing => Ok(sample_nondisturbing(rng, scenario, denominator)),
        SampleClass::Disturbing => sample_disturbing(rng, scenario, denominator),
        SampleClass::KsNoncontextual => Ok(sample_ks_noncontextual(rng, scenario, denominator)),
        SampleClass::PrDeformation => sample_pr_deformation(rng, scenario, denominator),
    }
}

/// The search's candidate generator, exposed directly: candidate `index`
/// of a config draws from a fresh generator seeded `seed + index`.
pub fn random_behavior(config: &SearchConfig, index: u32) -> Result<Behavior<Rational>> {
    let scenario = shape_scenario(config.shape, config.size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(index as u64));
    sample_behavior(config.condition, &mut rng, &scenario, config.denominator)
}

/// Transform families the search draws candidates from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformFamily {
    Nest,
    CoarseGrain,
    PostProcess,
}

pub fn family_of(spec: &TransformSpec) -> Option<TransformFamily> {
    match spec {
        TransformSpec::Nest(_) => Some(TransformFamily::Nest),
        TransformSpec::CoarseGrain(_) => Some(TransformFamily::CoarseGrain),
        TransformSpec::PostProcess(_) => Some(TransformFamily::PostProcess),
        TransformSpec::Consistify { .. } | TransformSpec::Deconsistify => None,
    }
}

fn parity_table() -> BTreeMap<String, String> {
    let mut t = BTreeMap::new();
    t.insert("-1,-1".into(), "+1".into());
    t.insert("-1,+1".into(), "-1".into());
    t.insert("+1,-1".into(), "-1".into());
    t.insert("+1,+1".into(), "+1".into());
    t
}

fn conjunction_table() -> BTreeMap<String, String> {
    let mut t = BTreeMap::new();
    t.insert("-1,-1".into(), "-1".into());
    t.insert("-1,+1".into(), "-1".into());
    t.insert("+1,-1".into(), "-1".into());
    t.insert("+1,+1".into(), "+1".into());
    t
}

/// Enumerates the transforms worth trying against one behavior: dropping a
/// context, dropping a single incidence, merging an adjacent outcome pair,
/// and adjoining a parity or conjunction of a jointly measured pair.
/// Deterministic in the scenario.
pub fn candidate_transforms(
    b: &Behavior<Rational>,
    families: &BTreeSet<TransformFamily>,
) -> Vec<TransformSpec> {
    let scenario = b.scenario();
    let mut out = Vec::new();
    if families.contains(&TransformFamily::Nest) {
        if scenario.contexts().len() >= 2 {
            for c in scenario.contexts() {
                let keep: BTreeSet<String> = scenario
                    .contexts()
                    .iter()
                    .filter(|other| other.name != c.name)
                    .map(|other| other.name.clone())
                    .collect();
                out.push(TransformSpec::Nest(NestSpec {
                    observables: None,
                    contexts: Some(keep),
                    incidences: None,
                }));
            }
        }
        let all: BTreeSet<(String, String)> = scenario
            .incidences()
            .into_iter()
            .map(|(q, c)| (q.to_string(), c.to_string()))
            .collect();
        for c in scenario.contexts() {
            if c.observables.len() < 2 {
                continue;
            }
            for q in &c.observables {
                let mut keep = all.clone();
                keep.remove(&(q.clone(), c.name.clone()));
                out.push(TransformSpec::Nest(NestSpec {
                    observables: None,
                    contexts: None,
                    incidences: Some(keep),
                }));
            }
        }
    }
    if families.contains(&TransformFamily::CoarseGrain) {
        for o in scenario.observables() {
            if o.outcomes.len() < 2 {
                continue;
            }
            let merged = format!("{}|{}", o.outcomes[0], o.outcomes[1]);
            if o.outcomes.contains(&merged) {
                continue;
            }
            let mut map = BTreeMap::new();
            map.insert(o.outcomes[0].clone(), merged.clone());
            map.insert(o.outcomes[1].clone(), merged);
            for other in &o.outcomes[2..] {
                map.insert(other.clone(), other.clone());
            }
            out.push(TransformSpec::CoarseGrain(CoarseGrainSpec {
                maps: [(o.name.clone(), map)].into(),
            }));
        }
    }
    if families.contains(&TransformFamily::PostProcess) {
        let binary = |name: &str| {
            scenario
                .observable(name)
                .map(|o| o.outcomes == ["-1", "+1"])
                .unwrap_or(false)
        };
        let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
        for c in scenario.contexts() {
            for (i, a) in c.observables.iter().enumerate() {
                for bname in &c.observables[i + 1..] {
                    if !binary(a) || !binary(bname) {
                        continue;
                    }
                    if !seen.insert((a.clone(), bname.clone())) {
                        continue;
                    }
                    for (label, table) in
                        [("xor", parity_table()), ("and", conjunction_table())]
                    {
                        let name = format!("{label}:{a}:{bname}");
                        if scenario.observable(&name).is_ok() {
                            continue;
                        }
                        out.push(TransformSpec::PostProcess(PostProcessSpec {
                            sources: vec![a.clone(), bname.clone()],
                            name,
                            outcomes: vec!["-1".into(), "+1".into()],
                            table,
                        }));
                    }
                }
            }
        }
    }
    out
}

fn all_families() -> BTreeSet<TransformFamily> {
    [
        TransformFamily::Nest,
        TransformFamily::CoarseGrain,
        TransformFamily::PostProcess,
    ]
    .into()
}

/// Search plan: decided before any sampling, serialized into the report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub theory: DeciderKind,
    pub shape: ShapeKind,
    pub size: usize,
    pub condition: SampleClass,
    /// Grid denominator for sampled probabilities.
    pub denominator: u32,
    pub samples: u32,
    pub seed: u64,
    #[serde(default = "all_families")]
    pub families: BTreeSet<TransformFamily>,
}

/// One confirmed monotonicity failure, recorded replayably: the behavior as
/// a document, the hash of its canonical serialization, the transform, and
/// both verdicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrincipleViolation {
    pub theory: DeciderKind,
    pub behavior: BehaviorDoc,
    pub behavior_sha256: String,
    pub transform: TransformSpec,
    pub before: VerdictDoc,
    pub after: VerdictDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub config: SearchConfig,
    /// Samples whose base behavior the decider accepted and judged.
    pub examined: u32,
    /// Samples already contextual before any transform.
    pub skipped_contextual: u32,
    /// Samples outside the decider's domain (disturbing input to the
    /// global-joint decider).
    pub skipped_out_of_domain: u32,
    pub violations: Vec<PrincipleViolation>,
}

/// Scans seeded samples for transforms that turn a noncontextual behavior
/// contextual. Candidate `i` uses its own generator seeded with
/// `seed + i`, so any single find replays without rerunning the scan.
pub fn search_counterexamples(
    config: &SearchConfig,
    limits: &SizeLimits,
) -> Result<SearchReport> {
    if config.theory == DeciderKind::Ks && config.condition == SampleClass::Unrestricted {
        return Err(Error::DomainClass(
            "the global-joint decider rejects disturbing behaviors; sample nondisturbing ones"
                .into(),
        ));
    }
    let scenario = shape_scenario(config.shape, config.size)?;
    let mut report = SearchReport {
        config: config.clone(),
        examined: 0,
        skipped_contextual: 0,
        skipped_out_of_domain: 0,
        violations: Vec::new(),
    };
    for i in 0..config.samples {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(i as u64));
        let b = sample_behavior(config.condition, &mut rng, &scenario, config.denominator)?;
        let before = match config.theory.decide(&b, limits) {
            Ok(v) => v,
            Err(Error::Disturbing { .. }) | Err(Error::DomainClass(_)) => {
                report.skipped_out_of_domain += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        report.examined += 1;
        if before.value == Contextuality::Contextual {
            report.skipped_contextual += 1;
            continue;
        }
        for spec in candidate_transforms(&b, &config.families) {
            let transformed = match spec.apply_principle(&b) {
                Ok(t) => t,
                Err(_) => continue,
            };
            let after = match config.theory.decide(&transformed, limits) {
                Ok(v) => v,
                Err(Error::Disturbing { .. }) | Err(Error::DomainClass(_)) => continue,
                Err(e) => return Err(e),
            };
            if after.value != Contextuality::Contextual {
                continue;
            }
            let doc = behavior_to_doc(&b);
            let bytes =
                serde_json::to_vec(&doc).map_err(|e| Error::Internal(e.to_string()))?;
            let replayed = doc_to_behavior::<Rational>(&doc, true)?;
            let again_before = config.theory.decide(&replayed, limits)?;
            let again_after = config
                .theory
                .decide(&spec.apply_principle(&replayed)?, limits)?;
            if again_before.value != Contextuality::Noncontextual
                || again_after.value != Contextuality::Contextual
            {
                return Err(Error::Internal(
                    "violation did not replay from its serialized form".into(),
                ));
            }
            report.violations.push(PrincipleViolation {
                theory: config.theory,
                behavior: doc,
                behavior_sha256: sha256_hex(&bytes),
                transform: spec,
                before: verdict_to_doc(&before),
                after: verdict_to_doc(&after),
            });
        }
    }
    Ok(report)
}

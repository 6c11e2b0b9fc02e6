//! Contextuality deciders.
//!
//! The standard question: does one joint distribution over all observables
//! marginalize to every context distribution? The extended question drops
//! the implicit assumption that a measurement is the same random variable in
//! every context: variables become observable-context incidence pairs, each
//! context constrains its own copies, and the copies of one observable
//! across contexts are constrained to the joint a coupling criterion assigns
//! to their marginals. Both questions are LP feasibility over the respective
//! outcome spaces, so every verdict carries a witness distribution or a
//! Farkas certificate.
//!
//! The shipped criterion is the multimaximal one on binary observables: the
//! copies of an observable are coupled comonotonically, which maximizes
//! every pairwise equality probability at once and is the unique joint doing
//! so. "Positive outcome" means the second outcome in declared order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lp::{solve_feasibility, FeasibilityProblem, FeasibilityResult};
use crate::model::{Behavior, Distribution, JointSpace, Observable};
use crate::scalar::Scalar;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Contextuality {
    Contextual,
    Noncontextual,
}

/// Decision with its evidence: noncontextual verdicts carry the extending
/// joint, contextual ones a Farkas certificate for the constraint system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict<T: Scalar = crate::Rational> {
    pub theory: String,
    pub value: Contextuality,
    pub witness: Option<Distribution<T>>,
    pub certificate: Option<Vec<T>>,
}

/// Guards against accidentally huge LP instances. The variable count is the
/// product of outcome-set sizes, so it grows exponentially with scenario
/// width; refuse rather than thrash.
#[derive(Debug, Clone, Copy)]
pub struct SizeLimits {
    pub max_lp_vars: usize,
    pub max_incidences: usize,
}

impl Default for SizeLimits {
    fn default() -> Self {
        SizeLimits {
            max_lp_vars: 1 << 20,
            max_incidences: 20,
        }
    }
}

/// Named predicate delimiting the behaviors a criterion applies to.
pub struct DomainClass<T: Scalar> {
    name: String,
    check: Box<dyn Fn(&Behavior<T>) -> Result<()> + Send + Sync>,
}

impl<T: Scalar> DomainClass<T> {
    pub fn new(
        name: impl Into<String>,
        check: impl Fn(&Behavior<T>) -> Result<()> + Send + Sync + 'static,
    ) -> Self {
        DomainClass {
            name: name.into(),
            check: Box::new(check),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn check(&self, b: &Behavior<T>) -> Result<()> {
        (self.check)(b)
    }
}

/// A rule assigning to the single-variable marginals of an observable's
/// copies the one joint they must have, plus the predicate that joint is
/// meant to satisfy uniquely.
pub trait CouplingCriterion<T: Scalar> {
    /// Theory tag carried by verdicts, e.g. `cbd2`.
    fn name(&self) -> &str;

    fn domain(&self) -> DomainClass<T>;

    fn in_domain(&self, b: &Behavior<T>) -> Result<()> {
        self.domain().check(b)
    }

    /// Couples single-variable marginals into one joint. The marginals must
    /// already carry distinct variable names with identical outcome lists;
    /// the output is over those variables in the given order.
    fn couple(&self, marginals: &[Distribution<T>]) -> Result<Distribution<T>>;

    /// Whether a joint over the copies satisfies the criterion's defining
    /// property (not merely whether it equals the constructed coupling).
    fn satisfies(&self, joint: &Distribution<T>) -> Result<bool>;
}

/// The multimaximal criterion: couple copies so that every pairwise equality
/// probability attains its Frechet upper bound `1 - |p_i - p_j|`.
pub struct Multimaximal;

fn positive_probability<T: Scalar>(m: &Distribution<T>) -> Result<T> {
    let vars = m.variables();
    if vars.len() != 1 {
        return Err(Error::Coupling(format!(
            "expected a single-variable marginal, got {} variables",
            vars.len()
        )));
    }
    if vars[0].outcomes.len() != 2 {
        return Err(Error::DomainClass(format!(
            "observable `{}` has {} outcomes; the multimaximal criterion couples binary observables",
            vars[0].name,
            vars[0].outcomes.len()
        )));
    }
    if !m.is_valid() {
        return Err(Error::Coupling(format!(
            "marginal of `{}` is not a probability distribution",
            vars[0].name
        )));
    }
    Ok(m.weight(&[vars[0].outcomes[1].clone()]))
}

impl<T: Scalar> CouplingCriterion<T> for Multimaximal {
    fn name(&self) -> &str {
        "cbd2"
    }

    fn domain(&self) -> DomainClass<T> {
        DomainClass::new("binary-observables", |b: &Behavior<T>| {
            for o in b.scenario().observables() {
                if o.outcomes.len() != 2 {
                    return Err(Error::DomainClass(format!(
                        "observable `{}` has {} outcomes; the multimaximal criterion requires binary observables",
                        o.name,
                        o.outcomes.len()
                    )));
                }
            }
            Ok(())
        })
    }

    fn couple(&self, marginals: &[Distribution<T>]) -> Result<Distribution<T>> {
        if marginals.is_empty() {
            return Err(Error::Coupling("no copies to couple".into()));
        }
        let outcomes = marginals[0].variables()[0].outcomes.clone();
        let mut vars = Vec::with_capacity(marginals.len());
        let mut ps = Vec::with_capacity(marginals.len());
        for m in marginals {
            ps.push(positive_probability(m)?);
            let v = m.variables()[0].clone();
            if v.outcomes != outcomes {
                return Err(Error::Coupling(format!(
                    "copies disagree on outcomes: `{}` lists [{}], expected [{}]",
                    v.name,
                    v.outcomes.join(","),
                    outcomes.join(",")
                )));
            }
            if vars.iter().any(|p: &Observable| p.name == v.name) {
                return Err(Error::Coupling(format!(
                    "duplicate copy name `{}`",
                    v.name
                )));
            }
            vars.push(v);
        }
        let negative = outcomes[0].clone();
        let positive = outcomes[1].clone();

        // Comonotone construction: one uniform U drives every copy, copy i
        // positive iff U <= p_i. Atoms are the gaps between consecutive
        // breakpoints of {p_i} union {1}.
        let mut breakpoints: Vec<T> = ps.clone();
        breakpoints.push(T::one());
        breakpoints.sort();
        breakpoints.dedup();
        let mut weights: BTreeMap<Vec<String>, T> = BTreeMap::new();
        let mut prev = T::zero();
        for s in breakpoints {
            if s <= prev {
                continue;
            }
            let tuple: Vec<String> = ps
                .iter()
                .map(|p| {
                    if *p >= s {
                        positive.clone()
                    } else {
                        negative.clone()
                    }
                })
                .collect();
            let w = s.clone() - prev;
            let slot = weights.entry(tuple).or_insert_with(T::zero);
            *slot = slot.clone() + w;
            prev = s;
        }
        Distribution::new(vars, weights)
    }

    fn satisfies(&self, joint: &Distribution<T>) -> Result<bool> {
        let names = joint.variable_names();
        let mut ps = Vec::with_capacity(names.len());
        for name in &names {
            ps.push(positive_probability(&joint.marginalize(std::slice::from_ref(name))?)?);
        }
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                let pair = joint.marginalize(&[names[i].clone(), names[j].clone()])?;
                let outcomes = &pair.variables()[0].outcomes;
                let equal = pair.weight(&[outcomes[0].clone(), outcomes[0].clone()])
                    + pair.weight(&[outcomes[1].clone(), outcomes[1].clone()]);
                let diff = ps[i].clone() - ps[j].clone();
                let bound = T::one() - diff.abs();
                if equal != bound {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Convenience wrapper for the shipped criterion's coupling rule.
pub fn multimaximal_coupling<T: Scalar>(marginals: &[Distribution<T>]) -> Result<Distribution<T>> {
    CouplingCriterion::couple(&Multimaximal, marginals)
}

/// Looks up a shipped coupling criterion by its serialized name.
pub fn criterion_by_name<T: Scalar>(name: &str) -> Result<Box<dyn CouplingCriterion<T>>> {
    match name {
        "cbd2" | "multimaximal" => Ok(Box::new(Multimaximal)),
        other => Err(Error::Parse(format!("unknown coupling criterion `{other}`"))),
    }
}

fn check_var_budget(space: &JointSpace, limits: &SizeLimits) -> Result<usize> {
    let nv = space.size()?;
    if nv > limits.max_lp_vars {
        return Err(Error::TooLarge(format!(
            "{} LP variables exceed the limit of {}",
            nv, limits.max_lp_vars
        )));
    }
    Ok(nv)
}

/// Adds the block of equalities "the marginal of the joint at `positions`
/// equals `target`", one row per outcome tuple of the selected variables.
/// `target` is read by outcome tuple, so its variable names need not match.
fn add_marginal_rows<T: Scalar>(
    p: &mut FeasibilityProblem<T>,
    space: &JointSpace,
    positions: &[usize],
    target: &Distribution<T>,
) -> Result<()> {
    let vars = space.variables();
    let sizes: Vec<usize> = vars.iter().map(|v| v.outcomes.len()).collect();
    let mut divisor = vec![1usize; vars.len()];
    for i in (0..vars.len().saturating_sub(1)).rev() {
        divisor[i] = divisor[i + 1] * sizes[i + 1];
    }
    let sub_space = JointSpace::new(positions.iter().map(|&i| vars[i].clone()).collect());
    let nv = space.size()?;
    let mut rows = vec![vec![T::zero(); nv]; sub_space.size()?];
    for g in 0..nv {
        let mut t = 0;
        for &i in positions {
            t = t * sizes[i] + (g / divisor[i]) % sizes[i];
        }
        rows[t][g] = T::one();
    }
    for (row, tuple) in rows.into_iter().zip(sub_space.iter()) {
        p.add_equality(row, target.weight(&tuple))?;
    }
    Ok(())
}

fn distribution_from_point<T: Scalar>(space: &JointSpace, x: &[T]) -> Distribution<T> {
    let mut weights = BTreeMap::new();
    for (i, v) in x.iter().enumerate() {
        if !v.is_zero() {
            weights.insert(space.tuple_at(i), v.clone());
        }
    }
    Distribution::from_weights(space.variables().to_vec(), weights)
}

/// The global-joint existence system for a behavior: variables are outcome
/// tuples over all observables, constraints pin every context marginal.
/// Exposed so the system can be checked against independent oracles.
pub fn ks_feasibility_problem<T: Scalar>(
    b: &Behavior<T>,
    limits: &SizeLimits,
) -> Result<(FeasibilityProblem<T>, JointSpace)> {
    let scenario = b.scenario();
    let space = JointSpace::new(scenario.observables().to_vec());
    let nv = check_var_budget(&space, limits)?;
    let mut p = FeasibilityProblem::new(nv);
    p.add_equality(vec![T::one(); nv], T::one())?;
    for (c, d) in scenario.contexts().iter().zip(b.distributions()) {
        let positions: Vec<usize> = c
            .observables
            .iter()
            .map(|q| {
                scenario
                    .observables()
                    .iter()
                    .position(|o| &o.name == q)
                    .expect("context observables exist in scenario")
            })
            .collect();
        add_marginal_rows(&mut p, &space, &positions, d)?;
    }
    Ok((p, space))
}

/// Decides standard contextuality. Errors on disturbing input: the question
/// presupposes each observable is one variable, which a marginal mismatch
/// already refutes.
pub fn decide_ks<T: Scalar>(b: &Behavior<T>, limits: &SizeLimits) -> Result<Verdict<T>> {
    if let Some(w) = b.check_nondisturbance() {
        return Err(Error::Disturbing {
            context_a: w.context_a,
            context_b: w.context_b,
            shared: w.shared.join(","),
        });
    }
    let (problem, space) = ks_feasibility_problem(b, limits)?;
    let verdict = match solve_feasibility(&problem)? {
        FeasibilityResult::Feasible(x) => Verdict {
            theory: "ks".into(),
            value: Contextuality::Noncontextual,
            witness: Some(distribution_from_point(&space, &x)),
            certificate: None,
        },
        FeasibilityResult::Infeasible(y) => Verdict {
            theory: "ks".into(),
            value: Contextuality::Contextual,
            witness: None,
            certificate: Some(y),
        },
    };
    Ok(verdict)
}

/// Canonical name for the copy of observable `q` in context `c`.
pub fn incidence_name(q: &str, c: &str) -> String {
    format!("{q}@{c}")
}

/// The incidence-joint existence system: variables are outcome tuples over
/// all incidence pairs, constraints pin every context distribution (row
/// block) and every observable's criterion coupling (column block).
pub fn c_feasibility_problem<T: Scalar>(
    b: &Behavior<T>,
    criterion: &dyn CouplingCriterion<T>,
    limits: &SizeLimits,
) -> Result<(FeasibilityProblem<T>, JointSpace)> {
    criterion.in_domain(b)?;
    let scenario = b.scenario();
    let incidences = scenario.incidences();
    if incidences.len() > limits.max_incidences {
        return Err(Error::TooLarge(format!(
            "{} incidence pairs exceed the limit of {}",
            incidences.len(),
            limits.max_incidences
        )));
    }
    let incidences: Vec<(String, String)> = incidences
        .into_iter()
        .map(|(q, c)| (q.to_string(), c.to_string()))
        .collect();
    let vars: Vec<Observable> = incidences
        .iter()
        .map(|(q, c)| {
            Ok(Observable {
                name: incidence_name(q, c),
                outcomes: scenario.observable(q)?.outcomes.clone(),
            })
        })
        .collect::<Result<_>>()?;
    let space = JointSpace::new(vars);
    let nv = check_var_budget(&space, limits)?;
    let mut p = FeasibilityProblem::new(nv);
    p.add_equality(vec![T::one(); nv], T::one())?;

    let position_of = |q: &str, c: &str| {
        incidences
            .iter()
            .position(|(iq, ic)| iq == q && ic == c)
            .expect("incidence enumerated")
    };

    for (c, d) in scenario.contexts().iter().zip(b.distributions()) {
        let positions: Vec<usize> = c
            .observables
            .iter()
            .map(|q| position_of(q, &c.name))
            .collect();
        add_marginal_rows(&mut p, &space, &positions, d)?;
    }

    for o in scenario.observables() {
        let contexts = scenario.contexts_of(&o.name);
        if contexts.is_empty() {
            continue;
        }
        let mut marginals = Vec::with_capacity(contexts.len());
        let mut positions = Vec::with_capacity(contexts.len());
        for c in &contexts {
            let m = b
                .distribution(&c.name)?
                .marginalize(std::slice::from_ref(&o.name))?
                .rename_variables(&[incidence_name(&o.name, &c.name)])?;
            marginals.push(m);
            positions.push(position_of(&o.name, &c.name));
        }
        let coupling = criterion.couple(&marginals)?;
        add_marginal_rows(&mut p, &space, &positions, &coupling)?;
    }
    Ok((p, space))
}

/// Decides extended contextuality under the given criterion. Disturbing
/// behaviors are first-class inputs here.
pub fn decide_c<T: Scalar>(
    b: &Behavior<T>,
    criterion: &dyn CouplingCriterion<T>,
    limits: &SizeLimits,
) -> Result<Verdict<T>> {
    let (problem, space) = c_feasibility_problem(b, criterion, limits)?;
    let verdict = match solve_feasibility(&problem)? {
        FeasibilityResult::Feasible(x) => Verdict {
            theory: criterion.name().into(),
            value: Contextuality::Noncontextual,
            witness: Some(distribution_from_point(&space, &x)),
            certificate: None,
        },
        FeasibilityResult::Infeasible(y) => Verdict {
            theory: criterion.name().into(),
            value: Contextuality::Contextual,
            witness: None,
            certificate: Some(y),
        },
    };
    Ok(verdict)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UniquenessOutcome<T: Scalar = crate::Rational> {
    Holds,
    Counterexample(UniquenessCounterexample<T>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniquenessCounterexample<T: Scalar = crate::Rational> {
    pub reason: String,
    pub candidate: Distribution<T>,
    pub conflicting: Option<Distribution<T>>,
}

/// The polytope of couplings of the given single-variable marginals.
pub fn coupling_polytope<T: Scalar>(
    marginals: &[Distribution<T>],
) -> Result<(FeasibilityProblem<T>, JointSpace)> {
    let mut vars = Vec::with_capacity(marginals.len());
    for m in marginals {
        if m.variables().len() != 1 {
            return Err(Error::Coupling(
                "coupling polytope expects single-variable marginals".into(),
            ));
        }
        vars.push(m.variables()[0].clone());
    }
    let space = JointSpace::new(vars);
    let nv = space.size()?;
    let mut p = FeasibilityProblem::new(nv);
    for (i, m) in marginals.iter().enumerate() {
        add_marginal_rows(&mut p, &space, &[i], m)?;
    }
    Ok((p, space))
}

/// Brute-force check that a criterion's output is what the criterion is
/// contracted to produce: it reproduces the marginals, it degenerates to the
/// all-equal coupling on identical marginals, and it is the unique joint in
/// the coupling polytope satisfying the criterion's defining property
/// (checked over the polytope's vertices; the shipped criterion's property
/// is affine, so its satisfying set is a face and vertex uniqueness is
/// exact).
pub fn verify_uniqueness_property<T: Scalar>(
    criterion: &dyn CouplingCriterion<T>,
    marginals: &[Distribution<T>],
    max_bases: usize,
) -> Result<UniquenessOutcome<T>> {
    let candidate = criterion.couple(marginals)?;
    for m in marginals {
        let name = m.variables()[0].name.clone();
        if candidate.marginalize(std::slice::from_ref(&name))? != *m {
            return Ok(UniquenessOutcome::Counterexample(UniquenessCounterexample {
                reason: format!("output does not reproduce the marginal of `{name}`"),
                candidate,
                conflicting: None,
            }));
        }
    }

    let first_weights: Vec<(Vec<String>, T)> = marginals[0]
        .support()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let identical = marginals.iter().all(|m| {
        m.support()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect::<Vec<_>>()
            == first_weights
    });
    if identical {
        let outcomes = marginals[0].variables()[0].outcomes.clone();
        let mut weights = BTreeMap::new();
        for o in &outcomes {
            let w = marginals[0].weight(std::slice::from_ref(o));
            if !w.is_zero() {
                weights.insert(vec![o.clone(); marginals.len()], w);
            }
        }
        let all_equal = Distribution::from_weights(
            candidate.variables().to_vec(),
            weights,
        );
        if candidate != all_equal {
            return Ok(UniquenessOutcome::Counterexample(UniquenessCounterexample {
                reason: "identical marginals must be coupled to the all-equal joint".into(),
                candidate,
                conflicting: Some(all_equal),
            }));
        }
    }

    if !criterion.satisfies(&candidate)? {
        return Ok(UniquenessOutcome::Counterexample(UniquenessCounterexample {
            reason: "output violates the criterion's own defining property".into(),
            candidate,
            conflicting: None,
        }));
    }

    let (polytope, space) = coupling_polytope(marginals)?;
    let vertices = polytope.enumerate_vertices(max_bases)?;
    let mut satisfying = Vec::new();
    for v in vertices {
        let d = distribution_from_point(&space, &v);
        if criterion.satisfies(&d)? {
            satisfying.push(d);
        }
    }
    match satisfying.len() {
        0 => Ok(UniquenessOutcome::Counterexample(UniquenessCounterexample {
            reason: "no polytope vertex satisfies the criterion, so its satisfying set is not a face containing the output".into(),
            candidate,
            conflicting: None,
        })),
        1 => {
            if satisfying[0] == candidate {
                Ok(UniquenessOutcome::Holds)
            } else {
                Ok(UniquenessOutcome::Counterexample(UniquenessCounterexample {
                    reason: "a different joint satisfies the criterion".into(),
                    candidate,
                    conflicting: Some(satisfying.swap_remove(0)),
                }))
            }
        }
        _ => {
            let other = satisfying
                .iter()
                .find(|d| **d != candidate)
                .cloned()
                .unwrap_or_else(|| satisfying[0].clone());
            Ok(UniquenessOutcome::Counterexample(UniquenessCounterexample {
                reason: "multiple joints satisfy the criterion".into(),
                candidate,
                conflicting: Some(other),
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Context, Scenario};
    use crate::testutil::{dist, disturbing_pair, key, perfect_four_cycle, pm, pr_box};
    use crate::Rational;
    use num_traits::{One, Zero};

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn marginal(name: &str, positive: (i64, i64)) -> Distribution<Rational> {
        let p = r(positive.0, positive.1);
        let neg = Rational::one() - p.clone();
        let mut w = std::collections::BTreeMap::new();
        if !neg.is_zero() {
            w.insert(key(&["-1"]), neg);
        }
        if !p.is_zero() {
            w.insert(key(&["+1"]), p);
        }
        Distribution::new(vec![pm(name)], w).unwrap()
    }

    #[test]
    fn comonotone_coupling_of_skewed_pair() {
        let m = [marginal("a", (3, 4)), marginal("b", (1, 4))];
        let j = multimaximal_coupling(&m).unwrap();
        assert_eq!(j.weight(&key(&["+1", "+1"])), r(1, 4));
        assert_eq!(j.weight(&key(&["+1", "-1"])), r(1, 2));
        assert_eq!(j.weight(&key(&["-1", "-1"])), r(1, 4));
        assert_eq!(j.weight(&key(&["-1", "+1"])), r(0, 1));
    }

    #[test]
    fn identical_marginals_couple_diagonally() {
        let m = [marginal("a", (1, 3)), marginal("b", (1, 3)), marginal("c", (1, 3))];
        let j = multimaximal_coupling(&m).unwrap();
        assert_eq!(j.weight(&key(&["+1", "+1", "+1"])), r(1, 3));
        assert_eq!(j.weight(&key(&["-1", "-1", "-1"])), r(2, 3));
        assert_eq!(j.support().count(), 2);
    }

    #[test]
    fn extreme_marginals_are_handled() {
        let m = [marginal("a", (0, 1)), marginal("b", (1, 1))];
        let j = multimaximal_coupling(&m).unwrap();
        assert_eq!(j.weight(&key(&["-1", "+1"])), r(1, 1));
    }

    #[test]
    fn single_copy_couples_to_itself() {
        let m = [marginal("a", (2, 5))];
        let j = multimaximal_coupling(&m).unwrap();
        assert_eq!(j.weight(&key(&["+1"])), r(2, 5));
        assert_eq!(j.weight(&key(&["-1"])), r(3, 5));
    }

    #[test]
    fn coupling_rejects_mismatched_copies() {
        let a = marginal("a", (1, 2));
        let odd = Distribution::new(
            vec![Observable::new("b", &["0", "1"])],
            [(key(&["0"]), r(1, 2)), (key(&["1"]), r(1, 2))].into(),
        )
        .unwrap();
        assert!(matches!(
            multimaximal_coupling(&[a, odd]),
            Err(Error::Coupling(_))
        ));
    }

    #[test]
    fn coupling_rejects_non_binary() {
        let t = Distribution::new(
            vec![Observable::new("t", &["0", "1", "2"])],
            [(key(&["0"]), r(1, 1))].into(),
        )
        .unwrap();
        assert!(matches!(
            multimaximal_coupling(&[t]),
            Err(Error::DomainClass(_))
        ));
    }

    #[test]
    fn pr_box_is_ks_contextual_with_valid_certificate() {
        let pr = pr_box();
        let limits = SizeLimits::default();
        let v = decide_ks(&pr, &limits).unwrap();
        assert_eq!(v.value, Contextuality::Contextual);
        let y = v.certificate.expect("certificate");
        let (problem, _) = ks_feasibility_problem(&pr, &limits).unwrap();
        assert!(problem.check_farkas_certificate(&y));
    }

    #[test]
    fn perfect_correlations_are_ks_noncontextual() {
        let b = perfect_four_cycle();
        let v = decide_ks(&b, &SizeLimits::default()).unwrap();
        assert_eq!(v.value, Contextuality::Noncontextual);
        let w = v.witness.expect("witness");
        // The witness marginalizes back to every context distribution.
        for (c, d) in b.scenario().contexts().iter().zip(b.distributions()) {
            let names: Vec<String> = c.observables.clone();
            assert_eq!(&w.marginalize(&names).unwrap(), d);
        }
    }

    #[test]
    fn ks_decider_rejects_disturbing_input() {
        let b = disturbing_pair();
        assert!(matches!(
            decide_ks(&b, &SizeLimits::default()),
            Err(Error::Disturbing { .. })
        ));
    }

    #[test]
    fn pr_box_is_extended_contextual() {
        let pr = pr_box();
        let limits = SizeLimits::default();
        let v = decide_c(&pr, &Multimaximal, &limits).unwrap();
        assert_eq!(v.value, Contextuality::Contextual);
        let (problem, _) = c_feasibility_problem(&pr, &Multimaximal, &limits).unwrap();
        assert!(problem.check_farkas_certificate(&v.certificate.unwrap()));
    }

    #[test]
    fn disturbing_pair_is_extended_noncontextual() {
        // Disturbance alone is not extended contextuality: these two
        // incompatible joints still admit an incidence joint coupling each
        // observable's copies comonotonically.
        let b = disturbing_pair();
        let v = decide_c(&b, &Multimaximal, &SizeLimits::default()).unwrap();
        assert_eq!(v.value, Contextuality::Noncontextual);
        let w = v.witness.expect("witness");
        assert!(w.is_valid());
        // Row constraint: restricting the witness to context c1's copies
        // reproduces that context's distribution.
        let m = w
            .marginalize(&[incidence_name("q1", "c1"), incidence_name("q2", "c1")])
            .unwrap();
        assert_eq!(m.weight(&key(&["+1", "+1"])), r(1, 2));
        assert_eq!(m.weight(&key(&["+1", "-1"])), r(1, 4));
        assert_eq!(m.weight(&key(&["-1", "-1"])), r(1, 4));
    }

    #[test]
    fn extended_decider_enforces_domain() {
        let scenario = Scenario::new(
            vec![Observable::new("t", &["0", "1", "2"])],
            vec![Context::new("c", &["t"])],
        )
        .unwrap();
        let d = Distribution::new(
            vec![Observable::new("t", &["0", "1", "2"])],
            [(key(&["0"]), r(1, 1))].into(),
        )
        .unwrap();
        let b = Behavior::new(scenario, vec![d]).unwrap();
        assert!(matches!(
            decide_c(&b, &Multimaximal, &SizeLimits::default()),
            Err(Error::DomainClass(_))
        ));
    }

    #[test]
    fn size_limits_are_enforced() {
        let pr = pr_box();
        let tight = SizeLimits {
            max_lp_vars: 8,
            max_incidences: 20,
        };
        assert!(matches!(
            decide_ks(&pr, &tight),
            Err(Error::TooLarge(_))
        ));
        let tight = SizeLimits {
            max_lp_vars: 1 << 20,
            max_incidences: 4,
        };
        assert!(matches!(
            decide_c(&pr, &Multimaximal, &tight),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn unmeasured_observable_multiplies_the_global_space_only() {
        let scenario = Scenario::new(
            vec![pm("q1"), pm("lonely")],
            vec![Context::new("c", &["q1"])],
        )
        .unwrap();
        let d = dist(vec![pm("q1")], &[(&["-1"], (1, 2)), (&["+1"], (1, 2))]);
        let b = Behavior::new(scenario, vec![d]).unwrap();
        let v = decide_ks(&b, &SizeLimits::default()).unwrap();
        assert_eq!(v.value, Contextuality::Noncontextual);
        let vc = decide_c(&b, &Multimaximal, &SizeLimits::default()).unwrap();
        assert_eq!(vc.value, Contextuality::Noncontextual);
    }

    #[test]
    fn uniqueness_holds_for_multimaximal_families() {
        let families = [
            vec![marginal("a", (3, 4)), marginal("b", (1, 4))],
            vec![marginal("a", (1, 2)), marginal("b", (1, 2))],
            vec![
                marginal("a", (1, 6)),
                marginal("b", (1, 2)),
                marginal("c", (5, 6)),
            ],
            vec![marginal("a", (0, 1)), marginal("b", (2, 3))],
        ];
        for m in families {
            let out = verify_uniqueness_property(&Multimaximal, &m, 100_000).unwrap();
            assert_eq!(out, UniquenessOutcome::Holds, "family {m:?}");
        }
    }

    /// Claims the multimaximal property but returns the product coupling.
    struct BrokenProduct;

    impl CouplingCriterion<Rational> for BrokenProduct {
        fn name(&self) -> &str {
            "broken"
        }

        fn domain(&self) -> DomainClass<Rational> {
            Multimaximal.domain()
        }

        fn couple(&self, marginals: &[Distribution<Rational>]) -> Result<Distribution<Rational>> {
            let mut out = Distribution::new(
                vec![],
                [(vec![], Rational::one())].into(),
            )?;
            for m in marginals {
                let vars: Vec<Observable> = out
                    .variables()
                    .iter()
                    .chain(m.variables())
                    .cloned()
                    .collect();
                let mut weights = std::collections::BTreeMap::new();
                for (k1, w1) in out.support() {
                    for (k2, w2) in m.support() {
                        let mut k = k1.clone();
                        k.extend(k2.iter().cloned());
                        weights.insert(k, w1.clone() * w2.clone());
                    }
                }
                out = Distribution::new(vars, weights)?;
            }
            Ok(out)
        }

        fn satisfies(&self, joint: &Distribution<Rational>) -> Result<bool> {
            CouplingCriterion::<Rational>::satisfies(&Multimaximal, joint)
        }
    }

    #[test]
    fn broken_product_criterion_is_caught() {
        let m = [marginal("a", (3, 4)), marginal("b", (1, 4))];
        match verify_uniqueness_property(&BrokenProduct, &m, 100_000).unwrap() {
            UniquenessOutcome::Counterexample(cex) => {
                assert!(cex.reason.contains("defining property"), "{}", cex.reason);
            }
            UniquenessOutcome::Holds => panic!("broken criterion must not verify"),
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn prob() -> impl Strategy<Value = Rational> {
            (0i64..=12, 1i64..=1).prop_map(|(n, _)| Rational::ratio(n, 12))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn coupling_reproduces_marginals_and_frechet_bounds(
                ps in proptest::collection::vec(prob(), 1..=4)
            ) {
                let marginals: Vec<Distribution<Rational>> = ps
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let mut w = std::collections::BTreeMap::new();
                        let neg = Rational::one() - p.clone();
                        if !neg.is_zero() { w.insert(key(&["-1"]), neg); }
                        if !p.is_zero() { w.insert(key(&["+1"]), p.clone()); }
                        Distribution::new(vec![pm(&format!("v{i}"))], w).unwrap()
                    })
                    .collect();
                let j = multimaximal_coupling(&marginals).unwrap();
                prop_assert!(j.is_valid());
                for (i, m) in marginals.iter().enumerate() {
                    let name = m.variables()[0].name.clone();
                    prop_assert_eq!(&j.marginalize(&[name]).unwrap(), m, "marginal {}", i);
                }
                prop_assert!(CouplingCriterion::<Rational>::satisfies(&Multimaximal, &j).unwrap());
            }
        }
    }
}

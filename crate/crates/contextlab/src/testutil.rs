//! Builders shared by unit tests.

use std::collections::BTreeMap;

use crate::model::{Behavior, Context, Distribution, Observable, Scenario};
use crate::scalar::Scalar;
use crate::Rational;

pub fn pm(name: &str) -> Observable {
    Observable::new(name, &["-1", "+1"])
}

pub fn key(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

pub fn dist(vars: Vec<Observable>, entries: &[(&[&str], (i64, i64))]) -> Distribution<Rational> {
    let mut w = BTreeMap::new();
    for (k, (num, den)) in entries {
        w.insert(key(k), Rational::ratio(*num, *den));
    }
    Distribution::new(vars, w).unwrap()
}

pub fn four_cycle_scenario() -> Scenario {
    Scenario::new(
        vec![pm("q1"), pm("q2"), pm("q3"), pm("q4")],
        vec![
            Context::new("c12", &["q1", "q2"]),
            Context::new("c23", &["q2", "q3"]),
            Context::new("c34", &["q3", "q4"]),
            Context::new("c14", &["q1", "q4"]),
        ],
    )
    .unwrap()
}

/// Four perfect correlations around the cycle, one anticorrelation closing it.
pub fn pr_box() -> Behavior<Rational> {
    let equal: &[(&[&str], (i64, i64))] = &[(&["-1", "-1"], (1, 2)), (&["+1", "+1"], (1, 2))];
    let unequal: &[(&[&str], (i64, i64))] = &[(&["-1", "+1"], (1, 2)), (&["+1", "-1"], (1, 2))];
    Behavior::new(
        four_cycle_scenario(),
        vec![
            dist(vec![pm("q1"), pm("q2")], equal),
            dist(vec![pm("q2"), pm("q3")], equal),
            dist(vec![pm("q3"), pm("q4")], equal),
            dist(vec![pm("q1"), pm("q4")], unequal),
        ],
    )
    .unwrap()
}

/// Same scenario as the PR box but with all four contexts perfectly
/// correlated; admits the fair coin over (all minus, all plus).
pub fn perfect_four_cycle() -> Behavior<Rational> {
    let equal: &[(&[&str], (i64, i64))] = &[(&["-1", "-1"], (1, 2)), (&["+1", "+1"], (1, 2))];
    Behavior::new(
        four_cycle_scenario(),
        vec![
            dist(vec![pm("q1"), pm("q2")], equal),
            dist(vec![pm("q2"), pm("q3")], equal),
            dist(vec![pm("q3"), pm("q4")], equal),
            dist(vec![pm("q1"), pm("q4")], equal),
        ],
    )
    .unwrap()
}

/// Two contexts measuring the same pair with different joints: disturbing,
/// yet each observable's couplings are satisfiable.
pub fn disturbing_pair() -> Behavior<Rational> {
    let scenario = Scenario::new(
        vec![pm("q1"), pm("q2")],
        vec![
            Context::new("c1", &["q1", "q2"]),
            Context::new("c2", &["q1", "q2"]),
        ],
    )
    .unwrap();
    Behavior::new(
        scenario,
        vec![
            dist(
                vec![pm("q1"), pm("q2")],
                &[
                    (&["+1", "+1"], (1, 2)),
                    (&["+1", "-1"], (1, 4)),
                    (&["-1", "-1"], (1, 4)),
                ],
            ),
            dist(
                vec![pm("q1"), pm("q2")],
                &[
                    (&["+1", "+1"], (1, 4)),
                    (&["-1", "+1"], (1, 4)),
                    (&["-1", "-1"], (1, 2)),
                ],
            ),
        ],
    )
    .unwrap()
}

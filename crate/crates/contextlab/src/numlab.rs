//! An executable arithmetic analogue of the consistification story.
//!
//! Theory T declares n even iff n is 2 or nonprime. M is the set of primes
//! and even numbers, and T' is T restricted to M, where it coincides with
//! ordinary evenness. The injection sending n to 2^(sigma(n)-2) * n (sigma
//! counting divisors; 1 maps to itself) carries T to T': a number is T-even
//! exactly when its image is even in the ordinary sense. The axiom "if n is
//! even then so is n+2" is true for ordinary evenness yet false after
//! transport through the injection, with 9 the smallest witness: 9 maps to
//! 18 but 11 maps to 11. Everything here is scanned, not assumed.
//!
//! The construction quietly breaks at n = 1: 1 is nonprime (so T-even), but
//! its image 1 is odd and lies outside M. Scans therefore start at 2 and
//! [`n1_anomaly`] reports the edge case instead of hiding it.

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Number of positive divisors, by enumeration of divisor pairs up to the
/// square root.
pub fn divisor_count(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::DomainClass(
            "divisor count is defined for n >= 1".into(),
        ));
    }
    let mut count = 0;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            count += if d * d == n { 1 } else { 2 };
        }
        d += 1;
    }
    Ok(count)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The injection: 1 stays 1, otherwise n scales by 2^(sigma(n)-2). Primes
/// have two divisors, so they are fixed; everything else gains at least one
/// factor of 2. Values overflow machine words quickly, hence the big
/// integer.
pub fn consistify_number(n: u64) -> Result<BigUint> {
    let sigma = divisor_count(n)?;
    if n == 1 {
        return Ok(BigUint::from(1u32));
    }
    Ok(BigUint::from(n) << (sigma - 2) as usize)
}

/// Membership in M: primes and multiples of 2.
pub fn is_in_m(n: u64) -> bool {
    n % 2 == 0 || is_prime(n)
}

fn big_is_in_m(value: &BigUint) -> bool {
    if value.is_even() {
        return true;
    }
    // Odd values of the injection are fixed points, so they fit in a word.
    match u64::try_from(value) {
        Ok(n) => is_in_m(n),
        Err(_) => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumTheory {
    /// Even iff 2 or nonprime.
    T,
    /// Ordinary evenness, defined only on M.
    Tprime,
}

pub fn evenness(n: u64, theory: NumTheory) -> Result<bool> {
    if n == 0 {
        return Err(Error::DomainClass("evenness is defined for n >= 1".into()));
    }
    match theory {
        NumTheory::T => Ok(n == 2 || !is_prime(n)),
        NumTheory::Tprime => {
            if !is_in_m(n) {
                return Err(Error::DomainClass(format!(
                    "{n} is outside M, where the restricted theory is undefined"
                )));
            }
            Ok(n % 2 == 0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MismatchKind {
    /// T-evenness of n disagrees with ordinary evenness of the image.
    Equivalence,
    /// The image lies outside M.
    Codomain,
    /// Two scanned numbers share an image.
    Injectivity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub n: u64,
    pub kind: MismatchKind,
    pub detail: String,
}

/// Scans 2..=nmax for failures of the three claims the injection rests on:
/// the evenness equivalence, landing in M, and injectivity. An empty result
/// is the exhaustive confirmation over that range.
pub fn scan_equivalence(nmax: u64) -> Result<Vec<Mismatch>> {
    if nmax < 2 {
        return Err(Error::DomainClass("scan range needs nmax >= 2".into()));
    }
    let mut mismatches = Vec::new();
    let mut images: std::collections::BTreeMap<BigUint, u64> = std::collections::BTreeMap::new();
    for n in 2..=nmax {
        let image = consistify_number(n)?;
        let t_even = evenness(n, NumTheory::T)?;
        let image_even = image.is_even();
        if t_even != image_even {
            mismatches.push(Mismatch {
                n,
                kind: MismatchKind::Equivalence,
                detail: format!(
                    "T-evenness {t_even} but image {image} is {}",
                    if image_even { "even" } else { "odd" }
                ),
            });
        }
        if !big_is_in_m(&image) {
            mismatches.push(Mismatch {
                n,
                kind: MismatchKind::Codomain,
                detail: format!("image {image} is outside M"),
            });
        }
        if let Some(&prev) = images.get(&image) {
            mismatches.push(Mismatch {
                n,
                kind: MismatchKind::Injectivity,
                detail: format!("image {image} already taken by {prev}"),
            });
        } else {
            images.insert(image, n);
        }
    }
    Ok(mismatches)
}

/// One failure of the transported axiom: n's image is even but the image of
/// n + 2 is odd.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportedCounterexample {
    pub n: u64,
    pub image_n: String,
    pub image_n_plus_2: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub nmax: u64,
    /// Failures of "n even implies n+2 even" under ordinary evenness.
    /// Always empty; scanned anyway rather than assumed.
    pub axiom_counterexamples: Vec<u64>,
    /// Failures of the same axiom transported through the injection,
    /// ascending in n.
    pub transported_counterexamples: Vec<TransportedCounterexample>,
    pub smallest_transported: Option<u64>,
}

/// Checks the addition-by-two axiom in both representations over
/// 1..=nmax (plain) and 2..=nmax (transported).
pub fn check_axioms(nmax: u64) -> Result<AxiomReport> {
    if nmax < 2 {
        return Err(Error::DomainClass("axiom scan needs nmax >= 2".into()));
    }
    let mut axiom_counterexamples = Vec::new();
    for n in 1..=nmax {
        if n % 2 == 0 && (n + 2) % 2 != 0 {
            axiom_counterexamples.push(n);
        }
    }
    let mut transported = Vec::new();
    for n in 2..=nmax {
        let image_n = consistify_number(n)?;
        let image_next = consistify_number(n + 2)?;
        if image_n.is_even() && !image_next.is_even() {
            transported.push(TransportedCounterexample {
                n,
                image_n: image_n.to_string(),
                image_n_plus_2: image_next.to_string(),
            });
        }
    }
    let smallest_transported = transported.first().map(|c| c.n);
    Ok(AxiomReport {
        nmax,
        axiom_counterexamples,
        transported_counterexamples: transported,
        smallest_transported,
    })
}

/// The n = 1 edge case, stated as data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnomalyNote {
    pub t_even_at_1: bool,
    pub image_of_1: String,
    pub image_is_even: bool,
    pub image_in_m: bool,
    pub note: String,
}

pub fn n1_anomaly() -> AnomalyNote {
    let image = consistify_number(1).expect("1 is in range");
    AnomalyNote {
        t_even_at_1: evenness(1, NumTheory::T).expect("1 is in range"),
        image_is_even: image.is_even(),
        image_in_m: big_is_in_m(&image),
        image_of_1: image.to_string(),
        note: "1 is nonprime, hence T-even, but its image 1 is odd and lies outside M; \
               scans therefore start at 2"
            .into(),
    }
}

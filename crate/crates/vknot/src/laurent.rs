//! Exact Laurent polynomials in the bracket variable `A` with arbitrary
//! precision integer coefficients.
//!
//! Every invariant in this crate bottoms out in arithmetic on these values,
//! so the representation is kept canonical at all times: a sorted map from
//! exponent to coefficient that never stores a zero coefficient.  Two values
//! are equal iff they are the same polynomial.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LaurentError {
    /// Division was requested but the divisor does not divide exactly.
    #[error("inexact division: {0}")]
    InexactDivision(String),
}

/// A Laurent polynomial `sum c_k A^k` over the integers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    // invariant: no zero coefficients are stored
    terms: BTreeMap<i64, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    /// `c * A^k`.
    pub fn monomial<C: Into<BigInt>>(coeff: C, exp: i64) -> Self {
        let c: BigInt = coeff.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        LaurentPoly { terms }
    }

    /// Build from (exponent, coefficient) pairs, summing duplicates.
    pub fn from_pairs<I, C>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<BigInt>,
    {
        let mut p = LaurentPoly::zero();
        for (e, c) in pairs {
            p.add_term(e, c.into());
        }
        p
    }

    /// The loop value `d = -A^-2 - A^2`.
    pub fn d() -> Self {
        Self::from_pairs([(-2, -1), (2, -1)])
    }

    /// `d^k` for `k >= 0`.
    pub fn d_power(k: usize) -> Self {
        let mut p = LaurentPoly::one();
        let d = Self::d();
        for _ in 0..k {
            p = p.mul(&d);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exp: i64) -> BigInt {
        self.terms.get(&exp).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn iter_terms(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    fn add_term(&mut self, exp: i64, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }

    /// Multiply by `c * A^k` in place; cheaper than a full `mul`.
    pub fn mul_monomial<C: Into<BigInt>>(&self, coeff: C, exp: i64) -> Self {
        let c: BigInt = coeff.into();
        if c.is_zero() {
            return LaurentPoly::zero();
        }
        LaurentPoly { terms: self.terms.iter().map(|(e, k)| (e + exp, k * &c)).collect() }
    }

    /// Substitute `A -> A^-1`.
    pub fn mirror(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(e, c)| (-e, c.clone())).collect() }
    }

    /// Exact division, erroring unless the divisor divides on the nose.
    ///
    /// Long division by the lowest term of the divisor; this terminates for
    /// any nonzero divisor because the quotient's support is bounded by the
    /// dividend's exponent span.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self, LaurentError> {
        if divisor.is_zero() {
            return Err(LaurentError::InexactDivision("division by zero".into()));
        }
        if self.is_zero() {
            return Ok(LaurentPoly::zero());
        }
        let mut rem = self.clone();
        let mut quot = LaurentPoly::zero();
        let (dlow, dcoeff) = {
            let (e, c) = divisor.terms.iter().next().unwrap();
            (*e, c.clone())
        };
        // any exact quotient has top exponent max(self) - max(divisor); once
        // the running quotient exponent passes that, the division cannot
        // close off (each step cancels the current lowest term exactly, so
        // without this bound a unit low term would recurse forever)
        let qmax = self.max_exp().unwrap() - divisor.max_exp().unwrap();
        while !rem.is_zero() {
            let (rlow, rcoeff) = {
                let (e, c) = rem.terms.iter().next().unwrap();
                (*e, c.clone())
            };
            if rlow - dlow > qmax {
                return Err(LaurentError::InexactDivision(
                    "quotient exponent exceeds degree bound".into(),
                ));
            }
            if (&rcoeff % &dcoeff) != BigInt::zero() {
                return Err(LaurentError::InexactDivision(format!(
                    "coefficient {rcoeff} not divisible by {dcoeff}"
                )));
            }
            let q = LaurentPoly::monomial(&rcoeff / &dcoeff, rlow - dlow);
            rem = rem.sub(&q.mul(divisor));
            quot = quot.add(&q);
        }
        Ok(quot)
    }

    /// Exact division by the loop value `d`.
    pub fn div_exact_d(&self) -> Result<Self, LaurentError> {
        self.div_exact(&Self::d())
    }

    /// Evaluate at an integer point (used by cross checks in tests).
    pub fn eval_int(&self, a_num: i64) -> Option<BigInt> {
        // only valid for nonzero integer a; negative exponents need exactness
        if a_num == 0 {
            return None;
        }
        let a = BigInt::from(a_num);
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let p = a.pow(e.unsigned_abs() as u32);
            if *e >= 0 {
                acc += c * p;
            } else {
                // exact only when p = ±1; callers use a = ±1
                if p.abs() != BigInt::one() {
                    return None;
                }
                acc += c * p;
            }
        }
        Some(acc)
    }
}

impl fmt::Display for LaurentPoly {
    /// Canonical text: terms by ascending exponent, `A^k` notation, explicit
    /// signs, e.g. `-A^-2 - A^2` or `1 - A^4`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let unit = mag.is_one();
            match (*e, unit) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "A")?,
                (1, false) => write!(f, "{mag}A")?,
                (_, true) => write!(f, "A^{e}")?,
                (_, false) => write!(f, "{mag}A^{e}")?,
            }
        }
        Ok(())
    }
}

// Wire form: a map from decimal exponent strings to decimal coefficient
// strings, e.g. {"-2":"-1","2":"-1"}.
impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<String, String> =
            self.terms.iter().map(|(e, c)| (e.to_string(), c.to_string())).collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, String>::deserialize(d)?;
        let mut p = LaurentPoly::zero();
        for (e, c) in map {
            let exp: i64 = e.parse().map_err(|_| D::Error::custom(format!("bad exponent {e}")))?;
            let coeff: BigInt =
                c.parse().map_err(|_| D::Error::custom(format!("bad coefficient {c}")))?;
            p.add_term(exp, coeff);
        }
        Ok(p)
    }
}

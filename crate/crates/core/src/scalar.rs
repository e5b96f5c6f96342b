//! Scalars in the commutative algebra generated by the declared symbols.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::arith::{fmt_q, q_to_f64, Q};
use crate::error::{Error, Result};
use crate::symbols::{interval_add, interval_scale, Interval, Monomial, SymbolBasis, MAX_ROUND};

/// Sparse linear combination of monomials.
pub type Terms = BTreeMap<Monomial, Q>;

pub fn terms_add_into(acc: &mut Terms, m: &Monomial, c: &Q) {
    if c.is_zero() {
        return;
    }
    let e = acc.entry(m.clone()).or_insert_with(Q::zero);
    *e += c;
    if e.is_zero() {
        acc.remove(m);
    }
}

pub fn terms_mul(a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let (f, m) = ma.mul(mb);
            terms_add_into(&mut out, &m, &(ca * cb * Q::from_integer(f)));
        }
    }
    out
}

pub fn terms_scale(a: &Terms, c: &Q) -> Terms {
    if c.is_zero() {
        return Terms::new();
    }
    a.iter().map(|(m, x)| (m.clone(), x * c)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Negative => "negative",
            Sign::Zero => "zero",
            Sign::Positive => "positive",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SymbolicScalar {
    basis: Arc<SymbolBasis>,
    terms: Terms,
}

impl PartialEq for SymbolicScalar {
    /// Equality is syntactic: same terms.
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl SymbolicScalar {
    pub fn new(basis: Arc<SymbolBasis>, mut terms: Terms) -> Self {
        terms.retain(|_, c| !c.is_zero());
        SymbolicScalar { basis, terms }
    }

    pub fn rational(basis: Arc<SymbolBasis>, c: Q) -> Self {
        let mut terms = Terms::new();
        terms_add_into(&mut terms, &Monomial::unit(), &c);
        SymbolicScalar { basis, terms }
    }

    pub fn basis(&self) -> &Arc<SymbolBasis> {
        &self.basis
    }

    pub fn terms(&self) -> &Terms {
        &self.terms
    }

    pub fn into_terms(self) -> Terms {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value when no irrational monomial occurs.
    pub fn as_rational(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&Monomial::unit()).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let basis = SymbolBasis::merge(&self.basis, &o.basis)?;
        let mut terms = self.terms.clone();
        for (m, c) in &o.terms {
            terms_add_into(&mut terms, m, c);
        }
        Ok(SymbolicScalar { basis, terms })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let basis = SymbolBasis::merge(&self.basis, &o.basis)?;
        Ok(SymbolicScalar { basis, terms: terms_mul(&self.terms, &o.terms) })
    }

    pub fn neg(&self) -> Self {
        SymbolicScalar { basis: self.basis.clone(), terms: terms_scale(&self.terms, &-Q::from_integer(1.into())) }
    }

    pub fn scale(&self, c: &Q) -> Self {
        SymbolicScalar { basis: self.basis.clone(), terms: terms_scale(&self.terms, c) }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = SymbolicScalar::rational(self.basis.clone(), Q::from_integer(1.into()));
        for _ in 0..n {
            acc.terms = terms_mul(&acc.terms, &self.terms);
        }
        acc
    }

    /// Enclosure at a given refinement round.
    pub fn interval(&self, round: u32) -> Interval {
        let mut acc = (Q::zero(), Q::zero());
        for (m, c) in &self.terms {
            let i = self.basis.monomial_interval(m, round);
            acc = interval_add(&acc, &interval_scale(&i, c));
        }
        acc
    }

    /// Certified sign. Zero is decided syntactically; otherwise square-root
    /// enclosures are refined for up to `budget` rounds (capped at
    /// [`MAX_ROUND`]) until the enclosure excludes zero.
    pub fn sign(&self, budget: u32) -> Result<Sign> {
        if self.terms.is_empty() {
            return Ok(Sign::Zero);
        }
        for m in self.terms.keys() {
            self.basis.check_declared(m)?;
        }
        let refinable = self.terms.keys().any(|m| m.sq != 0);
        let last = if refinable { budget.min(MAX_ROUND) } else { 0 };
        let mut iv = self.interval(0);
        for round in 0..=last {
            if round > 0 {
                iv = self.interval(round);
            }
            if iv.0.is_positive() {
                return Ok(Sign::Positive);
            }
            if iv.1.is_negative() {
                return Ok(Sign::Negative);
            }
        }
        Err(Error::Indeterminate(format!("{} lies in [{}, {}] after refinement", self, fmt_q(&iv.0), fmt_q(&iv.1))))
    }

    /// Floating point estimate for diagnostics.
    pub fn approx(&self) -> f64 {
        let (lo, hi) = self.interval(2);
        (q_to_f64(&lo) + q_to_f64(&hi)) / 2.0
    }
}

impl fmt::Display for SymbolicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| if m.is_unit() { fmt_q(c) } else { format!("{}*{}", fmt_q(c), m.label()) })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

pub fn sign_of(s: &SymbolicScalar, precision_budget: u32) -> Result<Sign> {
    s.sign(precision_budget)
}

//! Certified real symbols.
//!
//! A symbol is either the unit `"1"`, a square root `"sqrt(n)"` of a
//! squarefree integer `n > 1`, or an opaque label with a user-declared
//! enclosure. Square roots factor into prime atoms, which gives the
//! rewrite `sqrt(a) * sqrt(b) = sqrt(ab)` and `sqrt(p)^2 = p` for free and
//! lets their enclosures be refined to any precision. Opaque symbols are
//! trusted to be independent of everything else and cannot be refined.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::arith::{fmt_q, Q};
use crate::error::{Error, Result};

/// The first 128 primes; square-root radicands must factor over them.
pub const PRIMES: [u32; 128] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239,
    241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311, 313, 317, 331, 337, 347, 349, 353, 359, 367, 373, 379,
    383, 389, 397, 401, 409, 419, 421, 431, 433, 439, 443, 449, 457, 461, 463, 467, 479, 487, 491, 499, 503, 509, 521,
    523, 541, 547, 557, 563, 569, 571, 577, 587, 593, 599, 601, 607, 613, 617, 619, 631, 641, 643, 647, 653, 659, 661,
    673, 677, 683, 691, 701, 709, 719,
];

/// Highest refinement round; round `r` uses `16 * 2^r` bits.
pub const MAX_ROUND: u32 = 16;

/// A product of square-root atoms and opaque symbols.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    /// Bit `i` set means a factor `sqrt(PRIMES[i])`.
    pub sq: u128,
    /// Opaque labels, sorted, with repetition.
    pub op: Vec<Arc<str>>,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial { sq: 0, op: Vec::new() }
    }

    pub fn is_unit(&self) -> bool {
        self.sq == 0 && self.op.is_empty()
    }

    pub fn sqrt(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::input(format!("sqrt({n}) is not a valid symbol")));
        }
        let mut rest = n;
        let mut sq = 0u128;
        for (i, &p) in PRIMES.iter().enumerate() {
            let p = p as u64;
            if rest.is_multiple_of(p) {
                rest /= p;
                if rest.is_multiple_of(p) {
                    return Err(Error::input(format!("sqrt({n}): radicand is not squarefree")));
                }
                sq |= 1 << i;
            }
        }
        if rest != 1 {
            return Err(Error::input(format!("sqrt({n}): radicand must factor over primes up to {}", PRIMES[127])));
        }
        Ok(Monomial { sq, op: Vec::new() })
    }

    pub fn opaque(label: &str) -> Self {
        Monomial { sq: 0, op: vec![Arc::from(label)] }
    }

    /// The squarefree integer under the square-root part.
    pub fn radicand(&self) -> BigInt {
        bits_product(self.sq)
    }

    /// `self * other = factor * monomial`.
    pub fn mul(&self, other: &Monomial) -> (BigInt, Monomial) {
        let factor = bits_product(self.sq & other.sq);
        let mut op = self.op.clone();
        op.extend(other.op.iter().cloned());
        op.sort();
        (factor, Monomial { sq: self.sq ^ other.sq, op })
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.sq != 0 {
            parts.push(format!("sqrt({})", self.radicand()));
        }
        parts.extend(self.op.iter().map(|s| s.to_string()));
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

fn bits_product(bits: u128) -> BigInt {
    let mut acc = BigInt::one();
    for (i, &p) in PRIMES.iter().enumerate() {
        if bits >> i & 1 == 1 {
            acc *= p;
        }
    }
    acc
}

/// Closed rational interval `[lo, hi]`.
pub type Interval = (Q, Q);

pub fn interval_mul(a: &Interval, b: &Interval) -> Interval {
    let c = [&a.0 * &b.0, &a.0 * &b.1, &a.1 * &b.0, &a.1 * &b.1];
    let lo = c.iter().min().unwrap().clone();
    let hi = c.iter().max().unwrap().clone();
    (lo, hi)
}

pub fn interval_add(a: &Interval, b: &Interval) -> Interval {
    (&a.0 + &b.0, &a.1 + &b.1)
}

pub fn interval_scale(a: &Interval, c: &Q) -> Interval {
    if c.is_negative() {
        (c * &a.1, c * &a.0)
    } else {
        (c * &a.0, c * &a.1)
    }
}

/// Enclosure of `sqrt(n)` with `bits` binary digits.
pub fn sqrt_interval(n: &BigInt, bits: u32) -> Interval {
    let scale = BigInt::one() << (2 * bits as usize);
    let s = (n * scale).sqrt();
    let den = BigInt::one() << bits as usize;
    let lo = Q::new(s.clone(), den.clone());
    let hi = if &lo * &lo == Q::from_integer(n.clone()) { lo.clone() } else { Q::new(s + 1, den) };
    (lo, hi)
}

/// An ordered, declared-independent family of real symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolBasis {
    labels: Vec<String>,
    monomials: Vec<Monomial>,
    enclosures: Vec<Interval>,
}

impl SymbolBasis {
    /// The trivial basis `{"1"}`.
    pub fn rational() -> Arc<Self> {
        Arc::new(SymbolBasis {
            labels: vec!["1".into()],
            monomials: vec![Monomial::unit()],
            enclosures: vec![(Q::one(), Q::one())],
        })
    }

    /// `1` followed by `sqrt(n)` for each listed radicand.
    pub fn with_sqrts(radicands: &[u64]) -> Result<Arc<Self>> {
        let mut entries = vec![("1".to_string(), None)];
        entries.extend(radicands.iter().map(|n| (format!("sqrt({n})"), None)));
        Self::new(entries).map(Arc::new)
    }

    /// Builds a basis from labels and optional enclosures. The first label
    /// must be `"1"`; square roots get a computed enclosure when none is
    /// given, opaque labels require one.
    pub fn new(entries: Vec<(String, Option<Interval>)>) -> Result<Self> {
        if entries.first().map(|e| e.0.as_str()) != Some("1") {
            return Err(Error::input("the first symbol must be \"1\""));
        }
        let mut b = SymbolBasis { labels: Vec::new(), monomials: Vec::new(), enclosures: Vec::new() };
        for (label, enc) in entries {
            b.push(label, enc)?;
        }
        Ok(b)
    }

    fn push(&mut self, label: String, enc: Option<Interval>) -> Result<()> {
        let (mono, computed) = parse_label(&label)?;
        if let Some((lo, hi)) = &enc {
            if lo > hi {
                return Err(Error::input(format!("empty enclosure for {label}")));
            }
        }
        let enc = match (enc, computed) {
            (Some(e), Some(c)) => {
                // A declared enclosure must contain the true value.
                if !mono.is_unit() {
                    let n = Q::from_integer(mono.radicand());
                    if e.0.is_negative() || &e.0 * &e.0 > n || &e.1 * &e.1 < n {
                        return Err(Error::input(format!("enclosure for {label} excludes its value")));
                    }
                } else if e != c {
                    return Err(Error::input("the enclosure of \"1\" must be [1,1]"));
                }
                e
            }
            (None, Some(c)) => c,
            (Some(e), None) => e,
            (None, None) => return Err(Error::input(format!("opaque symbol {label} needs an enclosure"))),
        };
        if let Some(i) = self.monomials.iter().position(|m| *m == mono) {
            return Err(Error::input(format!("symbols {} and {label} are not independent", self.labels[i])));
        }
        self.labels.push(label);
        self.monomials.push(mono);
        self.enclosures.push(enc);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn enclosures(&self) -> &[Interval] {
        &self.enclosures
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.monomials.iter().position(|x| x == m)
    }

    /// Union of two bases, keeping the order of `self` first.
    pub fn merge(a: &Arc<Self>, b: &Arc<Self>) -> Result<Arc<Self>> {
        if Arc::ptr_eq(a, b) || a == b {
            return Ok(a.clone());
        }
        let mut out = (**a).clone();
        for i in 0..b.len() {
            match out.index_of(&b.monomials[i]) {
                Some(j) => {
                    if out.monomials[j].op.is_empty() {
                        continue;
                    }
                    if out.enclosures[j] != b.enclosures[i] {
                        return Err(Error::input(format!("inconsistent enclosures for symbol {}", b.labels[i])));
                    }
                }
                None => {
                    out.labels.push(b.labels[i].clone());
                    out.monomials.push(b.monomials[i].clone());
                    out.enclosures.push(b.enclosures[i].clone());
                }
            }
        }
        if out == **a {
            return Ok(a.clone());
        }
        Ok(Arc::new(out))
    }

    /// Adds monomials that occur in a computed result but are not yet
    /// named (products of square roots, for example).
    pub fn extended(a: &Arc<Self>, extra: impl IntoIterator<Item = Monomial>) -> Result<Arc<Self>> {
        let mut out = (**a).clone();
        let mut grew = false;
        for m in extra {
            if out.index_of(&m).is_some() {
                continue;
            }
            if !m.op.is_empty() {
                return Err(Error::input(format!("cannot name the product symbol {}", m.label())));
            }
            let enc = sqrt_interval(&m.radicand(), 32);
            out.labels.push(m.label());
            out.monomials.push(m);
            out.enclosures.push(enc);
            grew = true;
        }
        Ok(if grew { Arc::new(out) } else { a.clone() })
    }

    fn opaque_interval(&self, label: &str) -> Interval {
        let m = Monomial::opaque(label);
        let i = self.index_of(&m).expect("opaque symbol is declared");
        self.enclosures[i].clone()
    }

    /// Enclosure of a monomial at refinement round `round`.
    pub fn monomial_interval(&self, m: &Monomial, round: u32) -> Interval {
        let sq_part = Monomial { sq: m.sq, op: Vec::new() };
        let mut acc = if m.sq == 0 {
            (Q::one(), Q::one())
        } else {
            let declared = self.index_of(&sq_part).map(|i| self.enclosures[i].clone());
            match (round, declared) {
                (0, Some(d)) => d,
                (r, d) => {
                    let c = sqrt_interval(&m.radicand(), 16u32 << r.min(MAX_ROUND));
                    match d {
                        Some(d) => (c.0.max(d.0), c.1.min(d.1)),
                        None => c,
                    }
                }
            }
        };
        for l in &m.op {
            acc = interval_mul(&acc, &self.opaque_interval(l));
        }
        acc
    }

    pub fn check_declared(&self, m: &Monomial) -> Result<()> {
        for l in &m.op {
            if self.index_of(&Monomial::opaque(l)).is_none() {
                return Err(Error::input(format!("undeclared symbol {l}")));
            }
        }
        Ok(())
    }

    pub fn enclosure_strings(&self) -> Vec<[String; 2]> {
        self.enclosures.iter().map(|(lo, hi)| [fmt_q(lo), fmt_q(hi)]).collect()
    }
}

fn parse_label(label: &str) -> Result<(Monomial, Option<Interval>)> {
    let label = label.trim();
    if label == "1" {
        return Ok((Monomial::unit(), Some((Q::one(), Q::one()))));
    }
    if let Some(inner) = label.strip_prefix("sqrt(").and_then(|s| s.strip_suffix(')')) {
        let n: u64 = inner.trim().parse().map_err(|_| Error::input(format!("bad radicand in {label}")))?;
        let m = Monomial::sqrt(n)?;
        let enc = sqrt_interval(&BigInt::from(n), 32);
        return Ok((m, Some(enc)));
    }
    let ok = !label.is_empty()
        && label.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
        && !label.chars().next().unwrap().is_ascii_digit();
    if !ok {
        return Err(Error::input(format!("unsupported symbol label {label:?}")));
    }
    Ok((Monomial::opaque(label), None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;

    #[test]
    fn sqrt_atoms_multiply() {
        let a = Monomial::sqrt(6).unwrap();
        let b = Monomial::sqrt(10).unwrap();
        let (f, m) = a.mul(&b);
        assert_eq!(f, BigInt::from(2));
        assert_eq!(m, Monomial::sqrt(15).unwrap());
        let (f, m) = a.mul(&a);
        assert_eq!(f, BigInt::from(6));
        assert!(m.is_unit());
        assert!(Monomial::sqrt(12).is_err());
    }

    #[test]
    fn refinement_is_nested() {
        let b = SymbolBasis::with_sqrts(&[2]).unwrap();
        let m = Monomial::sqrt(2).unwrap();
        let mut prev = b.monomial_interval(&m, 0);
        for r in 1..6 {
            let cur = b.monomial_interval(&m, r);
            assert!(cur.0 >= prev.0 && cur.1 <= prev.1);
            prev = cur;
        }
        assert!(&prev.0 * &prev.0 <= q(2) && &prev.1 * &prev.1 >= q(2));
    }

    #[test]
    fn rejects_dependent_and_bad_symbols() {
        let e = |l: &str| (l.to_string(), None);
        assert!(SymbolBasis::new(vec![e("1"), e("sqrt(2)"), e("sqrt(2)")]).is_err());
        assert!(SymbolBasis::new(vec![e("sqrt(2)")]).is_err());
        assert!(SymbolBasis::new(vec![e("1"), e("pi")]).is_err());
        let wrong = Some((q(2), q(3)));
        assert!(SymbolBasis::new(vec![e("1"), ("sqrt(2)".into(), wrong)]).is_err());
    }
}

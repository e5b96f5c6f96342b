//! Scalar fields used by the exact kernels.
//!
//! Everything that decides a mathematical statement runs over [`Q`]. The
//! prime field [`Fp`] is only used for rank certificates: a rank computed
//! modulo a prime is a lower bound for the rank of the same integral data
//! over the rationals.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"`. Decimal points are rejected.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::input(format!("malformed rational {s:?}"));
    if s.contains('.') || s.is_empty() {
        return Err(bad());
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Canonical `"p/q"` form; integers print without a denominator.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn q_to_f64(x: &Q) -> f64 {
    // Shift large operands down first so the quotient stays finite.
    let n = x.numer();
    let d = x.denom();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    if nb < 1000 && db < 1000 {
        return n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN);
    }
    let shift = (nb.max(db) - 900).max(0) as usize;
    let ns = (n >> shift).to_f64().unwrap_or(0.0);
    let ds = (d >> shift).to_f64().unwrap_or(0.0);
    if ds == 0.0 {
        return if n.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    ns / ds
}

/// Largest integer `<= x`.
pub fn floor_q(x: &Q) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn ceil_q(x: &Q) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

/// An upper bound for `sqrt(x)`, `x >= 0`, exact when `x` is a perfect square.
pub fn sqrt_upper(x: &Q) -> Q {
    // sqrt(n/d) = sqrt(n d) / d, and isqrt(m) + 1 > sqrt(m).
    let m = x.numer() * x.denom();
    let s = m.sqrt();
    if &s * &s == m {
        Q::new(s, x.denom().clone())
    } else {
        Q::new(s + 1, x.denom().clone())
    }
}

/// The operations the generic linear algebra needs.
pub trait Field: Clone + PartialEq + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse; callers guarantee `self != 0`.
    fn inv(&self) -> Self;
    /// Image of a rational number, `None` when its denominator is not invertible.
    fn from_q(x: &Q) -> Option<Self>;
    fn from_int(n: &BigInt) -> Self;
}

impl Field for Q {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        self.recip()
    }
    fn from_q(x: &Q) -> Option<Self> {
        Some(x.clone())
    }
    fn from_int(n: &BigInt) -> Self {
        Q::from_integer(n.clone())
    }
}

/// Residues modulo the Mersenne prime 2^61 - 1.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, PartialOrd, Ord)]
pub struct Fp(pub u64);

pub const FP_MODULUS: u64 = (1 << 61) - 1;

impl Fp {
    pub fn new(x: u64) -> Self {
        Fp(x % FP_MODULUS)
    }

    fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

impl Field for Fp {
    fn zero() -> Self {
        Fp(0)
    }
    fn one() -> Self {
        Fp(1)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn add(&self, o: &Self) -> Self {
        let s = self.0 + o.0;
        Fp(if s >= FP_MODULUS { s - FP_MODULUS } else { s })
    }
    fn sub(&self, o: &Self) -> Self {
        if self.0 >= o.0 {
            Fp(self.0 - o.0)
        } else {
            Fp(self.0 + FP_MODULUS - o.0)
        }
    }
    fn mul(&self, o: &Self) -> Self {
        let p = (self.0 as u128) * (o.0 as u128);
        let lo = (p as u64) & FP_MODULUS;
        let hi = (p >> 61) as u64;
        let s = lo + hi;
        Fp(if s >= FP_MODULUS { s - FP_MODULUS } else { s })
    }
    fn neg(&self) -> Self {
        if self.0 == 0 {
            *self
        } else {
            Fp(FP_MODULUS - self.0)
        }
    }
    fn inv(&self) -> Self {
        self.pow(FP_MODULUS - 2)
    }
    fn from_q(x: &Q) -> Option<Self> {
        let d = Fp::from_int(x.denom());
        if d.is_zero() {
            return None;
        }
        Some(Fp::from_int(x.numer()).mul(&d.inv()))
    }
    fn from_int(n: &BigInt) -> Self {
        let m = BigInt::from(FP_MODULUS);
        let r = n.mod_floor(&m);
        Fp(r.to_u64().expect("residue fits"))
    }
}

//! Integral isometries: reflections, loxodromic classification, leading
//! isotropic eigenvectors, power iteration and random-walk orbit traces.
//!
//! Classification and eigenvectors are exact. Power iteration and orbit
//! traces run in double precision and are diagnostics only.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{q, q_to_f64, Q};
use crate::error::{Error, Result};
use crate::lattice::QuadLattice;
use crate::linalg;
use crate::poly::{self, QPoly, QuotientRing};
use crate::symbols::{Interval, SymbolBasis, PRIMES};
use crate::vector::{bbf_norm, SymbolicVector};

/// An integer matrix `g` (acting on column vectors) with `g^T G g = G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeIsometry {
    matrix: Vec<Vec<i64>>,
}

impl LatticeIsometry {
    pub fn new(lat: &QuadLattice, matrix: Vec<Vec<i64>>) -> Result<Self> {
        if !lat.preserves(&matrix) {
            return Err(Error::input("matrix does not preserve the lattice form"));
        }
        Ok(LatticeIsometry { matrix })
    }

    pub fn identity(d: usize) -> Self {
        LatticeIsometry { matrix: (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect() }
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim())
    }

    /// `self ∘ other`, failing on overflow.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let d = self.dim();
        let mut m = vec![vec![0i64; d]; d];
        for i in 0..d {
            for j in 0..d {
                let mut s = 0i128;
                for k in 0..d {
                    s += self.matrix[i][k] as i128 * other.matrix[k][j] as i128;
                }
                m[i][j] = i64::try_from(s).map_err(|_| Error::Budget("matrix entries overflow".into()))?;
            }
        }
        Ok(LatticeIsometry { matrix: m })
    }

    pub fn pow(&self, mut k: u64) -> Result<Self> {
        let mut acc = Self::identity(self.dim());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.compose(&base)?;
            }
        }
        Ok(acc)
    }

    /// `g^{-1} = G^{-1} g^T G`.
    pub fn inverse(&self, lat: &QuadLattice) -> Result<Self> {
        let g = lat.gram_q();
        let ginv = linalg::inverse(g).expect("nondegenerate lattice");
        let mt: Vec<Vec<Q>> = linalg::transpose(&linalg::int_to_q(&self.matrix));
        let inv = linalg::mat_mul(&linalg::mat_mul(&ginv, &mt), g);
        let matrix = inv
            .iter()
            .map(|r| r.iter().map(|x| x.to_integer().to_i64().expect("inverse entries fit")).collect())
            .collect();
        LatticeIsometry::new(lat, matrix)
    }

    pub fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.iter().map(|r| r.iter().zip(x).map(|(&a, b)| a as f64 * b).sum()).collect()
    }

    pub fn apply(&self, x: &SymbolicVector) -> SymbolicVector {
        x.apply(&linalg::int_to_q(&self.matrix))
    }
}

/// `x ↦ x − 2 q(x,δ)/q(δ) δ`, required to be integral on the basis.
pub fn reflection(lat: &QuadLattice, delta: &[Q]) -> Result<LatticeIsometry> {
    let d = lat.rank();
    if delta.len() != d {
        return Err(Error::input("reflection vector has the wrong length"));
    }
    let qd = lat.norm(delta);
    if qd.is_zero() {
        return Err(Error::input("reflection vector is isotropic"));
    }
    let mut m = vec![vec![0i64; d]; d];
    for j in 0..d {
        let mut e = vec![Q::zero(); d];
        e[j] = Q::one();
        let c = q(2) * lat.pair(&e, delta) / &qd;
        for i in 0..d {
            let v = &e[i] - &c * &delta[i];
            if !v.is_integer() {
                return Err(Error::input("reflection is not integral"));
            }
            m[i][j] = v.to_integer().to_i64().ok_or_else(|| Error::input("reflection entries too large"))?;
        }
    }
    LatticeIsometry::new(lat, m)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    Elliptic {
        order: u64,
    },
    Parabolic,
    /// `lambda` encloses the spectral radius; `negative` means the
    /// dominant eigenvalue is `-lambda`.
    Loxodromic {
        lambda: Interval,
        negative: bool,
    },
}

impl Classification {
    pub fn kind(&self) -> &'static str {
        match self {
            Classification::Elliptic { .. } => "elliptic",
            Classification::Parabolic => "parabolic",
            Classification::Loxodromic { .. } => "loxodromic",
        }
    }
}

/// Exact data behind a classification.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub charpoly: Vec<BigInt>,
    /// Cyclotomic orders dividing the characteristic polynomial, with
    /// multiplicity.
    pub cyclotomic: Vec<u64>,
    /// Cofactor after removing cyclotomic factors (monic, over Q).
    pub rest: QPoly,
}

pub fn spectrum(g: &LatticeIsometry) -> Spectrum {
    let charpoly = poly::charpoly(g.matrix());
    let (cyclotomic, rest) = poly::strip_cyclotomic(&poly::to_q(&charpoly));
    Spectrum { charpoly, cyclotomic, rest }
}

fn root_bits(budget: u32) -> u32 {
    2 * budget + 32
}

/// Elliptic iff every eigenvalue is a root of unity and `g` has finite
/// order; loxodromic iff some eigenvalue lies off the unit circle. By
/// Kronecker's theorem the second case is exactly a non-cyclotomic factor
/// of the characteristic polynomial.
pub fn classify(g: &LatticeIsometry, budget: u32) -> Result<Classification> {
    let sp = spectrum(g);
    if poly::degree(&sp.rest) == 0 {
        let n = poly::lcm_all(&sp.cyclotomic);
        let finite = |k: u64| -> Result<bool> {
            match g.pow(k) {
                Ok(p) => Ok(p.is_identity()),
                Err(_) => Err(Error::Indeterminate(format!("order search overflowed at exponent {k}"))),
            }
        };
        if !finite(n)? {
            return Ok(Classification::Parabolic);
        }
        let order = (1..=n).filter(|k| n.is_multiple_of(*k)).find(|&k| finite(k).unwrap_or(false)).unwrap_or(n);
        return Ok(Classification::Elliptic { order });
    }
    let bits = root_bits(budget);
    let pos = poly::largest_root_above(&sp.rest, &q(1), bits);
    let neg_poly: QPoly =
        sp.rest.iter().enumerate().map(|(i, c)| if i % 2 == 1 { -c.clone() } else { c.clone() }).collect();
    let neg = poly::largest_root_above(&neg_poly, &q(1), bits);
    match (pos, neg) {
        (Some(p), Some(n)) if n.0 > p.1 => Ok(Classification::Loxodromic { lambda: n, negative: true }),
        (Some(p), _) => Ok(Classification::Loxodromic { lambda: p, negative: false }),
        (None, Some(n)) => Ok(Classification::Loxodromic { lambda: n, negative: true }),
        (None, None) => Err(Error::Indeterminate("spectral radius is attained only by non-real eigenvalues".into())),
    }
}

/// Eigenvector for the dominant eigenvalue `r` of a loxodromic isometry.
#[derive(Clone, Debug)]
pub struct ParabolicEigen {
    /// Enclosure of the eigenvalue `r` itself (negative when the dominant
    /// eigenvalue is negative).
    pub eigenvalue: Interval,
    /// Monic squarefree polynomial with `r` as a root; coordinates live in
    /// `Q[x]/(modulus)` with `x = r`.
    pub modulus: QPoly,
    pub coords: Vec<QPoly>,
    /// Exact when the eigenvalue is quadratic, otherwise a rational
    /// approximation.
    pub eta: SymbolicVector,
    pub exact: bool,
    pub certificate: EigenCertificate,
}

#[derive(Clone, Debug)]
pub struct EigenCertificate {
    /// Enclosures of the entries of `g η − r η` (maximum modulus).
    pub eigen_residual: Interval,
    /// Enclosure of `q(η, η)`.
    pub norm_residual: Interval,
    /// Both residuals vanish identically in `Q[x]/(modulus)`.
    pub exact_zero: bool,
}

impl ParabolicEigen {
    pub fn eta_f64(&self) -> Vec<f64> {
        self.coords
            .iter()
            .map(|c| {
                let (lo, hi) = poly::eval_interval(c, &self.eigenvalue);
                (q_to_f64(&lo) + q_to_f64(&hi)) / 2.0
            })
            .collect()
    }
}

fn contains_zero(iv: &Interval) -> bool {
    !iv.0.is_positive() && !iv.1.is_negative()
}

fn hull(a: &Interval, b: &Interval) -> Interval {
    (a.0.clone().min(b.0.clone()), a.1.clone().max(b.1.clone()))
}

/// Exact eigenvector via Cayley–Hamilton: with `f(X) = (X − r) h(X)` over
/// `Q(r)`, every column of `h(g)` is killed by `g − r`.
pub fn leading_parabolic_class(lat: &QuadLattice, g: &LatticeIsometry, budget: u32) -> Result<ParabolicEigen> {
    let (lambda, negative) = match classify(g, budget)? {
        Classification::Loxodromic { lambda, negative } => (lambda, negative),
        other => return Err(Error::Precondition(format!("isometry is {}, not loxodromic", other.kind()))),
    };
    let sp = spectrum(g);
    let modulus = poly::squarefree(&sp.rest);
    let ring = QuotientRing::new(modulus.clone());
    let r_iv = if negative { (-lambda.1.clone(), -lambda.0.clone()) } else { lambda.clone() };
    let f = poly::to_q(&sp.charpoly);
    let n = f.len() - 1;
    let x = ring.x();
    // Synthetic division of f by (X − x) with coefficients in the ring.
    let mut h: Vec<QPoly> = vec![Vec::new(); n];
    h[n - 1] = vec![f[n].clone()];
    for k in (1..n).rev() {
        h[k - 1] = poly::add(&[f[k].clone()], &ring.mul(&x, &h[k]));
    }
    let rem = ring.reduce(&poly::add(&[f[0].clone()], &ring.mul(&x, &h[0])));
    debug_assert!(rem.is_empty());
    let d = g.dim();
    let m = g.matrix();
    for j in 0..d {
        // η = h(g) e_j by Horner.
        let mut eta: Vec<QPoly> = vec![Vec::new(); d];
        for k in (0..n).rev() {
            let mut next: Vec<QPoly> = (0..d)
                .map(|i| {
                    let mut s: QPoly = Vec::new();
                    for (l, e) in eta.iter().enumerate() {
                        if m[i][l] != 0 && !e.is_empty() {
                            s = poly::add(&s, &poly::scale(e, &q(m[i][l])));
                        }
                    }
                    s
                })
                .collect();
            next[j] = poly::add(&next[j], &h[k]);
            eta = next;
        }
        let eta: Vec<QPoly> = eta.iter().map(|c| ring.reduce(c)).collect();
        let ivs: Vec<Interval> = eta.iter().map(|c| poly::eval_interval(c, &r_iv)).collect();
        if ivs.iter().all(contains_zero) {
            continue;
        }
        return finish(lat, g, &ring, modulus, r_iv, eta);
    }
    Err(Error::Indeterminate("could not certify a nonzero eigenvector".into()))
}

fn finish(
    lat: &QuadLattice,
    g: &LatticeIsometry,
    ring: &QuotientRing,
    modulus: QPoly,
    r_iv: Interval,
    mut eta: Vec<QPoly>,
) -> Result<ParabolicEigen> {
    // Orientation: first coordinate bounded away from zero is positive.
    let first = eta.iter().map(|c| poly::eval_interval(c, &r_iv)).find(|iv| !contains_zero(iv));
    if first.is_some_and(|iv| iv.1.is_negative()) {
        eta = eta.iter().map(|c| poly::scale(c, &q(-1))).collect();
    }
    let d = eta.len();
    let m = g.matrix();
    let x = ring.x();
    let mut exact_zero = true;
    let mut eig_res = (Q::zero(), Q::zero());
    for i in 0..d {
        let mut s: QPoly = Vec::new();
        for l in 0..d {
            if m[i][l] != 0 {
                s = poly::add(&s, &poly::scale(&eta[l], &q(m[i][l])));
            }
        }
        let res = ring.reduce(&poly::sub(&s, &ring.mul(&x, &eta[i])));
        exact_zero &= res.is_empty();
        eig_res = hull(&eig_res, &poly::eval_interval(&res, &r_iv));
    }
    let gram = lat.gram_q();
    let mut qn: QPoly = Vec::new();
    for i in 0..d {
        for l in 0..d {
            if !gram[i][l].is_zero() {
                qn = poly::add(&qn, &poly::scale(&ring.mul(&eta[i], &eta[l]), &gram[i][l]));
            }
        }
    }
    let qn = ring.reduce(&qn);
    exact_zero &= qn.is_empty();
    let norm_res = poly::eval_interval(&qn, &r_iv);
    let (eta_vec, exact) = match quadratic_vector(&modulus, &r_iv, &eta) {
        Some(v) => (v, true),
        None => {
            let approx = eta
                .iter()
                .map(|c| {
                    let (lo, hi) = poly::eval_interval(c, &r_iv);
                    (lo + hi) / q(2)
                })
                .collect();
            (SymbolicVector::rational(approx), false)
        }
    };
    Ok(ParabolicEigen {
        eigenvalue: r_iv,
        modulus,
        coords: eta,
        eta: eta_vec,
        exact,
        certificate: EigenCertificate { eigen_residual: eig_res, norm_residual: norm_res, exact_zero },
    })
}

/// Writes `n = k^2 s` with `s` squarefree over the tabulated primes.
fn square_part(n: &BigInt) -> Option<(BigInt, u64)> {
    let mut rest = n.clone();
    let mut k = BigInt::one();
    let mut s = 1u64;
    for &p in PRIMES.iter() {
        let p = BigInt::from(p);
        let mut e = 0;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            k *= &p;
        }
        if e % 2 == 1 {
            s *= p.to_u64()?;
        }
    }
    let r = rest.sqrt();
    if &r * &r != rest {
        return None;
    }
    Some((k * r, s))
}

/// For quadratic `r`, rewrites `α + β r` as `a + b sqrt(s)` exactly.
fn quadratic_vector(modulus: &[Q], r_iv: &Interval, eta: &[QPoly]) -> Option<SymbolicVector> {
    if poly::degree(modulus) != 2 {
        return None;
    }
    let (c, b) = (&modulus[0], &modulus[1]);
    let disc = b * b - q(4) * c;
    if !disc.is_positive() {
        return None;
    }
    // sqrt(disc) = sqrt(num * den) / den = k sqrt(s) / den.
    let (num, den) = (disc.numer().clone(), disc.denom().clone());
    let (k, s) = square_part(&(num * &den))?;
    if s == 1 {
        return None;
    }
    let centre = -b / q(2);
    let sigma = if r_iv.0 >= centre { q(1) } else { q(-1) };
    let root_coeff = sigma * Q::new(k, den) / q(2);
    let basis = SymbolBasis::with_sqrts(&[s]).ok()?;
    let mut rat = Vec::with_capacity(eta.len());
    let mut irr = Vec::with_capacity(eta.len());
    for e in eta {
        let alpha = e.first().cloned().unwrap_or_default();
        let beta = e.get(1).cloned().unwrap_or_default();
        rat.push(alpha + &beta * &centre);
        irr.push(beta * &root_coeff);
    }
    SymbolicVector::from_columns(basis, vec![rat, irr]).ok()
}

/// Angle between the lines spanned by `x` and `y`, as
/// `atan2(|x ∧ y|, |x · y|)` in the standard coordinates. The wedge norm is
/// summed from 2×2 minors so small angles keep full relative precision.
pub fn projective_distance(x: &[f64], y: &[f64]) -> f64 {
    let mut w = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let m = x[i] * y[j] - x[j] * y[i];
            w += m * m;
        }
    }
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    w.sqrt().atan2(dot.abs())
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerTrace {
    pub distances: Vec<f64>,
    /// `1/λ`, the contraction rate expected on hyperbolic lattices.
    pub expected_ratio: f64,
    pub warnings: Vec<String>,
}

/// Distances from `g^k seed` to the dominant eigenline, `k = 0..=steps`.
pub fn power_iteration(
    lat: &QuadLattice,
    g: &LatticeIsometry,
    seed: &SymbolicVector,
    steps: usize,
    budget: u32,
) -> Result<PowerTrace> {
    if seed.dim() != g.dim() {
        return Err(Error::input("seed has the wrong dimension"));
    }
    let plus = leading_parabolic_class(lat, g, budget)?;
    let minus = leading_parabolic_class(lat, &g.inverse(lat)?, budget)?;
    let eta = plus.eta_f64();
    let eta_minus = minus.eta_f64();
    let mut x = seed.approx();
    let mut warnings = Vec::new();
    // The component of x along η⁺ is proportional to q(x, η⁻).
    let gram = lat.gram();
    let pair = |a: &[f64], b: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..a.len() {
            for j in 0..b.len() {
                s += a[i] * gram[i][j] as f64 * b[j];
            }
        }
        s
    };
    let norm = |a: &[f64]| a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let gnorm: f64 = gram.iter().flatten().map(|&v| (v as f64).abs()).sum();
    if pair(&x, &eta_minus).abs() <= 1e-12 * gnorm * norm(&x) * norm(&eta_minus) {
        warnings.push("seed lies numerically in the excluded subspace; convergence relies on rounding".into());
    }
    normalize(&mut x);
    let mut distances = vec![projective_distance(&x, &eta)];
    for _ in 0..steps {
        x = g.apply_f64(&x);
        normalize(&mut x);
        distances.push(projective_distance(&x, &eta));
    }
    if steps > 0 && distances.last().is_some_and(|&d| d > 1e-6) {
        warnings.push("no convergence to the dominant eigenline within the step budget".into());
    }
    let lam = (q_to_f64(&plus.eigenvalue.0) + q_to_f64(&plus.eigenvalue.1)) / 2.0;
    Ok(PowerTrace { distances, expected_ratio: 1.0 / lam.abs(), warnings })
}

#[derive(Clone, Debug)]
pub struct OrbitConfig {
    pub steps: u64,
    pub epsilon: f64,
    pub seed: u64,
    pub chains: u32,
    /// Words are restarted from `η` once they reach this length.
    pub max_word: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OrbitTrace {
    pub steps: u64,
    pub min_projective_distance: f64,
    /// Letters in application order: `i + 1` is generator `i`, `-(i + 1)`
    /// its inverse.
    pub witness_word: Vec<i64>,
    pub seed: u64,
    pub chains: u32,
    pub max_word: usize,
    pub epsilon: f64,
    /// First step at which some chain came within `epsilon`.
    pub first_hit: Option<u64>,
    /// Pointwise minimum over chains at checkpoint steps.
    pub history: Vec<(u64, f64)>,
}

fn checkpoints(steps: u64) -> Vec<u64> {
    let mut out = vec![0];
    let mut p = 1u64;
    while p <= steps {
        for m in [1, 2, 5] {
            if p * m <= steps {
                out.push(p * m);
            }
        }
        p = p.saturating_mul(10);
    }
    if *out.last().unwrap() != steps {
        out.push(steps);
    }
    out
}

struct Chain {
    best: f64,
    word: Vec<i64>,
    first_hit: Option<u64>,
    history: Vec<f64>,
}

/// Random walk over words in the generators and their inverses, applied to
/// `eta`, recording the smallest projective distance to `target`.
pub fn orbit_dichotomy_experiment(
    lat: &QuadLattice,
    gens: &[LatticeIsometry],
    eta: &SymbolicVector,
    target: &SymbolicVector,
    cfg: &OrbitConfig,
) -> Result<OrbitTrace> {
    let (p, n) = lat.signature()?;
    if p != 1 || n < 2 {
        return Err(Error::input(format!("orbit experiment needs signature (1, n) with n >= 2, got ({p}, {n})")));
    }
    if gens.is_empty() {
        return Err(Error::input("no generators"));
    }
    if gens.iter().any(|g| !lat.preserves(g.matrix())) {
        return Err(Error::input("a generator does not preserve the lattice"));
    }
    for (name, v) in [("start", eta), ("target", target)] {
        if v.dim() != lat.rank() {
            return Err(Error::input(format!("{name} class has the wrong dimension")));
        }
        if !bbf_norm(lat, v)?.is_zero() {
            return Err(Error::input(format!("{name} class is not isotropic")));
        }
    }
    if cfg.chains == 0 || cfg.max_word == 0 {
        return Err(Error::Config("chains and word length must be positive".into()));
    }
    let mut letters: Vec<LatticeIsometry> = Vec::new();
    for g in gens {
        letters.push(g.clone());
    }
    for g in gens {
        letters.push(g.inverse(lat)?);
    }
    let k = gens.len();
    let label = |l: usize| if l < k { l as i64 + 1 } else { -((l - k) as i64 + 1) };
    let mut start = eta.approx();
    normalize(&mut start);
    let mut tgt = target.approx();
    normalize(&mut tgt);
    let marks = checkpoints(cfg.steps);
    let run = |c: u32| -> Chain {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(c as u64);
        let mut x = start.clone();
        let mut word: Vec<usize> = Vec::new();
        let mut best = projective_distance(&x, &tgt);
        let mut best_word = Vec::new();
        let mut first_hit = (best < cfg.epsilon).then_some(0);
        let mut history = vec![best];
        let mut mark = 1;
        for step in 1..=cfg.steps {
            if word.len() == cfg.max_word {
                x = start.clone();
                word.clear();
            }
            let l = rng.gen_range(0..letters.len());
            x = letters[l].apply_f64(&x);
            normalize(&mut x);
            word.push(l);
            let dist = projective_distance(&x, &tgt);
            if dist < best {
                best = dist;
                best_word = word.iter().map(|&l| label(l)).collect();
            }
            if first_hit.is_none() && dist < cfg.epsilon {
                first_hit = Some(step);
            }
            while mark < marks.len() && marks[mark] == step {
                history.push(best);
                mark += 1;
            }
        }
        Chain { best, word: best_word, first_hit, history }
    };
    let results: Vec<Chain> = (0..cfg.chains).into_par_iter().map(run).collect();
    let mut best = &results[0];
    for r in &results[1..] {
        if r.best < best.best {
            best = r;
        }
    }
    let history = marks
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, results.iter().map(|r| r.history[i]).fold(f64::INFINITY, f64::min)))
        .collect();
    Ok(OrbitTrace {
        steps: cfg.steps,
        min_projective_distance: best.best,
        witness_word: best.word.clone(),
        seed: cfg.seed,
        chains: cfg.chains,
        max_word: cfg.max_word,
        epsilon: cfg.epsilon,
        first_hit: results.iter().filter_map(|r| r.first_hit).min(),
        history,
    })
}

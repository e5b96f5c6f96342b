//! Dense exact linear algebra over a [`Field`], plus the integer routines
//! (saturation, LLL) used by lattice enumeration.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{Field, Q};

pub type Mat<C> = Vec<Vec<C>>;

pub fn zeros<C: Field>(r: usize, c: usize) -> Mat<C> {
    vec![vec![C::zero(); c]; r]
}

pub fn identity<C: Field>(n: usize) -> Mat<C> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C::one();
    }
    m
}

pub fn transpose<C: Clone>(m: &[Vec<C>]) -> Mat<C> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_mul<C: Field>(a: &[Vec<C>], b: &[Vec<C>]) -> Mat<C> {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            let mut out = vec![C::zero(); cols];
            for k in 0..inner {
                if row[k].is_zero() {
                    continue;
                }
                for (j, o) in out.iter_mut().enumerate() {
                    if !b[k][j].is_zero() {
                        *o = o.add(&row[k].mul(&b[k][j]));
                    }
                }
            }
            out
        })
        .collect()
}

pub fn mat_vec<C: Field>(a: &[Vec<C>], v: &[C]) -> Vec<C> {
    a.iter().map(|row| dot(row, v)).collect()
}

pub fn dot<C: Field>(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).fold(C::zero(), |acc, (x, y)| acc.add(&x.mul(y)))
}

/// `a^T G b` for a symmetric Gram matrix `G`.
pub fn form<C: Field>(g: &[Vec<C>], a: &[C], b: &[C]) -> C {
    dot(a, &mat_vec(g, b))
}

pub fn to_field<C: Field>(m: &[Vec<Q>]) -> Option<Mat<C>> {
    m.iter().map(|row| row.iter().map(C::from_q).collect::<Option<Vec<_>>>()).collect()
}

pub fn int_to_q(m: &[Vec<i64>]) -> Mat<Q> {
    m.iter().map(|row| row.iter().map(|&x| Q::from_integer(BigInt::from(x))).collect()).collect()
}

/// Incrementally maintained reduced row echelon basis of a row space.
///
/// Rows are kept fully reduced with unit pivots; `generators` keeps the
/// vectors in the order they were accepted, which is what the Lie closure
/// brackets against.
#[derive(Clone, Debug)]
pub struct Echelon<C: Field> {
    ncols: usize,
    rows: Vec<Vec<C>>,
    pivots: Vec<usize>,
    generators: Vec<Vec<C>>,
}

impl<C: Field> Echelon<C> {
    pub fn new(ncols: usize) -> Self {
        Echelon { ncols, rows: Vec::new(), pivots: Vec::new(), generators: Vec::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ncols
    }

    pub fn rows(&self) -> &[Vec<C>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn generators(&self) -> &[Vec<C>] {
        &self.generators
    }

    /// Residual of `v` after elimination against the current basis.
    pub fn reduce(&self, v: &[C]) -> Vec<C> {
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let f = v[p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x = x.sub(&f.mul(r));
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[C]) -> bool {
        self.reduce(v).iter().all(Field::is_zero)
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub fn insert(&mut self, v: &[C]) -> bool {
        assert_eq!(v.len(), self.ncols, "row length mismatch");
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = r[p].inv();
        for x in r.iter_mut() {
            if !x.is_zero() {
                *x = x.mul(&inv);
            }
        }
        for row in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (x, y) in row.iter_mut().zip(&r) {
                if !y.is_zero() {
                    *x = x.sub(&f.mul(y));
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.rows.insert(at, r);
        self.pivots.insert(at, p);
        self.generators.push(v.to_vec());
        true
    }
}

pub fn rank<C: Field>(rows: &[Vec<C>], ncols: usize) -> usize {
    let mut e = Echelon::new(ncols);
    for r in rows {
        e.insert(r);
    }
    e.rank()
}

/// Basis of `{x : rows . x = 0}` in reduced form: one vector per free
/// column, with a 1 in that column and 0 in the other free columns.
pub fn kernel<C: Field>(rows: &[Vec<C>], ncols: usize) -> Mat<C> {
    let mut e = Echelon::new(ncols);
    for r in rows {
        e.insert(r);
    }
    let pivots = e.pivots().to_vec();
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![C::zero(); ncols];
            v[f] = C::one();
            for (row, &p) in e.rows().iter().zip(&pivots) {
                if !row[f].is_zero() {
                    v[p] = row[f].neg();
                }
            }
            v
        })
        .collect()
}

/// Exact inverse, `None` for singular input.
pub fn inverse<C: Field>(m: &[Vec<C>]) -> Option<Mat<C>> {
    let n = m.len();
    let mut a: Mat<C> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { C::one() } else { C::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        let inv = a[col][col].inv();
        for x in a[col].iter_mut() {
            *x = x.mul(&inv);
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                    *x = x.sub(&f.mul(y));
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn det<C: Field>(m: &[Vec<C>]) -> C {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = C::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return C::zero();
        };
        if p != col {
            a.swap(col, p);
            d = d.neg();
        }
        d = d.mul(&a[col][col]);
        let inv = a[col][col].inv();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].mul(&inv);
            let pivot_row = a[col].clone();
            for (x, y) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                *x = x.sub(&f.mul(y));
            }
        }
    }
    d
}

/// Diagonal entries of a rational congruence diagonalization `P^T S P`.
///
/// Zero diagonal pivots are repaired by adding a row/column pair with a
/// nonzero off-diagonal entry, so no floating point is involved.
pub fn congruence_diagonal(s: &[Vec<Q>]) -> Vec<Q> {
    let n = s.len();
    let mut a = s.to_vec();
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        if Zero::is_zero(&a[k][k]) {
            if let Some(j) = (k + 1..n).find(|&j| !Zero::is_zero(&a[j][j])) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !Zero::is_zero(&a[k][j])) {
                // e_k <- e_k + e_j gives a new diagonal 2 a_kj + a_jj = 2 a_kj.
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[k][c] = &a[k][c] + v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][k] = &a[r][k] + v;
                }
            }
        }
        let p = a[k][k].clone();
        diag.push(p.clone());
        if Zero::is_zero(&p) {
            continue;
        }
        for r in k + 1..n {
            if Zero::is_zero(&a[r][k]) {
                continue;
            }
            let f = &a[r][k] / &p;
            for c in k..n {
                let v = &f * &a[k][c];
                a[r][c] = &a[r][c] - v;
            }
        }
        for c in k + 1..n {
            a[k][c] = <Q as Zero>::zero();
        }
        for r in k + 1..n {
            for c in k + 1..n {
                let v = a[r][c].clone();
                a[c][r] = v;
            }
            a[r][k] = <Q as Zero>::zero();
        }
    }
    diag
}

/// Signs of a diagonalization: (positive, negative, zero) counts.
pub fn inertia(s: &[Vec<Q>]) -> (usize, usize, usize) {
    let d = congruence_diagonal(s);
    let p = d.iter().filter(|x| x.is_positive()).count();
    let m = d.iter().filter(|x| x.is_negative()).count();
    (p, m, d.len() - p - m)
}

/// Clears denominators and removes the content of a rational vector.
pub fn primitive_integer(v: &[Q]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Z-basis of `{x in Z^n : A x = 0}` for an integer matrix `A`.
///
/// Column operations by unimodular transformations bring `A` to column
/// echelon form; the transformation columns that end up under zero columns
/// span the kernel lattice.
pub fn integer_kernel(a: &[Vec<BigInt>], n: usize) -> Vec<Vec<BigInt>> {
    let m = a.len();
    // Work on columns: col[j] = (A e_j, U e_j).
    let mut cols: Vec<(Vec<BigInt>, Vec<BigInt>)> = (0..n)
        .map(|j| {
            let top: Vec<BigInt> = (0..m).map(|i| a[i][j].clone()).collect();
            let mut u = vec![BigInt::zero(); n];
            u[j] = BigInt::one();
            (top, u)
        })
        .collect();
    let mut k = 0;
    for row in 0..m {
        if k == n {
            break;
        }
        loop {
            // Pick the smallest nonzero entry in this row among columns >= k.
            let nz: Vec<usize> = (k..n).filter(|&j| !cols[j].0[row].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            let piv = *nz.iter().min_by_key(|&&j| cols[j].0[row].abs()).unwrap();
            cols.swap(k, piv);
            let mut done = true;
            for j in k + 1..n {
                if cols[j].0[row].is_zero() {
                    continue;
                }
                let f = cols[j].0[row].div_floor(&cols[k].0[row]);
                let (pk_top, pk_u) = cols[k].clone();
                let (top, u) = &mut cols[j];
                for (x, y) in top.iter_mut().zip(&pk_top) {
                    *x -= &f * y;
                }
                for (x, y) in u.iter_mut().zip(&pk_u) {
                    *x -= &f * y;
                }
                if !top[row].is_zero() {
                    done = false;
                }
            }
            if done {
                k += 1;
                break;
            }
        }
    }
    cols.into_iter().skip(k).map(|(_, u)| u).collect()
}

/// Exact LLL reduction of a lattice basis with respect to a positive
/// definite rational Gram matrix. Returns the unimodular change of basis
/// `T` (rows are new basis vectors in old coordinates).
pub fn lll_gram(gram: &[Vec<Q>]) -> Vec<Vec<BigInt>> {
    let n = gram.len();
    let mut t: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    if n <= 1 {
        return t;
    }
    let inner = |t: &Vec<Vec<BigInt>>, i: usize, j: usize| -> Q {
        let a: Vec<Q> = t[i].iter().map(|x| Q::from_integer(x.clone())).collect();
        let b: Vec<Q> = t[j].iter().map(|x| Q::from_integer(x.clone())).collect();
        form(gram, &a, &b)
    };
    let delta = Q::new(BigInt::from(3), BigInt::from(4));
    let half = Q::new(BigInt::one(), BigInt::from(2));
    let gso = |t: &Vec<Vec<BigInt>>| -> (Vec<Vec<Q>>, Vec<Q>) {
        let mut mu = vec![vec![<Q as Zero>::zero(); n]; n];
        let mut b = vec![<Q as Zero>::zero(); n];
        for i in 0..n {
            for j in 0..i {
                let mut s = inner(t, i, j);
                for k in 0..j {
                    s -= &mu[j][k] * &mu[i][k] * &b[k];
                }
                mu[i][j] = s / &b[j];
            }
            let mut s = inner(t, i, i);
            for k in 0..i {
                s -= &mu[i][k] * &mu[i][k] * &b[k];
            }
            b[i] = s;
        }
        (mu, b)
    };
    let (mut mu, mut b) = gso(&t);
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        if guard > 100_000 {
            break;
        }
        for j in (0..k).rev() {
            if mu[k][j].abs() > half {
                let r = (&mu[k][j] + &half).floor().to_integer();
                let tj = t[j].clone();
                for (x, y) in t[k].iter_mut().zip(&tj) {
                    *x -= &r * y;
                }
                let rq = Q::from_integer(r);
                for l in 0..j {
                    let v = &rq * &mu[j][l];
                    mu[k][l] -= v;
                }
                mu[k][j] -= &rq;
            }
        }
        let lhs = &b[k] + &mu[k][k - 1] * &mu[k][k - 1] * &b[k - 1];
        if lhs >= &delta * &b[k - 1] {
            k += 1;
        } else {
            t.swap(k, k - 1);
            let r = gso(&t);
            mu = r.0;
            b = r.1;
            k = (k - 1).max(1);
        }
    }
    t
}

/// Coefficients `a` with `sum_k a_k rows[k] = v`, when `v` is in the span.
/// The rows must be linearly independent.
pub fn solve_in_span<C: Field>(rows: &[Vec<C>], v: &[C]) -> Option<Vec<C>> {
    let k = rows.len();
    let d = v.len();
    // Columns are rows[0], ..., rows[k-1], v.
    let m: Mat<C> = (0..d)
        .map(|i| {
            let mut r: Vec<C> = rows.iter().map(|x| x[i].clone()).collect();
            r.push(v[i].clone());
            r
        })
        .collect();
    let ker = kernel(&m, k + 1);
    let x = ker.into_iter().find(|x| !x[k].is_zero())?;
    let s = x[k].neg().inv();
    Some(x[..k].iter().map(|c| c.mul(&s)).collect())
}

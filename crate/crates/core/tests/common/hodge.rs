//! Hodge setups with known clause outcomes.

use num_traits::Zero;
use parabolic::arith::{q, Q};
use parabolic::presets::{load_preset, PresetKey};
use parabolic::rigidity::HodgeSetup;
use parabolic::{QuadLattice, SymbolicVector};
use rand_chacha::ChaCha8Rng;

use super::{dsum, fresh_primes, twisted_full, u_block, unit, Twisted};

pub struct Instance {
    pub setup: HodgeSetup,
    pub u: SymbolicVector,
}

pub fn setup(lat: QuadLattice, plane: Vec<SymbolicVector>, kahler: SymbolicVector, m: u64) -> HodgeSetup {
    HodgeSetup {
        lattice: lat,
        period_plane: plane,
        kahler_ref: kahler,
        mbm_bound: m,
        ns_rank_hint: None,
        projective_flag: None,
        no_mbm_in_h11_flag: None,
    }
}

fn from_twisted(t: &Twisted, rng: &mut ChaCha8Rng, m: u64) -> Instance {
    let (l, h) = t.instance(rng, 2);
    let plane = l.iter().map(|x| t.to_vec(x)).collect();
    Instance { setup: setup(t.lat.clone(), plane, t.to_vec(&h), m), u: t.to_vec(&t.u_prime()) }
}

/// `U^3 + <-2>`, signature (3, 4).
pub fn u3_minus2() -> QuadLattice {
    QuadLattice::new(dsum(&[u_block(), u_block(), u_block(), vec![vec![-2]]])).unwrap()
}

pub fn k3() -> QuadLattice {
    load_preset(PresetKey::K3).unwrap()
}

/// Strongly irrational `u` on the whole lattice, which must start with a
/// hyperbolic plane orthogonal to the remaining coordinates.
pub fn strongly_irrational(lat: QuadLattice, rng: &mut ChaCha8Rng) -> Instance {
    let d = lat.rank();
    let t = twisted_full(lat, &fresh_primes(rng, d));
    from_twisted(&t, rng, 2)
}

/// K3 with rational kernel `N = <e1 - 2 f1>`, `q = -4`.
pub fn k3_negative_kernel(rng: &mut ChaCha8Rng) -> (Instance, Vec<Q>) {
    let lat = k3();
    let d = lat.rank();
    let n: Vec<Q> = (0..d).map(|i| [q(1), q(-2)].get(i).cloned().unwrap_or_else(Q::zero)).collect();
    let mut rest = vec![(0..d).map(|i| [q(1), q(2)].get(i).cloned().unwrap_or_else(Q::zero)).collect()];
    rest.extend((4..d).map(|i| unit(i, d)));
    let t = Twisted::new(lat, unit(2, d), unit(3, d), rest, &fresh_primes(rng, d - 1));
    (from_twisted(&t, rng, 2), n)
}

/// `U^3 + <-2>` with kernel `<v>`, `v = e3 + f3` lying in the period plane.
pub fn kernel_in_plane(rng: &mut ChaCha8Rng) -> (Instance, Vec<Q>) {
    let lat = u3_minus2();
    let d = lat.rank();
    let v: Vec<Q> = (0..d).map(|i| if i == 4 || i == 5 { q(1) } else { q(0) }).collect();
    let w: Vec<Q> = (0..d).map(|i| [q(0), q(0), q(0), q(0), q(1), q(-1), q(0)][i].clone()).collect();
    let rest = vec![unit(2, d), unit(3, d), w, unit(6, d)];
    let t = Twisted::new(lat, unit(0, d), unit(1, d), rest, &fresh_primes(rng, d - 1));
    let (l, h) = t.instance(rng, 1);
    let plane = vec![SymbolicVector::rational(v.clone()), t.to_vec(&l[0])];
    let inst = Instance { setup: setup(t.lat.clone(), plane, t.to_vec(&h), 2), u: t.to_vec(&t.u_prime()) };
    (inst, v)
}

/// K3 with the rational plane `<e1 + f1, e2 + f2>`, Kähler class
/// `e3 + f3` and the rational isotropic class `e3`.
pub fn k3_rational() -> Instance {
    let lat = k3();
    let d = lat.rank();
    let vec_of = |idx: &[usize]| {
        let mut v = vec![0i64; d];
        for &i in idx {
            v[i] = 1;
        }
        SymbolicVector::from_ints(&v)
    };
    let plane = vec![vec_of(&[0, 1]), vec_of(&[2, 3])];
    Instance { setup: setup(lat, plane, vec_of(&[4, 5]), 2), u: vec_of(&[4]) }
}

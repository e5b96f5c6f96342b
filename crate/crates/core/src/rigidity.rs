//! Hypothesis classifier for rigidity of parabolic classes.
//!
//! Given a full lattice of signature `(3, d - 3)`, a positive period plane
//! `L`, a reference Kähler class and an MBM bound, [`classify_parabolic`]
//! decides which of the known sufficient conditions for rigidity applies
//! to an isotropic nef class `u`, and [`density_certificate`] runs the
//! matching Lie-closure computation.

use num_traits::One;
use serde::Serialize;

use crate::arith::Q;
use crate::enumerate;
use crate::error::{Error, Result};
use crate::io::q_rows;
use crate::lattice::{CheckStatus, QuadLattice, Report};
use crate::linalg::{self, Mat};
use crate::scalar::Sign;
use crate::vector::{
    bbf_pair, rational_annihilator, rational_in_real_span, rational_kernel, PairingForm, SymbolicVector,
};
use crate::walls::{self, HyperbolicSlice, NefVerdict, Wall};
use crate::wedge::{self, ClosureVerdict, PeriodPoint, RatnerReport};

/// Minimal `b_2` (and `d - dim N`) for the lattice-theoretic clauses.
pub const DIM_THRESHOLD: usize = 7;

#[derive(Clone, Debug)]
pub struct HodgeSetup {
    pub lattice: QuadLattice,
    pub period_plane: Vec<SymbolicVector>,
    pub kahler_ref: SymbolicVector,
    pub mbm_bound: u64,
    pub ns_rank_hint: Option<usize>,
    pub projective_flag: Option<bool>,
    pub no_mbm_in_h11_flag: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Rigid,
    Inconclusive,
    InvalidInput,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Clause {
    #[serde(rename = "Thm2.1-1")]
    StronglyIrrational,
    #[serde(rename = "Thm2.1-2")]
    KernelInPeriod,
    #[serde(rename = "Thm2.4")]
    NegativeKernel,
    #[serde(rename = "Thm2.5")]
    Projective,
}

impl Clause {
    pub fn label(self) -> &'static str {
        match self {
            Clause::StronglyIrrational => "Thm2.1-1",
            Clause::KernelInPeriod => "Thm2.1-2",
            Clause::NegativeKernel => "Thm2.4",
            Clause::Projective => "Thm2.5",
        }
    }

    /// Restriction mode of the matching density computation.
    pub fn mode(self) -> Option<DensityMode> {
        match self {
            Clause::StronglyIrrational => Some(DensityMode::Full),
            Clause::KernelInPeriod => Some(DensityMode::VRestricted),
            Clause::NegativeKernel => Some(DensityMode::NRestricted),
            Clause::Projective => None,
        }
    }
}

/// Outcome of the local nef test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "wall")]
pub enum NefStatus {
    Nef,
    /// The local wall set could not be computed for this configuration.
    Uncertified,
    NotNef(Wall),
    OnWall(Wall),
    KahlerOnWall(Wall),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NefEvidence {
    pub status: NefStatus,
    pub ns_rank: usize,
    /// `(positive, negative, zero)` inertia of `q` on `NS`.
    pub ns_inertia: (usize, usize, usize),
    pub walls_checked: usize,
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flags {
    pub projective: Option<bool>,
    pub ns_rank_hint: Option<usize>,
    pub no_mbm_in_h11: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evidence {
    pub dim: usize,
    pub nef: Option<NefEvidence>,
    pub kernel: Vec<Vec<String>>,
    pub kernel_dim: Option<usize>,
    pub kernel_in_period_span: Option<bool>,
    pub kernel_negative_definite: Option<bool>,
    pub kernel_mbm: Option<Vec<Wall>>,
    pub u_orthogonal_to_kernel: Option<bool>,
    pub u_irrational: Option<bool>,
    pub flags: Flags,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RigidityVerdict {
    pub status: Status,
    pub clause: Option<Clause>,
    pub evidence: Evidence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityMode {
    Full,
    NRestricted,
    VRestricted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result")]
pub enum DensityOutcome {
    CriterionHolds { mode: DensityMode },
    CriterionFails { dim: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityCertificate {
    pub outcome: DensityOutcome,
    pub report: RatnerReport,
}

/// Checks the invariants of a setup with certified signs.
pub fn validate_setup(s: &HodgeSetup, budget: u32) -> Report {
    let mut r = crate::lattice::validate_lattice(&s.lattice);
    let d = s.lattice.rank();
    match s.lattice.signature() {
        Ok((3, _)) => r.push("signature_3", CheckStatus::Pass, "three positive directions"),
        Ok((p, m)) => r.push(
            "signature_3",
            CheckStatus::Fail,
            format!("signature ({p},{m}), expected (3,{})", d.saturating_sub(3)),
        ),
        Err(e) => r.push("signature_3", CheckStatus::Fail, e.to_string()),
    }
    let shapes_ok = s.period_plane.len() == 2 && s.period_plane.iter().all(|x| x.dim() == d) && s.kahler_ref.dim() == d;
    if !shapes_ok {
        r.push("shape", CheckStatus::Fail, "need two period vectors and a Kähler class of the lattice rank");
        return r;
    }
    r.push("shape", CheckStatus::Pass, "two period vectors");
    match plane_positive(s, budget) {
        Ok(true) => r.push("period_plane_positive", CheckStatus::Pass, "Gram of L is positive definite"),
        Ok(false) => r.push("period_plane_positive", CheckStatus::Fail, "Gram of L is not positive definite"),
        Err(e) => r.push("period_plane_positive", CheckStatus::Fail, e.to_string()),
    }
    let mut orth = Ok(true);
    for x in &s.period_plane {
        match bbf_pair(&s.lattice, &s.kahler_ref, x) {
            Ok(v) if v.is_zero() => {}
            Ok(_) => orth = Ok(false),
            Err(e) => orth = Err(e),
        }
    }
    match orth {
        Ok(true) => r.push("kahler_type", CheckStatus::Pass, "kähler_ref is orthogonal to L"),
        Ok(false) => r.push("kahler_type", CheckStatus::Fail, "kähler_ref is not syntactically orthogonal to L"),
        Err(e) => r.push("kahler_type", CheckStatus::Fail, e.to_string()),
    }
    match bbf_pair(&s.lattice, &s.kahler_ref, &s.kahler_ref).and_then(|v| v.sign(budget)) {
        Ok(Sign::Positive) => r.push("kahler_positive", CheckStatus::Pass, "q(kähler_ref) > 0"),
        Ok(sg) => r.push("kahler_positive", CheckStatus::Fail, format!("q(kähler_ref) is {sg:?}")),
        Err(e) => r.push("kahler_positive", CheckStatus::Fail, e.to_string()),
    }
    if s.mbm_bound == 0 {
        r.push("mbm_bound", CheckStatus::Fail, "M must be at least 1");
    } else {
        r.push("mbm_bound", CheckStatus::Pass, format!("M = {}", s.mbm_bound));
    }
    r
}

fn plane_positive(s: &HodgeSetup, budget: u32) -> Result<bool> {
    let lat = &s.lattice;
    let (l1, l2) = (&s.period_plane[0], &s.period_plane[1]);
    let a = bbf_pair(lat, l1, l1)?;
    let b = bbf_pair(lat, l1, l2)?;
    let c = bbf_pair(lat, l2, l2)?;
    let det = a.mul(&c)?.sub(&b.mul(&b)?)?;
    Ok(a.sign(budget)? == Sign::Positive && det.sign(budget)? == Sign::Positive)
}

fn invalid(evidence: Evidence, note: impl Into<String>) -> RigidityVerdict {
    let mut evidence = evidence;
    evidence.notes.push(note.into());
    RigidityVerdict { status: Status::InvalidInput, clause: None, evidence }
}

/// Runs the clause cascade on `u`. Undecided signs are returned as errors.
pub fn classify_parabolic(s: &HodgeSetup, u: &SymbolicVector, budget: u32) -> Result<RigidityVerdict> {
    let lat = &s.lattice;
    let d = lat.rank();
    let mut ev = Evidence {
        dim: d,
        nef: None,
        kernel: Vec::new(),
        kernel_dim: None,
        kernel_in_period_span: None,
        kernel_negative_definite: None,
        kernel_mbm: None,
        u_orthogonal_to_kernel: None,
        u_irrational: None,
        flags: Flags {
            projective: s.projective_flag,
            ns_rank_hint: s.ns_rank_hint,
            no_mbm_in_h11: s.no_mbm_in_h11_flag,
        },
        notes: Vec::new(),
    };
    let report = validate_setup(s, budget);
    if !report.passed() {
        let failed: Vec<&str> =
            report.checks.iter().filter(|c| c.status == CheckStatus::Fail).map(|c| c.name.as_str()).collect();
        return Ok(invalid(ev, format!("setup fails: {}", failed.join(", "))));
    }

    // (a) parabolic, of type (1,1), nef.
    if u.dim() != d {
        return Ok(invalid(ev, "u has the wrong length"));
    }
    if u.is_zero() {
        return Ok(invalid(ev, "u is zero"));
    }
    if !bbf_pair(lat, u, u)?.is_zero() {
        return Ok(invalid(ev, "q(u) is not syntactically zero"));
    }
    if s.period_plane.iter().map(|x| bbf_pair(lat, u, x)).collect::<Result<Vec<_>>>()?.iter().any(|v| !v.is_zero()) {
        return Ok(invalid(ev, "u is not of type (1,1)"));
    }
    if bbf_pair(lat, u, &s.kahler_ref)?.sign(budget)? != Sign::Positive {
        return Ok(invalid(ev, "u does not pair positively with kähler_ref"));
    }
    let nef = local_nef(s, u, budget)?;
    let nef_status = nef.status.clone();
    ev.nef = Some(nef);
    match nef_status {
        NefStatus::Nef => {}
        NefStatus::Uncertified => ev.notes.push("nefness not certified locally; no clause can fire".into()),
        NefStatus::NotNef(w) => {
            return Ok(invalid(ev, format!("u is negative on the candidate wall {:?}; the wall may not be MBM", w.x)));
        }
        NefStatus::OnWall(w) => return Ok(invalid(ev, format!("u lies on the candidate wall {:?}", w.x))),
        NefStatus::KahlerOnWall(w) => {
            return Ok(invalid(ev, format!("kähler_ref lies on the candidate wall {:?}", w.x)));
        }
    }
    let nef_ok = ev.nef.as_ref().is_some_and(|n| n.status == NefStatus::Nef);

    // (b) strongly irrational.
    let k = rational_kernel(lat, u)?;
    ev.kernel = q_rows(&k);
    ev.kernel_dim = Some(k.len());
    let rigid = |ev: Evidence, c: Clause| RigidityVerdict { status: Status::Rigid, clause: Some(c), evidence: ev };
    if nef_ok && d >= DIM_THRESHOLD && k.is_empty() {
        return Ok(rigid(ev, Clause::StronglyIrrational));
    }

    // (c) kernel spanned by a vector in span_R(L).
    if k.len() == 1 {
        let inside = rational_in_real_span(&s.period_plane, &k[0])?;
        ev.kernel_in_period_span = Some(inside);
        if nef_ok && d >= DIM_THRESHOLD && inside {
            return Ok(rigid(ev, Clause::KernelInPeriod));
        }
    }

    // (d) negative definite kernel without MBM classes.
    if !k.is_empty() {
        let gk = linalg::mat_mul(&linalg::mat_mul(&k, lat.gram_q()), &linalg::transpose(&k));
        let neg = linalg::inertia(&gk).1 == k.len();
        ev.kernel_negative_definite = Some(neg);
        let orth =
            k.iter().map(|x| bbf_pair(lat, u, &SymbolicVector::rational(x.clone()))).collect::<Result<Vec<_>>>()?;
        let orth = orth.iter().all(|v| v.is_zero());
        ev.u_orthogonal_to_kernel = Some(orth);
        if neg {
            let mbm = walls::mbm_in_negative_sublattice(lat, &k, s.mbm_bound)?;
            let empty = mbm.is_empty();
            ev.kernel_mbm = Some(mbm);
            if nef_ok && empty && orth && d - k.len() >= DIM_THRESHOLD {
                return Ok(rigid(ev, Clause::NegativeKernel));
            }
        }
    }

    // (e) user-asserted projective hypotheses.
    let irrational = !proportional_to_rational(u);
    ev.u_irrational = Some(irrational);
    let flags_hold =
        s.projective_flag == Some(true) && s.ns_rank_hint.is_some_and(|r| r >= 3) && s.no_mbm_in_h11_flag == Some(true);
    if nef_ok && flags_hold && irrational {
        ev.notes.push("projectivity, NS rank and absence of MBM classes are asserted, not verified".into());
        return Ok(rigid(ev, Clause::Projective));
    }

    Ok(RigidityVerdict { status: Status::Inconclusive, clause: None, evidence: ev })
}

/// Whether `u` is a real multiple of a rational vector.
fn proportional_to_rational(u: &SymbolicVector) -> bool {
    let comps: Vec<&Vec<Q>> = u.components().values().collect();
    let Some(first) = comps.first() else { return true };
    comps.iter().all(|c| linalg::rank(&[(*first).clone(), (*c).clone()], first.len()) <= 1)
}

/// Local nef test inside `NS = L^⊥ ∩ V_Q`.
fn local_nef(s: &HodgeSetup, u: &SymbolicVector, budget: u32) -> Result<NefEvidence> {
    let lat = &s.lattice;
    let d = lat.rank();
    let ns = rational_annihilator(&s.period_plane, PairingForm::Bbf(lat))?;
    let mut ev = NefEvidence {
        status: NefStatus::Uncertified,
        ns_rank: ns.len(),
        ns_inertia: (0, 0, 0),
        walls_checked: 0,
        method: String::new(),
    };
    if ns.is_empty() {
        ev.status = NefStatus::Nef;
        ev.method = "NS is zero; no walls".into();
        return Ok(ev);
    }
    let basis = enumerate::saturate(&ns, d);
    let g_ns = enumerate::gram_in_basis(&basis, lat.gram_q());
    let inertia = linalg::inertia(&g_ns);
    ev.ns_inertia = inertia;
    let walls = if inertia.0 == 0 && inertia.2 == 0 {
        ev.method = "NS negative definite; all short classes".into();
        walls::mbm_in_negative_sublattice(lat, &ns, s.mbm_bound)?
    } else if inertia.0 == 1 && inertia.2 == 0 {
        let Some(walls) = hyperbolic_walls(s, &basis, &g_ns, u, budget)? else {
            ev.method = "u projects to the isotropic boundary of NS".into();
            return Ok(ev);
        };
        ev.method = "local walls at the NS projections of u and kähler_ref".into();
        walls
    } else {
        ev.method = format!("NS has inertia {inertia:?}; unsupported");
        return Ok(ev);
    };
    ev.walls_checked = walls.len();
    ev.status = match walls::is_nef_local(lat, u, &s.kahler_ref, &walls, budget) {
        Ok(NefVerdict::Nef) => NefStatus::Nef,
        Ok(NefVerdict::NotNef(w)) => NefStatus::NotNef(w),
        Ok(NefVerdict::OnWallViolation(w)) => NefStatus::OnWall(w),
        Err(Error::OnWall { wall }) => NefStatus::KahlerOnWall(Wall { x: wall }),
        Err(e) => return Err(e),
    };
    Ok(ev)
}

/// Walls near the `NS` projections of `u` and `kähler_ref`, in ambient
/// coordinates. `None` when the projection of `u` is not inside the
/// positive cone of `NS`.
fn hyperbolic_walls(
    s: &HodgeSetup,
    basis: &[Vec<i64>],
    g_ns: &Mat<Q>,
    u: &SymbolicVector,
    budget: u32,
) -> Result<Option<Vec<Wall>>> {
    let lat = &s.lattice;
    let gram: Vec<Vec<i64>> = g_ns
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| x.to_integer().try_into().map_err(|_| Error::Budget("NS Gram entry overflows i64".into())))
                .collect()
        })
        .collect::<Result<_>>()?;
    let ns_lat = QuadLattice::new(gram)?;
    let bq: Mat<Q> = basis.iter().map(|r| r.iter().map(|&x| Q::from_integer(x.into())).collect()).collect();
    let inv = linalg::inverse(g_ns).ok_or_else(|| Error::input("NS Gram is singular"))?;
    let proj = linalg::mat_mul(&linalg::mat_mul(&inv, &bq), lat.gram_q());
    let u_ns = u.apply(&proj);
    let h_ns = s.kahler_ref.apply(&proj);
    if bbf_pair(&ns_lat, &u_ns, &u_ns)?.sign(budget)? != Sign::Positive {
        return Ok(None);
    }
    let slice = HyperbolicSlice::new(ns_lat, s.mbm_bound, None)?;
    let mut ys: Vec<Wall> = walls::enumerate_local_walls(&slice, &u_ns, budget)?.walls;
    if bbf_pair(&slice.ns, &h_ns, &h_ns)?.sign(budget)? == Sign::Positive {
        ys.extend(walls::enumerate_local_walls(&slice, &h_ns, budget)?.walls);
    }
    let mut out: Vec<Wall> = ys
        .iter()
        .map(|y| {
            let mut x: Vec<i64> =
                (0..lat.rank()).map(|j| basis.iter().zip(&y.x).map(|(b, c)| b[j] * c).sum()).collect();
            enumerate::sign_normalize(&mut x);
            Wall { x }
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(Some(out))
}

/// Runs the Lie-closure criterion on `(L, u)` in the restriction that
/// matches the classifier clause: `v^⊥` for a kernel line in `span_R(L)`,
/// `N^⊥` for a negative definite kernel, the whole space otherwise.
pub fn density_certificate(s: &HodgeSetup, u: &SymbolicVector, budget: u32) -> Result<DensityCertificate> {
    let lat = &s.lattice;
    let d = lat.rank();
    let k = rational_kernel(lat, u)?;
    let g = lat.gram_q();
    let mut mode = DensityMode::Full;
    let mut l = s.period_plane.clone();
    let mut restrict: Option<Mat<Q>> = None;
    if k.len() == 1 && rational_in_real_span(&s.period_plane, &k[0])? {
        let v = &k[0];
        let qv = linalg::form(g, v, v);
        let vs = SymbolicVector::rational(v.clone());
        let mut kept = Vec::new();
        for x in &s.period_plane {
            let c = bbf_pair(lat, x, &vs)?.scale(&(-Q::one() / &qv));
            let p = x.add(&vs.mul_scalar(&c)?)?;
            if !p.is_zero() {
                kept.push(p);
                break;
            }
        }
        l = kept;
        restrict = Some(linalg::kernel(&[linalg::mat_vec(g, v)], d));
        mode = DensityMode::VRestricted;
    } else if !k.is_empty() {
        let gk = linalg::mat_mul(&linalg::mat_mul(&k, g), &linalg::transpose(&k));
        if linalg::inertia(&gk).1 == k.len() {
            // Orthogonal projection onto N^⊥: x - K^T (K G K^T)^{-1} K G x.
            let inv = linalg::inverse(&gk).ok_or_else(|| Error::input("kernel Gram is singular"))?;
            let kg = linalg::mat_mul(&k, g);
            let corr = linalg::mat_mul(&linalg::mat_mul(&linalg::transpose(&k), &inv), &kg);
            let id: Mat<Q> = linalg::identity(d);
            let p: Mat<Q> = id.iter().zip(&corr).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
            l = s.period_plane.iter().map(|x| x.apply(&p)).collect();
            restrict = Some(linalg::kernel(&kg, d));
            mode = DensityMode::NRestricted;
        }
    }
    let point = PeriodPoint::new(lat, l, u.clone(), budget)?;
    let report = wedge::ratner_full_check(lat, &point, restrict.as_deref())?;
    let outcome = match report.verdict {
        ClosureVerdict::Full => DensityOutcome::CriterionHolds { mode },
        ClosureVerdict::Proper(dim) => DensityOutcome::CriterionFails { dim },
    };
    Ok(DensityCertificate { outcome, report })
}

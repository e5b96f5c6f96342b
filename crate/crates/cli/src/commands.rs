use std::fmt::Write as _;
use std::path::Path;

use parabolic::arith::{fmt_q, q_to_f64, Q};
use parabolic::dynamics::{self, Classification, LatticeIsometry, OrbitConfig, OrbitTrace};
use parabolic::io::{self, canonical, fmt_f64, q_rows, trace_to_value, vector_to_value};
use parabolic::lattice::validate_lattice;
use parabolic::presets::load_preset_str;
use parabolic::rigidity::{self, Status};
use parabolic::vector::{rational_annihilator, torus_leaf_dense, PairingForm};
use parabolic::walls::{self, HyperbolicSlice, NefVerdict, Wall};
use parabolic::wedge::{self, num_pairs, ClosureVerdict, PeriodPoint};
use parabolic::{bbf_pair, rational_kernel, Error, QuadLattice, Sign, SymbolicVector};
use serde_json::{json, Value};

use crate::{read, Cli, Command, Failure, LatticeAction};

pub struct Output {
    pub json: Value,
    pub text: String,
    pub code: u8,
}

impl Output {
    fn ok(json: Value, text: String) -> Self {
        Output { json, text, code: 0 }
    }
}

type Res = Result<Output, Failure>;

pub fn run(cli: &Cli) -> Res {
    let budget = cli.precision_budget;
    match &cli.command {
        Command::Lattice { action: LatticeAction::Info { lattice } } => lattice_info(lattice),
        Command::Kernel { lattice, vector, leaf } => match leaf {
            Some(f) => leaf_density(f),
            None => kernel(lattice.as_deref().unwrap_or_default(), vector.as_deref().expect("required by clap")),
        },
        Command::Closure { lattice, plane, class, restrict, emit_basis } => {
            closure(lattice, plane, class, restrict.as_deref(), emit_basis.as_deref(), budget)
        }
        Command::Walls { lattice, center, bound, subspace, oracle } => {
            walls_cmd(lattice, center, *bound, subspace.as_deref(), *oracle, budget)
        }
        Command::Nef { lattice, class, reference, bound, subspace, direction } => {
            nef(lattice, class, reference, *bound, subspace.as_deref().zip(direction.as_deref()), budget)
        }
        Command::Classify { lattice, matrix, setup, class, certificate } => match (setup, class) {
            (Some(s), Some(u)) => classify_class(s, u, *certificate, budget),
            _ => match (lattice, matrix) {
                (Some(l), Some(m)) => classify_isometry(l, m, budget),
                _ => Err(Failure::Core(Error::input("classify needs --setup and --class, or --lattice and --matrix"))),
            },
        },
        Command::Orbit { lattice, gens, start, target, steps, eps, chains, max_word, out } => {
            let cfg =
                OrbitConfig { steps: *steps, epsilon: *eps, seed: cli.seed, chains: *chains, max_word: *max_word };
            orbit(lattice, gens, start, target, &cfg, out.as_deref())
        }
        Command::Dichotomy { lattice, gens, rational, irrational, target, steps, eps, chains, max_word } => {
            let cfg =
                OrbitConfig { steps: *steps, epsilon: *eps, seed: cli.seed, chains: *chains, max_word: *max_word };
            dichotomy(lattice, gens, rational, irrational, target, &cfg)
        }
    }
}

/// A preset name, or a lattice JSON file relative to `base`.
fn resolve_lattice(s: &str, base: Option<&Path>) -> Result<QuadLattice, Failure> {
    if let Ok(lat) = load_preset_str(s) {
        return Ok(lat);
    }
    let path = base.map_or_else(|| Path::new(s).to_path_buf(), |b| b.join(s));
    if !path.exists() {
        return Err(Failure::Core(Error::input(format!("{s:?} is neither a preset nor a file"))));
    }
    Ok(io::parse_lattice(&read(&path)?)?)
}

fn vector(path: &Path) -> Result<SymbolicVector, Failure> {
    Ok(io::parse_vector(&read(path)?)?)
}

fn lattice_info(name: &str) -> Res {
    let lat = resolve_lattice(name, None)?;
    let (p, m) = lat.signature()?;
    let det = lat.determinant();
    let report = validate_lattice(&lat);
    let json = json!({
        "name": lat.name,
        "rank": lat.rank(),
        "signature": [p, m],
        "determinant": det.to_string(),
        "even": lat.is_even(),
        "checks": serde_json::to_value(&report.checks).expect("serializable"),
    });
    let mut text = String::new();
    if let Some(n) = &lat.name {
        writeln!(text, "name: {n}").unwrap();
    }
    writeln!(text, "rank: {}", lat.rank()).unwrap();
    writeln!(text, "signature: ({p},{m})").unwrap();
    writeln!(text, "determinant: {det}").unwrap();
    writeln!(text, "parity: {}", if lat.is_even() { "even" } else { "odd" }).unwrap();
    for c in &report.checks {
        writeln!(text, "check {}: {:?} ({})", c.name, c.status, c.detail).unwrap();
    }
    Ok(Output::ok(json, text))
}

fn kernel(lattice: &str, vector_path: &Path) -> Res {
    let lat = resolve_lattice(lattice, None)?;
    let u = vector(vector_path)?;
    let k = rational_kernel(&lat, &u)?;
    let json = json!({ "dim": k.len(), "basis": q_rows(&k), "strongly_irrational": k.is_empty() });
    let mut text = format!("kernel dimension: {}\n", k.len());
    for r in q_rows(&k) {
        writeln!(text, "  [{}]", r.join(", ")).unwrap();
    }
    Ok(Output::ok(json, text))
}

fn leaf_density(path: &Path) -> Res {
    let f = io::parse_family(&read(path)?)?;
    let dense = torus_leaf_dense(&f)?;
    let ann = rational_annihilator(&f, PairingForm::Standard)?;
    let json = json!({ "dense": dense, "annihilator": q_rows(&ann) });
    let text = format!("leaf dense: {dense}\nannihilator dimension: {}\n", ann.len());
    Ok(Output::ok(json, text))
}

fn closure(
    lattice: &str,
    plane: &Path,
    class: &Path,
    restrict: Option<&Path>,
    emit: Option<&Path>,
    budget: u32,
) -> Res {
    let lat = resolve_lattice(lattice, None)?;
    let l = io::parse_family(&read(plane)?)?;
    let u = vector(class)?;
    let w = restrict.map(|p| read(p).and_then(|t| Ok(io::parse_subspace(&t)?))).transpose()?;
    let point = PeriodPoint::new(&lat, l, u, budget)?;
    let report = wedge::ratner_full_check(&lat, &point, w.as_deref())?;
    if let Some(path) = emit {
        let dw = report.ambient_dim;
        let rows: Vec<Vec<Q>> = match &report.basis {
            Some(b) => b.rows.clone(),
            None => {
                let n = num_pairs(dw);
                (0..n).map(|i| (0..n).map(|j| Q::from_integer((i == j).into())).collect()).collect()
            }
        };
        let v = io::bivector_basis_value(dw, &rows, true);
        std::fs::write(path, canonical(&v)).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    let verdict = match &report.verdict {
        ClosureVerdict::Full => "Full".to_string(),
        ClosureVerdict::Proper(d) => format!("Proper({d})"),
    };
    let mut text = String::new();
    writeln!(text, "ambient dimension: {}", report.ambient_dim).unwrap();
    match report.seed_dim {
        Some(s) => writeln!(text, "seed dimension: {s}").unwrap(),
        None => writeln!(text, "seed dimension: not computed (modular certificate)").unwrap(),
    }
    writeln!(text, "closure dimension: {} of {}", report.closure_dim, report.full_dim).unwrap();
    writeln!(text, "verdict: {verdict}").unwrap();
    writeln!(text, "rounds: {}", report.rounds).unwrap();
    for w in &report.warnings {
        writeln!(text, "warning: {w}").unwrap();
    }
    Ok(Output::ok(serde_json::to_value(&report).expect("serializable"), text))
}

fn slice(lattice: &str, bound: u64, subspace: Option<&Path>) -> Result<HyperbolicSlice, Failure> {
    let lat = resolve_lattice(lattice, None)?;
    let h0 = subspace.map(|p| read(p).and_then(|t| Ok(io::parse_subspace(&t)?))).transpose()?;
    Ok(HyperbolicSlice::new(lat, bound, h0)?)
}

fn walls_value(walls: &[Wall]) -> Value {
    json!(walls.iter().map(|w| w.x.clone()).collect::<Vec<_>>())
}

fn walls_cmd(lattice: &str, center: &Path, bound: u64, subspace: Option<&Path>, oracle: bool, budget: u32) -> Res {
    let s = slice(lattice, bound, subspace)?;
    let h = vector(center)?;
    let ws = walls::enumerate_local_walls(&s, &h, budget)?;
    let mut json = json!({ "walls": walls_value(&ws.walls), "bound": bound, "center": vector_to_value(&h)? });
    let mut text = format!("{} walls (M = {bound})\n", ws.walls.len());
    for w in &ws.walls {
        writeln!(text, "  {:?}", w.x).unwrap();
    }
    if oracle {
        let o = walls::box_oracle(&s, &h, budget)?;
        let missing: Vec<Wall> = o.iter().filter(|w| !ws.walls.contains(w)).cloned().collect();
        let extra: Vec<Wall> = ws.walls.iter().filter(|w| !o.contains(w)).cloned().collect();
        let agrees = missing.is_empty() && extra.is_empty();
        json["oracle"] = json!({ "agrees": agrees, "missing": walls_value(&missing), "extra": walls_value(&extra) });
        writeln!(text, "oracle: {} walls, {}", o.len(), if agrees { "agrees" } else { "DIFFERS" }).unwrap();
        if !agrees {
            return Ok(Output { json, text, code: 1 });
        }
    }
    Ok(Output::ok(json, text))
}

fn nef(lattice: &str, class: &Path, reference: &Path, bound: u64, iso: Option<(&Path, &Path)>, budget: u32) -> Res {
    let s = slice(lattice, bound, iso.map(|(h0, _)| h0))?;
    let u = vector(class)?;
    let h = vector(reference)?;
    let lat = &s.ns;
    if bbf_pair(lat, &h, &h)?.sign(budget)? != Sign::Positive {
        return Err(Failure::Core(Error::input("reference class must have positive square")));
    }
    let mut ws = walls::enumerate_local_walls(&s, &h, budget)?.walls;
    let mut notes = Vec::new();
    match bbf_pair(lat, &u, &u)?.sign(budget)? {
        Sign::Positive => ws.extend(walls::enumerate_local_walls(&s, &u, budget)?.walls),
        Sign::Zero => match iso {
            Some((_, z)) => {
                let z = vector(z)?.as_rational().ok_or_else(|| Error::input("direction must be rational"))?;
                ws.extend(walls::walls_near_parabolic(&s, &u, &z, budget)?.walls);
            }
            None => {
                notes.push("isotropic class without --subspace/--direction: walls near the class are not enumerated")
            }
        },
        Sign::Negative => return Err(Failure::Core(Error::input("class has negative square"))),
    }
    ws.sort();
    ws.dedup();
    let verdict = walls::is_nef_local(lat, &u, &h, &ws, budget)?;
    let json = json!({
        "verdict": serde_json::to_value(&verdict).expect("serializable"),
        "walls_checked": ws.len(),
        "notes": notes,
    });
    let mut text = match &verdict {
        NefVerdict::Nef => "nef (locally)\n".to_string(),
        NefVerdict::NotNef(w) => format!("not nef: negative on wall {:?}\n", w.x),
        NefVerdict::OnWallViolation(w) => format!("on wall {:?}\n", w.x),
    };
    writeln!(text, "walls checked: {}", ws.len()).unwrap();
    for n in notes {
        writeln!(text, "note: {n}").unwrap();
    }
    Ok(Output::ok(json, text))
}

fn interval(iv: &(Q, Q)) -> Value {
    json!([fmt_q(&iv.0), fmt_q(&iv.1)])
}

fn classify_isometry(lattice: &str, matrix: &Path, budget: u32) -> Res {
    let lat = resolve_lattice(lattice, None)?;
    let g = LatticeIsometry::new(&lat, io::parse_matrix(&read(matrix)?)?)?;
    let sp = dynamics::spectrum(&g);
    let c = dynamics::classify(&g, budget)?;
    let mut json = json!({
        "kind": c.kind(),
        "charpoly": sp.charpoly.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "cyclotomic": sp.cyclotomic,
    });
    let mut text = format!("kind: {}\n", c.kind());
    writeln!(
        text,
        "charpoly (ascending): [{}]",
        sp.charpoly.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
    )
    .unwrap();
    match &c {
        Classification::Elliptic { order } => {
            json["order"] = json!(order);
            writeln!(text, "order: {order}").unwrap();
        }
        Classification::Parabolic => {}
        Classification::Loxodromic { lambda, negative } => {
            json["lambda"] = interval(lambda);
            json["negative"] = json!(negative);
            writeln!(text, "lambda in [{}, {}]", fmt_f64(q_to_f64(&lambda.0)), fmt_f64(q_to_f64(&lambda.1))).unwrap();
            let e = dynamics::leading_parabolic_class(&lat, &g, budget)?;
            json["eta"] = vector_to_value(&e.eta)?;
            json["exact"] = json!(e.exact);
            json["certificate"] = json!({
                "eigen_residual": interval(&e.certificate.eigen_residual),
                "norm_residual": interval(&e.certificate.norm_residual),
                "exact_zero": e.certificate.exact_zero,
            });
            let approx: Vec<String> = e.eta_f64().iter().map(|x| fmt_f64(*x)).collect();
            writeln!(
                text,
                "eta ≈ [{}] ({})",
                approx.join(", "),
                if e.exact { "exact" } else { "rational approximation" }
            )
            .unwrap();
            writeln!(text, "residuals vanish exactly: {}", e.certificate.exact_zero).unwrap();
        }
    }
    Ok(Output::ok(json, text))
}

fn classify_class(setup: &Path, class: &Path, certificate: bool, budget: u32) -> Res {
    let base = setup.parent().map(Path::to_path_buf);
    let s = io::parse_setup(&read(setup)?, |name| {
        resolve_lattice(name, base.as_deref()).map_err(|f| match f {
            Failure::Core(e) => e,
            Failure::Io(m) => Error::input(m),
        })
    })?;
    let u = vector(class)?;
    let v = rigidity::classify_parabolic(&s, &u, budget)?;
    let mut json = json!({ "verdict": serde_json::to_value(&v).expect("serializable") });
    let clause = v.clause.map_or("none", |c| c.label());
    let mut text = format!("status: {:?}\nclause: {clause}\n", v.status);
    if let Some(k) = v.evidence.kernel_dim {
        writeln!(text, "rational kernel dimension: {k}").unwrap();
    }
    if let Some(n) = &v.evidence.nef {
        writeln!(text, "nef: {:?} ({})", n.status, n.method).unwrap();
    }
    for n in &v.evidence.notes {
        writeln!(text, "note: {n}").unwrap();
    }
    if certificate && v.status != Status::InvalidInput {
        let c = rigidity::density_certificate(&s, &u, budget)?;
        json["certificate"] = serde_json::to_value(&c).expect("serializable");
        writeln!(text, "certificate: {:?} (closure {} of {})", c.outcome, c.report.closure_dim, c.report.full_dim)
            .unwrap();
    }
    let code = match v.status {
        Status::Rigid => 0,
        Status::Inconclusive => 4,
        Status::InvalidInput => 2,
    };
    Ok(Output { json, text, code })
}

fn generators(lat: &QuadLattice, path: &Path) -> Result<Vec<LatticeIsometry>, Failure> {
    let ms = io::parse_generators(&read(path)?)?;
    Ok(ms.into_iter().map(|m| LatticeIsometry::new(lat, m)).collect::<Result<_, _>>()?)
}

fn trace_text(label: &str, t: &OrbitTrace) -> String {
    let hit = t.first_hit.map_or("never".to_string(), |s| s.to_string());
    format!(
        "{label}min distance: {} after {} steps ({} chains), first within {}: {hit}\n",
        fmt_f64(t.min_projective_distance),
        t.steps,
        t.chains,
        fmt_f64(t.epsilon)
    )
}

fn orbit(lattice: &str, gens: &Path, start: &Path, target: &Path, cfg: &OrbitConfig, out: Option<&Path>) -> Res {
    let lat = resolve_lattice(lattice, None)?;
    let gs = generators(&lat, gens)?;
    let t = dynamics::orbit_dichotomy_experiment(&lat, &gs, &vector(start)?, &vector(target)?, cfg)?;
    let json = trace_to_value(&t);
    if let Some(path) = out {
        std::fs::write(path, canonical(&json)).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(Output::ok(json, trace_text("", &t)))
}

fn dichotomy(lattice: &str, gens: &Path, rational: &Path, irrational: &Path, target: &Path, cfg: &OrbitConfig) -> Res {
    let lat = resolve_lattice(lattice, None)?;
    let gs = generators(&lat, gens)?;
    let r = vector(rational)?;
    if !r.is_rational() {
        return Err(Failure::Core(Error::input("--rational start is not rational")));
    }
    let i = vector(irrational)?;
    if i.is_rational() {
        return Err(Failure::Core(Error::input("--irrational start is rational")));
    }
    let t = vector(target)?;
    let tr = dynamics::orbit_dichotomy_experiment(&lat, &gs, &r, &t, cfg)?;
    let ti = dynamics::orbit_dichotomy_experiment(&lat, &gs, &i, &t, cfg)?;
    let json = json!({
        "rational": trace_to_value(&tr),
        "irrational": trace_to_value(&ti),
        "ratio": fmt_f64(ti.min_projective_distance / tr.min_projective_distance),
    });
    let text = trace_text("rational:   ", &tr) + &trace_text("irrational: ", &ti);
    Ok(Output::ok(json, text))
}

//! Acceptance suite. Runs without the libtest harness and prints one line
//! per criterion; exits nonzero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use momentkit::cli::{self, RunReport};
use momentkit::instance::{random_instance, random_poly, rng_for, Catalog, InstanceParams};
use momentkit::model::parse_model;
use momentkit::{
    ConformalField, Derivation, LineData, MomentSystem, Point, PoissonStructure, Rat, TPoly, TotElement,
};
use num_traits::{One, Zero};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn r(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

fn names(k: usize) -> Vec<String> {
    ["x", "y", "z"][..k].iter().map(|s| s.to_string()).collect()
}

fn plane() -> PoissonStructure {
    Catalog::SymplecticPlane.structure()
}

fn jacobi_suite() -> Outcome {
    for c in Catalog::ALL.into_iter().chain([Catalog::Zero(3)]) {
        let rep = c.structure().verify_jacobi();
        ensure(rep.passed, || format!("{} fails Jacobi:\n{}", c.name(), rep.to_text()))?;
    }
    let v = |i| TPoly::var(3, 0, i);
    let bad = PoissonStructure::new(
        &["x", "y", "z"],
        0,
        [(0, 1, v(2)), (1, 2, v(1).pow(2)), (2, 0, TPoly::zero(3, 0))],
    )
    .map_err(|e| e.to_string())?;
    let rep = bad.verify_jacobi();
    ensure(!rep.passed, || "counterexample passed".into())?;
    let w = &rep.witnesses[0];
    ensure(w.items == ["x", "y", "z"] && w.residual == "2*y*z", || format!("witness {w:?}"))?;
    Ok(format!("{} catalog tables pass; counterexample residual {}", Catalog::ALL.len() + 1, w.residual))
}

fn cocycle_equivalence() -> Outcome {
    let params = InstanceParams::default();
    let (mut valid, mut broken) = (0, 0);
    for seed in 0..60u64 {
        let ms = random_instance(seed, params).map_err(|e| e.to_string())?.model.system().map_err(|e| e.to_string())?;
        let line = ms.twist(&random_instance(seed, params).unwrap().twist).map_err(|e| e.to_string())?.line().clone();
        let mut rng = rng_for(seed ^ 0xc0c1);
        let k = line.nvars();
        let n1 = line.order() - 1;
        let mut values = line.alpha().values().to_vec();
        let slot = rng.gen_range(0..k);
        let j = rng.gen_range(0..=n1);
        let mut q = random_poly(&mut rng, k, 2);
        if q.is_zero() {
            q = momentkit::Poly::var(k, (slot + 1) % k);
        }
        values[slot] = &values[slot] + &TPoly::t_term(q, j, n1);
        let corrupted = LineData::new(line.base().clone(), values).map_err(|e| e.to_string())?;
        for l in [&line, &corrupted] {
            let c = l.verify_cocycle().passed;
            let t = l.verify_tot_jacobi().passed;
            ensure(c == t, || format!("seed {seed}: cocycle {c}, tot-jacobi {t}"))?;
            if c {
                valid += 1;
            } else {
                broken += 1;
            }
        }
    }
    ensure(broken > 0 && valid > 0, || "suite is one-sided".into())?;
    Ok(format!("{} instances agree ({valid} valid, {broken} failing)", valid + broken))
}

fn roundtrip() -> Outcome {
    let params = InstanceParams::default();
    let mut failures = Vec::new();
    for seed in 7..107u64 {
        let inst = random_instance(seed, params).map_err(|e| e.to_string())?;
        ensure(inst.catalog.nvars() <= 3 && inst.model.order <= 4, || format!("seed {seed} out of bounds"))?;
        match cli::roundtrip_case(seed, params) {
            Ok(rep) if rep.passed => {}
            Ok(rep) => failures.push(rep.to_text()),
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    ensure(failures.is_empty(), || failures.join("\n"))?;
    Ok("100/100 exact recoveries".into())
}

fn worked_lift() -> Outcome {
    let base = plane().lift(1).map_err(|e| e.to_string())?;
    let line = LineData::new(base, vec![TPoly::zero(2, 0), TPoly::var(2, 0, 0)]).map_err(|e| e.to_string())?;
    let res = MomentSystem::new(line).trivialize().map_err(|e| e.to_string())?;
    let lifts = res.rendered_lifts();
    ensure(res.verified(), || res.report.to_text())?;
    ensure(lifts[0].1 == "x" && lifts[1].1 == "y - t*x", || format!("{lifts:?}"))?;
    Ok(format!("x' = {}, y' = {}", lifts[0].1, lifts[1].1))
}

fn gm_hamiltonian() -> Outcome {
    let params = InstanceParams::default();
    let mut checked = 0;
    for seed in 0..100u64 {
        let inst = random_instance(seed, params).map_err(|e| e.to_string())?;
        let ms = inst.model.system().map_err(|e| e.to_string())?;
        let tw = ms.twist(&inst.twist).map_err(|e| e.to_string())?;
        for sys in [ms, tw] {
            if sys.verify_system().passed {
                let rep = sys.verify_gm_hamiltonian(-3..=3);
                ensure(rep.passed, || format!("seed {seed}:\n{}", rep.to_text()))?;
                checked += 1;
            }
        }
    }
    let ms = MomentSystem::make_trivial(&plane(), 2).map_err(|e| e.to_string())?;
    let t = TotElement::homogeneous(TPoly::t(2, 2), 0);
    for p in -3..=3i64 {
        let w = TotElement::homogeneous(TPoly::var(2, 2, 0), p);
        let got = ms.line().tot_bracket(&t, &w).map_err(|e| e.to_string())?;
        let want = w.truncate(got.order()).unwrap().scale(&r(p));
        ensure(got == want, || format!("p = {p}: {}", got.render(&names(2))))?;
    }
    Ok(format!("{checked} systems graded; {{t, x s^p}} = p x s^p for p in -3..3"))
}

fn pfaffian4(m: &[Vec<Rat>]) -> Rat {
    &m[0][1] * &m[2][3] - &m[0][2] * &m[1][3] + &m[0][3] * &m[1][2]
}

fn symplectic_tot() -> Outcome {
    let ms = MomentSystem::make_trivial(&plane(), 1).map_err(|e| e.to_string())?;
    let pt = Point::new([("x", r(1)), ("y", r(2)), ("s", r(1)), ("t", r(0))]);
    let rank = ms.tot_rank(&pt).map_err(|e| e.to_string())?;
    let pf = pfaffian4(&ms.tot_matrix(&pt).map_err(|e| e.to_string())?);
    ensure(rank == 4, || format!("rank {rank}"))?;
    ensure(pf == r(1) || pf == r(-1), || format!("Pfaffian {pf}"))?;

    let params = InstanceParams::default();
    let mut sampled = 0;
    let mut seed = 0u64;
    while sampled < 40 && seed < 10_000 {
        let inst = random_instance(seed, params).map_err(|e| e.to_string())?;
        let mut rng = rng_for(seed ^ 0x5a5a);
        seed += 1;
        let tw = inst.model.system().unwrap().twist(&inst.twist).map_err(|e| e.to_string())?;
        let mut coord = || Rat::new(rng.gen_range(-5i64..=5).into(), rng.gen_range(1i64..=3).into());
        let mut s = coord();
        if s.is_zero() {
            s = Rat::one();
        }
        let pt = Point::new([("x", coord()), ("y", coord()), ("z", coord()), ("s", s), ("t", Rat::zero())]);
        let base = tw.structure().bivector_rank(&pt).map_err(|e| e.to_string())?;
        let tot = tw.tot_rank(&pt).map_err(|e| e.to_string())?;
        ensure(base % 2 == 0 && tot % 2 == 0, || format!("odd rank at seed {seed}"))?;
        if inst.catalog.is_symplectic() {
            ensure(base == inst.catalog.nvars(), || "symplectic base degenerate".into())?;
            ensure(tot == base + 2, || format!("seed {seed}: tot rank {tot}, base {base}"))?;
            sampled += 1;
        }
    }
    ensure(sampled >= 20, || format!("only {sampled} nondegenerate samples"))?;
    Ok(format!("rank 4, Pfaffian {pf}; {sampled} nondegenerate samples give base + 2"))
}

fn conformal_extension() -> Outcome {
    let euler = Derivation::over_t(vec![TPoly::var(2, 0, 0), TPoly::var(2, 0, 1)]).unwrap();
    let field = ConformalField { xi: euler.clone(), lambda: r(-2) };
    ensure(plane().verify_conformal(&field).map_err(|e| e.to_string())?.passed, || "Euler not conformal".into())?;
    for n in 1..=3 {
        let ms = MomentSystem::make_trivial(&plane(), n).map_err(|e| e.to_string())?;
        let ext = ms.extend_conformal(&euler, &r(-2)).map_err(|e| e.to_string())?;
        ensure(ext.mu == Some(r(2)), || format!("n = {n}: mu = {:?}", ext.mu))?;
        ensure(ext.report.passed, || ext.report.to_text())?;
    }
    let so3 = Catalog::So3.structure();
    let h = &TPoly::var(3, 0, 0).pow(2) + &TPoly::var(3, 0, 1);
    let ham = so3.hamiltonian_field(&h).unwrap();
    let ms = MomentSystem::make_trivial(&so3, 2).map_err(|e| e.to_string())?;
    let ext = ms.extend_conformal(&ham, &Rat::zero()).map_err(|e| e.to_string())?;
    ensure(ext.mu == Some(Rat::zero()) && ext.report.passed, || ext.report.to_text())?;
    Ok("Euler: lambda = -2, mu = 2, re-check passes; Hamiltonian: mu = 0".into())
}

fn covariance() -> Outcome {
    let n = 2;
    let base = plane().lift(n).unwrap();
    let line = LineData::new(base, vec![TPoly::var(2, n - 1, 1), TPoly::var(2, n - 1, 0)]).unwrap();
    let mut rng = rng_for(0xc0fa);
    let mut pairs = 0;
    for i in 0..60 {
        let u = if i % 2 == 0 {
            TPoly::constant(2, n - 1, Rat::new(rng.gen_range(1i64..=5).into(), rng.gen_range(1i64..=3).into()))
        } else {
            let q = random_poly(&mut rng, 2, 2);
            &TPoly::one(2, n - 1) + &TPoly::t_term(q, 1, n - 1)
        };
        let lu = line.change_trivialization(&u).map_err(|e| e.to_string())?;
        let p = rng.gen_range(-3i64..=3);
        let q = rng.gen_range(-3i64..=3);
        let a = TotElement::homogeneous(TPoly::from_poly(random_poly(&mut rng, 2, 2), n), p);
        let b = TotElement::homogeneous(TPoly::from_poly(random_poly(&mut rng, 2, 2), n), q);
        let lhs = lu.tot_bracket(&a, &b).map_err(|e| e.to_string())?.rescale(&u).map_err(|e| e.to_string())?;
        let rhs = line
            .tot_bracket(&a.rescale(&u).unwrap(), &b.rescale(&u).unwrap())
            .map_err(|e| e.to_string())?;
        let o = lhs.order().min(rhs.order());
        ensure(lhs.truncate(o).unwrap() == rhs.truncate(o).unwrap(), || {
            format!("pair {i}: {} vs {}", lhs.render(&names(2)), rhs.render(&names(2)))
        })?;
        pairs += 1;
    }
    Ok(format!("{pairs} homogeneous pairs intertwine exactly"))
}

fn run_bin(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_momentkit"))
        .env_remove(cli::DEGREE_BOUND_ENV)
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn cli_contract() -> Outcome {
    let params = InstanceParams::default();
    for seed in 0..100u64 {
        let m = random_instance(seed, params).map_err(|e| e.to_string())?.model;
        let back = parse_model(&m.render()).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(back == m, || format!("seed {seed} does not round-trip"))?;
    }
    let dir = std::env::temp_dir().join(format!("momentkit-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let file = |name: &str, text: &str| {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };
    let good = file("plane.model", "ring x, y; order 2; bracket {x,y} = 1;");
    let bad = file("bad.model", "ring x, y; order 1; bracket {x,y} = 1; alpha y = y;");
    let broken = file("broken.model", "ring x, y; order 1; bracket {x,y} = z;");
    let codes = [
        (run_bin(&["verify", &good]).0, 0),
        (run_bin(&["verify", &bad]).0, 1),
        (run_bin(&["verify", &broken]).0, 2),
        (run_bin(&["trivialize", &bad]).0, 1),
        (run_bin(&["rank", &good, "--point", "nowhere"]).0, 2),
    ];
    let _ = std::fs::remove_dir_all(&dir);
    for (i, (got, want)) in codes.iter().enumerate() {
        ensure(got == want, || format!("exit case {i}: got {got}, want {want}"))?;
    }
    for args in [
        &["--json", "generate", "--seed", "17"][..],
        &["--json", "roundtrip", "--cases", "10", "--seed", "3"][..],
    ] {
        let a = run_bin(args);
        let b = run_bin(args);
        ensure(a == b, || format!("{args:?} not deterministic"))?;
        let rep: RunReport = serde_json::from_str(&a.1).map_err(|e| e.to_string())?;
        ensure(rep.schema == 1, || "schema".into())?;
    }
    Ok("100 models round-trip; exit codes 0/1/2; JSON byte-identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 jacobi suite", jacobi_suite, Duration::from_secs(1)),
        ("2 cocycle <=> tot jacobi", cocycle_equivalence, Duration::from_secs(10)),
        ("3 twist/trivialize round-trip", roundtrip, Duration::from_secs(60)),
        ("4 worked lift", worked_lift, Duration::MAX),
        ("5 G_m hamiltonian", gm_hamiltonian, Duration::MAX),
        ("6 symplectic total space", symplectic_tot, Duration::MAX),
        ("7 conformal extension", conformal_extension, Duration::MAX),
        ("8 trivialization covariance", covariance, Duration::MAX),
        ("9 cli contract", cli_contract, Duration::MAX),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>().map(String::as_str).or(p.downcast_ref::<&str>().copied()))));
        let elapsed = start.elapsed();
        let result = result.and_then(|msg| {
            if elapsed > limit {
                Err(format!("took {elapsed:?}, limit {limit:?}"))
            } else {
                Ok(msg)
            }
        });
        match result {
            Ok(msg) => println!("PASS  {name}  ({:.2} s)  {msg}", elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}  ({:.2} s)  {msg}", elapsed.as_secs_f64());
            }
        }
    }
    println!("{}/9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

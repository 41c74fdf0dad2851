//! Acceptance gate. Each test prints one `criterion N ... PASS|FAIL` line
//! straight to stderr (bypassing output capture) and then asserts.

mod common;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::{family_for, random_any_rank, rng, CT, INVOLUTIONS};
use rand::Rng;
use star_solve::matrix::{
    is_mp_inverse_matrix, mp_inverse, random_matrix, ComplexFloat, GaussianRational as Q, Matrix,
    MatrixRing, RectOps,
};
use star_solve::oracle::generate::{
    random_symmetric_rhs, rect_pair, square_pair, symmetric_rhs, two_sided_rhs, Family,
};
use star_solve::oracle::{oracle_solve, verify_family_against_oracle};
use star_solve::rect::{embed, embed_mp, extract_solution, solve_rect, Dims, RectProblem};
use star_solve::ring::{is_mp_inverse, penrose_checks, StarOps};
use star_solve::solvers::{
    apply_equation, check_hypotheses, family_sample, solve, solve_sym_left, solve_sym_right, EquationKind, Outcome,
    Sign,
};

/// Float Penrose residual bound, relative to `1 + max-abs`.
const PENROSE_FLOAT_TOL: f64 = 1e-9;
/// Float solve residual bound, relative to `1 + ‖C‖_max`.
const SOLVE_FLOAT_TOL: f64 = 1e-8;
/// Ring tolerance used for float solving.
const RING_FLOAT_TOL: f64 = 1e-9;
/// Minimum float/exact verdict matches out of `FLOAT_INSTANCES`.
const FLOAT_MATCH_MIN: usize = 99;
const FLOAT_INSTANCES: usize = 100;

fn verdict(id: u8, name: &str, passed: bool, detail: String) {
    let status = if passed { "PASS" } else { "FAIL" };
    let line = format!("criterion {id} {name:<22} {status}  {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(passed, "criterion {id} failed: {detail}");
}

fn sign_of(i: usize) -> Sign {
    if i % 2 == 0 {
        Sign::Minus
    } else {
        Sign::Plus
    }
}

#[test]
fn criterion_1_penrose() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut total = 0;
    for (k, inv) in INVOLUTIONS.into_iter().enumerate() {
        let mut r = rng(100 + k as u64);
        for i in 0..500 {
            let (rows, cols) = (r.gen_range(1..=4), r.gen_range(1..=4));
            let m = random_any_rank(rows, cols, inv, &mut r);
            let mp = mp_inverse(&m).unwrap();
            if !is_mp_inverse_matrix(&m, &mp, 0.0).unwrap() {
                failures.push(format!("exact {inv:?} #{i}"));
            }
            total += 1;
        }
        for i in 0..500 {
            let (rows, cols) = (r.gen_range(1..=4), r.gen_range(1..=4));
            let m: Matrix<ComplexFloat> = if i % 3 == 0 {
                let rank = r.gen_range(0..=rows.min(cols));
                let left: Matrix<ComplexFloat> = random_matrix(rows, rank, inv, &mut r);
                let right: Matrix<ComplexFloat> = random_matrix(rank, cols, inv, &mut r);
                left.mul(&right).unwrap()
            } else {
                random_matrix(rows, cols, inv, &mut r)
            };
            let mp = mp_inverse(&m).unwrap();
            let checks = penrose_checks(&RectOps::new(inv, PENROSE_FLOAT_TOL), &m, &mp);
            if !checks.iter().all(|c| c.holds()) {
                failures.push(format!("float {inv:?} #{i}: {checks:?}"));
            }
            total += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        "penrose",
        failures.is_empty(),
        format!("{}/{total} matrices pass, {secs:.1}s (target < 30s); failures {failures:?}", total - failures.len()),
    );
}

#[test]
fn criterion_2_lemma_identities() {
    let mut bad = Vec::new();
    for i in 0..200 {
        let inv = INVOLUTIONS[(i / 12) % 2];
        let n = 1 + i % 3;
        let ring = MatrixRing::<Q>::new(n, inv);
        let (a, b) = square_pair(family_for(i), n, inv, &mut rng(2000 + i as u64)).unwrap();
        let h = check_hypotheses(&ring, &a, &b).unwrap();
        assert!(h.holds(), "generator produced a failing pair");
        let (d, dd) = (&h.d, &h.d_dagger);
        let zero = Matrix::zeros(n, n, inv);
        let ok = is_mp_inverse(&ring, d, dd)
            && ring.mul(dd, &b) == zero
            && ring.mul_all(&[&b.star(), d, dd]) == zero
            && ring.mul_all(&[d, dd, &a]) == *d
            && ring.mul(dd, &a) == ring.mul(dd, d);
        if !ok {
            bad.push(i);
        }
    }
    verdict(2, "lemma_identities", bad.is_empty(), format!("{}/200 pairs exact; failing {bad:?}", 200 - bad.len()));
}

struct TwoSided {
    sign: Sign,
    ring: MatrixRing<Q>,
    a: Matrix<Q>,
    b: Matrix<Q>,
    c: Matrix<Q>,
}

fn iff_instances(sign: Sign) -> Vec<TwoSided> {
    let base = if sign == Sign::Minus { 3000 } else { 4000 };
    (0..300)
        .map(|i| {
            let inv = INVOLUTIONS[(i / 12) % 2];
            let n = 1 + (i / 4) % 3;
            let mut r = rng(base + i as u64);
            let (a, b) = square_pair(family_for(i), n, inv, &mut r).unwrap();
            let c = two_sided_rhs(sign, &a, &b, i % 2 == 0, &mut r);
            TwoSided { sign, ring: MatrixRing::new(n, inv), a, b, c }
        })
        .collect()
}

#[test]
fn criterion_3_iff() {
    let mut agree = 0;
    let mut solvable = 0;
    let mut issues = Vec::new();
    for sign in [Sign::Minus, Sign::Plus] {
        for (i, t) in iff_instances(sign).iter().enumerate() {
            let outcome = solve(&t.ring, t.sign, &t.a, &t.b, &t.c).unwrap();
            let oracle = oracle_solve(t.sign, &t.a, &t.b, &t.c).unwrap();
            let ours = match &outcome {
                Outcome::Solved(_) => true,
                Outcome::Unsolvable { .. } => false,
                Outcome::HypothesesFail(_) => {
                    issues.push(format!("{sign:?} #{i}: hypotheses fail"));
                    continue;
                }
            };
            if ours == oracle.solvable {
                agree += 1;
            } else {
                issues.push(format!("{sign:?} #{i}: ours {ours}, oracle {}", oracle.solvable));
            }
            if let Outcome::Solved(fam) = outcome {
                solvable += 1;
                if apply_equation(&t.ring, t.sign, &t.a, &t.b, fam.x0()) != t.c {
                    issues.push(format!("{sign:?} #{i}: x0 does not reproduce c"));
                }
            }
        }
    }
    verdict(
        3,
        "iff",
        issues.is_empty() && agree == 600,
        format!("{agree}/600 verdicts agree with oracle, {solvable} solvable with exact x0; issues {issues:?}"),
    );
}

#[test]
fn criterion_4_completeness() {
    let mut families = 0;
    let mut kernel_checks = 0;
    let mut issues = Vec::new();
    for sign in [Sign::Minus, Sign::Plus] {
        for (i, t) in iff_instances(sign).iter().enumerate() {
            let Outcome::Solved(fam) = solve(&t.ring, t.sign, &t.a, &t.b, &t.c).unwrap() else {
                continue;
            };
            let oracle = oracle_solve(t.sign, &t.a, &t.b, &t.c).unwrap();
            let report = verify_family_against_oracle(&fam, &oracle, 5);
            families += 1;
            kernel_checks += oracle.kernel_basis.len();
            for c in report.checks.iter().filter(|c| !c.passed) {
                issues.push(format!("{sign:?} #{i} {}: {:?}", c.name, c.witness));
            }
        }
    }
    verdict(
        4,
        "completeness",
        issues.is_empty() && families > 0,
        format!("{families} families, {kernel_checks} kernel elements fixed by phi, 5 v each in kernel; issues {issues:?}"),
    );
}

#[test]
fn criterion_5_corollaries() {
    let mut agree = 0;
    let mut solvable = 0;
    let mut issues = Vec::new();
    for kind in [EquationKind::SymRight, EquationKind::SymLeft] {
        for i in 0..200 {
            let inv = INVOLUTIONS[(i / 12) % 2];
            let n = 1 + (i / 4) % 3;
            let ring = MatrixRing::<Q>::new(n, inv);
            let mut r = rng(5000 + 1000 * (kind == EquationKind::SymLeft) as u64 + i as u64);
            let a = match i % 5 {
                4 => random_any_rank(n, n, inv, &mut r),
                _ => square_pair(family_for(i), n, inv, &mut r).unwrap().0,
            };
            let b = match i % 3 {
                0 => symmetric_rhs(kind, &a, true, &mut r),
                1 => random_symmetric_rhs(Sign::Plus, n, inv, &mut r),
                _ => random_matrix(n, n, inv, &mut r),
            };
            let one = Matrix::identity(n, inv);
            let (outcome, oracle) = if kind == EquationKind::SymRight {
                (solve_sym_right(&ring, &a, &b).unwrap(), oracle_solve(Sign::Plus, &one, &a, &b).unwrap())
            } else {
                (solve_sym_left(&ring, &a, &b).unwrap(), oracle_solve(Sign::Plus, &a.star(), &one, &b).unwrap())
            };
            let ours = outcome.family().is_some();
            if ours == oracle.solvable {
                agree += 1;
            } else {
                issues.push(format!("{kind:?} #{i}: ours {ours}, oracle {}", oracle.solvable));
            }
            let Some(fam) = outcome.family() else { continue };
            solvable += 1;
            for seed in 0..5 {
                let x = family_sample(fam, seed).unwrap();
                // substitute into the original form, not the rewritten one
                let lhs = if kind == EquationKind::SymRight {
                    x.mul(&a.star()).unwrap().add(&a.mul(&x.star()).unwrap()).unwrap()
                } else {
                    a.star().mul(&x).unwrap().add(&x.star().mul(&a).unwrap()).unwrap()
                };
                if lhs != b {
                    issues.push(format!("{kind:?} #{i} seed {seed}: substitution fails"));
                }
            }
        }
    }
    verdict(
        5,
        "corollaries",
        issues.is_empty() && agree == 400,
        format!("{agree}/400 verdicts agree with oracle, {solvable} solvable x 5 samples verified; issues {issues:?}"),
    );
}

#[test]
fn criterion_6_embedding() {
    let mut issues = Vec::new();
    let mut solvable = 0;
    for i in 0..150 {
        let mut r = rng(7000 + i as u64);
        let dims = Dims::new(r.gen_range(1..=2), r.gen_range(1..=2), r.gen_range(1..=2));
        let inv = INVOLUTIONS[i % 2];
        let family = if (i / 2) % 2 == 0 { Family::Diagonal } else { Family::Rejection };
        let sign = sign_of(i / 4);
        let (a, b) = rect_pair(family, dims, inv, &mut r).unwrap();
        let c = two_sided_rhs(sign, &a, &b, r.gen_bool(0.5), &mut r);
        let p = RectProblem::new(a.clone(), b.clone(), c).unwrap();
        let emb = embed(&p);
        let (a_dag, b_dag) = embed_mp(&mp_inverse(&a).unwrap(), &mp_inverse(&b).unwrap(), dims).unwrap();
        if !(is_mp_inverse_matrix(&emb.a, &a_dag, 0.0).unwrap() && is_mp_inverse_matrix(&emb.b, &b_dag, 0.0).unwrap()) {
            issues.push(format!("#{i}: embedded MP blocks fail Penrose"));
        }
        let direct = solve_rect(sign, &p, 0.0).unwrap();
        let ring = MatrixRing::<Q>::new(dims.k(), inv);
        let square = solve(&ring, sign, &emb.a, &emb.b, &emb.c).unwrap();
        match (direct.family(), square.family()) {
            (Some(fd), Some(fs)) => {
                solvable += 1;
                let extracted = extract_solution(fs.x0(), dims).unwrap();
                if !(fd.satisfies(fd.x0()) && fs.satisfies(fs.x0()) && fd.satisfies(&extracted)) {
                    issues.push(format!("#{i}: a solution fails substitution"));
                }
                if extracted != *fd.x0() {
                    issues.push(format!("#{i}: extracted x0 differs from direct X0"));
                }
                if family_sample(fd, i as u64).is_err() {
                    issues.push(format!("#{i}: direct family sample fails"));
                }
            }
            (None, None) => {}
            _ => issues.push(format!("#{i}: routes disagree on solvability")),
        }
    }
    verdict(
        6,
        "embedding",
        issues.is_empty(),
        format!("150 instances, {solvable} solvable on both routes with identical X0; issues {issues:?}"),
    );
}

fn float_class(outcome: &Outcome<MatrixRing<ComplexFloat>>) -> (bool, bool) {
    match outcome {
        Outcome::Solved(_) => (true, false),
        Outcome::Unsolvable { solvability, .. } => (false, solvability.verdict() != star_solve::solvers::Verdict::Unsolvable),
        Outcome::HypothesesFail(h) => (false, h.is_indeterminate()),
    }
}

#[test]
fn criterion_7_float_path() {
    let mut matches = 0;
    let mut flagged = 0;
    let mut issues = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..FLOAT_INSTANCES {
        let inv = INVOLUTIONS[(i / 12) % 2];
        let n = 1 + (i / 4) % 3;
        let sign = sign_of(i / 2);
        let mut r = rng(8000 + i as u64);
        let (a, b) = square_pair(family_for(i), n, inv, &mut r).unwrap();
        let c = two_sided_rhs(sign, &a, &b, i % 2 == 0, &mut r);
        let exact = solve(&MatrixRing::new(n, inv), sign, &a, &b, &c).unwrap().family().is_some();

        let (af, bf, cf) = (a.to_float(), b.to_float(), c.to_float());
        let ring = MatrixRing::<ComplexFloat>::with_tol(n, inv, RING_FLOAT_TOL);
        let outcome = solve(&ring, sign, &af, &bf, &cf).unwrap();
        let (float_solvable, indeterminate) = float_class(&outcome);
        if float_solvable == exact {
            matches += 1;
        } else if indeterminate {
            flagged += 1;
        } else {
            issues.push(format!("#{i}: exact {exact}, float {float_solvable}, not flagged"));
        }
        if let Outcome::Solved(fam) = &outcome {
            let lhs = apply_equation(&ring, sign, &af, &bf, fam.x0());
            let resid = lhs.sub(&cf).unwrap().max_abs() / (1.0 + cf.max_abs());
            worst = worst.max(resid);
            if resid > SOLVE_FLOAT_TOL {
                issues.push(format!("#{i}: residual {resid:e}"));
            }
        }
    }
    verdict(
        7,
        "float_path",
        issues.is_empty() && matches >= FLOAT_MATCH_MIN,
        format!(
            "{matches}/{FLOAT_INSTANCES} verdicts match (min {FLOAT_MATCH_MIN}), {flagged} flagged indeterminate, worst residual {worst:.1e} (bound {SOLVE_FLOAT_TOL:e}); issues {issues:?}"
        ),
    );
}

// CLI contract

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn input(name: &str) -> String {
    golden_dir().join("inputs").join(format!("{name}.json")).display().to_string()
}

struct Run {
    code: i32,
    stdout: String,
    report: Option<String>,
}

fn star_solve(args: &[&str], report: Option<&Path>, env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_star-solve"));
    cmd.args(args).env_remove("STAR_SOLVE_TOL").env_remove("SOURCE_DATE_EPOCH");
    for (k, v) in env {
        cmd.env(k, v);
    }
    if let Some(path) = report {
        cmd.arg("--output").arg(path);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        report: report.and_then(|p| std::fs::read_to_string(p).ok()),
    }
}

/// Blanks the value of the `timestamp` line.
fn normalize(report: &str) -> String {
    report
        .lines()
        .map(|l| if l.trim_start().starts_with("\"timestamp\":") { "  \"timestamp\": \"<timestamp>\",".to_string() } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, actual: &str) -> Result<(), String> {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return Ok(());
    }
    match std::fs::read_to_string(&path) {
        Ok(expected) if expected == actual => Ok(()),
        Ok(_) => Err(format!("{name} differs from golden")),
        Err(_) => Err(format!("{name} missing (run with UPDATE_GOLDEN=1)")),
    }
}

struct Case {
    name: &'static str,
    args: Vec<String>,
    env: Vec<(&'static str, &'static str)>,
    exit: i32,
    /// Substrings the report must contain.
    report_has: Vec<&'static str>,
}

fn case(name: &'static str, args: &[&str], exit: i32, report_has: &[&'static str]) -> Case {
    Case { name, args: args.iter().map(|s| s.to_string()).collect(), env: Vec::new(), exit, report_has: report_has.to_vec() }
}

#[test]
fn criterion_8_cli_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let mut issues = Vec::new();
    let mut ran = 0;

    let mut cases = vec![
        case("mp_rank_one", &["mp", "--input", &input("mp_rank_one")], 0, &["\"1\",\n        \"25\""]),
        case("mp_zero", &["mp", "--input", &input("mp_zero")], 0, &["\"aba = a\""]),
        case("mp_malformed", &["mp", "--input", &input("malformed")], 2, &[]),
        case("mp_overflow", &["mp", "--input", &input("mp_overflow")], 3, &[]),
        case("check_scalar_2i", &["check", "--input", &input("scalar_2i")], 0, &["\"verdict\": \"solvable\""]),
        case("check_range_fail", &["check", "--input", &input("range_fail")], 0, &["\"range_condition\""]),
        case("check_diag", &["check", "--input", &input("diag_unsolvable"), "--oracle"], 0, &["\"H_condition\"", "\"verdict\": \"unsolvable\""]),
        case("solve_scalar_2i", &["solve", "--input", &input("scalar_2i"), "--samples", "2", "--oracle"], 0, &["\"verdict\": \"solvable\""]),
        case("solve_rect", &["solve", "--input", &input("rect_scalar"), "--oracle"], 0, &["\"1\",\n        \"2\""]),
        case("solve_unsolvable", &["solve", "--input", &input("scalar_unsolvable")], 4, &["\"c_star_neq_minus_c\""]),
        case("solve_range_fail", &["solve", "--input", &input("range_fail"), "--oracle"], 5, &["\"hypotheses_fail\""]),
        case("solve_diag", &["solve", "--input", &input("diag_unsolvable"), "--oracle"], 4, &["\"H_condition\""]),
        case("solve_float_oracle", &["solve", "--input", &input("float_near_threshold"), "--oracle"], 2, &[]),
        case("verify_rect", &["verify", "--solution", &input("x_rect_half_i"), "--input", &input("rect_scalar")], 0, &["\"passed\": true"]),
        case("verify_perturbed", &["verify", "--solution", &input("x_perturbed"), "--input", &input("scalar_2i")], 6, &["\"passed\": false"]),
        case("gen_bad_family", &["gen", "--kind", "minus", "--family", "orthogonal"], 2, &[]),
        case("gen_rect_unitary", &["gen", "--kind", "rect_minus", "--family", "unitary", "--dims", "1,1,1"], 2, &[]),
        case("unknown_subcommand", &["factor"], 2, &[]),
    ];
    let mut near = case("check_float_indeterminate", &["check", "--input", &input("float_near_threshold")], 0, &["\"indeterminate\": true"]);
    cases.push(near);
    near = case("check_float_env_tol", &["check", "--input", &input("float_near_threshold")], 0, &["\"indeterminate\": false"]);
    near.env.push(("STAR_SOLVE_TOL", "1e-6"));
    cases.push(near);

    for c in &cases {
        ran += 1;
        let out_path = tmp.path().join(format!("{}.report.json", c.name));
        let args: Vec<&str> = c.args.iter().map(String::as_str).collect();
        let run = star_solve(&args, Some(&out_path), &c.env);
        if run.code != c.exit {
            issues.push(format!("{}: exit {} (expected {})", c.name, run.code, c.exit));
        }
        if let Some(report) = &run.report {
            let norm = normalize(report);
            for needle in &c.report_has {
                if !norm.contains(needle) {
                    issues.push(format!("{}: report lacks {needle:?}", c.name));
                }
            }
            issues.extend(golden(&format!("{}.report.json", c.name), &norm).err());
            issues.extend(golden(&format!("{}.stdout", c.name), &run.stdout).err());
        } else if !c.report_has.is_empty() {
            issues.push(format!("{}: no report written", c.name));
        }
    }

    // verify accepts a solve report and uses its x0
    let solve_report = tmp.path().join("solve_scalar_2i.report.json");
    let run = star_solve(&["verify", "--solution", solve_report.to_str().unwrap(), "--input", &input("scalar_2i")], None, &[]);
    ran += 1;
    if run.code != 0 {
        issues.push(format!("verify_x0: exit {}", run.code));
    }

    // gen: determinism, golden, and guarantees
    let gen_args = ["gen", "--kind", "minus", "--family", "unitary", "--dims", "2", "--seed", "7"];
    let first = star_solve(&gen_args, None, &[]);
    let second = star_solve(&gen_args, None, &[]);
    ran += 2;
    if first.code != 0 || first.stdout != second.stdout {
        issues.push("gen_unitary: not byte-identical across runs".into());
    }
    issues.extend(golden("gen_unitary.instance.json", &first.stdout).err());

    let diag = tmp.path().join("diag3.json");
    let run = star_solve(&["gen", "--kind", "minus", "--family", "diagonal", "--dims", "3", "--seed", "1", "--output", diag.to_str().unwrap()], None, &[]);
    let check = star_solve(&["check", "--input", diag.to_str().unwrap()], Some(&tmp.path().join("diag3.report.json")), &[]);
    ran += 2;
    let hold = check.report.as_deref().is_some_and(|r| r.contains("\"range_ok\": true") && r.contains("\"hermitian_ok\": true"));
    if run.code != 0 || check.code != 0 || !hold {
        issues.push("gen_diagonal: hypotheses not reported as holding".into());
    }

    for kind in ["minus", "plus", "sym_right", "sym_left", "rect_minus", "rect_plus"] {
        let dims = if kind.starts_with("rect") { "2,1,2" } else { "3" };
        let path = tmp.path().join(format!("force_{kind}.json"));
        let p = path.to_str().unwrap();
        let gen = star_solve(&["gen", "--kind", kind, "--dims", dims, "--seed", "3", "--force-solvable", "--output", p], None, &[]);
        let solved = star_solve(&["solve", "--input", p, "--oracle"], None, &[]);
        ran += 2;
        if gen.code != 0 || solved.code != 0 {
            issues.push(format!("force_solvable {kind}: gen exit {}, solve exit {}", gen.code, solved.code));
        }
    }

    verdict(
        8,
        "cli_contract",
        issues.is_empty(),
        format!("{ran} invocations, exit codes 0/2/3/4/5/6 exercised, goldens byte-stable; issues {issues:?}"),
    );
}

#[test]
fn float_indeterminate_band_is_between_tolerances() {
    // guards the fixture used above: the residual must sit inside (tol, 1e3·tol]
    let c = Matrix::scalar(ComplexFloat::new(1e-8, 2.0), CT).unwrap();
    let residual = c.star().compare(&c.neg(), RING_FLOAT_TOL).unwrap();
    assert!(residual.is_indeterminate(), "{residual:?}");
}

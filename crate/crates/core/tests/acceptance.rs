//! Acceptance suite. Each criterion prints one `PASS` or `FAIL` line; the
//! process exits non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use hermite::ascent::{build_ascent_tree, critical_points, product_inequality, random_poly, semiresultant, verify_bounds, Tolerances};
use hermite::forest::{build_forest, delta_products, triangular_forms, verify_forest, DistanceOracle};
use hermite::hermite::{
    diagonal_product, hermite_matrix, hermite_point, hermite_point_rec, mahler_det, step_matrix, AlphaSet, MultiIndex, PointCache, RatMatrix,
};
use hermite::minima::{check_prop12, trend_constant};
use hermite::padic::{check_lemma31_auto, Verdict};
use hermite::rational::{int, ratio};
use hermite::volume::{thread_count, volume_check};
use hermite::{Error, Rational};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, ok: bool, detail: &str) -> bool {
    println!("{} criterion {id:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn run_cli(args: &[&str]) -> (i32, String, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_hermite")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).expect("utf-8 output"), start.elapsed())
}

/// Data rows of TSV output: lines that are neither the header nor comments.
fn rows(stdout: &str) -> Vec<Vec<String>> {
    stdout
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split('\t').map(str::to_string).collect())
        .filter(|r: &Vec<String>| r[0].parse::<u64>().is_ok())
        .collect()
}

fn quotients(stdout: &str) -> Vec<u64> {
    rows(stdout).iter().map(|r| r[1].parse().expect("integer quotient")).collect()
}

fn distinct_rationals(rng: &mut ChaCha8Rng, s: usize, num: i64, den: i64) -> Vec<Rational> {
    let mut v: Vec<Rational> = Vec::new();
    while v.len() < s {
        let x = ratio(rng.random_range(-num..=num), rng.random_range(1..=den));
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v
}

fn criterion_01_cf_prefix_of_e3() -> bool {
    let (code, out, t) = run_cli(&["cf", "--alpha", "3", "--count", "11"]);
    let q = quotients(&out);
    let ok = code == 0 && q == [20, 11, 1, 2, 4, 3, 1, 5, 1, 2, 16] && t < Duration::from_secs(1);
    report(1, "cf prefix of e^3", ok, &format!("{q:?} in {:.3}s", t.as_secs_f64()))
}

fn criterion_02_cf_of_e() -> bool {
    let (code, out, _) = run_cli(&["cf", "--alpha", "1", "--count", "10"]);
    let q = quotients(&out);
    let ok = code == 0 && q == [2, 1, 2, 1, 1, 4, 1, 1, 6, 1];
    report(2, "cf of e", ok, &format!("{q:?}"))
}

fn criterion_03_record_table() -> bool {
    let expected: [(u64, u64, f64); 10] = [
        (1, 11, 0.0),
        (10, 16, 9.4),
        (31, 68, 34.5),
        (87, 189, 97.9),
        (133, 492, 151.1),
        (211, 739, 256.6),
        (244, 2566, 297.6),
        (388, 5885, 475.0),
        (2708, 6384, 3307.2),
        (8055, 10409, 9614.8),
    ];
    let (code, out, t) = run_cli(&["records", "--alpha", "3", "--qmax-log10", "5000"]);
    let got: Vec<(u64, u64, f64)> =
        rows(&out).iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap())).collect();
    let mut bad = Vec::new();
    for (i, e) in expected.iter().enumerate() {
        match got.get(i) {
            Some(g) if g.0 == e.0 && g.1 == e.1 && (g.2 - e.2).abs() <= 0.1 + 1e-9 => {}
            g => bad.push(format!("row {i}: expected {e:?}, got {g:?}")),
        }
    }
    let through = got.iter().any(|g| g.0 == 9437);
    let ok = code == 0 && bad.is_empty() && through && t < Duration::from_secs(300);
    report(3, "record table", ok, &format!("{} rows, through n=9437: {through}, {:.2}s {}", got.len(), t.as_secs_f64(), bad.join("; ")))
}

fn criterion_04_measure_inequality() -> bool {
    let (code, out, _) = run_cli(&["verify-measure", "--alpha", "3", "--qmax-log10", "2000"]);
    let ok = code == 0 && out.contains("all checks passed");
    let summary = out.lines().filter(|l| !l.starts_with('#')).last().unwrap_or("").to_string();
    report(4, "measure inequality", ok, &format!("exit {code}, {summary}"))
}

fn criterion_05_exact_identities() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    for case in 0..200 {
        let s = rng.random_range(1..=4usize);
        let alphas = AlphaSet::new(distinct_rationals(&mut rng, s, 6, 4)).unwrap();
        let n = MultiIndex::new((0..s).map(|_| rng.random_range(1..=6)).collect());
        let a = hermite_matrix(&alphas, &n).unwrap().matrix;
        // Rows rebuilt from the direct polynomial construction.
        let direct = RatMatrix((0..s).map(|l| hermite_point(&alphas, &n.shifted(l, -1)).unwrap().0).collect());
        if a != direct {
            failures.push(format!("case {case}: recursion differs from direct points"));
        }
        let rec = hermite_point_rec(&alphas, &n, &mut PointCache::new()).unwrap();
        if rec != hermite_point(&alphas, &n).unwrap() {
            failures.push(format!("case {case}: point recursion at n"));
        }
        if direct.det() != mahler_det(&alphas, &n).unwrap() {
            failures.push(format!("case {case}: determinant"));
        }
        let ell = rng.random_range(1..=s);
        let next = hermite_matrix(&alphas, &n.shifted(ell - 1, 1)).unwrap().matrix;
        if &step_matrix(&alphas, &n, ell).unwrap() * &a != next {
            failures.push(format!("case {case}: step matrix"));
        }
        let m = rng.random_range(1..=6u64);
        let alpha = distinct_rationals(&mut rng, 1, 6, 4).remove(0);
        if alpha != Rational::from_integer(0.into()) {
            let pair = AlphaSet::new(vec![int(0), alpha.clone()]).unwrap();
            let nn = MultiIndex::new(vec![m as i64, m as i64]);
            if diagonal_product(m, &alpha) != hermite_matrix(&pair, &nn).unwrap().matrix {
                failures.push(format!("case {case}: diagonal product"));
            }
        }
    }
    report(5, "exact identities", failures.is_empty(), &format!("200 instances, {} failures {}", failures.len(), failures.join("; ")))
}

fn criterion_06_semiresultant() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let tol = Tolerances::default();
    let (mut worst_dev, mut worst_gap, mut failures) = (0.0f64, f64::NEG_INFINITY, 0);
    for i in 0..100 {
        let f = random_poly(&mut rng, 12, 0.05, i % 2 == 1);
        let crit = critical_points(&f, &tol).unwrap();
        let sr = semiresultant(&f, &crit);
        let (lhs, rhs) = product_inequality(&f, &crit);
        worst_dev = worst_dev.max(sr.relative_deviation);
        worst_gap = worst_gap.max(lhs - rhs);
        if !(sr.relative_deviation <= 1e-8 && lhs <= rhs + 1e-9) {
            failures += 1;
        }
    }
    report(
        6,
        "semi-resultant",
        failures == 0,
        &format!("100 polynomials, max relative deviation {worst_dev:.2e}, max ln(lhs/rhs) {worst_gap:.3}"),
    )
}

fn criterion_07_ascent_trees() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tol = Tolerances::default();
    let (mut aborted, mut wrong, mut jitters) = (0, Vec::new(), 0);
    for i in 0..100u64 {
        let f = random_poly(&mut rng, 10, 0.05, false);
        let tree = match build_ascent_tree(&f, i, &tol, 1) {
            Ok(t) => t,
            Err(Error::Numerical(msg)) => {
                println!("  instance {i} aborted: {msg}");
                aborted += 1;
                continue;
            }
            Err(e) => {
                wrong.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        jitters += tree.jitters();
        if tree.edges.len() + 1 != f.distinct() {
            wrong.push(format!("instance {i}: {} edges for {} roots", tree.edges.len(), f.distinct()));
            continue;
        }
        match verify_bounds(&tree, 1e-6) {
            Ok(r) if r.passed() => {}
            Ok(r) => wrong.push(format!("instance {i}: {:?}", r.violations)),
            Err(Error::Numerical(msg)) => {
                println!("  instance {i} aborted: {msg}");
                aborted += 1;
            }
            Err(e) => wrong.push(format!("instance {i}: {e}")),
        }
    }
    let ok = wrong.is_empty() && aborted <= 1;
    report(7, "ascent trees", ok, &format!("100 polynomials, {aborted} aborted, {jitters} jitters {}", wrong.join("; ")))
}

fn criterion_08_ultrametric_forests() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    for case in 0..500 {
        let p = [2u64, 3, 5][case % 3];
        let oracle = DistanceOracle::new(p).unwrap();
        let s = rng.random_range(1..=8usize);
        // Numerators carrying powers of p give non-trivial depth.
        let mut v: Vec<Rational> = Vec::new();
        while v.len() < s {
            let e = rng.random_range(0..=3u32);
            let x = ratio(rng.random_range(-9..=9) * (p as i64).pow(e), rng.random_range(1..=3));
            if !v.contains(&x) {
                v.push(x);
            }
        }
        let pts = AlphaSet::new(v).unwrap();
        let delta = oracle.default_delta();
        let forest = build_forest(&pts, &delta, &oracle);
        if let Err(w) = verify_forest(&forest, &pts, &delta, &oracle) {
            failures.push(format!("case {case}: {w:?}"));
            continue;
        }
        let n = MultiIndex::new((0..s).map(|_| rng.random_range(1..=4)).collect());
        if !delta_products(&forest, &pts, &n, &delta, &oracle).unwrap().identity_holds() {
            failures.push(format!("case {case}: product identity"));
        }
        let (m, _) = triangular_forms(&forest, |a, b| Some(pts.get(b) - pts.get(a))).unwrap();
        if !m.is_unit_lower_triangular() || m.det() != Rational::one() {
            failures.push(format!("case {case}: triangular forms"));
        }
    }
    report(8, "ultrametric forests", failures.is_empty(), &format!("500 instances, {} failures {}", failures.len(), failures.join("; ")))
}

fn criterion_09_ultrametric_estimates() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut failures, mut mixed_checked) = (Vec::new(), 0);
    for case in 0..100 {
        let p = [2u64, 3, 5, 7][rng.random_range(0..4)];
        let s = rng.random_range(2..=4usize);
        let mut v: Vec<Rational> = Vec::new();
        while v.len() < s {
            let e = rng.random_range(0..=2u32);
            let x = ratio(rng.random_range(-6..=6) * (p as i64).pow(e), rng.random_range(1..=3));
            if !v.contains(&x) {
                v.push(x);
            }
        }
        let alphas = AlphaSet::new(v).unwrap();
        let n = MultiIndex::new((0..s).map(|_| rng.random_range(1..=5)).collect());
        let i = rng.random_range(0..s);
        let j = (i + rng.random_range(1..s)) % s;
        match check_lemma31_auto(&alphas, &n, i, j, p, 16, 4096) {
            Ok(r) if !r.any_violated() => mixed_checked += (r.mixed_bound == Verdict::Holds) as usize,
            Ok(r) => failures.push(format!("case {case}: {r:?}")),
            Err(e) => failures.push(format!("case {case}: {e}")),
        }
    }
    report(
        9,
        "ultrametric estimates",
        failures.is_empty(),
        &format!("100 cases, mixed estimate applicable in {mixed_checked}, {} failures {}", failures.len(), failures.join("; ")),
    )
}

fn criterion_10_minima_sandwich() -> bool {
    let start = Instant::now();
    let rows = check_prop12(20).unwrap();
    let t = start.elapsed();
    let bad: Vec<u64> = rows.iter().filter(|r| !r.sandwich_holds || !r.sublattice_check).map(|r| r.n).collect();
    let c = trend_constant(&rows);
    let (c_first, c_second) = (trend_constant(&rows[..10]), trend_constant(&rows[10..]));
    // Boundedness: the constant needed on n = 11..20 does not exceed the one on n = 1..10.
    let ok = rows.len() == 20 && bad.is_empty() && c_second <= c_first && t < Duration::from_secs(120);
    report(
        10,
        "minima sandwich",
        ok,
        &format!("n=1..20, sandwich failures {bad:?}, trend constant {c:.4} (first half {c_first:.4}, second half {c_second:.4}), {:.2}s", t.as_secs_f64()),
    )
}

fn volume_instance(alphas: &[i64], n: &[i64]) -> (bool, String) {
    let start = Instant::now();
    let r = volume_check(&AlphaSet::from_ints(alphas).unwrap(), &MultiIndex::new(n.to_vec()), 1_000_000, 11, thread_count()).unwrap();
    let t = start.elapsed();
    let ok = r.consistent && t < Duration::from_secs(60);
    let detail = format!(
        "alphas {alphas:?} n {n:?}: {:.4} ± {:.4} in [{:.4}, {:.4e}], {:.2}s",
        r.estimate.estimate,
        3.0 * r.estimate.stderr,
        r.sandwich.lower,
        r.sandwich.upper,
        t.as_secs_f64()
    );
    (ok, detail)
}

fn criterion_11_volume_sandwich() -> bool {
    let (ok2, d2) = volume_instance(&[0, 3], &[2, 2]);
    let (ok3, d3) = volume_instance(&[0, 1, 3], &[2, 2, 2]);
    report(11, "volume sandwich", ok2 && ok3, &format!("{d2}; {d3}"))
}

fn main() {
    let criteria: [fn() -> bool; 11] = [
        criterion_01_cf_prefix_of_e3,
        criterion_02_cf_of_e,
        criterion_03_record_table,
        criterion_04_measure_inequality,
        criterion_05_exact_identities,
        criterion_06_semiresultant,
        criterion_07_ascent_trees,
        criterion_08_ultrametric_forests,
        criterion_09_ultrametric_estimates,
        criterion_10_minima_sandwich,
        criterion_11_volume_sandwich,
    ];
    let failed = criteria.iter().filter(|c| !c()).count();
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

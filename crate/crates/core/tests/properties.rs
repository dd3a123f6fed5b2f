//! Property tests over randomly generated inputs.

use hermite::ascent::{critical_points, semiresultant, ComplexPoly, Tolerances};
use hermite::cf::{stream_cf, Limit};
use hermite::forest::{build_forest, delta_products, triangular_forms, verify_forest, DistanceOracle};
use hermite::hermite::{diagonal_product, hermite_matrix, hermite_point, hermite_point_rec, mahler_det, step_matrix, AlphaSet, MultiIndex, PointCache};
use hermite::interval::{common_cf_prefix, exp_interval};
use hermite::padic::{le_scaled, padic_exp, val_rational, LogAbs, PAdicContext};
use hermite::rational::{int, ratio};
use hermite::volume::{archimedean_body, mc_volume};
use hermite::Rational;
use num_complex::Complex64;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn distinct(v: Vec<Rational>) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::new();
    for x in v {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(a, b)| ratio(a, b))
}

/// Distinct small rationals with a matching positive multi-index.
fn alphas_and_index(max_s: usize, max_n: i64) -> impl Strategy<Value = (AlphaSet, MultiIndex)> {
    prop::collection::vec(small_rational(), 1..=max_s)
        .prop_map(distinct)
        .prop_flat_map(move |v| {
            let s = v.len();
            (Just(v), prop::collection::vec(1..=max_n, s))
        })
        .prop_map(|(v, n)| (AlphaSet::new(v).unwrap(), MultiIndex::new(n)))
}

/// Distinct rationals whose numerators carry random powers of `p`.
fn padic_points(p: u64, max_s: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-9i64..=9, 0u32..=3, 1i64..=3), 1..=max_s)
        .prop_map(move |v| distinct(v.into_iter().map(|(a, e, b)| ratio(a * (p as i64).pow(e), b)).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinant_matches_closed_form((alphas, n) in alphas_and_index(4, 5)) {
        let a = hermite_matrix(&alphas, &n).unwrap().matrix;
        prop_assert_eq!(a.det(), mahler_det(&alphas, &n).unwrap());
    }

    #[test]
    fn recursion_matches_direct_points((alphas, n) in alphas_and_index(4, 5)) {
        let rec = hermite_point_rec(&alphas, &n, &mut PointCache::new()).unwrap();
        prop_assert_eq!(rec, hermite_point(&alphas, &n).unwrap());
    }

    #[test]
    fn step_matrix_advances((alphas, n) in alphas_and_index(4, 4), pick in 0usize..4) {
        let ell = pick % alphas.len() + 1;
        let a = hermite_matrix(&alphas, &n).unwrap().matrix;
        let next = hermite_matrix(&alphas, &n.shifted(ell - 1, 1)).unwrap().matrix;
        prop_assert_eq!(&step_matrix(&alphas, &n, ell).unwrap() * &a, next);
    }

    #[test]
    fn diagonal_product_is_hermite_matrix(alpha in small_rational(), n in 1u64..=8) {
        prop_assume!(!alpha.is_zero());
        let pair = AlphaSet::new(vec![int(0), alpha.clone()]).unwrap();
        let nn = MultiIndex::new(vec![n as i64, n as i64]);
        prop_assert_eq!(diagonal_product(n, &alpha), hermite_matrix(&pair, &nn).unwrap().matrix);
    }

    #[test]
    fn exp_enclosure_contains_value(a in -40i64..=40, b in 1i64..=7) {
        let x = ratio(a, b);
        let iv = exp_interval(&x, 80);
        let f = (a as f64 / b as f64).exp();
        let (lo, hi) = iv.to_f64_pair();
        prop_assert!(lo <= f * (1.0 + 1e-15) && f * (1.0 - 1e-15) <= hi);
        prop_assert!(iv.relative_width() < 1e-20);
        // Refinement at higher precision stays inside the coarse enclosure.
        prop_assert!(iv.intersects(&exp_interval(&x, 200)));
        let (a2, b2) = (exp_interval(&x, 200), exp_interval(&-&x, 200));
        let prod = &a2 * &b2;
        prop_assert!(prod.contains(&Rational::one()));
    }

    #[test]
    fn cf_stream_agrees_with_enclosure(a in 1i64..=5, b in 1i64..=3) {
        let alpha = ratio(a, b);
        let prefix = common_cf_prefix(&exp_interval(&alpha, 600), 40);
        prop_assume!(prefix.len() >= 10);
        let stream: Vec<_> = stream_cf(&alpha, Limit::Count(10)).unwrap().map(|q| q.unwrap().value).collect();
        let expect: Vec<_> = prefix[..10].iter().map(|q| q.to_biguint().unwrap()).collect();
        prop_assert_eq!(stream, expect);
    }

    #[test]
    fn factorial_sandwich(k in 1u64..=200, pi in 0usize..4) {
        let p = [2u64, 3, 5, 7][pi];
        let d = LogAbs::delta(p).powi(k as i64);
        let f = LogAbs::of_factorial(p, k);
        prop_assert!(d <= f);
        prop_assert!(le_scaled(p, &f, p * p * k, &d));
    }

    #[test]
    fn padic_exp_is_multiplicative(a in -20i64..=20, b in -20i64..=20, d in 1i64..=4, k in 1u32..=12) {
        let p = 3u64;
        let (x, y) = (ratio(3 * a, 3 * d + 1), ratio(9 * b, 3 * d + 2));
        let ctx = PAdicContext::new(p, k).unwrap();
        let m = ctx.modulus();
        let ex = padic_exp(&ctx, &x).unwrap().residue;
        let ey = padic_exp(&ctx, &y).unwrap().residue;
        let exy = padic_exp(&ctx, &(&x + &y)).unwrap().residue;
        prop_assert_eq!((ex.clone() * ey) % &m, exy);
        let finer = padic_exp(&PAdicContext::new(p, k + 5).unwrap(), &x).unwrap().residue;
        prop_assert_eq!(finer % &m, ex);
    }

    #[test]
    fn ultrametric_inequality(x in small_rational(), y in small_rational(), z in small_rational(), pi in 0usize..3) {
        let p = [2u64, 3, 5][pi];
        let o = DistanceOracle::new(p).unwrap();
        let (xy, yz, xz) = (o.dist(&x, &y), o.dist(&y, &z), o.dist(&x, &z));
        prop_assert!(xz <= std::cmp::max(xy.clone(), yz.clone()));
        prop_assert_eq!(xy.is_zero(), x == y);
        prop_assert_eq!(LogAbs::of_rational(p, &(&x - &y)), xy);
        prop_assert_eq!(val_rational(p, &(&x * &y)), val_rational(p, &x).zip(val_rational(p, &y)).map(|(a, b)| a + b));
    }

    #[test]
    fn forests_verify_and_factor(
        (pi, pts) in (0usize..3).prop_flat_map(|pi| (Just(pi), padic_points([2u64, 3, 5][pi], 8))),
        n in prop::collection::vec(1i64..=4, 8),
    ) {
        let p = [2u64, 3, 5][pi];
        let o = DistanceOracle::new(p).unwrap();
        let s = pts.len();
        let pts = AlphaSet::new(pts).unwrap();
        let delta = o.default_delta();
        let forest = build_forest(&pts, &delta, &o);
        prop_assert!(verify_forest(&forest, &pts, &delta, &o).is_ok());
        prop_assert_eq!(forest.edges.len() + forest.roots.len(), s);
        let n = MultiIndex::new(n[..s].to_vec());
        prop_assert!(delta_products(&forest, &pts, &n, &delta, &o).unwrap().identity_holds());
        let (m, order) = triangular_forms(&forest, |a, b| Some(pts.get(a) + pts.get(b))).unwrap();
        prop_assert!(m.is_unit_lower_triangular());
        prop_assert_eq!(m.det(), Rational::one());
        prop_assert_eq!(order.len(), s);
    }

    #[test]
    fn semiresultant_identity(
        roots in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 1u32..=3), 2..=6),
    ) {
        let zs: Vec<Complex64> = roots.iter().map(|r| Complex64::new(r.0, r.1)).collect();
        for i in 0..zs.len() {
            for j in 0..i {
                prop_assume!((zs[i] - zs[j]).norm() >= 0.05);
            }
        }
        let f = ComplexPoly::from_roots(zs, roots.iter().map(|r| r.2).collect()).unwrap();
        let crit = critical_points(&f, &Tolerances::default()).unwrap();
        prop_assert_eq!(crit.total_multiplicity() as usize, f.distinct() - 1);
        prop_assert!(semiresultant(&f, &crit).relative_deviation <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn volume_estimate_is_thread_independent(seed in 0u64..1000, threads in 2usize..=8) {
        let spec = archimedean_body(&AlphaSet::from_ints(&[0, 1, 3]).unwrap(), &MultiIndex::new(vec![1, 2, 1]), 64).unwrap();
        let one = mc_volume(&spec, 20_000, seed, 1).unwrap();
        let many = mc_volume(&spec, 20_000, seed, threads).unwrap();
        prop_assert_eq!(one.estimate.to_bits(), many.estimate.to_bits());
        prop_assert_eq!(one.hits, many.hits);
    }
}

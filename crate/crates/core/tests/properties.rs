use branchint::group::{discriminant, discriminant_by_roots, GroupElement};
use branchint::integrand::{integrand_density, BranchState, KFiniteFunction, MatrixElementIntegrand};
use branchint::quadric::{projective_clearance, Quadric};
use branchint::sampling::random_complex_element;
use branchint::sl2::theta;
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn complex() -> impl Strategy<Value = C> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| C::new(re, im))
}

fn vector(n: usize) -> impl Strategy<Value = Vec<C>> {
    prop::collection::vec(complex(), n).prop_filter("nonzero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-2)
}

fn symmetric(n: usize) -> impl Strategy<Value = Quadric> {
    prop::collection::vec(complex(), n * n).prop_filter_map("nonzero quadric", move |v| {
        let m = DMatrix::from_fn(n, n, |i, j| (v[i * n + j] + v[j * n + i]) * 0.5);
        Quadric::new(m).ok()
    })
}

fn scale() -> impl Strategy<Value = C> {
    (0.1..10.0f64, -3.0..3.0f64).prop_map(|(r, t)| C::from_polar(r, t))
}

proptest! {
    #[test]
    fn clearance_is_projective(q in symmetric(3), x in vector(3), lambda in scale()) {
        let y: Vec<C> = x.iter().map(|z| z * lambda).collect();
        let (a, b) = (projective_clearance(&x, &q), projective_clearance(&y, &q));
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn theta_is_even_and_tracks_the_divisor(entries in prop::collection::vec(complex(), 4), zero in 0usize..5) {
        let mut m = DMatrix::from_row_slice(2, 2, &entries);
        if zero < 4 {
            m[(zero / 2, zero % 2)] = C::new(0.0, 0.0);
        }
        let det = m.determinant();
        prop_assume!(det.norm() > 1e-2);
        let g = GroupElement::new(m / det.sqrt()).unwrap();
        let minus = GroupElement::new(-g.entries().clone()).unwrap();
        let (t, u) = (theta(&g).unwrap(), theta(&minus).unwrap());
        prop_assert_eq!(t.on_divisor, u.on_divisor);
        prop_assert_eq!(t.on_divisor, zero < 4);
        match (t.theta, u.theta) {
            (Some(a), Some(b)) => prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0)),
            (None, None) => {}
            _ => prop_assert!(false, "theta defined for only one of g, -g"),
        }
    }

    #[test]
    fn density_has_degree_zero(
        x in vector(2),
        v in vector(2),
        g_entries in prop::collection::vec(complex(), 4),
        lambda in scale(),
        alpha in complex(),
        k1 in 0u32..3,
        k2 in 0u32..3,
    ) {
        let m = DMatrix::from_row_slice(2, 2, &g_entries);
        let det = m.determinant();
        prop_assume!(det.norm() > 1e-2);
        let g = GroupElement::new(m / det.sqrt()).unwrap();
        let unit = Quadric::unit(2);
        let (q, qg) = (unit.eval(&x), unit.eval(&g.act(&x)));
        prop_assume!(q.norm() > 1e-2 && qg.norm() > 1e-2);
        let f1 = KFiniteFunction::new(vec![k1, k1]).unwrap();
        let f2 = KFiniteFunction::new(vec![2 * k2, 0]).unwrap();
        let ig = MatrixElementIntegrand::new(g, alpha, f1, f2).unwrap();
        let branch = BranchState::principal(q, qg).unwrap();
        let a = integrand_density(&ig, &x, &[v.clone()], &branch).unwrap();
        let two_log = 2.0 * lambda.ln();
        let scaled = BranchState {
            log_q_source: branch.log_q_source + two_log,
            log_q_target: branch.log_q_target + two_log,
        };
        let y: Vec<C> = x.iter().map(|z| z * lambda).collect();
        let w: Vec<C> = v.iter().map(|z| z * lambda).collect();
        let b = integrand_density(&ig, &y, &[w], &scaled).unwrap();
        prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1e-12), "{} vs {}", a, b);
    }

    #[test]
    fn discriminant_two_ways(seed in any::<u64>(), four in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_complex_element(if four { 4 } else { 2 }, &mut rng);
        let by_resultant = discriminant(&g);
        let by_roots = discriminant_by_roots(&g).unwrap();
        let scale = by_resultant.norm().max(by_roots.norm()).max(1e-12);
        prop_assert!((by_resultant - by_roots).norm() <= 1e-8 * scale);
    }
}

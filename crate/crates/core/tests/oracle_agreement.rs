use branchint::continuation::continue_path;
use branchint::group::{GroupElement, GroupPath, DEFAULT_DISC_FLOOR};
use branchint::integrand::KFiniteFunction;
use branchint::isotopy::IsotopyConfig;
use branchint::sampling::random_rotation;
use branchint::sl2::oracle_continue;
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn element(k1: &GroupElement, a: C, k2: &GroupElement) -> GroupElement {
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![a, a.inv()]));
    GroupElement::new(k1.entries() * d * k2.entries()).unwrap()
}

#[test]
fn engine_matches_oracle_on_random_short_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let config = IsotopyConfig {
        delta_target: 0.15,
        ..IsotopyConfig::default()
    };
    let choices: [([u32; 2], [u32; 2], C); 3] = [
        ([0, 0], [0, 0], C::new(0.3, 0.0)),
        ([1, 1], [0, 0], C::new(0.5, 0.25)),
        ([2, 0], [0, 2], C::new(-0.2, 0.1)),
    ];
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let k1 = random_rotation(2, &mut rng);
        let k2 = random_rotation(2, &mut rng);
        let modulus = 1.25 + 0.5 * rng.random::<f64>();
        let mut waypoints = vec![element(&k1, C::new(modulus, 0.0), &k2)];
        let mut arg = 0.0;
        for _ in 0..2 {
            arg += (rng.random::<f64>() - 0.5) * 0.6;
            let m = modulus * (1.0 + 0.1 * (rng.random::<f64>() - 0.5));
            waypoints.push(element(&k1, C::from_polar(m, arg), &k2));
        }
        let path = GroupPath::new(waypoints, 16, DEFAULT_DISC_FLOOR).unwrap();
        let (e1, e2, alpha) = choices[trial % choices.len()];
        let f1 = KFiniteFunction::new(e1.to_vec()).unwrap();
        let f2 = KFiniteFunction::new(e2.to_vec()).unwrap();
        let engine = continue_path(&path, &f1, &f2, alpha, 256, &config).unwrap().value;
        let oracle = oracle_continue(&path, &f1, &f2, alpha).unwrap();
        let rel = (engine - oracle).norm() / oracle.norm();
        worst = worst.max(rel);
        assert!(rel <= 1e-4, "trial {trial}: engine {engine} oracle {oracle} rel {rel:.2e}");
    }
    println!("worst relative disagreement {worst:.2e}");
}

use inclusion_core::algorithms::{run, Algorithm, AlgorithmConfig};
use inclusion_core::point::{dist, dist_sq, dot, Point};
use inclusion_core::problem::{make_antidiagonal_problem, make_bilinear_box_problem, make_rotation_problem_from_cos};
use inclusion_core::prox::ProxFunction;
use inclusion_core::{FeasibleSet, MaximalMonotoneOperator};
use ndarray::Array1;
use proptest::prelude::*;

const DIM: usize = 4;

fn point() -> impl Strategy<Value = Point> {
    prop::collection::vec(-5.0..5.0f64, DIM).prop_map(Array1::from_vec)
}

fn operator() -> impl Strategy<Value = MaximalMonotoneOperator> {
    prop_oneof![
        Just(MaximalMonotoneOperator::Zero),
        Just(MaximalMonotoneOperator::NormalCone(FeasibleSet::nonneg_orthant(DIM))),
        Just(MaximalMonotoneOperator::NormalCone(FeasibleSet::uniform_box(DIM, -1.0, 2.0).unwrap())),
        Just(MaximalMonotoneOperator::NormalCone(FeasibleSet::ball(Array1::ones(DIM), 1.5).unwrap())),
        Just(MaximalMonotoneOperator::NormalCone(
            FeasibleSet::halfspace(Array1::from_vec(vec![1.0, -2.0, 0.5, 0.0]), 0.3).unwrap()
        )),
        Just(MaximalMonotoneOperator::Subgradient(ProxFunction::L1Norm)),
        Just(MaximalMonotoneOperator::Subgradient(ProxFunction::L2Norm)),
        Just(MaximalMonotoneOperator::Subgradient(ProxFunction::SquaredL2)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn resolvent_is_firmly_nonexpansive(a in operator(), x in point(), y in point(), eta in 0.01..3.0f64) {
        let jx = a.resolvent(eta, &x).unwrap();
        let jy = a.resolvent(eta, &y).unwrap();
        let lhs = dist_sq(&jx, &jy);
        let rhs = dot(&(&jx - &jy), &(&x - &y));
        prop_assert!(lhs <= rhs + 1e-10 * (1.0 + rhs.abs()), "{lhs} > {rhs}");
    }

    #[test]
    fn resolvent_certificate_lies_in_graph(a in operator(), x in point(), eta in 0.01..3.0f64) {
        let j = a.resolvent(eta, &x).unwrap();
        let c = (&x - &j) / eta;
        prop_assert!(a.graph_contains(&j, &c, 1e-9).unwrap());
    }

    #[test]
    fn projection_is_idempotent(x in point()) {
        for set in [
            FeasibleSet::nonneg_orthant(DIM),
            FeasibleSet::uniform_box(DIM, -1.0, 2.0).unwrap(),
            FeasibleSet::ball(Array1::zeros(DIM), 2.0).unwrap(),
        ] {
            let p = set.project(&x).unwrap();
            prop_assert!(set.contains(&p, 1e-12).unwrap());
            prop_assert!(dist(&set.project(&p).unwrap(), &p) <= 1e-12);
        }
    }

    #[test]
    fn call_counts_follow_iteration_count(alg_idx in 0usize..5, t in 0usize..60, eta in 0.01..0.2f64) {
        let alg = Algorithm::ALL[alg_idx];
        let p = make_antidiagonal_problem(DIM).unwrap();
        let traj = run(&p, &AlgorithmConfig::new(alg, eta, t, Array1::ones(DIM))).unwrap();
        prop_assert_eq!(traj.records.len(), t + 1);
        for rec in &traj.records {
            let k = rec.t as u64;
            prop_assert_eq!(rec.gradient_calls, alg.initial_gradient_calls() + k * alg.gradient_calls_per_iteration());
            prop_assert_eq!(rec.resolvent_calls, k * alg.resolvent_calls_per_iteration());
        }
    }

    #[test]
    fn solution_is_a_fixed_point(alg_idx in 0usize..5, eta in 0.01..0.3f64) {
        let alg = Algorithm::ALL[alg_idx];
        let p = make_rotation_problem_from_cos(1.0, -0.01).unwrap();
        let traj = run(&p, &AlgorithmConfig::new(alg, eta, 10, Array1::zeros(2))).unwrap();
        for rec in &traj.records {
            prop_assert!(rec.z.iter().all(|v| *v == 0.0));
            prop_assert_eq!(rec.residuals.natural, 0.0);
        }
    }

    #[test]
    fn constrained_runs_certify_and_order_residuals(alg_idx in 0usize..5, z0 in point(), eta in 0.05..0.3f64) {
        let alg = Algorithm::ALL[alg_idx];
        let p = make_bilinear_box_problem(DIM, 1.0).unwrap();
        let traj = run(&p, &AlgorithmConfig::new(alg, eta, 30, z0)).unwrap();
        let a = p.monotone_part();
        for rec in &traj.records {
            if let (Some(zh), Some(c)) = (&rec.z_half, &rec.half_certificate) {
                prop_assert!(a.graph_contains(zh, c, 1e-9).unwrap());
            }
            if alg == Algorithm::Og || rec.t == 0 {
                continue;
            }
            let c = rec.certificate.as_ref().expect("certificate after the first step");
            prop_assert!(a.graph_contains(&rec.z, c, 1e-9).unwrap());
            let r = &rec.residuals;
            let tangent = r.tangent_exact.unwrap();
            let certified = r.certified.unwrap();
            prop_assert!(r.natural <= tangent * (1.0 + 1e-12) + 1e-14);
            prop_assert!(tangent <= certified * (1.0 + 1e-12) + 1e-14);
        }
    }

    #[test]
    fn runs_are_deterministic(alg_idx in 0usize..5, z0 in point(), seed in any::<u64>()) {
        let alg = Algorithm::ALL[alg_idx];
        let p = make_bilinear_box_problem(DIM, 1.0).unwrap();
        let cfg = AlgorithmConfig::new(alg, 0.1, 20, z0).with_seed(seed);
        prop_assert_eq!(run(&p, &cfg).unwrap().records, run(&p, &cfg).unwrap().records);
    }
}

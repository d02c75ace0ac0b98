use fairrecov::graphs::{erdos_renyi, grid, Graph};
use fairrecov::model::{labels_to_f64, observe, sample_fair_attributes, sample_labels, Instance};
use fairrecov::rng::sub_seed;
use fairrecov::solver::{
    brute_force, dual_certificate, round_matrix, round_solution, solve_sdp, SdpConfig, SdpStatus, DEFAULT_FEAS_TOL,
};
use fairrecov::spectral::{eig_sym, norm2, SymMatrix};
use proptest::prelude::*;

fn connected_er(n: usize, r: f64, seed: u64) -> Graph {
    (0u64..)
        .map(|i| erdos_renyi(n, r, sub_seed(seed, &[i])).unwrap())
        .find(Graph::is_connected)
        .unwrap()
}

fn instance(n: usize, k: usize, p: f64, seed: u64) -> (Instance, fairrecov::model::Observation) {
    let g = connected_er(n, 0.45, seed);
    let y = sample_labels(n, sub_seed(seed, &[1]));
    let attrs = sample_fair_attributes(&y, k, sub_seed(seed, &[2])).unwrap();
    let inst = Instance::new(g, y, attrs).unwrap();
    let obs = observe(&inst, p, p, sub_seed(seed, &[3])).unwrap();
    (inst, obs)
}

#[test]
fn noiseless_small_grid_recovers_rank_one_solution() {
    let g = grid(2, 2).unwrap();
    for seed in 0..16u64 {
        let y = sample_labels(4, seed);
        let inst = Instance::new(g.clone(), y.clone(), vec![]).unwrap();
        let obs = observe(&inst, 0.0, 0.0, seed).unwrap();
        let sol = solve_sdp(&obs.x, &[], &SdpConfig::default()).unwrap();
        let mut diff = sol.y_matrix.clone();
        diff.add_scaled(&SymMatrix::outer(&labels_to_f64(&y)), -1.0);
        assert!(diff.frobenius() < 1e-4, "seed {seed}: {}", diff.frobenius());
        assert_eq!(round_solution(&sol, &obs.c).unwrap(), y);
    }
}

#[test]
fn zero_objective_is_feasible() {
    let sol = solve_sdp(&SymMatrix::zeros(7), &[], &SdpConfig::default()).unwrap();
    assert!(sol.objective.abs() < 1e-6);
    assert!(sol.y_matrix.diag().iter().all(|d| (d - 1.0).abs() < 1e-6));
    assert!(eig_sym(&sol.y_matrix).unwrap().min() > -1e-5);
}

#[test]
fn certified_instances_agree_with_oracle() {
    let mut certified = 0;
    for i in 0..30u64 {
        let (inst, obs) = instance(10, 1, 0.05, sub_seed(77, &[i]));
        let attrs = inst.attributes();
        let cert = dual_certificate(&obs.x, attrs, inst.y_bar()).unwrap();
        if !cert.holds {
            continue;
        }
        certified += 1;
        let sol = solve_sdp(&obs.x, attrs, &SdpConfig::default()).unwrap();
        let rounded = round_solution(&sol, &obs.c).unwrap();
        let oracle = brute_force(&obs.x, &labels_to_f64(&obs.c), attrs, 1.0, DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(rounded, oracle.labels, "instance {i}");
    }
    assert!(certified >= 15, "only {certified} certified instances");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    // Where the certificate holds, the solution is ±ȳ before the vote, and ȳ
    // after it whenever the node observations favour ȳ.
    #[test]
    fn certificate_soundness(seed in any::<u64>(), n in 5usize..=12, k in 0usize..=2, p in 0.0f64..0.2) {
        let (inst, obs) = instance(n, k, p, seed);
        let attrs = inst.attributes();
        let cert = dual_certificate(&obs.x, attrs, inst.y_bar()).unwrap();
        prop_assume!(cert.holds);
        let sol = solve_sdp(&obs.x, attrs, &SdpConfig::default()).unwrap();
        let y = inst.y_bar();
        let neg: Vec<i8> = y.iter().map(|v| -v).collect();
        let unvoted = round_matrix(&sol.y_matrix, &vec![1; n]).unwrap();
        prop_assert!(unvoted == y || unvoted == neg);
        let vote: i32 = obs.c.iter().zip(y).map(|(&a, &b)| i32::from(a * b)).sum();
        if vote > 0 {
            prop_assert_eq!(round_solution(&sol, &obs.c).unwrap(), y.to_vec());
        }
    }

    #[test]
    fn converged_solutions_are_feasible_and_dominate(seed in any::<u64>(), n in 4usize..=12, k in 0usize..=2, p in 0.0f64..0.45) {
        let (inst, obs) = instance(n, k, p, seed);
        let cfg = SdpConfig::default();
        let sol = solve_sdp(&obs.x, inst.attributes(), &cfg).unwrap();
        prop_assume!(sol.status == SdpStatus::Converged);
        prop_assert!(sol.primal_residual <= cfg.primal_tol && sol.dual_residual <= cfg.dual_tol);
        let y = &sol.y_matrix;
        for d in y.diag() {
            prop_assert!((d - 1.0).abs() <= cfg.primal_tol);
        }
        prop_assert!(eig_sym(y).unwrap().min() >= -10.0 * cfg.primal_tol);
        for a in inst.attributes() {
            prop_assert!(norm2(&y.matvec(a)) <= 10.0 * cfg.primal_tol * norm2(a));
        }
        let planted = obs.x.quad_form(&labels_to_f64(inst.y_bar()));
        prop_assert!(sol.objective >= planted - 1e-4, "{} < {}", sol.objective, planted);
    }

    #[test]
    fn certificate_null_vector(seed in any::<u64>(), n in 3usize..=14, k in 0usize..=2, p in 0.0f64..0.5) {
        let (inst, obs) = instance(n, k.min(n - 2), p, seed);
        let rep = dual_certificate(&obs.x, inst.attributes(), inst.y_bar()).unwrap();
        prop_assert!(rep.residual_null <= 1e-9 * rep.lambda_norm);
        prop_assert_eq!(rep.holds, rep.lambda2 > fairrecov::solver::CERTIFICATE_TOL);
    }
}

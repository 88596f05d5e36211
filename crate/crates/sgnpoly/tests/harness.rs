use sgnpoly::harness::{
    aggregate, chi_square_parallel, preset, run_experiment, simulate, ExperimentConfig, PSpec, SweepPoint,
};
use sgnpoly_core::inference::TestKind;
use sgnpoly_core::model::{CommunityMatrix, MembershipLaw, ThetaDistribution, ThetaLaw};
use sgnpoly_core::rng::stream;
use sgnpoly_core::scaling::{chi_square_mc, ChiSquarePlan, Construction};

fn one_community(beta: f64, reps: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: "null-only".into(),
        n: 300,
        k: 1,
        reps_null: reps,
        reps_alt: reps,
        alpha: 0.05,
        theta_dist: ThetaDistribution::Uniform { low: 2.0, high: 3.0 },
        mem_law: MembershipLaw::uniform_basis(1),
        p_spec: PSpec::Explicit { p: vec![vec![1.0]] },
        sweep: vec![SweepPoint { beta, b: 0.0, null_beta: None }],
        tests: vec![TestKind::SgnT, TestKind::SgnQ],
        master_seed: 99,
    }
}

#[test]
fn zero_degree_config_skips_everything() {
    let cfg = one_community(0.0, 20);
    let rows = run_experiment(&cfg, Some(2)).unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!((row.reps, row.skipped), (0, 40));
        assert!(row.type1.is_nan() && !row.is_valid());
    }
}

#[test]
fn alternative_equal_to_null_is_calibrated() {
    let reps = 200;
    let cfg = one_community(6.0, reps);
    let rows = run_experiment(&cfg, None).unwrap();
    let band = 4.0 * (0.05 * 0.95 / reps as f64).sqrt();
    for row in rows {
        assert!(row.is_valid());
        assert!((row.type1 - 0.05).abs() <= band, "{row:?}");
        assert!((row.type2 - 0.95).abs() <= band, "{row:?}");
        assert_eq!(row.sum, row.type1 + row.type2);
        assert_eq!(row.reps, 2 * reps);
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let mut cfg = preset("exp3b", Some(150)).unwrap();
    cfg.reps_null = 12;
    cfg.reps_alt = 8;
    let one = simulate(&cfg, Some(1)).unwrap();
    let many = simulate(&cfg, Some(4)).unwrap();
    assert_eq!(one, many);
    let rows = aggregate(&cfg, &one);
    assert_eq!(rows.len(), cfg.sweep.len() * cfg.tests.len());
    assert!(rows.iter().all(|r| r.reps == 20 && r.skipped == 0));

    let mut reseeded = cfg.clone();
    reseeded.master_seed += 1;
    assert_ne!(simulate(&reseeded, Some(1)).unwrap(), one);
}

#[test]
fn rep_params_share_theta_between_hypotheses() {
    let cfg = preset("exp1b", Some(200)).unwrap();
    let p = cfg.community_matrix(0).unwrap();
    let (null, alt) = cfg.rep_params(0, 3, &p).unwrap();
    assert_eq!(null.k(), 1);
    let scale = (1.0 + cfg.sweep[0].b) / 2.0;
    for (tn, ta) in null.theta.as_slice().iter().zip(alt.theta.as_slice()) {
        assert!((tn - ta * scale.sqrt()).abs() < 1e-14);
    }
    assert!((alt.theta.norm() - cfg.sweep[0].beta).abs() < 1e-12);

    let fig2 = preset("fig2-null", Some(300)).unwrap();
    let (null, alt) = fig2.rep_params(0, 0, &fig2.community_matrix(0).unwrap()).unwrap();
    assert!((null.theta.norm() - 8.0).abs() < 1e-12 && (alt.theta.norm() - 9.0).abs() < 1e-12);
}

#[test]
fn parallel_chi_square_matches_sequential() {
    let theta = ThetaLaw::new(ThetaDistribution::Uniform { low: 2.0, high: 3.0 }, 3.0).sample(80, &mut stream(4, &[]));
    let p = CommunityMatrix::example1(2, 0.5);
    let law = MembershipLaw::uniform_basis(2);
    for construction in [Construction::MatchedTheta, Construction::Dcbm, Construction::Dcmm] {
        let plan = ChiSquarePlan::new(theta.as_slice(), &p, &law, construction, 17).unwrap();
        let par = chi_square_parallel(&plan, 64, 17, Some(3)).unwrap();
        let seq = chi_square_mc(theta.as_slice(), &p, &law, construction, 64, 17).unwrap();
        assert_eq!(par, seq, "{construction:?}");
    }
}

mod common;

use common::{
    jacobi_svd, mgs_lstsq, min_singular_value, projector_distance, reduced_pcr_oracle, rotated_basis,
    sketched_pcr_oracle, spectral_norm,
};
use proptest::prelude::*;
use sketchpcr::eval::{gaussian_matrix, planted_matrix, random_orthonormal};
use sketchpcr::linalg::{symmetric_eigen_desc, DenseMatrix, DenseVector};
use sketchpcr::sketch::SketchOperator;
use sketchpcr::solvers::{
    build_r_twosided, certify, cls, exact_pcp, exact_pcr, input_sparsity_pcp, precond_iterative_ls, right_sketched_pcr,
    sketched_pcr, two_sided_sketched_pcr, CertificateMode, PcrProblem,
};

fn response(n: usize, seed: u64) -> DenseVector {
    gaussian_matrix(n, 1, seed).column(0).into_owned()
}

#[test]
fn exact_pcr_matches_reduced_least_squares() {
    for seed in 0..20 {
        let a = gaussian_matrix(40, 12, seed);
        let b = response(40, seed + 1000);
        let p = PcrProblem::new(a.clone(), b.clone(), 4).unwrap();
        let sol = exact_pcr(&p).unwrap();
        let oracle = reduced_pcr_oracle(&a, &b, 4);
        let f_sol = (&a * &sol.x - &b).norm();
        let f_oracle = (&a * &oracle - &b).norm();
        assert!((f_sol - f_oracle).abs() <= 1e-9 * f_oracle, "seed {seed}");
        assert!((&sol.x - &oracle).norm() <= 1e-8 * oracle.norm());
        let pcp = exact_pcp(&p).unwrap();
        assert!((pcp - &a * &sol.x).norm() <= 1e-9 * b.norm());
    }
}

#[test]
fn right_sketch_matches_brute_force() {
    let mut checked = 0;
    for seed in 0..10 {
        let a = gaussian_matrix(30, 10, seed);
        let b = response(30, seed + 7);
        let p = PcrProblem::new(a.clone(), b.clone(), 3).unwrap();
        let g = SketchOperator::countsketch(8, 10, seed).unwrap();
        let Ok(sol) = right_sketched_pcr(&p, &g) else {
            continue;
        };
        let oracle = sketched_pcr_oracle(&a, &g.materialize().transpose(), &b, 3);
        assert!(
            (&sol.x - &oracle).norm() <= 1e-9 * oracle.norm().max(1.0),
            "seed {seed}"
        );
        checked += 1;
    }
    assert!(checked >= 5);
}

#[test]
fn two_sided_matches_brute_force() {
    for seed in 0..10 {
        let a = planted_matrix(60, 20, 3, 0.3, seed).unwrap();
        let b = response(60, seed + 3);
        let p = PcrProblem::new(a.clone(), b.clone(), 3).unwrap();
        let s = SketchOperator::countsketch(30, 60, seed + 11).unwrap();
        let g = SketchOperator::subgaussian(12, 20, seed + 12).unwrap();
        let sol = two_sided_sketched_pcr(&p, &s, &g).unwrap();

        let gt = g.materialize().transpose();
        let d = s.materialize() * (&a * &gt);
        let r = &gt * jacobi_svd(&d).v_matrix(3);
        let oracle = sketched_pcr_oracle(&a, &r, &b, 3);
        assert!(
            (&sol.x - &oracle).norm() <= 1e-9 * oracle.norm().max(1.0),
            "seed {seed}"
        );

        let factor = build_r_twosided(&p, &s, &g).unwrap().materialize().unwrap();
        assert!(span_distance(&factor, &r) < 1e-8);
    }
}

fn span_distance(x: &DenseMatrix, y: &DenseMatrix) -> f64 {
    projector_distance(&jacobi_svd(x).u_matrix(x.ncols()), &jacobi_svd(y).u_matrix(y.ncols()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn cls_coincides_with_sketched_pcr_for_k_orthonormal_columns(seed in any::<u64>(), k in 1usize..5) {
        let a = gaussian_matrix(25, 9, seed);
        let b = response(25, seed ^ 0xABCD);
        let p = PcrProblem::new(a.clone(), b.clone(), k).unwrap();
        let r = random_orthonormal(9, k, seed.wrapping_add(1)).unwrap();
        let Ok(sk) = sketched_pcr(&p, &r) else { return Ok(()); };
        let c = cls(&p, &r).unwrap();
        prop_assert!((&sk.x - &c.x).norm() <= 1e-10 * c.x.norm().max(1.0));
    }

    #[test]
    fn cls_satisfies_its_normal_equations(seed in any::<u64>(), s in 1usize..9) {
        let a = gaussian_matrix(20, 8, seed);
        let b = response(20, seed ^ 0x55);
        let p = PcrProblem::new(a.clone(), b.clone(), 1).unwrap();
        let r = gaussian_matrix(8, s, seed.wrapping_add(3));
        let x = cls(&p, &r).unwrap().x;
        let ar = &a * &r;
        prop_assert!(ar.tr_mul(&(&a * &x - &b)).norm() <= 1e-8 * b.norm() * ar.norm());
    }
}

struct Rotated {
    a: DenseMatrix,
    r: DenseMatrix,
    sigma: Vec<f64>,
    theta: f64,
}

fn rotated_instance(seed: u64, k: usize) -> Rotated {
    let a = planted_matrix(50, 16, k, 0.3, seed).unwrap();
    let svd = jacobi_svd(&a);
    let v = svd.v_matrix(16);
    let theta_max = 0.05 + 0.5 * ((seed % 17) as f64 / 17.0);
    let angles: Vec<f64> = (0..k).map(|i| theta_max * (1.0 - 0.3 * i as f64 / k as f64)).collect();
    Rotated {
        r: rotated_basis(&v, k, &angles),
        a,
        sigma: svd.sigma,
        theta: theta_max,
    }
}

#[test]
fn lemma_bounds_on_rotated_bases() {
    let k = 3;
    for seed in 0..30 {
        let inst = rotated_instance(seed, k);
        let v = jacobi_svd(&inst.a).v_matrix(16);
        let v_k = v.columns(0, k).into_owned();
        let v_kplus = v.columns(k, 16 - k).into_owned();
        let nu = projector_distance(&inst.r, &v_k);
        assert!((nu - inst.theta.sin()).abs() < 1e-10);

        assert!(spectral_norm(&(v_kplus.transpose() * &inst.r)) <= nu + 1e-10);
        let (sk, sk1) = (inst.sigma[k - 1], inst.sigma[k]);
        let ar = &inst.a * &inst.r;
        assert!(min_singular_value(&ar) >= sk * ((1.0 - nu * nu).sqrt() - nu) - 1e-10);

        let nu_lemma = inst.theta.tan();
        let u_ar = jacobi_svd(&ar).u_matrix(k);
        let u_k = jacobi_svd(&inst.a).u_matrix(k);
        assert!(projector_distance(&u_ar, &u_k) <= sk1 / sk * nu_lemma + 1e-8);
    }
}

#[test]
fn structural_theorem_certificates() {
    let k = 3;
    let (mut pcr_checked, mut pcp_checked) = (0, 0);
    for seed in 0..30 {
        let inst = rotated_instance(seed, k);
        let nu = inst.theta.tan();
        if (1.0 - nu * nu).sqrt() - nu <= 0.0 {
            continue;
        }
        let b = response(50, seed + 500);
        let p = PcrProblem::new(inst.a.clone(), b.clone(), k).unwrap();
        let sol = cls(&p, &inst.r).unwrap();
        let cert = certify(&p, &sol, CertificateMode::Pcr).unwrap();
        let (sk, sk1) = (inst.sigma[k - 1], inst.sigma[k]);
        assert!(cert.eps_observed <= sk1 / sk * nu + 1e-8, "seed {seed}");
        assert!(
            cert.upsilon_observed <= nu / (((1.0 - nu * nu).sqrt() - nu) * sk) + 1e-8,
            "seed {seed}"
        );
        pcr_checked += 1;

        let g = SketchOperator::countsketch(8, 16, seed).unwrap();
        let Ok(right) = right_sketched_pcr(&p, &g) else {
            continue;
        };
        let r_mat = g.materialize().transpose();
        let u_ark = jacobi_svd(&(&inst.a * &r_mat)).u_matrix(k);
        let nu_pcp = projector_distance(&u_ark, &jacobi_svd(&inst.a).u_matrix(k));
        let pcp = certify(&p, &right, CertificateMode::Pcp).unwrap();
        assert!(pcp.eps_observed <= nu_pcp + 1e-8);
        assert!(pcp.upsilon_observed <= nu_pcp + 1e-8);
        pcp_checked += 1;
    }
    assert!(pcr_checked >= 15 && pcp_checked >= 15);
}

#[test]
fn davis_kahan_corollary() {
    let k = 3;
    for seed in 0..30 {
        let x = planted_matrix(30, 10, k, 0.4, seed).unwrap();
        let a = x.transpose() * &x;
        let ea = symmetric_eigen_desc(&a).unwrap();
        let half_gap = 0.5 * (ea.values[k - 1] - ea.values[k]);
        let raw = gaussian_matrix(10, 10, seed + 77);
        let sym = (&raw + raw.transpose()) * 0.5;
        let scale = half_gap * (0.1 + 0.85 * (seed % 7) as f64 / 7.0) / spectral_norm(&sym);
        let e = sym * scale;
        let a_tilde = &a + &e;
        let et = symmetric_eigen_desc(&a_tilde).unwrap();
        let dist = projector_distance(
            &ea.vectors.columns(0, k).into_owned(),
            &et.vectors.columns(0, k).into_owned(),
        );
        let bound = spectral_norm(&e) / (ea.values[k - 1] - et.values[k]);
        assert!(dist <= bound + 1e-8, "seed {seed}: {dist} > {bound}");
    }
}

#[test]
fn preconditioned_ls_meets_metric_contract() {
    for seed in 0..10 {
        let c = gaussian_matrix(300, 6, seed);
        let b = response(300, seed + 9);
        let direct = mgs_lstsq(&c, &b);
        let fit = &c * &direct;
        for eps in [1e-2, 1e-6, 1e-12] {
            let g = precond_iterative_ls(&c, &b, eps).unwrap();
            assert!(
                (&c * (&g - &direct)).norm() <= eps.sqrt() * fit.norm() + 1e-12,
                "seed {seed} eps {eps}"
            );
        }
    }
}

#[test]
fn input_sparsity_tracks_materialized_range_solution() {
    let a = planted_matrix(200, 150, 5, 0.3, 4).unwrap();
    let b = response(200, 8);
    let p = PcrProblem::new(a.clone(), b.clone(), 5).unwrap();
    let eps = 1e-3;
    let mut ok = 0;
    let runs = 30;
    for seed in 0..runs {
        let out = input_sparsity_pcp(&p, 60, 40, eps, seed).unwrap();
        let x_r = &out.r * mgs_lstsq(&(&a * &out.r), &b);
        if (&out.y - &x_r).norm_squared() <= eps * x_r.norm_squared() {
            ok += 1;
        }
    }
    assert!(3 * ok >= 2 * runs, "{ok} of {runs}");
}

mod common;

use common::{jacobi_svd, mgs_lstsq, projector_distance, spectral_norm};
use proptest::prelude::*;
use sketchpcr::eval::{gaussian_matrix, random_orthonormal};
use sketchpcr::linalg::{
    pinv_solve, principal_cosines, project, relative_gap, stable_rank, subspace_distance, tan_theta_norm, thin_svd,
    DenseMatrix, DenseVector, OrthonormalBasis,
};

fn orthonormality_error(q: &DenseMatrix) -> f64 {
    (q.transpose() * q - DenseMatrix::identity(q.ncols(), q.ncols())).norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn thin_svd_agrees_with_jacobi(rows in 1usize..=64, cols in 1usize..=64, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let m = gaussian_matrix(rows, cols, seed);
        let r = rows.min(cols);
        let k = 1 + ((r - 1) as f64 * frac) as usize;
        let t = thin_svd(&m, k).unwrap();
        prop_assert!(orthonormality_error(&t.u_k) < 1e-10);
        prop_assert!(orthonormality_error(&t.v_k) < 1e-10);
        let rel = (t.reconstruct() - &m).norm() / m.norm();
        prop_assert!(rel < 1e-8);
        let values = t.singular_values();
        prop_assert!(values.windows(2).all(|w| w[0] >= w[1]));
        let oracle = jacobi_svd(&m);
        for (a, b) in values.iter().zip(&oracle.sigma) {
            prop_assert!((a - b).abs() <= 1e-9 * oracle.sigma[0]);
        }
    }

    #[test]
    fn distance_is_projector_gap(n in 3usize..12, k in 1usize..3, s1 in any::<u64>(), s2 in any::<u64>()) {
        prop_assume!(k < n);
        let u = random_orthonormal(n, k, s1).unwrap();
        let w = random_orthonormal(n, k, s2).unwrap();
        let d = subspace_distance(&OrthonormalBasis::new(u.clone()).unwrap(), &OrthonormalBasis::new(w.clone()).unwrap()).unwrap();
        prop_assert!((d - projector_distance(&u, &w)).abs() < 1e-8);
        let back = subspace_distance(&OrthonormalBasis::new(w).unwrap(), &OrthonormalBasis::new(u).unwrap()).unwrap();
        prop_assert!((d - back).abs() < 1e-12);
    }

    #[test]
    fn tan_theta_matches_principal_angle(seed in any::<u64>(), q_seed in any::<u64>()) {
        let w = random_orthonormal(6, 6, seed).unwrap();
        let q = random_orthonormal(6, 2, q_seed).unwrap();
        let w_k = w.columns(0, 2).into_owned();
        let w_kplus = w.columns(2, 4).into_owned();
        let cos_min = jacobi_svd(&(w_k.transpose() * &q)).sigma[1];
        prop_assume!(cos_min > 1e-3);
        let expected = cos_min.acos().tan();
        let got = tan_theta_norm(
            &OrthonormalBasis::new(q).unwrap(),
            &OrthonormalBasis::new(w_k).unwrap(),
            &OrthonormalBasis::new(w_kplus).unwrap(),
        ).unwrap();
        prop_assert!((got - expected).abs() <= 1e-8 * expected.max(1.0));
    }

    #[test]
    fn projection_is_pythagorean(n in 2usize..10, k in 1usize..4, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let q = OrthonormalBasis::new(random_orthonormal(n, k, seed).unwrap()).unwrap();
        let v = DenseVector::from_fn(n, |i, _| (seed.wrapping_add(i as u64) % 13) as f64 - 6.0);
        let pv = project(&q, &v).unwrap();
        prop_assert!(((&v - &pv).norm_squared() + pv.norm_squared() - v.norm_squared()).abs() <= 1e-10 * v.norm_squared().max(1.0));
        prop_assert!((project(&q, &pv).unwrap() - &pv).norm() <= 1e-10 * v.norm().max(1.0));
    }
}

#[test]
fn distance_of_rotated_line() {
    let theta: f64 = 0.3;
    let u = DenseMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
    let w = DenseMatrix::from_column_slice(2, 1, &[theta.cos(), theta.sin()]);
    let d = subspace_distance(
        &OrthonormalBasis::new(u.clone()).unwrap(),
        &OrthonormalBasis::new(w.clone()).unwrap(),
    )
    .unwrap();
    assert!((d - projector_distance(&u, &w)).abs() < 1e-12);
    assert!((d - theta.sin()).abs() < 1e-12);
}

#[test]
fn tan_theta_in_the_plane() {
    let theta: f64 = 0.25;
    let q = DenseMatrix::from_column_slice(2, 1, &[theta.cos(), theta.sin()]);
    let e1 = DenseMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
    let e2 = DenseMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
    let cos = jacobi_svd(&(q.transpose() * &e1)).sigma[0];
    let got = tan_theta_norm(
        &OrthonormalBasis::new(q).unwrap(),
        &OrthonormalBasis::new(e1).unwrap(),
        &OrthonormalBasis::new(e2).unwrap(),
    )
    .unwrap();
    assert!((got - cos.acos().tan()).abs() < 1e-12);
}

#[test]
fn pinv_satisfies_normal_equations() {
    let m = gaussian_matrix(8, 3, 17);
    let rhs = DenseVector::from_fn(8, |i, _| (i as f64).cos());
    let x = pinv_solve(&m, &rhs).unwrap();
    assert!(m.tr_mul(&(&m * &x - &rhs)).norm() < 1e-8);
    assert!((x - mgs_lstsq(&m, &rhs)).norm() < 1e-10);
}

#[test]
fn pinv_is_minimum_norm_on_rank_deficient_input() {
    for seed in 0..20 {
        let left = gaussian_matrix(10, 3, seed);
        let right = gaussian_matrix(3, 6, seed + 100);
        let m = &left * &right;
        let rhs = DenseVector::from_fn(10, |i, _| ((i as u64 * 7 + seed) % 5) as f64 - 2.0);
        let x = pinv_solve(&m, &rhs).unwrap();
        let oracle = jacobi_svd(&m);
        let tol = 1e-10 * oracle.sigma[0];
        for (j, s) in oracle.sigma.iter().enumerate() {
            if *s <= tol {
                let v = DenseVector::from_vec(oracle.v[j].clone());
                assert!(v.dot(&x).abs() < 1e-10 * x.norm().max(1.0), "seed {seed} direction {j}");
            }
        }
    }
}

#[test]
fn relative_gap_from_oracle_values() {
    for seed in 0..10 {
        let m = gaussian_matrix(9, 7, seed);
        let sigma = jacobi_svd(&m).sigma;
        for k in 1..7 {
            let expected = (sigma[k - 1].powi(2) - sigma[k].powi(2)) / sigma[0].powi(2);
            assert!((relative_gap(&m, k).unwrap() - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn stable_rank_within_rank() {
    for seed in 0..10 {
        let m = &gaussian_matrix(12, 4, seed) * &gaussian_matrix(4, 9, seed + 50);
        let sr = stable_rank(&m).unwrap();
        let expected = m.norm_squared() / spectral_norm(&m).powi(2);
        assert!((sr - expected).abs() < 1e-10);
        assert!((1.0..=4.0 + 1e-12).contains(&sr));
    }
}

#[test]
fn principal_cosines_are_oracle_singular_values() {
    let u = random_orthonormal(7, 3, 1).unwrap();
    let w = random_orthonormal(7, 3, 2).unwrap();
    let got = principal_cosines(
        &OrthonormalBasis::new(u.clone()).unwrap(),
        &OrthonormalBasis::new(w.clone()).unwrap(),
    )
    .unwrap();
    let mut got: Vec<f64> = got.iter().copied().collect();
    got.sort_by(|a, b| b.total_cmp(a));
    let oracle = jacobi_svd(&(u.transpose() * w)).sigma;
    for (a, b) in got.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-12);
    }
}

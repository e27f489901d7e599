//! Randomized property tests for the core algebraic invariants.

use modred::baecore::{smw_whitener, ErrorModel};
use modred::numkit::{
    dot, norm, orthonormal_basis, read_mrd1_from, write_mrd1_to, BasisMethod, DenseMatrix,
    DEFAULT_RANK_TOL,
};
use modred::priors::sigmoid_transform;
use modred::spotlight::projector_from_basis;
use modred::tomo::{build_coarsening, prolong_image, restrict_image, PixelGrid, SpotlightRegion};
use proptest::prelude::*;

fn dense(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    proptest::collection::vec(-1.0f64..1.0, rows * cols)
        .prop_map(move |v| DenseMatrix::from_vec(rows, cols, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // P is an orthogonal projector: idempotent, and Pv ⊥ P⊥v with
    // Pv + P⊥v = v
    #[test]
    fn projector_algebra(a in dense(24, 5), v in proptest::collection::vec(-1.0f64..1.0, 24)) {
        let basis = orthonormal_basis(&a, BasisMethod::Svd, DEFAULT_RANK_TOL).unwrap();
        prop_assume!(basis.cols() > 0);
        let p = projector_from_basis(basis).unwrap();
        let pv = p.apply(&v);
        let qv = p.apply_complement(&v);
        let ppv = p.apply(&pv);
        for i in 0..v.len() {
            prop_assert!((ppv[i] - pv[i]).abs() < 1e-10);
            prop_assert!((pv[i] + qv[i] - v[i]).abs() < 1e-10);
        }
        prop_assert!(dot(&pv, &qv).abs() < 1e-9);
    }

    // (SSᵀ + σ²I) · σ⁻²(I − KKᵀ) = I
    #[test]
    fn smw_whitener_inverts_covariance(
        s in dense(12, 4),
        sigma in 0.05f64..5.0,
    ) {
        let m = s.rows();
        let model = ErrorModel { mu: vec![0.0; m], s: s.clone(), sigma };
        let k = smw_whitener(&model).unwrap();
        let cov = s.matmul(&s.transpose());
        for j in 0..m {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            // w = σ⁻²(e − K Kᵀ e)
            let kt = k.tr_matvec(&e);
            let kk = k.matvec(&kt);
            let w: Vec<f64> = e.iter().zip(&kk).map(|(a, b)| (a - b) / (sigma * sigma)).collect();
            let mut back = cov.matvec(&w);
            for (bi, wi) in back.iter_mut().zip(&w) {
                *bi += sigma * sigma * wi;
            }
            for i in 0..m {
                prop_assert!((back[i] - e[i]).abs() < 1e-7);
            }
        }
    }

    // sigmoid transform maps into [0, γ] (saturating in floating point),
    // monotonically in ξ
    #[test]
    fn sigmoid_range_and_monotonicity(
        mut xi in proptest::collection::vec(-10.0f64..10.0, 16),
        gamma in 0.1f64..5.0,
        alpha in 0.1f64..5.0,
    ) {
        xi.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let y = sigmoid_transform(&xi, 0.0, alpha, gamma);
        for w in y.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-12);
        }
        for &v in &y {
            prop_assert!(v >= 0.0 && v <= gamma);
        }
    }

    // MRD1 serialization round-trips exactly
    #[test]
    fn mrd1_round_trip(m in dense(7, 3)) {
        let mut buf = Vec::new();
        write_mrd1_to(&mut buf, &m).unwrap();
        let back = read_mrd1_from(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(back.rows(), m.rows());
        prop_assert_eq!(back.cols(), m.cols());
        prop_assert_eq!(back.data(), m.data());
    }

    // restricting a prolonged coarse image recovers it exactly
    // (P is a partition of the fine pixels)
    #[test]
    fn restrict_inverts_prolong(seed_vals in proptest::collection::vec(-1.0f64..1.0, 328)) {
        let grid = PixelGrid::new(32).unwrap();
        let region = SpotlightRegion::centered(&grid, 16).unwrap();
        let map = build_coarsening(&grid, &region, 8).unwrap();
        prop_assume!(seed_vals.len() >= map.n());
        let x_coarse = &seed_vals[..map.n()];
        let fine = prolong_image(&map, x_coarse).unwrap();
        let back = restrict_image(&map, &fine).unwrap();
        for (a, b) in back.iter().zip(x_coarse) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    // projecting a vector never increases its norm
    #[test]
    fn projection_is_contractive(a in dense(16, 6), v in proptest::collection::vec(-1.0f64..1.0, 16)) {
        let basis = orthonormal_basis(&a, BasisMethod::Svd, DEFAULT_RANK_TOL).unwrap();
        prop_assume!(basis.cols() > 0);
        let p = projector_from_basis(basis).unwrap();
        let nv = norm(&v);
        prop_assert!(norm(&p.apply(&v)) <= nv + 1e-10);
        prop_assert!(norm(&p.apply_complement(&v)) <= nv + 1e-10);
    }
}

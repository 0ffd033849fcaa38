mod common;

use common::{dense_inverse, generalized_eigenvalues, max_abs};
use iagl::gft::empirical_covariance;
use iagl::graph::laplacian;
use iagl::{compute_gft, model_covariance, sample_gwss, Edge, PsdModel};
use ndarray::{array, Array1, Array2};
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = (Array2<f64>, Vec<f64>)> {
    (2usize..7).prop_flat_map(|n| {
        let m = n * (n - 1) / 2;
        (
            Just(n),
            prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..3.0], m),
            prop::collection::vec(0.05f64..4.0, n),
        )
            .prop_map(|(n, ws, q)| {
                let mut edges = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if ws[k] > 0.0 {
                            edges.push(Edge::new(i, j, ws[k]));
                        }
                        k += 1;
                    }
                }
                (laplacian(n, &edges), q)
            })
    })
}

fn diag(q: &[f64]) -> Array2<f64> {
    Array2::from_diag(&Array1::from(q.to_vec()))
}

#[test]
fn two_node_spectrum_matches_closed_form() {
    let l = array![[1.0, -1.0], [-1.0, 1.0]];
    let q = [1.0, 3.0];
    let sp = compute_gft(l.view(), Array1::from(q.to_vec()).view()).unwrap();
    let oracle = generalized_eigenvalues(&l, &q);
    // det(L - lambda Q) = 0 gives lambda in {0, 1 + 1/3}.
    assert!((oracle[1] - 4.0 / 3.0).abs() < 1e-12);
    for (a, b) in sp.lambdas.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
    // The constant mode is Q-normalized: 1/sqrt(sum q).
    let u0 = sp.modes.column(0);
    assert!((u0[0] - 0.5).abs() < 1e-10 && (u0[1] - 0.5).abs() < 1e-10);
}

#[test]
fn edgeless_graph_has_flat_spectrum() {
    let l = Array2::<f64>::zeros((3, 3));
    let q = Array1::from(vec![1.0, 2.0, 0.5]);
    let sp = compute_gft(l.view(), q.view()).unwrap();
    assert!(sp.lambdas.iter().all(|x| x.abs() < 1e-12));
    let gram = sp.modes.t().dot(&diag(q.as_slice().unwrap())).dot(&sp.modes);
    assert!(max_abs(&gram, &Array2::eye(3)) < 1e-10);
}

#[test]
fn monte_carlo_covariance_tracks_model() {
    let edges = vec![Edge::new(0, 1, 1.5), Edge::new(1, 2, 0.4), Edge::new(0, 2, 0.2)];
    let q = vec![0.3, 1.0, 2.5];
    let l = laplacian(3, &edges);
    let sp = compute_gft(l.view(), Array1::from(q.clone()).view()).unwrap();
    let x = sample_gwss(&sp, &PsdModel::Proposed, 50_000, 3);
    let target = model_covariance(l.view(), Array1::from(q).view()).unwrap();
    assert!(max_abs(&empirical_covariance(x.view()), &target) < 5e-2);
}

#[test]
fn sampling_is_deterministic() {
    let l = array![[1.0, -1.0], [-1.0, 1.0]];
    let sp = compute_gft(l.view(), array![1.0, 2.0].view()).unwrap();
    let a = sample_gwss(&sp, &PsdModel::Proposed, 10, 42);
    let b = sample_gwss(&sp, &PsdModel::Proposed, 10, 42);
    assert_eq!(a, b);
    assert_ne!(a, sample_gwss(&sp, &PsdModel::Proposed, 10, 43));
}

proptest! {
    #[test]
    fn eigenpairs_are_q_orthonormal((l, q) in graph_strategy()) {
        let sp = compute_gft(l.view(), Array1::from(q.clone()).view()).unwrap();
        let qd = diag(&q);
        let n = q.len();
        let gram = sp.modes.t().dot(&qd).dot(&sp.modes);
        prop_assert!(max_abs(&gram, &Array2::eye(n)) <= 1e-8);
        let lhs = l.dot(&sp.modes);
        let rhs = qd.dot(&sp.modes).dot(&Array2::from_diag(&sp.lambdas));
        prop_assert!(max_abs(&lhs, &rhs) <= 1e-8);
        for k in 1..n {
            prop_assert!(sp.lambdas[k] >= sp.lambdas[k - 1]);
        }
    }

    #[test]
    fn eigenvalues_match_schur_oracle((l, q) in graph_strategy()) {
        let sp = compute_gft(l.view(), Array1::from(q.clone()).view()).unwrap();
        let oracle = generalized_eigenvalues(&l, &q);
        for (a, b) in sp.lambdas.iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()), "{} vs {}", a, b);
        }
    }

    #[test]
    fn stationary_covariance_is_model_inverse((l, q) in graph_strategy()) {
        let sp = compute_gft(l.view(), Array1::from(q.clone()).view()).unwrap();
        let cov = sp.stationary_covariance(&PsdModel::Proposed);
        let direct = dense_inverse(&(&l + &diag(&q)));
        prop_assert!(max_abs(&cov, &direct) <= 1e-8);
        let model = model_covariance(l.view(), Array1::from(q).view()).unwrap();
        prop_assert!(max_abs(&model, &direct) <= 1e-8);
    }

    #[test]
    fn fourier_round_trip((l, q) in graph_strategy(), seed in any::<u64>()) {
        let n = q.len();
        let sp = compute_gft(l.view(), Array1::from(q).view()).unwrap();
        let x = Array1::from_shape_fn(n, |k| ((seed >> (k % 60)) & 0xff) as f64 / 37.0 - 3.0);
        let back = sp.inverse(sp.forward(x.view()).unwrap().view()).unwrap();
        for (a, b) in x.iter().zip(back.iter()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn psd_models_are_nonnegative((l, q) in graph_strategy()) {
        let sp = compute_gft(l.view(), Array1::from(q).view()).unwrap();
        for psd in [PsdModel::Proposed, PsdModel::Combinatorial] {
            prop_assert!(psd.evaluate_all(sp.lambdas.view()).iter().all(|&g| g >= 0.0));
        }
    }

    #[test]
    fn mode_signs_are_canonical((l, q) in graph_strategy()) {
        let sp = compute_gft(l.view(), Array1::from(q).view()).unwrap();
        for col in sp.modes.columns() {
            let scale = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let first = col.iter().find(|x| x.abs() > 1e-12 * scale).unwrap();
            prop_assert!(*first > 0.0);
        }
    }
}

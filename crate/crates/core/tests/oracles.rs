//! Numerical results checked against nalgebra and closed forms computed
//! here, independently of the library's own solvers.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgft::contour::BlockContour;
use sgft::graph::{self, block_graph, inertia, optimal_line_graph, schur_complement, weighted_block_graph};
use sgft::linalg::{DenseSymMatrix, Matrix};
use sgft::markov::{empirical_covariance, empirical_klt, MarkovModel1D};
use sgft::spectral::eigendecompose;
use sgft::transforms::{dct_forward, dct_matrix, Block};
use sgft::Exec;

fn to_na(m: &DenseSymMatrix) -> DMatrix<f64> {
    let n = m.order();
    DMatrix::from_fn(n, n, |i, j| m.get(i, j))
}

fn random_model(rng: &mut ChaCha8Rng, n: usize) -> MarkovModel1D {
    let k = rng.random_range(2..=n);
    let sigma = (0..n).map(|_| rng.random_range(-2.0f64..2.0).exp2()).collect();
    MarkovModel1D::new(k, sigma, false).unwrap()
}

/// Difference matrix from the model definition: `x_i − x_{i−1}` except
/// `x_k + x_{k−1}` at the (1-based) break.
fn oracle_difference(n: usize, k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if j + 1 == i {
            if i + 1 == k {
                1.0
            } else {
                -1.0
            }
        } else {
            0.0
        }
    })
}

fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn covariance_and_precision_match_direct_inversion() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let n = rng.random_range(2..=16);
        let model = random_model(&mut rng, n);
        let m = oracle_difference(n, model.k());
        let minv = m.clone().try_inverse().unwrap();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(model.sigma_sq()));
        let c = &minv * d * minv.transpose();
        assert!(rel_diff(&to_na(&model.covariance().unwrap()), &c) < 1e-12);
        let p = c.try_inverse().unwrap();
        assert!(rel_diff(&to_na(&model.precision()), &p) < 1e-9);
        let ours = model.difference_matrix();
        assert!((0..n).all(|i| (0..n).all(|j| ours.get(i, j) == m[(i, j)])));
    }
}

#[test]
fn loopy_laplacian_of_line_graph_is_precision() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..50 {
        let n = rng.random_range(2..=24);
        let model = random_model(&mut rng, n);
        let q = to_na(&optimal_line_graph(&model).loopy_laplacian());
        let mut p = to_na(&model.precision());
        p[(0, 0)] -= 1.0 / model.sigma_sq()[0];
        assert!((q - p).amax() < 1e-12);
    }
}

#[test]
fn eigendecomposition_matches_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let n = rng.random_range(1..=20);
        let m = DenseSymMatrix::from_upper(n, |_, _| rng.random_range(-5.0..5.0));
        let ours = eigendecompose(&m).unwrap();
        let oracle = SymmetricEigen::new(to_na(&m));
        let mut expected: Vec<f64> = oracle.eigenvalues.iter().copied().collect();
        expected.sort_by(f64::total_cmp);
        let scale = expected.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        for (a, b) in ours.eigenvalues().iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-10 * scale, "{a} vs {b}");
        }
        // eigenvalues are distinct with probability one, so vectors agree up to sign
        for (i, &lambda) in ours.eigenvalues().iter().enumerate() {
            let j = (0..n).min_by(|&a, &b| {
                (oracle.eigenvalues[a] - lambda).abs().total_cmp(&(oracle.eigenvalues[b] - lambda).abs())
            });
            let col = oracle.eigenvectors.column(j.unwrap());
            let dot: f64 = ours.vector(i).iter().zip(col.iter()).map(|(x, y)| x * y).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn block_graph_spectra_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..200 {
        let mask = rng.random_range(0..1u128 << 24);
        let contour = BlockContour::from_mask(4, mask).unwrap();
        for q in [
            block_graph(&contour, rng.random_range(0.01..1.0)).unwrap().loopy_laplacian(),
            weighted_block_graph(&contour, 0.1).unwrap().loopy_laplacian(),
        ] {
            let ours = eigendecompose(&q).unwrap();
            let mut expected: Vec<f64> = SymmetricEigen::new(to_na(&q)).eigenvalues.iter().copied().collect();
            expected.sort_by(f64::total_cmp);
            for (a, b) in ours.eigenvalues().iter().zip(&expected) {
                assert!((a - b).abs() < 1e-10);
            }
            assert!(expected[0] > -1e-12, "loopy laplacian must be PSD");
            assert!(ours.residual(&q) < 1e-10);
            assert!(ours.orthonormality_error() < 1e-12);
        }
    }
}

#[test]
fn schur_complement_and_inertia_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..100 {
        let n = rng.random_range(2..=10);
        let m = rng.random_range(1..n);
        let a = DenseSymMatrix::from_upper(n, |_, _| rng.random_range(-1.0..1.0));
        let lead: Vec<usize> = (0..m).collect();
        let s = schur_complement(&a, &lead).unwrap();
        let na = to_na(&a);
        let a11 = na.view((0, 0), (m, m)).into_owned();
        let a12 = na.view((0, m), (m, n - m)).into_owned();
        let a22 = na.view((m, m), (n - m, n - m)).into_owned();
        let expected = &a22 - a12.transpose() * a11.try_inverse().unwrap() * &a12;
        assert!((to_na(&s) - &expected).amax() < 1e-8 * expected.amax().max(1.0));

        let eig = SymmetricEigen::new(na).eigenvalues;
        let got = inertia(&a).unwrap();
        assert_eq!(got.positive, eig.iter().filter(|&&v| v > 0.0).count());
        assert_eq!(got.negative, eig.iter().filter(|&&v| v < 0.0).count());
    }
}

#[test]
fn indefiniteness_example_determinant() {
    let q = graph::indefiniteness_demo_graph(100.0, 1.0, 0.5).unwrap().loopy_laplacian();
    let block = to_na(&q).view((1, 1), (2, 2)).into_owned();
    assert!((block.determinant() - (0.51f64.powi(2) - 1.0)).abs() < 1e-12);
    assert!(SymmetricEigen::new(to_na(&q)).eigenvalues.min() < 0.0);
    let none = graph::indefiniteness_demo_graph(100.0, 1.0, 0.0).unwrap().loopy_laplacian();
    assert!(SymmetricEigen::new(to_na(&none)).eigenvalues.min() > -1e-12);
}

#[test]
fn dct_is_orthonormal_with_scaled_mean_as_dc() {
    for n in [4, 8] {
        let c = dct_matrix(n);
        let na = DMatrix::from_fn(n, n, |i, j| c.get(i, j));
        assert!((&na * na.transpose() - DMatrix::identity(n, n)).amax() < 1e-14);
        let block = Block::from_fn(n, |x, y| ((x * 7 + y * 3) % 11) as f64 - 5.0);
        let coeffs = dct_forward(&block).unwrap();
        // DC equals the block mean times n
        let mean = block.pixels().iter().sum::<f64>() / (n * n) as f64;
        assert!((coeffs.coeffs()[0] - mean * n as f64).abs() < 1e-12);
        assert!((coeffs.energy() - block.energy()).abs() < 1e-9);
    }
}

#[test]
fn sample_statistics_match_the_model() {
    let model = MarkovModel1D::new(4, vec![2.0, 0.5, 1.0, 0.25, 1.5, 1.0], false).unwrap();
    let samples = model.sample(99, 60_000, Exec::Parallel).unwrap();
    let emp = to_na(&empirical_covariance(&samples, Exec::Parallel).unwrap());
    let c = to_na(&model.covariance().unwrap());
    assert!(rel_diff(&emp, &c) < 0.03, "{}", rel_diff(&emp, &c));

    // leading empirical KLT vector against the analytic top eigenvector
    let klt = empirical_klt(&samples, Exec::Parallel).unwrap();
    let oracle = SymmetricEigen::new(c);
    let top = oracle.eigenvalues.imax();
    let dot: f64 = klt.vector(0).iter().zip(oracle.eigenvectors.column(top).iter()).map(|(a, b)| a * b).sum();
    assert!(dot.abs() > 0.999, "{dot}");
}

#[test]
fn matrix_inverse_matches_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for _ in 0..50 {
        let n = rng.random_range(1..=12);
        let data: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = Matrix::from_row_slice(n, n, &data);
        let na = DMatrix::from_row_slice(n, n, &data);
        let ours = m.inverse().unwrap();
        let expected = na.clone().try_inverse().unwrap();
        let got = DMatrix::from_row_slice(n, n, ours.as_slice());
        assert!((got - &expected).amax() < 1e-8 * expected.amax().max(1.0));
        assert!((m.determinant() - na.determinant()).abs() < 1e-10 * na.determinant().abs().max(1.0));
    }
}

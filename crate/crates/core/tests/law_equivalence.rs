//! All four sampler variants target the same law on a correlated Gaussian.

use zigzag_bridge::diagnostics::{default_batches, ess_batch_means};
use zigzag_bridge::models::GaussianTarget;
use zigzag_bridge::samplers::{
    discretize, zigzag_fully_local, zigzag_local, zigzag_standard, zigzag_subsampled, RunOptions, RunRng, Skeleton,
};

const MEAN: [f64; 3] = [1.0, -1.0, 0.5];
const DIAG: f64 = 2.0;
const OFF: f64 = -0.8;

// Inverse of the tridiagonal precision by cofactors.
fn covariance() -> [[f64; 3]; 3] {
    let q = [[DIAG, OFF, 0.0], [OFF, DIAG, OFF], [0.0, OFF, DIAG]];
    let det = q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) - q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0])
        + q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
    let mut c = [[0.0; 3]; 3];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let (r0, r1) = ([1, 0, 0][j], [2, 2, 1][j]);
            let (c0, c1) = ([1, 0, 0][i], [2, 2, 1][i]);
            let minor = q[r0][c0] * q[r1][c1] - q[r0][c1] * q[r1][c0];
            *cell = if (i + j) % 2 == 0 { minor } else { -minor } / det;
        }
    }
    c
}

fn check(skeleton: &Skeleton, label: &str) {
    let chain = discretize(skeleton, 20.0, 0.5).unwrap();
    let cov = covariance();
    for k in 0..3 {
        let col: Vec<f64> = chain.iter().map(|x| x[k]).collect();
        let n = col.len() as f64;
        let m = col.iter().sum::<f64>() / n;
        let v = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        let ess = ess_batch_means(&col, default_batches(col.len())).unwrap();
        let se = (v / ess).sqrt();
        assert!((m - MEAN[k]).abs() < 4.5 * se, "{label} coordinate {k}: mean {m}, se {se}");
        assert!((v / cov[k][k] - 1.0).abs() < 0.12, "{label} coordinate {k}: var {v} vs {}", cov[k][k]);
    }
    let n = chain.len() as f64;
    let m: Vec<f64> = (0..3).map(|k| chain.iter().map(|x| x[k]).sum::<f64>() / n).collect();
    let c01 = chain.iter().map(|x| (x[0] - m[0]) * (x[1] - m[1])).sum::<f64>() / (n - 1.0);
    assert!((c01 - cov[0][1]).abs() < 0.05, "{label}: covariance {c01} vs {}", cov[0][1]);
}

#[test]
fn covariance_oracle_inverts_the_precision() {
    let cov = covariance();
    let q = [[DIAG, OFF, 0.0], [OFF, DIAG, OFF], [0.0, OFF, DIAG]];
    for i in 0..3 {
        for j in 0..3 {
            let e: f64 = (0..3).map(|l| q[i][l] * cov[l][j]).sum();
            assert!((e - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
}

#[test]
fn four_variants_agree_on_a_tridiagonal_gaussian() {
    let target = GaussianTarget::tridiagonal(MEAN.to_vec(), DIAG, OFF).unwrap();
    let opts = RunOptions::new(20_000.0);
    let xi0 = [0.0; 3];
    let theta0 = [1.0, -1.0, 1.0];
    check(&zigzag_standard(&target, &opts, &xi0, &theta0, &mut RunRng::new(1)).unwrap(), "standard");
    check(&zigzag_local(&target, &opts, &xi0, &theta0, &mut RunRng::new(2)).unwrap(), "local");
    check(&zigzag_subsampled(&target, &opts, &xi0, &theta0, &mut RunRng::new(3)).unwrap(), "subsampled");
    check(&zigzag_fully_local(&target, &opts, &xi0, &theta0, &mut RunRng::new(4)).unwrap(), "fully local");
}

#[test]
fn same_seed_reproduces_a_run() {
    let target = GaussianTarget::tridiagonal(MEAN.to_vec(), DIAG, OFF).unwrap();
    let opts = RunOptions::new(50.0);
    let a = zigzag_local(&target, &opts, &[0.0; 3], &[1.0; 3], &mut RunRng::new(5)).unwrap();
    let b = zigzag_local(&target, &opts, &[0.0; 3], &[1.0; 3], &mut RunRng::new(5)).unwrap();
    assert_eq!(a, b);
}

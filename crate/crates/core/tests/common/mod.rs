#![allow(dead_code)]

use diamantine::nalgebra::DMatrix;
use diamantine::FrameworkSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Determinant by cofactor expansion along the first row.
pub fn det_laplace(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    match n {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => (0..n)
            .map(|j| {
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != j)
                            .map(|(_, &x)| x)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[0][j] * det_laplace(&minor)
            })
            .sum(),
    }
}

/// Oriented volume `det[p_1 - p_0, .., p_d - p_0]` from raw edge vectors.
pub fn volume_oracle(vectors: &[Vec<f64>]) -> f64 {
    let d = vectors.len() - 1;
    // rows of the transpose; the determinant is the same
    let m: Vec<Vec<f64>> = (1..=d)
        .map(|i| (0..d).map(|k| vectors[i][k] - vectors[0][k]).collect())
        .collect();
    det_laplace(&m)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = dot(&v, &v).sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Edge vectors with the given lengths, rejecting nearly flat cells.
pub fn random_vectors(rng: &mut ChaCha8Rng, lengths: &[f64]) -> Vec<Vec<f64>> {
    let d = lengths.len() - 1;
    loop {
        let vs: Vec<Vec<f64>> = lengths
            .iter()
            .map(|&l| unit_vector(rng, d).into_iter().map(|x| x * l).collect())
            .collect();
        let scale: f64 = lengths
            .iter()
            .product::<f64>()
            .powf(d as f64 / (d + 1) as f64);
        if volume_oracle(&vs).abs() > 1e-2 * scale {
            return vs;
        }
    }
}

pub fn random_spec(rng: &mut ChaCha8Rng, d: usize) -> FrameworkSpec {
    let lengths: Vec<f64> = (0..=d).map(|_| rng.random_range(0.5..2.0)).collect();
    FrameworkSpec::from_vectors(&random_vectors(rng, &lengths)).unwrap()
}

pub fn random_unit_spec(rng: &mut ChaCha8Rng, d: usize) -> FrameworkSpec {
    FrameworkSpec::from_vectors(&random_vectors(rng, &vec![1.0; d + 1])).unwrap()
}

pub fn planar_unit(angles: [f64; 3]) -> Vec<Vec<f64>> {
    angles.iter().map(|a| vec![a.cos(), a.sin()]).collect()
}

/// Sorted squared lengths with distinct entries.
pub fn random_sorted_s(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let mut s: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..5.0)).collect();
        s.sort_by(f64::total_cmp);
        if s.windows(2).all(|w| w[1] - w[0] > 1e-3) {
            return s;
        }
    }
}

/// Uniformly random proper rotation via Gram-Schmidt on random vectors.
pub fn random_rotation(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        for c in &cols {
            let k = dot(&v, c);
            v.iter_mut().zip(c).for_each(|(x, y)| *x -= k * y);
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-3 {
            cols.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    let mut q = DMatrix::from_fn(d, d, |i, j| cols[j][i]);
    if det_laplace(&rows_of(&q)) < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Gram matrix of the edge vectors.
pub fn gram_oracle(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    vectors
        .iter()
        .map(|a| vectors.iter().map(|b| dot(a, b)).collect())
        .collect()
}

/// `omega_ij = <p_i - p_0, p_j - p_0>`, indices from 1.
pub fn omega_oracle(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = vectors.len() - 1;
    let v: Vec<Vec<f64>> = (1..=d)
        .map(|i| (0..d).map(|k| vectors[i][k] - vectors[0][k]).collect())
        .collect();
    v.iter()
        .map(|a| v.iter().map(|b| dot(a, b)).collect())
        .collect()
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub fn eig2(m: &[Vec<f64>]) -> (f64, f64) {
    let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
    let mean = 0.5 * (a + c);
    let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mean - r, mean + r)
}

/// Sphere-constrained perturbation: add `eps * random` and renormalize.
pub fn perturb(rng: &mut ChaCha8Rng, vectors: &[Vec<f64>], eps: f64) -> Vec<Vec<f64>> {
    vectors
        .iter()
        .map(|v| {
            let l = dot(v, v).sqrt();
            let w: Vec<f64> = v
                .iter()
                .map(|x| x + eps * l * rng.random_range(-1.0..1.0))
                .collect();
            let n = dot(&w, &w).sqrt();
            w.into_iter().map(|x| x * l / n).collect()
        })
        .collect()
}

//! Truncated SVD by Gram-matrix subspace iteration with Rayleigh-Ritz
//! extraction.
//!
//! The iteration runs on `G = W^T W` in document space through the sparse
//! operator, with a few oversampling columns so clustered singular values
//! still resolve. Convergence is declared when every kept singular-value
//! estimate moves by less than `tol` relative to the largest one between
//! sweeps. Left vectors come from `u = W v / sigma`; near-zero sigmas get a
//! deterministic orthonormal completion so the factor matrices stay
//! orthonormal even for rank-deficient input.

#![allow(clippy::needless_range_loop)]

use super::{LsiModel, TermDocMatrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LsiError {
    #[error("rank {k} exceeds min(terms, docs) = {max}")]
    RankTooLarge { k: usize, max: usize },
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("no convergence after {0} sweeps")]
    NoConvergence(usize),
}

const OVERSAMPLE: usize = 4;
const START_SEED: u64 = 0x5eed_1517;

/// Rank-`k` factorization of `matrix`, converged to `tol` (relative to the
/// leading singular value) within `max_iter` subspace sweeps.
pub fn truncated_svd(
    matrix: &TermDocMatrix,
    k: usize,
    tol: f64,
    max_iter: usize,
) -> Result<LsiModel, LsiError> {
    let n_terms = matrix.n_terms();
    let n_docs = matrix.n_docs();
    let max_rank = n_terms.min(n_docs);
    if k == 0 {
        return Err(LsiError::ZeroRank);
    }
    if k > max_rank {
        return Err(LsiError::RankTooLarge { k, max: max_rank });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(LsiError::BadTolerance);
    }

    let block = (k + OVERSAMPLE).min(n_docs);

    // Deterministic start block.
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut basis: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n_docs).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut basis);

    let mut term_buf = vec![0.0; n_terms];
    let apply_gram = |v: &[f64], out: &mut [f64], term_buf: &mut [f64]| {
        matrix.apply(v, term_buf);
        matrix.apply_transpose(term_buf, out);
    };

    let mut prev_sigma = vec![f64::INFINITY; k];
    let mut converged = false;
    let mut ritz_doc_vectors: Vec<Vec<f64>> = Vec::new();
    let mut ritz_values: Vec<f64> = Vec::new();

    for _sweep in 0..max_iter {
        // Y = G * basis
        let mut image: Vec<Vec<f64>> = Vec::with_capacity(block);
        for v in &basis {
            let mut y = vec![0.0; n_docs];
            apply_gram(v, &mut y, &mut term_buf);
            image.push(y);
        }

        // Rayleigh-Ritz on the current basis: B = V^T G V.
        let mut projected = vec![vec![0.0; block]; block];
        for i in 0..block {
            for j in i..block {
                let dot = dot(&basis[i], &image[j]);
                projected[i][j] = dot;
                projected[j][i] = dot;
            }
        }
        let (eigvals, eigvecs) = jacobi_eigen(projected);

        // Ritz vectors in document space, ordered by descending eigenvalue.
        ritz_doc_vectors = (0..block)
            .map(|r| {
                let mut x = vec![0.0; n_docs];
                for (j, basis_col) in basis.iter().enumerate() {
                    let q = eigvecs[j][r];
                    if q != 0.0 {
                        axpy(q, basis_col, &mut x);
                    }
                }
                x
            })
            .collect();
        ritz_values = eigvals;

        let sigma_now: Vec<f64> = ritz_values
            .iter()
            .take(k)
            .map(|&l| l.max(0.0).sqrt())
            .collect();
        let scale = sigma_now
            .first()
            .copied()
            .unwrap_or(0.0)
            .max(f64::MIN_POSITIVE);
        let moved = sigma_now
            .iter()
            .zip(&prev_sigma)
            .map(|(now, before)| (now - before).abs())
            .fold(0.0f64, f64::max);
        if moved <= tol * scale {
            converged = true;
            break;
        }
        prev_sigma = sigma_now;

        // Next basis: the rotated image, re-orthonormalized.
        let mut next: Vec<Vec<f64>> = (0..block)
            .map(|r| {
                let mut x = vec![0.0; n_docs];
                for (j, image_col) in image.iter().enumerate() {
                    let q = eigvecs[j][r];
                    if q != 0.0 {
                        axpy(q, image_col, &mut x);
                    }
                }
                x
            })
            .collect();
        orthonormalize_with_completion(&mut next, &mut rng);
        basis = next;
    }

    if !converged {
        return Err(LsiError::NoConvergence(max_iter));
    }

    // Extract the leading k triplets from the converged Ritz pairs.
    let mut doc_factors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut singular_values: Vec<f64> = Vec::with_capacity(k);
    let mut term_factors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let sigma_top = ritz_values.first().map_or(0.0, |&l| l.max(0.0).sqrt());
    let zero_floor = sigma_top * 1e-13;

    for i in 0..k {
        let v = ritz_doc_vectors[i].clone();
        let mut u = vec![0.0; n_terms];
        matrix.apply(&v, &mut u);
        let sigma = norm(&u);
        if sigma > zero_floor && sigma > 0.0 {
            scale_in_place(&mut u, 1.0 / sigma);
        } else {
            // Rank deficiency: keep sigma (possibly ~0) and fill the left
            // factor with a deterministic vector orthogonal to the ones
            // already chosen.
            complete_column(&mut u, &term_factors, &mut rng);
        }
        singular_values.push(sigma);
        term_factors.push(u);
        doc_factors.push(v);
    }

    // Tidy the factors: one re-orthonormalization pass each, then the sign
    // convention (first significant entry of each left vector is positive).
    orthonormalize(&mut term_factors);
    orthonormalize(&mut doc_factors);
    for i in 0..k {
        let flip = term_factors[i]
            .iter()
            .find(|x| x.abs() > 1e-9)
            .is_some_and(|x| *x < 0.0);
        if flip {
            scale_in_place(&mut term_factors[i], -1.0);
            scale_in_place(&mut doc_factors[i], -1.0);
        }
    }

    let doc_latent: Vec<Vec<f64>> = (0..n_docs)
        .map(|d| {
            (0..k)
                .map(|i| singular_values[i] * doc_factors[i][d])
                .collect()
        })
        .collect();

    Ok(LsiModel {
        rank: k,
        singular_values,
        term_factors,
        doc_factors,
        doc_latent,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn scale_in_place(v: &mut [f64], s: f64) {
    for x in v.iter_mut() {
        *x *= s;
    }
}

/// Modified Gram-Schmidt, run twice for numerical safety. Columns that
/// collapse to zero are left as zero vectors.
fn orthonormalize(cols: &mut [Vec<f64>]) {
    for _ in 0..2 {
        for i in 0..cols.len() {
            for j in 0..i {
                let proj = dot(&cols[j], &cols[i]);
                if proj != 0.0 {
                    let prev = cols[j].clone();
                    axpy(-proj, &prev, &mut cols[i]);
                }
            }
            let n = norm(&cols[i]);
            if n > 1e-300 {
                scale_in_place(&mut cols[i], 1.0 / n);
            } else {
                cols[i].iter_mut().for_each(|x| *x = 0.0);
            }
        }
    }
}

/// Gram-Schmidt that replaces collapsed columns with fresh deterministic
/// directions, so the basis never loses rank mid-iteration.
fn orthonormalize_with_completion(cols: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    let dim = cols.first().map_or(0, Vec::len);
    for i in 0..cols.len() {
        let mut attempts = 0;
        loop {
            for j in 0..i {
                let proj = dot(&cols[j], &cols[i]);
                if proj != 0.0 {
                    let prev = cols[j].clone();
                    axpy(-proj, &prev, &mut cols[i]);
                }
            }
            let n = norm(&cols[i]);
            if n > 1e-12 {
                scale_in_place(&mut cols[i], 1.0 / n);
                break;
            }
            attempts += 1;
            if attempts > dim + 1 {
                break;
            }
            cols[i] = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        }
    }
}

fn complete_column(col: &mut Vec<f64>, existing: &[Vec<f64>], rng: &mut ChaCha8Rng) {
    let dim = col.len();
    for _ in 0..dim + 2 {
        let mut candidate: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        for prev in existing {
            let proj = dot(prev, &candidate);
            axpy(-proj, prev, &mut candidate);
        }
        let n = norm(&candidate);
        if n > 1e-8 {
            scale_in_place(&mut candidate, 1.0 / n);
            *col = candidate;
            return;
        }
    }
    // Degenerate fallback: unit vector (only reachable when dim <= rank).
    col.iter_mut().for_each(|x| *x = 0.0);
    if let Some(first) = col.first_mut() {
        *first = 1.0;
    }
}

/// Cyclic Jacobi eigendecomposition of a small dense symmetric matrix.
/// Returns eigenvalues in descending order and the matching eigenvector
/// matrix as `eigvecs[row][col]` (columns are eigenvectors).
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut vecs = vec![vec![0.0; n]; n];
    for (i, row) in vecs.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if n == 0 {
        return (Vec::new(), vecs);
    }

    let frob: f64 = a
        .iter()
        .flat_map(|row| row.iter().map(|x| x * x))
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= 1e-15 * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for row in vecs.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let eigvals: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let eigvecs: Vec<Vec<f64>> = vecs
        .iter()
        .map(|row| order.iter().map(|&i| row[i]).collect())
        .collect();
    (eigvals, eigvecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> TermDocMatrix {
        let n = values.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { values[i] } else { 0.0 })
                    .collect()
            })
            .collect();
        TermDocMatrix::from_dense(&rows)
    }

    #[test]
    fn diagonal_matrix_singular_values() {
        let m = diag(&[3.0, 2.0, 1.0]);
        let model = truncated_svd(&m, 2, 1e-9, 500).unwrap();
        assert!((model.singular_values[0] - 3.0).abs() < 1e-9);
        assert!((model.singular_values[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rank_one_matrix_has_vanishing_second_sigma() {
        // u v^T with u = (1,2,3)/n, v = (4,5)/n.
        let u = [1.0, 2.0, 3.0];
        let v = [4.0, 5.0];
        let rows: Vec<Vec<f64>> = u
            .iter()
            .map(|&a| v.iter().map(|&b| a * b).collect())
            .collect();
        let m = TermDocMatrix::from_dense(&rows);
        let model = truncated_svd(&m, 2, 1e-9, 500).unwrap();
        assert!(model.singular_values[1] <= 1e-8 * model.singular_values[0]);
    }

    #[test]
    fn sigma_is_non_increasing_and_factors_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..9).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let m = TermDocMatrix::from_dense(&rows);
        let model = truncated_svd(&m, 5, 1e-10, 500).unwrap();
        for w in model.singular_values.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        for cols in [&model.term_factors, &model.doc_factors] {
            for i in 0..cols.len() {
                for j in 0..cols.len() {
                    let d = dot(&cols[i], &cols[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((d - want).abs() <= 1e-8, "gram[{i}][{j}] = {d}");
                }
            }
        }
    }

    #[test]
    fn sign_convention_makes_first_significant_entry_positive() {
        let m = diag(&[5.0, 4.0, 3.0]);
        let model = truncated_svd(&m, 3, 1e-9, 500).unwrap();
        for u in &model.term_factors {
            let first = u.iter().find(|x| x.abs() > 1e-9).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn rank_larger_than_dims_is_rejected() {
        let m = diag(&[1.0, 2.0]);
        assert_eq!(
            truncated_svd(&m, 3, 1e-9, 100).unwrap_err(),
            LsiError::RankTooLarge { k: 3, max: 2 }
        );
    }

    #[test]
    fn all_zero_matrix_converges_to_zero_spectrum() {
        let m = TermDocMatrix::from_dense(&vec![vec![0.0; 4]; 5]);
        let model = truncated_svd(&m, 2, 1e-9, 100).unwrap();
        assert!(model.singular_values.iter().all(|&s| s == 0.0));
        // Factors are still orthonormal thanks to completion.
        assert!((norm(&model.term_factors[0]) - 1.0).abs() < 1e-12);
        assert!(dot(&model.term_factors[0], &model.term_factors[1]).abs() < 1e-10);
    }

    #[test]
    fn scaling_the_matrix_scales_sigma_and_preserves_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..8).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let scaled: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|x| x * 37.5).collect())
            .collect();
        let a = truncated_svd(&TermDocMatrix::from_dense(&rows), 4, 1e-10, 500).unwrap();
        let b = truncated_svd(&TermDocMatrix::from_dense(&scaled), 4, 1e-10, 500).unwrap();
        for i in 0..4 {
            assert!(
                (b.singular_values[i] - 37.5 * a.singular_values[i]).abs()
                    <= 1e-9 * b.singular_values[0].max(1.0)
            );
            for (x, y) in a.term_factors[i].iter().zip(&b.term_factors[i]) {
                assert!((x - y).abs() <= 1e-9);
            }
        }
    }
}

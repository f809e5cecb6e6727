//! Leading nontrivial singular pairs of a degree-normalized matrix.
//!
//! The top singular pair of `D1^(-1/2) A D2^(-1/2)` is known in closed form
//! (`σ = 1`, vectors `√D1` and `√D2` normalized), so it is deflated exactly
//! and block subspace iteration with Rayleigh-Ritz extraction runs on the
//! Gram operator of the smaller side.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::NormalizedMatrix;
use super::CoclusterError;

pub const MAX_ITERATIONS: usize = 10_000;
/// Successive singular value estimates must agree to this.
pub const VALUE_TOLERANCE: f64 = 1e-10;
const OVERSAMPLE: usize = 8;
const ITERATION_SEED: u64 = 0x5eed_c0c1;
/// Singular values below this are treated as zero.
const ZERO_SINGULAR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriplet {
    pub value: f64,
    /// Left vector, one entry per matrix row.
    pub left: Vec<f64>,
    /// Right vector, one entry per matrix column.
    pub right: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SpectralEmbedding {
    pub dimensions: usize,
    pub pairs: Vec<SingularTriplet>,
    /// Coordinates of the term vertices (`D1^(-1/2) U`).
    pub term_coords: Vec<Vec<f64>>,
    /// Coordinates of the document vertices (`D2^(-1/2) V`).
    pub doc_coords: Vec<Vec<f64>>,
    pub iterations: usize,
}

/// Number of singular vectors used for `k` clusters: `ceil(log2 k)`, and 1
/// for `k = 1`.
pub fn embedding_dimensions(k: usize) -> usize {
    if k <= 2 {
        1
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as usize
    }
}

pub fn spectral_embed(an: &NormalizedMatrix, k: usize) -> Result<SpectralEmbedding, CoclusterError> {
    let min_dim = an.rows().min(an.cols());
    if k < 2 || k > min_dim {
        return Err(CoclusterError::InvalidK { k, max: min_dim });
    }
    let dimensions = embedding_dimensions(k);
    let (pairs, iterations) = nontrivial_singular_pairs(an, dimensions)?;
    let coords = |sqrt_deg: &[f64], pick: &dyn Fn(&SingularTriplet) -> &Vec<f64>| {
        (0..sqrt_deg.len())
            .map(|i| pairs.iter().map(|p| pick(p)[i] / sqrt_deg[i]).collect())
            .collect()
    };
    let term_coords = coords(an.row_sqrt_degrees(), &|p| &p.left);
    let doc_coords = coords(an.col_sqrt_degrees(), &|p| &p.right);
    Ok(SpectralEmbedding {
        dimensions,
        pairs,
        term_coords,
        doc_coords,
        iterations,
    })
}

#[derive(Clone, Copy)]
enum Side {
    /// Iterate on `AᵀA`; vectors are right singular vectors.
    Right,
    /// Iterate on `AAᵀ`; vectors are left singular vectors.
    Left,
}

struct GramOperator<'a> {
    an: &'a NormalizedMatrix,
    side: Side,
}

impl GramOperator<'_> {
    fn dim(&self) -> usize {
        match self.side {
            Side::Right => self.an.cols(),
            Side::Left => self.an.rows(),
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.an.values();
        match self.side {
            Side::Right => m.mul_t_vec(&m.mul_vec(x)),
            Side::Left => m.mul_vec(&m.mul_t_vec(x)),
        }
    }

    fn trivial(&self) -> Vec<f64> {
        let mut t = match self.side {
            Side::Right => self.an.col_sqrt_degrees().to_vec(),
            Side::Left => self.an.row_sqrt_degrees().to_vec(),
        };
        normalize(&mut t);
        t
    }
}

/// Singular pairs 2..=count+1 of `an`, ordered by decreasing value, plus the
/// number of iterations spent.
pub fn nontrivial_singular_pairs(
    an: &NormalizedMatrix,
    count: usize,
) -> Result<(Vec<SingularTriplet>, usize), CoclusterError> {
    let side = if an.cols() <= an.rows() {
        Side::Right
    } else {
        Side::Left
    };
    let op = GramOperator { an, side };
    let (values, vectors, iterations) = top_eigenpairs(&op, count)?;

    let m = an.values();
    let mut pairs = Vec::with_capacity(count);
    let mut other_side: Option<Vec<Vec<f64>>> = None;
    for (i, (theta, x)) in values.into_iter().zip(vectors).enumerate() {
        let sigma = theta.max(0.0).sqrt();
        let mut y = match side {
            Side::Right => m.mul_vec(&x),
            Side::Left => m.mul_t_vec(&x),
        };
        if sigma > ZERO_SINGULAR {
            y.iter_mut().for_each(|v| *v /= sigma);
        } else {
            // No information in A·x; take the matching null vector of the
            // opposite Gram operator instead.
            if other_side.is_none() {
                let flipped = GramOperator {
                    an,
                    side: match side {
                        Side::Right => Side::Left,
                        Side::Left => Side::Right,
                    },
                };
                other_side = Some(top_eigenpairs(&flipped, count)?.1);
            }
            y = other_side.as_ref().unwrap()[i].clone();
        }
        let (left, right) = match side {
            Side::Right => (y, x),
            Side::Left => (x, y),
        };
        pairs.push(SingularTriplet {
            value: sigma,
            left,
            right,
        });
    }
    Ok((pairs, iterations))
}

/// Eigenvalues, eigenvectors and iterations spent.
type Eigenpairs = (Vec<f64>, Vec<Vec<f64>>, usize);

/// Largest `count` eigenpairs of the Gram operator restricted to the
/// orthogonal complement of its trivial eigenvector.
fn top_eigenpairs(
    op: &GramOperator<'_>,
    count: usize,
) -> Result<Eigenpairs, CoclusterError> {
    let n = op.dim();
    let trivial = op.trivial();
    let block = (count + OVERSAMPLE).min(n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(ITERATION_SEED);

    let mut basis: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    orthonormalize(&mut basis, &trivial, &mut rng);

    let mut previous: Vec<f64> = vec![f64::INFINITY; count];
    let mut worst_residual = f64::INFINITY;
    for iteration in 1..=MAX_ITERATIONS {
        let images: Vec<Vec<f64>> = basis.iter().map(|x| op.apply(x)).collect();
        let projected: Vec<Vec<f64>> = (0..block)
            .map(|a| (0..block).map(|b| dot(&basis[a], &images[b])).collect())
            .collect();
        let (theta, rotation) = symmetric_eigen(&projected);
        let ritz = combine(&basis, &rotation);
        let ritz_images = combine(&images, &rotation);

        let mut converged = true;
        worst_residual = 0.0;
        for i in 0..count {
            let sigma = theta[i].max(0.0).sqrt();
            let residual = ritz_images[i]
                .iter()
                .zip(&ritz[i])
                .map(|(ax, x)| (ax - theta[i] * x).abs())
                .fold(0.0, f64::max);
            let tolerance = if sigma > ZERO_SINGULAR {
                1e-10 * sigma
            } else {
                1e-15
            };
            worst_residual = worst_residual.max(residual);
            if (sigma - previous[i]).abs() >= VALUE_TOLERANCE || residual > tolerance {
                converged = false;
            }
            previous[i] = sigma;
        }
        if converged {
            let mut vectors: Vec<Vec<f64>> = ritz.into_iter().take(count).collect();
            vectors.iter_mut().for_each(|v| fix_sign(v));
            return Ok((theta[..count].to_vec(), vectors, iteration));
        }
        basis = ritz_images;
        orthonormalize(&mut basis, &trivial, &mut rng);
    }
    Err(CoclusterError::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual: worst_residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn axpy(target: &mut [f64], alpha: f64, x: &[f64]) {
    target.iter_mut().zip(x).for_each(|(t, v)| *t += alpha * v);
}

/// Modified Gram-Schmidt (two passes) against `fixed` and earlier columns.
/// Columns that collapse are replaced with fresh random directions.
fn orthonormalize(basis: &mut [Vec<f64>], fixed: &[f64], rng: &mut ChaCha8Rng) {
    let n = fixed.len();
    for i in 0..basis.len() {
        let mut attempts = 0;
        loop {
            let scale = dot(&basis[i], &basis[i]).sqrt();
            for _ in 0..2 {
                let c = dot(&basis[i], fixed);
                axpy(&mut basis[i], -c, fixed);
                for j in 0..i {
                    let (done, rest) = basis.split_at_mut(i);
                    let c = dot(&rest[0], &done[j]);
                    axpy(&mut rest[0], -c, &done[j]);
                }
            }
            let remaining = normalize(&mut basis[i]);
            if remaining > 1e-10 * scale.max(f64::MIN_POSITIVE) && remaining > 1e-300 {
                break;
            }
            attempts += 1;
            assert!(attempts < 100, "cannot extend orthonormal basis");
            basis[i] = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        }
    }
}

/// `out[c] = Σ_r rotation[r][c] · vectors[r]`
fn combine(vectors: &[Vec<f64>], rotation: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = vectors[0].len();
    (0..rotation.len())
        .map(|c| {
            let mut out = vec![0.0; n];
            for (r, v) in vectors.iter().enumerate() {
                axpy(&mut out, rotation[r][c], v);
            }
            out
        })
        .collect()
}

/// Largest-magnitude entry made positive (first one on ties).
fn fix_sign(v: &mut [f64]) {
    let mut pivot = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[pivot].abs() {
            pivot = i;
        }
    }
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Cyclic Jacobi eigen-decomposition of a small symmetric matrix.
/// Returns eigenvalues in decreasing order and the matching eigenvectors as
/// columns of the returned matrix.
pub(crate) fn symmetric_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    // symmetrize away rounding asymmetry
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = m;
            a[j][i] = m;
        }
    }
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]).then(x.cmp(&y)));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n)
        .map(|r| order.iter().map(|&c| v[r][c]).collect())
        .collect();
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocluster::matrix::{normalize_matrix, TermDocMatrix};

    #[test]
    fn dimension_rule() {
        assert_eq!(embedding_dimensions(1), 1);
        assert_eq!(embedding_dimensions(2), 1);
        assert_eq!(embedding_dimensions(3), 2);
        assert_eq!(embedding_dimensions(4), 2);
        assert_eq!(embedding_dimensions(5), 3);
        assert_eq!(embedding_dimensions(8), 3);
        assert_eq!(embedding_dimensions(9), 4);
    }

    #[test]
    fn jacobi_diagonalizes() {
        let m = vec![
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.25],
            vec![0.5, 0.25, 1.0],
        ];
        let (values, vectors) = symmetric_eigen(&m);
        assert!(values.windows(2).all(|w| w[0] >= w[1]));
        for c in 0..3 {
            for r in 0..3 {
                let mv: f64 = (0..3).map(|k| m[r][k] * vectors[k][c]).sum();
                assert!((mv - values[c] * vectors[r][c]).abs() < 1e-12);
            }
        }
        let trace: f64 = values.iter().sum();
        assert!((trace - 8.0).abs() < 1e-12);
    }

    #[test]
    fn block_matrix_separates_by_sign() {
        let m = TermDocMatrix::from_dense(&[
            vec![2.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ])
        .unwrap();
        let an = normalize_matrix(&m).unwrap();
        let emb = spectral_embed(&an, 2).unwrap();
        assert_eq!(emb.dimensions, 1);
        assert!((emb.pairs[0].value - 1.0).abs() < 1e-10);
        let t: Vec<f64> = emb.term_coords.iter().map(|c| c[0]).collect();
        let d: Vec<f64> = emb.doc_coords.iter().map(|c| c[0]).collect();
        let first = t[0].signum();
        assert_eq!(t[1].signum(), first);
        assert_eq!(d[0].signum(), first);
        for x in [t[2], t[3], d[1], d[2]] {
            assert_eq!(x.signum(), -first);
        }
    }

    #[test]
    fn k_above_min_dimension_rejected() {
        let m = TermDocMatrix::from_dense(&[vec![1.0, 2.0], vec![3.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let an = normalize_matrix(&m).unwrap();
        assert!(matches!(
            spectral_embed(&an, 3),
            Err(CoclusterError::InvalidK { k: 3, max: 2 })
        ));
    }

    #[test]
    fn rank_one_matrix_gets_null_vectors() {
        let m = TermDocMatrix::from_dense(&[vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]]).unwrap();
        let an = normalize_matrix(&m).unwrap();
        let (pairs, _) = nontrivial_singular_pairs(&an, 2).unwrap();
        for p in &pairs {
            assert!(p.value < 1e-9);
            let av = an.values().mul_vec(&p.right);
            let atu = an.values().mul_t_vec(&p.left);
            assert!(av.iter().chain(&atu).all(|x| x.abs() < 1e-8));
            assert!((dot(&p.left, &p.left) - 1.0).abs() < 1e-12);
        }
        assert!(dot(&pairs[0].left, &pairs[1].left).abs() < 1e-8);
    }
}

//! Dense linear algebra helpers shared by the numerical modules.

use nalgebra::DMatrix;
use rand::Rng;

/// Relative singular-value threshold for numerical rank.
pub const RANK_THRESHOLD: f64 = 1e-9;

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.abs().row_sum().max();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * scale;
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..=24 {
        term = &term * &x / k as f64;
        sum += &term;
        if term.abs().max() < 1e-18 * sum.abs().max() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Largest singular value.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Number of singular values above `RANK_THRESHOLD · σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_THRESHOLD * max).count()
}

/// Eigenvectors of the symmetric matrix `s`, largest eigenvalue first.
fn sorted_eigenvectors(s: DMatrix<f64>) -> Vec<nalgebra::DVector<f64>> {
    let e = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| e.eigenvalues[j].total_cmp(&e.eigenvalues[i]));
    order.into_iter().map(|i| e.eigenvectors.column(i).into_owned()).collect()
}

fn from_columns(rows: usize, cols: &[nalgebra::DVector<f64>]) -> DMatrix<f64> {
    if cols.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        DMatrix::from_columns(cols)
    }
}

/// Orthonormal basis of the column space: the leading `rank` eigenvectors
/// of `m·mᵀ`.
pub fn image_basis(m: &DMatrix<f64>, rank: usize) -> DMatrix<f64> {
    let vecs = sorted_eigenvectors(m * m.transpose());
    from_columns(m.nrows(), &vecs[..rank.min(vecs.len())])
}

/// Orthonormal basis of the null space of a square matrix: the trailing
/// eigenvectors of `mᵀ·m`, as many as the numerical nullity.
pub fn kernel_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let rank = numerical_rank(m);
    let vecs = sorted_eigenvectors(m.transpose() * m);
    from_columns(m.ncols(), &vecs[rank.min(vecs.len())..])
}

/// Sine of the largest principal angle between the column spaces of two
/// orthonormal bases, or 1 when their dimensions differ.
pub fn subspace_distance(u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    if u.ncols() != v.ncols() || u.nrows() != v.nrows() {
        return 1.0;
    }
    if u.ncols() == 0 {
        return 0.0;
    }
    let n = u.nrows();
    let pu = DMatrix::identity(n, n) - u * u.transpose();
    let pv = DMatrix::identity(n, n) - v * v.transpose();
    op_norm(&(pu * v)).max(op_norm(&(pv * u)))
}

/// Ratio of extreme singular values.
pub fn condition(m: &DMatrix<f64>) -> f64 {
    crate::transform::condition_number(m)
}

/// Random matrix with entries near the identity and condition number at
/// most `max_cond`, by rejection.
pub fn random_well_conditioned<R: Rng>(rng: &mut R, d: usize, max_cond: f64) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        if condition(&m) <= max_cond {
            return m;
        }
    }
}

/// Frobenius norm of `a − b`, relative to `max(1, ‖a‖)`.
pub fn relative_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    (a - b).norm() / a.norm().max(1.0)
}

/// Stable 64-bit FNV-1a hash, used to derive per-element seeds.
pub fn stable_hash(parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for b in *part {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_rotation_generator() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let e = expm(&(a * std::f64::consts::FRAC_PI_2));
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!((e - expected).norm() < 1e-14);
    }

    #[test]
    fn expm_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -2.0, 5.0]));
        let e = expm(&a);
        for (i, x) in [1.0f64, -2.0, 5.0].iter().enumerate() {
            assert!((e[(i, i)] - x.exp()).abs() < 1e-12 * x.exp().max(1.0));
        }
    }

    #[test]
    fn rank_and_bases() {
        let p = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(numerical_rank(&p), 2);
        let im = image_basis(&p, 2);
        let ker = kernel_basis(&p);
        assert_eq!(ker.ncols(), 1);
        assert!((&p * &ker).norm() < 1e-12);
        assert!((im.transpose() * &im - DMatrix::identity(2, 2)).norm() < 1e-12);
        assert!(subspace_distance(&im, &im) < 1e-12);
        let e13 = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let e12 = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(subspace_distance(&im, &e13) < 1e-12);
        assert!((subspace_distance(&im, &e12) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stable_hash_separates_parts() {
        assert_ne!(stable_hash(&[b"ab", b"c"]), stable_hash(&[b"a", b"bc"]));
        assert_eq!(stable_hash(&[b"x"]), stable_hash(&[b"x"]));
    }
}

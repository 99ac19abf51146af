//! Small dense helpers on one-particle vectors and matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

/// `⟨a, b⟩ = Σ_p ā_p b_p`.
pub fn cdot(a: &DVector<C64>, b: &DVector<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn vnorm(a: &DVector<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian
/// matrix; only the lower triangle is read.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Rank-one projector `|φ⟩⟨φ|`, entries `φ_p φ̄_q`.
pub fn projector(phi: &DVector<C64>) -> DMatrix<C64> {
    phi * phi.adjoint()
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-distributed unit vector in `C^d`.
pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<C64> {
    loop {
        let v = DVector::from_fn(d, |_, _| random_complex(rng));
        let n = vnorm(&v);
        if n > 1e-8 {
            return v / C64::new(n, 0.0);
        }
    }
}

/// Random Hermitian matrix with Gaussian entries of the given scale.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> DMatrix<C64> {
    let a = DMatrix::from_fn(d, d, |_, _| random_complex(rng) * scale);
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Random real symmetric matrix with Gaussian entries of the given scale.
pub fn random_symmetric<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(d, d);
    for p in 0..d {
        for q in p..d {
            let x: f64 = rng.sample::<f64, _>(StandardNormal) * scale;
            v[(p, q)] = x;
            v[(q, p)] = x;
        }
    }
    v
}

/// Orthonormal basis of the complement of the unit vector `phi`, built by
/// Gram–Schmidt on the canonical vectors (twice, for stability). The first
/// nonzero component of each output vector is real and positive.
pub fn orthogonal_complement(phi: &DVector<C64>) -> Vec<DVector<C64>> {
    let d = phi.len();
    let mut out: Vec<DVector<C64>> = Vec::with_capacity(d.saturating_sub(1));
    let mut candidates: Vec<(f64, usize)> = (0..d).map(|p| (1.0 - phi[p].norm_sqr(), p)).collect();
    // canonical vectors least aligned with phi first
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, p) in &candidates {
        if out.len() + 1 == d {
            break;
        }
        let mut w = DVector::<C64>::zeros(d);
        w[p] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            let c = cdot(phi, &w);
            w -= phi * c;
            for u in &out {
                let c = cdot(u, &w);
                w -= u * c;
            }
        }
        let n = vnorm(&w);
        if n < 1e-6 {
            continue;
        }
        w /= C64::new(n, 0.0);
        if let Some(first) = w.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = first.conj() / first.norm();
            w *= phase;
        }
        out.push(w);
    }
    out.sort_by(|a, b| {
        let ka = a.iter().position(|z| z.norm() > 1e-12);
        let kb = b.iter().position(|z| z.norm() > 1e-12);
        ka.cmp(&kb)
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complement_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..6 {
            let phi = random_unit_vector(d, &mut rng);
            let u = orthogonal_complement(&phi);
            assert_eq!(u.len(), d - 1);
            for (i, a) in u.iter().enumerate() {
                assert!(cdot(&phi, a).norm() < 1e-13);
                for (j, b) in u.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((cdot(a, b) - want).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn complement_of_e0_in_two_modes_is_e1() {
        let mut phi = DVector::<C64>::zeros(2);
        phi[0] = C64::new(1.0, 0.0);
        let u = orthogonal_complement(&phi);
        assert_eq!(u[0][1], C64::new(1.0, 0.0));
        assert_eq!(u[0][0], C64::new(0.0, 0.0));
    }

    #[test]
    fn eigen_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_hermitian(5, 1.0, &mut rng);
        let (vals, vecs) = hermitian_eigen(&m);
        let diag = DMatrix::from_diagonal(&DVector::from_iterator(5, vals.iter().map(|&x| C64::new(x, 0.0))));
        let back = &vecs * diag * vecs.adjoint();
        assert!((back - m).iter().all(|z| z.norm() < 1e-12));
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }
}

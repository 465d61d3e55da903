use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::C64;

use super::ProtocolError;

const TOL: f64 = 1e-10;

/// Transition probabilities `p1 = |⟨c2|U|c1⟩|²` and `p2 = |⟨c2|U|c2⟩|²`.
///
/// Unitarity caps their sum at one, so no unitary can send both the
/// triggered and the locked state into the locked state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConflictProbabilities {
    pub p1: f64,
    pub p2: f64,
}

impl ConflictProbabilities {
    pub fn sum(&self) -> f64 {
        self.p1 + self.p2
    }
}

pub fn unitarity_defect_dense(u: &DMatrix<C64>) -> f64 {
    let gram = u.adjoint() * u;
    let n = u.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn conflict_bound(
    u: &DMatrix<C64>,
    c1: &DVector<C64>,
    c2: &DVector<C64>,
) -> Result<ConflictProbabilities, ProtocolError> {
    let n = u.nrows();
    if u.ncols() != n || c1.len() != n || c2.len() != n {
        return Err(ProtocolError::DimensionMismatch { expected: n, got: c1.len().max(c2.len()) });
    }
    let defect = unitarity_defect_dense(u);
    if defect > TOL {
        return Err(ProtocolError::NotUnitary(defect));
    }
    let n1 = c1.norm_squared();
    let n2 = c2.norm_squared();
    let ov = c1.dotc(c2).norm();
    if (n1 - 1.0).abs() > TOL || (n2 - 1.0).abs() > TOL || ov > TOL {
        return Err(ProtocolError::NotOrthonormal { norm1: n1, norm2: n2, overlap: ov });
    }
    let u1 = u * c1;
    let u2 = u * c2;
    Ok(ConflictProbabilities { p1: c2.dotc(&u1).norm_sqr(), p2: c2.dotc(&u2).norm_sqr() })
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let z = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn basis(n: usize, k: usize) -> DVector<C64> {
        let mut v = DVector::zeros(n);
        v[k] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn swap_saturates_one_side() {
        let mut u = DMatrix::<C64>::identity(3, 3);
        u.swap_columns(0, 1);
        let p = conflict_bound(&u, &basis(3, 0), &basis(3, 1)).unwrap();
        assert_eq!((p.p1, p.p2), (1.0, 0.0));
    }

    #[test]
    fn rejects_non_unitary_and_non_orthonormal() {
        let u = DMatrix::<C64>::identity(3, 3) * C64::new(1.01, 0.0);
        assert!(matches!(
            conflict_bound(&u, &basis(3, 0), &basis(3, 1)),
            Err(ProtocolError::NotUnitary(_))
        ));
        let u = DMatrix::<C64>::identity(3, 3);
        assert!(matches!(
            conflict_bound(&u, &basis(3, 0), &basis(3, 0)),
            Err(ProtocolError::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn haar_sample_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(12, &mut rng);
        assert!(unitarity_defect_dense(&u) < 1e-13);
    }
}

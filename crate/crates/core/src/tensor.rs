//! Small dense kernels for the d×d matrices and d×d×d tensors that the
//! constitutive laws act on. Only d ∈ {1, 2, 3} occurs, so determinants and
//! cofactors are written out explicitly.

use nalgebra::DMatrix;
use rand::Rng;

pub type Mat = DMatrix<f64>;

pub fn identity(d: usize) -> Mat {
    Mat::identity(d, d)
}

pub fn det(f: &Mat) -> f64 {
    match f.nrows() {
        1 => f[(0, 0)],
        2 => f[(0, 0)] * f[(1, 1)] - f[(0, 1)] * f[(1, 0)],
        3 => {
            f[(0, 0)] * (f[(1, 1)] * f[(2, 2)] - f[(1, 2)] * f[(2, 1)])
                - f[(0, 1)] * (f[(1, 0)] * f[(2, 2)] - f[(1, 2)] * f[(2, 0)])
                + f[(0, 2)] * (f[(1, 0)] * f[(2, 1)] - f[(1, 1)] * f[(2, 0)])
        }
        d => panic!("unsupported dimension {d}"),
    }
}

/// Cofactor matrix `Cof F = det(F) F^{-T}`, i.e. the derivative of `det` with
/// respect to `F`. Polynomial in the entries, so it is defined for singular
/// `F` as well.
pub fn cofactor(f: &Mat) -> Mat {
    match f.nrows() {
        1 => Mat::from_element(1, 1, 1.0),
        2 => Mat::from_row_slice(2, 2, &[f[(1, 1)], -f[(1, 0)], -f[(0, 1)], f[(0, 0)]]),
        3 => {
            let mut c = Mat::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                    let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                    c[(i, j)] = f[(i1, j1)] * f[(i2, j2)] - f[(i1, j2)] * f[(i2, j1)];
                }
            }
            c
        }
        d => panic!("unsupported dimension {d}"),
    }
}

/// Inverse via the cofactor formula; `None` when det F = 0.
pub fn inverse(f: &Mat) -> Option<Mat> {
    let j = det(f);
    if j == 0.0 || !j.is_finite() {
        return None;
    }
    Some(cofactor(f).transpose() / j)
}

/// Frobenius inner product `A : B`.
pub fn ddot(a: &Mat, b: &Mat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn frobenius(a: &Mat) -> f64 {
    ddot(a, a).sqrt()
}

/// Third-order tensor `G_{ijk}`, used for second deformation gradients
/// `G_{ijk} = ∂²χ_i / ∂x_j ∂x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    d: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(d: usize) -> Self {
        Tensor3 {
            d,
            data: vec![0.0; d * d * d],
        }
    }

    pub fn from_vec(d: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), d * d * d);
        Tensor3 { d, data }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.d + j) * self.d + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.d + j) * self.d + k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Triple contraction `G ⋮ H`.
    pub fn dot3(&self, other: &Tensor3) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot3(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Tensor3 {
        Tensor3 {
            d: self.d,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn axpy(&self, s: f64, other: &Tensor3) -> Tensor3 {
        Tensor3 {
            d: self.d,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect(),
        }
    }

    /// Action of a superposed rotation on the deformation: `(R G)_{ijk} = R_{il} G_{ljk}`.
    pub fn rotate(&self, r: &Mat) -> Tensor3 {
        let d = self.d;
        let mut out = Tensor3::zeros(d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = (0..d).map(|l| r[(i, l)] * self.get(l, j, k)).sum();
                    out.set(i, j, k, v);
                }
            }
        }
        out
    }
}

/// Planar rotation by `angle` for d = 2, the trivial rotation for d = 1, and
/// a rotation about a random axis for d = 3 (Rodrigues).
pub fn rotation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Mat {
    let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    match d {
        1 => identity(1),
        2 => rotation_2d(angle),
        3 => {
            let axis = nalgebra::Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let axis = nalgebra::Unit::new_normalize(axis);
            let r = nalgebra::Rotation3::from_axis_angle(&axis, angle);
            Mat::from_iterator(3, 3, r.matrix().iter().copied())
        }
        d => panic!("unsupported dimension {d}"),
    }
}

pub fn rotation_2d(angle: f64) -> Mat {
    let (s, c) = angle.sin_cos();
    Mat::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Skew generator `W` with `Ṙ = W R` for the planar rotation path `R(ω t)`.
pub fn skew_2d(omega: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[0.0, -omega, omega, 0.0])
}

/// Neumaier-compensated running sum. Assembly loops use it so that energy
/// differences of order 1e-14 stay meaningful.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cofactor_matches_det_times_inverse_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..=3 {
            let f = Mat::from_fn(d, d, |i, j| (if i == j { 2.0 } else { 0.0 }) + rng.gen_range(-0.5..0.5));
            let expected = f.clone().try_inverse().unwrap().transpose() * det(&f);
            assert!((cofactor(&f) - expected).amax() < 1e-12);
            assert!((det(&f) - f.determinant()).abs() < 1e-12);
        }
    }

    #[test]
    fn rotations_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 1..=3 {
            let r = rotation(d, &mut rng);
            assert!((r.transpose() * &r - identity(d)).amax() < 1e-14);
            assert!((det(&r) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1.0, 1e-16, 1e-16, 1e-16, 1e-16, -1.0];
        assert!((compensated_sum(xs) - 4e-16).abs() < 1e-30);
    }

    #[test]
    fn tensor_rotation_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = Tensor3::from_vec(2, (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let r = rotation(2, &mut rng);
        assert!((g.rotate(&r).norm() - g.norm()).abs() < 1e-14);
    }
}

//! Square matrices over exact rationals.
//!
//! The inner-product encryption needs invertible matrices whose inverses
//! are exact: determinant and inverse are computed with rational
//! Gauss-Jordan elimination, so `m * m.inverse() == identity` holds
//! bit-for-bit.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{CryptoRng, Rng};

/// Row-major square matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    size: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zero(size: usize) -> Self {
        RationalMatrix {
            size,
            entries: vec![BigRational::zero(); size * size],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zero(size);
        for i in 0..size {
            *m.at_mut(i, i) = BigRational::one();
        }
        m
    }

    /// Matrix with independent uniform integer entries in
    /// [-magnitude, magnitude].
    pub fn random<R: Rng + CryptoRng>(size: usize, magnitude: i64, rng: &mut R) -> Self {
        let entries = (0..size * size)
            .map(|_| BigRational::from(BigInt::from(rng.gen_range(-magnitude..=magnitude))))
            .collect();
        RationalMatrix { size, entries }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn at(&self, row: usize, col: usize) -> &BigRational {
        &self.entries[row * self.size + col]
    }

    pub fn at_mut(&mut self, row: usize, col: usize) -> &mut BigRational {
        &mut self.entries[row * self.size + col]
    }

    /// Exact determinant via fraction-preserving Gaussian elimination with
    /// partial pivoting.
    pub fn determinant(&self) -> BigRational {
        let n = self.size;
        let mut a = self.entries.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let pivot_row = match (col..n).find(|&r| !a[r * n + col].is_zero()) {
                Some(r) => r,
                None => return BigRational::zero(),
            };
            if pivot_row != col {
                for c in 0..n {
                    a.swap(pivot_row * n + c, col * n + c);
                }
                det = -det;
            }
            let pivot = a[col * n + col].clone();
            det *= &pivot;
            for row in (col + 1)..n {
                if a[row * n + col].is_zero() {
                    continue;
                }
                let factor = &a[row * n + col] / &pivot;
                for c in col..n {
                    let delta = &factor * &a[col * n + c];
                    a[row * n + c] -= delta;
                }
            }
        }
        det
    }

    /// Exact inverse; `None` for singular matrices.
    ///
    /// Integer matrices go through fraction-free Bareiss elimination,
    /// which keeps intermediate values as bounded integers instead of
    /// normalizing a rational after every operation. Anything else falls
    /// back to rational Gauss-Jordan.
    pub fn inverse(&self) -> Option<RationalMatrix> {
        if self.entries.iter().all(|e| e.is_integer()) {
            return self.integer_inverse();
        }
        self.rational_inverse()
    }

    /// Fraction-free Gauss-Jordan (Bareiss): after eliminating column k
    /// everywhere, the left block ends as delta*I and the right block as
    /// delta*A^{-1}, with every intermediate value an exact integer.
    fn integer_inverse(&self) -> Option<RationalMatrix> {
        let n = self.size;
        let m = 2 * n;
        let mut w = vec![BigInt::zero(); n * m];
        for i in 0..n {
            for j in 0..n {
                w[i * m + j] = self.at(i, j).to_integer();
            }
            w[i * m + n + i] = BigInt::one();
        }
        let mut prev = BigInt::one();
        for k in 0..n {
            if w[k * m + k].is_zero() {
                let pivot_row = ((k + 1)..n).find(|&r| !w[r * m + k].is_zero())?;
                for j in 0..m {
                    w.swap(k * m + j, pivot_row * m + j);
                }
            }
            let pivot = w[k * m + k].clone();
            for i in 0..n {
                if i == k {
                    continue;
                }
                let factor = w[i * m + k].clone();
                for j in 0..m {
                    if j == k {
                        continue;
                    }
                    let value = (&w[i * m + j] * &pivot - &factor * &w[k * m + j]) / &prev;
                    w[i * m + j] = value;
                }
                w[i * m + k] = BigInt::zero();
            }
            prev = pivot;
        }
        let delta = prev;
        if delta.is_zero() {
            return None;
        }
        let entries = (0..n)
            .flat_map(|i| {
                let delta = delta.clone();
                let row: Vec<BigRational> = (0..n)
                    .map(|j| BigRational::new(w[i * m + n + j].clone(), delta.clone()))
                    .collect();
                row
            })
            .collect();
        Some(RationalMatrix { size: n, entries })
    }

    fn rational_inverse(&self) -> Option<RationalMatrix> {
        let n = self.size;
        let mut a = self.entries.clone();
        let mut inv = Self::identity(n).entries;
        for col in 0..n {
            let pivot_row = (col..n).find(|&r| !a[r * n + col].is_zero())?;
            if pivot_row != col {
                for c in 0..n {
                    a.swap(pivot_row * n + c, col * n + c);
                    inv.swap(pivot_row * n + c, col * n + c);
                }
            }
            let pivot = a[col * n + col].clone();
            for c in 0..n {
                a[col * n + c] /= &pivot;
                inv[col * n + c] /= &pivot;
            }
            for row in 0..n {
                if row == col || a[row * n + col].is_zero() {
                    continue;
                }
                let factor = a[row * n + col].clone();
                for c in 0..n {
                    let da = &factor * &a[col * n + c];
                    a[row * n + c] -= da;
                    let di = &factor * &inv[col * n + c];
                    inv[row * n + c] -= di;
                }
            }
        }
        Some(RationalMatrix {
            size: n,
            entries: inv,
        })
    }

    /// M * v.
    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.size);
        (0..self.size)
            .map(|row| {
                (0..self.size)
                    .map(|col| self.at(row, col) * &v[col])
                    .fold(BigRational::zero(), |acc, x| acc + x)
            })
            .collect()
    }

    /// M^T * v.
    pub fn transpose_mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.size);
        (0..self.size)
            .map(|col| {
                (0..self.size)
                    .map(|row| self.at(row, col) * &v[row])
                    .fold(BigRational::zero(), |acc, x| acc + x)
            })
            .collect()
    }

    pub fn matmul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.size, other.size);
        let n = self.size;
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigRational::zero();
                for k in 0..n {
                    acc += self.at(i, k) * other.at(k, j);
                }
                *out.at_mut(i, j) = acc;
            }
        }
        out
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn from_entries(size: usize, entries: Vec<BigRational>) -> Self {
        assert_eq!(entries.len(), size * size);
        RationalMatrix { size, entries }
    }
}

/// Dot product of two equal-length rational vectors.
pub fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| x * y)
        .fold(BigRational::zero(), |acc, x| acc + x)
}

pub fn rational_from_i64(v: i64) -> BigRational {
    BigRational::from(BigInt::from(v))
}

/// Parses the decimal (numerator, denominator) string pair used in the
/// serialized form.
pub fn rational_from_strings(numerator: &str, denominator: &str) -> Option<BigRational> {
    let n: BigInt = numerator.parse().ok()?;
    let d: BigInt = denominator.parse().ok()?;
    if d.is_zero() || d.is_negative() {
        return None;
    }
    Some(BigRational::new(n, d))
}

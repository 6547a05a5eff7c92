//! Ladder Hamiltonians `H₀ = diag(λ)` and `H_p = i X_p`.

use num_complex::Complex;

use crate::{Error, Result, Scalar};

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len());
        for (j, &v) in values.iter().enumerate() {
            m.set(j, j, Complex::new(v, T::zero()));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// 0-based entry access.
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex<T>) {
        self.data[row * self.n + col] = value;
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        debug_assert_eq!(v.len(), self.n);
        self.data
            .chunks_exact(self.n)
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                        acc + a * b
                    })
            })
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex::new(T::zero(), T::zero()) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        let ab = self.matmul(other);
        let ba = other.matmul(self);
        Self {
            n: self.n,
            data: ab.data.iter().zip(&ba.data).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|i| (i..self.n).all(|j| self.get(i, j) == self.get(j, i).conj()))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
            acc + self.get(j, j)
        })
    }

    pub fn nonzero_count(&self) -> usize {
        self.data
            .iter()
            .filter(|c| **c != Complex::new(T::zero(), T::zero()))
            .count()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }
}

/// A non-degenerate ladder: `n` levels, energies `λ`, drift `H₀` and
/// nearest-neighbour couplings `H_1 .. H_{n−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderSystem<T> {
    lambda: Vec<T>,
    h0: Matrix<T>,
    controls: Vec<Matrix<T>>,
}

/// Builds the ladder for energies `lambda` (ħ = 1, arbitrary units).
pub fn build_ladder<T: Scalar>(n: usize, lambda: &[T]) -> Result<LadderSystem<T>> {
    if n < 2 {
        return Err(Error::TooFewLevels(n));
    }
    if lambda.len() != n {
        return Err(Error::Length {
            what: "energies",
            expected: n,
            got: lambda.len(),
        });
    }
    if let Some(j) = lambda.iter().position(|x| !x.is_finite()) {
        return Err(Error::Domain(format!(
            "energy of level {} is not finite",
            j + 1
        )));
    }
    for i in 0..n {
        for j in i + 1..n {
            if lambda[i] == lambda[j] {
                return Err(Error::Degenerate { i: i + 1, j: j + 1 });
            }
        }
    }

    let h0 = Matrix::diagonal(lambda);
    let zero = T::zero();
    let controls: Vec<_> = (0..n - 1)
        .map(|p| {
            let mut h = Matrix::zeros(n);
            h.set(p, p + 1, Complex::new(zero, -T::one()));
            h.set(p + 1, p, Complex::new(zero, T::one()));
            h
        })
        .collect();

    // Non-degeneracy makes every coupling non-commuting with the drift.
    for (p, h) in controls.iter().enumerate() {
        if h0.commutator(h).max_abs() == zero {
            return Err(Error::Degenerate { i: p + 1, j: p + 2 });
        }
    }

    Ok(LadderSystem {
        lambda: lambda.to_vec(),
        h0,
        controls,
    })
}

impl<T: Scalar> LadderSystem<T> {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[T] {
        &self.lambda
    }

    pub fn h0(&self) -> &Matrix<T> {
        &self.h0
    }

    /// `H_1 .. H_{n−1}`, in that order.
    pub fn controls(&self) -> &[Matrix<T>] {
        &self.controls
    }
}

/// True iff `H₀` and every `H_p` equal their conjugate transposes entrywise.
pub fn hermiticity_check<T: Scalar>(system: &LadderSystem<T>) -> bool {
    system.h0.is_hermitian() && system.controls.iter().all(Matrix::is_hermitian)
}

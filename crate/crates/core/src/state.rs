//! Complex and polar state representations.
//!
//! Level indices in the public API are 1-based, matching the usual
//! `c_1 .. c_n` labelling; storage is 0-based.

use num_complex::Complex;

use crate::{Error, Result, Scalar};

/// Default tolerance on `|Σ|c_j|² − 1|` when constructing states.
pub const DEFAULT_NORM_TOL: f64 = 1e-9;

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase<T: Scalar>(x: T) -> T {
    let pi = T::PI();
    let two_pi = pi + pi;
    let mut y = x % two_pi;
    if y <= -pi {
        y = y + two_pi;
    } else if y > pi {
        y = y - two_pi;
    }
    y
}

fn squared_norm<T: Scalar>(amps: &[Complex<T>]) -> T {
    amps.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
}

/// Unit-norm vector of `n ≥ 2` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexState<T> {
    amps: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexState<T> {
    pub fn new(amps: Vec<Complex<T>>) -> Result<Self> {
        Self::with_tolerance(amps, T::lit(DEFAULT_NORM_TOL))
    }

    pub fn with_tolerance(amps: Vec<Complex<T>>, norm_tol: T) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::TooFewLevels(amps.len()));
        }
        let deviation = (squared_norm(&amps) - T::one()).abs();
        if !(deviation <= norm_tol) {
            return Err(Error::NotNormalized {
                deviation: deviation.as_f64(),
                tolerance: norm_tol.as_f64(),
            });
        }
        Ok(Self { amps })
    }

    /// Builds a state without the norm check. Meant for replaying stored
    /// trajectories, which may have been produced without renormalization.
    pub fn from_raw(amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::TooFewLevels(amps.len()));
        }
        Ok(Self { amps })
    }

    /// The `j`-th standard basis vector (1-based).
    pub fn basis(n: usize, level: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewLevels(n));
        }
        if level == 0 || level > n {
            return Err(Error::InvalidLevelPair {
                i: level,
                j: level,
                n,
            });
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); n];
        amps[level - 1] = Complex::new(T::one(), T::zero());
        Ok(Self { amps })
    }

    /// Real amplitudes; must already be normalized.
    pub fn from_real(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    pub(crate) fn from_amplitudes_unchecked(amps: Vec<Complex<T>>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amps
    }

    pub fn norm(&self) -> T {
        squared_norm(&self.amps).sqrt()
    }

    /// `|c_j|²` for a 1-based level.
    pub fn population(&self, level: usize) -> T {
        self.amps[level - 1].norm_sqr()
    }

    /// Multiplies every amplitude by `e^{iθ}`.
    pub fn with_global_phase(&self, theta: T) -> Self {
        let phase = Complex::from_polar(T::one(), theta);
        Self {
            amps: self.amps.iter().map(|c| c * phase).collect(),
        }
    }

    /// `|⟨other|self⟩|²`.
    pub fn fidelity(&self, other: &Self) -> T {
        let overlap = self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + b.conj() * a
            });
        overlap.norm_sqr()
    }
}

/// Amplitudes `r_j ≥ 0` and phases `φ_j ∈ (−π, π]`, with `φ_j = 0` wherever
/// `r_j = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarState<T> {
    r: Vec<T>,
    phi: Vec<T>,
}

impl<T: Scalar> PolarState<T> {
    pub fn new(r: Vec<T>, phi: Vec<T>) -> Result<Self> {
        Self::with_tolerance(r, phi, T::lit(DEFAULT_NORM_TOL))
    }

    pub fn with_tolerance(r: Vec<T>, phi: Vec<T>, norm_tol: T) -> Result<Self> {
        let n = r.len();
        if n < 2 {
            return Err(Error::TooFewLevels(n));
        }
        if phi.len() != n {
            return Err(Error::Length {
                what: "phases",
                expected: n,
                got: phi.len(),
            });
        }
        if let Some(j) = r.iter().position(|&x| !(x >= T::zero() && x <= T::one())) {
            return Err(Error::InvalidPolar(format!(
                "amplitude r_{} = {} is outside [0, 1]",
                j + 1,
                r[j]
            )));
        }
        if let Some(j) = (0..n).find(|&j| r[j] == T::zero() && phi[j] != T::zero()) {
            return Err(Error::InvalidPolar(format!(
                "phase of zero amplitude r_{} must be 0, got {}",
                j + 1,
                phi[j]
            )));
        }
        let deviation = (r.iter().fold(T::zero(), |acc, &x| acc + x * x) - T::one()).abs();
        if !(deviation <= norm_tol) {
            return Err(Error::NotNormalized {
                deviation: deviation.as_f64(),
                tolerance: norm_tol.as_f64(),
            });
        }
        let phi = phi.into_iter().map(wrap_phase).collect();
        Ok(Self { r, phi })
    }

    /// Polar decomposition of raw amplitudes, normalized or not.
    pub(crate) fn from_amplitudes(amps: &[Complex<T>]) -> Self {
        let mut r = Vec::with_capacity(amps.len());
        let mut phi = Vec::with_capacity(amps.len());
        for c in amps {
            let m = c.norm();
            r.push(m);
            phi.push(if m > T::zero() {
                wrap_phase(c.arg())
            } else {
                T::zero()
            });
        }
        Self { r, phi }
    }

    pub(crate) fn from_parts_unchecked(r: Vec<T>, phi: Vec<T>) -> Self {
        Self { r, phi }
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn r(&self) -> &[T] {
        &self.r
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }
}

/// The stabilization target: the last eigenstate `|n⟩` of `H₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetState {
    index: usize,
}

impl TargetState {
    /// Accepts only `index == n`.
    pub fn new(index: usize, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewLevels(n));
        }
        if index != n {
            return Err(Error::InvalidTarget { index, n });
        }
        Ok(Self { index })
    }

    pub fn last(n: usize) -> Self {
        Self { index: n }
    }

    /// 1-based level index.
    pub fn index(&self) -> usize {
        self.index
    }
}

pub fn to_polar<T: Scalar>(state: &ComplexState<T>) -> PolarState<T> {
    PolarState::from_amplitudes(state.amplitudes())
}

pub fn from_polar<T: Scalar>(state: &PolarState<T>) -> ComplexState<T> {
    ComplexState::from_amplitudes_unchecked(
        state
            .r
            .iter()
            .zip(&state.phi)
            .map(|(&r, &phi)| Complex::from_polar(r, phi))
            .collect(),
    )
}

/// `V = 1 − |⟨ψ_f|ψ⟩|²`, evaluated as the population outside the target.
pub fn lyapunov_value<T: Scalar>(state: &ComplexState<T>, target: TargetState) -> T {
    let t = target.index() - 1;
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != t)
        .fold(T::zero(), |acc, (_, c)| acc + c.norm_sqr())
}

/// `φ_i − φ_j` wrapped to `(−π, π]`, levels 1-based.
pub fn relative_phase<T: Scalar>(p: &PolarState<T>, i: usize, j: usize) -> Result<T> {
    let n = p.dim();
    if i == 0 || j == 0 || i > n || j > n {
        return Err(Error::InvalidLevelPair { i, j, n });
    }
    Ok(wrap_phase(p.phi[i - 1] - p.phi[j - 1]))
}

//! Feedback laws and the Lyapunov rate formulas.
//!
//! All three laws act on the projections `x_j = r_j cos φ_{(j+1)j}`:
//!
//! * fractional: `u_j = k_j sign(x_j) |x_j|^{α_j}`
//! * standard:   `u_j = k_j x_j`
//! * bang-bang:  `u_j = k_j sign(x_j)`
//!
//! with `sign(0) = 0` throughout, so every law vanishes on the target's
//! equivalence class.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::state::{wrap_phase, ComplexState, PolarState, TargetState};
use crate::system::LadderSystem;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    Fractional,
    Standard,
    BangBang,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [Self::Fractional, Self::Standard, Self::BangBang];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fractional => "fractional",
            Self::Standard => "standard",
            Self::BangBang => "bangbang",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fractional" => Ok(Self::Fractional),
            "standard" => Ok(Self::Standard),
            "bangbang" | "bang-bang" => Ok(Self::BangBang),
            other => Err(Error::InvalidParams(format!(
                "unknown controller kind `{other}`"
            ))),
        }
    }
}

/// Gains `k_j > 0` and, for the fractional law, exponents `α_j ∈ (0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerParams<T> {
    kind: ControllerKind,
    k: Vec<T>,
    alpha: Vec<T>,
}

impl<T: Scalar> ControllerParams<T> {
    /// `alpha` may be empty for the standard and bang-bang laws; when given it
    /// must match `k` in length and lie in `(0, 1)` regardless of kind.
    pub fn new(kind: ControllerKind, k: Vec<T>, alpha: Vec<T>) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::InvalidParams("at least one gain is required".into()));
        }
        if let Some(j) = k.iter().position(|&g| !(g > T::zero() && g.is_finite())) {
            return Err(Error::InvalidParams(format!(
                "gain k_{} = {} must be positive",
                j + 1,
                k[j]
            )));
        }
        if kind == ControllerKind::Fractional && alpha.is_empty() {
            return Err(Error::InvalidParams(
                "the fractional law needs exponents alpha".into(),
            ));
        }
        if !alpha.is_empty() {
            if alpha.len() != k.len() {
                return Err(Error::InvalidParams(format!(
                    "{} gains but {} exponents",
                    k.len(),
                    alpha.len()
                )));
            }
            if let Some(j) = alpha.iter().position(|&a| !(a > T::zero() && a < T::one())) {
                return Err(Error::InvalidParams(format!(
                    "exponent alpha_{} = {} must lie in (0, 1)",
                    j + 1,
                    alpha[j]
                )));
            }
        }
        Ok(Self { kind, k, alpha })
    }

    pub fn fractional(k: Vec<T>, alpha: Vec<T>) -> Result<Self> {
        Self::new(ControllerKind::Fractional, k, alpha)
    }

    pub fn standard(k: Vec<T>) -> Result<Self> {
        Self::new(ControllerKind::Standard, k, Vec::new())
    }

    pub fn bang_bang(k: Vec<T>) -> Result<Self> {
        Self::new(ControllerKind::BangBang, k, Vec::new())
    }

    /// Same gains and exponents under another law.
    pub fn with_kind(&self, kind: ControllerKind) -> Result<Self> {
        Self::new(kind, self.k.clone(), self.alpha.clone())
    }

    pub fn kind(&self) -> ControllerKind {
        self.kind
    }

    pub fn gains(&self) -> &[T] {
        &self.k
    }

    /// Empty when none were supplied.
    pub fn exponents(&self) -> &[T] {
        &self.alpha
    }

    /// Number of control fields, `n − 1`.
    pub fn fields(&self) -> usize {
        self.k.len()
    }
}

/// Field amplitudes `u_1 .. u_{n−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlVector<T>(pub Vec<T>);

impl<T: Scalar> ControlVector<T> {
    pub fn zeros(fields: usize) -> Self {
        Self(vec![T::zero(); fields])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, u| m.max(u.abs()))
    }
}

/// Anything that maps a polar state to field amplitudes.
pub trait FeedbackLaw<T: Scalar>: Sync {
    /// Number of control fields produced, `n − 1`.
    fn fields(&self) -> usize;

    fn evaluate(&self, p: &PolarState<T>) -> ControlVector<T>;

    fn check_levels(&self, n: usize) -> Result<()> {
        if self.fields() + 1 != n {
            return Err(Error::Length {
                what: "control fields",
                expected: n.saturating_sub(1),
                got: self.fields(),
            });
        }
        Ok(())
    }
}

impl<T: Scalar> FeedbackLaw<T> for ControllerParams<T> {
    fn fields(&self) -> usize {
        self.k.len()
    }

    fn evaluate(&self, p: &PolarState<T>) -> ControlVector<T> {
        control(self, p)
    }
}

/// `u ≡ 0`: free evolution under `H₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpenLoop {
    pub fields: usize,
}

impl<T: Scalar> FeedbackLaw<T> for OpenLoop {
    fn fields(&self) -> usize {
        self.fields
    }

    fn evaluate(&self, _: &PolarState<T>) -> ControlVector<T> {
        ControlVector::zeros(self.fields)
    }
}

/// A fixed, state-independent field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantControl<T>(pub ControlVector<T>);

impl<T: Scalar> FeedbackLaw<T> for ConstantControl<T> {
    fn fields(&self) -> usize {
        self.0.len()
    }

    fn evaluate(&self, _: &PolarState<T>) -> ControlVector<T> {
        self.0.clone()
    }
}

/// `r_j cos φ_{(j+1)j}` for a 0-based coupling index `j`.
#[inline]
pub(crate) fn projection<T: Scalar>(r: &[T], phi: &[T], j: usize) -> T {
    r[j] * wrap_phase(phi[j + 1] - phi[j]).cos()
}

fn control_parts<T: Scalar>(params: &ControllerParams<T>, r: &[T], phi: &[T]) -> ControlVector<T> {
    assert_eq!(
        params.fields() + 1,
        r.len(),
        "controller has {} fields for a {}-level state",
        params.fields(),
        r.len()
    );
    let u = (0..params.fields())
        .map(|j| {
            let x = projection(r, phi, j);
            let k = params.k[j];
            match params.kind {
                ControllerKind::Fractional => k * x.signum0() * x.abs().powf(params.alpha[j]),
                ControllerKind::Standard => k * x,
                ControllerKind::BangBang => k * x.signum0(),
            }
        })
        .collect();
    ControlVector(u)
}

/// Evaluates the feedback law on a polar state.
///
/// Panics if `params` was built for a different number of levels; use
/// [`FeedbackLaw::check_levels`] first when that is not known.
pub fn control<T: Scalar>(params: &ControllerParams<T>, p: &PolarState<T>) -> ControlVector<T> {
    control_parts(params, p.r(), p.phi())
}

pub(crate) fn rate_ladder_parts<T: Scalar>(r: &[T], phi: &[T], u: &[T]) -> T {
    let n = r.len();
    let last = n - 2;
    -T::lit(2.0) * u[last] * r[n - 1] * projection(r, phi, last)
}

/// `V̇ = −2 u_{n−1} r_n r_{n−1} cos φ_{n(n−1)}`, the ladder-specific rate.
///
/// Under the fractional law this is `−2 k_{n−1} r_n |r_{n−1} cos φ_{n(n−1)}|^{α_{n−1}+1}`
/// and never positive: the projection is shared with [`control`], so the
/// sign of the product is exact in floating point.
pub fn lyapunov_rate_ladder<T: Scalar>(p: &PolarState<T>, u: &ControlVector<T>) -> T {
    assert_eq!(u.len() + 1, p.dim());
    rate_ladder_parts(p.r(), p.phi(), u.as_slice())
}

/// `V̇ = −2 Σ_j u_j |⟨ψ|ψ_f⟩| Im[e^{i∠⟨ψ|ψ_f⟩} ⟨ψ_f|H_j|ψ⟩]`, valid for any
/// control Hamiltonians. `∠0` is taken as 0.
pub fn lyapunov_rate_general<T: Scalar>(
    state: &ComplexState<T>,
    system: &LadderSystem<T>,
    u: &ControlVector<T>,
    target: TargetState,
) -> T {
    let t = target.index() - 1;
    let overlap = state.amplitudes()[t].conj();
    let magnitude = overlap.norm();
    let angle = if magnitude > T::zero() {
        overlap.arg()
    } else {
        T::zero()
    };
    let rotation = Complex::from_polar(T::one(), angle);
    let sum = system
        .controls()
        .iter()
        .zip(u.as_slice())
        .fold(T::zero(), |acc, (h, &uj)| {
            let row = h.mul_vec(state.amplitudes())[t];
            acc + uj * magnitude * (rotation * row).im
        });
    -T::lit(2.0) * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::to_polar;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn preset() -> ControllerParams<f64> {
        ControllerParams::fractional(vec![1.5, 1.0], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap()
    }

    #[test]
    fn fractional_at_ground_state() {
        let p = to_polar(&ComplexState::basis(3, 1).unwrap());
        assert_eq!(control(&preset(), &p).0, vec![1.5, 0.0]);
    }

    #[test]
    fn all_laws_vanish_on_zero_projections() {
        let p = to_polar(
            &ComplexState::<f64>::basis(3, 3)
                .unwrap()
                .with_global_phase(0.4),
        );
        for kind in ControllerKind::ALL {
            let params = preset().with_kind(kind).unwrap();
            assert_eq!(control(&params, &p).0, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn continuous_laws_shrink_near_the_switching_locus() {
        // φ_21 = π/2 − δ, so x_1 = r_1 sin δ
        let h = FRAC_1_SQRT_2;
        for delta in [1e-2, 1e-4, 1e-6] {
            let s = ComplexState::new(vec![
                Complex::new(h, 0.0),
                Complex::from_polar(h, std::f64::consts::FRAC_PI_2 - delta),
                Complex::new(0.0, 0.0),
            ])
            .unwrap();
            let p = to_polar(&s);
            let x = h * delta.sin();
            let frac = control(&preset(), &p).0[0];
            let std = control(&preset().with_kind(ControllerKind::Standard).unwrap(), &p).0[0];
            let bang = control(&preset().with_kind(ControllerKind::BangBang).unwrap(), &p).0[0];
            assert_abs_diff_eq!(frac, 1.5 * x.powf(1.0 / 3.0), epsilon = 1e-9);
            assert_abs_diff_eq!(std, 1.5 * x, epsilon = 1e-12);
            assert_eq!(bang, 1.5);
        }
    }

    #[test]
    fn fractional_versus_standard() {
        let p = to_polar(&ComplexState::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]).unwrap());
        let frac = control(&preset(), &p).0[0];
        let std = control(&preset().with_kind(ControllerKind::Standard).unwrap(), &p).0[0];
        let bang = control(&preset().with_kind(ControllerKind::BangBang).unwrap(), &p).0[0];
        // 1.5·(√2/2)^{1/3} and 1.5·√2/2, evaluated at 30 digits
        assert_abs_diff_eq!(frac, 1.336_348_077_210_509, epsilon = 1e-12);
        assert_abs_diff_eq!(std, 1.060_660_171_779_821, epsilon = 1e-12);
        assert_eq!(bang, 1.5);
    }

    #[test]
    fn negative_projection_flips_the_sign() {
        let s = ComplexState::from_real(&[-0.6, 0.8, 0.0]).unwrap();
        let u = control(&preset(), &to_polar(&s)).0;
        assert_abs_diff_eq!(u[0], -1.5 * 0.6f64.powf(1.0 / 3.0), epsilon = 1e-14);
        // φ_3 = 0 by convention, so x_2 = r_2 > 0
        assert_abs_diff_eq!(u[1], 0.8f64.powf(2.0 / 3.0), epsilon = 1e-14);
    }

    #[test]
    fn ladder_rate_examples() {
        let p = to_polar(&ComplexState::basis(3, 1).unwrap());
        assert_eq!(
            lyapunov_rate_ladder(&p, &ControlVector(vec![3.0, -2.0])),
            0.0
        );

        let p = to_polar(&ComplexState::from_real(&[0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap());
        let u = control(&preset(), &p);
        // −2·(√2/2)·(√2/2)^{5/3}, 30-digit evaluation
        assert_abs_diff_eq!(
            lyapunov_rate_ladder(&p, &u),
            -0.793_700_525_984_099_7,
            epsilon = 1e-12
        );
    }

    #[test]
    fn general_rate_edge_cases() {
        let sys = build_ladder(3, &[0.0, 1.0, 2.0]).unwrap();
        let t = TargetState::last(3);
        let orth = ComplexState::from_real(&[0.6, 0.8, 0.0]).unwrap();
        assert_eq!(
            lyapunov_rate_general(&orth, &sys, &ControlVector(vec![1.0, 1.0]), t),
            0.0
        );
        let s = ComplexState::from_real(&[0.6, 0.0, 0.8]).unwrap();
        assert_eq!(
            lyapunov_rate_general(&s, &sys, &ControlVector::zeros(2), t),
            0.0
        );
    }

    use crate::system::build_ladder;

    #[test]
    fn parameter_validation() {
        assert!(ControllerParams::fractional(vec![1.0, 1.0], vec![1.2, 0.5]).is_err());
        assert!(ControllerParams::fractional(vec![1.0, 1.0], vec![0.0, 0.5]).is_err());
        assert!(ControllerParams::fractional(vec![1.0, -1.0], vec![0.5, 0.5]).is_err());
        assert!(ControllerParams::fractional(vec![1.0], Vec::new()).is_err());
        assert!(ControllerParams::fractional(vec![1.0, 1.0], vec![0.5]).is_err());
        assert!(ControllerParams::<f64>::standard(Vec::new()).is_err());
        assert!(ControllerParams::standard(vec![1.0]).is_ok());
        assert!(preset().check_levels(3).is_ok());
        assert!(preset().check_levels(4).is_err());
        assert!(FeedbackLaw::<f64>::check_levels(&OpenLoop { fields: 2 }, 3).is_ok());
        assert_eq!(
            "bang-bang".parse::<ControllerKind>().unwrap(),
            ControllerKind::BangBang
        );
        assert!("pid".parse::<ControllerKind>().is_err());
    }
}

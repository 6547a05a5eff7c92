//! Finite-time bounds, convergence detection and the power-sum inequality.
//!
//! Two closed forms for the convergence-time bound are exposed side by
//! side. [`bound_theorem_form`] uses the rate constant
//! `K = 2βk_{n−1}/(n−1)` with exponent `(α_{n−1}+1)/2`;
//! [`bound_simulation_form`] is the `6/(k(1−α)) V₀^{(1−α)/2}` expression
//! quoted alongside the three-level experiment. They disagree (11.4382
//! against 17.1573 for `V₀ = 0.75, β = 1/2, k = 1, α = 2/3, n = 3`) and
//! reports always carry both.

use crate::control::ControllerParams;
use crate::propagation::{Sample, Trajectory};
use crate::state::DEFAULT_NORM_TOL;
use crate::{Error, Result, Scalar};

fn check_common<T: Scalar>(v0: T, k_last: T, alpha_last: T) -> Result<()> {
    if !(v0 > T::zero() && v0 <= T::one()) {
        return Err(Error::Domain(format!("V0 = {v0} must lie in (0, 1]")));
    }
    if !(k_last > T::zero() && k_last.is_finite()) {
        return Err(Error::Domain(format!("gain {k_last} must be positive")));
    }
    if !(alpha_last > T::zero() && alpha_last < T::one()) {
        return Err(Error::Domain(format!(
            "exponent {alpha_last} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// `V₀^{1−α_f} / (K_f (1−α_f))` with `K_f = 2βk_{n−1}/(n−1)` and
/// `α_f = (α_{n−1}+1)/2`. For `n = 2` this is the `K = 2βk₁` branch.
pub fn bound_theorem_form<T: Scalar>(
    v0: T,
    beta: T,
    k_last: T,
    alpha_last: T,
    n: usize,
) -> Result<T> {
    check_common(v0, k_last, alpha_last)?;
    if !(beta > T::zero() && beta < T::one()) {
        return Err(Error::Domain(format!("beta = {beta} must lie in (0, 1)")));
    }
    if n < 2 {
        return Err(Error::TooFewLevels(n));
    }
    let two = T::lit(2.0);
    let levels = T::from_usize(n - 1).expect("level count fits scalar");
    let rate = two * beta * k_last / levels;
    let exponent = (alpha_last + T::one()) / two;
    Ok(v0.powf(T::one() - exponent) / (rate * (T::one() - exponent)))
}

/// `6 / (k_{n−1}(1−α_{n−1})) · V₀^{(1−α_{n−1})/2}`.
pub fn bound_simulation_form<T: Scalar>(v0: T, k_last: T, alpha_last: T) -> Result<T> {
    check_common(v0, k_last, alpha_last)?;
    let one_minus = T::one() - alpha_last;
    Ok(T::lit(6.0) / (k_last * one_minus) * v0.powf(one_minus / T::lit(2.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceCriteria<T> {
    /// Convergence is declared once `V ≤ epsilon`.
    pub epsilon: T,
    /// Target-amplitude level `r_n ≥ β` defining `T1`.
    pub beta: T,
}

impl<T: Scalar> Default for ConvergenceCriteria<T> {
    fn default() -> Self {
        Self {
            epsilon: T::lit(1e-4),
            beta: T::lit(0.5),
        }
    }
}

/// Convergence metrics measured on a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T> {
    pub n: usize,
    pub epsilon: T,
    pub beta: T,
    pub t_max: T,
    pub v0: T,
    /// First time with `V ≤ ε`, interpolated between samples.
    pub t_f: Option<T>,
    /// First time with `r_n ≥ β`, interpolated between samples.
    pub t1: Option<T>,
    /// First sample from which `r_{n−1} ≥ r_j` holds for every `j ≤ n−2`
    /// through the end of the run. Zero amplitudes are allowed.
    pub t2: Option<T>,
    /// Levels `j ≤ n−2` whose amplitude is exactly zero at every sample from
    /// `T2` on (the relaxed `r_j > 0` condition).
    pub zero_levels: Vec<usize>,
    /// `max(T1, T2)`.
    pub region_entry: Option<T>,
    /// `V` at `region_entry`.
    pub v_at_entry: Option<T>,
    /// Smallest sampled `r_n` at or after `T1`.
    pub beta_infimum: Option<T>,
    /// [`bound_theorem_form`] evaluated at `V(region_entry)`.
    pub bound_theorem: Option<T>,
    /// [`bound_simulation_form`] evaluated at `V(0)`.
    pub bound_simulation: Option<T>,
    /// `|c_n(t_max)|²`.
    pub final_population: T,
}

impl<T: Scalar> ConvergenceReport<T> {
    /// `t_f − max(T1, T2)`.
    pub fn time_in_region(&self) -> Option<T> {
        Some(self.t_f? - self.region_entry?)
    }

    /// Whether the measured time spent in the finite-time region respects
    /// the theorem-form bound. `None` when either side is unavailable.
    pub fn theorem_bound_holds(&self) -> Option<bool> {
        Some(self.time_in_region()? <= self.bound_theorem?)
    }
}

fn crossing<T: Scalar>(lo: &Sample<T>, hi: &Sample<T>, a: T, b: T, level: T) -> T {
    if a == b {
        return hi.t;
    }
    let w = ((level - a) / (b - a)).max(T::zero()).min(T::one());
    lo.t + (hi.t - lo.t) * w
}

fn first_crossing<T: Scalar>(
    samples: &[Sample<T>],
    value: impl Fn(&Sample<T>) -> T,
    reached: impl Fn(T) -> bool,
    level: T,
) -> Option<T> {
    let idx = samples.iter().position(|s| reached(value(s)))?;
    if idx == 0 {
        return Some(samples[0].t);
    }
    let (lo, hi) = (&samples[idx - 1], &samples[idx]);
    Some(crossing(lo, hi, value(lo), value(hi), level))
}

fn interpolate_v<T: Scalar>(samples: &[Sample<T>], t: T) -> T {
    let idx = samples.partition_point(|s| s.t < t);
    if idx == 0 {
        return samples[0].v;
    }
    if idx >= samples.len() {
        return samples[samples.len() - 1].v;
    }
    let (lo, hi) = (&samples[idx - 1], &samples[idx]);
    let w = (t - lo.t) / (hi.t - lo.t);
    lo.v + (hi.v - lo.v) * w
}

fn amplitude<T: Scalar>(s: &Sample<T>, level: usize) -> T {
    s.state.amplitudes()[level - 1].norm()
}

fn dominant_precursor<T: Scalar>(s: &Sample<T>, n: usize) -> bool {
    let r_prev = amplitude(s, n - 1);
    (1..n - 1).all(|j| r_prev >= amplitude(s, j))
}

/// Measures `t_f`, `T1`, `T2` and both bounds on a trajectory.
///
/// The bounds need the last gain and exponent, so they are only filled in
/// when `params` carries exponents.
pub fn detect_convergence<T: Scalar>(
    traj: &Trajectory<T>,
    criteria: &ConvergenceCriteria<T>,
    params: &ControllerParams<T>,
) -> ConvergenceReport<T> {
    let samples = traj.samples();
    let n = traj.dim();
    let eps = criteria.epsilon;
    let beta = criteria.beta;

    let t_f = first_crossing(samples, |s| s.v, |v| v <= eps, eps);
    let t1 = first_crossing(samples, |s| amplitude(s, n), |r| r >= beta, beta);

    let t2_idx = match samples.iter().rposition(|s| !dominant_precursor(s, n)) {
        None => Some(0),
        Some(i) if i + 1 < samples.len() => Some(i + 1),
        Some(_) => None,
    };
    let t2 = t2_idx.map(|i| samples[i].t);
    let zero_levels = t2_idx
        .map(|i| {
            (1..n - 1)
                .filter(|&j| samples[i..].iter().all(|s| amplitude(s, j) == T::zero()))
                .collect()
        })
        .unwrap_or_default();

    let beta_infimum = t1.map(|t1| {
        samples
            .iter()
            .filter(|s| s.t >= t1)
            .fold(T::one(), |m, s| m.min(amplitude(s, n)))
    });

    let region_entry = match (t1, t2) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };
    let v_at_entry = region_entry.map(|t| interpolate_v(samples, t));

    let v0 = samples[0].v;
    let gains = params.gains();
    let last = (gains.last().copied(), params.exponents().last().copied());
    let (bound_theorem, bound_simulation) = match last {
        (Some(k), Some(a)) => (
            v_at_entry.and_then(|v| bound_theorem_form(v, beta, k, a, n).ok()),
            bound_simulation_form(v0, k, a).ok(),
        ),
        _ => (None, None),
    };

    let end = traj.last();
    ConvergenceReport {
        n,
        epsilon: eps,
        beta,
        t_max: end.t,
        v0,
        t_f,
        t1,
        t2,
        zero_levels,
        region_entry,
        v_at_entry,
        beta_infimum,
        bound_theorem,
        bound_simulation,
        final_population: end.state.population(n),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Outcome<T> {
    /// `(Σ r_j²)^{(α+1)/2}`
    pub lhs: T,
    /// `Σ r_j^{α+1}`
    pub rhs: T,
    /// `lhs ≤ rhs + 1e−12`
    pub holds: bool,
}

/// Checks `(Σ r_j²)^{(α+1)/2} ≤ Σ r_j^{α+1}` for non-negative `r` on the
/// unit sphere.
pub fn lemma1_check<T: Scalar>(r: &[T], alpha: T) -> Result<Lemma1Outcome<T>> {
    if r.is_empty() {
        return Err(Error::Domain("empty amplitude vector".into()));
    }
    if let Some(j) = r.iter().position(|&x| !(x >= T::zero())) {
        return Err(Error::Domain(format!("r_{} = {} is negative", j + 1, r[j])));
    }
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let sum_sq = r.iter().fold(T::zero(), |acc, &x| acc + x * x);
    let deviation = (sum_sq - T::one()).abs();
    if !(deviation <= T::lit(DEFAULT_NORM_TOL)) {
        return Err(Error::NotNormalized {
            deviation: deviation.as_f64(),
            tolerance: DEFAULT_NORM_TOL,
        });
    }
    let power = alpha + T::one();
    let lhs = sum_sq.powf(power / T::lit(2.0));
    let rhs = r.iter().fold(T::zero(), |acc, &x| acc + x.powf(power));
    Ok(Lemma1Outcome {
        lhs,
        rhs,
        holds: lhs <= rhs + T::lit(1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::ControlVector;
    use crate::state::{ComplexState, TargetState};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn theorem_bound_arithmetic() {
        // 12·0.75^{1/6}, evaluated at 30 digits
        let b = bound_theorem_form(0.75, 0.5, 1.0, 2.0 / 3.0, 3).unwrap();
        assert_abs_diff_eq!(b, 11.438_211_515_963_24, epsilon = 1e-12);
        assert!(bound_theorem_form(1e-30, 0.5, 1.0, 2.0 / 3.0, 3).unwrap() < 1e-3);
        let near_one = bound_theorem_form(0.75, 0.5, 1.0, 1.0 - 1e-9, 3).unwrap();
        assert!(near_one > 1e8);
        // n = 2 uses K = 2βk
        let b2 = bound_theorem_form(1.0, 0.5, 1.0, 0.5, 2).unwrap();
        assert_abs_diff_eq!(b2, 4.0, epsilon = 1e-14);
    }

    #[test]
    fn simulation_bound_arithmetic() {
        let b = bound_simulation_form(0.75, 1.0, 2.0 / 3.0).unwrap();
        assert_abs_diff_eq!(b, 17.157_317_273_944_86, epsilon = 1e-12);
        assert_abs_diff_eq!(
            bound_simulation_form(1.0, 1.0, 2.0 / 3.0).unwrap(),
            18.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn bound_domain_errors() {
        assert!(bound_theorem_form(0.0, 0.5, 1.0, 0.5, 3).is_err());
        assert!(bound_theorem_form(1.5, 0.5, 1.0, 0.5, 3).is_err());
        assert!(bound_theorem_form(0.5, 1.0, 1.0, 0.5, 3).is_err());
        assert!(bound_theorem_form(0.5, 0.5, 0.0, 0.5, 3).is_err());
        assert!(bound_theorem_form(0.5, 0.5, 1.0, 1.0, 3).is_err());
        assert!(bound_theorem_form(0.5, 0.5, 1.0, 0.5, 1).is_err());
        assert!(bound_simulation_form(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn lemma1_examples() {
        let out = lemma1_check(&[1.0, 0.0, 0.0], 0.37).unwrap();
        assert_eq!((out.lhs, out.rhs, out.holds), (1.0, 1.0, true));

        let out = lemma1_check(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], 1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(out.lhs, 1.0, epsilon = 1e-15);
        // 2^{1/3}
        assert_abs_diff_eq!(out.rhs, 1.259_921_049_894_873, epsilon = 1e-12);
        assert!(out.holds);

        assert!(lemma1_check(&[0.6, 0.6], 0.5).is_err());
        assert!(lemma1_check(&[-0.6, 0.8], 0.5).is_err());
        assert!(lemma1_check(&[0.6, 0.8], 1.0).is_err());
    }

    fn synthetic(rows: &[(f64, [f64; 3])]) -> Trajectory<f64> {
        let samples = rows
            .iter()
            .map(|&(t, r)| {
                let state = ComplexState::from_real(&r).unwrap();
                Sample {
                    t,
                    v: r[0] * r[0] + r[1] * r[1],
                    state,
                    control: ControlVector::zeros(2),
                    vdot: 0.0,
                    norm_drift: 0.0,
                }
            })
            .collect();
        Trajectory::from_samples(samples, TargetState::last(3)).unwrap()
    }

    fn unit(a: f64, b: f64) -> [f64; 3] {
        [a, b, (1.0 - a * a - b * b).sqrt()]
    }

    #[test]
    fn crossings_are_interpolated() {
        let traj = synthetic(&[
            (0.0, unit(0.9, 0.1)),
            (1.0, unit(0.3, 0.5)),
            (2.0, unit(0.0, 0.1)),
            (3.0, unit(0.0, 0.001)),
        ]);
        let params =
            ControllerParams::fractional(vec![1.5, 1.0], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let crit = ConvergenceCriteria {
            epsilon: 1e-3,
            beta: 0.5,
        };
        let rep = detect_convergence(&traj, &crit, &params);

        // V: 0.01 at t=2, 1e-6 at t=3
        let frac = (0.01 - 1e-3) / (0.01 - 1e-6);
        assert_abs_diff_eq!(rep.t_f.unwrap(), 2.0 + frac, epsilon = 1e-12);
        // r_3: √0.18 ≈ 0.424 at t=0, √0.66 ≈ 0.812 at t=1
        let (a, b) = (0.18f64.sqrt(), 0.66f64.sqrt());
        assert_abs_diff_eq!(rep.t1.unwrap(), (0.5 - a) / (b - a), epsilon = 1e-12);
        // r_2 ≥ r_1 from t=1 on
        assert_eq!(rep.t2, Some(1.0));
        assert!(rep.zero_levels.is_empty());
        assert_eq!(rep.region_entry, Some(1.0));
        assert_abs_diff_eq!(rep.v_at_entry.unwrap(), 0.34, epsilon = 1e-12);
        assert_abs_diff_eq!(
            rep.bound_theorem.unwrap(),
            bound_theorem_form(0.34, 0.5, 1.0, 2.0 / 3.0, 3).unwrap()
        );
        assert_abs_diff_eq!(
            rep.bound_simulation.unwrap(),
            bound_simulation_form(0.82, 1.0, 2.0 / 3.0).unwrap(),
            epsilon = 1e-12
        );
        assert!(rep.theorem_bound_holds().unwrap());
    }

    #[test]
    fn starting_at_target_converges_immediately() {
        let traj = synthetic(&[(0.0, [0.0, 0.0, 1.0]), (1.0, [0.0, 0.0, 1.0])]);
        let params = ControllerParams::standard(vec![1.0, 1.0]).unwrap();
        let rep = detect_convergence(&traj, &ConvergenceCriteria::default(), &params);
        assert_eq!(rep.t_f, Some(0.0));
        assert_eq!(rep.t1, Some(0.0));
        assert_eq!(rep.t2, Some(0.0));
        assert_eq!(rep.zero_levels, vec![1]);
        assert_eq!(rep.bound_theorem, None);
        assert_eq!(rep.final_population, 1.0);
    }

    #[test]
    fn unmet_conditions_are_absent() {
        let traj = synthetic(&[(0.0, unit(0.1, 0.9)), (1.0, unit(0.5, 0.2))]);
        let params = ControllerParams::fractional(vec![1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let rep = detect_convergence(&traj, &ConvergenceCriteria::default(), &params);
        assert_eq!(rep.t_f, None);
        assert_eq!(rep.t2, None);
        assert_eq!(rep.region_entry, None);
        assert_eq!(rep.bound_theorem, None);
        assert!(rep.bound_simulation.is_some());
        assert_eq!(rep.theorem_bound_holds(), None);
    }
}

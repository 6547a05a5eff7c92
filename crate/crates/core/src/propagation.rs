//! Closed-loop integration of `i|ψ̇⟩ = (H₀ + Σ u_j H_j)|ψ⟩`.
//!
//! The complex amplitudes are the integrated representation; the polar form
//! is regular only away from `r_j = 0` and is kept here as an independent
//! cross-check ([`rhs_polar`], [`integrate_polar`]).

use num_complex::Complex;

use crate::control::{lyapunov_rate_ladder, ControlVector, FeedbackLaw};
use crate::state::{lyapunov_value, to_polar, wrap_phase, ComplexState, PolarState, TargetState};
use crate::system::LadderSystem;
use crate::{Error, Result, Scalar};

/// Amplitude floor below which the polar right-hand side refuses to divide.
pub const R_FLOOR: f64 = 1e-12;

/// Single-step norm drift limit, as a multiple of `norm_tol`.
pub const DRIFT_FAILURE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig<T> {
    pub dt: T,
    pub t_max: T,
    pub sample_stride: usize,
    pub renormalize: bool,
    pub norm_tol: T,
}

impl<T: Scalar> IntegratorConfig<T> {
    /// Stride 1, renormalization on, `norm_tol = 1e−9`.
    pub fn new(dt: T, t_max: T) -> Self {
        Self {
            dt,
            t_max,
            sample_stride: 1,
            renormalize: true,
            norm_tol: T::lit(crate::state::DEFAULT_NORM_TOL),
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    pub fn with_renormalize(mut self, renormalize: bool) -> Self {
        self.renormalize = renormalize;
        self
    }

    pub fn with_norm_tol(mut self, norm_tol: T) -> Self {
        self.norm_tol = norm_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        if !(self.dt > zero && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dt = {} must be positive",
                self.dt
            )));
        }
        if !(self.t_max > zero && self.t_max.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_max = {} must be positive",
                self.t_max
            )));
        }
        if !(self.dt < self.t_max) {
            return Err(Error::InvalidConfig(format!(
                "dt = {} must be smaller than t_max = {}",
                self.dt, self.t_max
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidConfig(
                "sample_stride must be at least 1".into(),
            ));
        }
        if !(self.norm_tol > zero) {
            return Err(Error::InvalidConfig("norm_tol must be positive".into()));
        }
        Ok(())
    }

    /// Full `dt` steps and the length of a trailing partial step (zero when
    /// `t_max` is a whole number of steps).
    fn schedule(&self) -> (usize, T) {
        let ratio = self.t_max / self.dt;
        let rounded = ratio.round();
        let slack = T::lit(1e-9) * ratio.max(T::one());
        if (ratio - rounded).abs() <= slack {
            (rounded.to_usize().unwrap_or(0), T::zero())
        } else {
            let full = ratio.floor();
            (full.to_usize().unwrap_or(0), self.t_max - full * self.dt)
        }
    }
}

/// One recorded point of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub state: ComplexState<T>,
    pub control: ControlVector<T>,
    pub v: T,
    pub vdot: T,
    /// `|‖ψ‖ − 1|` before renormalization, for the step that produced this
    /// sample (zero at `t = 0`).
    pub norm_drift: T,
}

impl<T: Scalar> Sample<T> {
    fn record<L: FeedbackLaw<T> + ?Sized>(
        t: T,
        state: ComplexState<T>,
        law: &L,
        target: TargetState,
        norm_drift: T,
    ) -> Self {
        let p = to_polar(&state);
        let control = law.evaluate(&p);
        let vdot = lyapunov_rate_ladder(&p, &control);
        let v = lyapunov_value(&state, target);
        Self {
            t,
            state,
            control,
            v,
            vdot,
            norm_drift,
        }
    }
}

/// Sampled history of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    samples: Vec<Sample<T>>,
    target: TargetState,
    max_step_drift: T,
    steps: usize,
}

impl<T: Scalar> Trajectory<T> {
    /// Reassembles a trajectory (e.g. from CSV). Times must be strictly
    /// increasing and every row must have the same dimensions.
    pub fn from_samples(samples: Vec<Sample<T>>, target: TargetState) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::Domain("a trajectory needs at least one sample".into()))?;
        let n = first.state.dim();
        if target.index() != n {
            return Err(Error::InvalidTarget {
                index: target.index(),
                n,
            });
        }
        for (i, s) in samples.iter().enumerate() {
            if s.state.dim() != n || s.control.len() + 1 != n {
                return Err(Error::Length {
                    what: "sample row",
                    expected: n,
                    got: s.state.dim(),
                });
            }
            if i > 0 && !(s.t > samples[i - 1].t) {
                return Err(Error::Domain(format!(
                    "sample times not increasing at row {i}"
                )));
            }
        }
        let max_step_drift = samples.iter().fold(T::zero(), |m, s| m.max(s.norm_drift));
        let steps = samples.len() - 1;
        Ok(Self {
            samples,
            target,
            max_step_drift,
            steps,
        })
    }

    pub fn samples(&self) -> &[Sample<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].state.dim()
    }

    pub fn target(&self) -> TargetState {
        self.target
    }

    pub fn first(&self) -> &Sample<T> {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample<T> {
        self.samples.last().expect("trajectory is non-empty")
    }

    /// Largest pre-renormalization drift over every integration step,
    /// sampled or not.
    pub fn max_step_drift(&self) -> T {
        self.max_step_drift
    }

    /// Number of integration steps taken.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `|c_level|²` at time `t`, linearly interpolated between samples.
    /// Returns `None` outside the sampled interval.
    pub fn population_at(&self, level: usize, t: T) -> Option<T> {
        let (first, last) = (self.first(), self.last());
        if t < first.t || t > last.t {
            return None;
        }
        let idx = self.samples.partition_point(|s| s.t < t);
        let hi = &self.samples[idx];
        if hi.t == t || idx == 0 {
            return Some(hi.state.population(level));
        }
        let lo = &self.samples[idx - 1];
        let w = (t - lo.t) / (hi.t - lo.t);
        let (a, b) = (lo.state.population(level), hi.state.population(level));
        Some(a + (b - a) * w)
    }
}

/// `−i(H₀ + Σ u_j H_j)ψ`.
pub fn rhs<T: Scalar>(
    state: &ComplexState<T>,
    system: &LadderSystem<T>,
    u: &ControlVector<T>,
) -> Vec<Complex<T>> {
    rhs_amplitudes(state.amplitudes(), system, u.as_slice())
}

fn rhs_amplitudes<T: Scalar>(
    psi: &[Complex<T>],
    system: &LadderSystem<T>,
    u: &[T],
) -> Vec<Complex<T>> {
    let mut h_psi = system.h0().mul_vec(psi);
    for (h, &uj) in system.controls().iter().zip(u) {
        if uj == T::zero() {
            continue;
        }
        for (acc, x) in h_psi.iter_mut().zip(h.mul_vec(psi)) {
            *acc = *acc + x * uj;
        }
    }
    // −i·z = (im, −re)
    h_psi
        .into_iter()
        .map(|z| Complex::new(z.im, -z.re))
        .collect()
}

fn closed_loop_rhs<T: Scalar, L: FeedbackLaw<T> + ?Sized>(
    psi: &[Complex<T>],
    system: &LadderSystem<T>,
    law: &L,
) -> Vec<Complex<T>> {
    let u = law.evaluate(&PolarState::from_amplitudes(psi));
    rhs_amplitudes(psi, system, u.as_slice())
}

fn axpy<T: Scalar>(y: &[Complex<T>], a: T, x: &[Complex<T>]) -> Vec<Complex<T>> {
    y.iter().zip(x).map(|(yi, xi)| yi + xi * a).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<T> {
    pub state: ComplexState<T>,
    /// `|‖ψ‖ − 1|` before any renormalization.
    pub norm_drift: T,
}

fn rk4_step<T: Scalar, L: FeedbackLaw<T> + ?Sized>(
    state: &ComplexState<T>,
    system: &LadderSystem<T>,
    params: &L,
    cfg: &IntegratorConfig<T>,
    h: T,
    t: T,
) -> Result<StepOutcome<T>> {
    let psi = state.amplitudes();
    let half = h / T::lit(2.0);
    let k1 = closed_loop_rhs(psi, system, params);
    let k2 = closed_loop_rhs(&axpy(psi, half, &k1), system, params);
    let k3 = closed_loop_rhs(&axpy(psi, half, &k2), system, params);
    let k4 = closed_loop_rhs(&axpy(psi, h, &k3), system, params);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let next: Vec<_> = (0..psi.len())
        .map(|j| psi[j] + (k1[j] + k2[j] * two + k3[j] * two + k4[j]) * sixth)
        .collect();

    let before = state.norm();
    let after = next.iter().fold(T::zero(), |a, c| a + c.norm_sqr()).sqrt();
    let change = (after - before).abs();
    let limit = T::lit(DRIFT_FAILURE_FACTOR) * cfg.norm_tol;
    if !(change <= limit) {
        return Err(Error::IntegrationFailure {
            t: (t + h).as_f64(),
            drift: change.as_f64(),
            limit: limit.as_f64(),
        });
    }
    let norm_drift = (after - T::one()).abs();
    let next = if cfg.renormalize {
        next.into_iter().map(|c| c / after).collect()
    } else {
        next
    };
    Ok(StepOutcome {
        state: ComplexState::from_amplitudes_unchecked(next),
        norm_drift,
    })
}

/// One classical RK4 step of length `cfg.dt`, with the control re-evaluated
/// from each stage state.
pub fn step<T: Scalar, L: FeedbackLaw<T> + ?Sized>(
    state: &ComplexState<T>,
    system: &LadderSystem<T>,
    params: &L,
    cfg: &IntegratorConfig<T>,
) -> Result<StepOutcome<T>> {
    params.check_levels(system.dim())?;
    if state.dim() != system.dim() {
        return Err(Error::Length {
            what: "state amplitudes",
            expected: system.dim(),
            got: state.dim(),
        });
    }
    rk4_step(state, system, params, cfg, cfg.dt, T::zero())
}

/// Integrates the closed loop over `[0, t_max]`.
///
/// Samples every `sample_stride` steps plus the final time; if `t_max` is not
/// a whole number of steps the last step is shortened to land on it.
pub fn simulate<T: Scalar, L: FeedbackLaw<T> + ?Sized>(
    system: &LadderSystem<T>,
    params: &L,
    initial: &ComplexState<T>,
    target: TargetState,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let n = system.dim();
    params.check_levels(n)?;
    if initial.dim() != n {
        return Err(Error::Length {
            what: "initial state amplitudes",
            expected: n,
            got: initial.dim(),
        });
    }
    if target.index() != n {
        return Err(Error::InvalidTarget {
            index: target.index(),
            n,
        });
    }

    let (full, partial) = cfg.schedule();
    let total = full + usize::from(partial > T::zero());
    let mut samples = Vec::with_capacity(total / cfg.sample_stride + 2);
    samples.push(Sample::record(
        T::zero(),
        initial.clone(),
        params,
        target,
        T::zero(),
    ));

    let mut state = initial.clone();
    let mut t = T::zero();
    let mut max_step_drift = T::zero();
    for i in 1..=total {
        let h = if i > full { partial } else { cfg.dt };
        let out = rk4_step(&state, system, params, cfg, h, t)?;
        t = if i > full {
            cfg.t_max
        } else {
            T::from_usize(i).expect("step index fits scalar") * cfg.dt
        };
        max_step_drift = max_step_drift.max(out.norm_drift);
        state = out.state;
        if i % cfg.sample_stride == 0 || i == total {
            samples.push(Sample::record(
                t,
                state.clone(),
                params,
                target,
                out.norm_drift,
            ));
        }
    }

    Ok(Trajectory {
        samples,
        target,
        max_step_drift,
        steps: total,
    })
}

fn polar_rates<T: Scalar>(r: &[T], phi: &[T], u: &[T], lambda: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let n = r.len();
    let floor = T::lit(R_FLOOR);
    if let Some(j) = r.iter().position(|&x| !(x > floor)) {
        return Err(Error::Singular {
            level: j + 1,
            r: r[j].as_f64(),
        });
    }
    let mut dr = vec![T::zero(); n];
    let mut dphi = vec![T::zero(); n];
    for j in 0..n {
        let (mut real, mut imag) = (T::zero(), T::zero());
        if j > 0 {
            // coupling to the level below through u_{j−1}
            let rel = phi[j] - phi[j - 1];
            real = real + u[j - 1] * r[j - 1] * rel.cos();
            imag = imag + u[j - 1] * r[j - 1] * rel.sin();
        }
        if j + 1 < n {
            let rel = phi[j + 1] - phi[j];
            real = real - u[j] * r[j + 1] * rel.cos();
            imag = imag + u[j] * r[j + 1] * rel.sin();
        }
        dr[j] = real;
        dphi[j] = -lambda[j] - imag / r[j];
    }
    Ok((dr, dphi))
}

/// Amplitude and phase rates of the polar-form dynamics. Refuses states with
/// any `r_j ≤ 1e−12`, where the phase equations divide by zero.
pub fn rhs_polar<T: Scalar>(
    p: &PolarState<T>,
    u: &ControlVector<T>,
    system: &LadderSystem<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    if p.dim() != system.dim() || u.len() + 1 != p.dim() {
        return Err(Error::Length {
            what: "polar state",
            expected: system.dim(),
            got: p.dim(),
        });
    }
    polar_rates(p.r(), p.phi(), u.as_slice(), system.lambda())
}

/// RK4 on the polar form, control re-evaluated per stage. Returns the state
/// after each of `steps` steps (the initial state excluded).
pub fn integrate_polar<T: Scalar, L: FeedbackLaw<T> + ?Sized>(
    initial: &PolarState<T>,
    system: &LadderSystem<T>,
    params: &L,
    dt: T,
    steps: usize,
) -> Result<Vec<PolarState<T>>> {
    params.check_levels(system.dim())?;
    if initial.dim() != system.dim() {
        return Err(Error::Length {
            what: "polar state",
            expected: system.dim(),
            got: initial.dim(),
        });
    }
    let lambda = system.lambda();
    let eval = |r: &[T], phi: &[T]| {
        let u = params.evaluate(&PolarState::from_parts_unchecked(r.to_vec(), phi.to_vec()));
        polar_rates(r, phi, u.as_slice(), lambda)
    };
    let shift = |x: &[T], a: T, dx: &[T]| -> Vec<T> {
        x.iter().zip(dx).map(|(&xi, &di)| xi + a * di).collect()
    };

    let half = dt / T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    let mut r = initial.r().to_vec();
    let mut phi = initial.phi().to_vec();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let (r1, p1) = eval(&r, &phi)?;
        let (r2, p2) = eval(&shift(&r, half, &r1), &shift(&phi, half, &p1))?;
        let (r3, p3) = eval(&shift(&r, half, &r2), &shift(&phi, half, &p2))?;
        let (r4, p4) = eval(&shift(&r, dt, &r3), &shift(&phi, dt, &p3))?;
        for j in 0..r.len() {
            r[j] = r[j] + sixth * (r1[j] + two * r2[j] + two * r3[j] + r4[j]);
            phi[j] = wrap_phase(phi[j] + sixth * (p1[j] + two * p2[j] + two * p3[j] + p4[j]));
        }
        out.push(PolarState::from_parts_unchecked(r.clone(), phi.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{ControllerParams, OpenLoop};
    use crate::system::build_ladder;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn rubidium() -> LadderSystem<f64> {
        build_ladder(3, &[0.0, 1.0, 2.0]).unwrap()
    }

    fn preset() -> ControllerParams<f64> {
        ControllerParams::fractional(vec![1.5, 1.0], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let sys = rubidium();
        let zero = ControlVector::zeros(2);
        let ground = ComplexState::basis(3, 1).unwrap();
        assert_eq!(rhs(&ground, &sys, &zero), vec![c(0.0, 0.0); 3]);

        let mid = ComplexState::basis(3, 2).unwrap();
        assert_eq!(
            rhs(&mid, &sys, &zero),
            vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 0.0)]
        );
        assert_eq!(
            rhs(&mid, &sys, &ControlVector(vec![1.0, 0.0])),
            vec![c(-1.0, 0.0), c(0.0, -1.0), c(0.0, 0.0)]
        );
    }

    #[test]
    fn target_is_a_fixed_point_up_to_phase() {
        let sys = rubidium();
        let target = ComplexState::basis(3, 3).unwrap();
        let cfg = IntegratorConfig::new(1e-3, 1.0);
        let out = step(&target, &sys, &preset(), &cfg).unwrap();
        assert_eq!(lyapunov_value(&out.state, TargetState::last(3)), 0.0);
        assert_abs_diff_eq!(out.state.fidelity(&target), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn schedule_lands_on_t_max() {
        let cfg = IntegratorConfig::new(1e-3, 16.6814);
        let (full, partial) = cfg.schedule();
        assert_eq!(full, 16681);
        assert_abs_diff_eq!(partial, 4e-4, epsilon = 1e-9);
        let cfg = IntegratorConfig::new(1e-3, 20.0);
        assert_eq!(cfg.schedule(), (20000, 0.0));

        let sys = rubidium();
        let init = ComplexState::basis(3, 1).unwrap();
        let traj = simulate(
            &sys,
            &preset(),
            &init,
            TargetState::last(3),
            &IntegratorConfig::new(0.01, 0.105).with_stride(4),
        )
        .unwrap();
        let times: Vec<f64> = traj.samples().iter().map(|s| s.t).collect();
        assert_eq!(traj.steps(), 11);
        assert_eq!(times.len(), 4);
        assert_eq!(*times.last().unwrap(), 0.105);
        assert_abs_diff_eq!(times[2], 0.08, epsilon = 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::new(0.0, 1.0).validate().is_err());
        assert!(IntegratorConfig::new(2.0, 1.0).validate().is_err());
        assert!(IntegratorConfig::new(0.1, 1.0)
            .with_stride(0)
            .validate()
            .is_err());
        assert!(IntegratorConfig::new(0.1, 1.0)
            .with_norm_tol(0.0)
            .validate()
            .is_err());
        assert!(IntegratorConfig::new(0.1, 1.0).validate().is_ok());
    }

    #[test]
    fn oversized_step_is_an_integration_failure() {
        let sys = rubidium();
        let init = ComplexState::from_real(&[0.5, std::f64::consts::FRAC_1_SQRT_2, 0.5]).unwrap();
        let cfg = IntegratorConfig::new(0.5, 10.0);
        let err = simulate(&sys, &preset(), &init, TargetState::last(3), &cfg).unwrap_err();
        assert!(matches!(err, Error::IntegrationFailure { .. }), "{err}");
    }

    #[test]
    fn simulate_checks_dimensions() {
        let sys = rubidium();
        let cfg = IntegratorConfig::new(0.01, 1.0);
        let init2 = ComplexState::basis(2, 1).unwrap();
        assert!(simulate(&sys, &preset(), &init2, TargetState::last(3), &cfg).is_err());
        let init = ComplexState::basis(3, 1).unwrap();
        let p1 = ControllerParams::fractional(vec![1.0], vec![0.5]).unwrap();
        assert!(simulate(&sys, &p1, &init, TargetState::last(3), &cfg).is_err());
    }

    #[test]
    fn polar_rhs_free_evolution_and_singularity() {
        let sys = rubidium();
        let p = to_polar(
            &ComplexState::from_real(&[0.5, std::f64::consts::FRAC_1_SQRT_2, 0.5]).unwrap(),
        );
        let (dr, dphi) = rhs_polar(&p, &ControlVector::zeros(2), &sys).unwrap();
        assert_eq!(dr, vec![0.0; 3]);
        assert_eq!(dphi, vec![-0.0, -1.0, -2.0]);

        let ground = to_polar(&ComplexState::basis(3, 1).unwrap());
        assert_eq!(
            rhs_polar(&ground, &ControlVector::zeros(2), &sys),
            Err(Error::Singular { level: 2, r: 0.0 })
        );
    }

    #[test]
    fn free_evolution_over_pi() {
        let sys = rubidium();
        let params = OpenLoop { fields: 2 };
        let init = ComplexState::basis(3, 2).unwrap();
        let traj = simulate(
            &sys,
            &params,
            &init,
            TargetState::last(3),
            &IntegratorConfig::new(1e-3, PI),
        )
        .unwrap();
        let end = traj.last().state.amplitudes();
        assert_abs_diff_eq!(end[1].re, -1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(end[1].im, 0.0, epsilon = 1e-8);
        assert!(traj.samples().iter().all(|s| s.control.max_abs() == 0.0));
    }

    #[test]
    fn population_interpolation() {
        let sys = rubidium();
        let init = ComplexState::basis(3, 1).unwrap();
        let traj = simulate(
            &sys,
            &preset(),
            &init,
            TargetState::last(3),
            &IntegratorConfig::new(0.1, 1.0),
        )
        .unwrap();
        let s = traj.samples();
        let mid = traj.population_at(2, 0.25).unwrap();
        let (a, b) = (s[2].state.population(2), s[3].state.population(2));
        assert_abs_diff_eq!(mid, 0.5 * (a + b), epsilon = 1e-12);
        assert_eq!(traj.population_at(2, 0.0), Some(0.0));
        assert_eq!(traj.population_at(2, 1.5), None);
    }
}

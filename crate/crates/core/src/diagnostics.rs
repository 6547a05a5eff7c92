//! Randomized numerical checks of the closed-loop properties, shared by the
//! test suites and the `selftest` command.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::analysis::lemma1_check;
use crate::control::{
    control, lyapunov_rate_general, lyapunov_rate_ladder, ControlVector, ControllerParams,
};
use crate::propagation::{simulate, IntegratorConfig};
use crate::state::{from_polar, to_polar, ComplexState, TargetState};
use crate::system::{build_ladder, LadderSystem};
use crate::{Result, Scalar};

/// Haar-random pure state on `n` levels.
pub fn random_state<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexState<T> {
    loop {
        let amps: Vec<Complex<f64>> = (0..n)
            .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            let amps = amps
                .into_iter()
                .map(|c| Complex::new(T::lit(c.re / norm), T::lit(c.im / norm)))
                .collect();
            return ComplexState::from_raw(amps).expect("n >= 2");
        }
    }
}

/// Uniform point on the non-negative orthant of the unit sphere.
pub fn random_unit_nonneg<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal).abs())
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Outcome of a randomized sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub name: &'static str,
    pub samples: usize,
    pub failures: usize,
    /// Largest violation (or deviation) seen; the meaning depends on the sweep.
    pub worst: f64,
    pub tolerance: f64,
}

impl SweepSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn ladder(n: usize) -> LadderSystem<f64> {
    let lambda: Vec<f64> = (0..n).map(|j| j as f64).collect();
    build_ladder(n, &lambda).expect("integer energies are non-degenerate")
}

fn random_fractional<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ControllerParams<f64> {
    let k = (0..n - 1).map(|_| rng.random_range(0.1..3.0)).collect();
    let alpha = (0..n - 1).map(|_| rng.random_range(0.01..0.99)).collect();
    ControllerParams::fractional(k, alpha).expect("sampled parameters are valid")
}

/// `V̇ ≤ 0` under the fractional law, and `|u_j| ≤ k_j`, for random states.
pub fn descent_sweep<R: Rng + ?Sized>(
    rng: &mut R,
    samples: usize,
    levels: std::ops::RangeInclusive<usize>,
) -> SweepSummary {
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let n = rng.random_range(levels.clone());
        let params = random_fractional(rng, n);
        let p = to_polar(&random_state::<f64, _>(rng, n));
        let u = control(&params, &p);
        let vdot = lyapunov_rate_ladder(&p, &u);
        let over = u
            .as_slice()
            .iter()
            .zip(params.gains())
            .any(|(uj, k)| uj.abs() > *k);
        worst = worst.max(vdot);
        if vdot > 0.0 || over {
            failures += 1;
        }
    }
    SweepSummary {
        name: "descent",
        samples,
        failures,
        worst,
        tolerance: 0.0,
    }
}

/// The general rate formula against the ladder-specific one, for random
/// states and unconstrained random controls.
pub fn rate_agreement_sweep<R: Rng + ?Sized>(
    rng: &mut R,
    samples: usize,
    levels: std::ops::RangeInclusive<usize>,
) -> SweepSummary {
    let tolerance = 1e-10;
    let systems: Vec<_> = (0..=*levels.end())
        .map(|n| (n >= 2).then(|| ladder(n)))
        .collect();
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.random_range(levels.clone());
        let system = systems[n].as_ref().expect("n >= 2");
        let state = random_state::<f64, _>(rng, n);
        let u = ControlVector((0..n - 1).map(|_| rng.random_range(-3.0..3.0)).collect());
        let general = lyapunov_rate_general(&state, system, &u, TargetState::last(n));
        let ladder_rate = lyapunov_rate_ladder(&to_polar(&state), &u);
        let diff = (general - ladder_rate).abs();
        worst = worst.max(diff);
        if diff > tolerance {
            failures += 1;
        }
    }
    SweepSummary {
        name: "rate-agreement",
        samples,
        failures,
        worst,
        tolerance,
    }
}

/// The power-sum inequality on random sphere points and at every basis
/// vector. `worst` is the largest `lhs − rhs`.
pub fn lemma1_sweep<R: Rng + ?Sized>(
    rng: &mut R,
    samples: usize,
    levels: std::ops::RangeInclusive<usize>,
) -> SweepSummary {
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let n = rng.random_range(levels.clone());
        let r = random_unit_nonneg(rng, n);
        let alpha = loop {
            let a: f64 = rng.random();
            if a > 0.0 {
                break a;
            }
        };
        let out = lemma1_check(&r, alpha).expect("sampled point is on the sphere");
        worst = worst.max(out.lhs - out.rhs);
        if !out.holds {
            failures += 1;
        }
    }
    // equality at the vertices
    for n in levels {
        for j in 0..n {
            let mut r = vec![0.0; n];
            r[j] = 1.0;
            let alpha: f64 = rng.random_range(0.01..0.99);
            let out = lemma1_check(&r, alpha).expect("basis vector is on the sphere");
            if out.lhs != out.rhs {
                failures += 1;
            }
        }
    }
    SweepSummary {
        name: "lemma1",
        samples,
        failures,
        worst,
        tolerance: 1e-12,
    }
}

/// Complex → polar → complex reconstruction error.
pub fn round_trip_sweep<R: Rng + ?Sized>(
    rng: &mut R,
    samples: usize,
    levels: std::ops::RangeInclusive<usize>,
) -> SweepSummary {
    let tolerance = 1e-12;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.random_range(levels.clone());
        let s = random_state::<f64, _>(rng, n);
        let back = from_polar(&to_polar(&s));
        let err = s
            .amplitudes()
            .iter()
            .zip(back.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst = worst.max(err);
        if err > tolerance {
            failures += 1;
        }
    }
    SweepSummary {
        name: "polar-round-trip",
        samples,
        failures,
        worst,
        tolerance,
    }
}

/// Control invariance under a global phase `e^{iθ}`.
pub fn global_phase_sweep<R: Rng + ?Sized>(
    rng: &mut R,
    samples: usize,
    levels: std::ops::RangeInclusive<usize>,
) -> SweepSummary {
    let tolerance = 1e-9;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.random_range(levels.clone());
        let params = random_fractional(rng, n);
        let s = random_state::<f64, _>(rng, n);
        let theta = rng.random_range(-10.0..10.0);
        let a = control(&params, &to_polar(&s));
        let b = control(&params, &to_polar(&s.with_global_phase(theta)));
        let diff = a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        worst = worst.max(diff);
        if diff > tolerance {
            failures += 1;
        }
    }
    SweepSummary {
        name: "global-phase",
        samples,
        failures,
        worst,
        tolerance,
    }
}

/// First sampled time at which `V̇ < −threshold`, starting from a state on
/// which the rate vanishes (e.g. `|1⟩`, or any state with `r_n = 0`).
/// `None` if the run never leaves the set `{V̇ ≈ 0}` within `t_max`.
pub fn singular_escape_time<T: Scalar>(
    system: &LadderSystem<T>,
    params: &ControllerParams<T>,
    initial: &ComplexState<T>,
    cfg: &IntegratorConfig<T>,
    threshold: T,
) -> Result<Option<T>> {
    let traj = simulate(
        system,
        params,
        initial,
        TargetState::last(system.dim()),
        cfg,
    )?;
    Ok(traj
        .samples()
        .iter()
        .find(|s| s.vdot < -threshold)
        .map(|s| s.t))
}

//! Running configured experiments.

use std::thread;

use ladder_core::{
    bound_simulation_form, bound_theorem_form, detect_convergence, lyapunov_value, simulate,
    ControllerKind, ConvergenceReport64, Error, Trajectory64,
};

use crate::config::ExperimentConfig;
use crate::output::{real, Summary};

/// A finished run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: ControllerKind,
    pub trajectory: Trajectory64,
    pub report: ConvergenceReport64,
}

impl Outcome {
    /// Flat summary: controller, report fields, run statistics and probes.
    pub fn summary(&self, probe_time: Option<f64>) -> Summary {
        let mut s = Summary::default();
        s.push("controller", self.kind).report(&self.report);
        s.real("max_norm_drift", self.trajectory.max_step_drift())
            .push("steps", self.trajectory.steps())
            .push("samples", self.trajectory.len());
        if let Some(t) = probe_time {
            let n = self.trajectory.dim();
            s.real("probe_time", t)
                .optional("probe_population", self.trajectory.population_at(n, t));
        }
        s
    }
}

fn run_kind(cfg: &ExperimentConfig, kind: ControllerKind) -> Result<Outcome, Error> {
    let params = cfg.params.with_kind(kind)?;
    let trajectory = simulate(
        &cfg.system,
        &params,
        &cfg.initial,
        cfg.target,
        &cfg.integrator,
    )?;
    let report = detect_convergence(&trajectory, &cfg.criteria, &params);
    Ok(Outcome {
        kind,
        trajectory,
        report,
    })
}

/// Simulates the configured controller. Deterministic for a given config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    run_kind(cfg, cfg.params.kind())
}

/// One row of a controller comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub kind: ControllerKind,
    pub t_f: Option<f64>,
    /// Target population at the reference time.
    pub population_at_reference: f64,
    pub max_abs_u: f64,
    /// Trapezoidal `∫ V̇ dt` over the run.
    pub total_descent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// The fractional controller's `t_f`, falling back to `t_max`.
    pub reference_time: f64,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn row(&self, kind: ControllerKind) -> &ComparisonRow {
        self.rows
            .iter()
            .find(|r| r.kind == kind)
            .expect("every kind is compared")
    }

    pub fn render(&self) -> String {
        let mut out = format!("reference_time={}\n", real(self.reference_time));
        out.push_str("controller,t_f,population_at_reference,max_abs_u,total_descent\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.kind,
                r.t_f.map_or_else(|| "none".into(), real),
                real(r.population_at_reference),
                real(r.max_abs_u),
                real(r.total_descent)
            ));
        }
        out
    }
}

fn total_descent(traj: &Trajectory64) -> f64 {
    traj.samples()
        .windows(2)
        .map(|w| 0.5 * (w[0].vdot + w[1].vdot) * (w[1].t - w[0].t))
        .sum()
}

/// Runs the scenario under all three laws with the configured gains
/// (exponents only matter for the fractional law), one thread each.
pub fn compare_controllers(cfg: &ExperimentConfig) -> Result<(Comparison, Vec<Outcome>), Error> {
    let outcomes: Vec<Outcome> = thread::scope(|scope| {
        let handles: Vec<_> = ControllerKind::ALL
            .iter()
            .map(|&kind| scope.spawn(move || run_kind(cfg, kind)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect::<Result<_, _>>()
    })?;

    let fractional = outcomes
        .iter()
        .find(|o| o.kind == ControllerKind::Fractional)
        .expect("fractional run present");
    let reference_time = fractional.report.t_f.unwrap_or(cfg.integrator.t_max);
    let n = cfg.n();
    let rows = outcomes
        .iter()
        .map(|o| ComparisonRow {
            kind: o.kind,
            t_f: o.report.t_f,
            population_at_reference: o
                .trajectory
                .population_at(n, reference_time)
                .unwrap_or(o.report.final_population),
            max_abs_u: o
                .trajectory
                .samples()
                .iter()
                .fold(0.0, |m, s| m.max(s.control.max_abs())),
            total_descent: total_descent(&o.trajectory),
        })
        .collect();
    Ok((
        Comparison {
            reference_time,
            rows,
        },
        outcomes,
    ))
}

/// Both finite-time bounds evaluated at the configured initial state.
pub fn bound_summary(cfg: &ExperimentConfig) -> Result<Summary, Error> {
    let n = cfg.n();
    let (k, a) = match (cfg.params.gains().last(), cfg.params.exponents().last()) {
        (Some(&k), Some(&a)) => (k, a),
        _ => {
            return Err(Error::InvalidParams(
                "the bounds need exponents (set `alpha`)".into(),
            ))
        }
    };
    let v0 = lyapunov_value(&cfg.initial, cfg.target);
    let beta = cfg.criteria.beta;
    let mut s = Summary::default();
    s.push("n", n)
        .real("v0", v0)
        .real("beta", beta)
        .real("k_last", k)
        .real("alpha_last", a)
        .real("bound_theorem", bound_theorem_form(v0, beta, k, a, n)?)
        .real("bound_simulation", bound_simulation_form(v0, k, a)?);
    Ok(s)
}

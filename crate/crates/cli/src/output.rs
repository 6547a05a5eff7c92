//! Trajectory CSV and flat `key=value` summaries.
//!
//! Reals are written as `{:.16e}` (17 significant digits), which round-trips
//! every `f64` exactly.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use ladder_core::{
    Complex, ComplexState, ControlVector, ConvergenceReport64, Sample, TargetState, Trajectory64,
};

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), real)
}

pub fn csv_header(n: usize) -> String {
    let mut cols = vec!["t".to_string()];
    for j in 1..=n {
        cols.push(format!("re_c{j}"));
        cols.push(format!("im_c{j}"));
    }
    cols.extend((1..n).map(|j| format!("u_{j}")));
    cols.extend(["V", "Vdot", "norm_drift"].map(String::from));
    cols.join(",")
}

pub fn write_csv<W: Write>(mut out: W, traj: &Trajectory64) -> io::Result<()> {
    writeln!(out, "{}", csv_header(traj.dim()))?;
    let mut row = String::new();
    for s in traj.samples() {
        row.clear();
        row.push_str(&real(s.t));
        for c in s.state.amplitudes() {
            let _ = write!(row, ",{},{}", real(c.re), real(c.im));
        }
        for u in s.control.as_slice() {
            let _ = write!(row, ",{}", real(*u));
        }
        let _ = write!(
            row,
            ",{},{},{}",
            real(s.v),
            real(s.vdot),
            real(s.norm_drift)
        );
        writeln!(out, "{row}")?;
    }
    out.flush()
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Reads a CSV produced by [`write_csv`]. The target is the last level.
pub fn read_csv<R: BufRead>(input: R) -> io::Result<Trajectory64> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| bad("empty trajectory file"))??;
    let width = header.split(',').count();
    // width = 1 + 2n + (n − 1) + 3
    if width < 9 || (width - 3) % 3 != 0 {
        return Err(bad(format!("unexpected column count {width}")));
    }
    let n = (width - 3) / 3;
    if header != csv_header(n) {
        return Err(bad("header does not match the trajectory schema"));
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("row {}: {e}", i + 2)))?;
        if v.len() != width {
            return Err(bad(format!(
                "row {} has {} columns, expected {width}",
                i + 2,
                v.len()
            )));
        }
        let amps = (0..n)
            .map(|j| Complex::new(v[1 + 2 * j], v[2 + 2 * j]))
            .collect();
        let state = ComplexState::from_raw(amps).map_err(|e| bad(e.to_string()))?;
        let control = ControlVector(v[1 + 2 * n..2 * n + n].to_vec());
        samples.push(Sample {
            t: v[0],
            state,
            control,
            v: v[width - 3],
            vdot: v[width - 2],
            norm_drift: v[width - 1],
        });
    }
    Trajectory64::from_samples(samples, TargetState::last(n)).map_err(|e| bad(e.to_string()))
}

/// Ordered `key=value` document.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn real(&mut self, key: &str, value: f64) -> &mut Self {
        self.push(key, real(value))
    }

    pub fn optional(&mut self, key: &str, value: Option<f64>) -> &mut Self {
        self.push(key, optional(value))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// Appends every report field.
    pub fn report(&mut self, rep: &ConvergenceReport64) -> &mut Self {
        let zero_levels: Vec<String> = rep.zero_levels.iter().map(usize::to_string).collect();
        self.push("n", rep.n)
            .real("epsilon", rep.epsilon)
            .real("beta", rep.beta)
            .real("t_max", rep.t_max)
            .real("v0", rep.v0)
            .optional("t_f", rep.t_f)
            .optional("t1", rep.t1)
            .optional("t2", rep.t2)
            .push("zero_levels", zero_levels.join(","))
            .optional("region_entry", rep.region_entry)
            .optional("v_at_entry", rep.v_at_entry)
            .optional("beta_infimum", rep.beta_infimum)
            .optional("bound_theorem", rep.bound_theorem)
            .optional("bound_simulation", rep.bound_simulation)
            .optional("time_in_region", rep.time_in_region())
            .push(
                "theorem_bound_holds",
                rep.theorem_bound_holds()
                    .map_or("none".to_string(), |b| b.to_string()),
            )
            .real("final_population", rep.final_population)
    }
}

/// Parses a rendered summary back into pairs.
pub fn parse_summary(text: &str) -> Summary {
    let mut s = Summary::default();
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            s.push(k, v);
        }
    }
    s
}

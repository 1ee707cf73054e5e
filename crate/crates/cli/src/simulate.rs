use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use mfw::dynsys::{trajectory, State, SystemSpec, Terminal};

use crate::common::{input, load, CliResult};

pub fn run(spec_path: &Path, x0: &str, t: f64, dt: Option<f64>) -> CliResult {
    let mut spec = load(spec_path)?.spec;
    let start = match &spec {
        SystemSpec::Ode(ode) => {
            let p = x0
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| input(format!("--x0 `{x0}`: {e}")))?;
            if p.len() != ode.dim() {
                return Err(input(format!(
                    "--x0 has {} coordinates, the system has dimension {}",
                    p.len(),
                    ode.dim()
                )));
            }
            State::Point(p)
        }
        _ => State::Discrete(spec.state_index(x0.trim()).map_err(input)?),
    };
    if let Some(dt) = dt {
        let SystemSpec::Ode(ode) = spec else {
            return Err(input("--dt applies to ode systems only"));
        };
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(input(format!("--dt must be positive, got {dt}")));
        }
        spec = SystemSpec::Ode(ode.with_dt(dt));
    }
    let sample = spec.as_ode().map_or(1.0, |o| o.dt());
    let traj = trajectory(&spec, &start, t, sample, None).map_err(input)?;

    let labels = spec.labels();
    let mut out = String::from("t");
    match &spec {
        SystemSpec::Ode(ode) => (1..=ode.dim()).for_each(|i| {
            let _ = write!(out, ",x{i}");
        }),
        _ => out.push_str(",state"),
    }
    out.push_str(",escaped\n");
    let row = |out: &mut String, t: f64, s: &State, escaped: bool| {
        let _ = write!(out, "{t:?}");
        match s {
            State::Point(p) => p.iter().for_each(|v| {
                let _ = write!(out, ",{v:?}");
            }),
            State::Discrete(i) => {
                let _ = write!(out, ",{}", labels.map_or_else(|| i.to_string(), |l| l[*i].clone()));
            }
        }
        let _ = writeln!(out, ",{}", u8::from(escaped));
    };
    for (t, s) in traj.times.iter().zip(&traj.points) {
        row(&mut out, *t, s, false);
    }
    if let Terminal::Escaped(te) = traj.terminal {
        row(&mut out, te, traj.last(), true);
        eprintln!("escaped at t = {te}");
    }
    std::io::stdout()
        .lock()
        .write_all(out.as_bytes())
        .map_err(|e| input(format!("cannot write to standard output: {e}")))
}

use std::path::Path;

use mfw::analysis::analyze;
use mfw::dynsys::SystemSpec;
use mfw::io::lyapunov_csv;
use mfw::lyapunov::{
    CellUnionDistance, DecreaseReport, FiniteLyapunov, LyapunovField, OdeLyapunov, OdeLyapunovOptions,
    DEFAULT_DECREASE_TOL, DEFAULT_ZETA_TOL,
};

use crate::common::{config, input, load, write, CliError, CliResult};
use crate::GridArgs;

const DECREASE_TRAJECTORIES: usize = 20;
const DECREASE_T_OBS: f64 = 5.0;
const DECREASE_SAMPLE_DT: f64 = 0.01;

pub fn run(
    spec_path: &Path,
    attractor_id: usize,
    out: &Path,
    tmax: Option<f64>,
    dt: Option<f64>,
    grid: &GridArgs,
) -> CliResult {
    let mut spec = load(spec_path)?.spec;
    if let Some(dt) = dt {
        let SystemSpec::Ode(ode) = spec else {
            return Err(input("--dt applies to ode systems only"));
        };
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(input(format!("--dt must be positive, got {dt}")));
        }
        spec = SystemSpec::Ode(ode.with_dt(dt));
    }
    let analysis = analyze(&spec, &config(grid)?).map_err(input)?;
    let n = analysis.lattice.attractors.len();
    let record = analysis.lattice.attractors.get(attractor_id).ok_or_else(|| {
        input(format!(
            "--attractor-id {attractor_id} out of range; the system has {n} attractors"
        ))
    })?;
    let ts = &analysis.ts;

    let (field, report, dim) = match &spec {
        SystemSpec::Ode(ode) => {
            let grid = ts.grid().expect("ode transition systems carry a grid");
            let k0 = CellUnionDistance::new(grid, &record.cells).map_err(input)?;
            let mut opts = OdeLyapunovOptions::default();
            if let Some(t) = tmax {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(input(format!("--tmax must be positive, got {t}")));
                }
                opts.tmax = t;
            }
            let ly = OdeLyapunov::new(ode, &k0, opts);
            let field = ly.field(ts, &record.basin).map_err(input)?;
            let cells = record.basin.difference(&record.cells).to_vec();
            let stride = cells.len().div_ceil(DECREASE_TRAJECTORIES).max(1);
            let starts: Vec<Vec<f64>> = cells.iter().step_by(stride).map(|&c| grid.center(c)).collect();
            let every = ((DECREASE_SAMPLE_DT / ode.dt()).round() as usize).max(1);
            let report = ly
                .verify_decrease(&starts, DECREASE_T_OBS, every, DEFAULT_DECREASE_TOL, DEFAULT_ZETA_TOL)
                .map_err(input)?;
            (field, report, ode.dim())
        }
        _ => {
            if tmax.is_some() {
                return Err(input("--tmax applies to ode systems only"));
            }
            let ly = FiniteLyapunov::new(ts, &record.cells).map_err(input)?;
            (ly.field(ly.basin()), ly.verify_decrease(), 0)
        }
    };

    write(out, lyapunov_csv(&field.rows, dim))?;
    summarize(&field, &report);
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{} decrease violations",
            report.violations.len()
        )))
    }
}

fn summarize(field: &LyapunovField, report: &DecreaseReport) {
    eprintln!(
        "{} rows; decrease: {} checked, {} exempt, {} violations",
        field.rows.len(),
        report.checked,
        report.exempt,
        report.violations.len()
    );
    if let Some((cell, e)) = field.errors.first() {
        eprintln!("{} cells without a value, first: cell {cell}: {e}", field.errors.len());
    }
}

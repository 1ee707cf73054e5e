use std::path::Path;

use mfw::analysis::analyze;
use mfw::checks::{random_suite, system_checks, Check};
use mfw::dynsys::SystemSpec;
use mfw::lyapunov::{CellUnionDistance, OdeLyapunov, OdeLyapunovOptions, DEFAULT_DECREASE_TOL, DEFAULT_ZETA_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::common::{config, input, load, CliError, CliResult};
use crate::GridArgs;

const ODE_TRAJECTORIES: usize = 20;
const ODE_T_OBS: f64 = 5.0;
const ODE_SAMPLE_DT: f64 = 0.01;

pub fn run(spec_path: Option<&Path>, seeds: Option<u64>, grid: &GridArgs) -> CliResult {
    if spec_path.is_none() && seeds.is_none() {
        return Err(input("verify needs --spec, --seeds, or both"));
    }
    let mut checks = Vec::new();
    if let Some(path) = spec_path {
        let spec = load(path)?.spec;
        let analysis = analyze(&spec, &config(grid)?).map_err(input)?;
        checks.extend(analysis.checks.iter().cloned());
        for c in system_checks(&analysis.ts) {
            if !checks.iter().any(|d: &Check| d.name == c.name) {
                checks.push(c);
            }
        }
        if let SystemSpec::Ode(ode) = &spec {
            checks.push(ode_decrease(ode, &analysis));
        }
    }
    if let Some(n) = seeds {
        checks.extend(random_suite(n));
    }
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        if c.detail.is_empty() {
            println!("{status} {}", c.name);
        } else {
            println!("{status} {} ({})", c.name, c.detail);
        }
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Verification(format!("{failed} of {} checks", checks.len())))
    }
}

/// Decrease of the global attractor's Lyapunov function along trajectories
/// from random points of the non-escaping cells.
fn ode_decrease(ode: &mfw::dynsys::OdeSystem, analysis: &mfw::analysis::Analysis) -> Check {
    const NAME: &str = "lyapunov_decrease_trajectories";
    let grid = analysis.ts.grid().expect("ode transition systems carry a grid");
    let Ok(k0) = CellUnionDistance::new(grid, &analysis.global) else {
        return Check::new(NAME, true, "empty global attractor");
    };
    let pool: Vec<usize> = analysis
        .ts
        .active()
        .difference(
            &analysis
                .ts
                .reach(&analysis.ts.escaping_cells(), mfw::transition::Direction::Backward),
        )
        .to_vec();
    if pool.is_empty() {
        return Check::new(NAME, true, "no non-escaping cells");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let starts: Vec<Vec<f64>> = (0..ODE_TRAJECTORIES)
        .map(|_| {
            let c = pool[rng.gen_range(0..pool.len())];
            grid.cell_box(c).iter().map(|iv| rng.gen_range(iv.lo..=iv.hi)).collect()
        })
        .collect();
    let ly = OdeLyapunov::new(ode, &k0, OdeLyapunovOptions::default());
    let every = ((ODE_SAMPLE_DT / ode.dt()).round() as usize).max(1);
    match ly.verify_decrease(&starts, ODE_T_OBS, every, DEFAULT_DECREASE_TOL, DEFAULT_ZETA_TOL) {
        Ok(r) => Check::new(
            NAME,
            r.passed(),
            format!("{} steps checked, {} violations", r.checked, r.violations.len()),
        ),
        Err(e) => Check::new(NAME, false, e.to_string()),
    }
}

use std::io::Write;

use anyhow::Context;
use shapes::benchmarks::{evaluate_benchmark, normalize_snr, uniform_grid};
use shapes::simharness::{format_float, write_xy_csv};
use shapes::BenchmarkId;

use crate::args::BenchmarksArgs;
use crate::output::Outputs;

pub fn run(args: BenchmarksArgs) -> anyhow::Result<()> {
    let Some(name) = args.dump else {
        let mut out = std::io::stdout().lock();
        for id in BenchmarkId::ALL {
            let (lo, hi) = id.natural_domain();
            writeln!(out, "{:<4} [{lo}, {hi}]  {}", id.name(), id.description())?;
        }
        return Ok(());
    };
    let id: BenchmarkId = name.parse()?;
    if args.points < 2 {
        anyhow::bail!("--points must be at least 2");
    }
    let x = uniform_grid::<f64>(args.points);
    let mut f = evaluate_benchmark(id, &x);
    if let Some(snr) = args.snr {
        f = normalize_snr(&f, snr)?;
    }
    match args.out {
        Some(path) => {
            let mut outputs = Outputs::new();
            let path = outputs.track(path);
            write_xy_csv(&path, "x", "f", &x, &f).with_context(|| format!("writing {id}"))?;
            outputs.commit();
        }
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "x,f")?;
            for (a, b) in x.iter().zip(&f) {
                writeln!(out, "{},{}", format_float(*a), format_float(*b))?;
            }
        }
    }
    Ok(())
}

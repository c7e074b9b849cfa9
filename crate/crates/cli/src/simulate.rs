use std::io::Write;

use anyhow::Context;
use shapes::simharness::{
    write_json, write_records_csv, CampaignFile, CampaignReport, DEFAULT_NUM_REALIZATIONS, FULL_NUM_REALIZATIONS,
};
use shapes::{run_campaign, BenchmarkId, CampaignSpec64};

use crate::args::{check_snr, SimulateArgs};
use crate::output::Outputs;

fn build_spec(args: &SimulateArgs) -> anyhow::Result<CampaignSpec64> {
    let n = if args.full_scale {
        Some(FULL_NUM_REALIZATIONS)
    } else {
        args.num_realizations
    };
    let mut spec = if let Some(path) = &args.spec {
        let mut file = CampaignFile::load(path)?;
        if n.is_some() {
            file.num_realizations = n;
        }
        let mut spec = file.into_spec()?;
        // run-level overrides still apply to a spec file
        let s = &args.settings;
        if let Some(models) = &s.models {
            let mut models = models.clone();
            models.sort_unstable();
            models.dedup();
            spec.config.model_set = models;
        }
        if let Some(runs) = s.runs {
            spec.config.num_runs = runs;
        }
        if s.seed != 0 {
            spec.config.seed_base = s.seed;
        }
        if s.no_bias_correction {
            spec.config.bias_correction = false;
        }
        spec
    } else {
        let name = args.benchmark.as_deref().context("--benchmark is required")?;
        let benchmark: BenchmarkId = name.parse()?;
        let (config, label) = args.settings.config()?;
        let snr = check_snr(label.as_ref(), args.snr)?;
        let mut spec = CampaignSpec64::new(benchmark, snr, n.unwrap_or(DEFAULT_NUM_REALIZATIONS), config);
        spec.label = args.settings.label.clone();
        spec
    };
    if let Some(seed) = args.bootstrap_seed {
        spec.bootstrap_seed = seed;
    }
    spec.validate()?;
    Ok(spec)
}

pub fn run(args: SimulateArgs) -> anyhow::Result<()> {
    let spec = build_spec(&args)?;
    let summary = run_campaign(&spec).context("campaign failed")?;
    let records = summary.records.clone();
    let report = CampaignReport::new(spec, summary);
    match &args.out {
        Some(dir) => {
            let mut outputs = Outputs::in_dir(dir)?;
            let summary_path = outputs.track(dir.join("summary.json"));
            write_json(&summary_path, &report)?;
            let records_path = outputs.track(dir.join("records.csv"));
            write_records_csv(&records_path, &records)?;
            outputs.commit();
        }
        None => {
            let mut out = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

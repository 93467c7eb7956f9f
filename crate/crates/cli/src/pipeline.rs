//! Subcommand bodies: fit, simulate, replicate, sweep and lnam.

use std::path::{Path, PathBuf};

use netinfluence::baseline::{fit_lnam_counts, AutocorrFit};
use netinfluence::diagnostics::five_number;
use netinfluence::estimate::{fit_step1, fit_step2, Step1Fit, Step2Fit, TwoStepConfig};
use netinfluence::simgen::{generate_pair, GeneratedPair, Scenario, ScenarioSpec, Truth};
use netinfluence::{ItemResponseData, NetworkData};

use crate::config::{RunConfig, Source};
use crate::error::{CliError, CliResult};
use crate::io::{self, latent_table, num, Table};
use crate::plot::{latent_map, MapLayer};
use crate::report::{build_summary, Summary};

/// A dataset ready for fitting.
pub struct Dataset {
    pub net: NetworkData,
    pub resp: ItemResponseData,
    pub item_ids: Vec<String>,
    pub truth: Option<Truth>,
    pub self_loops: usize,
}

impl Dataset {
    pub fn from_generated(g: GeneratedPair) -> Self {
        let item_ids = io::default_item_ids(g.resp.p());
        Self { net: g.net, resp: g.resp, item_ids, truth: Some(g.truth), self_loops: 0 }
    }
}

pub fn load_dataset(source: &Source) -> CliResult<Dataset> {
    match source {
        Source::Files { network, responses } => {
            let loaded = io::load_network(network)?;
            let r = io::load_responses(responses)?;
            r.resp.check_paired(&loaded.net)?;
            Ok(Dataset { net: loaded.net, resp: r.resp, item_ids: r.item_ids, truth: None, self_loops: loaded.self_loops })
        }
        Source::Scenario(spec) => Ok(Dataset::from_generated(generate_pair(spec)?)),
    }
}

pub struct FitOutput {
    pub step1: Step1Fit,
    pub step2: Step2Fit,
    pub baseline: Option<Result<AutocorrFit, netinfluence::Error>>,
    pub summary: Summary,
}

/// Fits both steps and builds the summary. Writes nothing.
pub fn fit_dataset(data: &Dataset, cfg: &TwoStepConfig) -> CliResult<FitOutput> {
    data.resp.check_paired(&data.net)?;
    let step1 = fit_step1(&data.net, cfg)?;
    let step2 = fit_step2(&data.resp, &step1.zhat, cfg)?;
    let baseline = cfg.baseline.then(|| fit_lnam_counts(&data.net, &data.resp, cfg.row_normalize));
    let mut summary = build_summary(cfg, &step1, &step2, baseline.as_ref(), data.truth.as_ref());
    if data.self_loops > 0 {
        summary.put("input.self_loops_dropped", data.self_loops);
    }
    Ok(FitOutput { step1, step2, baseline, summary })
}

/// Per-chain draw tables, point estimates and parameter summaries.
pub fn write_draws(out: &FitOutput, data: &Dataset, dir: &Path) -> CliResult<()> {
    for (c, d) in out.step1.chains.iter().enumerate() {
        let mut t = Table::new(["draw", "alpha", "gamma", "log_posterior"]);
        for i in 0..d.len() {
            t.push(vec![i.to_string(), num(d.alpha[i]), num(d.gamma[i]), num(d.log_posterior[i])]);
        }
        t.write(&dir.join(format!("step1_draws_chain{c}.csv")))?;
        latent_table(&d.z).write(&dir.join(format!("step1_z_chain{c}.csv")))?;
    }
    for (c, d) in out.step2.chains.iter().enumerate() {
        let mut t = Table::new(["draw", "delta", "sigma2", "log_posterior"]);
        for i in 0..d.len() {
            t.push(vec![i.to_string(), num(d.delta[i]), num(d.sigma2[i]), num(d.log_posterior[i])]);
        }
        t.write(&dir.join(format!("step2_draws_chain{c}.csv")))?;
        let mut e = Table::new(["draw", "param", "index", "value"]);
        for i in 0..d.len() {
            for (j, v) in d.beta[i].iter().enumerate() {
                e.push(vec![i.to_string(), "beta".into(), j.to_string(), num(*v)]);
            }
            for (k, v) in d.theta[i].iter().enumerate() {
                e.push(vec![i.to_string(), "theta".into(), k.to_string(), num(*v)]);
            }
        }
        e.write(&dir.join(format!("step2_effects_chain{c}.csv")))?;
        latent_table(&d.w).write(&dir.join(format!("step2_w_chain{c}.csv")))?;
    }

    let mut z = Table::new(["respondent", "z0", "z1", "theta"]);
    for (k, p) in out.step1.zhat.points().iter().enumerate() {
        z.push(vec![k.to_string(), num(p[0]), num(p[1]), num(out.step2.point.theta[k])]);
    }
    z.write(&dir.join("respondents_hat.csv"))?;
    let mut w = Table::new(["item", "id", "w0", "w1", "beta"]);
    for (i, p) in out.step2.point.w.points().iter().enumerate() {
        w.push(vec![i.to_string(), data.item_ids[i].clone(), num(p[0]), num(p[1]), num(out.step2.point.beta[i])]);
    }
    w.write(&dir.join("items_hat.csv"))?;

    let mut params = Table::new(["param", "index", "mean", "sd", "hpd_low", "hpd_high", "rhat"]);
    for (name, list) in [("beta", &out.step2.beta), ("theta", &out.step2.theta)] {
        for (j, s) in list.iter().enumerate() {
            params.push(vec![
                name.into(),
                j.to_string(),
                num(s.mean),
                num(s.sd),
                num(s.hpd_low),
                num(s.hpd_high),
                s.rhat.map_or("NA".into(), num),
            ]);
        }
    }
    params.write(&dir.join("parameters.csv"))
}

pub fn write_plots(out: &FitOutput, data: &Dataset, dir: &Path) -> CliResult<()> {
    let labels = data.truth.as_ref().map(|t| t.latents.social_clusters.as_slice());
    let z = out.step1.zhat.points();
    let svg = latent_map("Respondent positions from the network", &[MapLayer { points: z, labels, names: None }]);
    io::write_text(&dir.join("step1_map.svg"), &svg)?;
    let w = out.step2.point.w.points();
    let svg = latent_map(
        "Respondents and items",
        &[
            MapLayer { points: z, labels, names: None },
            MapLayer { points: w, labels: None, names: Some(&data.item_ids) },
        ],
    );
    io::write_text(&dir.join("step2_map.svg"), &svg)
}

/// Summary first, then plots. A failed plot leaves the summary intact.
fn write_fit(out: &FitOutput, data: &Dataset, dir: &Path, emit_plots: bool, draws: bool) -> CliResult<()> {
    if draws {
        write_draws(out, data, dir)?;
    }
    out.summary.write(&dir.join("summary.txt"))?;
    if emit_plots {
        write_plots(out, data, dir)?;
    }
    Ok(())
}

pub fn run_fit(cfg: &RunConfig) -> CliResult<Summary> {
    let data = load_dataset(&cfg.source)?;
    let out = fit_dataset(&data, &cfg.fit)?;
    write_fit(&out, &data, &cfg.out, cfg.emit_plots, true)?;
    Ok(out.summary)
}

pub fn run_simulate(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let Source::Scenario(spec) = cfg.source else {
        return Err(CliError::Config("simulate needs a scenario".into()));
    };
    let mut dirs = Vec::new();
    for r in 0..cfg.replicates {
        let spec = ScenarioSpec { seed: spec.seed + r as u64, ..spec };
        let dir = if cfg.replicates == 1 { cfg.out.clone() } else { cfg.out.join(format!("rep{r:03}")) };
        io::write_generated(&generate_pair(&spec)?, &dir)?;
        dirs.push(dir);
    }
    Ok(dirs)
}

const REPLICATE_COLUMNS: [&str; 12] = [
    "replicate",
    "seed",
    "lambda",
    "delta.mean",
    "delta.hpd_low",
    "delta.hpd_high",
    "rhat.delta",
    "gamma.mean",
    "gamma.hpd_low",
    "gamma.hpd_high",
    "fit.mean",
    "lnam.rho",
];

fn replicate_row(r: usize, seed: u64, lambda: Option<f64>, s: &Summary) -> Vec<String> {
    let mut row = vec![r.to_string(), seed.to_string(), lambda.map_or("NA".into(), num)];
    for key in &REPLICATE_COLUMNS[3..] {
        row.push(s.get(key).unwrap_or("NA").to_string());
    }
    row
}

/// Generates and fits `replicates` datasets with consecutive seeds.
pub fn run_replicate(cfg: &RunConfig) -> CliResult<Vec<Summary>> {
    let Source::Scenario(spec) = cfg.source else {
        return Err(CliError::Config("replicate needs a scenario".into()));
    };
    let mut table = Table::new(REPLICATE_COLUMNS);
    let mut all = Vec::new();
    for r in 0..cfg.replicates {
        let seed = spec.seed + r as u64;
        let data = Dataset::from_generated(generate_pair(&ScenarioSpec { seed, ..spec })?);
        let fit = TwoStepConfig { step1: cfg.fit.step1.clone().with_seed(seed), step2: cfg.fit.step2.clone().with_seed(seed), ..cfg.fit.clone() };
        let out = fit_dataset(&data, &fit)?;
        write_fit(&out, &data, &cfg.out.join(format!("rep{r:03}")), cfg.emit_plots, false)?;
        table.push(replicate_row(r, seed, spec.lambda, &out.summary));
        all.push(out.summary);
    }
    table.write(&cfg.out.join("replicates.csv"))?;
    Ok(all)
}

/// Scenario-3 grid. The network does not depend on lambda, so Step 1 runs
/// once per replicate and is shared by every lambda.
pub fn run_sweep(cfg: &RunConfig) -> CliResult<Vec<(f64, Vec<f64>)>> {
    let base_seed = cfg.seed;
    let mut table = Table::new(REPLICATE_COLUMNS);
    let mut by_lambda: Vec<(f64, Vec<f64>, usize)> = cfg.lambdas.iter().map(|&l| (l, Vec::new(), 0)).collect();
    for r in 0..cfg.replicates {
        let seed = base_seed + r as u64;
        let fit = TwoStepConfig { step1: cfg.fit.step1.clone().with_seed(seed), step2: cfg.fit.step2.clone().with_seed(seed), ..cfg.fit.clone() };
        let mut step1: Option<Step1Fit> = None;
        for (l, deltas, excl) in by_lambda.iter_mut() {
            let spec = ScenarioSpec::new(Scenario::S3, Some(*l), seed)?;
            let data = Dataset::from_generated(generate_pair(&spec)?);
            let s1 = match &step1 {
                Some(s) => s,
                None => step1.insert(fit_step1(&data.net, &fit)?),
            };
            let s2 = fit_step2(&data.resp, &s1.zhat, &fit)?;
            let baseline = fit.baseline.then(|| fit_lnam_counts(&data.net, &data.resp, fit.row_normalize));
            let summary = build_summary(&fit, s1, &s2, baseline.as_ref(), data.truth.as_ref());
            summary.write(&cfg.out.join(format!("lambda{l}")).join(format!("rep{r:03}")).join("summary.txt"))?;
            table.push(replicate_row(r, seed, Some(*l), &summary));
            deltas.push(s2.delta.mean);
            *excl += (s2.delta.hpd_low > 0.0 || s2.delta.hpd_high < 0.0) as usize;
        }
    }
    table.write(&cfg.out.join("sweep.csv"))?;

    let mut agg = Table::new([
        "lambda",
        "replicates",
        "delta.mean",
        "delta.min",
        "delta.q1",
        "delta.median",
        "delta.q3",
        "delta.max",
        "hpd_excludes_zero",
    ]);
    for (l, deltas, excl) in &by_lambda {
        let f = five_number(deltas)?;
        agg.push(vec![
            num(*l),
            deltas.len().to_string(),
            num(f.mean),
            num(f.min),
            num(f.q1),
            num(f.median),
            num(f.q3),
            num(f.max),
            excl.to_string(),
        ]);
    }
    agg.write(&cfg.out.join("sweep_summary.csv"))?;
    Ok(by_lambda.into_iter().map(|(l, d, _)| (l, d)).collect())
}

/// Baseline only.
pub fn run_lnam(cfg: &RunConfig) -> CliResult<Summary> {
    let data = load_dataset(&cfg.source)?;
    let fit = fit_lnam_counts(&data.net, &data.resp, cfg.fit.row_normalize)?;
    let mut s = Summary::new();
    s.put("n", data.net.n());
    s.put("row_normalize", cfg.fit.row_normalize);
    s.put_num("lnam.rho", fit.rho);
    s.put_num("lnam.sigma2", fit.sigma2);
    s.put("lnam.se", fit.se.map_or("NA".into(), num));
    s.put("lnam.ci_low", fit.ci.map_or("NA".into(), |c| num(c.0)));
    s.put("lnam.ci_high", fit.ci.map_or("NA".into(), |c| num(c.1)));
    s.put_num("lnam.loglik", fit.loglik);
    s.put("lnam.boundary_hit", fit.boundary_hit);
    s.put_num("lnam.interval_low", fit.interval.0);
    s.put_num("lnam.interval_high", fit.interval.1);
    s.write(&cfg.out.join("lnam.txt"))?;
    Ok(s)
}

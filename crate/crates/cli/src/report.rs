//! `key=value` summary reports.

use std::collections::BTreeMap;
use std::path::Path;

use netinfluence::baseline::AutocorrFit;
use netinfluence::diagnostics::{five_number, ParameterSummary};
use netinfluence::estimate::{Step1Fit, Step2Fit, TwoStepConfig};
use netinfluence::mcmc::AcceptanceStats;
use netinfluence::simgen::Truth;

use crate::error::{CliError, CliResult};
use crate::io::{num, read_text, write_text};

/// Ordered report entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn put_num(&mut self, key: impl Into<String>, value: f64) {
        self.entries.push((key.into(), num(value)));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_text(path, &self.to_text())
    }

    fn parameter(&mut self, name: &str, s: &ParameterSummary<f64>) {
        self.put_num(format!("{name}.mean"), s.mean);
        self.put_num(format!("{name}.sd"), s.sd);
        self.put_num(format!("{name}.hpd_low"), s.hpd_low);
        self.put_num(format!("{name}.hpd_high"), s.hpd_high);
        match s.rhat {
            Some(r) => self.put_num(format!("rhat.{name}"), r),
            None => self.put(format!("rhat.{name}"), "NA"),
        }
    }
}

pub fn read_summary(path: &Path) -> CliResult<BTreeMap<String, String>> {
    parse_summary(&read_text(path)?, path)
}

pub fn parse_summary(text: &str, path: &Path) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::parse(path, i as u64 + 1, "expected key=value"))?;
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

fn pooled(stats: impl Iterator<Item = AcceptanceStats>) -> f64 {
    let mut total = AcceptanceStats::default();
    for s in stats {
        total.accepted += s.accepted;
        total.proposed += s.proposed;
    }
    total.rate()
}

/// Run settings, posterior summaries, acceptance rates and, when present,
/// the baseline fit and the generating-truth fit statistic.
pub fn build_summary(
    cfg: &TwoStepConfig,
    step1: &Step1Fit,
    step2: &Step2Fit,
    baseline: Option<&Result<AutocorrFit, netinfluence::Error>>,
    truth: Option<&Truth>,
) -> Summary {
    let mut s = Summary::new();
    s.put("n", step2.point.n());
    s.put("p", step2.point.p());
    s.put("chains", cfg.chains);
    s.put("seed", cfg.step1.seed);
    for (name, c) in [("step1", (&cfg.step1.total_iters, &cfg.step1.burn_in, &cfg.step1.thin)), ("step2", (&cfg.step2.total_iters, &cfg.step2.burn_in, &cfg.step2.thin))] {
        s.put(format!("{name}.iters"), c.0);
        s.put(format!("{name}.burn"), c.1);
        s.put(format!("{name}.thin"), c.2);
    }
    s.put_num("hpd.mass", cfg.hpd_mass);

    s.parameter("alpha", &step1.alpha);
    s.parameter("gamma", &step1.gamma);
    s.parameter("delta", &step2.delta);
    s.parameter("sigma2", &step2.sigma2);

    let c1 = &step1.chains;
    s.put_num("accept.step1.z", pooled(c1.iter().map(|d| d.acceptance.z)));
    s.put_num("accept.step1.alpha", pooled(c1.iter().map(|d| d.acceptance.alpha)));
    s.put_num("accept.step1.gamma", pooled(c1.iter().map(|d| d.acceptance.gamma)));
    let c2 = &step2.chains;
    s.put_num("accept.step2.w", pooled(c2.iter().map(|d| d.acceptance.w)));
    s.put_num("accept.step2.beta", pooled(c2.iter().map(|d| d.acceptance.beta)));
    s.put_num("accept.step2.theta", pooled(c2.iter().map(|d| d.acceptance.theta)));
    s.put_num("accept.step2.delta", pooled(c2.iter().map(|d| d.acceptance.delta)));

    match baseline {
        Some(Ok(b)) => {
            s.put_num("lnam.rho", b.rho);
            s.put_num("lnam.sigma2", b.sigma2);
            match (b.se, b.ci) {
                (Some(se), Some((lo, hi))) => {
                    s.put_num("lnam.se", se);
                    s.put_num("lnam.ci_low", lo);
                    s.put_num("lnam.ci_high", hi);
                }
                _ => {
                    s.put("lnam.se", "NA");
                    s.put("lnam.ci_low", "NA");
                    s.put("lnam.ci_high", "NA");
                }
            }
            s.put_num("lnam.loglik", b.loglik);
            s.put("lnam.boundary_hit", b.boundary_hit);
        }
        Some(Err(e)) => s.put("lnam.error", e.to_string().replace('\n', " ")),
        None => {}
    }

    if let Some(t) = truth {
        let diff: Vec<f64> = t
            .response_probabilities()
            .iter()
            .zip(&step2.probabilities.values)
            .map(|(p, q)| p - q)
            .collect();
        if let Ok(f) = five_number(&diff) {
            s.put_num("fit.mean", f.mean);
            s.put_num("fit.min", f.min);
            s.put_num("fit.q1", f.q1);
            s.put_num("fit.median", f.median);
            s.put_num("fit.q3", f.q3);
            s.put_num("fit.max", f.max);
        }
        s.put_num("truth.delta", t.delta);
        s.put_num("truth.gamma", t.gamma);
    }
    s
}

//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion.
//!
//! Chain lengths default to 6,000/1,000/thin 5; set `ACCEPTANCE_FULL=1` for
//! 30,000/5,000/thin 5. Failures are reported but only change the exit code
//! when `ACCEPTANCE_STRICT=1`.

use std::time::Instant;

use netinfluence::alignment::procrustes_align;
use netinfluence::baseline::fit_lnam_counts;
use netinfluence::diagnostics::{five_number, hpd_interval, mean, ParameterSummary};
use netinfluence::estimate::{fit_step1, fit_step2, Step1Fit, Step2Fit, TwoStepConfig};
use netinfluence::mcmc::{gibbs_sigma2, run_adapted_lsirm_chain, run_lsm_chain, LsirmConfig, LsmConfig};
use netinfluence::model::{
    adapted_lsirm_log_likelihood, lsm_log_likelihood, AdaptedLsirmParams, Hyperparams, LatentConfig, LsmParams, Point,
};
use netinfluence::simgen::{generate_pair, GeneratedPair, Scenario, ScenarioSpec};
use netinfluence::{ItemResponseData, NetworkData};
use netinfluence_cli::pipeline::{fit_dataset, write_draws, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

const BASE_SEED: u64 = 20_000;
const REPLICATES: usize = 10;
const SWEEP_REPLICATES: usize = 5;
const SWEEP_LAMBDAS: [f64; 4] = [0.01, 0.2, 0.6, 1.0];

const DELTA_MEAN_RANGE: (f64, f64) = (0.90, 1.20);
const GAMMA_RANGE: (f64, f64) = (0.8, 1.2);
const DELTA_AT_06_RANGE: (f64, f64) = (0.60, 0.82);
const RHO_RANGE: (f64, f64) = (0.005, 0.03);
const RHO_SPREAD: f64 = 0.01;
const FIT_MEAN_RANGE: (f64, f64) = (-0.05, 0.03);
const KERNEL_TOL: f64 = 1e-12;
const RIGID_TOL: f64 = 1e-10;
const KS_LEVEL: f64 = 0.01;
const GIBBS_REL_TOL: f64 = 0.01;
const RHAT_MAX: f64 = 1.1;

struct Report {
    lines: Vec<(usize, String)>,
    failed: Vec<usize>,
}

impl Report {
    fn record(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        let line = format!("{} [{id}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((id, line));
        if !ok {
            self.failed.push(id);
        }
    }
}

fn in_range(v: f64, r: (f64, f64)) -> bool {
    v >= r.0 && v <= r.1
}

fn excludes_zero(s: &ParameterSummary<f64>) -> bool {
    s.hpd_low > 0.0 || s.hpd_high < 0.0
}

fn lengths() -> (usize, usize, usize) {
    if std::env::var("ACCEPTANCE_FULL").is_ok_and(|v| v == "1") {
        (30_000, 5_000, 5)
    } else {
        (6_000, 1_000, 5)
    }
}

fn fit_config(seed: u64, chains: usize) -> TwoStepConfig {
    let (total, burn, thin) = lengths();
    let mut cfg = TwoStepConfig::simulation_default(seed, chains).with_lengths(total, burn, thin);
    cfg.baseline = false;
    cfg
}

fn data(scenario: Scenario, lambda: Option<f64>, seed: u64) -> GeneratedPair {
    generate_pair(&ScenarioSpec::new(scenario, lambda, seed).unwrap()).unwrap()
}

struct Replicate {
    data: GeneratedPair,
    step1: Step1Fit,
    step2: Step2Fit,
}

fn fit_replicates() -> Vec<Replicate> {
    (0..REPLICATES)
        .map(|r| {
            let t = Instant::now();
            let seed = BASE_SEED + r as u64;
            let data = data(Scenario::S1_1, None, seed);
            let cfg = fit_config(seed, 1);
            let step1 = fit_step1(&data.net, &cfg).unwrap();
            let step2 = fit_step2(&data.resp, &step1.zhat, &cfg).unwrap();
            println!(
                "  replicate {r}: delta {:.3} [{:.3}, {:.3}], gamma {:.3} ({:.0}s)",
                step2.delta.mean,
                step2.delta.hpd_low,
                step2.delta.hpd_high,
                step1.gamma.mean,
                t.elapsed().as_secs_f64()
            );
            Replicate { data, step1, step2 }
        })
        .collect()
}

fn scenario_recovery(reps: &[Replicate], report: &mut Report) {
    let deltas: Vec<f64> = reps.iter().map(|r| r.step2.delta.mean).collect();
    let f = five_number(&deltas).unwrap();
    let covered = reps.iter().filter(|r| excludes_zero(&r.step2.delta)).count();
    report.record(
        1,
        "scenario 1.1 delta recovery",
        in_range(f.mean, DELTA_MEAN_RANGE) && covered == reps.len(),
        format!(
            "mean {:.3} (min {:.3}, max {:.3}), HPD excludes 0 in {covered}/{}",
            f.mean,
            f.min,
            f.max,
            reps.len()
        ),
    );

    let gammas: Vec<f64> = reps.iter().map(|r| r.step1.gamma.mean).collect();
    let g = five_number(&gammas).unwrap();
    let inside = gammas.iter().filter(|&&v| in_range(v, GAMMA_RANGE)).count();
    report.record(
        2,
        "gamma recovery",
        inside == gammas.len(),
        format!("means in [{:.3}, {:.3}], {inside}/{} inside {GAMMA_RANGE:?}", g.min, g.max, gammas.len()),
    );
}

fn lambda_sweep(reps: &[Replicate], report: &mut Report) {
    let mut means = Vec::new();
    let mut covered = 0;
    let mut total = 0;
    let mut lines = Vec::new();
    for &lambda in &SWEEP_LAMBDAS {
        let mut deltas = Vec::new();
        for (r, rep) in reps.iter().take(SWEEP_REPLICATES).enumerate() {
            let seed = BASE_SEED + r as u64;
            // the network and its Step 1 fit do not depend on lambda
            let summary = if lambda == 1.0 {
                rep.step2.delta
            } else {
                let sweep = data(Scenario::S3, Some(lambda), seed);
                assert_eq!(sweep.net, rep.data.net);
                fit_step2(&sweep.resp, &rep.step1.zhat, &fit_config(seed, 1)).unwrap().delta
            };
            covered += excludes_zero(&summary) as usize;
            total += 1;
            deltas.push(summary.mean);
        }
        let f = five_number(&deltas).unwrap();
        println!("  lambda {lambda}: mean {:.3} range [{:.3}, {:.3}]", f.mean, f.min, f.max);
        lines.push(format!("{lambda}:{:.3}", f.mean));
        means.push(f.mean);
    }
    let increasing = means.windows(2).all(|w| w[1] > w[0]);
    let mid = means[2];
    report.record(
        3,
        "scenario 3 monotone in lambda",
        increasing && in_range(mid, DELTA_AT_06_RANGE) && covered == total,
        format!(
            "means {} (increasing {increasing}), lambda 0.6 mean {mid:.3}, HPD excludes 0 in {covered}/{total}",
            lines.join(" ")
        ),
    );
}

fn baseline_flatness(report: &mut Report) {
    let mut rhos = Vec::new();
    let mut lines = Vec::new();
    for scenario in [Scenario::S1_1, Scenario::S1_2, Scenario::S1_3, Scenario::S2] {
        let fits: Vec<f64> = (0..REPLICATES)
            .map(|r| {
                let d = data(scenario, None, BASE_SEED + r as u64);
                fit_lnam_counts(&d.net, &d.resp, false).unwrap().rho
            })
            .collect();
        let m = mean(&fits);
        lines.push(format!("{scenario}:{m:.4}"));
        rhos.push(m);
    }
    let lo = rhos.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rhos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    report.record(
        4,
        "lnam baseline flat",
        rhos.iter().all(|&r| in_range(r, RHO_RANGE)) && hi - lo < RHO_SPREAD,
        format!("replicate-mean rho {} (spread {:.4})", lines.join(" "), hi - lo),
    );
}

fn model_fit(reps: &[Replicate], report: &mut Report) {
    let mut ok = true;
    let mut means = Vec::new();
    let mut iqr = (f64::INFINITY, f64::NEG_INFINITY);
    for rep in reps {
        let diff: Vec<f64> = rep
            .data
            .truth
            .response_probabilities()
            .iter()
            .zip(&rep.step2.probabilities.values)
            .map(|(p, q)| p - q)
            .collect();
        let f = five_number(&diff).unwrap();
        ok &= in_range(f.mean, FIT_MEAN_RANGE) && f.q1 <= 0.0 && f.q3 >= 0.0;
        means.push(f.mean);
        iqr = (iqr.0.min(f.q1), iqr.1.max(f.q3));
    }
    let f = five_number(&means).unwrap();
    report.record(
        5,
        "model fit at lambda 1",
        ok,
        format!(
            "cell-wise mean of p - phat in [{:.4}, {:.4}] (avg {:.4}), quartiles within [{:.4}, {:.4}]",
            f.min, f.max, f.mean, iqr.0, iqr.1
        ),
    );
}

fn naive_log_bernoulli(y: bool, eta: f64) -> f64 {
    let p = 1.0 / (1.0 + (-eta).exp());
    if y {
        p.ln()
    } else {
        (1.0 - p).ln()
    }
}

fn euclid(a: Point<f64>, b: Point<f64>) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn points(m: usize, rng: &mut ChaCha8Rng) -> Vec<Point<f64>> {
    (0..m).map(|_| [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]).collect()
}

fn oracle_equivalence(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=4usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|k| ((k + 1)..n).map(move |l| (k, l))).collect();
        let z = points(n, &mut rng);
        let (alpha, gamma) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.1..3.0));
        let params = LsmParams::new(alpha, gamma, LatentConfig::new(z.clone()).unwrap()).unwrap();
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<_> = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e).collect();
            let net = NetworkData::from_edges(n, &edges).unwrap();
            let brute: f64 = pairs
                .iter()
                .map(|&(k, l)| naive_log_bernoulli(net.has_edge(k, l), alpha - gamma * euclid(z[k], z[l])))
                .sum();
            worst = worst.max((lsm_log_likelihood(&net, &params).unwrap() - brute).abs());
            cases += 1;
        }
        for p in 1..=2usize {
            let z = points(n, &mut rng);
            let w = points(p, &mut rng);
            let beta: Vec<f64> = (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let zc = LatentConfig::new(z.clone()).unwrap();
            for delta in [rng.gen_range(-2.0..2.0), 0.0] {
                let prm =
                    AdaptedLsirmParams::new(beta.clone(), theta.clone(), 1.0, delta, LatentConfig::new(w.clone()).unwrap())
                        .unwrap();
                for mask in 0u32..(1 << (n * p)) {
                    let resp = ItemResponseData::new(n, p, (0..n * p).map(|b| (mask >> b & 1) as u8).collect()).unwrap();
                    let mut brute = 0.0;
                    for k in 0..n {
                        for i in 0..p {
                            // at delta = 0 this is the Rasch likelihood
                            let eta = if delta == 0.0 {
                                beta[i] + theta[k]
                            } else {
                                beta[i] + theta[k] - delta * euclid(z[k], w[i])
                            };
                            brute += naive_log_bernoulli(resp.get(k, i), eta);
                        }
                    }
                    worst = worst.max((adapted_lsirm_log_likelihood(&resp, &zc, &prm).unwrap() - brute).abs());
                    cases += 1;
                }
            }
        }
    }
    report.record(
        6,
        "kernels match brute force",
        worst < KERNEL_TOL,
        format!("{cases} exhaustive instances, max abs error {worst:.2e}"),
    );
}

fn rigid(p: &[Point<f64>], angle: f64, reflect: bool, shift: Point<f64>) -> Vec<Point<f64>> {
    let (s, c) = angle.sin_cos();
    p.iter()
        .map(|q| {
            let x = if reflect { -q[0] } else { q[0] };
            [c * x - s * q[1] + shift[0], s * x + c * q[1] + shift[1]]
        })
        .collect()
}

/// Width of the shortest window holding `ceil(mass * N)` draws, by checking
/// every pair of order statistics.
fn brute_hpd_width(samples: &[f64], mass: f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let need = (mass * s.len() as f64).ceil() as usize;
    let mut best = f64::INFINITY;
    for i in 0..s.len() {
        for j in i..s.len() {
            if j - i + 1 >= need {
                best = best.min(s[j] - s[i]);
            }
        }
    }
    best
}

fn invariance(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut lik_err: f64 = 0.0;
    let mut dist_err: f64 = 0.0;
    for _ in 0..200 {
        let (n, p) = (rng.gen_range(2..12), rng.gen_range(1..6));
        let z = points(n, &mut rng);
        let w = points(p, &mut rng);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let reflect = rng.gen_bool(0.5);
        let shift = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let edges: Vec<_> =
            (0..n).flat_map(|k| ((k + 1)..n).map(move |l| (k, l))).filter(|_| rng.gen_bool(0.4)).collect();
        let net = NetworkData::from_edges(n, &edges).unwrap();
        let lsm = |zz: Vec<Point<f64>>| {
            lsm_log_likelihood(&net, &LsmParams::new(0.4, 1.3, LatentConfig::new(zz).unwrap()).unwrap()).unwrap()
        };
        lik_err = lik_err.max((lsm(z.clone()) - lsm(rigid(&z, angle, reflect, shift))).abs());

        let resp = ItemResponseData::new(n, p, (0..n * p).map(|_| rng.gen_bool(0.5) as u8).collect()).unwrap();
        let beta: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let item = |zz: Vec<Point<f64>>, ww: Vec<Point<f64>>| {
            let prm = AdaptedLsirmParams::new(beta.clone(), theta.clone(), 1.0, 0.8, LatentConfig::new(ww).unwrap())
                .unwrap();
            adapted_lsirm_log_likelihood(&resp, &LatentConfig::new(zz).unwrap(), &prm).unwrap()
        };
        let moved = item(rigid(&z, angle, reflect, shift), rigid(&w, angle, reflect, shift));
        lik_err = lik_err.max((item(z.clone(), w.clone()) - moved).abs());

        // align a perturbed copy onto an arbitrary reference
        let target = LatentConfig::new(z.clone()).unwrap();
        let reference = LatentConfig::new(points(n, &mut rng)).unwrap();
        if let Ok((aligned, _)) = procrustes_align(&target, &reference) {
            for k in 0..n {
                for l in 0..n {
                    let d = (euclid(aligned[k], aligned[l]) - euclid(z[k], z[l])).abs();
                    dist_err = dist_err.max(d);
                }
            }
        }
    }

    let mut hpd_ok = 0;
    let mut hpd_cases = 0;
    for &n in &[20usize, 21, 57, 100, 333, 1000] {
        for _ in 0..3 {
            let draws: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0f64).powi(3) * 4.0 - 1.0).collect();
            let (lo, hi) = hpd_interval(&draws, 0.95).unwrap();
            let held = draws.iter().filter(|&&v| v >= lo && v <= hi).count();
            let need = (0.95 * n as f64).ceil() as usize;
            hpd_ok += ((hi - lo - brute_hpd_width(&draws, 0.95)).abs() < 1e-15 && held >= need) as usize;
            hpd_cases += 1;
        }
    }
    report.record(
        7,
        "invariance suite",
        lik_err < RIGID_TOL && dist_err < RIGID_TOL && hpd_ok == hpd_cases,
        format!(
            "rigid-motion likelihood error {lik_err:.2e}, Procrustes distance error {dist_err:.2e}, HPD brute force {hpd_ok}/{hpd_cases}"
        ),
    );
}

/// Asymptotic Kolmogorov p-value.
fn ks_pvalue(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..=100)
        .map(|k| {
            let term = 2.0 * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
            if k % 2 == 1 {
                term
            } else {
                -term
            }
        })
        .sum();
    p.clamp(0.0, 1.0)
}

fn sampler_correctness(report: &mut Report) {
    let hp = Hyperparams::<f64>::default();
    let mut lsm_cfg = LsmConfig::new(5_000 + 5_000 * 40, 5_000, 40, 31);
    lsm_cfg.hooks.prior_only = true;
    let net = NetworkData::from_edges(3, &[(0, 1)]).unwrap();
    let d = run_lsm_chain::<f64>(&net, &hp, &lsm_cfg).unwrap();
    let prior_alpha = Normal::new(0.0, 2.5).unwrap();
    let p_alpha = ks_pvalue(&d.alpha, |x| prior_alpha.cdf(x));

    let mut item_cfg = LsirmConfig::new(5_000 + 5_000 * 40, 5_000, 40, 32);
    item_cfg.hooks.prior_only = true;
    let resp = ItemResponseData::new(2, 1, vec![1, 0]).unwrap();
    let zhat = LatentConfig::new(vec![[0.5, 0.0], [-0.5, 0.3]]).unwrap();
    let d = run_adapted_lsirm_chain::<f64>(&resp, &zhat, &hp, &item_cfg).unwrap();
    let std = Normal::new(0.0, 1.0).unwrap();
    let p_delta = ks_pvalue(&d.delta, |x| std.cdf(x));

    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let theta: Vec<f64> = (0..20).map(|k| (k as f64 - 9.5) / 10.0).collect();
    let shape = hp.a_sigma + theta.len() as f64 / 2.0;
    let rate = hp.b_sigma + 0.5 * theta.iter().map(|t| t * t).sum::<f64>();
    let draws: Vec<f64> = (0..1_000_000).map(|_| gibbs_sigma2(&theta, &hp, &mut rng)).collect();
    let m = mean(&draws);
    let v = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
    let m_rel = m / (rate / (shape - 1.0)) - 1.0;
    let v_rel = v / (rate * rate / ((shape - 1.0).powi(2) * (shape - 2.0))) - 1.0;

    report.record(
        8,
        "sampler correctness",
        p_alpha > KS_LEVEL && p_delta > KS_LEVEL && m_rel.abs() < GIBBS_REL_TOL && v_rel.abs() < GIBBS_REL_TOL,
        format!(
            "prior KS p alpha {p_alpha:.3} delta {p_delta:.3}; Gibbs relative error mean {m_rel:.2e} variance {v_rel:.2e}"
        ),
    );
}

fn same_files(a: &std::path::Path, b: &std::path::Path) -> (usize, usize) {
    let mut names: Vec<_> = std::fs::read_dir(a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let same = names
        .iter()
        .filter(|n| std::fs::read(a.join(n)).ok() == std::fs::read(b.join(n)).ok())
        .count();
    (same, names.len())
}

fn reproducibility(report: &mut Report) {
    let seed = BASE_SEED;
    let dataset = Dataset::from_generated(data(Scenario::S1_1, None, seed));
    let short = TwoStepConfig::simulation_default(seed, 2).with_lengths(600, 100, 5);
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let out = fit_dataset(&dataset, &short).unwrap();
        let path = dir.path().join(name);
        std::fs::create_dir_all(&path).unwrap();
        write_draws(&out, &dataset, &path).unwrap();
    }
    let (same, total) = same_files(&dir.path().join("a"), &dir.path().join("b"));

    let t = Instant::now();
    let cfg = fit_config(seed, 2);
    let step1 = fit_step1(&dataset.net, &cfg).unwrap();
    let step2 = fit_step2(&dataset.resp, &step1.zhat, &cfg).unwrap();
    let rd = step2.delta.rhat.unwrap_or(f64::NAN);
    let rg = step1.gamma.rhat.unwrap_or(f64::NAN);
    println!("  two-chain fit ({:.0}s)", t.elapsed().as_secs_f64());
    report.record(
        9,
        "reproducibility",
        same == total && total > 0 && rd < RHAT_MAX && rg < RHAT_MAX,
        format!("{same}/{total} draw tables byte-identical; two-chain R-hat delta {rd:.3} gamma {rg:.3}"),
    );
}

fn main() {
    let (total, burn, thin) = lengths();
    println!("acceptance run: chains of {total}/{burn}/thin {thin}");
    let start = Instant::now();
    let mut report = Report { lines: Vec::new(), failed: Vec::new() };

    oracle_equivalence(&mut report);
    invariance(&mut report);
    sampler_correctness(&mut report);
    baseline_flatness(&mut report);

    let reps = fit_replicates();
    scenario_recovery(&reps, &mut report);
    lambda_sweep(&reps, &mut report);
    model_fit(&reps, &mut report);
    reproducibility(&mut report);

    report.lines.sort();
    println!();
    for (_, line) in &report.lines {
        println!("{line}");
    }
    report.failed.sort();
    println!(
        "acceptance: {} passed, {} failed {:?} ({:.0}s)",
        report.lines.len() - report.failed.len(),
        report.failed.len(),
        report.failed,
        start.elapsed().as_secs_f64()
    );
    if !report.failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}

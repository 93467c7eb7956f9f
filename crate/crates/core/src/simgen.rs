//! Synthetic paired datasets (network + item responses) from Gaussian
//! mixture latent geometries.
//!
//! Cluster membership is assigned by contiguous index blocks. Every dataset
//! draws its components from separate streams of one seeded generator:
//! latent positions (stream 0), scalar parameters (1), the network (2) and
//! the responses (3). Two datasets that share a seed therefore share their
//! network whenever their network geometry matches, whatever happens on the
//! item side.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{logistic, ItemResponseData, LatentConfig, NetworkData, Point};
use crate::scalar::Scalar;

/// Shrinkage values of the item-side respondent positions.
pub const SCENARIO3_LAMBDAS: [f64; 8] = [0.01, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0];

const MU: [Point<f64>; 4] = [[0.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [0.0, 0.0]];
const MU_TWO_GROUP: [Point<f64>; 2] = [[0.0, 1.0], [0.0, -1.0]];
const SD_PERSON: f64 = 0.2;
const SD_ITEM: f64 = 0.1;
const ITEM_CORR: [f64; 4] = [0.0, -0.9, 0.9, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Three matching person and item clusters.
    S1_1,
    /// A fourth person cluster at the origin.
    S1_2,
    /// A fourth item cluster at the origin.
    S1_3,
    /// Two-cluster network, three-cluster item side.
    S2,
    /// Item-side positions are the network positions scaled by lambda.
    S3,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [Scenario::S1_1, Scenario::S1_2, Scenario::S1_3, Scenario::S2, Scenario::S3];

    pub fn sizes(self) -> (usize, usize) {
        match self {
            Scenario::S1_2 => (400, 30),
            Scenario::S1_3 => (300, 40),
            _ => (300, 30),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::S1_1 => "1.1",
            Scenario::S1_2 => "1.2",
            Scenario::S1_3 => "1.3",
            Scenario::S2 => "2",
            Scenario::S3 => "3",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1.1" => Ok(Scenario::S1_1),
            "1.2" => Ok(Scenario::S1_2),
            "1.3" => Ok(Scenario::S1_3),
            "2" => Ok(Scenario::S2),
            "3" => Ok(Scenario::S3),
            other => Err(Error::InvalidConfig(format!("unknown scenario '{other}' (expected 1.1, 1.2, 1.3, 2 or 3)"))),
        }
    }
}

/// Generator settings for one dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub lambda: Option<f64>,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, lambda: Option<f64>, seed: u64) -> Result<Self> {
        let spec = Self { scenario, lambda, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match (self.scenario, self.lambda) {
            (Scenario::S3, Some(l)) => {
                if SCENARIO3_LAMBDAS.iter().any(|&v| (v - l).abs() < 1e-12) {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "lambda {l} is not one of {SCENARIO3_LAMBDAS:?}"
                    )))
                }
            }
            (Scenario::S3, None) => Err(Error::InvalidConfig("scenario 3 requires lambda".into())),
            (_, Some(_)) => Err(Error::InvalidConfig("lambda is only meaningful for scenario 3".into())),
            (_, None) => Ok(()),
        }
    }

    pub fn n(&self) -> usize {
        self.scenario.sizes().0
    }

    pub fn p(&self) -> usize {
        self.scenario.sizes().1
    }
}

/// Generating latent geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Latents {
    /// Respondent positions that generate the network.
    pub z_social: LatentConfig<f64>,
    /// Respondent positions that generate the responses.
    pub z_item_side: LatentConfig<f64>,
    pub w: LatentConfig<f64>,
    pub social_clusters: Vec<usize>,
    pub item_side_clusters: Vec<usize>,
    pub item_clusters: Vec<usize>,
}

fn block_labels(count: usize, groups: usize) -> Vec<usize> {
    let per = count / groups;
    (0..count).map(|k| (k / per).min(groups - 1)).collect()
}

/// Correlated bivariate normal with equal marginal SD.
fn draw_point<R: Rng>(rng: &mut R, mean: Point<f64>, sd: f64, corr: f64) -> Point<f64> {
    let a = f64::sample_standard_normal(rng);
    let b = f64::sample_standard_normal(rng);
    [mean[0] + sd * a, mean[1] + sd * (corr * a + (1.0 - corr * corr).sqrt() * b)]
}

fn person_positions<R: Rng>(rng: &mut R, labels: &[usize], means: &[Point<f64>]) -> LatentConfig<f64> {
    let pts = labels.iter().map(|&g| draw_point(rng, means[g], SD_PERSON, 0.0)).collect();
    LatentConfig::new(pts).expect("finite draws")
}

fn item_positions<R: Rng>(rng: &mut R, labels: &[usize]) -> LatentConfig<f64> {
    let pts = labels.iter().map(|&g| draw_point(rng, MU[g], SD_ITEM, ITEM_CORR[g])).collect();
    LatentConfig::new(pts).expect("finite draws")
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn generate_latents(spec: &ScenarioSpec) -> Result<Latents> {
    spec.validate()?;
    let (n, p) = spec.scenario.sizes();
    let mut rng = stream(spec.seed, 0);

    let (social_groups, item_groups) = match spec.scenario {
        Scenario::S1_2 => (4, 3),
        Scenario::S1_3 => (3, 4),
        Scenario::S2 => (2, 3),
        _ => (3, 3),
    };
    let social_clusters = block_labels(n, social_groups);
    let item_clusters = block_labels(p, item_groups);

    let social_means: &[Point<f64>] = if spec.scenario == Scenario::S2 { &MU_TWO_GROUP } else { &MU };
    let z_social = person_positions(&mut rng, &social_clusters, social_means);

    let (z_item_side, item_side_clusters) = match spec.scenario {
        Scenario::S2 => {
            let labels = block_labels(n, 3);
            (person_positions(&mut rng, &labels, &MU), labels)
        }
        Scenario::S3 => (z_social.scaled(spec.lambda.expect("validated")), social_clusters.clone()),
        _ => (z_social.clone(), social_clusters.clone()),
    };
    let w = item_positions(&mut rng, &item_clusters);

    Ok(Latents { z_social, z_item_side, w, social_clusters, item_side_clusters, item_clusters })
}

/// All generating values of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    pub beta: Vec<f64>,
    pub theta: Vec<f64>,
    pub latents: Latents,
}

impl Truth {
    pub fn tie_probability(&self, k: usize, l: usize) -> f64 {
        let z = &self.latents.z_social;
        logistic(self.alpha - self.gamma * z.dist(k, z, l))
    }

    pub fn response_probability(&self, k: usize, i: usize) -> f64 {
        let z = &self.latents.z_item_side;
        logistic(self.beta[i] + self.theta[k] - self.delta * z.dist(k, &self.latents.w, i))
    }

    /// Generating response probabilities, row-major `n x p`.
    pub fn response_probabilities(&self) -> Vec<f64> {
        let (n, p) = (self.theta.len(), self.beta.len());
        (0..n).flat_map(|k| (0..p).map(move |i| (k, i))).map(|(k, i)| self.response_probability(k, i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedPair {
    pub spec: ScenarioSpec,
    pub net: NetworkData,
    pub resp: ItemResponseData,
    pub truth: Truth,
}

/// Generates a dataset with distance weight 1 and influence weight 1.
pub fn generate_pair(spec: &ScenarioSpec) -> Result<GeneratedPair> {
    generate_pair_with_delta(spec, 1.0)
}

/// Same as [`generate_pair`] with a different generating influence weight.
pub fn generate_pair_with_delta(spec: &ScenarioSpec, delta: f64) -> Result<GeneratedPair> {
    let latents = generate_latents(spec)?;
    let (n, p) = spec.scenario.sizes();

    let mut rng = stream(spec.seed, 1);
    let alpha = rng.gen_range(-1.0..1.0);
    let beta: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let truth = Truth { alpha, gamma: 1.0, delta, beta, theta, latents };

    let mut rng = stream(spec.seed, 2);
    let mut edges = Vec::new();
    for k in 0..n {
        for l in (k + 1)..n {
            if rng.gen::<f64>() < truth.tie_probability(k, l) {
                edges.push((k, l));
            }
        }
    }
    let net = NetworkData::from_edges(n, &edges)?;

    let mut rng = stream(spec.seed, 3);
    let cells = truth
        .response_probabilities()
        .into_iter()
        .map(|pr| (rng.gen::<f64>() < pr) as u8)
        .collect();
    let resp = ItemResponseData::new(n, p, cells)?;

    Ok(GeneratedPair { spec: *spec, net, resp, truth })
}

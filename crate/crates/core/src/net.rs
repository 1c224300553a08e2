//! Greedy ε-net construction: cover the cloud with balls of radius ε
//! centered on points that were still uncovered when chosen.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
        }
    }

    pub fn parse(s: &str) -> Result<Metric> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            other => Err(Error::BadMetric(other.to_string())),
        }
    }

    fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

/// How the next uncovered center is picked. Any order yields a legitimate
/// ε-net; the default is the lowest surviving row index so runs reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PickOrder {
    FirstUncoveredByRow,
    RandomWithSeed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetPolicy {
    pub pick_order: PickOrder,
    /// Consulted only for `RandomWithSeed`.
    pub seed: u64,
}

impl Default for NetPolicy {
    fn default() -> Self {
        NetPolicy {
            pick_order: PickOrder::FirstUncoveredByRow,
            seed: 0,
        }
    }
}

/// The ε-net cover. Centers are pairwise more than ε apart; every point
/// lies within ε of at least one center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallCover {
    pub epsilon: f64,
    pub metric: Metric,
    /// Row index of each ball's center, in creation order (= ball id).
    pub centers: Vec<usize>,
    /// For each point, the ids of the balls covering it (ascending).
    pub membership: Vec<Vec<usize>>,
    /// For each ball, the covered point rows (ascending).
    pub members: Vec<Vec<usize>>,
    /// Carried through to the graph and its serialized form.
    pub axis_names: Vec<String>,
    pub cloud_hash: u64,
}

impl BallCover {
    pub fn ball_count(&self) -> usize {
        self.centers.len()
    }

    pub fn point_count(&self) -> usize {
        self.membership.len()
    }
}

/// Distance between two rows of the cloud under the chosen metric.
pub fn pairwise_distance(cloud: &PointCloud, i: usize, j: usize, metric: Metric) -> f64 {
    metric.distance(cloud.row(i), cloud.row(j))
}

/// Build the greedy ε-net ball cover.
///
/// Repeatedly picks an uncovered point per `policy`, makes it a center,
/// and adds that center to the cover list of every point within ε
/// (closed ball: distance exactly ε is covered).
pub fn greedy_net(
    cloud: &PointCloud,
    epsilon: f64,
    metric: Metric,
    policy: &NetPolicy,
) -> Result<BallCover> {
    if !(epsilon > 0.0) {
        return Err(Error::BadEpsilon(epsilon));
    }
    let n = cloud.n();
    let order: Vec<usize> = match policy.pick_order {
        PickOrder::FirstUncoveredByRow => (0..n).collect(),
        PickOrder::RandomWithSeed => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(policy.seed));
            order
        }
    };

    let mut covered = vec![false; n];
    let mut membership: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut centers: Vec<usize> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();

    for &candidate in &order {
        if covered[candidate] {
            continue;
        }
        let ball = centers.len();
        centers.push(candidate);
        let center = cloud.row(candidate);
        let mut in_ball = Vec::new();
        for p in 0..n {
            if metric.distance(center, cloud.row(p)) <= epsilon {
                covered[p] = true;
                membership[p].push(ball);
                in_ball.push(p);
            }
        }
        members.push(in_ball);
    }

    debug_assert!(covered.iter().all(|&c| c));
    Ok(BallCover {
        epsilon,
        metric,
        centers,
        membership,
        members,
        axis_names: cloud.axis_names().to_vec(),
        cloud_hash: cloud.content_hash(),
    })
}

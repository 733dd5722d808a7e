//! Resonant-zone count sensing.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::coding::Estimate;
use crate::error::{Error, Result};
use crate::population::{region_occupancy, Device, RegionId, VascularGraph};
use crate::rng::{domain, rng_for};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorModel {
    /// Per-device detection probability inside the resonant zone.
    pub p_detect: f64,
    /// Mean Poisson clutter count per region per scan.
    pub clutter_rate: f64,
    /// Minimum count estimate that declares presence.
    pub threshold: u64,
    /// Scan duration; reports become available this many epochs after acquisition.
    pub latency_epochs: u64,
}

impl SensorModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_detect) {
            return Err(Error::Parameter(format!("p_detect {} outside [0, 1]", self.p_detect)));
        }
        if !(self.clutter_rate.is_finite() && self.clutter_rate >= 0.0) {
            return Err(Error::Parameter(format!("clutter rate {} must be finite and >= 0", self.clutter_rate)));
        }
        if self.threshold == 0 {
            return Err(Error::Parameter("detection threshold must be at least 1".into()));
        }
        Ok(())
    }

    fn sample_count<R: Rng>(&self, occupancy: u64, rng: &mut R) -> u64 {
        let hits = Binomial::new(occupancy, self.p_detect).expect("validated p_detect").sample(rng);
        let clutter = if self.clutter_rate > 0.0 {
            Poisson::new(self.clutter_rate).expect("validated clutter").sample(rng) as u64
        } else {
            0
        };
        hits + clutter
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensingReport {
    pub region: RegionId,
    pub count_estimate: u64,
    pub detected: bool,
    pub acquired_at: u64,
    pub available_at: u64,
}

/// One scan of every region: `Binomial(n_R, p_detect) + Poisson(clutter_rate)` counts.
pub fn scan(
    model: &SensorModel,
    graph: &VascularGraph,
    devices: &[Device],
    epoch: u64,
    rng_seed: u64,
) -> Vec<SensingReport> {
    region_occupancy(graph, devices)
        .into_iter()
        .enumerate()
        .map(|(r, n)| {
            let mut rng = rng_for(rng_seed, &[domain::SCAN, epoch, r as u64]);
            let count_estimate = model.sample_count(n, &mut rng);
            SensingReport {
                region: RegionId(r),
                count_estimate,
                detected: count_estimate >= model.threshold,
                acquired_at: epoch,
                available_at: epoch + model.latency_epochs,
            }
        })
        .collect()
}

/// `P(Binomial(occupancy, p_detect) + Poisson(clutter_rate) >= threshold)`.
pub fn detection_probability(model: &SensorModel, occupancy: u64) -> f64 {
    let tau = model.threshold;
    let (p, mu) = (model.p_detect, model.clutter_rate);
    let bin_ln = |b: u64| -> f64 {
        if b > occupancy {
            return f64::NEG_INFINITY;
        }
        let hits = if b == 0 { 0.0 } else { b as f64 * p.ln() };
        let misses = if b == occupancy { 0.0 } else { (occupancy - b) as f64 * (1.0 - p).ln() };
        ln_binomial(occupancy, b) + hits + misses
    };
    let pois_ln = |j: u64| -> f64 {
        if mu == 0.0 {
            return if j == 0 { 0.0 } else { f64::NEG_INFINITY };
        }
        -mu + j as f64 * mu.ln() - ln_factorial(j)
    };
    let below: f64 =
        (0..tau).map(|c| (0..=c.min(occupancy)).map(|b| (bin_ln(b) + pois_ln(c - b)).exp()).sum::<f64>()).sum();
    (1.0 - below).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Detection frequency with `occupancy` devices present.
    pub p_detect_region: Estimate,
    /// Detection frequency with an empty region.
    pub p_false_region: Estimate,
}

/// Empirical detection and false-detection probabilities at the configured threshold.
pub fn detection_roc(model: &SensorModel, occupancy: u64, trials: u64, rng_seed: u64) -> Result<RocPoint> {
    model.validate()?;
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let run = |n: u64, stream: u64| {
        let mut rng = rng_for(rng_seed, &[domain::ROC, stream]);
        let hits = (0..trials).filter(|_| model.sample_count(n, &mut rng) >= model.threshold).count();
        Estimate::from_counts(hits as u64, trials)
    };
    Ok(RocPoint { p_detect_region: run(occupancy, 0), p_false_region: run(0, 1) })
}

/// Scan results waiting out their acquisition latency.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PendingReports {
    queue: Vec<SensingReport>,
}

impl PendingReports {
    pub fn push(&mut self, reports: impl IntoIterator<Item = SensingReport>) {
        self.queue.extend(reports);
    }

    /// Removes and returns the reports whose `available_at` is `now`.
    pub fn take_available(&mut self, now: u64) -> Vec<SensingReport> {
        let (ready, waiting): (Vec<_>, Vec<_>) = self.queue.drain(..).partition(|r| r.available_at <= now);
        self.queue = waiting;
        debug_assert!(ready.iter().all(|r| r.available_at == now), "stale report skipped");
        ready
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}

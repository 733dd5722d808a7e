//! Closed-form activation rates from exact identification errors.

use serde::{Deserialize, Serialize};

use crate::channel::Dmc;
use crate::coding::{ExactAnalyzer, IdPair, Identity, TagCode};
use crate::error::{Error, Result};
use crate::population::{LocalSensor, RegionId, VascularGraph};

/// Exact error terms among the identities broadcast for each region in one window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceTable {
    /// `lambda1[r]`: first-kind error of region `r`'s identity.
    pub lambda1: Vec<f64>,
    /// `lambda2[sent][tested]`: second-kind error for the ordered pair (diagonal unused).
    pub lambda2: Vec<Vec<f64>>,
}

impl AcceptanceTable {
    /// Builds the table for the identities `ids[r]` of each region.
    pub fn exact(code: &TagCode, ch: &Dmc<f64>, ids: &[Identity]) -> Result<Self> {
        let analyzer = ExactAnalyzer::new(code, ch)?;
        let lambda1 = ids.iter().map(|&i| analyzer.lambda1(i)).collect::<Result<Vec<_>>>()?;
        let lambda2 = ids
            .iter()
            .map(|&sent| {
                ids.iter()
                    .map(|&tested| if sent == tested { Ok(0.0) } else { analyzer.lambda2(IdPair::new(sent, tested)) })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { lambda1, lambda2 })
    }

    pub fn regions(&self) -> usize {
        self.lambda1.len()
    }

    /// Probability that a device whose reading is `perceived` accepts the broadcast for `sent`.
    pub fn accept_given_reading(&self, sent: RegionId, perceived: RegionId) -> f64 {
        if sent == perceived {
            1.0 - self.lambda1[sent.0]
        } else {
            self.lambda2[sent.0][perceived.0]
        }
    }

    /// Acceptance probability of a device located in `actual` (or on an unlabeled edge).
    pub fn accept_probability(&self, sensor: &LocalSensor, actual: Option<RegionId>, sent: RegionId) -> f64 {
        let k = self.regions();
        match actual {
            Some(actual) => {
                let own = sensor.p_self * self.accept_given_reading(sent, actual);
                if k < 2 {
                    return own;
                }
                let share = sensor.p_conf / (k - 1) as f64;
                own + (0..k)
                    .filter(|&r| r != actual.0)
                    .map(|r| share * self.accept_given_reading(sent, RegionId(r)))
                    .sum::<f64>()
            }
            None => {
                let share = sensor.p_conf / k as f64;
                (0..k).map(|r| share * self.accept_given_reading(sent, RegionId(r))).sum()
            }
        }
    }
}

/// Where the off-target population sits, as nonnegative weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupancyProfile {
    pub regions: Vec<f64>,
    pub unlabeled: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionInputs {
    pub table: AcceptanceTable,
    pub sensor: LocalSensor,
    pub target: RegionId,
    /// Probability that sensing declares the target region occupied.
    pub p_detect_region: f64,
    /// Off-target devices; the target region's own weight is ignored.
    pub off_target: OccupancyProfile,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedRates {
    pub missed_activation_rate: f64,
    pub false_activation_rate: f64,
}

/// Expected missed and false activation rates.
///
/// missed = 1 - P_detect * a(target), where a(target) is the acceptance probability of a
/// device inside the target region: own reading times `1 - lambda1`, plus confused readings
/// times the matching second-kind terms.
///
/// false = occupancy-weighted mean acceptance of off-target devices: a confused reading equal
/// to the target contributes `1 - lambda1`, a reading of any other region its `lambda2`.
pub fn predict_rates(inputs: &PredictionInputs) -> PredictedRates {
    let table = &inputs.table;
    let target = inputs.target;
    let missed = 1.0 - inputs.p_detect_region * table.accept_probability(&inputs.sensor, Some(target), target);
    let mut weight = inputs.off_target.unlabeled;
    let mut expected = weight * table.accept_probability(&inputs.sensor, None, target);
    for (r, &w) in inputs.off_target.regions.iter().enumerate() {
        if r == target.0 {
            continue;
        }
        weight += w;
        expected += w * table.accept_probability(&inputs.sensor, Some(RegionId(r)), target);
    }
    PredictedRates {
        missed_activation_rate: missed.clamp(0.0, 1.0),
        false_activation_rate: if weight > 0.0 { (expected / weight).clamp(0.0, 1.0) } else { 0.0 },
    }
}

/// Long-run fraction of time a passively transported device spends on each edge.
///
/// Power iteration on the junction-to-junction edge chain, weighted by transit time. Needs a
/// graph without sinks.
pub fn stationary_edge_occupancy(graph: &VascularGraph) -> Result<Vec<f64>> {
    let edges = graph.edges();
    if edges.iter().any(|e| graph.is_sink(e.to)) {
        return Err(Error::Configuration("stationary occupancy is undefined on graphs with sinks".into()));
    }
    let m = edges.len();
    let mut pi = vec![1.0 / m as f64; m];
    for _ in 0..100_000 {
        let mut next = vec![0.0; m];
        for (e, edge) in edges.iter().enumerate() {
            let out = graph.outgoing(edge.to);
            let total: f64 = out.iter().map(|&f| edges[f].flow_weight).sum();
            for &f in out {
                next[f] += pi[e] * edges[f].flow_weight / total;
            }
        }
        // Lazy step keeps periodic chains (e.g. simple cycles) convergent.
        for (n, p) in next.iter_mut().zip(&pi) {
            *n = 0.5 * (*n + p);
        }
        let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if delta < 1e-13 {
            break;
        }
    }
    let weighted: Vec<f64> = pi.iter().zip(edges).map(|(p, e)| p * f64::from(e.transit_time)).collect();
    let total: f64 = weighted.iter().sum();
    Ok(weighted.into_iter().map(|w| w / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(l1: f64, l2: f64, k: usize) -> AcceptanceTable {
        AcceptanceTable {
            lambda1: vec![l1; k],
            lambda2: (0..k).map(|s| (0..k).map(|t| if s == t { 0.0 } else { l2 }).collect()).collect(),
        }
    }

    fn inputs(table: AcceptanceTable, p_self: f64, p_conf: f64, p_det: f64, off: OccupancyProfile) -> PredictionInputs {
        PredictionInputs {
            table,
            sensor: LocalSensor::new(p_self, p_conf).unwrap(),
            target: RegionId(0),
            p_detect_region: p_det,
            off_target: off,
        }
    }

    #[test]
    fn all_error_sources_off() {
        let off = OccupancyProfile { regions: vec![0.0, 5.0], unlabeled: 10.0 };
        let p = predict_rates(&inputs(table(0.0, 0.0, 2), 1.0, 0.0, 1.0, off));
        assert_eq!((p.missed_activation_rate, p.false_activation_rate), (0.0, 0.0));
    }

    #[test]
    fn missed_rate_closed_form() {
        let off = OccupancyProfile { regions: vec![0.0], unlabeled: 1.0 };
        let p = predict_rates(&inputs(table(0.05, 0.0, 1), 0.9, 0.0, 1.0, off));
        assert!((p.missed_activation_rate - 0.145).abs() < 1e-15);
    }

    #[test]
    fn false_rate_with_correct_other_readings() {
        let off = OccupancyProfile { regions: vec![3.0, 7.0], unlabeled: 0.0 };
        let p = predict_rates(&inputs(table(0.0, 0.2, 2), 0.9, 0.0, 1.0, off));
        assert!((p.false_activation_rate - 0.9 * 0.2).abs() < 1e-15);
    }

    #[test]
    fn confused_unlabeled_devices() {
        // Two regions; unlabeled devices report each with p_conf / 2.
        let off = OccupancyProfile { regions: vec![0.0, 0.0], unlabeled: 1.0 };
        let p = predict_rates(&inputs(table(0.1, 0.2, 2), 0.5, 0.4, 1.0, off));
        assert!((p.false_activation_rate - (0.2 * 0.9 + 0.2 * 0.2)).abs() < 1e-15);
    }

    #[test]
    fn cycle_occupancy_is_uniform() {
        use crate::population::{EdgeSpec, GraphSpec};
        let names = ["a", "b", "c"];
        let graph = VascularGraph::from_spec(&GraphSpec {
            nodes: names.iter().map(|s| s.to_string()).collect(),
            edges: (0..3)
                .map(|i| EdgeSpec {
                    from: names[i].into(),
                    to: names[(i + 1) % 3].into(),
                    length: 1.0,
                    flow_weight: 1.0,
                    transit_time: 2,
                    region: None,
                })
                .collect(),
            sinks: vec![],
        })
        .unwrap();
        for p in stationary_edge_occupancy(&graph).unwrap() {
            assert!((p - 1.0 / 3.0).abs() < 1e-9);
        }
    }
}

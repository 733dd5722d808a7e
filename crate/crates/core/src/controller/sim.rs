//! The sense, broadcast, test, activate loop.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::identity::{ActionId, IdentityMap};
use super::link::{BroadcastModel, BroadcastSpec};
use super::predict::AcceptanceTable;
use crate::channel::Sampler;
use crate::coding::{IdentificationCode, Identity, TagCode, TagCodeSpec};
use crate::error::{Error, Result};
use crate::population::{
    activate, advect, populate, read_local_sensor, region_occupancy, Device, GraphSpec, PopulationSpec, RegionId,
    VascularGraph,
};
use crate::rng::{derive_seed, domain, rng_for};
use crate::sensing::{detection_probability, scan, PendingReports, SensingReport, SensorModel};

/// Full description of one closed-loop run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSpec,
    pub sensor: SensorModel,
    pub broadcast: BroadcastSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<TagCodeSpec>,
    pub population: PopulationSpec,
    pub epochs: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_scan_interval")]
    pub scan_interval: u64,
    #[serde(default = "default_actions")]
    pub actions: Vec<String>,
    /// Action broadcast and tested by devices; defaults to the first action.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    /// Instruction window length; defaults to one window spanning the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_epochs: Option<u64>,
}

fn default_scan_interval() -> u64 {
    1
}

fn default_actions() -> Vec<String> {
    vec!["release".into()]
}

/// Per-epoch counters. Expected values are present when the code is exactly enumerable.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: u64,
    pub reports_consumed: u64,
    pub sensing_detect_count: u64,
    pub broadcast_count: u64,
    pub broadcast_bits: u64,
    pub target_devices: u64,
    pub target_activations: u64,
    pub missed_activations: u64,
    pub off_target_devices: u64,
    pub false_activations: u64,
    pub on_target_dose: u64,
    pub off_target_dose: u64,
    pub first_activations: u64,
    pub active_devices: u64,
    pub exited_devices: u64,
    pub expected_missed: Option<f64>,
    pub expected_false: Option<f64>,
    #[serde(skip)]
    missed_residual_sq: f64,
    #[serde(skip)]
    false_residual_sq: f64,
}

impl EpochMetrics {
    pub fn missed_activation_rate(&self) -> f64 {
        ratio(self.missed_activations, self.target_devices)
    }

    pub fn false_activation_rate(&self) -> f64 {
        ratio(self.false_activations, self.off_target_devices)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Predicted aggregates with self-normalized deviations.
///
/// Each sensing opportunity (for missed) or broadcast (for false) contributes an independent
/// residual `observed - expected` given device positions; `sigma` is the root sum of squared
/// residuals, scaled to a rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionCheck {
    pub missed_activation_rate: f64,
    pub false_activation_rate: f64,
    pub missed_sigma: f64,
    pub false_sigma: f64,
    pub missed_z: f64,
    pub false_z: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub epochs: u64,
    pub reports_consumed: u64,
    pub sensing_detect_count: u64,
    pub broadcast_count: u64,
    pub bits_per_broadcast: u64,
    pub target_devices: u64,
    pub target_activations: u64,
    pub missed_activations: u64,
    pub off_target_devices: u64,
    pub false_activations: u64,
    pub on_target_dose: u64,
    pub off_target_dose: u64,
    pub first_activations: u64,
    pub exited_devices: u64,
    pub missed_activation_rate: f64,
    pub false_activation_rate: f64,
    pub predicted: Option<PredictionCheck>,
}

impl RunMetrics {
    pub fn from_epochs(epochs: &[EpochMetrics], bits_per_broadcast: u64) -> Self {
        let sum = |f: fn(&EpochMetrics) -> u64| epochs.iter().map(f).sum::<u64>();
        let mut m = RunMetrics {
            epochs: epochs.len() as u64,
            reports_consumed: sum(|e| e.reports_consumed),
            sensing_detect_count: sum(|e| e.sensing_detect_count),
            broadcast_count: sum(|e| e.broadcast_count),
            bits_per_broadcast,
            target_devices: sum(|e| e.target_devices),
            target_activations: sum(|e| e.target_activations),
            missed_activations: sum(|e| e.missed_activations),
            off_target_devices: sum(|e| e.off_target_devices),
            false_activations: sum(|e| e.false_activations),
            on_target_dose: sum(|e| e.on_target_dose),
            off_target_dose: sum(|e| e.off_target_dose),
            first_activations: sum(|e| e.first_activations),
            exited_devices: epochs.last().map_or(0, |e| e.exited_devices),
            ..Default::default()
        };
        m.missed_activation_rate = ratio(m.missed_activations, m.target_devices);
        m.false_activation_rate = ratio(m.false_activations, m.off_target_devices);
        let expected: Option<(f64, f64)> =
            epochs.iter().try_fold((0.0, 0.0), |(a, b), e| Some((a + e.expected_missed?, b + e.expected_false?)));
        if let Some((exp_missed, exp_false)) = expected {
            let missed_var: f64 = epochs.iter().map(|e| e.missed_residual_sq).sum();
            let false_var: f64 = epochs.iter().map(|e| e.false_residual_sq).sum();
            let z = |obs: f64, exp: f64, var: f64| {
                if var > 0.0 {
                    (obs - exp) / var.sqrt()
                } else if (obs - exp).abs() < 1e-9 {
                    0.0
                } else {
                    f64::INFINITY.copysign(obs - exp)
                }
            };
            let scale = |den: u64| if den == 0 { 0.0 } else { 1.0 / den as f64 };
            m.predicted = Some(PredictionCheck {
                missed_activation_rate: exp_missed * scale(m.target_devices),
                false_activation_rate: exp_false * scale(m.off_target_devices),
                missed_sigma: missed_var.sqrt() * scale(m.target_devices),
                false_sigma: false_var.sqrt() * scale(m.off_target_devices),
                missed_z: z(m.missed_activations as f64, exp_missed, missed_var),
                false_z: z(m.false_activations as f64, exp_false, false_var),
            });
        }
        m
    }
}

/// Mutable part of a run.
#[derive(Clone, Debug)]
pub struct SimulationState {
    pub epoch: u64,
    pub devices: Vec<Device>,
    pub pending: PendingReports,
    /// True occupancy behind each pending report, keyed by (acquired_at, region).
    acquired_counts: BTreeMap<(u64, usize), u64>,
}

/// Outcome of one device hearing one broadcast.
#[derive(Clone, Copy, Default)]
struct Reception {
    target: bool,
    accepted: bool,
    first: bool,
    released: u32,
}

pub struct Simulation {
    config: RunConfig,
    graph: VascularGraph,
    broadcast: BroadcastModel,
    sampler: Sampler,
    code: Option<TagCode>,
    map: Option<IdentityMap>,
    action: ActionId,
    tables: BTreeMap<u64, Option<AcceptanceTable>>,
    state: SimulationState,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        let graph = VascularGraph::from_spec(&config.graph)?;
        if graph.region_count() == 0 {
            return Err(Error::Configuration("graph defines no regions of interest".into()));
        }
        config.sensor.validate()?;
        if config.scan_interval == 0 {
            return Err(Error::Configuration("scan interval must be at least 1".into()));
        }
        if config.actions.is_empty() {
            return Err(Error::Configuration("at least one action is required".into()));
        }
        let broadcast = BroadcastModel::from_spec(&config.broadcast)?;
        let code = config.code.as_ref().map(TagCodeSpec::build).transpose()?;
        let map = match &code {
            Some(code) => {
                if broadcast.per_device_channel.inputs() < code.input_alphabet()
                    || broadcast.per_device_channel.outputs() != code.output_alphabet()
                {
                    return Err(Error::Configuration("broadcast channel does not match the code alphabet".into()));
                }
                let window = config.window_epochs.unwrap_or(config.epochs + 1);
                Some(IdentityMap::new(
                    graph.region_count(),
                    config.actions.clone(),
                    window,
                    config.epochs,
                    code.identity_count(),
                )?)
            }
            None => None,
        };
        let action = match &config.action {
            Some(name) => ActionId(
                config
                    .actions
                    .iter()
                    .position(|a| a == name)
                    .ok_or_else(|| Error::Configuration(format!("action {name:?} is not in the vocabulary")))?,
            ),
            None => ActionId(0),
        };
        let devices = populate(&graph, &config.population, derive_seed(config.seed, &[domain::PLACEMENT]))?;
        let sampler = Sampler::new(&broadcast.per_device_channel);
        Ok(Self {
            state: SimulationState {
                epoch: 0,
                devices,
                pending: PendingReports::default(),
                acquired_counts: BTreeMap::new(),
            },
            config,
            graph,
            broadcast,
            sampler,
            code,
            map,
            action,
            tables: BTreeMap::new(),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn graph(&self) -> &VascularGraph {
        &self.graph
    }

    pub fn state(&self) -> &SimulationState {
        &self.state
    }

    pub fn broadcast_model(&self) -> &BroadcastModel {
        &self.broadcast
    }

    pub fn identity_map(&self) -> Option<&IdentityMap> {
        self.map.as_ref()
    }

    /// Channel symbols per broadcast; fixed by the code alone.
    pub fn bits_per_broadcast(&self) -> u64 {
        self.code.as_ref().map_or(0, |c| c.blocklength() as u64)
    }

    /// Identities broadcast for each region during the window containing `epoch`.
    pub fn region_identities(&self, epoch: u64) -> Result<Vec<Identity>> {
        let map = self.map.as_ref().ok_or_else(|| Error::Configuration("no identification code configured".into()))?;
        (0..self.graph.region_count())
            .map(|r| map.encode_instruction(&map.instruction(RegionId(r), self.action, epoch)))
            .collect()
    }

    /// Exact acceptance table for the window containing `epoch`, if enumerable.
    pub fn acceptance_table(&mut self, epoch: u64) -> Result<Option<&AcceptanceTable>> {
        let window = match &self.map {
            Some(map) => map.window_for(epoch).start,
            None => return Ok(None),
        };
        if !self.tables.contains_key(&window) {
            let ids = self.region_identities(epoch)?;
            let code = self.code.as_ref().expect("map implies code");
            let table = match AcceptanceTable::exact(code, &self.broadcast.per_device_channel, &ids) {
                Ok(t) => Some(t),
                Err(Error::Feasibility { .. }) => None,
                Err(e) => return Err(e),
            };
            self.tables.insert(window, table);
        }
        Ok(self.tables[&window].as_ref())
    }

    pub fn run_epoch(&mut self) -> Result<EpochMetrics> {
        let now = self.state.epoch + 1;
        let seed = self.config.seed;
        advect(&self.graph, &mut self.state.devices, 1, derive_seed(seed, &[domain::TRANSPORT, now]));
        self.state.epoch = now;

        if now.is_multiple_of(self.config.scan_interval) {
            let reports = scan(&self.config.sensor, &self.graph, &self.state.devices, now, seed);
            for (r, n) in region_occupancy(&self.graph, &self.state.devices).into_iter().enumerate() {
                self.state.acquired_counts.insert((now, r), n);
            }
            self.state.pending.push(reports);
        }

        let mut metrics = EpochMetrics { epoch: now, ..Default::default() };
        let mut reports = self.state.pending.take_available(now);
        reports.sort_by_key(|r| r.region);
        let table = self.acceptance_table(now)?.cloned();
        let mut predicted = table.is_some();
        for report in reports {
            let acquired = self.state.acquired_counts.remove(&(report.acquired_at, report.region.0)).unwrap_or(0);
            metrics.reports_consumed += 1;
            self.consume(&report, acquired, table.as_ref(), &mut metrics, &mut predicted)?;
        }
        if !predicted {
            metrics.expected_missed = None;
            metrics.expected_false = None;
        } else {
            metrics.expected_missed.get_or_insert(0.0);
            metrics.expected_false.get_or_insert(0.0);
        }
        metrics.active_devices = self.state.devices.iter().filter(|d| d.activated && !d.exited).count() as u64;
        metrics.exited_devices = self.state.devices.iter().filter(|d| d.exited).count() as u64;
        Ok(metrics)
    }

    fn consume(
        &mut self,
        report: &SensingReport,
        acquired: u64,
        table: Option<&AcceptanceTable>,
        metrics: &mut EpochMetrics,
        predicted: &mut bool,
    ) -> Result<()> {
        let now = self.state.epoch;
        let target = report.region;
        let sensor = self.config.population.sensor;
        let graph = &self.graph;
        let in_target = |d: &Device| !d.exited && graph.region_of(d.location.edge) == Some(target);
        let target_count = self.state.devices.iter().filter(|d| in_target(d)).count() as u64;
        metrics.target_devices += target_count;

        let accept_target = table.map(|t| t.accept_probability(&sensor, Some(target), target));
        let p_detect = detection_probability(&self.config.sensor, acquired);

        if !report.detected {
            metrics.missed_activations += target_count;
            if let Some(a) = accept_target {
                let expected = target_count as f64 * (1.0 - p_detect * a);
                let residual = target_count as f64 - expected;
                *metrics.expected_missed.get_or_insert(0.0) += expected;
                metrics.missed_residual_sq += residual * residual;
            }
            return Ok(());
        }

        metrics.sensing_detect_count += 1;
        let code = self.code.as_ref().ok_or_else(|| {
            Error::Configuration("broadcast requested but no identification code is configured".into())
        })?;
        let identities = self.region_identities(now)?;
        let sent = identities[target.0];
        let mut encoder = rng_for(self.config.seed, &[domain::ENCODER, now, target.0 as u64]);
        let codeword = code.encode(sent, encoder.random_range(0..code.randomness_size()));
        metrics.broadcast_count += 1;
        metrics.broadcast_bits += codeword.len() as u64;

        let reading_seed = derive_seed(self.config.seed, &[domain::LOCAL_SENSOR, now, target.0 as u64]);
        let reception_seed = derive_seed(self.config.seed, &[domain::RECEPTION, now, target.0 as u64]);
        let sampler = &self.sampler;
        let outcomes: Vec<Option<Reception>> = self
            .state
            .devices
            .par_iter_mut()
            .map(|device| {
                if device.exited {
                    return None;
                }
                let target_device = graph.region_of(device.location.edge) == Some(target);
                let mut out = Reception { target: target_device, ..Default::default() };
                let Some(perceived) = read_local_sensor(device, graph, reading_seed).perceived_region else {
                    return Some(out);
                };
                let mut rng = rng_for(reception_seed, &[device.id]);
                let mut y = Vec::with_capacity(codeword.len());
                sampler.sample_into(&codeword, &mut rng, &mut y);
                if code.accepts(identities[perceived.0], &y) {
                    out.accepted = true;
                    let release = activate(device).expect("not exited");
                    out.first = release.first_activation;
                    out.released = release.units;
                }
                Some(out)
            })
            .collect();

        let mut off_by_region = vec![0u64; graph.region_count()];
        let mut off_unlabeled = 0u64;
        for (device, outcome) in self.state.devices.iter().zip(&outcomes) {
            let Some(o) = outcome else { continue };
            if o.target {
                metrics.target_activations += u64::from(o.accepted);
                metrics.on_target_dose += u64::from(o.released);
            } else {
                metrics.off_target_devices += 1;
                metrics.false_activations += u64::from(o.accepted);
                metrics.off_target_dose += u64::from(o.released);
                match graph.region_of(device.location.edge) {
                    Some(r) => off_by_region[r.0] += 1,
                    None => off_unlabeled += 1,
                }
            }
            metrics.first_activations += u64::from(o.first);
        }
        let accepted_target = outcomes.iter().flatten().filter(|o| o.target && o.accepted).count() as u64;
        let accepted_off = outcomes.iter().flatten().filter(|o| !o.target && o.accepted).count() as u64;
        metrics.missed_activations += target_count - accepted_target;

        match (table, accept_target) {
            (Some(table), Some(a)) => {
                let expected_missed = target_count as f64 * (1.0 - p_detect * a);
                let residual = (target_count - accepted_target) as f64 - expected_missed;
                *metrics.expected_missed.get_or_insert(0.0) += expected_missed;
                metrics.missed_residual_sq += residual * residual;

                let mut expected_false = off_unlabeled as f64 * table.accept_probability(&sensor, None, target);
                for (r, &n) in off_by_region.iter().enumerate() {
                    if n > 0 {
                        expected_false += n as f64 * table.accept_probability(&sensor, Some(RegionId(r)), target);
                    }
                }
                let residual = accepted_off as f64 - expected_false;
                *metrics.expected_false.get_or_insert(0.0) += expected_false;
                metrics.false_residual_sq += residual * residual;
            }
            _ => *predicted = false,
        }
        Ok(())
    }

    /// Runs the configured number of epochs.
    pub fn run(&mut self) -> Result<RunOutput> {
        let epochs = (0..self.config.epochs).map(|_| self.run_epoch()).collect::<Result<Vec<_>>>()?;
        let summary = RunMetrics::from_epochs(&epochs, self.bits_per_broadcast());
        Ok(RunOutput { epochs, summary })
    }
}

/// Advances `sim` by one epoch.
pub fn run_epoch(sim: &mut Simulation) -> Result<EpochMetrics> {
    sim.run_epoch()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub epochs: Vec<EpochMetrics>,
    pub summary: RunMetrics,
}

pub const METRICS_CSV_HEADER: &str = "epoch,reports_consumed,sensing_detect_count,broadcast_count,broadcast_bits,\
target_devices,target_activations,missed_activations,missed_activation_rate,off_target_devices,\
false_activations,false_activation_rate,on_target_dose,off_target_dose,first_activations,\
active_devices,exited_devices,expected_missed,expected_false";

pub fn write_metrics_csv<W: Write>(out: &mut W, epochs: &[EpochMetrics]) -> io::Result<()> {
    writeln!(out, "{METRICS_CSV_HEADER}")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for e in epochs {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            e.epoch,
            e.reports_consumed,
            e.sensing_detect_count,
            e.broadcast_count,
            e.broadcast_bits,
            e.target_devices,
            e.target_activations,
            e.missed_activations,
            e.missed_activation_rate(),
            e.off_target_devices,
            e.false_activations,
            e.false_activation_rate(),
            e.on_target_dose,
            e.off_target_dose,
            e.first_activations,
            e.active_devices,
            e.exited_devices,
            opt(e.expected_missed),
            opt(e.expected_false),
        )?;
    }
    Ok(())
}

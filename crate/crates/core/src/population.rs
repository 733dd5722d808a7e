//! Device population and passive transport over the vascular graph.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, domain, rng_for};

pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionId(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    pub flow_weight: f64,
    pub transit_time: u32,
    pub region: Option<RegionId>,
}

/// Directed vessel network with labeled regions of interest.
#[derive(Clone, Debug, PartialEq)]
pub struct VascularGraph {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    regions: Vec<String>,
    sinks: Vec<bool>,
    outgoing: Vec<Vec<EdgeId>>,
    region_edges: Vec<Vec<EdgeId>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    #[serde(default = "unit_length")]
    pub length: f64,
    pub flow_weight: f64,
    pub transit_time: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
}

fn unit_length() -> f64 {
    1.0
}

/// JSON form: `{"nodes": [...], "edges": [{from, to, flow_weight, transit_time, region?}], "sinks": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default)]
    pub sinks: Vec<String>,
}

impl VascularGraph {
    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, name) in spec.nodes.iter().enumerate() {
            if index.insert(name.as_str(), i).is_some() {
                return Err(Error::Graph(format!("duplicate node {name:?}")));
            }
        }
        if spec.edges.is_empty() {
            return Err(Error::Graph("graph has no edges".into()));
        }
        let lookup =
            |name: &str| index.get(name).copied().ok_or_else(|| Error::Graph(format!("unknown node {name:?}")));
        let labels: BTreeSet<&str> = spec.edges.iter().filter_map(|e| e.region.as_deref()).collect();
        let regions: Vec<String> = labels.iter().map(|s| s.to_string()).collect();

        let mut edges = Vec::with_capacity(spec.edges.len());
        for (i, e) in spec.edges.iter().enumerate() {
            if !(e.flow_weight.is_finite() && e.flow_weight > 0.0) {
                return Err(Error::Graph(format!("edge {i} has non-positive flow weight")));
            }
            if e.transit_time == 0 {
                return Err(Error::Graph(format!("edge {i} has zero transit time")));
            }
            if !(e.length.is_finite() && e.length >= 0.0) {
                return Err(Error::Graph(format!("edge {i} has invalid length")));
            }
            let region = e
                .region
                .as_deref()
                .map(|label| RegionId(regions.iter().position(|r| r == label).expect("collected label")));
            edges.push(Edge {
                from: lookup(&e.from)?,
                to: lookup(&e.to)?,
                length: e.length,
                flow_weight: e.flow_weight,
                transit_time: e.transit_time,
                region,
            });
        }

        let mut sinks = vec![false; spec.nodes.len()];
        for name in &spec.sinks {
            sinks[lookup(name)?] = true;
        }
        let mut outgoing = vec![Vec::new(); spec.nodes.len()];
        let mut inbound = vec![false; spec.nodes.len()];
        for (id, e) in edges.iter().enumerate() {
            outgoing[e.from].push(id);
            inbound[e.to] = true;
        }
        for (node, name) in spec.nodes.iter().enumerate() {
            if sinks[node] && !outgoing[node].is_empty() {
                return Err(Error::Graph(format!("sink {name:?} has outgoing edges")));
            }
            if inbound[node] && outgoing[node].is_empty() && !sinks[node] {
                return Err(Error::Graph(format!("node {name:?} has inflow but no outflow and is not a sink")));
            }
        }
        let mut region_edges = vec![Vec::new(); regions.len()];
        for (id, e) in edges.iter().enumerate() {
            if let Some(RegionId(r)) = e.region {
                region_edges[r].push(id);
            }
        }
        Ok(Self { nodes: spec.nodes.clone(), edges, regions, sinks, outgoing, region_edges })
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    from: self.nodes[e.from].clone(),
                    to: self.nodes[e.to].clone(),
                    length: e.length,
                    flow_weight: e.flow_weight,
                    transit_time: e.transit_time,
                    region: e.region.map(|r| self.regions[r.0].clone()),
                })
                .collect(),
            sinks: self.nodes.iter().zip(&self.sinks).filter(|(_, &s)| s).map(|(n, _)| n.clone()).collect(),
        }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn outgoing(&self, node: usize) -> &[EdgeId] {
        &self.outgoing[node]
    }

    pub fn is_sink(&self, node: usize) -> bool {
        self.sinks[node]
    }

    pub fn node_name(&self, node: usize) -> &str {
        &self.nodes[node]
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn region_label(&self, r: RegionId) -> &str {
        &self.regions[r.0]
    }

    pub fn region_by_label(&self, label: &str) -> Option<RegionId> {
        self.regions.iter().position(|r| r == label).map(RegionId)
    }

    pub fn region_edges(&self, r: RegionId) -> &[EdgeId] {
        &self.region_edges[r.0]
    }

    pub fn region_of(&self, edge: EdgeId) -> Option<RegionId> {
        self.edges[edge].region
    }

    /// Next edge after arriving at `node`, with probability proportional to flow weight.
    fn choose_next<R: Rng>(&self, node: usize, rng: &mut R) -> Option<EdgeId> {
        let out = &self.outgoing[node];
        if out.is_empty() {
            return None;
        }
        let total: f64 = out.iter().map(|&e| self.edges[e].flow_weight).sum();
        let mut u = rng.random::<f64>() * total;
        for &e in out {
            u -= self.edges[e].flow_weight;
            if u < 0.0 {
                return Some(e);
            }
        }
        out.last().copied()
    }
}

/// Position along an edge in whole epochs; progress is `step / transit_time`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub edge: EdgeId,
    pub step: u32,
}

impl Location {
    pub fn progress(&self, graph: &VascularGraph) -> f64 {
        f64::from(self.step) / f64::from(graph.edge(self.edge).transit_time)
    }
}

/// Local region-membership sensor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalSensor {
    /// Probability of reporting the region the device is actually in.
    pub p_self: f64,
    /// Probability of reporting some other region.
    pub p_conf: f64,
}

impl LocalSensor {
    pub fn new(p_self: f64, p_conf: f64) -> Result<Self> {
        let s = Self { p_self, p_conf };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !unit(self.p_self) || !unit(self.p_conf) || self.p_self + self.p_conf > 1.0 + 1e-12 {
            return Err(Error::Parameter(format!(
                "local sensor needs p_self, p_conf in [0,1] with p_self + p_conf <= 1, got ({}, {})",
                self.p_self, self.p_conf
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Device {
    pub id: u64,
    pub location: Location,
    pub sensor: LocalSensor,
    /// Monotone: never cleared once set.
    pub activated: bool,
    /// Units still carried.
    pub payload_units: u32,
    pub released_units: u32,
    pub exited: bool,
    pub seed: u64,
}

impl Device {
    pub fn new(id: u64, location: Location, sensor: LocalSensor, payload_units: u32, population_seed: u64) -> Self {
        Self {
            id,
            location,
            sensor,
            activated: false,
            payload_units,
            released_units: 0,
            exited: false,
            seed: derive_seed(population_seed, &[id]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LocalReading {
    pub perceived_region: Option<RegionId>,
}

fn step_device(graph: &VascularGraph, device: &mut Device, epoch_seed: u64) -> bool {
    if device.exited {
        return false;
    }
    let edge = graph.edge(device.location.edge);
    device.location.step += 1;
    if device.location.step < edge.transit_time {
        return false;
    }
    let mut rng = rng_for(epoch_seed, &[domain::TRANSPORT, device.id]);
    match graph.choose_next(edge.to, &mut rng) {
        Some(next) => {
            device.location = Location { edge: next, step: 0 };
            false
        }
        None => {
            device.location.step = edge.transit_time;
            device.exited = true;
            true
        }
    }
}

/// Advances every device by `epochs` epochs. Returns how many devices exited.
///
/// Each device moves `1 / transit_time` of its edge per epoch; at a junction it takes an
/// outgoing edge with probability proportional to flow weight. Devices that reach a node
/// without outflow are marked exited.
pub fn advect(graph: &VascularGraph, devices: &mut [Device], epochs: u32, rng_seed: u64) -> usize {
    (0..epochs)
        .map(|e| {
            let epoch_seed = derive_seed(rng_seed, &[u64::from(e)]);
            devices.par_iter_mut().map(|d| usize::from(step_device(graph, d, epoch_seed))).sum::<usize>()
        })
        .sum()
}

/// One local sensor reading for `device`.
pub fn read_local_sensor(device: &Device, graph: &VascularGraph, rng_seed: u64) -> LocalReading {
    let mut rng = rng_for(rng_seed, &[domain::LOCAL_SENSOR, device.id]);
    let u: f64 = rng.random();
    let k = graph.region_count();
    let perceived_region = match graph.region_of(device.location.edge) {
        Some(actual) => {
            if u < device.sensor.p_self {
                Some(actual)
            } else if u < device.sensor.p_self + device.sensor.p_conf && k > 1 {
                let pick = rng.random_range(0..k - 1);
                Some(RegionId(if pick >= actual.0 { pick + 1 } else { pick }))
            } else {
                None
            }
        }
        None => (u < device.sensor.p_conf && k > 0).then(|| RegionId(rng.random_range(0..k))),
    };
    LocalReading { perceived_region }
}

/// Payload dropped by one activation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Release {
    pub edge: EdgeId,
    pub units: u32,
    pub first_activation: bool,
}

/// Marks the device activated and releases one payload unit the first time only.
pub fn activate(device: &mut Device) -> Result<Release> {
    if device.exited {
        return Err(Error::Input(format!("device {} has exited", device.id)));
    }
    let edge = device.location.edge;
    if device.activated {
        return Ok(Release { edge, units: 0, first_activation: false });
    }
    device.activated = true;
    let units = device.payload_units.min(1);
    device.payload_units -= units;
    device.released_units += units;
    Ok(Release { edge, units, first_activation: true })
}

/// Initial placement of the population.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Uniform over edge positions, weighted by transit time.
    #[default]
    Uniform,
    /// Start of the given edges (by index), round robin.
    Edges(Vec<EdgeId>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    #[serde(default = "default_population")]
    pub size: u64,
    pub sensor: LocalSensor,
    #[serde(default = "default_payload")]
    pub payload_units: u32,
    #[serde(default)]
    pub placement: Placement,
}

fn default_population() -> u64 {
    100_000
}

fn default_payload() -> u32 {
    1
}

/// Builds the initial device collection, deterministic in `rng_seed`.
pub fn populate(graph: &VascularGraph, spec: &PopulationSpec, rng_seed: u64) -> Result<Vec<Device>> {
    spec.sensor.validate()?;
    if spec.size == 0 {
        return Err(Error::Parameter("population size must be positive".into()));
    }
    let slots: Vec<Location> = match &spec.placement {
        Placement::Uniform => graph
            .edges()
            .iter()
            .enumerate()
            .flat_map(|(edge, e)| (0..e.transit_time).map(move |step| Location { edge, step }))
            .collect(),
        Placement::Edges(list) => {
            if list.is_empty() {
                return Err(Error::Parameter("placement edge list is empty".into()));
            }
            if let Some(&bad) = list.iter().find(|&&e| e >= graph.edges().len()) {
                return Err(Error::Parameter(format!("placement edge {bad} does not exist")));
            }
            list.iter().map(|&edge| Location { edge, step: 0 }).collect()
        }
    };
    let uniform = matches!(spec.placement, Placement::Uniform);
    Ok((0..spec.size)
        .map(|id| {
            let location = if uniform {
                let mut rng = rng_for(rng_seed, &[domain::PLACEMENT, id]);
                slots[rng.random_range(0..slots.len())]
            } else {
                slots[(id % slots.len() as u64) as usize]
            };
            Device::new(id, location, spec.sensor, spec.payload_units, rng_seed)
        })
        .collect())
}

/// Devices on each edge, exited devices excluded.
pub fn edge_occupancy(graph: &VascularGraph, devices: &[Device]) -> Vec<u64> {
    let mut counts = vec![0; graph.edges().len()];
    for d in devices.iter().filter(|d| !d.exited) {
        counts[d.location.edge] += 1;
    }
    counts
}

pub fn region_occupancy(graph: &VascularGraph, devices: &[Device]) -> Vec<u64> {
    let mut counts = vec![0; graph.region_count()];
    for d in devices.iter().filter(|d| !d.exited) {
        if let Some(r) = graph.region_of(d.location.edge) {
            counts[r.0] += 1;
        }
    }
    counts
}

/// CSV snapshot rows `epoch,id,edge,activated`.
pub fn write_snapshot_csv<W: Write>(out: &mut W, epoch: u64, devices: &[Device], header: bool) -> io::Result<()> {
    if header {
        writeln!(out, "epoch,id,edge,activated")?;
    }
    for d in devices {
        writeln!(out, "{epoch},{},{},{}", d.id, d.location.edge, d.activated)?;
    }
    Ok(())
}

#![allow(dead_code)]

use jdai::coding::TagCodeSpec;
use jdai::controller::{BroadcastSpec, ChannelSpec, RunConfig};
use jdai::population::{EdgeSpec, GraphSpec, LocalSensor, Placement, PopulationSpec};
use jdai::sensing::SensorModel;

fn edge(from: &str, to: &str, w: f64, t: u32, region: Option<&str>) -> EdgeSpec {
    EdgeSpec {
        from: from.into(),
        to: to.into(),
        length: 1.0,
        flow_weight: w,
        transit_time: t,
        region: region.map(Into::into),
    }
}

/// Circulation loop with a tumor branch and a liver branch between junctions `a` and `b`.
pub fn two_region_graph() -> GraphSpec {
    GraphSpec {
        nodes: vec!["heart".into(), "a".into(), "b".into()],
        edges: vec![
            edge("heart", "a", 1.0, 2, None),
            edge("a", "b", 1.0, 3, Some("tumor")),
            edge("a", "b", 2.0, 3, Some("liver")),
            edge("b", "heart", 1.0, 2, None),
        ],
        sinks: vec![],
    }
}

pub struct Knobs {
    pub crossover: f64,
    pub q: u64,
    pub k: usize,
    pub reps: usize,
    pub p_self: f64,
    pub p_conf: f64,
    pub p_detect: f64,
    pub clutter: f64,
    pub threshold: u64,
    pub latency: u64,
    pub population: u64,
    pub epochs: u64,
    pub seed: u64,
}

impl Default for Knobs {
    fn default() -> Self {
        Self {
            crossover: 0.0,
            q: 5,
            k: 1,
            reps: 1,
            p_self: 1.0,
            p_conf: 0.0,
            p_detect: 1.0,
            clutter: 0.0,
            threshold: 1,
            latency: 0,
            population: 2000,
            epochs: 60,
            seed: 7,
        }
    }
}

pub fn config(k: &Knobs) -> RunConfig {
    RunConfig {
        graph: two_region_graph(),
        sensor: SensorModel {
            p_detect: k.p_detect,
            clutter_rate: k.clutter,
            threshold: k.threshold,
            latency_epochs: k.latency,
        },
        broadcast: BroadcastSpec {
            channel: Some(ChannelSpec::Bsc(k.crossover)),
            receive_area: None,
            field_slew: None,
            noise_rms: None,
            symbol_rate: 64.0,
        },
        code: Some(TagCodeSpec { q: k.q, k: k.k, inner_reps: k.reps, fixed_r: None }),
        population: PopulationSpec {
            size: k.population,
            sensor: LocalSensor { p_self: k.p_self, p_conf: k.p_conf },
            payload_units: 1,
            placement: Placement::Uniform,
        },
        epochs: k.epochs,
        seed: k.seed,
        scan_interval: 1,
        actions: vec!["release".into()],
        action: None,
        window_epochs: None,
    }
}

//! Magnetic low-rate downlink mapped onto a binary symmetric channel.

use serde::{Deserialize, Serialize};

use crate::channel::{make_bsc, BscParams, Dmc};
use crate::error::{Error, Result};

/// Induced voltage `U = A * dB/dt` for receive area `A` (m^2) and field slew (T/s).
pub fn induced_voltage(receive_area: f64, field_slew: f64) -> f64 {
    receive_area * field_slew
}

/// Standard normal upper tail.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Crossover of an antipodal threshold detector: `Q(U / noise_rms)`, clamped to `[0, 1/2]`.
pub fn crossover_from_link(voltage: f64, noise_rms: f64) -> Result<f64> {
    if !(noise_rms > 0.0) {
        return Err(Error::Parameter(format!("noise rms {noise_rms} must be positive")));
    }
    Ok(normal_tail(voltage / noise_rms).clamp(0.0, 0.5))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Bsc(f64),
    Dmc(Dmc<f64>),
}

impl ChannelSpec {
    pub fn build(&self) -> Result<Dmc<f64>> {
        match self {
            ChannelSpec::Bsc(p) => Ok(make_bsc(&BscParams::new(*p)?)),
            ChannelSpec::Dmc(ch) => Ok(ch.clone()),
        }
    }
}

/// Broadcast link: either an explicit per-device channel or the physical link parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BroadcastSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receive_area: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_slew: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_rms: Option<f64>,
    #[serde(default = "default_symbol_rate")]
    pub symbol_rate: f64,
}

fn default_symbol_rate() -> f64 {
    64.0
}

/// Resolved broadcast link. Each device hears an independent copy of `per_device_channel`.
#[derive(Clone, Debug, PartialEq)]
pub struct BroadcastModel {
    pub per_device_channel: Dmc<f64>,
    pub induced_voltage: Option<f64>,
    pub crossover: Option<f64>,
    pub symbol_rate: f64,
}

impl BroadcastModel {
    pub fn from_spec(spec: &BroadcastSpec) -> Result<Self> {
        if !(spec.symbol_rate > 0.0) {
            return Err(Error::Parameter("symbol rate must be positive".into()));
        }
        if let Some(channel) = &spec.channel {
            let per_device_channel = channel.build()?;
            let crossover = match channel {
                ChannelSpec::Bsc(p) => Some(*p),
                ChannelSpec::Dmc(_) => None,
            };
            return Ok(Self { per_device_channel, induced_voltage: None, crossover, symbol_rate: spec.symbol_rate });
        }
        let (Some(area), Some(slew), Some(noise)) = (spec.receive_area, spec.field_slew, spec.noise_rms) else {
            return Err(Error::Configuration(
                "broadcast needs either `channel` or all of receive_area, field_slew, noise_rms".into(),
            ));
        };
        if !(area >= 0.0) {
            return Err(Error::Parameter(format!("receive area {area} must be >= 0")));
        }
        let voltage = induced_voltage(area, slew);
        let p = crossover_from_link(voltage, noise)?;
        Ok(Self {
            per_device_channel: make_bsc(&BscParams::new(p)?),
            induced_voltage: Some(voltage),
            crossover: Some(p),
            symbol_rate: spec.symbol_rate,
        })
    }

    /// Epochs needed to send `symbols` channel symbols.
    pub fn airtime_epochs(&self, symbols: usize) -> f64 {
        symbols as f64 / self.symbol_rate
    }
}

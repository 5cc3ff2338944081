use serde::{Deserialize, Serialize};

use crate::DriverError;

/// Environment variable naming a driver configuration file.
pub const CONFIG_ENV_VAR: &str = "QLINK_CONFIG";

/// Driver configuration: the concrete devices composing the logical QPU.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DriverConfig {
    #[serde(default)]
    pub devices: Vec<DeviceConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub name: String,
    pub kind: DeviceKind,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceKind {
    Vppu,
    Decoder,
    Echo,
}

impl DriverConfig {
    pub fn from_json(text: &str) -> Result<Self, DriverError> {
        serde_json::from_str(text).map_err(|e| DriverError::Config(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, DriverError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DriverError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Loads the file named by `QLINK_CONFIG`, if set.
    pub fn from_env() -> Result<Option<Self>, DriverError> {
        match std::env::var(CONFIG_ENV_VAR) {
            Ok(path) => Self::from_path(std::path::Path::new(&path)).map(Some),
            Err(_) => Ok(None),
        }
    }

    /// The desk-scale default: one pulse-unit emulator, one decoder, one
    /// in-process echo endpoint.
    pub fn desk_default() -> Self {
        DriverConfig {
            devices: vec![
                DeviceConfig {
                    name: "vppu0".into(),
                    kind: DeviceKind::Vppu,
                    params: serde_json::json!({}),
                },
                DeviceConfig {
                    name: "decoder0".into(),
                    kind: DeviceKind::Decoder,
                    params: serde_json::json!({}),
                },
                DeviceConfig {
                    name: "echo0".into(),
                    kind: DeviceKind::Echo,
                    params: serde_json::json!({"transport": "inproc"}),
                },
            ],
        }
    }

}

/// Pulse-unit emulator parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct VppuParams {
    pub n_data: usize,
    pub p_flip: f64,
    pub seed: u64,
    pub tick_budget: u64,
    pub interpreter: String,
    pub dtd_tick_ns: u64,
}

impl Default for VppuParams {
    fn default() -> Self {
        VppuParams {
            n_data: 3,
            p_flip: 0.0,
            seed: 0,
            tick_budget: 10_000_000,
            interpreter: "standard".into(),
            dtd_tick_ns: qlink_device_core::ClockDomains::default().dtd_tick_ns(),
        }
    }
}

/// Echo endpoint parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EchoParams {
    pub transport: String,
    pub bind: String,
}

impl Default for EchoParams {
    fn default() -> Self {
        EchoParams {
            transport: "inproc".into(),
            bind: "127.0.0.1:0".into(),
        }
    }
}

pub(crate) fn parse_params<T: serde::de::DeserializeOwned + Default>(
    value: &serde_json::Value,
) -> Result<T, DriverError> {
    if value.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(value.clone()).map_err(|e| DriverError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_roundtrip() {
        let text = r#"{
            "devices": [
                {"name": "vppu0", "kind": "vppu", "params": {"p_flip": 0.01, "seed": 9}},
                {"name": "decoder0", "kind": "decoder"},
                {"name": "echo0", "kind": "echo", "params": {"transport": "udp", "bind": "127.0.0.1:0"}}
            ]
        }"#;
        let config = DriverConfig::from_json(text).unwrap();
        assert_eq!(config.devices.len(), 3);
        assert_eq!(config.devices[0].kind, DeviceKind::Vppu);
        let vppu: VppuParams = parse_params(&config.devices[0].params).unwrap();
        assert_eq!(vppu.seed, 9);
        assert_eq!(vppu.n_data, 3);
    }

    #[test]
    fn bad_kind_is_a_config_error() {
        let err = DriverConfig::from_json(r#"{"devices":[{"name":"x","kind":"gpu"}]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("gpu"));
    }
}

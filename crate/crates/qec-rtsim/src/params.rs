use serde::{Deserialize, Serialize};

use crate::SimError;

/// Timing parameters of a streamed decode problem. Serialized field names
/// match the conventional symbols so configuration files read like the
/// quantities they denote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtParams {
    /// Decode seconds per syndrome round (linear-decoder constant).
    #[serde(rename = "c")]
    pub decode_secs_per_round: f64,
    /// Syndrome rounds accumulated before the first magic-state consumption.
    #[serde(rename = "r")]
    pub initial_rounds: u64,
    /// Seconds per stabilizer measurement round.
    #[serde(rename = "T_s")]
    pub round_secs: f64,
    /// Round-trip interconnect latency in seconds.
    #[serde(rename = "T_l")]
    pub link_rtt_secs: f64,
    /// Number of sequential feedforward gates to schedule.
    #[serde(rename = "j_max", default = "default_max_gates")]
    pub max_gates: u32,
}

fn default_max_gates() -> u32 {
    8
}

impl Default for RtParams {
    /// Reference point: 1.4 µs rounds, 20 µs round trip, 33 warm-up rounds,
    /// decoder at half the round rate.
    fn default() -> Self {
        RtParams {
            decode_secs_per_round: 0.7e-6,
            initial_rounds: 33,
            round_secs: 1.4e-6,
            link_rtt_secs: 20e-6,
            max_gates: 8,
        }
    }
}

impl RtParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.decode_secs_per_round.is_nan() || self.decode_secs_per_round <= 0.0 {
            return Err(SimError::NonPositive { field: "c" });
        }
        if self.initial_rounds < 1 {
            return Err(SimError::ZeroCount { field: "r" });
        }
        if self.round_secs.is_nan() || self.round_secs <= 0.0 {
            return Err(SimError::NonPositive { field: "T_s" });
        }
        if self.link_rtt_secs.is_nan() || self.link_rtt_secs <= 0.0 {
            return Err(SimError::NonPositive { field: "T_l" });
        }
        if self.max_gates < 1 {
            return Err(SimError::ZeroCount { field: "j_max" });
        }
        Ok(())
    }
}

/// Parallel-window geometry and resources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowParams {
    /// Rounds per commit region.
    #[serde(rename = "n_com")]
    pub commit_rounds: u64,
    /// Buffer rounds flanking each commit region's decode input.
    #[serde(rename = "n_buf")]
    pub buffer_rounds: u64,
    /// Rounds per cleanup region.
    #[serde(rename = "n_W")]
    pub cleanup_rounds: u64,
    /// Parallel decode workers.
    #[serde(rename = "N_par")]
    pub workers: u64,
    /// Seconds to decode one region.
    #[serde(rename = "T_DEC")]
    pub region_decode_secs: f64,
    /// Spatial regions per window generation; multiplies the per-generation
    /// workload without modeling lattice geometry.
    #[serde(default = "default_spatial_regions")]
    pub spatial_regions: u64,
}

fn default_spatial_regions() -> u64 {
    1
}

impl WindowParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.commit_rounds < 1 {
            return Err(SimError::InvalidGeometry);
        }
        if self.workers < 1 {
            return Err(SimError::ZeroCount { field: "N_par" });
        }
        if self.region_decode_secs.is_nan() || self.region_decode_secs <= 0.0 {
            return Err(SimError::NonPositive { field: "T_DEC" });
        }
        if self.spatial_regions < 1 {
            return Err(SimError::ZeroCount {
                field: "spatial_regions",
            });
        }
        Ok(())
    }

    /// Rounds spanned by one commit + cleanup generation.
    pub fn generation_rounds(&self) -> u64 {
        self.commit_rounds + self.cleanup_rounds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serde_names_match_conventional_symbols() {
        let json = r#"{"c": 0.7e-6, "r": 33, "T_s": 1.4e-6, "T_l": 20e-6, "j_max": 4}"#;
        let params: RtParams = serde_json::from_str(json).unwrap();
        assert_eq!(params.initial_rounds, 33);
        assert_eq!(params.max_gates, 4);
        let back = serde_json::to_value(&params).unwrap();
        assert!(back.get("T_s").is_some());
        assert!(back.get("c").is_some());
    }

    #[test]
    fn missing_field_error_names_it() {
        let json = r#"{"c": 0.7e-6, "r": 33, "T_l": 20e-6}"#;
        let err = serde_json::from_str::<RtParams>(json).unwrap_err();
        assert!(err.to_string().contains("T_s"), "error was: {err}");
    }

    #[test]
    fn validation_rejects_nonpositive_fields() {
        let zero_round = RtParams {
            round_secs: 0.0,
            ..RtParams::default()
        };
        assert_eq!(
            zero_round.validate(),
            Err(SimError::NonPositive { field: "T_s" })
        );
        let negative_decode = RtParams {
            decode_secs_per_round: -1.0,
            ..RtParams::default()
        };
        assert_eq!(
            negative_decode.validate(),
            Err(SimError::NonPositive { field: "c" })
        );
    }
}

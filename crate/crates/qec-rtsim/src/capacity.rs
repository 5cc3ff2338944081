use serde::{Deserialize, Serialize};

use crate::SimError;

/// Published matching-decoder compute anchors: (logical qubits, program
/// depth, FLOP/s).
pub const MATCHING_ANCHORS: [(u64, f64, f64); 2] =
    [(100, 1e6, 200e12), (1000, 1e9, 1e15)];

/// Inputs to the decoder-compute capacity planner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CapacityInputs {
    /// Inference-style decoder: FLOP/s per logical qubit is
    /// `flop_per_param_per_qubit × params_per_model × cycle_rate_hz`.
    Ai {
        params_per_model: f64,
        #[serde(default = "default_flop_per_param")]
        flop_per_param_per_qubit: f64,
        cycle_rate_hz: f64,
        n_logical_qubits: f64,
        headroom_factor: f64,
    },
    /// Matching-decoder mode: echoes published anchor points.
    Matching { qubits: u64, depth: f64 },
}

fn default_flop_per_param() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityReport {
    pub flop_per_s_per_qubit: f64,
    pub total_flop_per_s: f64,
    pub with_headroom: f64,
}

/// Pure arithmetic, no tolerance: inputs at round power-of-ten scales
/// reproduce their reference numbers exactly.
pub fn plan_capacity(inputs: &CapacityInputs) -> Result<CapacityReport, SimError> {
    match *inputs {
        CapacityInputs::Ai {
            params_per_model,
            flop_per_param_per_qubit,
            cycle_rate_hz,
            n_logical_qubits,
            headroom_factor,
        } => {
            for (value, field) in [
                (params_per_model, "params_per_model"),
                (flop_per_param_per_qubit, "flop_per_param_per_qubit"),
                (cycle_rate_hz, "cycle_rate_hz"),
                (n_logical_qubits, "n_logical_qubits"),
            ] {
                if value.is_nan() || value <= 0.0 {
                    return Err(SimError::NonPositive { field });
                }
            }
            if headroom_factor < 1.0 {
                return Err(SimError::HeadroomBelowOne(headroom_factor));
            }
            let per_qubit = flop_per_param_per_qubit * params_per_model * cycle_rate_hz;
            let total = per_qubit * n_logical_qubits;
            Ok(CapacityReport {
                flop_per_s_per_qubit: per_qubit,
                total_flop_per_s: total,
                with_headroom: total * headroom_factor,
            })
        }
        CapacityInputs::Matching { qubits, depth } => {
            let anchor = MATCHING_ANCHORS
                .iter()
                .find(|&&(q, d, _)| q == qubits && d == depth)
                .ok_or(SimError::UnknownAnchor { qubits, depth })?;
            let flops = anchor.2;
            Ok(CapacityReport {
                flop_per_s_per_qubit: flops / qubits as f64,
                total_flop_per_s: flops,
                with_headroom: flops,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ai_mode_reference_numbers_are_exact() {
        let report = plan_capacity(&CapacityInputs::Ai {
            params_per_model: 25e6,
            flop_per_param_per_qubit: 2.0,
            cycle_rate_hz: 1e6,
            n_logical_qubits: 100.0,
            headroom_factor: 10.0,
        })
        .unwrap();
        assert_eq!(report.flop_per_s_per_qubit, 50e12);
        assert_eq!(report.total_flop_per_s, 5e15);
        assert_eq!(report.with_headroom, 5e16);
    }

    #[test]
    fn matching_anchors_echo_exactly() {
        let small = plan_capacity(&CapacityInputs::Matching {
            qubits: 100,
            depth: 1e6,
        })
        .unwrap();
        assert_eq!(small.total_flop_per_s, 200e12);
        let large = plan_capacity(&CapacityInputs::Matching {
            qubits: 1000,
            depth: 1e9,
        })
        .unwrap();
        assert_eq!(large.total_flop_per_s, 1e15);
    }

    #[test]
    fn unknown_anchor_rejected() {
        assert!(matches!(
            plan_capacity(&CapacityInputs::Matching {
                qubits: 7,
                depth: 1.0
            }),
            Err(SimError::UnknownAnchor { .. })
        ));
    }

    #[test]
    fn headroom_below_one_rejected() {
        assert_eq!(
            plan_capacity(&CapacityInputs::Ai {
                params_per_model: 1.0,
                flop_per_param_per_qubit: 2.0,
                cycle_rate_hz: 1.0,
                n_logical_qubits: 1.0,
                headroom_factor: 0.5,
            }),
            Err(SimError::HeadroomBelowOne(0.5))
        );
    }

    #[test]
    fn json_shape_is_tagged_by_mode() {
        let inputs: CapacityInputs = serde_json::from_str(
            r#"{"mode":"ai","params_per_model":25e6,"cycle_rate_hz":1e6,
                "n_logical_qubits":100,"headroom_factor":10}"#,
        )
        .unwrap();
        let report = plan_capacity(&inputs).unwrap();
        assert_eq!(report.with_headroom, 5e16);
    }
}

use crate::{RtParams, SimError};

/// Relative distance between the per-round decode time and the round period
/// below which the two are treated as exactly balanced and the analytic
/// limit branch is used (the closed form divides by their difference).
pub const BALANCE_EPS: f64 = 1e-9;

/// Sliding-window wait time before the `j`-th sequential feedforward gate,
/// in closed form:
///
/// ```text
/// T(j) = c^j r / T_s^(j-1)  +  T_l * T_s^(1-j) (c^j - T_s^j) / (c - T_s)
/// ```
///
/// At c = T_s the bracket degenerates; the limit is `r T_s + j T_l`.
pub fn wait_time_closed_form(params: &RtParams, j: u32) -> Result<f64, SimError> {
    params.validate()?;
    if j < 1 {
        return Err(SimError::GateIndexZero);
    }
    let c = params.decode_secs_per_round;
    let ts = params.round_secs;
    let tl = params.link_rtt_secs;
    let r = params.initial_rounds as f64;
    if (c - ts).abs() / ts < BALANCE_EPS {
        return Ok(r * ts + j as f64 * tl);
    }
    let growth = (c / ts).powi(j as i32);
    Ok(r * ts * growth + tl * ts * (growth - 1.0) / (c - ts))
}

/// The same wait time by iterating the affine recurrence
///
/// ```text
/// T(0) = r T_s,   T(k) = (c / T_s) T(k-1) + T_l
/// ```
///
/// which needs no special case at c = T_s. This is the independent oracle
/// the closed form is checked against.
pub fn wait_time_recurrence(params: &RtParams, j: u32) -> Result<f64, SimError> {
    params.validate()?;
    let ratio = params.decode_secs_per_round / params.round_secs;
    let mut wait = params.initial_rounds as f64 * params.round_secs;
    for _ in 0..j {
        wait = ratio * wait + params.link_rtt_secs;
    }
    Ok(wait)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_params(c: f64) -> RtParams {
        RtParams {
            decode_secs_per_round: c,
            initial_rounds: 33,
            round_secs: 1.4e-6,
            link_rtt_secs: 20e-6,
            max_gates: 8,
        }
    }

    #[test]
    fn first_gate_wait_collapses_to_cr_plus_tl() {
        let params = reference_params(0.7e-6);
        let expected = 0.7e-6 * 33.0 + 20e-6;
        assert!((wait_time_closed_form(&params, 1).unwrap() - expected).abs() < 1e-18);
        assert!((wait_time_recurrence(&params, 1).unwrap() - expected).abs() < 1e-18);
    }

    #[test]
    fn recurrence_seed_is_initial_accumulation() {
        let params = reference_params(0.7e-6);
        let wait = wait_time_recurrence(&params, 0).unwrap();
        assert!((wait - 33.0 * 1.4e-6).abs() < 1e-18);
    }

    #[test]
    fn balanced_rates_take_the_limit_branch() {
        let params = reference_params(1.4e-6);
        for j in 1..=8u32 {
            let closed = wait_time_closed_form(&params, j).unwrap();
            let expected = 33.0 * 1.4e-6 + j as f64 * 20e-6;
            assert!(
                (closed - expected).abs() < 1e-18,
                "j={j}: {closed} vs {expected}"
            );
            let recurrence = wait_time_recurrence(&params, j).unwrap();
            assert!((closed - recurrence).abs() / closed < 1e-12);
        }
    }

    #[test]
    fn closed_form_tracks_recurrence_below_balance() {
        let params = reference_params(0.7e-6);
        for j in 1..=8u32 {
            let closed = wait_time_closed_form(&params, j).unwrap();
            let oracle = wait_time_recurrence(&params, j).unwrap();
            assert!(
                (closed - oracle).abs() / oracle < 1e-12,
                "j={j}: {closed} vs {oracle}"
            );
        }
    }

    #[test]
    fn growth_ratio_converges_to_rate_ratio() {
        // Above balance the wait ratio tends to c/T_s.
        let fast_growth = RtParams {
            decode_secs_per_round: 1.2,
            round_secs: 1.0,
            link_rtt_secs: 0.5,
            initial_rounds: 10,
            max_gates: 8,
        };
        let w100 = wait_time_recurrence(&fast_growth, 100).unwrap();
        let w101 = wait_time_recurrence(&fast_growth, 101).unwrap();
        assert!((w101 / w100 - 1.2).abs() < 1e-6);

        // Below balance the wait converges to T_l / (1 - c/T_s).
        let contracting = RtParams {
            decode_secs_per_round: 0.5,
            round_secs: 1.0,
            link_rtt_secs: 1.0,
            initial_rounds: 10,
            max_gates: 8,
        };
        let w60 = wait_time_recurrence(&contracting, 60).unwrap();
        assert!((w60 - 2.0).abs() < 1e-9, "fixed point was {w60}");
    }

    #[test]
    fn gate_index_zero_rejected_by_closed_form() {
        assert_eq!(
            wait_time_closed_form(&reference_params(0.7e-6), 0),
            Err(SimError::GateIndexZero)
        );
    }
}

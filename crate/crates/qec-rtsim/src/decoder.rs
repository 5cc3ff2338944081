use crate::SimError;

/// Outcome of decoding one syndrome history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepetitionDecodeOutcome {
    /// Accumulated per-qubit correction (X) mask.
    pub correction_mask: Vec<bool>,
    /// Parity of the corrections over the logical support: whether the
    /// logical readout must be flipped.
    pub logical_flip: bool,
}

/// Lookup decoder for the distance-3 bit-flip repetition code.
///
/// The stream of per-round syndrome pairs is differenced into detector
/// events (a round's pair XOR the previous round's), and each event is
/// mapped through the exact single-error table:
/// `(0,0)` → none, `(1,0)` → qubit 0, `(1,1)` → qubit 1, `(0,1)` → qubit 2.
/// Corrections accumulate by XOR, so this is maximum-likelihood for at most
/// one new error per round.
#[derive(Debug, Clone)]
pub struct RepetitionDecoder {
    n_data: usize,
    support: Vec<bool>,
}

impl RepetitionDecoder {
    /// Distance-3 decoder with the logical support on data qubit 0.
    pub fn new() -> Self {
        RepetitionDecoder {
            n_data: 3,
            support: vec![true, false, false],
        }
    }

    pub fn with_support(support: Vec<bool>) -> Self {
        assert_eq!(support.len(), 3);
        RepetitionDecoder { n_data: 3, support }
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    fn lookup(event: (bool, bool)) -> Option<usize> {
        match event {
            (false, false) => None,
            (true, false) => Some(0),
            (true, true) => Some(1),
            (false, true) => Some(2),
        }
    }

    pub fn decode(&self, history: &[Vec<bool>]) -> Result<RepetitionDecodeOutcome, SimError> {
        let width = self.n_data - 1;
        let mut mask = vec![false; self.n_data];
        let mut previous = vec![false; width];
        for (round, syndrome) in history.iter().enumerate() {
            if syndrome.len() != width {
                return Err(SimError::MalformedSyndrome {
                    round,
                    width: syndrome.len(),
                    expected: width,
                });
            }
            let event = (syndrome[0] ^ previous[0], syndrome[1] ^ previous[1]);
            if let Some(qubit) = Self::lookup(event) {
                mask[qubit] ^= true;
            }
            previous.copy_from_slice(syndrome);
        }
        let logical_flip = mask
            .iter()
            .zip(&self.support)
            .filter(|(&m, &s)| m && s)
            .count()
            % 2
            == 1;
        Ok(RepetitionDecodeOutcome {
            correction_mask: mask,
            logical_flip,
        })
    }
}

impl Default for RepetitionDecoder {
    fn default() -> Self {
        Self::new()
    }
}

/// Decodes with the default distance-3 decoder.
pub fn decode_repetition(history: &[Vec<bool>]) -> Result<RepetitionDecodeOutcome, SimError> {
    RepetitionDecoder::new().decode(history)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_history_decodes_to_nothing() {
        let history = vec![vec![false, false]; 5];
        let outcome = decode_repetition(&history).unwrap();
        assert_eq!(outcome.correction_mask, vec![false, false, false]);
        assert!(!outcome.logical_flip);
    }

    #[test]
    fn single_round_lookup_cases() {
        let cases = [
            ((false, false), vec![false, false, false], false),
            ((true, false), vec![true, false, false], true),
            ((true, true), vec![false, true, false], false),
            ((false, true), vec![false, false, true], false),
        ];
        for ((s0, s1), mask, flip) in cases {
            let outcome = decode_repetition(&[vec![s0, s1]]).unwrap();
            assert_eq!(outcome.correction_mask, mask, "syndrome ({s0},{s1})");
            assert_eq!(outcome.logical_flip, flip, "syndrome ({s0},{s1})");
        }
    }

    #[test]
    fn malformed_width_rejected() {
        let err = decode_repetition(&[vec![true]]).unwrap_err();
        assert_eq!(
            err,
            SimError::MalformedSyndrome {
                round: 0,
                width: 1,
                expected: 2
            }
        );
    }

    /// Brute-force oracle: evolve the error frame by hand for a single
    /// injected flip, emit the measured syndrome stream, and compare the
    /// decoder's verdict with the true logical effect.
    #[test]
    fn exhaustive_single_error_injections_decode_correctly() {
        let rounds = 5usize;
        for inject_round in 0..rounds {
            for qubit in 0..3usize {
                let mut frame = [false; 3];
                let mut history = Vec::with_capacity(rounds);
                for round in 0..rounds {
                    if round == inject_round {
                        frame[qubit] ^= true;
                    }
                    history.push(vec![frame[0] ^ frame[1], frame[1] ^ frame[2]]);
                }
                let truth = frame[0]; // logical support is qubit 0
                let outcome = decode_repetition(&history).unwrap();
                assert_eq!(
                    outcome.logical_flip, truth,
                    "injection at round {inject_round}, qubit {qubit}"
                );
                let mut expected_mask = [false; 3];
                expected_mask[qubit] = true;
                assert_eq!(outcome.correction_mask, expected_mask.to_vec());
            }
        }
    }
}

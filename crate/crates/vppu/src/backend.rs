use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Measuring this channel polls the repeat-until-success flag.
pub const FLAG_CHANNEL: u8 = 0xFE;

/// Measuring this channel reads the logical observable.
pub const LOGICAL_CHANNEL: u8 = 0xFF;

/// Source of measurement outcomes for a program run.
///
/// Implementations must be deterministic: an identical seed and call
/// sequence produces an identical bit sequence.
pub trait PhysicalBackend: Send {
    fn measure(&mut self, channel: u8, tick: u64) -> Result<bool, String>;
    fn reset(&mut self, seed: u64);
}

/// Pauli-frame model of a distance-`n_data` bit-flip repetition code.
///
/// Channel map:
/// - channels `0..n_data-1` are syndrome channels; channel `i` returns the
///   parity of data bits `i` and `i+1` of the current error frame. Measuring
///   channel 0 begins a new round: per-qubit noise flips (probability
///   `p_flip`) and any injected errors scheduled for that round are applied
///   first.
/// - [`LOGICAL_CHANNEL`] returns the parity of the frame over the logical
///   support mask (default: data qubit 0).
/// - [`FLAG_CHANNEL`] drives repeat-until-success structure: it reads 1
///   (attempt failed, retry) for the first `distill_failures` polls, then 0.
pub struct RepetitionBackend {
    n_data: usize,
    p_flip: f64,
    seed: u64,
    rng: ChaCha8Rng,
    frame: Vec<bool>,
    /// (round, qubit) sites to flip; toggled so a double injection cancels.
    injections: HashSet<(u64, usize)>,
    support: Vec<bool>,
    round: Option<u64>,
    distill_failures: u32,
    flag_reads: u32,
}

impl RepetitionBackend {
    pub fn new(n_data: usize, p_flip: f64, seed: u64) -> Self {
        assert!(n_data >= 2, "repetition code needs at least two data qubits");
        let mut support = vec![false; n_data];
        support[0] = true;
        RepetitionBackend {
            n_data,
            p_flip,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            frame: vec![false; n_data],
            injections: HashSet::new(),
            support,
            round: None,
            distill_failures: 0,
            flag_reads: 0,
        }
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    /// Number of failed distillation attempts before the flag reads success.
    pub fn set_distill_failures(&mut self, failures: u32) {
        self.distill_failures = failures;
    }

    /// Replaces the logical support mask. Must have one bit per data qubit.
    pub fn set_support(&mut self, support: Vec<bool>) {
        assert_eq!(support.len(), self.n_data);
        self.support = support;
    }

    /// Schedules a bit flip on `data_qubit` at the start of `round`.
    /// Injecting the same site twice cancels the flip.
    pub fn inject_error(&mut self, round: u64, data_qubit: usize) -> Result<(), String> {
        if data_qubit >= self.n_data {
            return Err(format!(
                "data qubit {data_qubit} out of range ({} data qubits)",
                self.n_data
            ));
        }
        if !self.injections.insert((round, data_qubit)) {
            self.injections.remove(&(round, data_qubit));
        }
        Ok(())
    }

    pub fn current_round(&self) -> Option<u64> {
        self.round
    }

    fn begin_round(&mut self) {
        let round = self.round.map_or(0, |r| r + 1);
        self.round = Some(round);
        if self.p_flip > 0.0 {
            for q in 0..self.n_data {
                if self.rng.gen::<f64>() < self.p_flip {
                    self.frame[q] ^= true;
                }
            }
        }
        for q in 0..self.n_data {
            if self.injections.contains(&(round, q)) {
                self.frame[q] ^= true;
            }
        }
    }
}

impl PhysicalBackend for RepetitionBackend {
    fn measure(&mut self, channel: u8, _tick: u64) -> Result<bool, String> {
        match channel {
            FLAG_CHANNEL => {
                let retry = self.flag_reads < self.distill_failures;
                self.flag_reads += 1;
                Ok(retry)
            }
            LOGICAL_CHANNEL => Ok(self
                .frame
                .iter()
                .zip(&self.support)
                .filter(|(&f, &s)| f && s)
                .count()
                % 2
                == 1),
            ch if (ch as usize) < self.n_data - 1 => {
                if ch == 0 {
                    self.begin_round();
                }
                let i = ch as usize;
                Ok(self.frame[i] ^ self.frame[i + 1])
            }
            ch => Err(format!(
                "channel {ch} not wired (syndrome channels 0..{}, flag 0xFE, logical 0xFF)",
                self.n_data - 1
            )),
        }
    }

    fn reset(&mut self, seed: u64) {
        self.seed = seed;
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.frame.iter_mut().for_each(|b| *b = false);
        self.round = None;
        self.flag_reads = 0;
        // Injections are configuration, not state; they survive a reset.
    }
}

/// Backend returning a fixed bit pattern per channel, for interpreter tests
/// that need measurement values independent of any code model.
pub struct CountingBackend {
    calls: u64,
}

impl CountingBackend {
    pub fn new() -> Self {
        CountingBackend { calls: 0 }
    }
}

impl Default for CountingBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl PhysicalBackend for CountingBackend {
    fn measure(&mut self, channel: u8, tick: u64) -> Result<bool, String> {
        self.calls += 1;
        // Mix the call index, channel, and tick so traces are sensitive to
        // all three without randomness.
        Ok((self.calls ^ channel as u64 ^ tick) & 1 == 1)
    }

    fn reset(&mut self, _seed: u64) {
        self.calls = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syndromes(backend: &mut RepetitionBackend) -> (bool, bool) {
        let s0 = backend.measure(0, 0).unwrap();
        let s1 = backend.measure(1, 0).unwrap();
        (s0, s1)
    }

    #[test]
    fn noiseless_syndromes_are_zero() {
        let mut backend = RepetitionBackend::new(3, 0.0, 1);
        for _ in 0..5 {
            assert_eq!(syndromes(&mut backend), (false, false));
        }
    }

    #[test]
    fn injection_at_round_zero_qubit_zero_reads_one_zero() {
        let mut backend = RepetitionBackend::new(3, 0.0, 1);
        backend.inject_error(0, 0).unwrap();
        assert_eq!(syndromes(&mut backend), (true, false));
    }

    #[test]
    fn middle_qubit_injection_appears_and_persists() {
        let mut backend = RepetitionBackend::new(3, 0.0, 1);
        backend.inject_error(2, 1).unwrap();
        let expected = [
            (false, false),
            (false, false),
            (true, true),
            (true, true),
            (true, true),
        ];
        for want in expected {
            assert_eq!(syndromes(&mut backend), want);
        }
    }

    #[test]
    fn double_injection_cancels() {
        let mut backend = RepetitionBackend::new(3, 0.0, 1);
        backend.inject_error(0, 1).unwrap();
        backend.inject_error(0, 1).unwrap();
        for _ in 0..3 {
            assert_eq!(syndromes(&mut backend), (false, false));
        }
    }

    #[test]
    fn qubit_index_out_of_range_rejected() {
        let mut backend = RepetitionBackend::new(3, 0.0, 1);
        assert!(backend.inject_error(0, 3).is_err());
    }

    #[test]
    fn logical_channel_follows_support() {
        let mut backend = RepetitionBackend::new(3, 0.0, 1);
        backend.inject_error(0, 0).unwrap();
        syndromes(&mut backend);
        assert!(backend.measure(LOGICAL_CHANNEL, 0).unwrap());

        let mut other = RepetitionBackend::new(3, 0.0, 1);
        other.inject_error(0, 2).unwrap();
        syndromes(&mut other);
        assert!(!other.measure(LOGICAL_CHANNEL, 0).unwrap());
    }

    #[test]
    fn flag_channel_counts_down_failures() {
        let mut backend = RepetitionBackend::new(3, 0.0, 1);
        backend.set_distill_failures(2);
        assert!(backend.measure(FLAG_CHANNEL, 0).unwrap());
        assert!(backend.measure(FLAG_CHANNEL, 0).unwrap());
        assert!(!backend.measure(FLAG_CHANNEL, 0).unwrap());
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let run = |seed| {
            let mut backend = RepetitionBackend::new(3, 0.3, seed);
            (0..20).map(|_| syndromes(&mut backend)).collect::<Vec<_>>()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }

    #[test]
    fn unknown_channel_rejected() {
        let mut backend = RepetitionBackend::new(3, 0.0, 1);
        assert!(backend.measure(2, 0).is_err());
        assert!(backend.measure(40, 0).is_err());
    }
}

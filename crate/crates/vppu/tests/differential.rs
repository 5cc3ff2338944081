//! Dual-interpreter differential testing and clock-additivity properties.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qlink_vppu::{
    assemble, disassemble, execute, execute_bytes, reference, CountingBackend, ExecLimits,
    Instruction, NullBridge, RepetitionBackend,
};

/// Random straight-line program: no branches, no callbacks, ends in HALT.
/// Measurements stay on channels the repetition backend wires up.
fn random_straight_line(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<Instruction> {
    let len = rng.gen_range(1..=max_len);
    let mut program = Vec::with_capacity(len + 1);
    for _ in 0..len {
        let insn = match rng.gen_range(0..6) {
            0 => Instruction::Nop,
            1 => Instruction::Delay {
                ticks: rng.gen_range(0..50),
            },
            2 => Instruction::Pulse {
                channel: rng.gen_range(0..4),
                waveform_id: rng.gen_range(0..100),
                duration_ticks: rng.gen_range(0..20),
            },
            3 => Instruction::Measure {
                channel: *[0u8, 1, 0xFE, 0xFF].get(rng.gen_range(0..4)).unwrap(),
                dest_reg: rng.gen_range(0..16),
            },
            4 => Instruction::Xorr {
                dst: rng.gen_range(0..16),
                a: rng.gen_range(0..16),
                b: rng.gen_range(0..16),
            },
            _ => Instruction::Loadi {
                dst: rng.gen_range(0..16),
                imm: rng.gen(),
            },
        };
        program.push(insn);
    }
    program.push(Instruction::Halt);
    program
}

fn encode(program: &[Instruction]) -> Vec<u8> {
    program.iter().flat_map(|i| i.encode()).collect()
}

#[test]
fn interpreters_agree_on_random_straight_line_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..1000 {
        let program = random_straight_line(&mut rng, 40);
        let bytes = encode(&program);
        let seed = case as u64;
        let limits = ExecLimits::default();

        let mut backend_a = RepetitionBackend::new(3, 0.25, seed);
        let a = execute_bytes(&bytes, &mut backend_a, &NullBridge, &limits, &[]).unwrap();
        let mut backend_b = RepetitionBackend::new(3, 0.25, seed);
        let b = reference::execute(&bytes, &mut backend_b, &NullBridge, &limits, &[]).unwrap();

        assert_eq!(a, b, "case {case} diverged:\n{}", disassemble(&bytes).unwrap());
        assert_eq!(a.trace_text(), b.trace_text());
    }
}

#[test]
fn repeated_seeded_runs_are_byte_identical() {
    let src = "\
MEASURE 0, r1
MEASURE 1, r1
MEASURE 0, r1
MEASURE 1, r1
PULSE 2, 7, 3
MEASURE 255, r2
XORR r15, r1, r2
HALT";
    let bytes = assemble(src).unwrap();
    let run = || {
        let mut backend = RepetitionBackend::new(3, 0.4, 1234);
        execute_bytes(&bytes, &mut backend, &NullBridge, &ExecLimits::default(), &[]).unwrap()
    };
    let first = run();
    for _ in 0..5 {
        let again = run();
        assert_eq!(first, again);
        assert_eq!(first.trace_text(), again.trace_text());
    }
}

proptest! {
    /// For straight-line programs the final clock is the sum of
    /// per-instruction durations.
    #[test]
    fn clock_is_additive_over_straight_line_programs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let program = random_straight_line(&mut rng, 30);
        let expected: u64 = program.iter().map(|i| i.duration_ticks()).sum();
        let mut backend = CountingBackend::new();
        let state = execute(&program, &mut backend, &NullBridge, &ExecLimits::default(), &[])
            .unwrap();
        prop_assert_eq!(state.dtd_clock, expected);
    }

    /// assemble ∘ disassemble ∘ assemble is byte-identical.
    #[test]
    fn assembler_roundtrips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bytes = encode(&random_straight_line(&mut rng, 30));
        let text = disassemble(&bytes).unwrap();
        prop_assert_eq!(assemble(&text).unwrap(), bytes);
    }
}

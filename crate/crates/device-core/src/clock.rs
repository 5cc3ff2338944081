use std::time::Instant;

/// Default deterministic-domain tick width: 4 ns, i.e. a 250 MHz pulse
/// processor clock.
pub const DEFAULT_DTD_TICK_NS: u64 = 4;

/// The two clock sources the runtime distinguishes.
///
/// The deterministic time domain (DTD) advances in integer ticks of a fixed
/// width; DTD time in nanoseconds is always `tick_count * dtd_tick_ns`,
/// computed in integer arithmetic. The real-time domain (RTD) reads a
/// monotonic nanosecond counter anchored at construction.
#[derive(Debug, Clone)]
pub struct ClockDomains {
    dtd_tick_ns: u64,
    rtd_epoch: Instant,
}

impl ClockDomains {
    /// Panics if `dtd_tick_ns` is zero.
    pub fn new(dtd_tick_ns: u64) -> Self {
        assert!(dtd_tick_ns > 0, "dtd tick width must be positive");
        ClockDomains {
            dtd_tick_ns,
            rtd_epoch: Instant::now(),
        }
    }

    pub fn dtd_tick_ns(&self) -> u64 {
        self.dtd_tick_ns
    }

    /// Converts a DTD tick count to nanoseconds, exactly.
    pub fn dtd_time_ns(&self, ticks: u64) -> u64 {
        ticks * self.dtd_tick_ns
    }

    /// Monotonic nanoseconds elapsed since this clock was created.
    pub fn rtd_now_ns(&self) -> u64 {
        self.rtd_epoch.elapsed().as_nanos() as u64
    }
}

impl Default for ClockDomains {
    fn default() -> Self {
        ClockDomains::new(DEFAULT_DTD_TICK_NS)
    }
}

use serde::Serialize;

use crate::RtError;

/// How the warm-up boundary is found.
#[derive(Debug, Clone, Copy)]
pub enum WarmupRule {
    /// Boundary = first index from which the trailing 50-sample median stays
    /// within 3×MAD of the steady tail's median.
    Auto,
    /// Fixed sample count override.
    Fixed(usize),
}

/// Moments of one segment of the sample series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentStats {
    pub n: usize,
    pub mean_ns: f64,
    pub median_ns: f64,
    pub stddev_ns: f64,
    pub min_ns: u64,
    pub max_ns: u64,
}

/// Fixed-width latency histogram over the full series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub width_ns: u64,
    pub origin_ns: u64,
    pub counts: Vec<u64>,
}

/// Latency statistics. The top-level moments describe the steady-state
/// segment; the warm-up segment, when present, is reported separately. The
/// histogram covers every sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyStats {
    pub n: usize,
    pub mean_ns: f64,
    pub median_ns: f64,
    pub stddev_ns: f64,
    pub min_ns: u64,
    pub max_ns: u64,
    pub warmup_boundary: usize,
    pub warmup: Option<SegmentStats>,
    pub histogram: Histogram,
}

const DETECTOR_WINDOW: usize = 50;
const MAD_MULTIPLIER: f64 = 3.0;
const MAX_HISTOGRAM_BINS: u64 = 4_000_000;

fn median_of_sorted(sorted: &[u64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
    }
}

fn median(values: &[u64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    median_of_sorted(&sorted)
}

fn segment_stats(values: &[u64]) -> SegmentStats {
    // Moments are accumulated in sorted order so that any permutation of
    // the same samples produces bit-identical results.
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let mean = sorted.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let stddev = if n > 1 {
        let ss: f64 = sorted.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
        (ss / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    SegmentStats {
        n,
        mean_ns: mean,
        median_ns: median_of_sorted(&sorted),
        stddev_ns: stddev,
        min_ns: sorted[0],
        max_ns: sorted[n - 1],
    }
}

/// Finds the first index from which every trailing `DETECTOR_WINDOW`-sample
/// median stays within 3×MAD of the steady tail's median. The tail is the
/// last quarter of the series (at least the window size).
fn detect_warmup_boundary(samples: &[u64]) -> usize {
    let n = samples.len();
    if n < 2 * DETECTOR_WINDOW {
        return 0;
    }
    let tail_len = (n / 4).max(DETECTOR_WINDOW).min(n);
    let tail = &samples[n - tail_len..];
    let tail_median = median(tail);
    let deviations: Vec<u64> = tail
        .iter()
        .map(|&v| (v as f64 - tail_median).abs() as u64)
        .collect();
    let mad = median(&deviations);
    let band = MAD_MULTIPLIER * mad;

    let mut boundary = 0usize;
    for k in 0..n {
        let start = k.saturating_sub(DETECTOR_WINDOW - 1);
        let window_median = median(&samples[start..=k]);
        if (window_median - tail_median).abs() > band {
            boundary = k + 1;
        }
    }
    if boundary >= n {
        0 // never settled; treat the whole series as steady rather than empty
    } else {
        boundary
    }
}

/// Computes steady-state statistics, warm-up segment statistics, and a
/// histogram over every sample.
pub fn compute_stats(
    rtt_ns: &[u64],
    histogram_bin_ns: u64,
    rule: WarmupRule,
) -> Result<LatencyStats, RtError> {
    if rtt_ns.is_empty() {
        return Err(RtError::EmptySamples);
    }
    let bin = histogram_bin_ns.max(1);
    let boundary = match rule {
        WarmupRule::Auto => detect_warmup_boundary(rtt_ns),
        WarmupRule::Fixed(count) => count.min(rtt_ns.len().saturating_sub(1)),
    };
    let steady = segment_stats(&rtt_ns[boundary..]);
    let warmup = if boundary > 0 {
        Some(segment_stats(&rtt_ns[..boundary]))
    } else {
        None
    };

    let min_all = *rtt_ns.iter().min().unwrap();
    let max_all = *rtt_ns.iter().max().unwrap();
    let bins = (max_all - min_all) / bin + 1;
    if bins > MAX_HISTOGRAM_BINS {
        return Err(RtError::HistogramTooWide(bins));
    }
    let mut counts = vec![0u64; bins as usize];
    for &v in rtt_ns {
        counts[((v - min_all) / bin) as usize] += 1;
    }

    Ok(LatencyStats {
        n: rtt_ns.len(),
        mean_ns: steady.mean_ns,
        median_ns: steady.median_ns,
        stddev_ns: steady.stddev_ns,
        min_ns: steady.min_ns,
        max_ns: steady.max_ns,
        warmup_boundary: boundary,
        warmup,
        histogram: Histogram {
            width_ns: bin,
            origin_ns: min_all,
            counts,
        },
    })
}

/// One-line summary in the reporting style used for loopback benchmarks:
/// microsecond means to three decimals, standard deviation in whole
/// nanoseconds.
pub fn format_report_line(stats: &LatencyStats) -> String {
    format!(
        "mean {:.3} µs, median {:.3} µs, std {:.0} ns, max {:.2} µs over {} steady samples (warm-up {})",
        stats.mean_ns / 1000.0,
        stats.median_ns / 1000.0,
        stats.stddev_ns,
        stats.max_ns as f64 / 1000.0,
        stats.n - stats.warmup_boundary,
        stats.warmup_boundary,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_has_zero_spread() {
        let stats = compute_stats(&[1000; 64], 10, WarmupRule::Auto).unwrap();
        assert_eq!(stats.mean_ns, 1000.0);
        assert_eq!(stats.median_ns, 1000.0);
        assert_eq!(stats.stddev_ns, 0.0);
        assert_eq!(stats.min_ns, 1000);
        assert_eq!(stats.max_ns, 1000);
        assert_eq!(stats.warmup_boundary, 0);
        assert_eq!(stats.histogram.counts.iter().sum::<u64>(), 64);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(
            compute_stats(&[], 10, WarmupRule::Auto),
            Err(RtError::EmptySamples)
        ));
    }

    #[test]
    fn fixed_rule_overrides_detection() {
        let series: Vec<u64> = (0..200).map(|i| if i < 50 { 9000 } else { 1000 }).collect();
        let stats = compute_stats(&series, 10, WarmupRule::Fixed(50)).unwrap();
        assert_eq!(stats.warmup_boundary, 50);
        assert_eq!(stats.mean_ns, 1000.0);
        let warmup = stats.warmup.unwrap();
        assert_eq!(warmup.n, 50);
        assert_eq!(warmup.mean_ns, 9000.0);
    }

    #[test]
    fn histogram_counts_total_n() {
        let series: Vec<u64> = (0..1000).map(|i| 1000 + (i % 97)).collect();
        let stats = compute_stats(&series, 10, WarmupRule::Auto).unwrap();
        assert_eq!(stats.histogram.counts.iter().sum::<u64>(), 1000);
    }

    #[test]
    fn permutation_leaves_moments_unchanged() {
        let mut series: Vec<u64> = (0..500).map(|i| 3800 + (i * 7919) % 80).collect();
        let forward = compute_stats(&series, 10, WarmupRule::Fixed(0)).unwrap();
        series.reverse();
        let reversed = compute_stats(&series, 10, WarmupRule::Fixed(0)).unwrap();
        assert_eq!(forward.mean_ns, reversed.mean_ns);
        assert_eq!(forward.stddev_ns, reversed.stddev_ns);
        assert_eq!(forward.median_ns, reversed.median_ns);
        assert_eq!(forward.min_ns, reversed.min_ns);
        assert_eq!(forward.max_ns, reversed.max_ns);
        assert_eq!(forward.histogram, reversed.histogram);
    }
}

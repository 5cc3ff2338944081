use std::net::UdpSocket;
use std::sync::mpsc::RecvTimeoutError;
use std::time::{Duration, Instant};

use crate::{
    decode_frame, encode_frame, Frame, InprocEcho, LoopbackPayload, MsgType, RtError,
    LOOPBACK_PAYLOAD_BYTES,
};

/// Packet numbers are 16-bit on the wire; one run may not wrap the counter
/// more than once, so accounting with a 32-bit virtual counter stays
/// unambiguous.
pub const MAX_PACKETS_PER_RUN: u64 = 65536;

/// One echoed packet, timed on the client's monotonic clock (zero-based at
/// client start).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatencySample {
    /// Virtual (unwrapped) packet number.
    pub packet_number: u32,
    pub send_ts_ns: u64,
    pub recv_ts_ns: u64,
    pub rtt_ns: u64,
}

#[derive(Debug, Clone)]
pub struct MeasureConfig {
    pub n_packets: u64,
    pub interval_ns: u64,
    /// Frame payload size; the loopback layout occupies the first 32 bytes
    /// and anything beyond is zero filler.
    pub payload_bytes: usize,
    /// Give up if no echo arrives for this long.
    pub idle_timeout: Duration,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            n_packets: 1000,
            interval_ns: 0,
            payload_bytes: LOOPBACK_PAYLOAD_BYTES,
            idle_timeout: Duration::from_millis(500),
        }
    }
}

/// Result of a measurement run: samples ordered by packet number plus the
/// packet numbers that were never echoed. Gaps are reported, not healed.
#[derive(Debug, Clone)]
pub struct MeasureOutcome {
    pub samples: Vec<LatencySample>,
    pub gaps: Vec<u32>,
}

/// Sending half of a loopback transport.
pub type SendFn = Box<dyn FnMut(&[u8]) -> Result<(), RtError> + Send>;

/// Receiving half: polls for the next echoed datagram within the timeout.
pub type RecvFn = Box<dyn FnMut(Duration) -> Result<Option<Vec<u8>>, RtError> + Send>;

/// Split send/receive halves of a loopback transport, so the sender can
/// pace packets on its own thread while the receiver drains echoes.
pub struct TransportPair {
    pub send: SendFn,
    pub recv: RecvFn,
}

impl TransportPair {
    /// Datagram transport aimed at a UDP echo endpoint.
    pub fn udp(remote: std::net::SocketAddr) -> Result<TransportPair, RtError> {
        let socket = UdpSocket::bind(("127.0.0.1", 0))?;
        socket.connect(remote)?;
        let sender = socket.try_clone()?;
        Ok(TransportPair {
            send: Box::new(move |bytes| {
                sender.send(bytes)?;
                Ok(())
            }),
            recv: Box::new(move |timeout| {
                socket.set_read_timeout(Some(timeout))?;
                let mut buf = [0u8; 9216];
                match socket.recv(&mut buf) {
                    Ok(len) => Ok(Some(buf[..len].to_vec())),
                    Err(e)
                        if e.kind() == std::io::ErrorKind::WouldBlock
                            || e.kind() == std::io::ErrorKind::TimedOut =>
                    {
                        Ok(None)
                    }
                    Err(e) => Err(e.into()),
                }
            }),
        })
    }

    /// In-process channel transport; takes the echo's receiving half.
    pub fn inproc(echo: &mut InprocEcho) -> Result<TransportPair, RtError> {
        let tx = echo.sender();
        let rx = echo
            .take_receiver()
            .ok_or_else(|| RtError::Endpoint("echo receiver already taken".into()))?;
        Ok(TransportPair {
            send: Box::new(move |bytes| {
                tx.send(bytes.to_vec())
                    .map_err(|_| RtError::Endpoint("echo thread gone".into()))
            }),
            recv: Box::new(move |timeout| match rx.recv_timeout(timeout) {
                Ok(bytes) => Ok(Some(bytes)),
                Err(RecvTimeoutError::Timeout) => Ok(None),
                Err(RecvTimeoutError::Disconnected) => {
                    Err(RtError::Endpoint("echo thread gone".into()))
                }
            }),
        })
    }
}

/// Sends `n_packets` loopback frames, collects their echoes, and times each
/// round trip. Returns one sample per echoed packet, ordered by packet
/// number, and the list of packet numbers that never came back.
pub fn measure_loopback(
    transport: TransportPair,
    cfg: &MeasureConfig,
) -> Result<MeasureOutcome, RtError> {
    if cfg.n_packets == 0 || cfg.n_packets > MAX_PACKETS_PER_RUN {
        return Err(RtError::PacketCountOutOfRange { got: cfg.n_packets });
    }
    if cfg.payload_bytes < LOOPBACK_PAYLOAD_BYTES {
        return Err(RtError::PayloadSizeTooSmall);
    }
    let n = cfg.n_packets as usize;
    let epoch = Instant::now();
    let interval = cfg.interval_ns;
    let payload_bytes = cfg.payload_bytes;

    let mut send = transport.send;
    let mut recv = transport.recv;
    let sender = std::thread::spawn(move || -> Result<(), RtError> {
        for i in 0..n {
            if interval > 0 {
                let due = Duration::from_nanos(i as u64 * interval);
                let now = epoch.elapsed();
                if due > now {
                    std::thread::sleep(due - now);
                }
            }
            let now_ns = epoch.elapsed().as_nanos();
            let payload = LoopbackPayload::new(now_ns, (i & 0xFFFF) as u16)?;
            let mut frame_payload = payload.encode().to_vec();
            frame_payload.resize(payload_bytes, 0);
            let frame = Frame {
                msg_type: MsgType::Loopback,
                flags: 0,
                seq: i as u32,
                timestamp_ns: now_ns as u64,
                payload: frame_payload,
            };
            send(&encode_frame(&frame)?)?;
        }
        Ok(())
    });

    let mut slots: Vec<Option<LatencySample>> = vec![None; n];
    let mut received = 0usize;
    while received < n {
        match recv(cfg.idle_timeout)? {
            Some(bytes) => {
                let Ok(frame) = decode_frame(&bytes) else {
                    continue;
                };
                if frame.msg_type != MsgType::Loopback {
                    continue;
                }
                let Ok(payload) = LoopbackPayload::decode(&frame.payload) else {
                    continue;
                };
                let recv_ts_ns = epoch.elapsed().as_nanos() as u64;
                // The wire packet number is 16-bit; the frame seq carries the
                // full virtual counter. Cross-check the low bits.
                let virtual_number = frame.seq;
                if virtual_number as usize >= n
                    || payload.packet_number != (virtual_number & 0xFFFF) as u16
                {
                    continue;
                }
                let slot = &mut slots[virtual_number as usize];
                if slot.is_none() {
                    let send_ts_ns = payload.timestamp_ns() as u64;
                    *slot = Some(LatencySample {
                        packet_number: virtual_number,
                        send_ts_ns,
                        recv_ts_ns,
                        rtt_ns: recv_ts_ns.saturating_sub(send_ts_ns),
                    });
                    received += 1;
                }
            }
            None => break, // idle timeout: stop and report gaps
        }
    }

    sender
        .join()
        .map_err(|_| RtError::Endpoint("sender thread panicked".into()))??;

    if received == 0 {
        return Err(RtError::NoEchoes);
    }
    let mut samples = Vec::with_capacity(received);
    let mut gaps = Vec::new();
    for (i, slot) in slots.into_iter().enumerate() {
        match slot {
            Some(sample) => samples.push(sample),
            None => gaps.push(i as u32),
        }
    }
    Ok(MeasureOutcome { samples, gaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::NoDrops;

    #[test]
    fn inproc_measurement_yields_all_samples() {
        let mut echo = InprocEcho::spawn(NoDrops);
        let pair = TransportPair::inproc(&mut echo).unwrap();
        let outcome = measure_loopback(
            pair,
            &MeasureConfig {
                n_packets: 1000,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(outcome.samples.len(), 1000);
        assert!(outcome.gaps.is_empty());
        assert!(outcome.samples.iter().all(|s| s.rtt_ns > 0));
        let ordered: Vec<u32> = outcome.samples.iter().map(|s| s.packet_number).collect();
        assert_eq!(ordered, (0..1000).collect::<Vec<_>>());
    }

    #[test]
    fn dropped_packet_reported_as_gap() {
        let mut echo = InprocEcho::spawn(|frame: &Frame| {
            LoopbackPayload::decode(&frame.payload)
                .map(|p| p.packet_number == 5)
                .unwrap_or(false)
        });
        let pair = TransportPair::inproc(&mut echo).unwrap();
        let outcome = measure_loopback(
            pair,
            &MeasureConfig {
                n_packets: 1000,
                idle_timeout: Duration::from_millis(300),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(outcome.gaps, vec![5]);
        assert_eq!(outcome.samples.len(), 999);
    }

    #[test]
    fn zero_packets_rejected() {
        let mut echo = InprocEcho::spawn(NoDrops);
        let pair = TransportPair::inproc(&mut echo).unwrap();
        assert!(matches!(
            measure_loopback(
                pair,
                &MeasureConfig {
                    n_packets: 0,
                    ..Default::default()
                }
            ),
            Err(RtError::PacketCountOutOfRange { got: 0 })
        ));
    }

    #[test]
    fn seventy_thousand_packets_rejected() {
        let mut echo = InprocEcho::spawn(NoDrops);
        let pair = TransportPair::inproc(&mut echo).unwrap();
        assert!(matches!(
            measure_loopback(
                pair,
                &MeasureConfig {
                    n_packets: 70_000,
                    ..Default::default()
                }
            ),
            Err(RtError::PacketCountOutOfRange { got: 70_000 })
        ));
    }

    #[test]
    fn undersized_payload_rejected() {
        let mut echo = InprocEcho::spawn(NoDrops);
        let pair = TransportPair::inproc(&mut echo).unwrap();
        assert!(matches!(
            measure_loopback(
                pair,
                &MeasureConfig {
                    payload_bytes: 16,
                    ..Default::default()
                }
            ),
            Err(RtError::PayloadSizeTooSmall)
        ));
    }

    #[test]
    fn full_16_bit_packet_space_accepted() {
        let mut echo = InprocEcho::spawn(NoDrops);
        let pair = TransportPair::inproc(&mut echo).unwrap();
        let outcome = measure_loopback(
            pair,
            &MeasureConfig {
                n_packets: 65536,
                idle_timeout: Duration::from_secs(2),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(outcome.samples.len(), 65536);
        assert!(outcome.gaps.is_empty());
    }
}

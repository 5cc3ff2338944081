use std::net::{SocketAddr, UdpSocket};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use crate::{decode_frame, Frame, RtError};

/// Decides whether the echo service intentionally eats a valid frame.
/// Lets tests inject deterministic packet loss.
pub trait DropPolicy: Send + 'static {
    fn should_drop(&mut self, frame: &Frame) -> bool;
}

/// Production policy: echo everything valid.
pub struct NoDrops;

impl DropPolicy for NoDrops {
    fn should_drop(&mut self, _frame: &Frame) -> bool {
        false
    }
}

impl<F: FnMut(&Frame) -> bool + Send + 'static> DropPolicy for F {
    fn should_drop(&mut self, frame: &Frame) -> bool {
        self(frame)
    }
}

/// Running echo service. Valid frames are returned to their sender
/// unmodified, byte for byte; invalid frames are counted and dropped.
pub struct EchoHandle {
    local_addr: Option<SocketAddr>,
    invalid_drops: Arc<AtomicU64>,
    policy_drops: Arc<AtomicU64>,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl EchoHandle {
    /// Spawns a UDP echo service on `bind`, e.g. "127.0.0.1:0".
    pub fn spawn_udp(bind: &str, policy: impl DropPolicy) -> Result<EchoHandle, RtError> {
        let socket = UdpSocket::bind(bind).map_err(|e| RtError::Endpoint(e.to_string()))?;
        socket.set_read_timeout(Some(Duration::from_millis(20)))?;
        let local_addr = socket.local_addr()?;
        let invalid_drops = Arc::new(AtomicU64::new(0));
        let policy_drops = Arc::new(AtomicU64::new(0));
        let stop = Arc::new(AtomicBool::new(false));

        let thread = {
            let invalid_drops = Arc::clone(&invalid_drops);
            let policy_drops = Arc::clone(&policy_drops);
            let stop = Arc::clone(&stop);
            let mut policy = policy;
            std::thread::spawn(move || {
                let mut buf = [0u8; 9216];
                while !stop.load(Ordering::Relaxed) {
                    match socket.recv_from(&mut buf) {
                        Ok((len, peer)) => match decode_frame(&buf[..len]) {
                            Ok(frame) => {
                                if policy.should_drop(&frame) {
                                    policy_drops.fetch_add(1, Ordering::Relaxed);
                                } else {
                                    let _ = socket.send_to(&buf[..len], peer);
                                }
                            }
                            Err(_) => {
                                invalid_drops.fetch_add(1, Ordering::Relaxed);
                            }
                        },
                        Err(e)
                            if e.kind() == std::io::ErrorKind::WouldBlock
                                || e.kind() == std::io::ErrorKind::TimedOut => {}
                        Err(_) => break,
                    }
                }
            })
        };

        Ok(EchoHandle {
            local_addr: Some(local_addr),
            invalid_drops,
            policy_drops,
            stop,
            thread: Some(thread),
        })
    }

    pub fn local_addr(&self) -> Option<SocketAddr> {
        self.local_addr
    }

    /// Frames dropped because they failed to decode.
    pub fn invalid_drops(&self) -> u64 {
        self.invalid_drops.load(Ordering::Relaxed)
    }

    /// Valid frames eaten by the drop policy.
    pub fn policy_drops(&self) -> u64 {
        self.policy_drops.load(Ordering::Relaxed)
    }
}

impl Drop for EchoHandle {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}

/// In-process echo: a channel pair serviced by an echo thread, for
/// deterministic tests with no socket in the path.
pub struct InprocEcho {
    to_echo: Sender<Vec<u8>>,
    from_echo: Option<Receiver<Vec<u8>>>,
    invalid_drops: Arc<AtomicU64>,
    policy_drops: Arc<AtomicU64>,
    _thread: JoinHandle<()>,
}

impl InprocEcho {
    pub fn spawn(policy: impl DropPolicy) -> InprocEcho {
        let (to_echo, echo_rx) = mpsc::channel::<Vec<u8>>();
        let (echo_tx, from_echo) = mpsc::channel::<Vec<u8>>();
        let invalid_drops = Arc::new(AtomicU64::new(0));
        let policy_drops = Arc::new(AtomicU64::new(0));
        let thread = {
            let invalid_drops = Arc::clone(&invalid_drops);
            let policy_drops = Arc::clone(&policy_drops);
            let mut policy = policy;
            std::thread::spawn(move || loop {
                match echo_rx.recv_timeout(Duration::from_millis(100)) {
                    Ok(bytes) => match decode_frame(&bytes) {
                        Ok(frame) => {
                            if policy.should_drop(&frame) {
                                policy_drops.fetch_add(1, Ordering::Relaxed);
                            } else if echo_tx.send(bytes).is_err() {
                                break;
                            }
                        }
                        Err(_) => {
                            invalid_drops.fetch_add(1, Ordering::Relaxed);
                        }
                    },
                    Err(RecvTimeoutError::Timeout) => {}
                    Err(RecvTimeoutError::Disconnected) => break,
                }
            })
        };
        InprocEcho {
            to_echo,
            from_echo: Some(from_echo),
            invalid_drops,
            policy_drops,
            _thread: thread,
        }
    }

    /// Clonable sending half.
    pub fn sender(&self) -> Sender<Vec<u8>> {
        self.to_echo.clone()
    }

    /// Moves the receiving half out; only the first caller gets it.
    pub fn take_receiver(&mut self) -> Option<Receiver<Vec<u8>>> {
        self.from_echo.take()
    }

    /// Sends raw bytes to the echo thread.
    pub fn send_raw(&self, bytes: Vec<u8>) -> Result<(), RtError> {
        self.to_echo
            .send(bytes)
            .map_err(|_| RtError::Endpoint("echo thread gone".into()))
    }

    /// Receives the next echoed datagram, if the receiver is still held.
    pub fn recv_raw(&self, timeout: Duration) -> Result<Option<Vec<u8>>, RtError> {
        let rx = self
            .from_echo
            .as_ref()
            .ok_or_else(|| RtError::Endpoint("receiver was taken".into()))?;
        match rx.recv_timeout(timeout) {
            Ok(bytes) => Ok(Some(bytes)),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => {
                Err(RtError::Endpoint("echo thread gone".into()))
            }
        }
    }

    pub fn invalid_drops(&self) -> u64 {
        self.invalid_drops.load(Ordering::Relaxed)
    }

    pub fn policy_drops(&self) -> u64 {
        self.policy_drops.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{encode_frame, LoopbackPayload};

    fn loopback_bytes(seq: u32, pn: u16) -> Vec<u8> {
        let frame = Frame::loopback(seq, 0, &LoopbackPayload::new(seq as u128, pn).unwrap());
        encode_frame(&frame).unwrap()
    }

    #[test]
    fn inproc_echo_returns_identical_bytes() {
        let echo = InprocEcho::spawn(NoDrops);
        for i in 0..100u32 {
            let bytes = loopback_bytes(i, i as u16);
            echo.send_raw(bytes.clone()).unwrap();
            let back = echo.recv_raw(Duration::from_secs(1)).unwrap().unwrap();
            assert_eq!(back, bytes);
        }
        assert_eq!(echo.invalid_drops(), 0);
    }

    #[test]
    fn invalid_frames_counted_and_not_echoed() {
        let echo = InprocEcho::spawn(NoDrops);
        echo.send_raw(vec![1, 2, 3]).unwrap();
        assert!(echo.recv_raw(Duration::from_millis(200)).unwrap().is_none());
        assert_eq!(echo.invalid_drops(), 1);
    }

    #[test]
    fn udp_echo_roundtrip() {
        let echo = EchoHandle::spawn_udp("127.0.0.1:0", NoDrops).unwrap();
        let client = UdpSocket::bind("127.0.0.1:0").unwrap();
        client.connect(echo.local_addr().unwrap()).unwrap();
        client
            .set_read_timeout(Some(Duration::from_secs(2)))
            .unwrap();
        let bytes = loopback_bytes(0, 0);
        client.send(&bytes).unwrap();
        let mut buf = [0u8; 9216];
        let len = client.recv(&mut buf).unwrap();
        assert_eq!(&buf[..len], &bytes[..]);
    }

    #[test]
    fn endpoint_in_use_is_an_error() {
        let taken = UdpSocket::bind("127.0.0.1:0").unwrap();
        let addr = taken.local_addr().unwrap();
        assert!(EchoHandle::spawn_udp(&addr.to_string(), NoDrops).is_err());
    }

    #[test]
    fn drop_policy_eats_selected_packets() {
        let echo = InprocEcho::spawn(|frame: &Frame| {
            LoopbackPayload::decode(&frame.payload)
                .map(|p| p.packet_number == 5)
                .unwrap_or(false)
        });
        for pn in 0..10u16 {
            echo.send_raw(loopback_bytes(pn as u32, pn)).unwrap();
        }
        let mut received = Vec::new();
        while let Ok(Some(bytes)) = echo.recv_raw(Duration::from_millis(300)) {
            let frame = decode_frame(&bytes).unwrap();
            received.push(
                LoopbackPayload::decode(&frame.payload)
                    .unwrap()
                    .packet_number,
            );
        }
        assert_eq!(received, vec![0, 1, 2, 3, 4, 6, 7, 8, 9]);
        assert_eq!(echo.policy_drops(), 1);
    }
}

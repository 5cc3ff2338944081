/// A behavior a device advertises to the runtime.
///
/// Capabilities gate operations: memory management requires
/// `DataMarshaling`, callback registration and invocation require
/// `DeviceCallback`, program upload and triggering require
/// `QuantumControl`, and the buffer-descriptor handshake requires `Rdma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Capability {
    DataMarshaling,
    DeviceCallback,
    QuantumControl,
    Rdma,
}

impl Capability {
    pub const ALL: [Capability; 4] = [
        Capability::DataMarshaling,
        Capability::DeviceCallback,
        Capability::QuantumControl,
        Capability::Rdma,
    ];

    fn bit(self) -> u8 {
        match self {
            Capability::DataMarshaling => 1 << 0,
            Capability::DeviceCallback => 1 << 1,
            Capability::QuantumControl => 1 << 2,
            Capability::Rdma => 1 << 3,
        }
    }
}

/// Set of capabilities advertised by one device.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CapabilitySet {
    bits: u8,
}

impl CapabilitySet {
    pub const fn empty() -> Self {
        CapabilitySet { bits: 0 }
    }

    pub fn with(mut self, cap: Capability) -> Self {
        self.bits |= cap.bit();
        self
    }

    pub fn of(caps: &[Capability]) -> Self {
        caps.iter().fold(Self::empty(), |set, &c| set.with(c))
    }

    pub fn contains(&self, cap: Capability) -> bool {
        self.bits & cap.bit() != 0
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Capability> + '_ {
        Capability::ALL.into_iter().filter(|c| self.contains(*c))
    }
}

impl std::fmt::Display for CapabilitySet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for cap in self.iter() {
            if !first {
                write!(f, "+")?;
            }
            write!(f, "{cap:?}")?;
            first = false;
        }
        if first {
            write!(f, "none")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_membership() {
        let set = CapabilitySet::of(&[Capability::DataMarshaling, Capability::Rdma]);
        assert!(set.contains(Capability::DataMarshaling));
        assert!(set.contains(Capability::Rdma));
        assert!(!set.contains(Capability::DeviceCallback));
        assert!(!set.contains(Capability::QuantumControl));
    }

    #[test]
    fn empty_set_reports_empty() {
        assert!(CapabilitySet::empty().is_empty());
        assert!(!CapabilitySet::empty().with(Capability::Rdma).is_empty());
    }
}

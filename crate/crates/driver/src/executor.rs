use std::sync::Barrier;

use qlink_device_core::{DeviceUid, ProgramSlot, Registry, TriggerContext, TriggerOutput};

use crate::DriverError;

/// A program staged on its target, ready to trigger.
#[derive(Debug, Clone, Copy)]
pub struct PreparedLaunch {
    pub uid: DeviceUid,
    pub slot: ProgramSlot,
}

/// Triggers the staged programs of one kernel as a collective and joins
/// them. Implementations see the machine only through the registry, so any
/// quantum-control device is launchable the same way.
pub trait ExecutorPlugin: Send + Sync {
    fn execute(
        &self,
        registry: &Registry,
        launches: &[PreparedLaunch],
        bridge: &(dyn Fn(u16, u16, u64) -> Result<Vec<u8>, String> + Sync),
        args: &[u64],
    ) -> Result<Vec<(DeviceUid, TriggerOutput)>, DriverError>;
}

/// Default executor: one thread per target device, a barrier so every
/// program starts from deterministic-domain tick zero together, then a
/// join. Each thread holds its device's call lock for the duration of the
/// program, which serializes against any other caller targeting that
/// device while leaving the callback targets free.
pub struct CollectiveExecutor;

impl ExecutorPlugin for CollectiveExecutor {
    fn execute(
        &self,
        registry: &Registry,
        launches: &[PreparedLaunch],
        bridge: &(dyn Fn(u16, u16, u64) -> Result<Vec<u8>, String> + Sync),
        args: &[u64],
    ) -> Result<Vec<(DeviceUid, TriggerOutput)>, DriverError> {
        if launches.is_empty() {
            return Ok(Vec::new());
        }
        let barrier = Barrier::new(launches.len());
        let mut results: Vec<Option<Result<TriggerOutput, DriverError>>> =
            (0..launches.len()).map(|_| None).collect();

        std::thread::scope(|scope| {
            let mut handles = Vec::with_capacity(launches.len());
            for launch in launches {
                let barrier = &barrier;
                handles.push(scope.spawn(move || {
                    let behavior = registry.behavior(launch.uid)?;
                    registry.with_call_lock(launch.uid, || {
                        barrier.wait();
                        behavior.trigger(
                            launch.uid,
                            launch.slot,
                            TriggerContext {
                                bridge,
                                args: args.to_vec(),
                            },
                        )
                    })?
                    .map_err(DriverError::from)
                }));
            }
            for (slot, handle) in results.iter_mut().zip(handles) {
                *slot = Some(handle.join().expect("trigger thread panicked"));
            }
        });

        let mut outputs = Vec::with_capacity(launches.len());
        for (launch, result) in launches.iter().zip(results) {
            outputs.push((launch.uid, result.unwrap()?));
        }
        Ok(outputs)
    }
}

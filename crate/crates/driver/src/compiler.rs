use qlink_device_core::DeviceUid;

use crate::{CompileError, CompiledKernel, QControlProgram};

/// A quantum-control device visible to the compiler.
#[derive(Debug, Clone)]
pub struct QcTarget {
    pub uid: DeviceUid,
    pub name: String,
}

/// Architecture-specific kernel compiler. Both entry points receive the
/// quantum-control devices of the machine so the produced kernel is bound
/// to concrete targets.
pub trait CompilerPlugin {
    fn load_precompiled(
        &self,
        binary: &[u8],
        targets: &[QcTarget],
    ) -> Result<CompiledKernel, CompileError>;

    fn jit_compile(&self, source: &str, targets: &[QcTarget])
        -> Result<CompiledKernel, CompileError>;
}

/// Compiler for pulse-unit assembly text.
///
/// A source may address several devices with `@target <name-or-uid>` section
/// markers; without markers the whole source targets the sole
/// quantum-control device. The result width is declared at construction
/// since the binary format carries no header.
pub struct VppuAssemblyCompiler {
    kernel_name: String,
    result_bytes: u64,
}

impl VppuAssemblyCompiler {
    pub fn new(kernel_name: impl Into<String>) -> Self {
        VppuAssemblyCompiler {
            kernel_name: kernel_name.into(),
            result_bytes: 0,
        }
    }

    /// Declares that the kernel returns a value of this many bytes.
    pub fn returns_bytes(mut self, result_bytes: u64) -> Self {
        self.result_bytes = result_bytes;
        self
    }

    fn resolve<'a>(spec: &str, targets: &'a [QcTarget]) -> Result<&'a QcTarget, CompileError> {
        if let Some(found) = targets.iter().find(|t| t.name == spec) {
            return Ok(found);
        }
        if let Ok(uid) = spec.parse::<u64>() {
            if let Some(found) = targets.iter().find(|t| t.uid.value() == uid) {
                return Ok(found);
            }
        }
        Err(CompileError::UnknownTarget(spec.to_string()))
    }

    fn sole_target(targets: &[QcTarget]) -> Result<&QcTarget, CompileError> {
        if targets.len() == 1 {
            Ok(&targets[0])
        } else {
            Err(CompileError::AmbiguousTarget(targets.len()))
        }
    }
}

impl CompilerPlugin for VppuAssemblyCompiler {
    fn load_precompiled(
        &self,
        binary: &[u8],
        targets: &[QcTarget],
    ) -> Result<CompiledKernel, CompileError> {
        if binary.is_empty() {
            return Err(CompileError::EmptySource);
        }
        qlink_vppu::decode_program(binary)?;
        let target = Self::sole_target(targets)?;
        Ok(CompiledKernel {
            kernel_name: self.kernel_name.clone(),
            programs: vec![QControlProgram {
                target: target.uid,
                binary: binary.to_vec(),
            }],
            result_bytes: self.result_bytes,
        })
    }

    fn jit_compile(
        &self,
        source: &str,
        targets: &[QcTarget],
    ) -> Result<CompiledKernel, CompileError> {
        if source.trim().is_empty() {
            return Err(CompileError::EmptySource);
        }
        // Split into (target, section text) pairs on @target markers.
        let mut sections: Vec<(DeviceUid, String)> = Vec::new();
        let mut current: Option<(DeviceUid, String)> = None;
        let mut preamble = String::new();
        for line in source.lines() {
            if let Some(spec) = line.trim().strip_prefix("@target") {
                if let Some(section) = current.take() {
                    sections.push(section);
                }
                let target = Self::resolve(spec.trim(), targets)?;
                current = Some((target.uid, String::new()));
            } else {
                match &mut current {
                    Some((_, text)) => {
                        text.push_str(line);
                        text.push('\n');
                    }
                    None => {
                        preamble.push_str(line);
                        preamble.push('\n');
                    }
                }
            }
        }
        if let Some(section) = current.take() {
            sections.push(section);
        }
        if sections.is_empty() {
            let target = Self::sole_target(targets)?;
            sections.push((target.uid, preamble));
        }

        let mut programs = Vec::with_capacity(sections.len());
        for (uid, text) in sections {
            if text.trim().is_empty() {
                return Err(CompileError::EmptySection(uid));
            }
            programs.push(QControlProgram {
                target: uid,
                binary: qlink_vppu::assemble(&text)?,
            });
        }
        Ok(CompiledKernel {
            kernel_name: self.kernel_name.clone(),
            programs,
            result_bytes: self.result_bytes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn targets() -> Vec<QcTarget> {
        vec![
            QcTarget {
                uid: DeviceUid(1),
                name: "vppu0".into(),
            },
            QcTarget {
                uid: DeviceUid(2),
                name: "vppu1".into(),
            },
        ]
    }

    #[test]
    fn unmarked_source_needs_a_sole_target() {
        let compiler = VppuAssemblyCompiler::new("k");
        assert!(matches!(
            compiler.jit_compile("HALT", &targets()),
            Err(CompileError::AmbiguousTarget(2))
        ));
        let one = &targets()[..1];
        let kernel = compiler.jit_compile("HALT", one).unwrap();
        assert_eq!(kernel.programs.len(), 1);
        assert_eq!(kernel.programs[0].target, DeviceUid(1));
    }

    #[test]
    fn target_sections_split_programs() {
        let source = "\
@target vppu0
DELAY 3
HALT
@target 2
HALT";
        let kernel = VppuAssemblyCompiler::new("pair")
            .jit_compile(source, &targets())
            .unwrap();
        assert_eq!(kernel.programs.len(), 2);
        assert_eq!(kernel.programs[0].target, DeviceUid(1));
        assert_eq!(kernel.programs[0].binary.len(), 16);
        assert_eq!(kernel.programs[1].target, DeviceUid(2));
        assert_eq!(kernel.programs[1].binary.len(), 8);
    }

    #[test]
    fn unknown_target_name_rejected() {
        let source = "@target nope\nHALT";
        assert!(matches!(
            VppuAssemblyCompiler::new("k").jit_compile(source, &targets()),
            Err(CompileError::UnknownTarget(_))
        ));
    }

    #[test]
    fn empty_source_rejected() {
        assert!(matches!(
            VppuAssemblyCompiler::new("k").jit_compile("  \n ", &targets()),
            Err(CompileError::EmptySource)
        ));
        assert!(matches!(
            VppuAssemblyCompiler::new("k").load_precompiled(&[], &targets()[..1]),
            Err(CompileError::EmptySource)
        ));
    }

    #[test]
    fn precompiled_bytes_validate_and_bind() {
        let binary = qlink_vppu::assemble("DELAY 1\nHALT").unwrap();
        let kernel = VppuAssemblyCompiler::new("bin")
            .returns_bytes(1)
            .load_precompiled(&binary, &targets()[..1])
            .unwrap();
        assert_eq!(kernel.result_bytes, 1);
        assert_eq!(kernel.programs[0].binary, binary);
    }
}

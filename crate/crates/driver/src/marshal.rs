use crate::MarshalError;

/// Values that cross the device boundary. Everything marshals to bytes:
/// fixed-width little-endian integers and floats, a length-prefixed byte
/// vector, and a bit-packed boolean vector (bit `i` lands in bit `i % 8` of
/// byte `i / 8`, LSB first, trailing bits zero).
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    U8(u8),
    U16(u16),
    U32(u32),
    U64(u64),
    I8(i8),
    I16(i16),
    I32(i32),
    I64(i64),
    F64(f64),
    Bytes(Vec<u8>),
    Bits(Vec<bool>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueType {
    U8,
    U16,
    U32,
    U64,
    I8,
    I16,
    I32,
    I64,
    F64,
    Bytes,
    Bits,
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::U8(_) => ValueType::U8,
            Value::U16(_) => ValueType::U16,
            Value::U32(_) => ValueType::U32,
            Value::U64(_) => ValueType::U64,
            Value::I8(_) => ValueType::I8,
            Value::I16(_) => ValueType::I16,
            Value::I32(_) => ValueType::I32,
            Value::I64(_) => ValueType::I64,
            Value::F64(_) => ValueType::F64,
            Value::Bytes(_) => ValueType::Bytes,
            Value::Bits(_) => ValueType::Bits,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        match self {
            Value::U8(v) => v.to_le_bytes().to_vec(),
            Value::U16(v) => v.to_le_bytes().to_vec(),
            Value::U32(v) => v.to_le_bytes().to_vec(),
            Value::U64(v) => v.to_le_bytes().to_vec(),
            Value::I8(v) => v.to_le_bytes().to_vec(),
            Value::I16(v) => v.to_le_bytes().to_vec(),
            Value::I32(v) => v.to_le_bytes().to_vec(),
            Value::I64(v) => v.to_le_bytes().to_vec(),
            Value::F64(v) => v.to_le_bytes().to_vec(),
            Value::Bytes(v) => {
                let mut out = Vec::with_capacity(4 + v.len());
                out.extend_from_slice(&(v.len() as u32).to_le_bytes());
                out.extend_from_slice(v);
                out
            }
            Value::Bits(bits) => {
                let mut out = Vec::with_capacity(4 + bits.len().div_ceil(8));
                out.extend_from_slice(&(bits.len() as u32).to_le_bytes());
                out.extend(pack_bits(bits));
                out
            }
        }
    }

    pub fn decode(ty: ValueType, bytes: &[u8]) -> Result<Value, MarshalError> {
        fn fixed<const N: usize>(bytes: &[u8]) -> Result<[u8; N], MarshalError> {
            bytes.try_into().map_err(|_| MarshalError::WrongLength {
                expected: N,
                got: bytes.len(),
            })
        }
        Ok(match ty {
            ValueType::U8 => Value::U8(u8::from_le_bytes(fixed(bytes)?)),
            ValueType::U16 => Value::U16(u16::from_le_bytes(fixed(bytes)?)),
            ValueType::U32 => Value::U32(u32::from_le_bytes(fixed(bytes)?)),
            ValueType::U64 => Value::U64(u64::from_le_bytes(fixed(bytes)?)),
            ValueType::I8 => Value::I8(i8::from_le_bytes(fixed(bytes)?)),
            ValueType::I16 => Value::I16(i16::from_le_bytes(fixed(bytes)?)),
            ValueType::I32 => Value::I32(i32::from_le_bytes(fixed(bytes)?)),
            ValueType::I64 => Value::I64(i64::from_le_bytes(fixed(bytes)?)),
            ValueType::F64 => Value::F64(f64::from_le_bytes(fixed(bytes)?)),
            ValueType::Bytes => {
                let (len, rest) = split_prefix(bytes)?;
                if rest.len() != len {
                    return Err(MarshalError::LengthMismatch {
                        declared: len,
                        actual: rest.len(),
                    });
                }
                Value::Bytes(rest.to_vec())
            }
            ValueType::Bits => {
                let (count, rest) = split_prefix(bytes)?;
                let expected_bytes = count.div_ceil(8);
                if rest.len() != expected_bytes {
                    return Err(MarshalError::LengthMismatch {
                        declared: expected_bytes,
                        actual: rest.len(),
                    });
                }
                let mut bits = Vec::with_capacity(count);
                for i in 0..count {
                    bits.push(rest[i / 8] >> (i % 8) & 1 == 1);
                }
                // Bits past the declared count must be zero.
                if count % 8 != 0 {
                    let last = rest[count / 8];
                    if last >> (count % 8) != 0 {
                        return Err(MarshalError::NonzeroTrailingBits);
                    }
                }
                Value::Bits(bits)
            }
        })
    }
}

fn split_prefix(bytes: &[u8]) -> Result<(usize, &[u8]), MarshalError> {
    if bytes.len() < 4 {
        return Err(MarshalError::TooShort);
    }
    let len = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
    Ok((len, &bytes[4..]))
}

/// LSB-first bit packing: bit `i` of the vector lands in byte `i / 8`.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &bit) in bits.iter().enumerate() {
        if bit {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bool_vector_packs_lsb_first() {
        let encoded = Value::Bits(vec![true, false, true, true]).encode();
        assert_eq!(&encoded[..4], &4u32.to_le_bytes());
        assert_eq!(encoded[4], 0b0000_1101);
    }

    #[test]
    fn trailing_bits_must_be_zero() {
        let mut encoded = Value::Bits(vec![true; 4]).encode();
        encoded[4] |= 0b1000_0000;
        assert_eq!(
            Value::decode(ValueType::Bits, &encoded),
            Err(MarshalError::NonzeroTrailingBits)
        );
    }

    #[test]
    fn integers_are_little_endian() {
        assert_eq!(Value::U32(0x0102_0304).encode(), vec![4, 3, 2, 1]);
        assert_eq!(Value::I16(-2).encode(), vec![0xFE, 0xFF]);
    }

    #[test]
    fn wrong_width_rejected() {
        assert_eq!(
            Value::decode(ValueType::U32, &[1, 2]),
            Err(MarshalError::WrongLength {
                expected: 4,
                got: 2
            })
        );
    }

    #[test]
    fn extreme_values_roundtrip() {
        let values = [
            Value::U64(u64::MAX),
            Value::I64(i64::MIN),
            Value::F64(f64::INFINITY),
            Value::F64(f64::NEG_INFINITY),
            Value::F64(-0.0),
            Value::F64(f64::MIN_POSITIVE / 2.0), // subnormal
            Value::Bytes(vec![]),
            Value::Bytes(vec![0xFF; 300]),
            Value::Bits(vec![]),
            Value::Bits(vec![true; 65]),
        ];
        for value in values {
            let encoded = value.encode();
            let decoded = Value::decode(value.value_type(), &encoded).unwrap();
            assert_eq!(decoded.encode(), encoded);
        }
        // NaN roundtrips by bit pattern.
        let nan = Value::F64(f64::NAN).encode();
        let back = Value::decode(ValueType::F64, &nan).unwrap();
        assert_eq!(back.encode(), nan);
    }
}

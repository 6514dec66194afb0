//! JSON output with a fixed key order and 17 significant digits per float.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{Map, Value};

use crate::error::Result;

/// Compact formatter that prints every float as `d.dddddddddddddddde±x`,
/// which is exact for `f64` and independent of the shortest-repr algorithm.
struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` (maps keep insertion order), followed by a newline.
pub fn to_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// Finite floats as numbers, anything else as `null`.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// Insertion-ordered object builder.
#[derive(Default)]
pub struct Object(Map<String, Value>);

impl Object {
    pub fn new() -> Self {
        Object(Map::new())
    }

    pub fn field(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.insert(key.to_owned(), value.into());
        self
    }

    pub fn float(self, key: &str, value: f64) -> Self {
        self.field(key, num(value))
    }

    pub fn floats(self, key: &str, values: &[f64]) -> Self {
        self.field(key, Value::Array(values.iter().map(|&v| num(v)).collect()))
    }

    pub fn build(self) -> Value {
        Value::Object(self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits_and_round_trip() {
        let v = Object::new().float("a", 0.1).float("b", -1.0 / 3.0).field("c", "x").float("d", f64::NAN).build();
        let s = to_string(&v).unwrap();
        assert_eq!(s, "{\"a\":1.0000000000000001e-1,\"b\":-3.3333333333333331e-1,\"c\":\"x\",\"d\":null}\n");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
        assert_eq!(back["b"].as_f64(), Some(-1.0 / 3.0));
        assert_eq!(to_string(&back).unwrap(), s);
    }
}

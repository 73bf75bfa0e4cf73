// Copyright 2026 The dppca Authors
// SPDX-License-Identifier: Apache-2.0

//! Canonical JSON output.
//!
//! Floats are written with 17 significant digits in scientific notation so
//! that identical values always produce identical bytes. Non-finite floats
//! become `null`. Field order follows struct declaration order.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::error::{Error, Result};

/// Version of the JSON output schema.
pub const SCHEMA_VERSION: u32 = 1;

struct Canonical<F>(F);

fn write_float<W: ?Sized + io::Write>(w: &mut W, v: f64) -> io::Result<()> {
    if v.is_finite() {
        write!(w, "{v:.16e}")
    } else {
        w.write_all(b"null")
    }
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl<F: Formatter> Formatter for Canonical<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write_float(w, v)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write_float(w, v as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    #[serde(flatten)]
    payload: &'a T,
}

/// Serializes `value` canonically, wrapped with `schema_version` and `kind`.
pub fn to_canonical_json<T: Serialize>(kind: &str, value: &T, pretty: bool) -> Result<String> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        kind,
        payload: value,
    };
    let mut buf = Vec::new();
    let res = if pretty {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Canonical(PrettyFormatter::new()));
        env.serialize(&mut ser)
    } else {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Canonical(CompactFormatter));
        env.serialize(&mut ser)
    };
    res.map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        x: f64,
        y: f64,
        v: Vec<f64>,
    }

    #[test]
    fn floats_are_fixed_width() {
        let s = Sample {
            x: 0.1,
            y: f64::INFINITY,
            v: vec![1.0, -2.5e-300],
        };
        let out = to_canonical_json("sample", &s, false).unwrap();
        assert_eq!(
            out,
            r#"{"schema_version":1,"kind":"sample","x":1.0000000000000001e-1,"y":null,"v":[1.0000000000000000e0,-2.5000000000000000e-300]}"#
        );
        let back: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }
}

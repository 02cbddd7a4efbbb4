//! Line-oriented text dump of a nesting forest:
//!
//! ```text
//! v <id> m=<conn> interior=<0|1>
//! e <curve_id> <out_id> <in_id> len=<..> area=<..> diam=<..> clipped=<0|1>
//! ```

use std::io::Write;

use super::NestingForest;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DumpVertex {
    pub id: u32,
    pub connectivity: u32,
    pub interior: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DumpEdge {
    pub curve: u32,
    pub outside: u32,
    pub inside: u32,
    pub length: f64,
    pub area: f64,
    pub diameter: f64,
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ForestDump {
    pub vertices: Vec<DumpVertex>,
    pub edges: Vec<DumpEdge>,
}

pub fn write_forest_dump<W: Write>(forest: &NestingForest, mut w: W) -> Result<()> {
    for d in 0..forest.domain_count {
        writeln!(w, "v {d} m={} interior={}", forest.connectivity[d], forest.interior[d] as u8)?;
    }
    for c in &forest.curves {
        writeln!(
            w,
            "e {} {} {} len={:.6} area={:.6} diam={:.6} clipped={}",
            c.id,
            c.outside(),
            c.inside(),
            c.length,
            c.enclosed_area,
            c.diameter,
            c.clipped as u8
        )?;
    }
    Ok(())
}

fn field<'a>(tok: Option<&'a str>, key: &str, line: usize) -> Result<&'a str> {
    let tok = tok.ok_or_else(|| Error::Malformed(format!("line {line}: missing {key}")))?;
    tok.strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| Error::Malformed(format!("line {line}: expected {key}=..., got {tok}")))
}

fn num<T: std::str::FromStr>(s: Option<&str>, line: usize) -> Result<T> {
    s.and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Malformed(format!("line {line}: bad number")))
}

fn flag(s: &str, line: usize) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::Malformed(format!("line {line}: flag must be 0 or 1"))),
    }
}

pub fn parse_forest_dump(text: &str) -> Result<ForestDump> {
    let mut out = ForestDump::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut t = raw.split_whitespace();
        match t.next() {
            None => continue,
            Some("v") => {
                let id = num(t.next(), line)?;
                let connectivity = num(Some(field(t.next(), "m", line)?), line)?;
                let interior = flag(field(t.next(), "interior", line)?, line)?;
                out.vertices.push(DumpVertex {
                    id,
                    connectivity,
                    interior,
                });
            }
            Some("e") => {
                let curve = num(t.next(), line)?;
                let outside = num(t.next(), line)?;
                let inside = num(t.next(), line)?;
                let length = num(Some(field(t.next(), "len", line)?), line)?;
                let area = num(Some(field(t.next(), "area", line)?), line)?;
                let diameter = num(Some(field(t.next(), "diam", line)?), line)?;
                let clipped = flag(field(t.next(), "clipped", line)?, line)?;
                out.edges.push(DumpEdge {
                    curve,
                    outside,
                    inside,
                    length,
                    area,
                    diameter,
                    clipped,
                });
            }
            Some(other) => return Err(Error::Malformed(format!("line {line}: unknown record {other:?}"))),
        }
    }
    Ok(out)
}

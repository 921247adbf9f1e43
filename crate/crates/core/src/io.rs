//! File formats: SSMs (CSV and the `SSM1` binary layout), trajectories,
//! Doppler traces, receiver layouts, point clouds, diagrams and warping paths.
//!
//! Floats are written with Rust's shortest round-trip formatting so that
//! identical values always produce identical bytes.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ibdtw::{CrossSimilarityWarpMatrix, WarpingPath};
use crate::rf::{DopplerTrace, Receiver};
use crate::scene::{MotionClass, Trajectory};
use crate::ssm::{SelfSimilarityMatrix, TimeOrderedPointCloud};
use crate::tda::{Filtration, PersistenceDiagram, PersistencePair};

pub const SSM_MAGIC: &[u8; 4] = b"SSM1";

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))
}

fn parse_f64(field: &str, what: &'static str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::format(what, format!("line {line}: cannot parse {field:?} as a number")))
}

/// Splits a CSV body into trimmed fields, checking the header if given.
fn csv_rows<'a>(text: &'a str, header: Option<&str>, what: &'static str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    if let Some(expected) = header {
        match lines.next() {
            Some((_, h)) if h.trim() == expected => {}
            Some((_, h)) => return Err(Error::format(what, format!("expected header {expected:?}, found {:?}", h.trim()))),
            None => return Err(Error::format(what, "empty file")),
        }
    }
    Ok(lines
        .map(|(i, l)| (i + 1, l.split(',').map(str::trim).collect()))
        .collect())
}

// ---- SSM --------------------------------------------------------------------

pub fn write_matrix_csv<W: Write>(mut w: W, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    for r in 0..rows {
        let line: Vec<String> = values[r * cols..(r + 1) * cols].iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ssm_csv(path: &Path, ssm: &SelfSimilarityMatrix) -> Result<()> {
    write_matrix_csv(create(path)?, ssm.size(), ssm.size(), ssm.values())
}

pub fn parse_ssm_csv(text: &str) -> Result<SelfSimilarityMatrix> {
    let rows = csv_rows(text, None, "SSM CSV")?;
    let n = rows.len();
    let mut values = Vec::with_capacity(n * n);
    for (line, fields) in rows {
        if fields.len() != n {
            return Err(Error::format("SSM CSV", format!("line {line}: expected {n} columns, found {}", fields.len())));
        }
        for f in fields {
            values.push(parse_f64(f, "SSM CSV", line)?);
        }
    }
    SelfSimilarityMatrix::from_values(n, values)
}

pub fn encode_matrix_binary(rows: usize, cols: usize, values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * values.len());
    out.extend_from_slice(SSM_MAGIC);
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes the binary layout into `(rows, cols, values)`.
pub fn decode_matrix_binary(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>)> {
    if bytes.len() < 12 || &bytes[..4] != SSM_MAGIC {
        return Err(Error::format("SSM binary", "missing SSM1 magic"));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() != rows * cols * 8 {
        return Err(Error::format(
            "SSM binary",
            format!("expected {} payload bytes for {rows}x{cols}, found {}", rows * cols * 8, body.len()),
        ));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, values))
}

pub fn encode_ssm_binary(ssm: &SelfSimilarityMatrix) -> Vec<u8> {
    encode_matrix_binary(ssm.size(), ssm.size(), ssm.values())
}

pub fn decode_ssm_binary(bytes: &[u8]) -> Result<SelfSimilarityMatrix> {
    let (rows, cols, values) = decode_matrix_binary(bytes)?;
    if rows != cols {
        return Err(Error::format("SSM binary", format!("matrix is {rows}x{cols}, not square")));
    }
    SelfSimilarityMatrix::from_values(rows, values)
}

pub fn write_ssm_binary(path: &Path, ssm: &SelfSimilarityMatrix) -> Result<()> {
    fs::write(path, encode_ssm_binary(ssm))?;
    Ok(())
}

/// Reads either format, detected by the `SSM1` magic.
pub fn read_ssm(path: &Path) -> Result<SelfSimilarityMatrix> {
    let bytes = fs::read(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    let parsed = if bytes.starts_with(SSM_MAGIC) {
        decode_ssm_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Error::format("SSM CSV", "not UTF-8 text"))?;
        parse_ssm_csv(&text)
    };
    parsed.map_err(|e| e.context(path.display().to_string()))
}

pub fn write_cswm_binary(path: &Path, cswm: &CrossSimilarityWarpMatrix) -> Result<()> {
    fs::write(path, encode_matrix_binary(cswm.rows, cswm.cols, &cswm.values))?;
    Ok(())
}

pub fn write_path_csv(path: &Path, warp: &WarpingPath) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "i,j")?;
    for (i, j) in &warp.pairs {
        writeln!(w, "{i},{j}")?;
    }
    w.flush()?;
    Ok(())
}

// ---- trajectories, traces, receivers ----------------------------------------

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,x,y")?;
    for (t, p) in traj.timestamps.iter().zip(&traj.positions) {
        writeln!(w, "{t},{},{}", p[0], p[1])?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_trajectory_csv(text: &str, motion_class: MotionClass) -> Result<Trajectory> {
    let mut timestamps = Vec::new();
    let mut positions = Vec::new();
    for (line, f) in csv_rows(text, Some("t,x,y"), "trajectory CSV")? {
        if f.len() != 3 {
            return Err(Error::format("trajectory CSV", format!("line {line}: expected 3 fields")));
        }
        timestamps.push(parse_f64(f[0], "trajectory CSV", line)?);
        positions.push([parse_f64(f[1], "trajectory CSV", line)?, parse_f64(f[2], "trajectory CSV", line)?]);
    }
    Ok(Trajectory {
        positions,
        timestamps,
        motion_class,
    })
}

pub fn write_trace_csv(path: &Path, trace: &DopplerTrace) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,f_recvd")?;
    for (t, f) in trace.timestamps.iter().zip(&trace.frequencies) {
        writeln!(w, "{t},{f}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_trace_csv(text: &str, receiver_id: &str, carrier: f64) -> Result<DopplerTrace> {
    let mut timestamps = Vec::new();
    let mut frequencies = Vec::new();
    for (line, f) in csv_rows(text, Some("t,f_recvd"), "trace CSV")? {
        if f.len() != 2 {
            return Err(Error::format("trace CSV", format!("line {line}: expected 2 fields")));
        }
        timestamps.push(parse_f64(f[0], "trace CSV", line)?);
        frequencies.push(parse_f64(f[1], "trace CSV", line)?);
    }
    Ok(DopplerTrace {
        timestamps,
        frequencies,
        receiver_id: receiver_id.to_string(),
        carrier,
    })
}

pub fn write_receivers_csv(path: &Path, receivers: &[Receiver]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "id,x,y")?;
    for r in receivers {
        writeln!(w, "{},{},{}", r.id, r.position[0], r.position[1])?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_receivers_csv(text: &str) -> Result<Vec<Receiver>> {
    csv_rows(text, Some("id,x,y"), "receiver CSV")?
        .into_iter()
        .map(|(line, f)| {
            if f.len() != 3 || f[0].is_empty() {
                return Err(Error::format("receiver CSV", format!("line {line}: expected id,x,y")));
            }
            Receiver::new(f[0], [parse_f64(f[1], "receiver CSV", line)?, parse_f64(f[2], "receiver CSV", line)?])
        })
        .collect()
}

pub fn read_receivers_csv(path: &Path) -> Result<Vec<Receiver>> {
    parse_receivers_csv(&read_text(path)?).map_err(|e| e.context(path.display().to_string()))
}

// ---- point clouds and diagrams ----------------------------------------------

pub fn write_topc_csv(path: &Path, topc: &TimeOrderedPointCloud) -> Result<()> {
    let mut w = create(path)?;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=topc.dim()).map(|k| format!("c{k}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (t, p) in topc.timestamps().iter().zip(topc.points()) {
        let fields: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{t},{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_topc_csv(text: &str) -> Result<TimeOrderedPointCloud> {
    let rows = csv_rows(text, None, "point cloud CSV")?;
    let Some((_, header)) = rows.first() else {
        return Err(Error::format("point cloud CSV", "empty file"));
    };
    let dim = header.len().saturating_sub(1);
    let valid = header[0] == "t" && header[1..].iter().enumerate().all(|(k, h)| *h == format!("c{}", k + 1));
    if dim == 0 || !valid {
        return Err(Error::format("point cloud CSV", "expected header t,c1..cd"));
    }
    let mut times = Vec::new();
    let mut coords = Vec::new();
    for (line, f) in &rows[1..] {
        if f.len() != dim + 1 {
            return Err(Error::format("point cloud CSV", format!("line {line}: expected {} fields", dim + 1)));
        }
        times.push(parse_f64(f[0], "point cloud CSV", *line)?);
        for v in &f[1..] {
            coords.push(parse_f64(v, "point cloud CSV", *line)?);
        }
    }
    TimeOrderedPointCloud::from_flat(dim, coords, times)
}

pub fn write_diagram_csv(path: &Path, diagram: &PersistenceDiagram) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "birth,death,essential")?;
    for p in &diagram.pairs {
        writeln!(w, "{},{},{}", p.birth, p.death, p.essential)?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_diagram_csv(text: &str, filtration: Filtration) -> Result<PersistenceDiagram> {
    let pairs = csv_rows(text, Some("birth,death,essential"), "diagram CSV")?
        .into_iter()
        .map(|(line, f)| {
            if f.len() != 3 {
                return Err(Error::format("diagram CSV", format!("line {line}: expected 3 fields")));
            }
            let essential = match f[2] {
                "true" | "1" => true,
                "false" | "0" => false,
                other => return Err(Error::format("diagram CSV", format!("line {line}: bad flag {other:?}"))),
            };
            Ok(PersistencePair {
                birth: parse_f64(f[0], "diagram CSV", line)?,
                death: parse_f64(f[1], "diagram CSV", line)?,
                essential,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PersistenceDiagram::new(filtration, pairs))
}

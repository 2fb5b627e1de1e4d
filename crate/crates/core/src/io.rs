//! Comma-separated text formats for fields.
//!
//! Every number is written with Rust's `{:e}` formatting: the shortest
//! scientific-notation decimal that parses back to the identical `f64`
//! (`0.25` is written `2.5e-1`). Rows end in `\n`. Formats:
//!
//! | field            | header        | rows                                   |
//! |------------------|---------------|----------------------------------------|
//! | 1D wave          | `x,re,im`     | one per node, ascending `x`            |
//! | 1D density       | `x,rho`       | one per node                           |
//! | 2D density, long | `xa,xb,rho`   | row-major: `xa` slow, `xb` fast        |
//! | 2D density block | none          | `n` rows of `n` values; row = `xa` idx |
//!
//! Checkpoints are a block of `# key=value` lines (`axes`, `points`,
//! `half_width`, `step`, `time`, then any extra keys) followed by the
//! header `re,im` and one row per node in row-major order.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{expect_axes, DensityField, WaveField};
use crate::grid::SpatialGrid;

pub fn write_wave_1d<W: Write>(mut out: W, psi: &WaveField) -> std::io::Result<()> {
    expect_axes(psi.grid(), 1).map_err(to_io)?;
    writeln!(out, "x,re,im")?;
    for (x, v) in psi.grid().nodes().iter().zip(psi.values()) {
        writeln!(out, "{:e},{:e},{:e}", x, v.re, v.im)?;
    }
    Ok(())
}

pub fn write_density_1d<W: Write>(mut out: W, rho: &DensityField) -> std::io::Result<()> {
    expect_axes(rho.grid(), 1).map_err(to_io)?;
    writeln!(out, "x,rho")?;
    for (x, v) in rho.grid().nodes().iter().zip(rho.values()) {
        writeln!(out, "{:e},{:e}", x, v)?;
    }
    Ok(())
}

pub fn write_density_2d_long<W: Write>(mut out: W, rho: &DensityField) -> std::io::Result<()> {
    expect_axes(rho.grid(), 2).map_err(to_io)?;
    writeln!(out, "xa,xb,rho")?;
    let nodes = rho.grid().nodes();
    let n = nodes.len();
    for (i, xa) in nodes.iter().enumerate() {
        for (j, xb) in nodes.iter().enumerate() {
            writeln!(out, "{:e},{:e},{:e}", xa, xb, rho.values()[i * n + j])?;
        }
    }
    Ok(())
}

pub fn write_density_2d_matrix<W: Write>(mut out: W, rho: &DensityField) -> std::io::Result<()> {
    expect_axes(rho.grid(), 2).map_err(to_io)?;
    let n = rho.grid().points();
    let mut line = String::new();
    for row in rho.values().chunks(n) {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:e}", v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads a 1D wave table written by [`write_wave_1d`] back onto `grid`.
pub fn read_wave_1d<R: BufRead>(input: R, grid: SpatialGrid) -> Result<WaveField> {
    let rows = read_rows(input, "x,re,im", 3)?;
    let values = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
    WaveField::new(grid, values)
}

pub fn read_density_1d<R: BufRead>(input: R, grid: SpatialGrid) -> Result<DensityField> {
    let rows = read_rows(input, "x,rho", 2)?;
    DensityField::new(grid, rows.iter().map(|r| r[1]).collect())
}

pub fn read_density_2d_long<R: BufRead>(input: R, grid: SpatialGrid) -> Result<DensityField> {
    let rows = read_rows(input, "xa,xb,rho", 3)?;
    DensityField::new(grid, rows.iter().map(|r| r[2]).collect())
}

/// Metadata carried by a checkpoint header.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointHeader {
    pub grid: SpatialGrid,
    pub step: usize,
    pub time: f64,
    /// Additional `key=value` pairs, in file order.
    pub extra: Vec<(String, String)>,
}

pub fn write_checkpoint<W: Write>(
    mut out: W,
    header: &CheckpointHeader,
    psi: &WaveField,
) -> std::io::Result<()> {
    let g = psi.grid();
    writeln!(out, "# axes={}", g.axes())?;
    writeln!(out, "# points={}", g.points())?;
    writeln!(out, "# half_width={:e}", g.half_width())?;
    writeln!(out, "# step={}", header.step)?;
    writeln!(out, "# time={:e}", header.time)?;
    for (k, v) in &header.extra {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "re,im")?;
    for v in psi.values() {
        writeln!(out, "{:e},{:e}", v.re, v.im)?;
    }
    Ok(())
}

pub fn read_checkpoint<R: BufRead>(input: R) -> Result<(CheckpointHeader, WaveField)> {
    let mut meta: Vec<(String, String)> = Vec::new();
    let mut values = Vec::new();
    let mut seen_header = false;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| parse_err(line_no, e.to_string()))?;
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, "expected key=value".into()))?;
            meta.push((k.to_string(), v.to_string()));
        } else if !seen_header {
            if line.trim() != "re,im" {
                return Err(parse_err(
                    line_no,
                    format!("expected header re,im, got {line}"),
                ));
            }
            seen_header = true;
        } else {
            let nums = parse_numbers(&line, 2, line_no)?;
            values.push(Complex64::new(nums[0], nums[1]));
        }
    }
    let take = |key: &str| -> Result<String> {
        meta.iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| parse_err(0, format!("missing checkpoint key {key}")))
    };
    let num = |key: &str| -> Result<f64> {
        take(key)?
            .parse::<f64>()
            .map_err(|e| parse_err(0, format!("{key}: {e}")))
    };
    let int = |key: &str| -> Result<usize> {
        take(key)?
            .parse::<usize>()
            .map_err(|e| parse_err(0, format!("{key}: {e}")))
    };
    let grid = SpatialGrid::new(num("half_width")?, int("points")?, int("axes")?)?;
    let reserved = ["axes", "points", "half_width", "step", "time"];
    let header = CheckpointHeader {
        grid,
        step: int("step")?,
        time: num("time")?,
        extra: meta
            .iter()
            .filter(|(k, _)| !reserved.contains(&k.as_str()))
            .cloned()
            .collect(),
    };
    let psi = WaveField::new(grid, values)?;
    Ok((header, psi))
}

fn read_rows<R: BufRead>(input: R, header: &str, width: usize) -> Result<Vec<Vec<f64>>> {
    let mut lines = input.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim() == header => {}
        Some((_, Ok(h))) => return Err(parse_err(1, format!("expected header {header}, got {h}"))),
        Some((_, Err(e))) => return Err(parse_err(1, e.to_string())),
        None => return Err(parse_err(1, "empty input".into())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| parse_err(idx + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(parse_numbers(&line, width, idx + 1)?);
    }
    Ok(rows)
}

fn parse_numbers(line: &str, width: usize, line_no: usize) -> Result<Vec<f64>> {
    let nums = line
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| parse_err(line_no, e.to_string()))?;
    if nums.len() != width {
        return Err(parse_err(
            line_no,
            format!("expected {width} columns, got {}", nums.len()),
        ));
    }
    Ok(nums)
}

fn parse_err(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

fn to_io(e: Error) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn density_1d_layout_is_exact() {
        let g = SpatialGrid::one_d(1.0, 8).unwrap();
        let rho = DensityField::from_fn_1d(g, |_| 0.5).unwrap();
        let mut buf = Vec::new();
        write_density_1d(&mut buf, &rho).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,rho");
        assert_eq!(lines[1], "-1e0,5e-1");
        assert_eq!(lines[2], "-7.5e-1,5e-1");
        assert_eq!(lines.len(), 9);
    }

    #[test]
    fn matrix_block_has_n_rows_of_n() {
        let g = SpatialGrid::two_d(1.0, 8).unwrap();
        let rho = DensityField::from_fn_2d(g, |a, b| a * a + b * b).unwrap();
        let mut buf = Vec::new();
        write_density_2d_matrix(&mut buf, &rho).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 8);
        assert!(text.lines().all(|l| l.split(',').count() == 8));
        assert!(text.starts_with("2e0,1.5625e0,"));
    }

    #[test]
    fn long_format_reads_back() {
        let g = SpatialGrid::two_d(1.0, 8).unwrap();
        let rho = DensityField::from_fn_2d(g, |a, b| (a - 0.1 * b).exp()).unwrap();
        let mut buf = Vec::new();
        write_density_2d_long(&mut buf, &rho).unwrap();
        let back = read_density_2d_long(&buf[..], g).unwrap();
        assert_eq!(back, rho);
    }

    #[test]
    fn bad_header_is_a_parse_error() {
        let g = SpatialGrid::one_d(1.0, 8).unwrap();
        let err = read_density_1d(&b"x,p\n0,1\n"[..], g).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn checkpoint_round_trip() {
        let g = SpatialGrid::two_d(3.0, 8).unwrap();
        let psi = WaveField::from_fn_2d(g, |a, b| Complex64::new(a, b * 0.3)).unwrap();
        let header = CheckpointHeader {
            grid: g,
            step: 42,
            time: 0.125,
            extra: vec![("dt".into(), "1e-3".into())],
        };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &header, &psi).unwrap();
        let (h2, psi2) = read_checkpoint(&buf[..]).unwrap();
        assert_eq!(h2, header);
        assert_eq!(psi2, psi);
    }

    proptest! {
        #[test]
        fn wave_round_trip_is_bit_exact(vals in proptest::collection::vec(-1e6f64..1e6, 32)) {
            let g = SpatialGrid::one_d(2.5, 16).unwrap();
            let amps: Vec<Complex64> = vals.chunks(2).map(|c| Complex64::new(c[0], c[1] * 1e-9)).collect();
            let psi = WaveField::new(g, amps).unwrap();
            let mut buf = Vec::new();
            write_wave_1d(&mut buf, &psi).unwrap();
            let back = read_wave_1d(&buf[..], g).unwrap();
            prop_assert_eq!(back, psi);
        }
    }
}

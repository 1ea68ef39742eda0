//! XYZ point and OFF mesh file formats.
//!
//! XYZ: one point per line, three whitespace-separated decimal numbers;
//! blank lines and anything after `#` are ignored.
//!
//! OFF: the `OFF` keyword, a `vertices faces edges` counts line, the vertex
//! lines, then face lines that start with the vertex count `3`. Comments
//! (`#`) and blank lines are skipped anywhere.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{PointCloud, TriMesh};
use crate::{Error, Result, Vec3};

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_f64(tok: &str, path: &Path, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(path, line, format!("not a number: {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value: {tok:?}")));
    }
    Ok(v)
}

pub fn parse_xyz(reader: impl BufRead, path: &Path) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let body = strip_comment(&line);
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 3 {
            return Err(parse_err(path, idx + 1, format!("expected 3 values, found {}", toks.len())));
        }
        points.push(Vec3::new(
            parse_f64(toks[0], path, idx + 1)?,
            parse_f64(toks[1], path, idx + 1)?,
            parse_f64(toks[2], path, idx + 1)?,
        ));
    }
    if points.is_empty() {
        return Err(parse_err(path, 0, "no points"));
    }
    PointCloud::new(points)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn read_xyz(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    parse_xyz(open(path)?, path)
}

/// Writes one point per line using the shortest decimal form that parses
/// back to the same `f64`.
pub fn write_xyz(path: impl AsRef<Path>, points: &[Vec3]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in points {
        writeln!(w, "{} {} {}", p.x, p.y, p.z).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn parse_off(reader: impl BufRead, path: &Path) -> Result<TriMesh> {
    // (line number, tokens) for every non-empty line
    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let toks: Vec<String> = strip_comment(&line).split_whitespace().map(str::to_owned).collect();
        if !toks.is_empty() {
            lines.push((idx + 1, toks));
        }
    }
    let mut it = lines.into_iter();
    let (hline, mut header) = it.next().ok_or_else(|| parse_err(path, 0, "empty file"))?;
    if header[0] != "OFF" {
        return Err(parse_err(path, hline, "missing OFF header"));
    }
    // counts may share the header line
    header.remove(0);
    let (cline, counts) = if header.is_empty() {
        it.next().ok_or_else(|| parse_err(path, hline, "missing counts line"))?
    } else {
        (hline, header)
    };
    if counts.len() < 2 {
        return Err(parse_err(path, cline, "counts line needs vertex and face counts"));
    }
    let parse_count = |t: &str| -> Result<usize> {
        t.parse().map_err(|_| parse_err(path, cline, format!("bad count: {t:?}")))
    };
    let nv = parse_count(&counts[0])?;
    let nf = parse_count(&counts[1])?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, toks) = it.next().ok_or_else(|| parse_err(path, cline, "truncated vertex list"))?;
        if toks.len() < 3 {
            return Err(parse_err(path, ln, "vertex line needs 3 coordinates"));
        }
        vertices.push(Vec3::new(
            parse_f64(&toks[0], path, ln)?,
            parse_f64(&toks[1], path, ln)?,
            parse_f64(&toks[2], path, ln)?,
        ));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, toks) = it.next().ok_or_else(|| parse_err(path, cline, "truncated face list"))?;
        let idx: Vec<usize> = toks
            .iter()
            .map(|t| t.parse().map_err(|_| parse_err(path, ln, format!("bad index: {t:?}"))))
            .collect::<Result<_>>()?;
        if idx[0] != 3 || idx.len() < 4 {
            return Err(parse_err(path, ln, "only triangular faces (`3 a b c`) are supported"));
        }
        let face = [idx[1], idx[2], idx[3]];
        if face.iter().any(|&v| v >= nv) {
            return Err(parse_err(path, ln, format!("vertex index out of range (have {nv})")));
        }
        faces.push(face);
    }
    let mesh = TriMesh::new(vertices, faces)?;
    if mesh.is_empty() {
        return Err(parse_err(path, cline, "mesh has no non-degenerate faces"));
    }
    Ok(mesh)
}

pub fn read_off(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    parse_off(open(path)?, path)
}

pub fn write_off(path: impl AsRef<Path>, mesh: &TriMesh) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "OFF").map_err(io)?;
    writeln!(w, "{} {} 0", mesh.vertices().len(), mesh.faces().len()).map_err(io)?;
    for v in mesh.vertices() {
        writeln!(w, "{} {} {}", v.x, v.y, v.z).map_err(io)?;
    }
    for f in mesh.faces() {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2]).map_err(io)?;
    }
    w.flush().map_err(io)
}

//! OBJ, binary PLY and CSV writers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::SurfaceMesh;
use crate::error::{Error, Result};
use crate::su2::SU2Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
    Csv,
}

impl FromStr for MeshFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "ply" => Ok(MeshFormat::Ply),
            "csv" => Ok(MeshFormat::Csv),
            other => Err(Error::Argument(format!("unknown mesh format {other:?}"))),
        }
    }
}

/// Vertices and triangles after optional seam welding. Welding drops the
/// last `t`-column and wraps faces around to the first.
struct Topology {
    cols: usize,
    wrap: bool,
    triangles: Vec<[usize; 3]>,
}

fn topology(mesh: &SurfaceMesh) -> Topology {
    let wrap = mesh.is_closed() && mesh.spans_period() && mesh.n_t > 2;
    let cols = if wrap { mesh.n_t - 1 } else { mesh.n_t };
    let quads_per_row = if wrap { cols } else { cols.saturating_sub(1) };
    let v = |i: usize, j: usize| j * cols + (i % cols);
    let mut triangles = Vec::new();
    for j in 0..mesh.n_rho.saturating_sub(1) {
        for i in 0..quads_per_row {
            let (a, b, c, d) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    // Orient faces along the stored normals.
    if let Some(&[a, b, c]) = triangles.first() {
        let p = |k: usize| mesh.point(k % cols, k / cols);
        let n = mesh.normal(a % cols, a / cols);
        if (p(b) - p(a)).cross(&(p(c) - p(a))).dot(&n) < 0.0 {
            for t in &mut triangles {
                t.swap(1, 2);
            }
        }
    }
    Topology { cols, wrap, triangles }
}

fn vertices(mesh: &SurfaceMesh, topo: &Topology) -> Vec<(SU2Vector, SU2Vector)> {
    (0..mesh.n_rho)
        .flat_map(|j| (0..topo.cols).map(move |i| (mesh.point(i, j), mesh.normal(i, j))))
        .collect()
}

pub fn write_obj<W: Write>(mesh: &SurfaceMesh, out: &mut W) -> Result<()> {
    let topo = topology(mesh);
    let p = &mesh.metadata.params;
    writeln!(out, "# Delaunay surface a={} b={} c={} H={}", p.a, p.b, p.c, p.h)?;
    writeln!(out, "# grid {} x {}{}", mesh.n_t, mesh.n_rho, if topo.wrap { ", seam welded" } else { "" })?;
    let verts = vertices(mesh, &topo);
    for (v, _) in &verts {
        writeln!(out, "v {:.17e} {:.17e} {:.17e}", v.x(), v.y(), v.z())?;
    }
    for (_, n) in &verts {
        writeln!(out, "vn {:.17e} {:.17e} {:.17e}", n.x(), n.y(), n.z())?;
    }
    for t in &topo.triangles {
        let (a, b, c) = (t[0] + 1, t[1] + 1, t[2] + 1);
        writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}")?;
    }
    Ok(())
}

pub fn write_ply<W: Write>(mesh: &SurfaceMesh, out: &mut W) -> Result<()> {
    let topo = topology(mesh);
    let verts = vertices(mesh, &topo);
    write!(
        out,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\n\
         property double x\nproperty double y\nproperty double z\n\
         property double nx\nproperty double ny\nproperty double nz\n\
         element face {}\nproperty list uchar int vertex_indices\nend_header\n",
        verts.len(),
        topo.triangles.len()
    )?;
    for (v, n) in &verts {
        for c in v.0.iter().chain(n.0.iter()) {
            out.write_all(&c.to_le_bytes())?;
        }
    }
    for t in &topo.triangles {
        out.write_all(&[3u8])?;
        for &k in t {
            out.write_all(&(k as i32).to_le_bytes())?;
        }
    }
    Ok(())
}

/// All grid points, unwelded, with `f64` values in shortest round-trip form.
pub fn write_csv<W: Write>(mesh: &SurfaceMesh, out: &mut W) -> Result<()> {
    writeln!(out, "t,rho,x,y,z")?;
    for j in 0..mesh.n_rho {
        for i in 0..mesh.n_t {
            let v = mesh.point(i, j);
            writeln!(out, "{:?},{:?},{:?},{:?},{:?}", mesh.t_values[i], mesh.rho_values[j], v.x(), v.y(), v.z())?;
        }
    }
    Ok(())
}

/// Rows `(t, ρ, point)` of a CSV written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<(f64, f64, SU2Vector)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    for (n, line) in reader.lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match vals {
            Ok(v) if v.len() == 5 => rows.push((v[0], v[1], SU2Vector::new(v[2], v[3], v[4]))),
            _ => return Err(Error::Argument(format!("malformed CSV line {}: {line:?}", n + 1))),
        }
    }
    Ok(rows)
}

pub fn export(mesh: &SurfaceMesh, format: MeshFormat, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        MeshFormat::Obj => write_obj(mesh, &mut out)?,
        MeshFormat::Ply => write_ply(mesh, &mut out)?,
        MeshFormat::Csv => write_csv(mesh, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

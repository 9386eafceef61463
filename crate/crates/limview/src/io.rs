//! File formats: plain-text mesh exchange, CSV field exports, and binary PGM
//! heatmaps.
//!
//! Mesh format: a header line `nodes <V> triangles <T> boundary <B>`,
//! followed by V lines `x y`, T lines `i j k` (0-based node indices) and
//! B lines `node_index angle`.
//!
//! Scalar fields: CSV `node_index,x,y,value`; vector fields use `vx,vy`
//! columns.  Power densities: per element `element_index,cx,cy,H11,H12,H22,det`
//! or per node `node_index,x,y,H11,H12,H22`.

use crate::error::{Error, Result};
use crate::forward::{PowerDensityField, Support};
use crate::mesh::{Mesh, NodalField, NodalVectorField};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "nodes {} triangles {} boundary {}",
        mesh.node_count(),
        mesh.triangle_count(),
        mesh.boundary_nodes().len()
    );
    for p in mesh.nodes() {
        let _ = writeln!(out, "{} {}", p[0], p[1]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    for (&b, &a) in mesh
        .boundary_nodes()
        .iter()
        .zip(crate::mesh::boundary_angles(mesh).iter())
    {
        let _ = writeln!(out, "{b} {a}");
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty mesh file".into()))?;
    let hp: Vec<&str> = header.split_whitespace().collect();
    if hp.len() != 6 || hp[0] != "nodes" || hp[2] != "triangles" || hp[4] != "boundary" {
        return Err(Error::Config(format!("bad mesh header: {header:?}")));
    }
    let parse_count = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Config(format!("bad count {s:?} in mesh header")))
    };
    let (nv, nt, nb) = (parse_count(hp[1])?, parse_count(hp[3])?, parse_count(hp[5])?);

    let mut take = |what: &str| -> Result<Vec<&str>> {
        lines
            .next()
            .map(|l| l.split_whitespace().collect())
            .ok_or_else(|| Error::Config(format!("mesh file truncated in {what} block")))
    };
    let mut nodes = Vec::with_capacity(nv);
    for _ in 0..nv {
        let c = take("node")?;
        if c.len() != 2 {
            return Err(Error::Config("node line needs two columns".into()));
        }
        nodes.push([parse_f64(c[0])?, parse_f64(c[1])?]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let c = take("triangle")?;
        if c.len() != 3 {
            return Err(Error::Config("triangle line needs three columns".into()));
        }
        triangles.push([parse_usize(c[0])?, parse_usize(c[1])?, parse_usize(c[2])?]);
    }
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let c = take("boundary")?;
        if c.len() != 2 {
            return Err(Error::Config("boundary line needs two columns".into()));
        }
        boundary.push(parse_usize(c[0])?);
    }
    // Infer a nominal resolution from the boundary spacing.
    let target_h = (std::f64::consts::TAU / nb.max(1) as f64).clamp(0.005, 0.5);
    Mesh::from_parts(nodes, triangles, boundary, target_h)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Config(format!("bad number {s:?}")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::Config(format!("bad index {s:?}")))
}

pub fn write_nodal_field(mesh: &Mesh, field: &NodalField, path: &Path) -> Result<()> {
    let mut out = String::from("node_index,x,y,value\n");
    for (i, (p, v)) in mesh.nodes().iter().zip(field.values.iter()).enumerate() {
        let _ = writeln!(out, "{i},{},{},{v}", p[0], p[1]);
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_nodal_field(mesh: &Mesh, path: &Path) -> Result<NodalField> {
    let text = fs::read_to_string(path)?;
    let mut values = vec![0.0; mesh.node_count()];
    for line in text.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        if c.len() != 4 {
            return Err(Error::Config("field row needs 4 columns".into()));
        }
        let i = parse_usize(c[0])?;
        if i >= values.len() {
            return Err(Error::Config(format!("node index {i} out of range")));
        }
        values[i] = parse_f64(c[3])?;
    }
    NodalField::new(mesh, values)
}

pub fn write_nodal_vector_field(mesh: &Mesh, field: &NodalVectorField, path: &Path) -> Result<()> {
    let mut out = String::from("node_index,x,y,vx,vy\n");
    for (i, (p, v)) in mesh.nodes().iter().zip(field.values.iter()).enumerate() {
        let _ = writeln!(out, "{i},{},{},{},{}", p[0], p[1], v[0], v[1]);
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_nodal_vector_field(mesh: &Mesh, path: &Path) -> Result<NodalVectorField> {
    let text = fs::read_to_string(path)?;
    let mut values = vec![[0.0; 2]; mesh.node_count()];
    for line in text.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        if c.len() != 5 {
            return Err(Error::Config("vector field row needs 5 columns".into()));
        }
        let i = parse_usize(c[0])?;
        if i >= values.len() {
            return Err(Error::Config(format!("node index {i} out of range")));
        }
        values[i] = [parse_f64(c[3])?, parse_f64(c[4])?];
    }
    NodalVectorField::new(mesh, values)
}

pub fn write_power_density(mesh: &Mesh, h: &PowerDensityField, path: &Path) -> Result<()> {
    let mut out = String::new();
    match h.support {
        Support::Element => {
            out.push_str("element_index,cx,cy,H11,H12,H22,det\n");
            for t in 0..h.len() {
                let c = mesh.centroid(t);
                let _ = writeln!(
                    out,
                    "{t},{},{},{},{},{},{}",
                    c[0],
                    c[1],
                    h.h11[t],
                    h.h12[t],
                    h.h22[t],
                    h.det(t)
                );
            }
        }
        Support::Node => {
            out.push_str("node_index,x,y,H11,H12,H22\n");
            for (i, p) in mesh.nodes().iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{i},{},{},{},{},{}",
                    p[0], p[1], h.h11[i], h.h12[i], h.h22[i]
                );
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_nodal_power_density(mesh: &Mesh, path: &Path) -> Result<PowerDensityField> {
    let text = fs::read_to_string(path)?;
    let n = mesh.node_count();
    let mut h11 = vec![0.0; n];
    let mut h12 = vec![0.0; n];
    let mut h22 = vec![0.0; n];
    for line in text.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        if c.len() != 6 {
            return Err(Error::Config("power density row needs 6 columns".into()));
        }
        let i = parse_usize(c[0])?;
        if i >= n {
            return Err(Error::Config(format!("node index {i} out of range")));
        }
        h11[i] = parse_f64(c[3])?;
        h12[i] = parse_f64(c[4])?;
        h22[i] = parse_f64(c[5])?;
    }
    Ok(PowerDensityField::from_entries(h11, h12, h22, Support::Node))
}

/// Render a nodal field as an 8-bit binary PGM on a `size x size` grid over
/// `[-1, 1]^2`: linear min-max scaling, everything outside the disk written
/// as 0.  Rasterized triangle-by-triangle so the cost is one pass over the
/// mesh.
pub fn write_heatmap(mesh: &Mesh, field: &NodalField, size: usize, path: &Path) -> Result<()> {
    let mut values = vec![f64::NAN; size * size];
    let to_pixel = |coord: f64| ((coord + 1.0) / 2.0 * size as f64) as isize;
    let px_center = |k: usize| -1.0 + 2.0 * (k as f64 + 0.5) / size as f64;
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangles()[t];
        let (pa, pb, pc) = (
            mesh.nodes()[tri[0]],
            mesh.nodes()[tri[1]],
            mesh.nodes()[tri[2]],
        );
        let xmin = to_pixel(pa[0].min(pb[0]).min(pc[0])).max(0) as usize;
        let xmax = (to_pixel(pa[0].max(pb[0]).max(pc[0])) + 1).min(size as isize - 1) as usize;
        let ymin = to_pixel(pa[1].min(pb[1]).min(pc[1])).max(0) as usize;
        let ymax = (to_pixel(pa[1].max(pb[1]).max(pc[1])) + 1).min(size as isize - 1) as usize;
        let inv2a = 1.0 / (2.0 * mesh.triangle_area(t));
        for iy in ymin..=ymax {
            let y = px_center(iy);
            for ix in xmin..=xmax {
                let x = px_center(ix);
                let l0 = ((pb[0] - x) * (pc[1] - y) - (pc[0] - x) * (pb[1] - y)) * inv2a;
                let l1 = ((pc[0] - x) * (pa[1] - y) - (pa[0] - x) * (pc[1] - y)) * inv2a;
                let l2 = 1.0 - l0 - l1;
                if l0 >= -1e-12 && l1 >= -1e-12 && l2 >= -1e-12 {
                    // Image row 0 at the top (y = +1).
                    let row = size - 1 - iy;
                    values[row * size + ix] = l0 * field.values[tri[0]]
                        + l1 * field.values[tri[1]]
                        + l2 * field.values[tri[2]];
                }
            }
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in &values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut bytes = Vec::with_capacity(values.len() + 32);
    bytes.extend_from_slice(format!("P5\n{size} {size}\n255\n").as_bytes());
    for &v in &values {
        if v.is_finite() {
            bytes.push(((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8);
        } else {
            bytes.push(0);
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

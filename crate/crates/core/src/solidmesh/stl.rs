//! Binary STL reading and writing.

use super::{MeshError, TriangleMesh};
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

pub const HEADER_LEN: usize = 80;
pub const RECORD_LEN: usize = 50;
const TOOL_TAG: &str = "pkweir";

fn normal(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [f32; 3] {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if len > 0.0 {
        n.map(|c| (c / len) as f32)
    } else {
        [0.0; 3]
    }
}

pub fn encode_stl<W: Write>(mesh: &TriangleMesh, geometry_id: &str, mut out: W) -> std::io::Result<()> {
    let mut header = [0u8; HEADER_LEN];
    let label = format!("{TOOL_TAG} {geometry_id}");
    let n = label.len().min(HEADER_LEN);
    header[..n].copy_from_slice(&label.as_bytes()[..n]);
    out.write_all(&header)?;
    out.write_all(&(mesh.triangles.len() as u32).to_le_bytes())?;
    let mut rec = [0u8; RECORD_LEN];
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| mesh.vertices[i as usize]);
        let mut values = Vec::with_capacity(12);
        values.extend(normal(a, b, c));
        for p in [a, b, c] {
            values.extend(p.map(|v| v as f32));
        }
        for (k, v) in values.iter().enumerate() {
            rec[4 * k..4 * k + 4].copy_from_slice(&v.to_le_bytes());
        }
        rec[48..50].copy_from_slice(&0u16.to_le_bytes());
        out.write_all(&rec)?;
    }
    Ok(())
}

pub fn write_stl(mesh: &TriangleMesh, geometry_id: &str, path: &Path) -> Result<(), MeshError> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    encode_stl(mesh, geometry_id, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Parses a binary STL, welding vertices with identical coordinates.
/// Returns the mesh and the header text up to the first NUL.
pub fn decode_stl(bytes: &[u8]) -> Result<(TriangleMesh, String), MeshError> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(MeshError::MalformedStl(format!("file too short: {} bytes", bytes.len())));
    }
    let header_end = bytes[..HEADER_LEN].iter().position(|&b| b == 0).unwrap_or(HEADER_LEN);
    let header = String::from_utf8_lossy(&bytes[..header_end]).into_owned();
    let count = u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 4].try_into().unwrap()) as usize;
    let body = &bytes[HEADER_LEN + 4..];
    if body.len() != count * RECORD_LEN {
        return Err(MeshError::MalformedStl(format!(
            "declared {count} triangles but payload holds {} bytes ({} expected)",
            body.len(),
            count * RECORD_LEN
        )));
    }
    let mut index: HashMap<[u32; 3], u32> = HashMap::new();
    let mut mesh = TriangleMesh::default();
    for rec in body.chunks_exact(RECORD_LEN) {
        let f = |k: usize| f32::from_le_bytes(rec[4 * k..4 * k + 4].try_into().unwrap());
        let mut tri = [0u32; 3];
        for (v, slot) in tri.iter_mut().enumerate() {
            let p = [f(3 + 3 * v), f(4 + 3 * v), f(5 + 3 * v)];
            let bits = p.map(f32::to_bits);
            *slot = *index.entry(bits).or_insert_with(|| {
                mesh.vertices.push(p.map(f64::from));
                (mesh.vertices.len() - 1) as u32
            });
        }
        mesh.triangles.push(tri);
    }
    Ok((mesh, header))
}

pub fn read_stl(path: &Path) -> Result<TriangleMesh, MeshError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    Ok(decode_stl(&bytes)?.0)
}

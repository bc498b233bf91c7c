//! Surface point clouds: area-weighted sampling, unit-cube normalisation and
//! file formats.

use crate::rng::{stream_rng, Domain};
use crate::solidmesh::TriangleMesh;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

pub const MAGIC: &[u8; 4] = b"WNPC";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 8 + 1 + 4 * 8;

/// Points per stored cloud.
pub const DATASET_POINTS: usize = 100_000;
/// Points per network input.
pub const MODEL_POINTS: usize = 5_000;

#[derive(Debug, thiserror::Error)]
pub enum CloudError {
    #[error("mesh has no triangles with positive area")]
    EmptyMesh,
    #[error("point extent below 1e-12 m on every axis")]
    DegenerateExtent,
    #[error("cloud is not in world coordinates")]
    WrongFrame,
    #[error("malformed cloud: {0}")]
    MalformedCloud(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    World,
    UnitCube,
}

/// Maps unit-cube coordinates back to the world: `world = offset + scale * unit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudTransform {
    pub scale: f64,
    pub offset: [f64; 3],
}

impl CloudTransform {
    pub const IDENTITY: CloudTransform = CloudTransform { scale: 1.0, offset: [0.0; 3] };

    pub fn to_world(&self, p: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|k| self.offset[k] + self.scale * p[k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<[f64; 3]>,
    pub frame: Frame,
    pub transform: CloudTransform,
    pub source_geometry_id: String,
    pub seed: Option<u64>,
}

impl PointCloud {
    pub fn world(points: Vec<[f64; 3]>) -> Self {
        PointCloud {
            points,
            frame: Frame::World,
            transform: CloudTransform::IDENTITY,
            source_geometry_id: String::new(),
            seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Samples `n` points uniformly over the surface. Also returns the source
/// triangle of every point.
pub fn sample_surface_indexed(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<(PointCloud, Vec<u32>), CloudError> {
    let mut cumulative = Vec::with_capacity(mesh.triangles.len());
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle_points(t);
        total += triangle_area(a, b, c);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(CloudError::EmptyMesh);
    }
    let mut rng = stream_rng(seed, Domain::Surface, 0);
    let mut points = Vec::with_capacity(n);
    let mut source = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.random::<f64>() * total;
        let t = cumulative.partition_point(|&c| c <= target).min(cumulative.len() - 1);
        let (mut u, mut v): (f64, f64) = (rng.random(), rng.random());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        let [a, b, c] = mesh.triangle_points(t);
        points.push(std::array::from_fn(|k| a[k] + u * (b[k] - a[k]) + v * (c[k] - a[k])));
        source.push(t as u32);
    }
    let mut cloud = PointCloud::world(points);
    cloud.seed = Some(seed);
    Ok((cloud, source))
}

pub fn sample_surface(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<PointCloud, CloudError> {
    Ok(sample_surface_indexed(mesh, n, seed)?.0)
}

pub fn triangle_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
}

/// Scales isotropically so the longest side of the bounding box spans
/// `[0, 1]` and the box starts at the origin.
pub fn normalize_unit_cube(cloud: &PointCloud) -> Result<PointCloud, CloudError> {
    if cloud.frame != Frame::World {
        return Err(CloudError::WrongFrame);
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in &cloud.points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let scale = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    if !(scale >= 1e-12) {
        return Err(CloudError::DegenerateExtent);
    }
    let points = cloud
        .points
        .iter()
        .map(|p| std::array::from_fn(|k| ((p[k] - lo[k]) / scale).clamp(0.0, 1.0)))
        .collect();
    Ok(PointCloud {
        points,
        frame: Frame::UnitCube,
        transform: CloudTransform { scale, offset: lo },
        source_geometry_id: cloud.source_geometry_id.clone(),
        seed: cloud.seed,
    })
}

pub fn denormalize(cloud: &PointCloud) -> PointCloud {
    if cloud.frame == Frame::World {
        return cloud.clone();
    }
    PointCloud {
        points: cloud.points.iter().map(|p| cloud.transform.to_world(*p)).collect(),
        frame: Frame::World,
        transform: CloudTransform::IDENTITY,
        source_geometry_id: cloud.source_geometry_id.clone(),
        seed: cloud.seed,
    }
}

/// `m` distinct points chosen at random, in their original order.
pub fn subsample(cloud: &PointCloud, m: usize, seed: u64) -> PointCloud {
    let mut rng = stream_rng(seed, Domain::Subsample, 0);
    let m = m.min(cloud.points.len());
    let mut idx = rand::seq::index::sample(&mut rng, cloud.points.len(), m).into_vec();
    idx.sort_unstable();
    PointCloud { points: idx.iter().map(|&i| cloud.points[i]).collect(), ..cloud.clone() }
}

pub fn encode_cloud<W: Write>(cloud: &PointCloud, mut out: W) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&(cloud.points.len() as u64).to_le_bytes())?;
    out.write_all(&[u8::from(cloud.frame == Frame::UnitCube)])?;
    for v in cloud.transform.offset.iter().chain(std::iter::once(&cloud.transform.scale)) {
        out.write_all(&v.to_le_bytes())?;
    }
    for p in &cloud.points {
        for v in p {
            out.write_all(&(*v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn decode_cloud(bytes: &[u8]) -> Result<PointCloud, CloudError> {
    let bad = |m: &str| CloudError::MalformedCloud(m.to_string());
    if bytes.len() < HEADER_LEN {
        return Err(bad("truncated header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(CloudError::MalformedCloud(format!("unsupported version {version}")));
    }
    let count = u64::from_le_bytes(bytes[6..14].try_into().unwrap());
    let frame = match bytes[14] {
        0 => Frame::World,
        1 => Frame::UnitCube,
        f => return Err(CloudError::MalformedCloud(format!("unknown frame flag {f}"))),
    };
    let f64_at = |k: usize| f64::from_le_bytes(bytes[15 + 8 * k..23 + 8 * k].try_into().unwrap());
    let transform = CloudTransform { offset: [f64_at(0), f64_at(1), f64_at(2)], scale: f64_at(3) };
    if !(transform.scale > 0.0) {
        return Err(bad("non-positive scale"));
    }
    let body = &bytes[HEADER_LEN..];
    let expected = count.checked_mul(12).ok_or_else(|| bad("point count overflow"))?;
    if body.len() as u64 != expected {
        return Err(CloudError::MalformedCloud(format!(
            "declared {count} points but payload holds {} bytes",
            body.len()
        )));
    }
    let points = body
        .chunks_exact(12)
        .map(|c| std::array::from_fn(|k| f64::from(f32::from_le_bytes(c[4 * k..4 * k + 4].try_into().unwrap()))))
        .collect();
    Ok(PointCloud { points, frame, transform, source_geometry_id: String::new(), seed: None })
}

pub fn write_cloud(cloud: &PointCloud, path: &std::path::Path) -> Result<(), CloudError> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    encode_cloud(cloud, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_cloud(path: &std::path::Path) -> Result<PointCloud, CloudError> {
    let mut cloud = decode_cloud(&std::fs::read(path)?)?;
    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
        cloud.source_geometry_id = stem.strip_prefix("geometry_").unwrap_or(stem).to_string();
    }
    Ok(cloud)
}

/// Plain-text form: one `x,y,z` line per point.
pub fn write_xyz<W: Write>(cloud: &PointCloud, mut out: W) -> std::io::Result<()> {
    for p in &cloud.points {
        writeln!(out, "{},{},{}", p[0], p[1], p[2])?;
    }
    Ok(())
}

pub fn read_xyz<R: BufRead>(input: R) -> Result<PointCloud, CloudError> {
    let mut points = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CloudError::MalformedCloud(format!("line {}: {e}", i + 1)))?;
        let [x, y, z] = vals[..] else {
            return Err(CloudError::MalformedCloud(format!("line {}: expected 3 values", i + 1)));
        };
        points.push([x, y, z]);
    }
    Ok(PointCloud::world(points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_normalisation() {
        let c = PointCloud::world(vec![[1.0, 1.0, 1.0], [3.0, 2.0, 1.5]]);
        let n = normalize_unit_cube(&c).unwrap();
        assert_eq!(n.transform.scale, 2.0);
        assert_eq!(n.points[1], [1.0, 0.5, 0.25]);
        let back = denormalize(&n);
        assert_eq!(back.points, c.points);
    }

    #[test]
    fn unit_cloud_has_identity_transform() {
        let c = PointCloud::world(vec![[0.0, 0.0, 0.0], [1.0, 0.3, 0.2], [0.5, 0.5, 0.5]]);
        let n = normalize_unit_cube(&c).unwrap();
        assert_eq!(n.transform, CloudTransform::IDENTITY);
        assert_eq!(n.points, c.points);
    }

    #[test]
    fn degenerate_extent() {
        let c = PointCloud::world(vec![[1.0, 1.0, 1.0]; 3]);
        assert!(matches!(normalize_unit_cube(&c), Err(CloudError::DegenerateExtent)));
    }

    #[test]
    fn empty_cloud_file() {
        let mut buf = Vec::new();
        encode_cloud(&PointCloud::world(vec![]), &mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN);
        assert!(decode_cloud(&buf).unwrap().is_empty());
        buf.pop();
        assert!(matches!(decode_cloud(&buf), Err(CloudError::MalformedCloud(_))));
    }

    #[test]
    fn text_round_trip() {
        let c = PointCloud::world(vec![[0.1, 0.2, 0.3], [1.5, -2.0, 1e-3]]);
        let mut buf = Vec::new();
        write_xyz(&c, &mut buf).unwrap();
        assert_eq!(read_xyz(&buf[..]).unwrap().points, c.points);
    }

    #[test]
    fn subsample_is_subset() {
        let c = PointCloud::world((0..100).map(|i| [i as f64, 0.0, 0.0]).collect());
        let s = subsample(&c, 10, 4);
        assert_eq!(s.len(), 10);
        assert!(s.points.windows(2).all(|w| w[0][0] < w[1][0]));
        assert_eq!(subsample(&c, 10, 4), s);
    }
}

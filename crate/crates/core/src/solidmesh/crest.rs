//! Crest centreline measured on a finished mesh.
//!
//! The crest is the set of triangles lying entirely at the weir height. Its
//! outline is one closed polygon that runs along both faces of the folded
//! crest wall and crosses the wall at the two outer ends (`y = 0` and
//! `y = W`). Pairing the corners of the two faces gives the mitred
//! mid-thickness centreline. Inclined centreline segments are then scaled
//! to the full streamwise length, which is the developed-length convention
//! used for the sidewalls.

use super::{MeshError, TriangleMesh};
use std::collections::{HashMap, HashSet};

const TOL: f64 = 1e-12;

/// Corners of the crest outline and the resulting length.
#[derive(Debug, Clone, PartialEq)]
pub struct CrestTrace {
    /// Corner-paired centreline vertices in plan, from `y = 0` to `y = W`.
    pub centreline: Vec<[f64; 2]>,
    /// Length of the mitred centreline polyline.
    pub mitred_length: f64,
    /// Developed length with inclined segments spanning the full length.
    pub developed_length: f64,
}

fn err(msg: impl Into<String>) -> MeshError {
    MeshError::CrestTrace(msg.into())
}

fn outline(mesh: &TriangleMesh, height: f64) -> Result<Vec<[f64; 2]>, MeshError> {
    let at_top = |i: u32| (mesh.vertices[i as usize][2] - height).abs() <= TOL;
    let mut directed: HashSet<(u32, u32)> = HashSet::new();
    for t in mesh.triangles.iter().filter(|t| t.iter().all(|&i| at_top(i))) {
        for k in 0..3 {
            directed.insert((t[k], t[(k + 1) % 3]));
        }
    }
    let mut next: HashMap<u32, u32> = HashMap::new();
    for &(a, b) in &directed {
        if !directed.contains(&(b, a)) && next.insert(a, b).is_some() {
            return Err(err("crest outline branches"));
        }
    }
    let Some(&start) = next.keys().min() else {
        return Err(err("no crest triangles"));
    };
    let mut loop_ids = vec![start];
    let mut cur = start;
    loop {
        cur = *next.get(&cur).ok_or_else(|| err("crest outline is open"))?;
        if cur == start {
            break;
        }
        loop_ids.push(cur);
        if loop_ids.len() > next.len() {
            return Err(err("crest outline does not close"));
        }
    }
    if loop_ids.len() != next.len() {
        return Err(err("crest outline has several loops"));
    }
    Ok(loop_ids.iter().map(|&i| [mesh.vertices[i as usize][0], mesh.vertices[i as usize][1]]).collect())
}

fn drop_collinear(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    loop {
        let n = pts.len();
        if n < 4 {
            return pts;
        }
        let mut keep = vec![true; n];
        let mut changed = false;
        for i in 0..n {
            let p = pts[(i + n - 1) % n];
            let c = pts[i];
            let q = pts[(i + 1) % n];
            let u = [c[0] - p[0], c[1] - p[1]];
            let v = [q[0] - c[0], q[1] - c[1]];
            let cross = u[0] * v[1] - u[1] * v[0];
            let scale = (u[0].hypot(u[1]) * v[0].hypot(v[1])).max(f64::MIN_POSITIVE);
            if cross.abs() <= 1e-9 * scale && u[0] * v[0] + u[1] * v[1] > 0.0 {
                keep[i] = false;
                changed = true;
                break;
            }
        }
        if !changed {
            return pts;
        }
        pts = pts.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect();
    }
}

/// Traces the crest of a weir mesh of height `height`, width `width` and
/// streamwise length `length`.
pub fn trace_crest(mesh: &TriangleMesh, height: f64, width: f64, length: f64) -> Result<CrestTrace, MeshError> {
    let pts = drop_collinear(outline(mesh, height)?);
    let n = pts.len();
    let on = |i: usize, y: f64| (pts[i][1] - y).abs() <= TOL && (pts[(i + 1) % n][1] - y).abs() <= TOL;
    let caps0: Vec<usize> = (0..n).filter(|&i| on(i, 0.0)).collect();
    let caps1: Vec<usize> = (0..n).filter(|&i| on(i, width)).collect();
    let (&[c0], &[c1]) = (caps0.as_slice(), caps1.as_slice()) else {
        return Err(err(format!("expected one end cap at each side, found {} and {}", caps0.len(), caps1.len())));
    };
    // Walk from the end of cap 0 to the start of cap 1, and from the end of
    // cap 1 back to the start of cap 0 (reversed so both run y = 0 -> W).
    let walk = |from: usize, to: usize| {
        let mut v = vec![from];
        let mut i = from;
        while i != to {
            i = (i + 1) % n;
            v.push(i);
        }
        v
    };
    let side_a = walk((c0 + 1) % n, c1);
    let mut side_b = walk((c1 + 1) % n, c0);
    side_b.reverse();
    if side_a.len() != side_b.len() {
        return Err(err(format!("crest faces have {} and {} corners", side_a.len(), side_b.len())));
    }
    let centreline: Vec<[f64; 2]> = side_a
        .iter()
        .zip(&side_b)
        .map(|(&i, &j)| [0.5 * (pts[i][0] + pts[j][0]), 0.5 * (pts[i][1] + pts[j][1])])
        .collect();
    let mut mitred_length = 0.0;
    let mut developed_length = 0.0;
    for w in centreline.windows(2) {
        let (dx, dy) = (w[1][0] - w[0][0], w[1][1] - w[0][1]);
        let seg = dx.hypot(dy);
        mitred_length += seg;
        developed_length += if dx.abs() <= 1e-9 * length { seg } else { seg * length / dx.abs() };
    }
    Ok(CrestTrace { centreline, mitred_length, developed_length })
}

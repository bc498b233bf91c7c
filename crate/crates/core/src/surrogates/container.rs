//! Versioned binary model files.
//!
//! Layout, little-endian: magic `WNSM`, format version `u32`, kind tag `u8`,
//! payload length `u64`, payload. Tree nodes are stored as a tag byte
//! followed by their fields; the network stores its configuration and then
//! every parameter as `f64`.

use super::ensemble::{BoostedModel, ForestModel, ForestParams, GbmParams};
use super::pointnet::{PointNetConfig, PointNetMini, PARAMETER_COUNT};
use super::tree::{Node, RegressionTree, TreeParams};
use super::SurrogateModel;
use std::io::{Read, Write};

pub const MAGIC: &[u8; 4] = b"WNSM";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ContainerError {
    #[error("not a model file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("unknown model kind {0}")]
    Kind(u8),
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Default)]
struct Enc(Vec<u8>);

impl Enc {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend(v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend(v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend(v.to_le_bytes());
    }
    fn opt(&mut self, v: Option<usize>) {
        self.u64(v.map_or(u64::MAX, |v| v as u64));
    }
    fn tree_params(&mut self, p: &TreeParams) {
        self.opt(p.max_depth);
        self.u64(p.min_samples_leaf as u64);
        self.u64(p.min_samples_split as u64);
        self.opt(p.max_features);
    }
    fn tree(&mut self, t: &RegressionTree) {
        self.u32(t.n_features as u32);
        self.tree_params(&t.params);
        self.u64(t.nodes.len() as u64);
        for n in &t.nodes {
            match *n {
                Node::Split { feature, threshold, left, right } => {
                    self.u8(0);
                    self.u32(feature as u32);
                    self.f64(threshold);
                    self.u64(left as u64);
                    self.u64(right as u64);
                }
                Node::Leaf { value, count } => {
                    self.u8(1);
                    self.f64(value);
                    self.u64(count as u64);
                }
            }
        }
    }
}

struct Dec<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Dec<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], ContainerError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| ContainerError::Corrupt(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, ContainerError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, ContainerError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, ContainerError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize, ContainerError> {
        usize::try_from(self.u64()?).map_err(|_| ContainerError::Corrupt("count overflow".into()))
    }
    fn f64(&mut self) -> Result<f64, ContainerError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn opt(&mut self) -> Result<Option<usize>, ContainerError> {
        let v = self.u64()?;
        Ok((v != u64::MAX).then_some(v as usize))
    }
    fn tree_params(&mut self) -> Result<TreeParams, ContainerError> {
        Ok(TreeParams {
            max_depth: self.opt()?,
            min_samples_leaf: self.usize()?,
            min_samples_split: self.usize()?,
            max_features: self.opt()?,
        })
    }
    fn tree(&mut self) -> Result<RegressionTree, ContainerError> {
        let n_features = self.u32()? as usize;
        let params = self.tree_params()?;
        let count = self.usize()?;
        if count == 0 || count > self.buf.len() {
            return Err(ContainerError::Corrupt(format!("node count {count}")));
        }
        let mut nodes = Vec::with_capacity(count);
        for _ in 0..count {
            nodes.push(match self.u8()? {
                0 => {
                    let feature = self.u32()? as usize;
                    let threshold = self.f64()?;
                    let (left, right) = (self.usize()?, self.usize()?);
                    if feature >= n_features || left >= count || right >= count {
                        return Err(ContainerError::Corrupt("split refers outside the tree".into()));
                    }
                    Node::Split { feature, threshold, left, right }
                }
                1 => Node::Leaf { value: self.f64()?, count: self.usize()? },
                t => return Err(ContainerError::Corrupt(format!("node tag {t}"))),
            });
        }
        Ok(RegressionTree { n_features, params, nodes })
    }
    fn trees(&mut self) -> Result<Vec<RegressionTree>, ContainerError> {
        let n = self.usize()?;
        if n > self.buf.len() {
            return Err(ContainerError::Corrupt(format!("tree count {n}")));
        }
        (0..n).map(|_| self.tree()).collect()
    }
}

fn kind_tag(m: &SurrogateModel) -> u8 {
    match m {
        SurrogateModel::Tree(_) => 1,
        SurrogateModel::Forest(_) => 2,
        SurrogateModel::Boosted(_) => 3,
        SurrogateModel::PointNet { .. } => 4,
    }
}

pub fn encode_model<W: Write>(model: &SurrogateModel, mut out: W) -> std::io::Result<()> {
    let mut e = Enc::default();
    match model {
        SurrogateModel::Tree(t) => e.tree(t),
        SurrogateModel::Forest(f) => {
            e.u64(f.params.n_trees as u64);
            e.u8(f.params.bootstrap as u8);
            e.tree_params(&f.params.tree);
            e.u64(f.params.seed);
            e.u64(f.trees.len() as u64);
            f.trees.iter().for_each(|t| e.tree(t));
        }
        SurrogateModel::Boosted(b) => {
            e.u64(b.params.n_stages as u64);
            e.opt(b.params.max_depth);
            e.f64(b.params.learning_rate);
            e.u64(b.params.min_samples_leaf as u64);
            e.f64(b.initial);
            e.u64(b.train_loss.len() as u64);
            b.train_loss.iter().for_each(|&v| e.f64(v));
            e.u64(b.trees.len() as u64);
            b.trees.iter().for_each(|t| e.tree(t));
        }
        SurrogateModel::PointNet { net, config } => {
            e.u64(config.max_epochs as u64);
            e.u64(config.batch_size as u64);
            for v in [config.learning_rate, config.beta1, config.beta2, config.epsilon] {
                e.f64(v);
            }
            e.u64(config.patience as u64);
            e.u64(config.seed);
            e.u64(net.params.len() as u64);
            net.params.iter().for_each(|&v| e.f64(v));
        }
    }
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&[kind_tag(model)])?;
    out.write_all(&(e.0.len() as u64).to_le_bytes())?;
    out.write_all(&e.0)
}

pub fn decode_model(bytes: &[u8]) -> Result<SurrogateModel, ContainerError> {
    if bytes.len() < 17 || &bytes[..4] != MAGIC {
        return Err(ContainerError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(ContainerError::Version(version));
    }
    let kind = bytes[8];
    let len = u64::from_le_bytes(bytes[9..17].try_into().unwrap());
    let payload = &bytes[17..];
    if payload.len() as u64 != len {
        return Err(ContainerError::Corrupt(format!("payload {} bytes, header says {len}", payload.len())));
    }
    let mut d = Dec { buf: payload, pos: 0 };
    let model = match kind {
        1 => SurrogateModel::Tree(d.tree()?),
        2 => {
            let params = ForestParams {
                n_trees: d.usize()?,
                bootstrap: d.u8()? != 0,
                tree: d.tree_params()?,
                seed: d.u64()?,
            };
            let trees = d.trees()?;
            if trees.is_empty() {
                return Err(ContainerError::Corrupt("forest without trees".into()));
            }
            SurrogateModel::Forest(ForestModel { params, trees })
        }
        3 => {
            let params = GbmParams {
                n_stages: d.usize()?,
                max_depth: d.opt()?,
                learning_rate: d.f64()?,
                min_samples_leaf: d.usize()?,
            };
            let initial = d.f64()?;
            let n_loss = d.usize()?;
            if n_loss > payload.len() {
                return Err(ContainerError::Corrupt(format!("loss count {n_loss}")));
            }
            let train_loss = (0..n_loss).map(|_| d.f64()).collect::<Result<_, _>>()?;
            let trees = d.trees()?;
            SurrogateModel::Boosted(BoostedModel { params, initial, trees, train_loss })
        }
        4 => {
            let config = PointNetConfig {
                max_epochs: d.usize()?,
                batch_size: d.usize()?,
                learning_rate: d.f64()?,
                beta1: d.f64()?,
                beta2: d.f64()?,
                epsilon: d.f64()?,
                patience: d.usize()?,
                seed: d.u64()?,
            };
            let n = d.usize()?;
            if n != PARAMETER_COUNT {
                return Err(ContainerError::Corrupt(format!("{n} network parameters, expected {PARAMETER_COUNT}")));
            }
            let params = (0..n).map(|_| d.f64()).collect::<Result<_, _>>()?;
            SurrogateModel::PointNet { net: PointNetMini { params }, config }
        }
        k => return Err(ContainerError::Kind(k)),
    };
    if d.pos != payload.len() {
        return Err(ContainerError::Corrupt(format!("{} trailing bytes", payload.len() - d.pos)));
    }
    Ok(model)
}

pub fn write_model(model: &SurrogateModel, path: &std::path::Path) -> Result<(), ContainerError> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    encode_model(model, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_model(path: &std::path::Path) -> Result<SurrogateModel, ContainerError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_model(&bytes)
}

#[cfg(test)]
mod tests {
    use super::super::ensemble::{fit_forest, fit_gbm};
    use super::*;
    use crate::exec::Exec;

    fn data() -> (Vec<[f64; 2]>, Vec<f64>) {
        let x: Vec<[f64; 2]> = (0..40).map(|i| [i as f64, ((i * 3) % 7) as f64]).collect();
        let y = x.iter().map(|r| r[0].sqrt() + r[1]).collect();
        (x, y)
    }

    fn round_trip(m: &SurrogateModel) -> SurrogateModel {
        let mut buf = Vec::new();
        encode_model(m, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"WNSM");
        decode_model(&buf).unwrap()
    }

    #[test]
    fn every_kind_round_trips() {
        let (x, y) = data();
        let forest = fit_forest(&x, &y, ForestParams { n_trees: 3, ..ForestParams::default() }, Exec::Serial).unwrap();
        let gbm = fit_gbm(&x, &y, GbmParams { n_stages: 5, ..GbmParams::default() }).unwrap();
        let models = [
            SurrogateModel::Tree(forest.trees[0].clone()),
            SurrogateModel::Forest(forest),
            SurrogateModel::Boosted(gbm),
            SurrogateModel::PointNet { net: PointNetMini::new(1, 0.3), config: PointNetConfig::default() },
        ];
        for m in &models {
            assert_eq!(&round_trip(m), m);
        }
    }

    #[test]
    fn corruption_detected() {
        let (x, y) = data();
        let t = super::super::tree::fit_tree(&x, &y, TreeParams::default()).unwrap();
        let mut buf = Vec::new();
        encode_model(&SurrogateModel::Tree(t), &mut buf).unwrap();
        assert!(matches!(decode_model(&buf[..buf.len() - 1]), Err(ContainerError::Corrupt(_))));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(decode_model(&bad), Err(ContainerError::BadMagic)));
        let mut bad = buf.clone();
        bad[8] = 9;
        assert!(matches!(decode_model(&bad), Err(ContainerError::Kind(9))));
    }
}

//! Datasets: IDX and CIFAR-10 binary loaders, plus seeded Gaussian blobs.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::Tensor;

/// Labelled examples with features in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    num_classes: usize,
    features: Vec<Tensor>,
    labels: Vec<usize>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        num_classes: usize,
        features: Vec<Tensor>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::input("dataset needs at least two classes"));
        }
        if features.len() != labels.len() {
            return Err(Error::input(format!(
                "{} feature vectors but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::input(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        if let Some(first) = features.first() {
            if features.iter().any(|f| f.shape() != first.shape()) {
                return Err(Error::input("feature tensors differ in shape"));
            }
        }
        if features.iter().any(|f| !f.all_in_unit_range()) {
            return Err(Error::input("feature values must lie in [0, 1]"));
        }
        Ok(Self {
            name: name.into(),
            num_classes,
            features,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn features(&self) -> &[Tensor] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature length, or 0 for an empty dataset.
    pub fn feature_dim(&self) -> usize {
        self.features.first().map_or(0, Tensor::len)
    }

    fn select(&self, name: String, indices: &[usize]) -> Self {
        Self {
            name,
            num_classes: self.num_classes,
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// The first `n` examples (or all of them if fewer).
    pub fn take(&self, n: usize) -> Self {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.select(self.name.clone(), &idx)
    }

    /// Seeded random split: the first `ratio` of a permutation becomes the
    /// training part, the rest the test part.
    pub fn split(&self, ratio: f64, seed: u64) -> Result<(Self, Self)> {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(Error::config(format!("split ratio {ratio} outside [0, 1]")));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut rng::from_seed(seed));
        let cut = (ratio * self.len() as f64).round() as usize;
        Ok((
            self.select(format!("{}[train]", self.name), &idx[..cut]),
            self.select(format!("{}[test]", self.name), &idx[cut..]),
        ))
    }

    /// Serialises to CIFAR-10 binary records (label byte + pixel bytes).
    pub fn to_cifar_bin(&self) -> Result<Vec<u8>> {
        if self.feature_dim() != CIFAR_PIXELS || self.num_classes > 256 {
            return Err(Error::input(
                "dataset does not have CIFAR-10 record geometry",
            ));
        }
        let mut out = Vec::with_capacity(self.len() * CIFAR_RECORD);
        for (f, &l) in self.features.iter().zip(&self.labels) {
            out.push(l as u8);
            out.extend(f.values().iter().map(|&v| (v * 255.0).round() as u8));
        }
        Ok(out)
    }
}

pub const IDX_IMAGES_MAGIC: u32 = 2051;
pub const IDX_LABELS_MAGIC: u32 = 2049;
pub const CIFAR_PIXELS: usize = 3072;
pub const CIFAR_RECORD: usize = CIFAR_PIXELS + 1;

fn read_be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::format(offset, "truncated IDX header"))
}

/// Parses an IDX header with unsigned-byte payload. Returns `(dims, payload offset)`.
fn idx_header(bytes: &[u8], expected_magic: u32) -> Result<(Vec<usize>, usize)> {
    let magic = read_be_u32(bytes, 0)?;
    if magic != expected_magic {
        return Err(Error::format(
            0,
            format!("bad IDX magic {magic}, expected {expected_magic}"),
        ));
    }
    let rank = (magic & 0xff) as usize;
    let dims = (0..rank)
        .map(|i| read_be_u32(bytes, 4 + 4 * i).map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    let offset = 4 + 4 * rank;
    let need: usize = dims.iter().product();
    if bytes.len() < offset + need {
        return Err(Error::format(
            bytes.len(),
            format!("truncated IDX payload: need {need} bytes after offset {offset}"),
        ));
    }
    if bytes.len() > offset + need {
        return Err(Error::format(
            offset + need,
            "trailing bytes after IDX payload",
        ));
    }
    Ok((dims, offset))
}

/// Parses an IDX images file (magic 2051) with its IDX labels file (magic 2049).
pub fn parse_idx(images: &[u8], labels: &[u8], num_classes: usize, name: &str) -> Result<Dataset> {
    let (dims, img_off) = idx_header(images, IDX_IMAGES_MAGIC)?;
    let (ldims, lab_off) = idx_header(labels, IDX_LABELS_MAGIC)?;
    let n = dims[0];
    if ldims[0] != n {
        return Err(Error::format(
            4,
            format!("{n} images but {} labels", ldims[0]),
        ));
    }
    let per: usize = dims[1..].iter().product();
    if per == 0 {
        return Err(Error::format(8, "zero-sized images"));
    }
    let mut ys = Vec::with_capacity(n);
    for (i, &l) in labels[lab_off..].iter().enumerate() {
        if l as usize >= num_classes {
            return Err(Error::format(
                lab_off + i,
                format!("label {l} >= {num_classes} classes"),
            ));
        }
        ys.push(l as usize);
    }
    let xs = images[img_off..]
        .chunks_exact(per)
        .map(|c| Tensor::new(dims[1..].to_vec(), scale_bytes(c)))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(name, num_classes, xs, ys)
}

/// Parses CIFAR-10 binary records: one label byte then 3072 pixel bytes.
pub fn parse_cifar(bytes: &[u8], num_classes: usize, name: &str) -> Result<Dataset> {
    if !bytes.len().is_multiple_of(CIFAR_RECORD) {
        let whole = bytes.len() / CIFAR_RECORD;
        return Err(Error::format(
            whole * CIFAR_RECORD,
            format!(
                "truncated record: {} stray bytes",
                bytes.len() - whole * CIFAR_RECORD
            ),
        ));
    }
    let mut xs = Vec::with_capacity(bytes.len() / CIFAR_RECORD);
    let mut ys = Vec::with_capacity(bytes.len() / CIFAR_RECORD);
    for (i, rec) in bytes.chunks_exact(CIFAR_RECORD).enumerate() {
        let label = rec[0] as usize;
        if label >= num_classes {
            return Err(Error::format(
                i * CIFAR_RECORD,
                format!("label {label} >= {num_classes} classes"),
            ));
        }
        ys.push(label);
        xs.push(Tensor::new(vec![3, 32, 32], scale_bytes(&rec[1..]))?);
    }
    Dataset::new(name, num_classes, xs, ys)
}

fn scale_bytes(bytes: &[u8]) -> Vec<f32> {
    bytes.iter().map(|&b| b as f32 / 255.0).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataFormat {
    /// IDX images file, paired with this labels file.
    Idx {
        labels: PathBuf,
    },
    CifarBin,
}

pub fn load_dataset(
    path: impl AsRef<Path>,
    format: &DataFormat,
    num_classes: usize,
) -> Result<Dataset> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let bytes = std::fs::read(path)?;
    match format {
        DataFormat::Idx { labels } => {
            parse_idx(&bytes, &std::fs::read(labels)?, num_classes, &name)
        }
        DataFormat::CifarBin => parse_cifar(&bytes, num_classes, &name),
    }
}

/// Parameters of a Gaussian-blob dataset, written
/// `synth:K=10,n=200,dim=32,spread=0.05,seed=7`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobSpec {
    pub classes: usize,
    pub per_class: usize,
    pub dim: usize,
    pub spread: f64,
    pub seed: u64,
}

impl fmt::Display for BlobSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "synth:K={},n={},dim={},spread={},seed={}",
            self.classes, self.per_class, self.dim, self.spread, self.seed
        )
    }
}

impl FromStr for BlobSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.strip_prefix("synth:").ok_or_else(|| {
            Error::config(format!("synthetic spec {s:?} must start with `synth:`"))
        })?;
        let (mut classes, mut per_class, mut dim, mut spread, mut seed) =
            (None, None, None, None, None);
        for part in body.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::config(format!("bad synthetic field {part:?}")))?;
            let bad = || Error::config(format!("bad value for `{k}`: {v:?}"));
            match k.trim() {
                "K" => classes = Some(v.parse().map_err(|_| bad())?),
                "n" => per_class = Some(v.parse().map_err(|_| bad())?),
                "dim" => dim = Some(v.parse().map_err(|_| bad())?),
                "spread" => spread = Some(v.parse().map_err(|_| bad())?),
                "seed" => seed = Some(v.parse().map_err(|_| bad())?),
                other => return Err(Error::config(format!("unknown synthetic field `{other}`"))),
            }
        }
        let missing = |f: &str| Error::config(format!("synthetic spec is missing `{f}`"));
        Ok(Self {
            classes: classes.ok_or_else(|| missing("K"))?,
            per_class: per_class.ok_or_else(|| missing("n"))?,
            dim: dim.ok_or_else(|| missing("dim"))?,
            spread: spread.ok_or_else(|| missing("spread"))?,
            seed: seed.unwrap_or(0),
        })
    }
}

/// `K` Gaussian blobs: centres uniform in `[0.2, 0.8]^dim`, points
/// `centre + N(0, spread²)` per component, clipped to `[0, 1]`. Examples are
/// ordered class by class.
pub fn synth_blobs(spec: &BlobSpec) -> Result<Dataset> {
    if spec.classes < 2 || spec.dim < 2 {
        return Err(Error::config("blobs need K >= 2 and dim >= 2"));
    }
    if !(spec.spread >= 0.0 && spec.spread.is_finite()) {
        return Err(Error::config(format!(
            "spread {} must be finite and >= 0",
            spec.spread
        )));
    }
    let mut rng = rng::from_seed(spec.seed);
    let centres: Vec<Vec<f64>> = (0..spec.classes)
        .map(|_| (0..spec.dim).map(|_| rng.random_range(0.2..=0.8)).collect())
        .collect();
    let noise = Normal::new(0.0, spec.spread).map_err(|e| Error::config(e.to_string()))?;
    let mut xs = Vec::with_capacity(spec.classes * spec.per_class);
    let mut ys = Vec::with_capacity(spec.classes * spec.per_class);
    for (label, centre) in centres.iter().enumerate() {
        for _ in 0..spec.per_class {
            let v = centre
                .iter()
                .map(|&c| (c + noise.sample(&mut rng)).clamp(0.0, 1.0) as f32)
                .collect();
            xs.push(Tensor::from_vec(v)?);
            ys.push(label);
        }
    }
    Dataset::new(spec.to_string(), spec.classes, xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx_images(n: u32, rows: u32, cols: u32, fill: impl Fn(usize) -> u8) -> Vec<u8> {
        let mut b = vec![0, 0, 8, 3];
        for d in [n, rows, cols] {
            b.extend_from_slice(&d.to_be_bytes());
        }
        b.extend((0..(n * rows * cols) as usize).map(fill));
        b
    }

    fn idx_labels(labels: &[u8]) -> Vec<u8> {
        let mut b = vec![0, 0, 8, 1];
        b.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        b.extend_from_slice(labels);
        b
    }

    #[test]
    fn idx_parses_mnist_geometry() {
        let images = idx_images(3, 28, 28, |i| (i % 256) as u8);
        let labels = idx_labels(&[0, 7, 9]);
        let ds = parse_idx(&images, &labels, 10, "mnist").unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.feature_dim(), 784);
        assert_eq!(ds.features()[0].shape(), &[28, 28]);
        assert_eq!(ds.labels(), &[0, 7, 9]);
        assert_eq!(ds.features()[0].values()[255], 1.0);
        assert_eq!(ds.features()[0].values()[0], 0.0);
    }

    #[test]
    fn idx_errors_name_offsets() {
        let mut images = idx_images(2, 2, 2, |_| 0);
        let labels = idx_labels(&[1, 2]);
        images[3] = 4;
        assert!(matches!(
            parse_idx(&images, &labels, 10, "x"),
            Err(Error::Format { offset: 0, .. })
        ));

        let images = idx_images(2, 2, 2, |_| 0);
        let short = &images[..images.len() - 1];
        assert!(matches!(
            parse_idx(short, &labels, 10, "x"),
            Err(Error::Format { .. })
        ));

        let labels = idx_labels(&[1, 12]);
        assert!(matches!(
            parse_idx(&images, &labels, 10, "x"),
            Err(Error::Format { offset: 9, .. })
        ));
    }

    fn cifar_bytes(n: usize) -> Vec<u8> {
        (0..n)
            .flat_map(|i| {
                std::iter::once((i % 10) as u8)
                    .chain((0..CIFAR_PIXELS).map(move |p| ((p + i) % 256) as u8))
            })
            .collect()
    }

    #[test]
    fn cifar_parses_records() {
        let bytes = cifar_bytes(10);
        assert_eq!(bytes.len(), 10 * 3073);
        let ds = parse_cifar(&bytes, 10, "cifar").unwrap();
        assert_eq!(ds.len(), 10);
        assert_eq!(ds.feature_dim(), 3072);
        assert_eq!(ds.labels()[3], 3);
    }

    #[test]
    fn cifar_truncated_record_is_an_error() {
        let bytes = cifar_bytes(3);
        let err = parse_cifar(&bytes[..bytes.len() - 10], 10, "c").unwrap_err();
        assert!(matches!(err, Error::Format { offset, .. } if offset == 2 * CIFAR_RECORD));
    }

    #[test]
    fn cifar_label_out_of_range() {
        let mut bytes = cifar_bytes(2);
        bytes[CIFAR_RECORD] = 10;
        let err = parse_cifar(&bytes, 10, "c").unwrap_err();
        assert!(matches!(err, Error::Format { offset, .. } if offset == CIFAR_RECORD));
    }

    #[test]
    fn blob_spec_round_trip() {
        let spec: BlobSpec = "synth:K=10,n=200,dim=32,spread=0.05,seed=7"
            .parse()
            .unwrap();
        assert_eq!(
            spec,
            BlobSpec {
                classes: 10,
                per_class: 200,
                dim: 32,
                spread: 0.05,
                seed: 7
            }
        );
        assert_eq!(
            spec.to_string(),
            "synth:K=10,n=200,dim=32,spread=0.05,seed=7"
        );
        assert!("synth:K=10,n=2".parse::<BlobSpec>().is_err());
        assert!("blobs:K=10".parse::<BlobSpec>().is_err());
        assert!("synth:K=10,n=2,dim=3,spread=0.1,colour=4"
            .parse::<BlobSpec>()
            .is_err());
    }

    #[test]
    fn blobs_are_deterministic_and_bounded() {
        let spec = BlobSpec {
            classes: 3,
            per_class: 20,
            dim: 5,
            spread: 0.3,
            seed: 1,
        };
        let a = synth_blobs(&spec).unwrap();
        assert_eq!(a, synth_blobs(&spec).unwrap());
        assert_eq!(a.len(), 60);
        assert!(a.features().iter().all(Tensor::all_in_unit_range));
        let other = synth_blobs(&BlobSpec { seed: 2, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn zero_spread_collapses_to_centres() {
        let spec = BlobSpec {
            classes: 4,
            per_class: 5,
            dim: 3,
            spread: 0.0,
            seed: 9,
        };
        let ds = synth_blobs(&spec).unwrap();
        for c in 0..4 {
            let first = &ds.features()[c * 5];
            assert!(first.values().iter().all(|v| (0.2..=0.8).contains(v)));
            for i in 1..5 {
                assert_eq!(&ds.features()[c * 5 + i], first);
            }
        }
        assert!(synth_blobs(&BlobSpec {
            spread: -0.1,
            ..spec
        })
        .is_err());
    }

    #[test]
    fn split_partitions() {
        let spec = BlobSpec {
            classes: 2,
            per_class: 10,
            dim: 2,
            spread: 0.1,
            seed: 3,
        };
        let ds = synth_blobs(&spec).unwrap();
        let (train, test) = ds.split(0.75, 4).unwrap();
        assert_eq!(train.len(), 15);
        assert_eq!(test.len(), 5);
        assert_eq!((train.clone(), test.clone()), ds.split(0.75, 4).unwrap());
        assert!(ds.split(1.5, 0).is_err());
        assert_eq!(ds.take(3).len(), 3);
    }

    #[test]
    fn dataset_validation() {
        let x = Tensor::from_vec(vec![0.5, 0.5]).unwrap();
        assert!(Dataset::new("d", 2, vec![x.clone()], vec![2]).is_err());
        assert!(Dataset::new("d", 2, vec![x.clone()], vec![]).is_err());
        let big = Tensor::from_vec(vec![1.5, 0.5]).unwrap();
        assert!(Dataset::new("d", 2, vec![big], vec![0]).is_err());
        assert!(Dataset::new("d", 2, vec![x], vec![1]).is_ok());
    }
}

//! `MCF1` checkpoint files.
//!
//! A checkpoint is a text manifest of `key=value` lines terminated by a line
//! reading `end`, followed by the raw little-endian `f32` parameters: for each
//! layer in order, the weight matrix (row-major, `outputs × inputs`) and then
//! the bias vector.
//!
//! ```text
//! magic=MCF1
//! dims=32,16,10
//! classes=10
//! seed=7
//! data=synth:K=10,n=200,dim=32,spread=0.05,seed=7
//! end
//! <binary parameter blobs>
//! ```
//!
//! `magic`, `dims`, `classes` and `seed` are mandatory and always come first.
//! Any further keys are carried through untouched in file order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::{Dense, Model};

pub const MAGIC: &str = "MCF1";

const RESERVED: [&str; 4] = ["magic", "dims", "classes", "seed"];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub seed: u64,
    extra: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            extra: Vec::new(),
        }
    }

    /// Adds or replaces a key. Keys may not contain `=` or newlines, values
    /// may not contain newlines.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let value = value.into();
        if key.is_empty() || key.contains(['=', '\n']) || RESERVED.contains(&key) || key == "end" {
            return Err(Error::input(format!("invalid manifest key {key:?}")));
        }
        if value.contains('\n') {
            return Err(Error::input(format!(
                "manifest value for {key} contains a newline"
            )));
        }
        match self.extra.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.extra.push((key.to_string(), value)),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.extra
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.extra
    }
}

pub fn encode(model: &Model, manifest: &Manifest) -> Vec<u8> {
    let dims = model
        .dims()
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let mut text = format!(
        "magic={MAGIC}\ndims={dims}\nclasses={}\nseed={}\n",
        model.num_classes(),
        manifest.seed
    );
    for (k, v) in &manifest.extra {
        text.push_str(&format!("{k}={v}\n"));
    }
    text.push_str("end\n");

    let mut out = text.into_bytes();
    out.reserve(model.num_params() * 4);
    for layer in model.layers() {
        for v in layer.weight().iter().chain(layer.bias()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<(Model, Manifest)> {
    let mut pos = 0usize;
    let mut fields: Vec<(String, String, usize)> = Vec::new();
    loop {
        let rest = &bytes[pos..];
        let Some(nl) = rest.iter().position(|&b| b == b'\n') else {
            return Err(Error::format(
                pos,
                "manifest is not terminated by an `end` line",
            ));
        };
        let line = std::str::from_utf8(&rest[..nl])
            .map_err(|_| Error::format(pos, "manifest line is not UTF-8"))?;
        let line_start = pos;
        pos += nl + 1;
        if line == "end" {
            break;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::format(
                line_start,
                format!("manifest line {line:?} is not key=value"),
            ));
        };
        fields.push((k.to_string(), v.to_string(), line_start));
    }

    let take = |idx: usize, key: &str| -> Result<(&str, usize)> {
        match fields.get(idx) {
            Some((k, v, off)) if k == key => Ok((v.as_str(), *off)),
            Some((k, _, off)) => Err(Error::format(
                *off,
                format!("expected key `{key}`, found `{k}`"),
            )),
            None => Err(Error::format(0, format!("missing manifest key `{key}`"))),
        }
    };

    let (magic, off) = take(0, "magic")?;
    if magic != MAGIC {
        return Err(Error::format(off, format!("bad magic {magic:?}")));
    }
    let (dims_text, off) = take(1, "dims")?;
    let dims = dims_text
        .split(',')
        .map(|d| d.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::format(off, format!("unparseable dims {dims_text:?}")))?;
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::format(off, format!("invalid dims {dims_text:?}")));
    }
    let (classes, off) = take(2, "classes")?;
    let classes: usize = classes
        .parse()
        .map_err(|_| Error::format(off, "unparseable class count"))?;
    if classes != dims[dims.len() - 1] {
        return Err(Error::format(
            off,
            "class count disagrees with final layer width",
        ));
    }
    let (seed, off) = take(3, "seed")?;
    let seed: u64 = seed
        .parse()
        .map_err(|_| Error::format(off, "unparseable seed"))?;

    let mut manifest = Manifest::new(seed);
    for (k, v, off) in fields.into_iter().skip(4) {
        manifest
            .set(&k, v)
            .map_err(|_| Error::format(off, format!("invalid or duplicate key `{k}`")))?;
    }

    let mut layers = Vec::with_capacity(dims.len() - 1);
    for w in dims.windows(2) {
        let (inputs, outputs) = (w[0], w[1]);
        let weight = read_floats(bytes, &mut pos, inputs * outputs)?;
        let bias = read_floats(bytes, &mut pos, outputs)?;
        layers.push(
            Dense::new(inputs, outputs, weight, bias)
                .map_err(|e| Error::format(pos, e.to_string()))?,
        );
    }
    if pos != bytes.len() {
        return Err(Error::format(
            pos,
            format!("{} trailing bytes after parameters", bytes.len() - pos),
        ));
    }
    let model = Model::new(layers).map_err(|e| Error::format(pos, e.to_string()))?;
    Ok((model, manifest))
}

fn read_floats(bytes: &[u8], pos: &mut usize, count: usize) -> Result<Vec<f32>> {
    let end = *pos + count * 4;
    if end > bytes.len() {
        return Err(Error::format(
            *pos,
            format!("truncated parameter blob: need {count} floats"),
        ));
    }
    let values = bytes[*pos..end]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    *pos = end;
    Ok(values)
}

pub fn save(path: impl AsRef<Path>, model: &Model, manifest: &Manifest) -> Result<()> {
    std::fs::write(path, encode(model, manifest))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<(Model, Manifest)> {
    decode(&std::fs::read(path)?)
}

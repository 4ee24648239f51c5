use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assembly::Assembly;
use crate::brickfile::{read_assembly, write_ldraw, ShapeLibrary};
use crate::datagen::generator::{random_assembly, GeneratorConfig};
use crate::datagen::slice::slice_assembly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Split> {
        match s {
            "train" => Some(Split::Train),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

/// An input model and its place in the master split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub path: PathBuf,
    pub split: Split,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Random { shapes: Vec<u32>, colors: Vec<u32>, max_retries: usize },
    Files { files: Vec<SourceFile> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub name: String,
    pub source: SourceSpec,
    pub sizes: Vec<usize>,
    /// Scenes per size in each split.
    pub train_count: usize,
    pub test_count: usize,
    pub seed: u64,
    /// Rejected scenes tolerated over the whole run.
    pub failure_budget: usize,
}

impl DatasetConfig {
    pub fn random(library: &ShapeLibrary, name: &str, sizes: Vec<usize>, train_count: usize, test_count: usize, seed: u64) -> Self {
        DatasetConfig {
            name: name.to_string(),
            source: SourceSpec::Random { shapes: library.shape_ids(), colors: library.palette(), max_retries: 100 },
            sizes,
            train_count,
            test_count,
            seed,
            failure_budget: 1000,
        }
    }

    /// Random construction at the published scale: sizes 2, 4 and 8 with
    /// 50000 training and 2000 test scenes each.
    pub fn full_scale(library: &ShapeLibrary) -> Self {
        DatasetConfig::random(library, "random-construction", vec![2, 4, 8], 50_000, 2_000, 0)
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("config serializes")))
    }

    fn count(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train_count,
            Split::Test => self.test_count,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub split: Split,
    pub size: usize,
    /// Relative to the manifest's directory.
    pub path: String,
    pub seed: u64,
    pub content_hash: String,
    /// `random` or the source file the slice came from.
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub split: Split,
    pub size: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub train_count: usize,
    pub test_count: usize,
    pub entries: Vec<ManifestEntry>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Source { path: String, message: String },
    #[error("failure budget of {0} exhausted")]
    Exhausted(usize),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
}

pub const MANIFEST_FILE: &str = "manifest.txt";

impl DatasetManifest {
    pub fn to_text(&self) -> String {
        let mut out = format!("manifest {}\nconfig_hash {}\nseed {}\nsizes", self.name, self.config_hash, self.seed);
        for s in &self.sizes {
            let _ = write!(out, " {s}");
        }
        let _ = write!(out, "\ncount train {}\ncount test {}\n", self.train_count, self.test_count);
        for e in &self.entries {
            let _ = writeln!(out, "scene {} {} {} {} {} {}", e.split.name(), e.size, e.path, e.seed, e.content_hash, e.source);
        }
        for f in &self.failures {
            let _ = writeln!(out, "failure {} {} {} {}", f.split.name(), f.size, f.seed, f.reason);
        }
        out
    }

    pub fn parse(text: &str) -> Result<DatasetManifest, DatasetError> {
        let mut m = DatasetManifest {
            name: String::new(),
            config_hash: String::new(),
            seed: 0,
            sizes: Vec::new(),
            train_count: 0,
            test_count: 0,
            entries: Vec::new(),
            failures: Vec::new(),
        };
        for (i, line) in text.lines().enumerate() {
            let bad = |message: &str| DatasetError::Manifest { line: i + 1, message: message.to_string() };
            let num = |s: Option<&str>| -> Result<u64, DatasetError> {
                s.and_then(|t| t.parse().ok()).ok_or_else(|| bad("expected a number"))
            };
            let mut tok = line.split_whitespace();
            match tok.next() {
                None => {}
                Some("manifest") => m.name = tok.collect::<Vec<_>>().join(" "),
                Some("config_hash") => m.config_hash = tok.next().ok_or_else(|| bad("missing hash"))?.to_string(),
                Some("seed") => m.seed = num(tok.next())?,
                Some("sizes") => {
                    m.sizes = tok.map(|t| t.parse().map_err(|_| bad("bad size"))).collect::<Result<_, _>>()?;
                }
                Some("count") => {
                    let split = tok.next().and_then(Split::parse).ok_or_else(|| bad("bad split"))?;
                    let n = num(tok.next())? as usize;
                    match split {
                        Split::Train => m.train_count = n,
                        Split::Test => m.test_count = n,
                    }
                }
                Some("scene") => {
                    let split = tok.next().and_then(Split::parse).ok_or_else(|| bad("bad split"))?;
                    let size = num(tok.next())? as usize;
                    let path = tok.next().ok_or_else(|| bad("missing path"))?.to_string();
                    let seed = num(tok.next())?;
                    let content_hash = tok.next().ok_or_else(|| bad("missing hash"))?.to_string();
                    let source = tok.collect::<Vec<_>>().join(" ");
                    m.entries.push(ManifestEntry { split, size, path, seed, content_hash, source });
                }
                Some("failure") => {
                    let split = tok.next().and_then(Split::parse).ok_or_else(|| bad("bad split"))?;
                    let size = num(tok.next())? as usize;
                    let seed = num(tok.next())?;
                    m.failures.push(Failure { split, size, seed, reason: tok.collect::<Vec<_>>().join(" ") });
                }
                Some(other) => return Err(bad(&format!("unknown record {other}"))),
            }
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<DatasetManifest, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        DatasetManifest::parse(&text)
    }

    pub fn entries_in(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> + '_ {
        self.entries.iter().filter(move |e| e.split == split)
    }

    /// Load every listed scene, resolving paths against `root`.
    pub fn load_scenes(&self, root: &Path, library: &ShapeLibrary) -> Result<Vec<(ManifestEntry, Assembly)>, DatasetError> {
        self.entries
            .iter()
            .map(|e| {
                let p = root.join(&e.path);
                let a = read_assembly(&p, library)
                    .map_err(|err| DatasetError::Source { path: p.display().to_string(), message: err.to_string() })?;
                Ok((e.clone(), a))
            })
            .collect()
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> DatasetError + '_ {
    move |e| DatasetError::Io { path: path.display().to_string(), message: e.to_string() }
}

struct Writer<'a> {
    out: &'a Path,
    library: &'a ShapeLibrary,
    test_hashes: BTreeSet<String>,
    manifest: DatasetManifest,
    budget: usize,
}

impl Writer<'_> {
    fn fail(&mut self, split: Split, size: usize, seed: u64, reason: String) -> Result<(), DatasetError> {
        self.manifest.failures.push(Failure { split, size, seed, reason });
        if self.manifest.failures.len() > self.budget {
            return Err(DatasetError::Exhausted(self.budget));
        }
        Ok(())
    }

    /// Write a scene unless it would leak a test scene into train.
    fn emit(&mut self, split: Split, size: usize, seed: u64, scene: &Assembly, source: &str, index: usize) -> Result<bool, DatasetError> {
        let text = write_ldraw(&scene.renumbered(), self.library);
        let content_hash = hex::encode(Sha256::digest(text.as_bytes()));
        if split == Split::Train && self.test_hashes.contains(&content_hash) {
            self.fail(split, size, seed, "duplicate of a test scene".into())?;
            return Ok(false);
        }
        if split == Split::Test {
            self.test_hashes.insert(content_hash.clone());
        }
        let rel = format!("{}/{}/{:06}.ldr", split.name(), size, index);
        let path = self.out.join(&rel);
        std::fs::create_dir_all(path.parent().expect("has parent")).map_err(io_err(&path))?;
        std::fs::write(&path, text).map_err(io_err(&path))?;
        self.manifest.entries.push(ManifestEntry { split, size, path: rel, seed, content_hash, source: source.to_string() });
        Ok(true)
    }
}

/// Generate or slice scenes into `out`, write `manifest.txt` there and
/// return the manifest. Test scenes are produced before train scenes so that
/// train never repeats a test scene.
pub fn make_dataset(cfg: &DatasetConfig, library: &ShapeLibrary, out: &Path) -> Result<DatasetManifest, DatasetError> {
    let manifest = DatasetManifest {
        name: cfg.name.clone(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        sizes: cfg.sizes.clone(),
        train_count: cfg.train_count,
        test_count: cfg.test_count,
        entries: Vec::new(),
        failures: Vec::new(),
    };
    let mut w = Writer { out, library, test_hashes: BTreeSet::new(), manifest, budget: cfg.failure_budget };
    match &cfg.source {
        SourceSpec::Random { shapes, colors, max_retries } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for &size in &cfg.sizes {
                for split in [Split::Test, Split::Train] {
                    let mut made = 0;
                    while made < cfg.count(split) {
                        let seed: u64 = rng.random();
                        let gen = GeneratorConfig {
                            brick_count: size,
                            shapes: shapes.clone(),
                            colors: colors.clone(),
                            seed,
                            max_retries: *max_retries,
                        };
                        match random_assembly(&gen, library) {
                            Ok(scene) => {
                                if w.emit(split, size, seed, &scene, "random", made)? {
                                    made += 1;
                                }
                            }
                            Err(e) => w.fail(split, size, seed, e.to_string())?,
                        }
                    }
                }
            }
        }
        SourceSpec::Files { files } => {
            for split in [Split::Test, Split::Train] {
                let mut made = vec![0usize; cfg.sizes.len()];
                for src in files.iter().filter(|f| f.split == split) {
                    let scene = read_assembly(&src.path, library)
                        .map_err(|e| DatasetError::Source { path: src.path.display().to_string(), message: e.to_string() })?;
                    let name = src.path.display().to_string();
                    for (k, &size) in cfg.sizes.iter().enumerate() {
                        for slice in slice_assembly(&scene, library, size).into_iter().filter(|s| s.len() == size) {
                            if made[k] < cfg.count(split) && w.emit(split, size, 0, &slice, &name, made[k])? {
                                made[k] += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let manifest = w.manifest;
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let path = out.join(MANIFEST_FILE);
    std::fs::write(&path, manifest.to_text()).map_err(io_err(&path))?;
    Ok(manifest)
}

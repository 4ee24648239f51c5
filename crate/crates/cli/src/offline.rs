use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use brickmake_core::brickfile::{read_assembly, write_assembly, write_ldraw, ShapeLibrary};
use brickmake_core::datagen::{
    build_symmetry_table, frequency_stats, make_dataset, random_assembly, slice_assembly, DatasetConfig, DatasetManifest,
    GeneratorConfig, SourceFile, SourceSpec, Split,
};
use brickmake_core::env::log::verify_episode_dir;
use brickmake_core::env::EnvConfig;
use brickmake_core::metrics::{score_all, MetricConfig};
use brickmake_core::planner::{generate_demonstration, write_demonstration, PlannerConfig};
use clap::Args;

use crate::Format;

#[derive(Args)]
pub struct GenArgs {
    /// Brick count; repeat for several dataset sizes.
    #[arg(long, default_value = "4")]
    size: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Training scenes per size; switches to dataset mode.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    test_count: usize,
    #[arg(long, default_value = "random-construction")]
    name: String,
    /// Slice these models into training scenes instead of generating.
    #[arg(long)]
    train_file: Vec<PathBuf>,
    #[arg(long)]
    test_file: Vec<PathBuf>,
    /// Output file (single scene) or directory (dataset).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn gen(lib: &ShapeLibrary, a: GenArgs, fmt: Format) -> anyhow::Result<bool> {
    let Some(count) = a.count else {
        let size = *a.size.first().context("no --size")?;
        let scene = random_assembly(&GeneratorConfig::for_library(lib, size, a.seed), lib)?;
        match a.out {
            Some(p) => write_assembly(&p, &scene, lib).with_context(|| format!("writing {}", p.display()))?,
            None => print!("{}", write_ldraw(&scene, lib)),
        }
        return Ok(true);
    };
    let out = a.out.context("dataset mode needs --out")?;
    let mut cfg = DatasetConfig::random(lib, &a.name, a.size, count, a.test_count, a.seed);
    if !a.train_file.is_empty() || !a.test_file.is_empty() {
        let tagged = |files: Vec<PathBuf>, split| files.into_iter().map(move |path| SourceFile { path, split });
        let files = tagged(a.train_file, Split::Train).chain(tagged(a.test_file, Split::Test)).collect();
        cfg.source = SourceSpec::Files { files };
    }
    let m = make_dataset(&cfg, lib, &out)?;
    match fmt {
        Format::Records => print!("{}", m.to_text()),
        Format::Text => println!(
            "{} scenes ({} train, {} test), {} rejected, manifest in {}",
            m.entries.len(),
            m.entries_in(Split::Train).count(),
            m.entries_in(Split::Test).count(),
            m.failures.len(),
            out.display()
        ),
    }
    Ok(true)
}

#[derive(Args)]
pub struct SliceArgs {
    input: PathBuf,
    #[arg(long)]
    size: usize,
    #[arg(long)]
    out: PathBuf,
}

pub fn slice(lib: &ShapeLibrary, a: SliceArgs) -> anyhow::Result<bool> {
    if a.size == 0 {
        bail!("--size must be positive");
    }
    let model = read_assembly(&a.input, lib)?;
    std::fs::create_dir_all(&a.out)?;
    let slices = slice_assembly(&model, lib, a.size);
    for (i, s) in slices.iter().enumerate() {
        let p = a.out.join(format!("{i:04}.ldr"));
        write_assembly(&p, &s.renumbered(), lib)?;
        println!("slice {} {} bricks", p.display(), s.len());
    }
    Ok(true)
}

pub fn symtable(lib: &ShapeLibrary, out: Option<PathBuf>) -> anyhow::Result<bool> {
    let table = build_symmetry_table(lib, out.as_deref())?;
    if out.is_none() {
        print!("{}", table.to_text());
    }
    Ok(true)
}

pub fn eval(lib: &ShapeLibrary, predicted: &Path, target: &Path, fmt: Format) -> anyhow::Result<bool> {
    let p = read_assembly(predicted, lib)?;
    let t = read_assembly(target, lib)?;
    let r = score_all(&p, &t, lib, &MetricConfig::default());
    match fmt {
        Format::Records => print!("{}", r.to_records()),
        Format::Text => println!("F1_b {:.4}  F1_e {:.4}  F1_a {:.4}  AED {}", r.f1_b, r.f1_e, r.f1_a, r.aed),
    }
    Ok(true)
}

#[derive(Args)]
pub struct DemoArgs {
    /// Dataset manifest; omit to plan one random scene.
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop after this many scenes.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

pub fn demo(lib: Arc<ShapeLibrary>, a: DemoArgs, fmt: Format) -> anyhow::Result<bool> {
    let scenes = match &a.manifest {
        Some(m) => {
            let root = m.parent().unwrap_or(Path::new("."));
            DatasetManifest::read(m)?
                .load_scenes(root, &lib)?
                .into_iter()
                .map(|(e, s)| (e.path.trim_end_matches(".ldr").to_string(), s, e.seed))
                .collect()
        }
        None => {
            let s = random_assembly(&GeneratorConfig::for_library(&lib, a.size, a.seed), &lib)?;
            vec![(format!("random-{}-{}", a.size, a.seed), s, a.seed)]
        }
    };
    let planner = PlannerConfig::default();
    let (mut ok, mut total) = (0, 0);
    for (name, scene, seed) in scenes.into_iter().take(a.count.unwrap_or(usize::MAX)) {
        total += 1;
        let config = EnvConfig { seed, ..EnvConfig::default() };
        match generate_demonstration(Arc::clone(&lib), &scene, &config, &planner) {
            Ok(d) => {
                let dir = a.out.join(&name);
                write_demonstration(&dir, &d, &planner)?;
                ok += 1;
                println!("demo {name} ok {} steps", d.steps.len());
            }
            Err(e) => println!("demo {name} failed {e}"),
        }
    }
    match fmt {
        Format::Records => println!("validated {ok} {total}"),
        Format::Text => println!("{ok} of {total} demonstrations validated"),
    }
    Ok(true)
}

pub fn replay(lib: Arc<ShapeLibrary>, dir: &Path, fmt: Format) -> anyhow::Result<bool> {
    let v = verify_episode_dir(dir, lib)?;
    for m in &v.mismatches {
        println!("mismatch {m}");
    }
    match fmt {
        Format::Records => println!("replay steps {} identical {}", v.steps, v.identical()),
        Format::Text if v.identical() => println!("{} steps reproduced bit for bit", v.steps),
        Format::Text => println!("{} files differ after {} steps", v.mismatches.len(), v.steps),
    }
    Ok(v.identical())
}

pub fn stats(lib: &ShapeLibrary, manifest: &Path, fmt: Format) -> anyhow::Result<bool> {
    let root = manifest.parent().unwrap_or(Path::new("."));
    let scenes = DatasetManifest::read(manifest)?.load_scenes(root, lib)?;
    let report = frequency_stats(scenes.iter().map(|(_, s)| s));
    match fmt {
        Format::Records => print!("{}", report.to_records(lib)),
        Format::Text => {
            println!("{} scenes, {} bricks", report.scenes, report.bricks);
            println!("{:<8} {:<24} {:>8}", "shape", "name", "count");
            for (id, n) in &report.shapes {
                let name = lib.shape(*id).map_or("?", |s| s.canonical_name.as_str());
                println!("{id:<8} {name:<24} {n:>8}");
            }
            println!("{:<8} {:<24} {:>8}", "color", "name", "count");
            for (id, n) in &report.colors {
                let name = lib.colors.entries.get(id).map_or("?", |c| c.name.as_str());
                println!("{id:<8} {name:<24} {n:>8}");
            }
        }
    }
    Ok(true)
}

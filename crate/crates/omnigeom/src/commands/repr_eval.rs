use std::path::{Path, PathBuf};

use clap::Args;
use omnigeom_core::polygon_repr::{fit_repr, InstanceMask, KindSummary, ReprKind, ShapeRepr};
use omnigeom_core::synthetic::blob_corpus;

use crate::annotations::annotation_table;
use crate::error::{CliError, Result};
use crate::parallel::evaluate_corpus;
use crate::pnm::{read_mask, write_mask};
use crate::table::{fmt_num, Table};

pub const DEFAULT_KINDS: &str = "axis_box,curved_box,oriented_box,ellipse,polygon";

#[derive(Debug, Clone, Args)]
pub struct ReprEvalArgs {
    /// Directory of PGM instance masks (any nonzero pixel is foreground)
    #[arg(
        long,
        required_unless_present = "synthetic",
        conflicts_with = "synthetic"
    )]
    pub masks: Option<PathBuf>,
    /// Use the built-in seeded blob corpus instead of a mask directory
    #[arg(long)]
    pub synthetic: bool,
    /// Number of synthetic blobs
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    /// Seed of the synthetic corpus
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated families: axis_box, oriented_box, ellipse, curved_box, polygon[:N], polygon_uniform[:N]
    #[arg(long, default_value = DEFAULT_KINDS)]
    pub kinds: String,
    /// Output CSV (kind, mean_iou, params, n_instances)
    #[arg(long)]
    pub out: PathBuf,
    /// Also write fitted polygons of the first polygon family as annotation CSV
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Also write the evaluated masks as PGM files into this directory
    #[arg(long)]
    pub export_masks: Option<PathBuf>,
}

pub fn parse_kinds(list: &str) -> Result<Vec<ReprKind>> {
    let kinds: Vec<ReprKind> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            ReprKind::parse(s)
                .ok_or_else(|| CliError::input(format!("unknown representation '{s}'")))
        })
        .collect::<Result<_>>()?;
    if kinds.is_empty() {
        return Err(CliError::input("--kinds is empty"));
    }
    Ok(kinds)
}

/// PGM files of `dir` in file-name order.
pub fn load_masks(dir: &Path) -> Result<Vec<(String, InstanceMask)>> {
    let entries =
        std::fs::read_dir(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pgm"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::input(format!(
            "{}: no .pgm masks found",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| {
            let id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((id, read_mask(p)?))
        })
        .collect()
}

pub fn corpus(args: &ReprEvalArgs) -> Result<Vec<(String, InstanceMask)>> {
    match &args.masks {
        Some(dir) => load_masks(dir),
        None => {
            if args.count == 0 {
                return Err(CliError::input("--count must be at least 1"));
            }
            Ok(blob_corpus(args.count, args.seed)
                .into_iter()
                .enumerate()
                .map(|(i, b)| (format!("blob{i:04}"), b.mask))
                .collect())
        }
    }
}

pub fn table(rows: &[KindSummary]) -> Table {
    let mut t = Table::new(&["kind", "mean_iou", "params", "n_instances"]);
    for r in rows {
        t.push(vec![
            r.kind.label(),
            fmt_num(r.mean_iou),
            r.params.to_string(),
            r.n_instances.to_string(),
        ]);
    }
    t
}

pub fn run(args: &ReprEvalArgs) -> Result<()> {
    let kinds = parse_kinds(&args.kinds)?;
    let masks = corpus(args)?;
    let plain: Vec<InstanceMask> = masks.iter().map(|(_, m)| m.clone()).collect();
    let rows = evaluate_corpus(&plain, &kinds)?;
    for r in &rows {
        for &i in &r.skipped {
            eprintln!("{}: skipped {} (fit failed)", r.kind, masks[i].0);
        }
    }
    table(&rows).write(&args.out)?;

    if let Some(dir) = &args.export_masks {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (id, m) in &masks {
            write_mask(&dir.join(format!("{id}.pgm")), m)?;
        }
    }
    if let Some(path) = &args.annotations {
        let kind = kinds
            .iter()
            .copied()
            .find(|k| matches!(k, ReprKind::Polygon { .. }))
            .ok_or_else(|| CliError::input("--annotations needs a polygon family in --kinds"))?;
        let ReprKind::Polygon { vertices, .. } = kind else {
            unreachable!()
        };
        let mut polygons = Vec::new();
        for (id, m) in &masks {
            match fit_repr(m, kind).map(|f| f.repr) {
                Ok(ShapeRepr::Polygon(p)) => polygons.push((id.clone(), p)),
                Ok(_) => unreachable!(),
                Err(e) => eprintln!("{kind}: no annotation for {id} ({e})"),
            }
        }
        annotation_table(&polygons, vertices)?.write(path)?;
    }
    Ok(())
}

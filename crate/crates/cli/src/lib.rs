//! Command implementations behind the `simplexdb` binary.

pub mod server;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::Utc;
use simplexdb_core::{
    addition_tile, difference_tile, export_tile, import_tile, todays_date_tile, validate_document, Attachment, Policy,
    Provenance, QueryRequest, SelectRequest, SimplexId, SlotMatching, Tile, Workspace,
};

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Problems found in a document; empty when valid.
pub fn validate(path: &Path) -> Result<Vec<String>> {
    Ok(validate_document(&read(path)?))
}

pub fn load_workspace(path: &Path) -> Result<Workspace> {
    Workspace::load(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

pub fn load_tile(path: &Path) -> Result<Tile> {
    import_tile(&read(path)?).with_context(|| format!("importing {}", path.display()))
}

/// Where a query comes from.
pub enum QuerySource<'a> {
    Zigzag(&'a Path),
    Polyline(&'a Path),
}

/// Runs a query file against a workspace file and returns the response JSON.
pub fn query(workspace: &Path, source: QuerySource<'_>, select: Option<&Path>, dedup: bool) -> Result<String> {
    let ws = load_workspace(workspace)?;
    let mut req = QueryRequest { dedup, ..QueryRequest::default() };
    match source {
        QuerySource::Zigzag(p) => req.zigzag = Some(serde_json::from_str(&read(p)?).context("zigzag file")?),
        QuerySource::Polyline(p) => req.polyline = Some(serde_json::from_str(&read(p)?).context("polyline file")?),
    }
    if let Some(p) = select {
        let sel: SelectRequest = serde_json::from_str(&read(p)?).context("selection file")?;
        req.select = sel;
    }
    let resp = ws.query_request(&req)?;
    Ok(serde_json::to_string_pretty(&resp)? + "\n")
}

pub struct GlueArgs {
    pub tile: Option<PathBuf>,
    pub at: Option<String>,
    pub onto: Option<String>,
    pub matching: Option<Vec<usize>>,
    pub policy: Option<Policy>,
}

/// Drops a tile into the workspace (attached when `at`/`onto` are given) or,
/// without a tile, identifies `at` with `onto` inside it.
pub fn glue(ws: &Workspace, args: &GlueArgs) -> Result<Workspace> {
    let matching = |dim: usize| args.matching.clone().unwrap_or_else(|| (0..=dim).collect());
    match (&args.tile, &args.at, &args.onto) {
        (Some(t), None, None) => Ok(ws.drop_tile(&load_tile(t)?, None, args.policy)?),
        (Some(t), Some(at), Some(onto)) => {
            let dim = ws.schema().get(&SimplexId::new(at.as_str()))?.dim;
            let attachment =
                Attachment { workspace: SimplexId::new(at.as_str()), tile: SimplexId::new(onto.as_str()), matching: matching(dim) };
            Ok(ws.drop_tile(&load_tile(t)?, Some(attachment), args.policy)?)
        }
        (None, Some(x1), Some(x2)) => {
            let x1 = SimplexId::new(x1.as_str());
            let dim = ws.schema().get(&x1)?.dim;
            Ok(ws.glue(&x1, &SimplexId::new(x2.as_str()), &SlotMatching(matching(dim)), args.policy)?)
        }
        _ => bail!("give --tile, or --at and --onto, or all three"),
    }
}

/// A library directory holds one tile document per `.json` file.
pub fn load_library(dir: &Path) -> Result<Vec<Tile>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_tile(p)).collect()
}

pub fn tile_file_name(tile: &Tile) -> String {
    let stem: String =
        tile.name().chars().map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    format!("{stem}.json")
}

pub fn save_tile(dir: &Path, tile: &Tile) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(tile_file_name(tile));
    fs::write(&path, export_tile(tile))?;
    Ok(path)
}

/// Tiles available without a library: addition and today's date over
/// labels `int` and `date`.
pub fn builtin_tiles() -> Vec<Tile> {
    let now = Utc::now();
    let prov = Provenance::new("simplexdb built-in", now, true);
    vec![
        addition_tile("int", prov.clone()).expect("valid tile"),
        todays_date_tile("date", now.date_naive(), prov).expect("valid tile"),
    ]
}

/// A built-in tile by name: `addition`, `today`, or `difference` (with `d`).
pub fn builtin_tile(name: &str, label: &str, d: Option<i64>) -> Result<Tile> {
    let now = Utc::now();
    let prov = Provenance::new("simplexdb built-in", now, true);
    Ok(match name {
        "addition" => addition_tile(label, prov)?,
        "today" => todays_date_tile(label, now.date_naive(), prov)?,
        "difference" => difference_tile(label, d.context("`difference` needs --d")?, prov)?,
        other => bail!("unknown built-in tile `{other}`"),
    })
}

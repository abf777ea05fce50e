use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use simplexdb_cli::{server, GlueArgs, QuerySource};
use simplexdb_core::{export_tile, Policy, Workspace};

#[derive(Parser)]
#[command(name = "simplexdb", version, about = "Simplicial database engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Universal,
    Intersect,
    UnionAll,
    UnionDedup,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Policy {
        match p {
            PolicyArg::Universal => Policy::Universal,
            PolicyArg::Intersect => Policy::Intersect,
            PolicyArg::UnionAll => Policy::UnionAll,
            PolicyArg::UnionDedup => Policy::UnionDedup,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a workspace, tile or schema document.
    Validate { file: PathBuf },
    /// Evaluate a zigzag or a drawn polyline against a workspace.
    Query {
        workspace: PathBuf,
        #[arg(long, conflicts_with = "polyline", required_unless_present = "polyline")]
        zigzag: Option<PathBuf>,
        #[arg(long)]
        polyline: Option<PathBuf>,
        /// JSON `{"keys": [...]}` or `{"values": [[...]]}`; all rows when omitted.
        #[arg(long)]
        select: Option<PathBuf>,
        /// One graph row per distinct value.
        #[arg(long)]
        dedup: bool,
    },
    /// Drop a tile into a workspace, or identify two of its simplices.
    Glue {
        workspace: PathBuf,
        #[arg(long)]
        tile: Option<PathBuf>,
        /// Workspace simplex to attach at (first simplex of a self-glue).
        #[arg(long)]
        at: Option<String>,
        /// Tile simplex placed on `--at` (second simplex of a self-glue).
        #[arg(long)]
        onto: Option<String>,
        /// Slot matching, e.g. `1,0`; identity when omitted.
        #[arg(long, value_delimiter = ',')]
        matching: Option<Vec<usize>>,
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
        /// Start from an empty workspace with this layout seed.
        #[arg(long)]
        new: Option<u64>,
        /// Write here instead of over the workspace file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory of tile documents; imported tiles are written here too.
        #[arg(long)]
        library: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a tile document, print its summary and optionally copy it into a library.
    ImportTile {
        file: PathBuf,
        #[arg(long)]
        library: Option<PathBuf>,
    },
    /// Print a built-in tile document (`addition`, `today`, `difference`).
    BuiltinTile {
        name: String,
        #[arg(long, default_value = "int")]
        label: String,
        #[arg(long, allow_negative_numbers = true)]
        d: Option<i64>,
    },
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { file } => {
            let problems = simplexdb_cli::validate(&file)?;
            if problems.is_empty() {
                println!("ok");
                return Ok(ExitCode::SUCCESS);
            }
            for p in &problems {
                println!("{p}");
            }
            Ok(ExitCode::FAILURE)
        }
        Command::Query { workspace, zigzag, polyline, select, dedup } => {
            let source = match (&zigzag, &polyline) {
                (Some(z), _) => QuerySource::Zigzag(z),
                (None, Some(p)) => QuerySource::Polyline(p),
                (None, None) => unreachable!("clap requires one"),
            };
            print!("{}", simplexdb_cli::query(&workspace, source, select.as_deref(), dedup)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Glue { workspace, tile, at, onto, matching, policy, new, out } => {
            let ws = match new {
                Some(seed) => Workspace::new(seed),
                None => simplexdb_cli::load_workspace(&workspace)?,
            };
            let args = GlueArgs { tile, at, onto, matching, policy: policy.map(Into::into) };
            let next = simplexdb_cli::glue(&ws, &args)?;
            for w in next.warnings() {
                eprintln!("warning: {w}");
            }
            let target = out.unwrap_or(workspace);
            std::fs::write(&target, next.save()).with_context(|| format!("writing {}", target.display()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { port, library, seed } => {
            let mut tiles = simplexdb_cli::builtin_tiles();
            if let Some(dir) = &library {
                std::fs::create_dir_all(dir)?;
                for t in simplexdb_cli::load_library(dir)? {
                    tiles.retain(|b| b.name() != t.name());
                    tiles.push(t);
                }
            }
            let state = server::AppState::new(tiles, seed, library);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
                tracing::info!("listening on {}", listener.local_addr()?);
                axum::serve(listener, server::router(state)).await?;
                anyhow::Ok(())
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ImportTile { file, library } => {
            let tile = simplexdb_cli::load_tile(&file)?;
            let summary = simplexdb_core::tile::summarize(&tile, chrono::Utc::now());
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if let Some(dir) = library {
                let path = simplexdb_cli::save_tile(&dir, &tile)?;
                eprintln!("saved {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::BuiltinTile { name, label, d } => {
            print!("{}", export_tile(&simplexdb_cli::builtin_tile(&name, &label, d)?));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

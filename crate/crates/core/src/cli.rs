//! The `provkit` command line.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data errors. Every
//! failure prints one line on standard error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::capture::{fold_events, parse_event_log};
use crate::laststep::fits::{minimal_fits, read_card_text, read_primary_header};
use crate::laststep::{
    build_laststep_with, emit_header_cards, parse_header_cards, reconstruct, LastStepError, LastStepOptions,
    LastStepRecord,
};
use crate::model::{validate_document, Namespaces, ProvenanceDocument};
use crate::provsap::{self, handle_provsap, ProvSapRequest};
use crate::serialize::{
    from_prov_json, parse_flag, to_prov_json, DescriptionLevel, ModelFlavor, ProjectionOptions, SerializationFormat,
};
use crate::store::{Depth, Direction, IngestStats, Store};

pub const STORE_ENV: &str = "PROVKIT_STORE";

#[derive(Parser, Debug)]
#[command(name = "provkit", version, about = "Provenance capture, storage and access")]
struct Cli {
    /// Store directory.
    #[arg(long, global = true, env = STORE_ENV)]
    store: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fold a capture event log and ingest it.
    Ingest { events: PathBuf },
    /// Ingest a PROV-JSON document.
    Import { doc: PathBuf },
    /// Write a traversal closure in any serialization.
    Export(ExportArgs),
    /// Last-step provenance header cards.
    #[command(subcommand)]
    Header(HeaderCommand),
    /// Check a PROV-JSON document or capture log.
    Validate { doc: PathBuf },
    /// Run the ProvSAP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        #[arg(long, default_value_t = provsap::DEFAULT_THREADS)]
        threads: usize,
    },
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    id: String,
    #[arg(long, default_value = "ALL")]
    depth: Depth,
    #[arg(long, default_value = "BACKWARD")]
    direction: Direction,
    #[arg(long, default_value = "PROV-JSON")]
    format: SerializationFormat,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "IVOA")]
    model: ModelFlavor,
    #[arg(long, default_value = "1", value_parser = parse_flag, action = clap::ArgAction::Set)]
    agents: bool,
    #[arg(long, default_value = "1", value_parser = parse_flag, action = clap::ArgAction::Set)]
    configuration: bool,
    #[arg(long, default_value = "1")]
    descriptions: DescriptionLevel,
    #[arg(long, default_value = "1", value_parser = parse_flag, action = clap::ArgAction::Set)]
    attributes: bool,
}

#[derive(Subcommand, Debug)]
enum HeaderCommand {
    /// Build the last-step record of an entity. Writes a header-only FITS
    /// file when the output name ends in .fits, card text otherwise.
    Emit {
        #[arg(long)]
        id: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Leave the PRV_Pn parameter cards out.
        #[arg(long)]
        no_parameters: bool,
    },
    /// Reconstruct provenance from the headers in a directory and ingest it.
    Scan {
        dir: PathBuf,
        /// Also write the reconstructed document as PROV-JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Data(String),
}

type Outcome = Result<(), Failure>;

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "provkit: {msg}");
            1
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(stderr, "provkit: {msg}");
            2
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let store_path = cli.store;
    let need_store = || {
        store_path
            .clone()
            .ok_or_else(|| Failure::Usage(format!("no store given; pass --store or set {STORE_ENV}")))
    };
    match cli.command {
        Command::Ingest { events } => {
            let store = Store::open(need_store()?).map_err(data)?;
            let ns = store.snapshot().document().namespaces.clone();
            let text = read_text(&events)?;
            let parsed = parse_event_log(&text, &ns).map_err(data)?;
            let (doc, warnings) = fold_events(&parsed, &ns);
            for w in &warnings {
                let _ = writeln!(stderr, "warning {}: {w}", w.code());
            }
            let stats = store.ingest_document(&doc).map_err(data)?;
            print_stats(stdout, stats)
        }
        Command::Import { doc } => {
            let store = Store::open(need_store()?).map_err(data)?;
            let ns = store.snapshot().document().namespaces.clone();
            let parsed = from_prov_json(&read_text(&doc)?, &ns).map_err(data)?;
            let stats = store.ingest_document(&parsed).map_err(data)?;
            print_stats(stdout, stats)
        }
        Command::Export(args) => export(&need_store()?, args, stdout),
        Command::Header(HeaderCommand::Emit { id, out, no_parameters }) => {
            let store = Store::open_read_only(need_store()?).map_err(data)?;
            let id = store.snapshot().document().namespaces.parse_id(&id).map_err(data)?;
            let opts = LastStepOptions { parameters: !no_parameters };
            let record = build_laststep_with(&store, &id, opts).map_err(laststep_failure)?;
            let cards = emit_header_cards(&record).map_err(laststep_failure)?;
            match out {
                Some(path) if is_fits(&path) => write_file(&path, &minimal_fits(&cards)),
                Some(path) => write_file(&path, cards_text(&cards).as_bytes()),
                None => emit(stdout, cards_text(&cards).as_bytes()),
            }
        }
        Command::Header(HeaderCommand::Scan { dir, out }) => {
            let store = Store::open(need_store()?).map_err(data)?;
            let ns = store.snapshot().document().namespaces.clone();
            let records = scan_headers(&dir, stderr)?;
            let doc = reconstruct(&records, &ns).map_err(laststep_failure)?;
            if let Some(path) = out {
                write_file(&path, to_prov_json(&doc).as_bytes())?;
            }
            let stats = store.ingest_document(&doc).map_err(data)?;
            print_stats(stdout, stats)
        }
        Command::Validate { doc } => validate(&doc, stdout, stderr),
        Command::Serve { port, bind, threads } => {
            let store = Store::open_read_only(need_store()?).map_err(data)?;
            let handle = provsap::serve_with_threads(Arc::new(store), &bind, port, threads).map_err(data)?;
            let _ = writeln!(stdout, "serving {}", handle.endpoint_url());
            let _ = stdout.flush();
            handle.join();
            Ok(())
        }
    }
}

fn export(store_path: &Path, args: ExportArgs, stdout: &mut dyn Write) -> Outcome {
    let store = Store::open_read_only(store_path).map_err(data)?;
    let id = store
        .snapshot()
        .document()
        .namespaces
        .parse_id(&args.id)
        .map_err(|e| Failure::Data(format!("NotFound: {e}")))?;
    let request = ProvSapRequest {
        id,
        depth: args.depth,
        direction: args.direction,
        format: args.format,
        projection: ProjectionOptions {
            model: args.model,
            agents: args.agents,
            configuration: args.configuration,
            descriptions: args.descriptions,
            attributes: args.attributes,
        },
    };
    let response = handle_provsap(&store, &request);
    if response.status != 200 {
        let v: serde_json::Value = serde_json::from_slice(&response.body).unwrap_or_default();
        return Err(Failure::Data(format!(
            "{}: {}",
            v["error"].as_str().unwrap_or("Error"),
            v["detail"].as_str().unwrap_or("")
        )));
    }
    match args.out {
        Some(path) => write_file(&path, &response.body),
        None => emit(stdout, &response.body),
    }
}

fn validate(path: &Path, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let ns = Namespaces::default();
    let text = read_text(path)?;
    let doc: ProvenanceDocument = if path.to_string_lossy().ends_with(".jsonl") {
        let events = parse_event_log(&text, &ns).map_err(data)?;
        let (doc, warnings) = fold_events(&events, &ns);
        for w in &warnings {
            let _ = writeln!(stderr, "warning {}: {w}", w.code());
        }
        doc
    } else {
        from_prov_json(&text, &ns).map_err(data)?
    };
    let report = validate_document(&doc);
    for finding in &report.findings {
        let _ = writeln!(stdout, "{finding}");
    }
    if report.has_errors() {
        return Err(Failure::Data(format!(
            "{} error(s) in {}",
            report.errors().count(),
            path.display()
        )));
    }
    let _ = writeln!(stdout, "ok {} records", doc.record_count());
    Ok(())
}

fn laststep_failure(e: LastStepError) -> Failure {
    match e {
        LastStepError::NotFound(id) => Failure::Data(format!("NotFound: no entity with id {id}")),
        other => data(other),
    }
}

fn is_fits(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("fits" | "fit" | "fts")
    )
}

/// Header records from every FITS file and card-text file (`.hdr`,
/// `.cards`, `.txt`) directly inside `dir`, in file-name order. Files
/// without provenance keywords are skipped.
fn scan_headers(dir: &Path, stderr: &mut dyn Write) -> Result<Vec<LastStepRecord>, Failure> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::Data(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut records = Vec::new();
    for path in paths {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        let cards = if is_fits(&path) {
            let bytes = fs::read(&path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            read_primary_header(&bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?
        } else if matches!(ext.as_str(), "hdr" | "cards" | "txt") {
            read_card_text(&read_text(&path)?)
        } else {
            continue;
        };
        match parse_header_cards(&cards) {
            Ok(r) => records.push(r),
            Err(LastStepError::NoProvenance) => {
                let _ = writeln!(stderr, "skipping {}: no provenance keywords", path.display());
            }
            Err(e) => return Err(Failure::Data(format!("{}: {e}", path.display()))),
        }
    }
    Ok(records)
}

fn cards_text(cards: &[String]) -> String {
    cards.iter().map(|c| format!("{c}\n")).collect()
}

fn print_stats(out: &mut dyn Write, s: IngestStats) -> Outcome {
    let line = format!("inserted={} updated={} unchanged={}\n", s.inserted, s.updated, s.unchanged);
    emit(out, line.as_bytes())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, bytes: &[u8]) -> Outcome {
    out.write_all(bytes).and_then(|_| out.flush()).map_err(data)
}

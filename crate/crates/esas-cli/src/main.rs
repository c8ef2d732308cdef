//! Command-line driver for an esas workspace.
//!
//! Every command is a thin wrapper over the library's workspace
//! operations: machine-readable JSON goes to stdout, diagnostics to
//! stderr. Exit codes: 0 success, 1 usage, 2 protocol/crypto failure,
//! 3 I/O.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use esas::entities::{DocumentSource, Workspace, WorkspaceLock};
use esas::envelope;
use esas::semantic::{parse_triples_file, ExtractionMode};
use esas::Error;

#[derive(Parser)]
#[command(
    name = "esas",
    version,
    about = "Attribute-authorized semantic search over encrypted data",
    subcommand_required = true
)]
struct Cli {
    /// Workspace directory (defaults to $ESAS_WORKSPACE)
    #[arg(long, global = true)]
    workspace: Option<PathBuf>,

    /// Seed the randomness source for reproducible runs
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Initialize a workspace: system parameters, master secret, KNN key
    Setup {
        /// Vocabulary capacity n (pins the index dimension to n+1)
        #[arg(long)]
        capacity: usize,
        /// Pairing security level in bits
        #[arg(long, default_value_t = 128)]
        security_level: u32,
    },
    /// Register an owner or a user
    Register {
        #[command(subcommand)]
        role: RegisterRole,
    },
    /// Encrypt and index one document under an access policy
    Ingest {
        /// Registered owner id
        #[arg(long)]
        owner: String,
        /// Input file (text, or TAB triples with --triples)
        #[arg(long)]
        input: PathBuf,
        /// Access policy, e.g. "and(doctor, or(cardiology, oncology))"
        #[arg(long)]
        policy: String,
        /// Extraction mode: theme keeps the highest-scoring sentence
        /// (binary vector), all keeps every sentence (tf-idf vector)
        #[arg(long, value_enum, default_value_t = ModeArg::All)]
        mode: ModeArg,
        /// Treat the input as pre-extracted head<TAB>relation<TAB>tail lines
        #[arg(long)]
        triples: bool,
    },
    /// Run a ranked encrypted search as a registered user
    Query {
        #[arg(long)]
        user: String,
        #[arg(long)]
        query: String,
        /// Number of results requested
        #[arg(short)]
        k: usize,
        /// Write retrieved records here for later decryption
        #[arg(long)]
        save_records: Option<PathBuf>,
    },
    /// Decrypt a stored document with a user's key
    Decrypt {
        #[arg(long)]
        user: String,
        #[arg(long)]
        doc: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute every user's authorization list
    Refresh,
    /// Dump public workspace metadata
    Inspect,
}

#[derive(Subcommand)]
enum RegisterRole {
    /// Register a data owner
    Owner { id: String },
    /// Register a data user with an attribute set
    User {
        id: String,
        /// Comma-separated attribute list
        #[arg(long, required = true, value_delimiter = ',')]
        attrs: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Theme,
    All,
}

impl From<ModeArg> for ExtractionMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Theme => ExtractionMode::ThemeSentence,
            ModeArg::All => ExtractionMode::AllSentences,
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 3,
        Error::InvalidParameter(_)
        | Error::PolicySyntax { .. }
        | Error::ThresholdOutOfBounds { .. }
        | Error::EmptyAttributeSet
        | Error::UnsupportedSecurityLevel(_) => 1,
        _ => 2,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion
            ) =>
        {
            print!("{err}");
            std::process::exit(0);
        }
        Err(err) => {
            eprint!("{err}");
            std::process::exit(1);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}

fn workspace_path(cli: &Cli) -> Result<PathBuf, Error> {
    cli.workspace
        .clone()
        .or_else(|| std::env::var_os("ESAS_WORKSPACE").map(PathBuf::from))
        .ok_or_else(|| {
            Error::InvalidParameter("no workspace given (--workspace or ESAS_WORKSPACE)".into())
        })
}

fn make_rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(seed) => ChaCha20Rng::seed_from_u64(seed),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn emit(value: serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(&value).expect("valid json")
    );
}

fn run(cli: Cli) -> Result<(), Error> {
    let root = workspace_path(&cli)?;
    let mut rng = make_rng(cli.seed);
    match &cli.command {
        Command::Setup {
            capacity,
            security_level,
        } => {
            let ws = Workspace::create(&root, *capacity, *security_level, &mut rng)?;
            emit(json!({
                "command": "setup",
                "workspace": root,
                "capacity": capacity,
                "security_level": security_level,
                "owners": ws.owner_ids().len(),
            }));
        }
        Command::Register { role } => {
            let _lock = WorkspaceLock::acquire(&root)?;
            let mut ws = Workspace::open(&root)?;
            match role {
                RegisterRole::Owner { id } => {
                    ws.register_owner(id)?;
                    emit(json!({
                        "command": "register",
                        "role": "owner",
                        "id": id,
                    }));
                }
                RegisterRole::User { id, attrs } => {
                    let attributes: BTreeSet<String> =
                        attrs.iter().map(|a| a.trim().to_string()).collect();
                    ws.register_user(id, &attributes, &mut rng)?;
                    emit(json!({
                        "command": "register",
                        "role": "user",
                        "id": id,
                        "attributes": attributes,
                        "key_file": root.join(format!("users/{id}.key")),
                        "authorized_documents": ws.authorization_list(id).map_or(0, |l| l.len()),
                    }));
                }
            }
        }
        Command::Ingest {
            owner,
            input,
            policy,
            mode,
            triples,
        } => {
            let _lock = WorkspaceLock::acquire(&root)?;
            let mut ws = Workspace::open(&root)?;
            let raw = std::fs::read(input)?;
            let source = if *triples {
                let text = String::from_utf8_lossy(&raw).into_owned();
                DocumentSource::Triples {
                    raw,
                    triples: parse_triples_file(&text)?,
                }
            } else {
                DocumentSource::Text(raw)
            };
            let doc_id = ws.ingest(owner, source, policy, (*mode).into(), &mut rng)?;
            emit(json!({
                "command": "ingest",
                "owner": owner,
                "document_id": doc_id,
                "vocabulary_used": ws.vocabulary().used_dimensions(),
                "vocabulary_capacity": ws.vocabulary().capacity(),
            }));
        }
        Command::Query {
            user,
            query,
            k,
            save_records,
        } => {
            let ws = Workspace::open(&root)?;
            let hits = ws.query(user, query, *k, &mut rng)?;
            if let Some(dir) = save_records {
                std::fs::create_dir_all(dir)?;
                for record in &hits {
                    let path = dir.join(format!("{}.env", record.id));
                    std::fs::write(path, envelope::seal("document-record", &record.to_bytes()))?;
                }
            }
            let results: Vec<serde_json::Value> = hits
                .iter()
                .enumerate()
                .map(|(i, record)| {
                    json!({
                        "rank": i + 1,
                        "document_id": record.id,
                    })
                })
                .collect();
            emit(json!({
                "command": "query",
                "user": user,
                "k": k,
                "results": results,
            }));
        }
        Command::Decrypt { user, doc, out } => {
            let ws = Workspace::open(&root)?;
            let plaintext = ws.decrypt(user, doc)?;
            write_output(out, &plaintext)?;
            emit(json!({
                "command": "decrypt",
                "user": user,
                "document_id": doc,
                "out": out,
                "bytes": plaintext.len(),
            }));
        }
        Command::Refresh => {
            let _lock = WorkspaceLock::acquire(&root)?;
            let mut ws = Workspace::open(&root)?;
            ws.ams_refresh()?;
            let lists: serde_json::Map<String, serde_json::Value> = ws
                .user_ids()
                .iter()
                .map(|id| {
                    let size = ws.authorization_list(id).map_or(0, |l| l.len());
                    (id.to_string(), json!(size))
                })
                .collect();
            emit(json!({
                "command": "refresh",
                "authorized_counts": lists,
            }));
        }
        Command::Inspect => {
            let ws = Workspace::open(&root)?;
            let users: Vec<serde_json::Value> = ws
                .user_ids()
                .iter()
                .map(|id| {
                    let record = ws.user_record(id).expect("listed user exists");
                    json!({
                        "id": id,
                        "attributes": record.attributes,
                        "authorized_documents": ws.authorization_list(id).map_or(0, |l| l.len()),
                    })
                })
                .collect();
            emit(json!({
                "command": "inspect",
                "workspace": root,
                "security_level": ws.params().ctx.security_level(),
                "vocabulary": {
                    "capacity": ws.vocabulary().capacity(),
                    "used_dimensions": ws.vocabulary().used_dimensions(),
                    "version": ws.vocabulary().version(),
                    "documents": ws.vocabulary().doc_count(),
                },
                "owners": ws.owner_ids(),
                "users": users,
                "documents": ws.document_ids(),
                "stores_consistent": ws.stores_consistent(),
            }));
        }
    }
    Ok(())
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

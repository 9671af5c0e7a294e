//! Administrative command line. Every subcommand runs one platform
//! operation against the archive in the data directory and prints the
//! result as JSON.

use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kwsp_core::argumentation::Stance;
use kwsp_core::{fixtures, Direction, ElementKind, LinkType, Platform, RecordId, Surrogate, TranscriptionJob};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::api::{Articulation, SearchParams, DEFAULT_RELATED_LIMIT, DEFAULT_SEARCH_LIMIT};
use crate::server::{self, Config, ServeError, DEFAULT_ADDR};

#[derive(Debug, Parser)]
#[command(name = "kwsp", version, about = "Knowledge work support platform")]
pub struct Cli {
    /// Directory holding the archive.
    #[arg(long, env = "KWSP_DATA", default_value = "kwsp-data", global = true)]
    pub data: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP/JSON service.
    Serve {
        #[arg(long, env = "KWSP_ADDR", default_value = DEFAULT_ADDR)]
        addr: String,
        /// Shared token every request must send in the `X-KWSP-Token` header.
        #[arg(long, env = "KWSP_TOKEN")]
        token: Option<String>,
    },
    /// Task type definitions.
    #[command(subcommand)]
    Def(DefCommand),
    /// Workspace sessions.
    #[command(subcommand)]
    Session(SessionCommand),
    /// Record an element at a session's current activity.
    Articulate(ArticulateArgs),
    /// Segment a source document into elements, from a job file.
    Transcribe { job: PathBuf },
    /// Ranked search over element surrogates.
    Search(SearchArgs),
    /// Archived elements.
    #[command(subcommand)]
    Element(ElementCommand),
    /// Link two existing records.
    Link {
        #[arg(long = "type", value_parser = parse_enum::<LinkType>)]
        link_type: LinkType,
        source: String,
        target: String,
        #[arg(long)]
        note: Option<String>,
    },
    /// Raise an issue in an open session.
    Issue { session: String, text: String },
    /// Positions on issues.
    #[command(subcommand)]
    Position(PositionCommand),
    /// Argue for or against a position.
    Argue {
        position: String,
        text: String,
        #[arg(long, value_parser = parse_enum::<Stance>)]
        stance: Stance,
        #[arg(long)]
        author: String,
        #[arg(long, num_args = 0..)]
        evidence: Vec<String>,
    },
    /// Recommendations for a session.
    #[command(subcommand)]
    Recommend(RecommendCommand),
    /// Write the archive as JSON Lines.
    Export {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load a JSON Lines export into an empty archive.
    Import { file: PathBuf },
    /// Load the bundled example task types and scripted sessions.
    Seed,
}

#[derive(Debug, Subcommand)]
pub enum DefCommand {
    /// Register a definition document.
    Load { file: PathBuf },
    /// Latest version of every registered task type.
    List,
    Show { task_type: String },
    /// Resolve a vocabulary term.
    Term { task_type: String, term: String },
    /// Elements categorized under a definition node.
    Instances { task_type: String, node: String },
    /// Nominal and deviant transition counts.
    DeviationReport { task_type: String },
}

#[derive(Debug, Subcommand)]
pub enum SessionCommand {
    Open {
        #[arg(long)]
        worker: String,
        #[arg(long)]
        task_type: String,
        #[arg(long)]
        instance: String,
    },
    Advance {
        session: String,
        activity: String,
        #[arg(long)]
        note: Option<String>,
    },
    Complete { session: String },
    Abandon { session: String },
    Show { session: String },
    List,
    Context { session: String },
}

#[derive(Debug, Args)]
pub struct ArticulateArgs {
    pub session: String,
    #[arg(long, value_parser = parse_enum::<ElementKind>)]
    pub kind: ElementKind,
    #[arg(long)]
    pub content: String,
    #[arg(long)]
    pub title: String,
    #[arg(long = "term")]
    pub terms: Vec<String>,
    #[arg(long, num_args = 0..)]
    pub supports: Vec<String>,
    #[arg(long, num_args = 0..)]
    pub satisfies: Vec<String>,
    #[arg(long)]
    pub ie_type: Option<String>,
    #[arg(long)]
    pub note: Option<String>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(required = true)]
    pub terms: Vec<String>,
    #[arg(long)]
    pub task_type: Option<String>,
    #[arg(long)]
    pub instance: Option<String>,
    #[arg(long)]
    pub activity: Option<String>,
    #[arg(long)]
    pub ie_type: Option<String>,
    #[arg(long, value_parser = parse_enum::<ElementKind>)]
    pub kind: Option<ElementKind>,
    #[arg(long, default_value_t = DEFAULT_SEARCH_LIMIT)]
    pub limit: usize,
}

#[derive(Debug, Subcommand)]
pub enum ElementCommand {
    Show { id: String },
    Provenance {
        id: String,
        #[arg(long)]
        max_depth: Option<usize>,
    },
    Supports { id: String },
    Links {
        id: String,
        #[arg(long, value_parser = parse_enum::<Direction>, default_value = "both")]
        direction: Direction,
        #[arg(long = "type", value_parser = parse_enum::<LinkType>)]
        types: Vec<LinkType>,
    },
}

#[derive(Debug, Subcommand)]
pub enum PositionCommand {
    Take {
        issue: String,
        text: String,
        #[arg(long)]
        author: String,
    },
    Verify { position: String },
    Conclude {
        position: String,
        #[arg(long)]
        session: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum RecommendCommand {
    Next { session: String },
    Related {
        session: String,
        #[arg(long, default_value_t = DEFAULT_RELATED_LIMIT)]
        limit: usize,
    },
    Completeness { session: String },
}

/// Parses a value by its JSON (snake_case) name.
fn parse_enum<T: DeserializeOwned>(raw: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(raw.to_owned())).map_err(|_| format!("unknown value `{raw}`"))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {}", .0.code(), .0)]
    Domain(#[from] kwsp_core::Error),
    #[error("{}: {}", .0.code(), .0)]
    Serve(#[from] ServeError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Serve(_) => 1,
        }
    }
}

type CliResult = Result<Option<String>, CliError>;

fn out<T: Serialize>(value: &T) -> CliResult {
    Ok(Some(serde_json::to_string_pretty(value).expect("output serializes")))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_file(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Domain(kwsp_core::Error::Parse(format!("{}: {e}", path.display()))))
}

fn ids(raw: &[String]) -> Vec<RecordId> {
    raw.iter().map(|s| RecordId::new(s.as_str())).collect()
}

/// Runs one command and returns what it prints on stdout.
pub fn run(cli: Cli) -> CliResult {
    if let Command::Serve { addr, token } = cli.command {
        return run_serve(Config {
            data_dir: cli.data,
            addr,
            token,
        });
    }
    let mut p = Platform::open(&cli.data)?;
    let result = dispatch(&mut p, cli.command);
    p.flush()?;
    result
}

fn run_serve(config: Config) -> CliResult {
    let runtime = tokio::runtime::Runtime::new().map_err(ServeError::Io)?;
    runtime.block_on(async {
        let server = server::Server::bind(&config).await?;
        println!("listening on {}", server.local_addr());
        let _ = std::io::stdout().flush();
        server.run(server::shutdown_signal()).await
    })?;
    Ok(None)
}

fn dispatch(p: &mut Platform, command: Command) -> CliResult {
    match command {
        Command::Serve { .. } => unreachable!("handled before the archive is opened"),
        Command::Def(c) => match c {
            DefCommand::Load { file } => out(&p.load_definition(&read_file(&file)?)?),
            DefCommand::List => {
                let defs: Vec<_> = p.archive().definitions().list().iter().map(|d| d.as_ref().clone()).collect();
                out(&defs)
            }
            DefCommand::Show { task_type } => out(p.definition(&task_type)?.as_ref()),
            DefCommand::Term { task_type, term } => {
                let def = p.definition(&task_type)?;
                let entry = def
                    .lookup_term(&term)
                    .ok_or_else(|| kwsp_core::Error::UnknownNode(format!("{task_type}: no vocabulary term `{term}`")))?;
                out(entry)
            }
            DefCommand::Instances { task_type, node } => out(&p.instances_under(&task_type, &node)?),
            DefCommand::DeviationReport { task_type } => out(&p.deviation_report(&task_type)?),
        },
        Command::Session(c) => match c {
            SessionCommand::Open {
                worker,
                task_type,
                instance,
            } => out(&p.open_session(&worker, &task_type, &instance)?),
            SessionCommand::Advance { session, activity, note } => {
                out(&p.advance(&session.into(), &activity, note.as_deref())?)
            }
            SessionCommand::Complete { session } => out(&p.complete_session(&session.into())?),
            SessionCommand::Abandon { session } => out(&p.abandon_session(&session.into())?),
            SessionCommand::Show { session } => out(p.session(&session.into())?),
            SessionCommand::List => out(&p.sessions().collect::<Vec<_>>()),
            SessionCommand::Context { session } => out(&p.current_context(&session.into())?),
        },
        Command::Articulate(a) => {
            let mut surrogate = Surrogate::titled(a.title);
            surrogate.terms = a.terms;
            let body = Articulation {
                kind: a.kind,
                content: a.content,
                surrogate,
                supports: ids(&a.supports),
                satisfies: ids(&a.satisfies),
                ie_type_node: a.ie_type,
                note: a.note,
            };
            out(&p.articulate(body.into_request(a.session.into()))?)
        }
        Command::Transcribe { job } => {
            let job: TranscriptionJob = read_json(&job)?;
            out(&p.transcribe(job)?)
        }
        Command::Search(s) => {
            let params = SearchParams {
                q: s.terms.join(" "),
                task_type: s.task_type,
                task_instance: s.instance,
                activity_node: s.activity,
                ie_type_node: s.ie_type,
                kind: s.kind,
                limit: Some(s.limit),
            };
            out(&p.search(&params.to_request())?)
        }
        Command::Element(c) => match c {
            ElementCommand::Show { id } => out(p.element(&id.into())?),
            ElementCommand::Provenance { id, max_depth } => out(&p.provenance_closure(&id.into(), max_depth)?),
            ElementCommand::Supports { id } => out(&p.support_set(&id.into())?),
            ElementCommand::Links { id, direction, types } => {
                out(&p.archive().links_of(&id.into(), direction, &types)?)
            }
        },
        Command::Link {
            link_type,
            source,
            target,
            note,
        } => out(&p.link(link_type, source.into(), target.into(), note)?),
        Command::Issue { session, text } => out(&p.raise_issue(&session.into(), &text)?),
        Command::Position(c) => match c {
            PositionCommand::Take { issue, text, author } => out(&p.take_position(&issue.into(), &text, &author)?),
            PositionCommand::Verify { position } => out(&p.verify(&position.into())?),
            PositionCommand::Conclude { position, session } => out(&p.conclude(&position.into(), &session.into())?),
        },
        Command::Argue {
            position,
            text,
            stance,
            author,
            evidence,
        } => out(&p.argue(&position.into(), stance, &text, &author, &ids(&evidence))?),
        Command::Recommend(c) => match c {
            RecommendCommand::Next { session } => out(&p.next_activities(&session.into())?),
            RecommendCommand::Related { session, limit } => out(&p.related_elements(&session.into(), limit)?),
            RecommendCommand::Completeness { session } => out(&p.completeness_warnings(&session.into())?),
        },
        Command::Export { out: None } => Ok(Some(p.export_string().trim_end().to_owned())),
        Command::Export { out: Some(path) } => {
            let file = std::fs::File::create(&path).map_err(kwsp_core::Error::from)?;
            p.export_to(std::io::BufWriter::new(file))?;
            out(&serde_json::json!({ "exported": p.archive().len(), "file": path }))
        }
        Command::Import { file } => {
            let f = std::fs::File::open(&file)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", file.display())))?;
            let count = p.import_from(BufReader::new(f))?;
            out(&serde_json::json!({ "imported": count }))
        }
        Command::Seed => {
            let patient = fixtures::seed_patient_care_scenario(p)?;
            let loan = fixtures::seed_loan_scenario(p)?;
            let sessions: Vec<RecordId> = [patient.p1_session, patient.p2_session]
                .into_iter()
                .chain(loan.sessions)
                .collect();
            out(&serde_json::json!({ "records": p.archive().len(), "sessions": sessions }))
        }
    }
}

use anyhow::Context;
use clap::{Parser, Subcommand};
use pbm_core::ingest::{load_cases, write_cases, CaseSet};
use pbm_core::provenance::StateStore;
use pbm_core::synth::{generate_synthetic, SyntheticProfile};
use pbm_core::thresholds::{load_thresholds, ClinicalThresholds};
use pbm_server::{router, AppState};
use std::fs::File;
use std::io::BufWriter;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pbm", version, about = "Transfusion case analytics: data tools and HTTP API")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check or generate case files
    #[command(subcommand)]
    Ingest(IngestCommand),
    /// Run the HTTP API
    Serve(ServeArgs),
}

#[derive(Subcommand)]
enum IngestCommand {
    /// Load a CSV and report accepted and rejected rows
    Validate {
        file: PathBuf,
        /// Print the report as JSON
        #[arg(long)]
        json: bool,
    },
    /// Write a seeded synthetic case file with planted practice patterns
    Synth(SynthArgs),
}

#[derive(clap::Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 4000)]
    n: usize,
    #[arg(long, default_value_t = 12)]
    surgeons: usize,
    #[arg(long, default_value_t = 20)]
    anesths: usize,
    /// Inclusive year range, e.g. 2014-2019
    #[arg(long, default_value = "2014-2019", value_parser = parse_years)]
    years: (i32, i32),
    #[arg(long, default_value_t = 111)]
    procedures: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the planted ground truth (default: <out>.truth.json)
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ServeArgs {
    /// Case CSV; without it data endpoints answer 503
    #[arg(long)]
    data: Option<PathBuf>,
    /// Threshold config file; defaults apply when omitted
    #[arg(long)]
    thresholds: Option<PathBuf>,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Saved-state log; states are kept in memory only when omitted
    #[arg(long)]
    state_db: Option<PathBuf>,
    #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
    bind: IpAddr,
}

fn parse_years(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s
        .split_once('-')
        .ok_or_else(|| format!("expected START-END, got '{s}'"))?;
    let a = a.trim().parse().map_err(|_| format!("bad start year '{a}'"))?;
    let b = b.trim().parse().map_err(|_| format!("bad end year '{b}'"))?;
    Ok((a, b))
}

fn read_cases(path: &Path) -> anyhow::Result<(CaseSet, pbm_core::ingest::IngestReport)> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    load_cases(file, path.display().to_string()).with_context(|| format!("reading {}", path.display()))
}

fn validate(file: &Path, json: bool) -> anyhow::Result<ExitCode> {
    let (_, report) = read_cases(file)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("accepted {}  rejected {}", report.accepted, report.rejected);
        for r in &report.rejections {
            println!("line {}: {}: {}", r.line, r.field, r.reason);
        }
    }
    Ok(if report.rejected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn synth(args: SynthArgs) -> anyhow::Result<()> {
    let profile = SyntheticProfile {
        n_cases: args.n,
        n_surgeons: args.surgeons,
        n_anesthesiologists: args.anesths,
        year_range: args.years,
        n_procedures: args.procedures,
        seed: args.seed,
    };
    let ds = generate_synthetic(&profile)?;
    let out = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_cases(ds.cases.cases(), BufWriter::new(out))?;

    let truth_path = args.truth.unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".truth.json");
        p.into()
    });
    std::fs::write(&truth_path, serde_json::to_string_pretty(&ds.truth)?)
        .with_context(|| format!("writing {}", truth_path.display()))?;
    eprintln!(
        "wrote {} cases to {} (ground truth in {})",
        ds.cases.len(),
        args.out.display(),
        truth_path.display()
    );
    Ok(())
}

async fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let thresholds = match &args.thresholds {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            load_thresholds(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => ClinicalThresholds::default(),
    };
    let dataset = match &args.data {
        Some(path) => {
            let (cs, report) = read_cases(path)?;
            tracing::info!(accepted = report.accepted, rejected = report.rejected, "loaded {}", path.display());
            for r in report.rejections.iter().take(20) {
                tracing::warn!("line {}: {}: {}", r.line, r.field, r.reason);
            }
            Some(cs)
        }
        None => {
            tracing::warn!("no --data given; data endpoints will answer 503");
            None
        }
    };
    let store = match &args.state_db {
        Some(path) => StateStore::open(path)?,
        None => StateStore::in_memory(),
    };
    if !args.bind.is_loopback() {
        tracing::warn!("binding to {}; the API has no authentication", args.bind);
    }
    let addr = SocketAddr::new(args.bind, args.port);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(dataset, thresholds, store))).await?;
    Ok(())
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(IngestCommand::Validate { file, json }) => validate(&file, json),
        Command::Ingest(IngestCommand::Synth(args)) => synth(args).map(|_| ExitCode::SUCCESS),
        Command::Serve(args) => serve(args).await.map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

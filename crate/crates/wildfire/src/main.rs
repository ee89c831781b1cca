use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::thread;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use wildfire::catalog::load_catalog;
use wildfire::run::{self, LogFile, Summary, LOG_VERSION};
use wildfire::scenario::{load_scenario, save_with_sidecar, scenario_to_json};
use wildfire::table;
use wildfire::transport;
use wildfire_core::agents::{comparison_fixture, PolicyKind};
use wildfire_core::dataset::{
    dedup_incidents, extract_windows, positive_samples, sample_negatives, DedupConfig, NegativeConfig,
    NegativeCounts, NegativeError, Region,
};
use wildfire_core::dataset::windows::{CELLS_PER_DEGREE, POST_DAYS, PRE_DAYS};
use wildfire_core::fuel::{builtin_catalog, FuelCatalog};
use wildfire_core::report::{build_report, render_text, ReportConfig};
use wildfire_core::terrain::{synthetic_scenario, Cell, Scenario, SyntheticKind};

/// Wildfire spread simulator, helitack environment and dataset tools.
#[derive(Debug, Parser, Serialize)]
#[command(name = "wildfire", version)]
struct Cli {
    /// RNG seed; overrides the scenario seed where one applies.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fuel catalog document (defaults to the built-in Anderson 13).
    #[arg(long, global = true, env = "WILDFIRE_CATALOG")]
    catalog: Option<PathBuf>,
    /// Directory that relative output paths resolve against.
    #[arg(long, global = true, env = "WILDFIRE_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
enum Command {
    /// Run episodes with a built-in agent and print table-style summaries.
    Simulate(SimulateArgs),
    /// Measure raw CA and full environment steps per second.
    Bench(BenchArgs),
    /// Dataset pipeline stages.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Serve the line protocol.
    Serve(ServeArgs),
    /// Render a threat report from an episode log.
    Report(ReportArgs),
    /// Write a synthetic scenario document.
    Synth(SynthArgs),
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
struct Source {
    /// Scenario document.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Synthetic terrain kind.
    #[arg(long, value_enum)]
    synthetic: Option<Kind>,
    /// Agent-comparison fixture; each episode seed picks the agent start.
    #[arg(long)]
    fixture: bool,
}

#[derive(Debug, Args, Serialize)]
struct Dims {
    /// Synthetic grid width.
    #[arg(long, default_value_t = 240)]
    width: u32,
    /// Synthetic grid height.
    #[arg(long, default_value_t = 160)]
    height: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
enum Kind {
    FlatUniform,
    SingleSlope,
    Ridge,
    TwoFuel,
}

impl From<Kind> for SyntheticKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::FlatUniform => SyntheticKind::FlatUniform,
            Kind::SingleSlope => SyntheticKind::SingleSlope,
            Kind::Ridge => SyntheticKind::Ridge,
            Kind::TwoFuel => SyntheticKind::TwoFuel,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
enum Agent {
    Blind,
    Circler,
}

impl From<Agent> for PolicyKind {
    fn from(a: Agent) -> Self {
        match a {
            Agent::Blind => PolicyKind::BlindPatrol,
            Agent::Circler => PolicyKind::PerimeterCircler,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    dims: Dims,
    #[arg(long, value_enum)]
    agent: Agent,
    #[arg(long)]
    max_steps: Option<u32>,
    /// Agent start as ROW,COL (default: grid center, or the fixture start).
    #[arg(long, value_parser = parse_cell)]
    agent_start: Option<(u32, u32)>,
    /// Episode log output; with several episodes the index is appended.
    #[arg(long)]
    log_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    episodes: u32,
    /// Worker threads for multi-episode runs.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Summaries as JSON lines.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args, Serialize)]
struct BenchArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    dims: Dims,
    #[arg(long, default_value_t = 10_000)]
    steps: u64,
    /// Episode horizon; episodes restart when it is reached.
    #[arg(long)]
    max_steps: Option<u32>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Subcommand, Serialize)]
enum DatasetCommand {
    /// Filter incidents to CONUS and drop near-duplicates.
    Dedup {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 5.0)]
        min_km: f64,
        #[arg(long, default_value_t = 2.0)]
        min_hours: f64,
    },
    /// Draw far, near and yearly negatives around deduplicated positives.
    Negatives {
        /// Positives as an incidents table.
        #[arg(long)]
        positives: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Sampling rectangle MIN_LAT,MAX_LAT,MIN_LON,MAX_LON (default CONUS).
        #[arg(long, value_parser = parse_bbox)]
        region: Option<[f64; 4]>,
        #[arg(long, default_value_t = 5000)]
        far: usize,
        #[arg(long, default_value_t = 35000)]
        near: usize,
        #[arg(long, default_value_t = 36000)]
        yearly: usize,
        /// Also write the positives to the output table.
        #[arg(long)]
        with_positives: bool,
    },
    /// Expand labeled samples into daily weather windows.
    Windows {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        weather: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = PRE_DAYS)]
        pre: i64,
        #[arg(long, default_value_t = POST_DAYS)]
        post: i64,
        /// Weather grid resolution in cells per degree.
        #[arg(long, default_value_t = CELLS_PER_DEGREE as f64)]
        cells_per_degree: f64,
    },
}

#[derive(Debug, Args, Serialize)]
struct ServeArgs {
    /// Serve one session on standard input/output.
    #[arg(long, conflicts_with_all = ["tcp", "ws"])]
    stdio: bool,
    /// Line protocol over TCP, one session per connection.
    #[arg(long)]
    tcp: Option<String>,
    /// Line protocol over websocket text frames.
    #[arg(long)]
    ws: Option<String>,
    /// Static console bundle over HTTP.
    #[arg(long, requires = "static_dir")]
    http: Option<String>,
    #[arg(long = "static")]
    static_dir: Option<PathBuf>,
    /// Directory that relative scenario paths resolve against.
    #[arg(long, default_value = ".")]
    base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args, Serialize)]
struct ReportArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write to a file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[command(flatten)]
    dims: Dims,
    #[arg(long)]
    output: PathBuf,
    /// Move the grids to a binary sidecar next to the document.
    #[arg(long)]
    sidecar: bool,
}

fn parse_cell(s: &str) -> std::result::Result<(u32, u32), String> {
    let (r, c) = s.split_once(',').ok_or_else(|| "expected ROW,COL".to_string())?;
    Ok((r.trim().parse().map_err(|e| format!("{e}"))?, c.trim().parse().map_err(|e| format!("{e}"))?))
}

fn parse_bbox(s: &str) -> std::result::Result<[f64; 4], String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|e: std::num::ParseFloatError| e.to_string())?;
    v.try_into().map_err(|_| "expected MIN_LAT,MAX_LAT,MIN_LON,MAX_LON".to_string())
}

/// Error with a process exit code: 1 runtime, 2 bad input, 3 saturation.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl Failure {
    fn input(err: impl Into<anyhow::Error>) -> Self {
        Failure { code: 2, err: err.into() }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 1, err: e.into() }
    }
}

type Result<T> = std::result::Result<T, Failure>;

struct Ctx {
    seed: Option<u64>,
    catalog: FuelCatalog,
    out_dir: Option<PathBuf>,
}

impl Ctx {
    fn out(&self, p: &Path) -> PathBuf {
        match &self.out_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn create(&self, p: &Path) -> Result<BufWriter<File>> {
        let p = self.out(p);
        if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        Ok(BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?))
    }

    fn scenario(&self, src: &Source, dims: &Dims) -> Result<Scenario> {
        let seed = self.seed.unwrap_or(0);
        if let Some(p) = &src.scenario {
            let mut s = load_scenario(p, &self.catalog).map_err(Failure::input)?;
            if let Some(seed) = self.seed {
                s.seed = seed;
            }
            return Ok(s);
        }
        if let Some(k) = src.synthetic {
            return synthetic_scenario(k.into(), dims.width, dims.height, seed).map_err(|e| Failure::input(anyhow!("{e}")));
        }
        Ok(comparison_fixture(seed).0)
    }
}

fn open(p: &Path) -> Result<BufReader<File>> {
    File::open(p)
        .map(BufReader::new)
        .with_context(|| format!("opening {}", p.display()))
        .map_err(Failure::input)
}

fn emit_diagnostics(stage: &str, diags: &[wildfire_core::dataset::Diagnostic]) {
    let stderr = io::stderr();
    let mut e = stderr.lock();
    for line in table::diagnostic_lines(stage, diags) {
        let _ = writeln!(e, "{line}");
    }
}

fn simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<()> {
    let base = ctx.scenario(&a.source, &a.dims)?;
    let base_seed = ctx.seed.unwrap_or(base.seed);
    let kind: PolicyKind = a.agent.into();
    let run_one = |i: u32| -> anyhow::Result<(Summary, LogFile)> {
        let seed = base_seed.wrapping_add(i as u64);
        let (scenario, start) = if a.source.fixture {
            let (s, c) = comparison_fixture(seed);
            (s, Some(c))
        } else {
            (base.clone(), None)
        };
        let start = a.agent_start.map(|(r, c)| Cell::new(r, c)).or(start);
        let log = run::simulate(&scenario, &ctx.catalog, kind, seed, start, a.max_steps)?;
        let summary = Summary::from_log(i, seed, kind, &log);
        Ok((summary, LogFile { version: LOG_VERSION.into(), forecast: scenario.forecast.clone(), log }))
    };
    let results: Vec<(Summary, LogFile)> = if a.parallel > 1 && a.episodes > 1 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(a.parallel).build()?;
        pool.install(|| (0..a.episodes).into_par_iter().map(run_one).collect::<anyhow::Result<_>>())
    } else {
        (0..a.episodes).map(run_one).collect::<anyhow::Result<_>>()
    }
    .map_err(Failure::input)?;

    if let Some(out) = &a.log_out {
        for (s, f) in &results {
            let path = if a.episodes > 1 {
                let stem = out.file_stem().and_then(|x| x.to_str()).unwrap_or("episode");
                out.with_file_name(format!("{stem}.{}.json", s.episode))
            } else {
                out.clone()
            };
            let path = ctx.out(&path);
            run::write_atomic(&path, serde_json::to_string(f)?.as_bytes())?;
        }
    }
    let stdout = io::stdout();
    let mut o = stdout.lock();
    for (s, _) in &results {
        if a.json {
            writeln!(o, "{}", serde_json::to_string(s)?)?;
        } else {
            writeln!(o, "{}", s.line())?;
        }
    }
    if results.len() > 1 {
        let n = results.len() as f64;
        let mean = |f: fn(&Summary) -> f64| results.iter().map(|(s, _)| f(s)).sum::<f64>() / n;
        let contained = results.iter().filter(|(s, _)| s.contained).count();
        let line = serde_json::json!({
            "episodes": results.len(),
            "contained": contained,
            "mean_cells_burned": mean(|s| s.cells_burned as f64),
            "mean_timesteps": mean(|s| s.timesteps as f64),
            "mean_helitacks": mean(|s| s.helitacks as f64),
            "mean_water_gal": mean(|s| s.water_gal as f64),
        });
        if a.json {
            writeln!(o, "{line}")?;
        } else {
            writeln!(
                o,
                "mean over {} episodes ({} contained) | Cells Burned: {:.1} | Timesteps: {:.1} | Helitacks: {:.1} | Water Used: {:.0} gal",
                results.len(),
                contained,
                line["mean_cells_burned"].as_f64().unwrap_or(0.0),
                line["mean_timesteps"].as_f64().unwrap_or(0.0),
                line["mean_helitacks"].as_f64().unwrap_or(0.0),
                line["mean_water_gal"].as_f64().unwrap_or(0.0),
            )?;
        }
    }
    Ok(())
}

fn bench(ctx: &Ctx, a: &BenchArgs) -> Result<()> {
    let mut s = ctx.scenario(&a.source, &a.dims)?;
    if let Some(m) = a.max_steps {
        s.max_steps = m;
    }
    let r = run::bench(&s, &ctx.catalog, a.steps)?;
    if a.json {
        println!("{}", serde_json::to_string(&r)?);
    } else {
        println!(
            "steps={} raw_ca={:.0} steps/s env_step={:.0} steps/s episodes={} max_frontier={} checksum={:016x}/{:016x}",
            r.steps, r.raw_steps_per_sec, r.env_steps_per_sec, r.episodes, r.max_frontier, r.raw_checksum, r.env_checksum
        );
    }
    Ok(())
}

fn dataset(ctx: &Ctx, cmd: &DatasetCommand) -> Result<()> {
    match cmd {
        DatasetCommand::Dedup { input, output, min_km, min_hours } => {
            let parsed = table::read_incidents(open(input)?).map_err(Failure::input)?;
            emit_diagnostics("read", &parsed.diagnostics);
            let cfg = DedupConfig { min_km: *min_km, min_hours: *min_hours, ..Default::default() };
            let out = dedup_incidents(&parsed.rows, &cfg);
            emit_diagnostics("dedup", &out.diagnostics);
            table::write_incidents(ctx.create(output)?, &out.retained)?;
            eprintln!(
                "{}",
                serde_json::json!({"input": parsed.rows.len(), "retained": out.retained.len(),
                    "outside_bbox": out.outside_bbox, "duplicates": out.duplicates})
            );
        }
        DatasetCommand::Negatives { positives, output, region, far, near, yearly, with_positives } => {
            let parsed = table::read_incidents(open(positives)?).map_err(Failure::input)?;
            emit_diagnostics("read", &parsed.diagnostics);
            let region = match region {
                Some([a, b, c, d]) => Region::rectangle((*a, *b), (*c, *d)),
                None => Region::conus(),
            };
            let cfg = NegativeConfig {
                counts: NegativeCounts { far: *far, near: *near, yearly: *yearly },
                seed: ctx.seed.unwrap_or(0),
                ..Default::default()
            };
            let negs = match sample_negatives(&parsed.rows, &region, &cfg) {
                Ok(n) => n,
                Err(e @ NegativeError::Saturated { .. }) => return Err(Failure { code: 3, err: e.into() }),
                Err(e) => return Err(Failure::input(e)),
            };
            let mut all = if *with_positives { positive_samples(&parsed.rows) } else { Vec::new() };
            all.extend(negs);
            table::write_samples(ctx.create(output)?, &all)?;
        }
        DatasetCommand::Windows { samples, weather, output, pre, post, cells_per_degree } => {
            let parsed = table::read_samples(open(samples)?).map_err(Failure::input)?;
            emit_diagnostics("read_samples", &parsed.diagnostics);
            let (wt, diags) = table::read_weather(open(weather)?, *cells_per_degree).map_err(Failure::input)?;
            emit_diagnostics("read_weather", &diags);
            let out = extract_windows(&parsed.rows, &wt, *pre, *post);
            emit_diagnostics("windows", &out.diagnostics);
            table::write_windows(ctx.create(output)?, &out.windows)?;
        }
    }
    Ok(())
}

fn serve(ctx: Ctx, a: &ServeArgs) -> Result<()> {
    let catalog = Arc::new(ctx.catalog);
    let mut handles = Vec::new();
    if let (Some(addr), Some(root)) = (&a.http, &a.static_dir) {
        let l = TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
        let root = root.clone();
        handles.push(thread::spawn(move || transport::serve_http(l, root)));
    }
    if let Some(addr) = &a.ws {
        let l = TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
        let (c, b) = (catalog.clone(), a.base_dir.clone());
        handles.push(thread::spawn(move || transport::serve_websocket(l, c, b)));
    }
    if let Some(addr) = &a.tcp {
        let l = TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
        let (c, b) = (catalog.clone(), a.base_dir.clone());
        handles.push(thread::spawn(move || transport::serve_tcp(l, c, b)));
    }
    if a.stdio || handles.is_empty() {
        transport::serve_stdio(catalog, a.base_dir.clone())?;
        return Ok(());
    }
    for h in handles {
        h.join().map_err(|_| anyhow!("server thread panicked"))??;
    }
    Ok(())
}

fn report(ctx: &Ctx, a: &ReportArgs) -> Result<()> {
    let f = run::read_log(&a.log).map_err(Failure::input)?;
    let r = build_report(&f.log, f.forecast.as_ref(), &ReportConfig::default()).map_err(|e| Failure::input(anyhow!("{e}")))?;
    let text = match a.format {
        Format::Text => render_text(&r),
        Format::Json => serde_json::to_string_pretty(&r)? + "\n",
    };
    match &a.output {
        Some(p) => run::write_atomic(&ctx.out(p), text.as_bytes())?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn synth(ctx: &Ctx, a: &SynthArgs) -> Result<()> {
    let s = synthetic_scenario(a.kind.into(), a.dims.width, a.dims.height, ctx.seed.unwrap_or(0))
        .map_err(|e| Failure::input(anyhow!("{e}")))?;
    let path = ctx.out(&a.output);
    if a.sidecar {
        save_with_sidecar(&s, &path)?;
    } else {
        run::write_atomic(&path, scenario_to_json(&s).as_bytes())?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    let catalog = match &cli.catalog {
        Some(p) => load_catalog(p).map_err(Failure::input)?,
        None => builtin_catalog(),
    };
    let ctx = Ctx { seed: cli.seed, catalog, out_dir: cli.out_dir.clone() };
    match &cli.command {
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Bench(a) => bench(&ctx, a),
        Command::Dataset(c) => dataset(&ctx, c),
        Command::Serve(a) => serve(ctx, a),
        Command::Report(a) => report(&ctx, a),
        Command::Synth(a) => synth(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    // Serving over stdio keeps stdout clean; the config line goes to stderr everywhere.
    eprintln!("config: {}", serde_json::to_string(&cli).unwrap_or_default());
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

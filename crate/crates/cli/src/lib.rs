//! The `polorg` command line. [`run`] takes its streams as arguments so the
//! whole CLI can be driven in-process.

mod report;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::{Read, Write};
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::num::{NonZeroU64, NonZeroUsize};
use std::path::{Path, PathBuf};

use anstyle::{AnsiColor, Style};
use clap::{ColorChoice, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use polorg_core::json::ModelJson;
use polorg_core::{
    access_report, diff_moods, format, influence_rank, parse, parse_scenario, propagate, redact, render, whatif, Code, Diagnostic,
    EntityId, InfluenceMode, OrgModel, PropagationParams, RenderFormat, RenderOptions, Scenario, Severity, SourceText,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROBLEMS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Set to any value to disable styled terminal output.
pub const NO_COLOR_VAR: &str = "POLORG_NO_COLOR";

#[derive(Debug, Parser)]
#[command(name = "polorg", version, about = "Political organigrams: check, format, render and analyse .pog models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Dot,
    Svg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Adopt,
    Graded,
}

#[derive(Debug, clap::Args)]
pub struct ParamArgs {
    /// Minimum formal power that relays a change downwards
    #[arg(long)]
    pub threshold: Option<NonZeroU64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub max_rounds: Option<NonZeroUsize>,
}

impl ParamArgs {
    fn apply(&self, params: &mut PropagationParams) {
        if let Some(t) = self.threshold {
            params.cascade_threshold = t;
        }
        if let Some(m) = self.mode {
            params.influence_mode = match m {
                ModeArg::Adopt => InfluenceMode::Adopt,
                ModeArg::Graded => InfluenceMode::Graded,
            };
        }
        if let Some(n) = self.max_rounds {
            params.max_rounds = Some(n);
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a model and report diagnostics
    Check {
        /// Model file, or `-` for standard input
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print a model in canonical form
    Fmt {
        input: PathBuf,
        /// Only report whether the file is already canonical
        #[arg(long)]
        check: bool,
    },
    /// Draw a model as DOT or SVG
    Render {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Svg)]
        format: FormatArg,
        #[arg(long)]
        no_moods: bool,
        #[arg(long)]
        no_informal: bool,
        /// Most parallel strokes drawn for one power edge
        #[arg(long, default_value = "4")]
        cap: NonZeroU64,
    },
    /// Run mood propagation
    Propagate {
        input: PathBuf,
        /// Scenario file (.scn syntax or JSON)
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        json: bool,
        /// Treat oscillation and round-cap terminations as failures
        #[arg(long)]
        strict: bool,
    },
    /// Compare several scenarios side by side
    Whatif {
        input: PathBuf,
        #[arg(long = "scenario", required = true, num_args = 1..)]
        scenarios: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        strict: bool,
    },
    /// Rank entities by influence
    Rank {
        input: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        json: bool,
    },
    /// Classify who can be reached for elicitation
    Access {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        entry: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// List mood differences between two models
    Diff {
        before: PathBuf,
        after: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Replace identities by seeded pseudonyms
    Redact {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Serve the JSON API (and optionally a static client) on loopback
    Serve {
        /// Model to load; an empty model when omitted
        input: Option<PathBuf>,
        #[arg(long, default_value_t = polorg_api::DEFAULT_PORT)]
        port: u16,
        /// Address to bind instead of 127.0.0.1
        #[arg(long)]
        listen: Option<IpAddr>,
        /// Required to bind a non-loopback address
        #[arg(long)]
        acknowledge_exposure: bool,
        /// Directory of static files served beside /api
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

pub struct Io<'a> {
    pub stdin: &'a mut dyn Read,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
    pub color: bool,
}

/// Why a command stopped early; the diagnostics are already printed.
struct Failed;

type Step<T> = Result<T, Failed>;

impl Io<'_> {
    fn styled(&self, style: Style, text: &str) -> String {
        if self.color {
            format!("{style}{text}{style:#}")
        } else {
            text.to_string()
        }
    }

    fn diagnostic(&mut self, origin: &str, d: &Diagnostic) {
        let (line, col) = d.span.map_or((0, 0), |s| (s.line, s.column));
        let color = match d.severity {
            Severity::Error => AnsiColor::Red,
            Severity::Warning => AnsiColor::Yellow,
        };
        let code = self.styled(Style::new().bold().fg_color(Some(color.into())), d.code.as_str());
        let _ = writeln!(self.err, "{origin}:{line}:{col} {code} {}", d.message);
    }

    fn diagnostics(&mut self, origin: &str, ds: &[Diagnostic]) {
        for d in ds {
            self.diagnostic(origin, d);
        }
    }

    fn fail(&mut self, origin: &str, ds: &[Diagnostic]) -> Failed {
        self.diagnostics(origin, ds);
        Failed
    }

    fn read(&mut self, path: &Path) -> Step<(String, String)> {
        if path == Path::new("-") {
            let mut text = String::new();
            return match self.stdin.read_to_string(&mut text) {
                Ok(_) => Ok((text, "<stdin>".into())),
                Err(e) => Err(self.fail("<stdin>", &[Diagnostic::new(Code::Io, format!("cannot read standard input: {e}"), None)])),
            };
        }
        let origin = path.display().to_string();
        match std::fs::read_to_string(path) {
            Ok(text) => Ok((text, origin)),
            Err(e) => Err(self.fail(&origin, &[Diagnostic::new(Code::Io, format!("cannot read {origin}: {e}"), None)])),
        }
    }

    fn load(&mut self, path: &Path) -> Step<(OrgModel, String)> {
        let (text, origin) = self.read(path)?;
        let parsed = parse(&SourceText::with_origin(text, path));
        self.diagnostics(&origin, &parsed.diagnostics);
        parsed.model.map(|m| (m, origin)).ok_or(Failed)
    }

    fn scenario(&mut self, path: &Path) -> Step<(String, Scenario, String)> {
        let (text, origin) = self.read(path)?;
        let stem = path.file_stem().map_or_else(|| origin.clone(), |s| s.to_string_lossy().into_owned());
        if text.trim_start().starts_with('{') {
            return match serde_json::from_str::<Scenario>(&text) {
                Ok(s) => Ok((stem, s, origin)),
                Err(e) => {
                    let span = (e.line() > 0).then(|| polorg_core::Span { line: e.line(), column: e.column().max(1), length: 1 });
                    Err(self.fail(&origin, &[Diagnostic::new(Code::Syntax, format!("invalid JSON scenario: {e}"), span)]))
                }
            };
        }
        let parsed = parse_scenario(&text);
        self.diagnostics(&origin, &parsed.diagnostics);
        match parsed.scenario {
            Some(s) => Ok((parsed.name.unwrap_or(stem), s, origin)),
            None => Err(Failed),
        }
    }

    fn json(&mut self, value: &impl serde::Serialize) {
        let text = serde_json::to_string_pretty(value).expect("reports serialize");
        let _ = writeln!(self.out, "{text}");
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let color = if io.color { ColorChoice::Auto } else { ColorChoice::Never };
    let matches = Cli::command().color(color).try_get_matches_from(args);
    let cli = match matches.and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let text = if io.color { e.render().ansi().to_string() } else { e.render().to_string() };
            let code = e.exit_code();
            let stream: &mut dyn Write = if code == 0 { io.out } else { io.err };
            let _ = write!(stream, "{text}");
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match execute(cli.command, io) {
        Ok(code) => code,
        Err(Failed) => EXIT_PROBLEMS,
    }
}

fn execute(command: Command, io: &mut Io<'_>) -> Step<i32> {
    match command {
        Command::Check { input, json } => {
            let (text, origin) = io.read(&input)?;
            let parsed = parse(&SourceText::with_origin(text, &input));
            if json {
                io.json(&serde_json::json!({ "diagnostics": parsed.diagnostics }));
            }
            io.diagnostics(&origin, &parsed.diagnostics);
            Ok(if parsed.model.is_some() { EXIT_OK } else { EXIT_PROBLEMS })
        }
        Command::Fmt { input, check } => {
            let (text, origin) = io.read(&input)?;
            let parsed = parse(&SourceText::with_origin(text.clone(), &input));
            io.diagnostics(&origin, &parsed.diagnostics);
            let model = parsed.model.ok_or(Failed)?;
            let canonical = format(&model);
            if check {
                if canonical != text {
                    let _ = writeln!(io.err, "{origin}: not in canonical form");
                    return Ok(EXIT_PROBLEMS);
                }
                return Ok(EXIT_OK);
            }
            let _ = write!(io.out, "{canonical}");
            Ok(EXIT_OK)
        }
        Command::Render { input, format: f, no_moods, no_informal, cap } => {
            let (model, _) = io.load(&input)?;
            let opts = RenderOptions {
                format: match f {
                    FormatArg::Dot => RenderFormat::Dot,
                    FormatArg::Svg => RenderFormat::Svg,
                },
                show_moods: !no_moods,
                show_informal: !no_informal,
                parallel_line_cap: cap,
            };
            let _ = write!(io.out, "{}", render(&model, &opts));
            Ok(EXIT_OK)
        }
        Command::Propagate { input, scenario, params, json, strict } => {
            let (model, _) = io.load(&input)?;
            let (mut scn, scn_origin) = match &scenario {
                Some(path) => {
                    let (_, s, origin) = io.scenario(path)?;
                    (s, origin)
                }
                None => (Scenario::default(), String::new()),
            };
            params.apply(&mut scn.params);
            let trace = propagate(&model, &scn).map_err(|e| io.fail(&scn_origin, &e.diagnostics()))?;
            if json {
                io.json(&trace);
            } else {
                report::trace(io, &model, &trace);
            }
            Ok(if strict && !trace.termination.is_fixpoint() { EXIT_PROBLEMS } else { EXIT_OK })
        }
        Command::Whatif { input, scenarios, json, strict } => {
            let (model, _) = io.load(&input)?;
            let mut named = Vec::new();
            let mut origins = Vec::new();
            for path in &scenarios {
                let (name, s, origin) = io.scenario(path)?;
                named.push((name, s));
                origins.push(origin);
            }
            let table = whatif(&model, &named).map_err(|e| io.fail(&origins.join(","), &e.diagnostics()))?;
            if json {
                io.json(&table);
            } else {
                report::whatif(io, &table);
            }
            let mut code = EXIT_OK;
            for (row, origin) in table.rows.iter().zip(&origins) {
                match &row.outcome {
                    polorg_core::analysis::ScenarioOutcome::Error { error } => {
                        io.diagnostic(origin, error);
                        code = EXIT_PROBLEMS;
                    }
                    polorg_core::analysis::ScenarioOutcome::Ok { termination, .. } => {
                        if strict && !termination.is_fixpoint() {
                            code = EXIT_PROBLEMS;
                        }
                    }
                }
            }
            Ok(code)
        }
        Command::Rank { input, params, json } => {
            let (model, _) = io.load(&input)?;
            let mut p = PropagationParams::default();
            params.apply(&mut p);
            let ranking = influence_rank(&model, &p);
            if json {
                io.json(&ranking.entries);
            } else {
                report::rank(io, &ranking);
            }
            Ok(EXIT_OK)
        }
        Command::Access { input, entry, json } => {
            let (model, origin) = io.load(&input)?;
            let mut entries = BTreeSet::new();
            for raw in entry.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
                match EntityId::new(raw) {
                    Ok(id) => {
                        entries.insert(id);
                    }
                    Err(_) => {
                        let d = Diagnostic::new(Code::BadEntry, format!("`{raw}` is not an entity id"), None);
                        return Err(io.fail(&origin, &[d]));
                    }
                }
            }
            let report = access_report(&model, &entries).map_err(|e| io.fail(&origin, &e.diagnostics()))?;
            if json {
                io.json(&report);
            } else {
                report::access(io, &model, &report);
            }
            Ok(EXIT_OK)
        }
        Command::Diff { before, after, json } => {
            let (a, _) = io.load(&before)?;
            let (b, origin) = io.load(&after)?;
            let changes = diff_moods(&a.moods(), &b.moods()).map_err(|e| io.fail(&origin, &e.diagnostics()))?;
            if json {
                io.json(&changes);
            } else {
                for c in &changes {
                    let _ = writeln!(io.out, "{}: {} -> {}", c.entity, c.before.as_str(), c.after.as_str());
                }
            }
            Ok(EXIT_OK)
        }
        Command::Redact { input, seed, json } => {
            let (model, _) = io.load(&input)?;
            let hidden = redact(&model, seed);
            if json {
                io.json(&ModelJson::from(&hidden));
            } else {
                let _ = write!(io.out, "{}", format(&hidden));
            }
            Ok(EXIT_OK)
        }
        Command::Serve { input, port, listen, acknowledge_exposure, static_dir } => {
            let addr = SocketAddr::new(listen.unwrap_or(IpAddr::V4(Ipv4Addr::LOCALHOST)), port);
            if let Err(e) = polorg_api::check_exposure(&addr, acknowledge_exposure) {
                let _ = writeln!(io.err, "error: {e}");
                return Ok(EXIT_USAGE);
            }
            let (model, origin) = match &input {
                Some(path) => {
                    let (m, _) = io.load(path)?;
                    (m, (path != Path::new("-")).then(|| path.clone()))
                }
                None => (OrgModel::empty("untitled"), None),
            };
            serve(io, addr, acknowledge_exposure, model, origin, static_dir)
        }
    }
}

fn serve(io: &mut Io<'_>, addr: SocketAddr, ack: bool, model: OrgModel, origin: Option<PathBuf>, static_dir: Option<PathBuf>) -> Step<i32> {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(|e| {
        io.fail("serve", &[Diagnostic::new(Code::Io, format!("cannot start runtime: {e}"), None)])
    })?;
    runtime.block_on(async {
        let listener = polorg_api::bind(addr, ack).await.map_err(|e| io.fail("serve", &[Diagnostic::new(Code::Io, e.to_string(), None)]))?;
        let local = listener.local_addr().unwrap_or(addr);
        let _ = writeln!(io.err, "listening on http://{local}/api");
        let _ = io.err.flush();
        polorg_api::serve(listener, polorg_api::Session::new(model, origin), static_dir)
            .await
            .map_err(|e| io.fail("serve", &[Diagnostic::new(Code::Io, e.to_string(), None)]))?;
        Ok(EXIT_OK)
    })
}

use std::error::Error;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use facetalk_core::display::FacialDisplay;
use facetalk_core::face::{render_frame, AnimState, FrameMode};
use facetalk_core::plan::PlanConfig;
use facetalk_core::resources::ResourcePaths;
use facetalk_core::session::{classify, encode, replay, score_session, Server, SessionConfig, SessionLog};
use facetalk_core::Resources;

type Result<T> = std::result::Result<T, Box<dyn Error>>;

/// Product-information dialogue with a talking face.
///
/// With no subcommand, serves the line protocol on --port, or replays a
/// script when --replay is given.
#[derive(Parser, Debug)]
#[command(name = "facetalk", version)]
struct Cli {
    #[command(flatten)]
    data: DataArgs,

    #[command(flatten)]
    tuning: TuningArgs,

    /// TCP port for the session server.
    #[arg(long, default_value_t = 7420)]
    port: u16,

    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1")]
    host: String,

    /// Replay a script of user turns instead of serving.
    #[arg(long, value_name = "SCRIPT")]
    replay: Option<PathBuf>,

    /// Write the replayed session log (JSON lines) here.
    #[arg(long, value_name = "FILE")]
    log: Option<PathBuf>,

    /// Write every outbound protocol message of a replay here.
    #[arg(long, value_name = "FILE")]
    dump: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct DataArgs {
    #[arg(long, global = true)]
    kb: Option<PathBuf>,
    #[arg(long, global = true)]
    grammar: Option<PathBuf>,
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    #[arg(long, global = true)]
    constraints: Option<PathBuf>,
    #[arg(long, global = true)]
    templates: Option<PathBuf>,
    #[arg(long, global = true)]
    displays: Option<PathBuf>,
    #[arg(long, global = true)]
    mesh: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TuningArgs {
    /// Frames per second streamed to clients.
    #[arg(long, default_value_t = 25, global = true)]
    fps: u32,
    /// Preference gap below which belief contexts count as rivals.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Score gap below which N-best hypotheses count as close.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Score penalty per minute of session time.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// What each frame carries.
    #[arg(long, value_enum, default_value_t = Frames::Params, global = true)]
    frames: Frames,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Frames {
    Params,
    Vertices,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hold a display and write the resulting full-vertex frame as JSON.
    Render {
        /// Display name or label, e.g. BOSStory or Shrug.
        display: String,
        #[arg(long)]
        out: PathBuf,
        /// How long to animate toward the display, in milliseconds.
        #[arg(long, default_value_t = 3000)]
        at_ms: u64,
    },
    /// Score and classify a session log.
    Score { log: PathBuf },
    /// Write the face mesh and muscles as JSON.
    ExportMesh {
        #[arg(long)]
        out: PathBuf,
    },
}

fn resources(d: &DataArgs) -> Result<Resources> {
    let paths = ResourcePaths {
        grammar: d.grammar.clone(),
        lexicon: d.lexicon.clone(),
        constraints: d.constraints.clone(),
        kb: d.kb.clone(),
        templates: d.templates.clone(),
        displays: d.displays.clone(),
        mesh: d.mesh.clone(),
    };
    Ok(Resources::load(&paths)?)
}

fn session_config(t: &TuningArgs) -> Result<SessionConfig> {
    let mut cfg = SessionConfig {
        fps: t.fps,
        frame_mode: match t.frames {
            Frames::Params => FrameMode::Params,
            Frames::Vertices => FrameMode::Vertices,
        },
        plan: PlanConfig::default(),
        ..SessionConfig::default()
    };
    if t.fps == 0 {
        return Err("--fps must be positive".into());
    }
    if let Some(e) = t.epsilon {
        if !(e.is_finite() && e >= 0.0) {
            return Err("--epsilon must be a non-negative number".into());
        }
        cfg.plan.epsilon = e;
    }
    if let Some(d) = t.delta {
        if !(d.is_finite() && d > 0.0) {
            return Err("--delta must be positive".into());
        }
        cfg.delta = d;
    }
    if let Some(l) = t.lambda {
        if !(l.is_finite() && l >= 0.0) {
            return Err("--lambda must be a non-negative number".into());
        }
        cfg.lambda = l;
    }
    Ok(cfg)
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("facetalk: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let res = Arc::new(resources(&cli.data)?);
    let cfg = session_config(&cli.tuning)?;
    match cli.command {
        Some(Command::Render { display, out, at_ms }) => render(&res, &display, &out, at_ms),
        Some(Command::Score { log }) => {
            let log = SessionLog::from_jsonl(&fs::read_to_string(log)?)?;
            let score = score_session(&log, cfg.lambda);
            let class = classify(&log.histogram(), score, cfg.smooth_threshold);
            println!(
                "topics {}  elapsed {:.1} s  score {score:.3}  {class:?}",
                log.topics_visited().len(),
                log.elapsed_s
            );
            Ok(())
        }
        Some(Command::ExportMesh { out }) => Ok(fs::write(out, res.mesh.to_json())?),
        None => match cli.replay {
            Some(script) => {
                let r = replay(res, cfg, &fs::read_to_string(script)?)?;
                print!("{}", r.transcript());
                println!(
                    "topics {}  elapsed {:.1} s  score {:.3}  {:?}",
                    r.log.topics_visited().len(),
                    r.log.elapsed_s,
                    r.score,
                    r.classification
                );
                if let Some(path) = cli.log {
                    fs::write(path, r.log.to_jsonl())?;
                }
                if let Some(path) = cli.dump {
                    let lines: Vec<String> = r.messages.iter().map(encode).collect();
                    fs::write(path, lines.join("\n") + "\n")?;
                }
                Ok(())
            }
            None => {
                let server = Server::bind((cli.host.as_str(), cli.port), res, cfg)?;
                log::info!("listening on {}", server.local_addr()?);
                Ok(server.run()?)
            }
        },
    }
}

fn render(res: &Resources, name: &str, out: &PathBuf, at_ms: u64) -> Result<()> {
    let display = FacialDisplay::from_name(name).ok_or_else(|| format!("unknown display `{name}`"))?;
    let mut anim = AnimState::default();
    let period = 0.04;
    let mut t = 0.0;
    for req in res.displays.compose(&[display]) {
        anim.a = req.params;
        let until = (t + req.hold_ms as f64 / 1000.0).min(at_ms as f64 / 1000.0);
        while anim.time + period <= until + 1e-9 {
            anim.step(period, &res.visemes);
        }
        t += req.hold_ms as f64 / 1000.0;
    }
    let rest = at_ms as f64 / 1000.0 - anim.time;
    if rest > 1e-9 {
        anim.step(rest, &res.visemes);
    }
    let frame = render_frame(&anim, &res.mesh, FrameMode::Vertices);
    fs::write(out, serde_json::to_string(&frame)?)?;
    println!("{} at {} ms -> {}", display.name(), frame.t_ms, out.display());
    Ok(())
}

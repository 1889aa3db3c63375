use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use effects_core::actors::{self, Configuration, Scheduler, DEFAULT_WINDOW};
use effects_core::equivalence::{catalog, check, find_law, parse_laws, EnumConfig, Law, Method, Verdict};
use effects_core::logic::{parse_file, valid, ClassTable, Item, Truth};
use effects_core::reducer::{eval, eval_with_trace, Description, Outcome};
use effects_core::syntax::parse;

const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "effects", version, about = "Reduction, equivalence, logic and actor checks for a lambda language with cells")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed expression.
    Eval {
        #[arg(long, default_value_t = 2000)]
        max_steps: usize,
        /// Print every intermediate description.
        #[arg(long)]
        trace: bool,
        #[arg(short = 'e', long = "expr", conflicts_with = "file")]
        expr: Option<String>,
        file: Option<PathBuf>,
    },
    /// Compare two expressions.
    Equiv {
        #[arg(long, default_value = "ciu", value_parser = ["strong-iso", "ciu"])]
        method: String,
        #[command(flatten)]
        bounds: Bounds,
        e0: String,
        e1: String,
    },
    /// Check laws from the built-in catalog or a file.
    Law {
        #[arg(long, required_unless_present_any = ["all", "file"])]
        name: Option<String>,
        #[arg(long)]
        all: bool,
        /// Read `(law ...)` forms from a file instead of the catalog.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Generated instances per law.
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Check every formula in a file for validity.
    Assert {
        #[command(flatten)]
        bounds: Bounds,
        file: PathBuf,
    },
    /// Run or observe an actor configuration.
    Actor {
        #[command(subcommand)]
        mode: ActorMode,
    },
}

#[derive(Args, Clone)]
struct Bounds {
    #[arg(long, default_value_t = 2)]
    value_depth: usize,
    #[arg(long, default_value_t = 3)]
    cells: usize,
    #[arg(long, default_value_t = 2)]
    ctx_depth: usize,
    #[arg(long, default_value_t = 2000)]
    max_steps: usize,
    #[arg(long, env = "EFFECTS_SEED", default_value_t = 0)]
    seed: u64,
    /// Restrict generated values to atoms and cells.
    #[arg(long)]
    first_order: bool,
}

impl Bounds {
    fn config(&self) -> Result<EnumConfig, String> {
        let cfg = EnumConfig {
            value_depth: self.value_depth,
            max_cells: self.cells,
            ctx_depth: self.ctx_depth,
            max_steps: self.max_steps,
            seed: self.seed,
            first_order: self.first_order,
            ..EnumConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum ActorMode {
    /// One run under a scheduler.
    Run(ActorArgs),
    /// Random runs classified by whether an event happens.
    Observe(ActorArgs),
}

#[derive(Args)]
struct ActorArgs {
    /// rr, random, or script FILE.
    #[arg(long, num_args = 1..=2, default_values = ["rr"])]
    scheduler: Vec<String>,
    #[arg(long, env = "EFFECTS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    /// Transition budget per run.
    #[arg(long, default_value_t = 2000)]
    max_steps: usize,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    config: Option<PathBuf>,
}

/// A failure before any check ran.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Usage> {
    std::fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    let start = Instant::now();
    let code = match dispatch(cli.command) {
        Ok(code) => code,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(USAGE);
        }
    };
    println!("time {:.3}s", start.elapsed().as_secs_f64());
    ExitCode::from(code)
}

fn dispatch(command: Command) -> Result<u8, Usage> {
    match command {
        Command::Eval {
            max_steps,
            trace,
            expr,
            file,
        } => {
            let text = match (expr, file) {
                (Some(e), _) => e,
                (None, Some(f)) => read(&f)?,
                (None, None) => return Err(Usage("eval needs FILE or -e EXPR".into())),
            };
            cmd_eval(&text, max_steps, trace)
        }
        Command::Equiv { method, bounds, e0, e1 } => cmd_equiv(&method, &bounds, &e0, &e1),
        Command::Law {
            name,
            all,
            file,
            cases,
            bounds,
        } => {
            let laws = match (&file, &name, all) {
                (Some(f), _, _) => {
                    let laws = parse_laws(&read(f)?)?;
                    match &name {
                        Some(n) => laws.into_iter().filter(|l| &l.name == n).collect(),
                        None => laws,
                    }
                }
                (None, _, true) => catalog(),
                (None, Some(n), false) => vec![find_law(n).ok_or_else(|| Usage(format!("unknown law {n}")))?],
                (None, None, false) => unreachable!("clap requires one of them"),
            };
            if laws.is_empty() {
                return Err(Usage("no matching laws".into()));
            }
            cmd_law(&laws, cases, &bounds)
        }
        Command::Assert { bounds, file } => cmd_assert(&file, &bounds),
        Command::Actor { mode } => match mode {
            ActorMode::Run(a) => cmd_actor(a, false),
            ActorMode::Observe(a) => cmd_actor(a, true),
        },
    }
}

fn cmd_eval(text: &str, max_steps: usize, trace: bool) -> Result<u8, Usage> {
    let e = parse(text)?;
    println!("command eval max-steps {max_steps}");
    let d = Description::closed(e);
    let outcome = if trace {
        let (o, ds) = eval_with_trace(&d, max_steps);
        for (i, d) in ds.iter().enumerate() {
            println!("step {i} {} {}", d.memory.to_sexp_string(), d.expr);
        }
        o
    } else {
        eval(&d, max_steps)
    };
    Ok(match outcome {
        Outcome::Value { value, memory } => {
            println!("VALUE {value}");
            if !memory.is_empty() {
                println!("memory {}", memory.to_sexp_string());
            }
            0
        }
        Outcome::Stuck(d) => {
            println!("STUCK {}", d.expr);
            println!("memory {}", d.memory.to_sexp_string());
            1
        }
        Outcome::Timeout(n) => {
            println!("TIMEOUT {n}");
            2
        }
    })
}

fn print_verdict(v: &Verdict) {
    match v {
        Verdict::Holds => println!("verdict HOLDS"),
        Verdict::Fails(w) => {
            println!("verdict FAILS");
            println!("witness {}", w.to_sexp());
        }
        Verdict::Unknown(r) => println!("verdict UNKNOWN {r}"),
    }
}

fn cmd_equiv(method: &str, bounds: &Bounds, e0: &str, e1: &str) -> Result<u8, Usage> {
    let cfg = bounds.config().map_err(Usage)?;
    let method = Method::from_name(method).expect("clap checks the method");
    let (a, b) = (parse(e0)?, parse(e1)?);
    println!("command equiv method {}", method.name());
    println!("config {}", cfg.describe());
    println!("lhs {a}");
    println!("rhs {b}");
    let report = check(&a, &b, &cfg, method);
    print_verdict(&report.verdict);
    println!("counts {}", report.counts_line());
    if cfg.first_order {
        let other = match method {
            Method::StrongIso => Method::Ciu,
            Method::Ciu => Method::StrongIso,
        };
        let second = check(&a, &b, &cfg, other);
        let agree = second.verdict.tag() == report.verdict.tag();
        println!(
            "first-order {} {} agreement {}",
            other.name(),
            second.verdict.tag(),
            if agree { "yes" } else { "no" }
        );
    }
    Ok(report.verdict.exit_code() as u8)
}

fn cmd_law(laws: &[Law], instances: usize, bounds: &Bounds) -> Result<u8, Usage> {
    let cfg = bounds.config().map_err(Usage)?;
    println!("command law instances {instances}");
    println!("config {}", cfg.describe());
    let mut worst = 0u8;
    let mut as_expected = 0;
    for law in laws {
        let report = law.check(&cfg, instances);
        println!("law {} oracle {}", law.name, law.oracle.name());
        print_verdict(&report.verdict);
        println!("counts {}", report.counts_line());
        as_expected += usize::from(report.as_expected());
        let code = if laws.len() == 1 {
            report.verdict.exit_code() as u8
        } else if report.as_expected() {
            0
        } else if report.verdict.is_unknown() {
            2
        } else {
            1
        };
        worst = worst.max(code);
    }
    if laws.len() > 1 {
        println!("summary laws {} as-expected {as_expected}", laws.len());
    }
    Ok(worst)
}

fn cmd_assert(file: &Path, bounds: &Bounds) -> Result<u8, Usage> {
    let cfg = bounds.config().map_err(Usage)?;
    let mut table = ClassTable::new();
    let items = parse_file(&read(file)?, &mut table)?;
    println!("command assert file {}", file.display());
    println!("config {}", cfg.describe());
    let mut results = Vec::new();
    for (i, item) in items.iter().enumerate() {
        match item {
            Item::Defclass(name, class) => println!("class {name} {class}"),
            Item::Assert(phi) => {
                let v = valid(phi, &cfg, &table)?;
                println!("assert {i} {phi}");
                println!("verdict {}", v.verdict);
                println!("counts models {} holds {} unknown {}", v.models, v.holds, v.unknown);
                results.push(v.verdict);
            }
        }
    }
    let overall = Truth::all(results);
    println!("overall {}", overall.tag());
    Ok(overall.exit_code() as u8)
}

fn scheduler_choice(a: &ActorArgs) -> Result<(String, Option<PathBuf>, PathBuf), Usage> {
    let mut config = a.config.clone();
    let kind = a.scheduler[0].clone();
    let extra = a.scheduler.get(1).map(PathBuf::from);
    let script = match kind.as_str() {
        "script" => Some(extra.ok_or_else(|| Usage("--scheduler script needs a FILE".into()))?),
        "rr" | "random" => {
            if let Some(x) = extra {
                if config.replace(x).is_some() {
                    return Err(Usage("unexpected extra argument after --scheduler".into()));
                }
            }
            None
        }
        other => return Err(Usage(format!("unknown scheduler {other}; expected rr, random or script"))),
    };
    let config = config.ok_or_else(|| Usage("missing CONFIG".into()))?;
    Ok((kind, script, config))
}

fn cmd_actor(a: ActorArgs, observe: bool) -> Result<u8, Usage> {
    let (kind, script, path) = scheduler_choice(&a)?;
    let c = Configuration::parse(&read(&path)?)?;
    if observe {
        if a.samples == 0 {
            return Err(Usage("--samples must be at least 1".into()));
        }
        println!("command actor observe samples {} max-steps {} seed {}", a.samples, a.max_steps, a.seed);
        println!("config {c}");
        let seeds = actors::sample_seeds(a.seed, a.samples);
        let obs = actors::observe_event(&c, a.max_steps, &seeds).map_err(|e| Usage(e.to_string()))?;
        println!("observed {}", obs.verdict);
        for (tag, n) in &obs.per_tag {
            println!("tag {tag} runs {n}");
        }
        let seed = |s: Option<u64>| s.map_or("-".to_string(), |s| s.to_string());
        println!(
            "counts runs {} with-event {} seed-with {} seed-without {}",
            obs.runs,
            obs.runs_with_event,
            seed(obs.seed_with),
            seed(obs.seed_without)
        );
        return Ok(0);
    }
    let mut sched = match (kind.as_str(), &script) {
        ("script", Some(f)) => Scheduler::scripted(actors::parse_script(&read(f)?)?),
        ("random", _) => Scheduler::random(a.seed),
        _ => Scheduler::round_robin(a.window),
    };
    println!(
        "command actor run scheduler {kind} max-steps {} seed {} window {}",
        a.max_steps, a.seed, a.window
    );
    println!("config {c}");
    let r = match actors::run(&c, &mut sched, a.max_steps) {
        Ok(r) => r,
        Err(e) => {
            println!("error {e}");
            return Ok(1);
        }
    };
    for item in &r.trace {
        println!("trace {item}");
    }
    println!("final {}", r.last);
    println!("outcome {}", if r.finished { "FINISHED" } else { "BUDGET" });
    let audit = actors::audit(&c, &r.trace).map_err(|e| Usage(e.to_string()))?;
    let show = |r: &Result<(), String>| match r {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("violated {e}"),
    };
    println!("audit interface {}", show(&audit.interface));
    println!("audit privacy {}", show(&audit.privacy));
    println!("audit max-wait {}", audit.max_wait);
    println!("counts steps {} messages {}", r.steps, r.last.messages.len());
    Ok(if audit.ok() { 0 } else { 1 })
}

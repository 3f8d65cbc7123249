use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sentagg_core::aggregate::Step;
use sentagg_core::oracle::conciseness_stats;
use sentagg_core::{
    aggregate, canonicalize, fd, jsonl, realize_document, validate_messages, Message, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "sentagg",
    version,
    about = "Combine similar structured messages into concise report sentences"
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Run the aggregation pipeline (the default when no subcommand is given)
    Run(RunArgs),
    /// Emit a random JSON-lines corpus for testing
    Gen(GenArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// Input path, or `-` for stdin
    #[arg(long, default_value = "-")]
    input: String,

    /// Input format
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    format: Format,

    /// JSON config file; built-in defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,

    /// What to write
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    emit: Emit,

    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,

    /// Disable a pipeline step (repeatable)
    #[arg(long = "disable", value_name = "STEP")]
    disable: Vec<StepArg>,

    /// Cap on clauses per sentence
    #[arg(long)]
    max_clauses: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    /// Seed for the corpus generator
    #[arg(long)]
    seed: u64,

    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum Format {
    Fd,
    #[default]
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum Emit {
    #[default]
    Text,
    Plan,
    Stats,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StepArg {
    Sort,
    Merge,
    Delete,
    Break,
}

impl From<StepArg> for Step {
    fn from(step: StepArg) -> Step {
        match step {
            StepArg::Sort => Step::Sort,
            StepArg::Merge => Step::Merge,
            StepArg::Delete => Step::Delete,
            StepArg::Break => Step::Break,
        }
    }
}

const EXIT_INPUT: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Run(args)) => run(args),
        Some(Command::Gen(args)) => gen(args),
        None => run(cli.run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}

fn run(args: RunArgs) -> Result<(), u8> {
    let mut config = load_config(args.config.as_deref())?;
    for step in &args.disable {
        config.options.disabled_steps.insert((*step).into());
    }
    if let Some(cap) = args.max_clauses {
        config.options.max_clauses = Some(cap);
    }
    config.validate().map_err(|e| {
        eprintln!("error: {}", e);
        EXIT_CONFIG
    })?;

    let text = read_input(&args.input)?;
    let parsed = match args.format {
        Format::Fd => fd::parse_fd_stream(&text, &config.schema),
        Format::Jsonl => jsonl::parse_jsonl(&text, &config.schema),
    }
    .map_err(|e| {
        eprintln!("error: {}", e);
        EXIT_INPUT
    })?;
    let msgs = canonicalize(parsed, &config.lexicon);
    validate_messages(&msgs, &config.schema).map_err(|e| {
        eprintln!("error: {}", e);
        EXIT_INPUT
    })?;

    let plan = aggregate(&msgs, &config.schema, &config.aggregate_options());
    let output = render_emission(&args.emit, &msgs, &plan, &config)?;
    write_output(args.out.as_deref(), &output)
}

fn render_emission(
    emit: &Emit,
    msgs: &[Message],
    plan: &sentagg_core::DocumentPlan,
    config: &RunConfig,
) -> Result<String, u8> {
    let realize_err = |e: sentagg_core::RealizeError| {
        eprintln!("error: {}", e);
        EXIT_CONFIG
    };
    let text = match emit {
        Emit::Text => realize_document(plan, &config.lexicon, &config.render_options())
            .map_err(realize_err)?,
        Emit::Plan => plan.to_canonical_json(),
        Emit::Stats => {
            let report = conciseness_stats(msgs, plan, &config.lexicon, &config.render_options())
                .map_err(realize_err)?;
            serde_json::to_string_pretty(&report).expect("report serializes")
        }
        Emit::All => {
            let rendered = realize_document(plan, &config.lexicon, &config.render_options())
                .map_err(realize_err)?;
            let report = conciseness_stats(msgs, plan, &config.lexicon, &config.render_options())
                .map_err(realize_err)?;
            let combined = serde_json::json!({
                "text": rendered,
                "plan": plan,
                "stats": report,
            });
            serde_json::to_string_pretty(&combined).expect("combined output serializes")
        }
    };
    Ok(text)
}

fn gen(args: GenArgs) -> Result<(), u8> {
    let corpus = sentagg_core::gen::gen_default_corpus(args.seed);
    let output = jsonl::to_jsonl(&corpus);
    write_output(args.out.as_deref(), output.trim_end_matches('\n'))
}

fn load_config(path: Option<&std::path::Path>) -> Result<RunConfig, u8> {
    let Some(path) = path else { return Ok(RunConfig::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read config {}: {}", path.display(), e);
        EXIT_CONFIG
    })?;
    RunConfig::from_json(&text).map_err(|e| {
        eprintln!("error: {}", e);
        EXIT_CONFIG
    })
}

fn read_input(input: &str) -> Result<String, u8> {
    if input == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).map_err(|e| {
            eprintln!("error: cannot read stdin: {}", e);
            EXIT_INPUT
        })?;
        return Ok(text);
    }
    std::fs::read_to_string(input).map_err(|e| {
        eprintln!("error: cannot read {}: {}", input, e);
        EXIT_INPUT
    })
}

fn write_output(out: Option<&std::path::Path>, content: &str) -> Result<(), u8> {
    let payload = if content.is_empty() { String::new() } else { format!("{}\n", content) };
    match out {
        Some(path) => std::fs::write(path, payload).map_err(|e| {
            eprintln!("error: cannot write {}: {}", path.display(), e);
            EXIT_INPUT
        }),
        None => {
            print!("{}", payload);
            Ok(())
        }
    }
}

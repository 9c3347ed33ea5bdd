use std::io::{IsTerminal, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use formkit::commands::{run, Command, Grassmannian, Params};
use formkit::format::parse_ring_flag;
use formkit::report::Report;

/// Exact verification of bilinear-form constructions.
#[derive(Parser)]
#[command(name = "formkit", version)]
struct Cli {
    #[command(subcommand)]
    group: Group,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// Z, Q, F<p>, Z/<n>, optionally with variables as in Q[t0,t1].
    #[arg(long, global = true, default_value = "Q")]
    ring: String,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 20)]
    samples: usize,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    m: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    i: Option<i64>,
    #[arg(long = "max-stab", global = true, default_value_t = 4)]
    max_stab: usize,
    #[arg(long, global = true, value_enum)]
    grassmannian: Option<GrassArg>,
    #[arg(long, global = true, value_enum, default_value_t = OutputArg::Json)]
    output: OutputArg,
    /// Input document; standard input is read when this is absent and
    /// stdin is not a terminal.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum GrassArg {
    Hgr,
    Rgr,
}

#[derive(Subcommand)]
enum Group {
    #[command(subcommand)]
    Form(FormCmd),
    #[command(subcommand)]
    Gw(GwCmd),
    #[command(subcommand)]
    Sp(SpCmd),
    #[command(subcommand)]
    Koszul(KoszulCmd),
    #[command(subcommand)]
    Grass(GrassCmd),
    /// Reduced run of every module check.
    Selftest,
}

#[derive(Subcommand)]
enum FormCmd {
    /// Certify S ⊥ −S inside the hyperbolic space.
    Embed,
    /// Tensor two spaces, or check Hⁿ ⊗ Hᵐ against the hyperbolic form.
    Tensor,
    /// Symplectic Gram–Schmidt to H₋ⁿ.
    Standardize,
}

#[derive(Subcommand)]
enum GwCmd {
    /// The class [A] − (rank/2 − i)[H₋].
    Ksp0,
    /// Witt decomposition, or a stable isometry test on a pair.
    Witt,
}

#[derive(Subcommand)]
enum SpCmd {
    /// Factor the block swap into transvections.
    SwapFactor,
    /// Straight-line paths from I to each transvection factor.
    Homotopy,
}

#[derive(Subcommand)]
enum KoszulCmd {
    Verify,
    Thom,
    Borel,
}

#[derive(Subcommand)]
enum GrassCmd {
    GaCheck,
    StructureCheck,
}

fn command_of(g: &Group) -> Command {
    match g {
        Group::Form(FormCmd::Embed) => Command::FormEmbed,
        Group::Form(FormCmd::Tensor) => Command::FormTensor,
        Group::Form(FormCmd::Standardize) => Command::FormStandardize,
        Group::Gw(GwCmd::Ksp0) => Command::GwKsp0,
        Group::Gw(GwCmd::Witt) => Command::GwWitt,
        Group::Sp(SpCmd::SwapFactor) => Command::SpSwapFactor,
        Group::Sp(SpCmd::Homotopy) => Command::SpHomotopy,
        Group::Koszul(KoszulCmd::Verify) => Command::KoszulVerify,
        Group::Koszul(KoszulCmd::Thom) => Command::KoszulThom,
        Group::Koszul(KoszulCmd::Borel) => Command::KoszulBorel,
        Group::Grass(GrassCmd::GaCheck) => Command::GrassGaCheck,
        Group::Grass(GrassCmd::StructureCheck) => Command::GrassStructureCheck,
        Group::Selftest => Command::Selftest,
    }
}

fn read_document(path: Option<&PathBuf>) -> std::io::Result<Option<String>> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None if std::io::stdin().is_terminal() => return Ok(None),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    Ok((!text.trim().is_empty()).then_some(text))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = command_of(&cli.group);
    let o = &cli.opts;
    let report = match (parse_ring_flag(&o.ring), read_document(o.input.as_ref())) {
        (Err(e), _) => Report::error(cmd.name(), o.seed, e.to_string()),
        (_, Err(e)) => Report::error(cmd.name(), o.seed, format!("cannot read input: {e}")),
        (Ok(ring), Ok(doc)) => {
            let params = Params {
                ring,
                seed: o.seed,
                samples: o.samples,
                n: o.n,
                m: o.m,
                i: o.i,
                max_stab: o.max_stab,
                grassmannian: o.grassmannian.map(|g| match g {
                    GrassArg::Hgr => Grassmannian::Hgr,
                    GrassArg::Rgr => Grassmannian::Rgr,
                }),
            };
            run(cmd, &params, doc.as_deref())
        }
    };
    match o.output {
        OutputArg::Json => print!("{}", report.to_json()),
        OutputArg::Text => print!("{}", report.to_text()),
    }
    if let Some(e) = &report.error {
        eprintln!("formkit: {e}");
    }
    ExitCode::from(report.outcome.exit_code() as u8)
}

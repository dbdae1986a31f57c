//! `calibra`: runs one scenario, writes its JSON report and exits with
//! 0 (pass), 1 (check failed), 2 (bad config or arguments) or 3 (bad fixture).

use calibra::calibration_builder::Variant;
use calibra::par::{self, Exec};
use calibra::scenario::{self, Command, Outcome, Scenario, EXIT_PARSE};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "calibra", version, about = "Calibration and Steklov capacity checks")]
struct Cli {
    /// Scenario file (TOML). Flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the CSV dump here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Run every sweep on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Built-in fixture name.
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Dirichlet,
    Graph,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Euler conditions of a candidate.
    EulerCheck {
        #[command(flatten)]
        common: Common,
        /// Length of `linear_jump`.
        #[arg(long)]
        length: Option<f64>,
    },
    /// Build the calibration field and check conditions (a)-(e).
    CalibrateVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(long)]
        capacity: Option<f64>,
        #[arg(long)]
        st_samples: Option<usize>,
    },
    /// K(Γ, A) on a rectangle against the closed form.
    Steklov {
        #[command(flatten)]
        common: Common,
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        rect: Option<Vec<f64>>,
    },
    /// Sufficient condition on every split domain of a fixture.
    Sufficient {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        length: Option<f64>,
    },
    /// Energy of the perturbed family on the rectangle.
    Counterexample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        l_over_c: Option<f64>,
        #[arg(long)]
        cells: Option<usize>,
    },
    /// K(Γ, Γ_δ^+) as δ shrinks.
    Blowup {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        length: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        #[arg(long)]
        cells: Option<usize>,
    },
}

impl Cmd {
    fn command(&self) -> Command {
        match self {
            Cmd::EulerCheck { .. } => Command::EulerCheck,
            Cmd::CalibrateVerify { .. } => Command::CalibrateVerify,
            Cmd::Steklov { .. } => Command::Steklov,
            Cmd::Sufficient { .. } => Command::Sufficient,
            Cmd::Counterexample { .. } => Command::Counterexample,
            Cmd::Blowup { .. } => Command::Blowup,
        }
    }

    fn apply(self, s: &mut Scenario) {
        fn set<T>(slot: &mut Option<T>, v: Option<T>) {
            if v.is_some() {
                *slot = v;
            }
        }
        let common = match self {
            Cmd::EulerCheck { common, length } | Cmd::Sufficient { common, length } => {
                set(&mut s.length, length);
                common
            }
            Cmd::CalibrateVerify { common, variant, capacity, st_samples } => {
                set(&mut s.variant, variant.map(|v| match v {
                    VariantArg::Dirichlet => Variant::Dirichlet,
                    VariantArg::Graph => Variant::Graph,
                }));
                set(&mut s.capacity, capacity);
                set(&mut s.st_samples, st_samples);
                common
            }
            Cmd::Steklov { common, rect } => {
                set(&mut s.rect, rect.map(|r| [r[0], r[1]]));
                common
            }
            Cmd::Counterexample { common, l_over_c, cells } => {
                set(&mut s.l_over_c, l_over_c);
                set(&mut s.cells, cells);
                common
            }
            Cmd::Blowup { common, length, deltas, cells } => {
                set(&mut s.length, length);
                set(&mut s.deltas, deltas);
                set(&mut s.cells, cells);
                common
            }
        };
        set(&mut s.fixture, common.fixture);
        set(&mut s.tol, common.tol);
        set(&mut s.grid, common.grid);
    }
}

fn fail(code: i32, reason: &str) -> ExitCode {
    eprintln!("status=parse-error command=none reason={}", reason.replace('\n', " "));
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(EXIT_PARSE, e.kind().as_str().unwrap_or("invalid arguments")),
    };
    par::init_from_env();
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let base = match &cli.config {
        Some(p) => match scenario::load(p) {
            Ok(s) => Some(s),
            Err(e) => return fail(EXIT_PARSE, &e.to_string()),
        },
        None => None,
    };
    let mut s = match (base, cli.command) {
        (Some(mut s), Some(cmd)) => {
            if s.command != cmd.command() {
                s = Scenario { output: s.output, ..Scenario::new(cmd.command()) };
            }
            cmd.apply(&mut s);
            s
        }
        (Some(s), None) => s,
        (None, Some(cmd)) => {
            let mut s = Scenario::new(cmd.command());
            cmd.apply(&mut s);
            s
        }
        (None, None) => return fail(EXIT_PARSE, "no subcommand and no --config"),
    };
    if let Some(p) = cli.out {
        s.output.json = Some(p.display().to_string());
    }
    if let Some(p) = cli.csv {
        s.output.csv = Some(p.display().to_string());
    }
    let outcome: Outcome = scenario::run_scenario(&s, exec);
    if s.output.json.is_none() {
        print!("{}", outcome.json());
    }
    if let Err(e) = outcome.write(&s.output) {
        eprintln!("status=fail command={} reason=write failed: {e}", s.command.name());
        return ExitCode::from(1);
    }
    eprintln!("{}", outcome.status);
    ExitCode::from(outcome.exit_code as u8)
}

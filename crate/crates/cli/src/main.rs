use clap::{Parser, Subcommand, ValueEnum};
use daefix_core::convert::{fix_dae, FixOptions, Method};
use daefix_core::model::{parse_model, write_model};
use daefix_core::report::{analyze, build_report, render_report};
use daefix_core::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

// Exit codes: 0 success, 2 structurally ill posed, 3 no applicable
// conversion / iteration limit, 4 parse error, 1 anything else.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_) => 4,
        Error::IllPosed(_) => 2,
        Error::NoConversion(_) | Error::IterationLimit(_) => 3,
        _ => 1,
    }
}

#[derive(Parser)]
#[command(
    name = "daefix",
    about = "Structural analysis of DAE systems with automatic conversion of analysis failures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BtfMode {
    Fine,
    Coarse,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Lc,
    Es,
    Auto,
}

#[derive(Subcommand)]
enum Command {
    /// Run the signature-method analysis and print the report.
    Analyze {
        /// Model file.
        path: PathBuf,
        /// Which block triangular form to render the Σ grid in.
        #[arg(long, value_enum, default_value = "fine")]
        btf: BtfMode,
        /// Emit the structured report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Convert the DAE until the analysis succeeds, then write the fixed
    /// model.
    Fix {
        /// Model file.
        path: PathBuf,
        /// Conversion method: lc, es, or auto (LC first, then ES).
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
        /// Iteration limit for the analyze-convert loop.
        #[arg(long, default_value_t = 10)]
        max_iter: usize,
        /// Output path for the converted model (default: <input>.fixed.dae).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Emit the structured report as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn load(path: &Path) -> Result<daefix_core::DaeSystem, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_model(&text)?)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analyze { path, btf, json } => {
            let sys = load(&path)?;
            let analyzed = analyze(&sys)?;
            if json {
                let report = build_report(&sys, &analyzed);
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                let mode = match btf {
                    BtfMode::Fine => "fine",
                    BtfMode::Coarse => "coarse",
                    BtfMode::None => "none",
                };
                print!("{}", render_report(&sys, &analyzed, mode));
            }
            Ok(())
        }
        Command::Fix {
            path,
            method,
            max_iter,
            output,
            json,
        } => {
            let sys = load(&path)?;
            let options = FixOptions {
                method: match method {
                    MethodArg::Lc => Method::Lc,
                    MethodArg::Es => Method::Es,
                    MethodArg::Auto => Method::Auto,
                },
                max_iterations: max_iter,
            };
            let fixed = fix_dae(&sys, &options)?;
            let out_path = output.unwrap_or_else(|| {
                let mut p = path.clone();
                let stem = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "model".into());
                p.set_file_name(format!("{stem}.fixed.dae"));
                p
            });
            std::fs::write(&out_path, write_model(&fixed.system))
                .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", out_path.display())))?;
            let analyzed = analyze(&fixed.system)?;
            if json {
                let report = build_report(&fixed.system, &analyzed);
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                println!(
                    "applied {} conversion(s); valΣ {} -> {}; wrote {}",
                    fixed.conversions.len(),
                    fixed.initial_val,
                    fixed.final_val,
                    out_path.display()
                );
                print!("{}", render_report(&fixed.system, &analyzed, "fine"));
            }
            Ok(())
        }
    }
}

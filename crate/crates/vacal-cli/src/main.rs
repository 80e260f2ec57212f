//! `vacal`: exact normal cones, subdifferentials, coderivatives, and
//! calculus rules for polyhedral data, driven by JSON instance files.
//!
//! Exit codes: 0 success, 1 a rule was refuted or a suite expectation
//! failed, 2 unreadable or malformed input, 3 the computation is undefined
//! for the given data (for example an unbounded marginal value).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vacal_cli::run::{self, CmdOutput, VerifyOptions};

#[derive(Parser)]
#[command(
    name = "vacal",
    version,
    about = "Exact polyhedral calculus for nonsmooth analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a function instance at a point
    Eval {
        file: PathBuf,
        /// Comma-separated rational coordinates, e.g. "1,-3/2"
        #[arg(long)]
        point: String,
    },
    /// Subdifferential of a function instance at a point
    Subdiff {
        file: PathBuf,
        #[arg(long)]
        point: String,
        /// One of: convex, frechet, limiting, clarke, singular
        #[arg(long, default_value = "convex")]
        variant: String,
    },
    /// Normal or tangent cone of a set instance at a point
    #[command(name = "normal-cone")]
    NormalCone {
        file: PathBuf,
        #[arg(long)]
        point: String,
        /// One of: convex, frechet, limiting, clarke, tangent
        #[arg(long, default_value = "limiting")]
        variant: String,
    },
    /// Coderivative of a mapping instance at a point of its graph
    Coderiv {
        file: PathBuf,
        #[arg(long)]
        point: String,
        /// Output-space point paired with the input point on the graph
        #[arg(long)]
        output: String,
        /// Output-space vector the coderivative is applied to
        #[arg(long = "y-star")]
        y_star: String,
        /// One of: limiting, clarke
        #[arg(long, default_value = "limiting")]
        variant: String,
    },
    /// Check one calculus rule on one instance file
    Rule {
        rule_id: String,
        file: PathBuf,
        /// Treat inner semicontinuity as granted where a rule needs it
        /// and no certificate is found
        #[arg(long)]
        assume_inner_semicontinuous: bool,
    },
    /// Run every instance in a suite directory and write a report
    Verify {
        /// Suite directory; the VACAL_CORPUS environment variable, when
        /// set, takes precedence over this argument
        suite: Option<PathBuf>,
        /// "on" cross-examines results with the sampling oracles
        #[arg(long, default_value = "on")]
        oracle: String,
        /// Worker threads; the report does not depend on this
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Write the report to this path instead of stdout
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eval { file, point } => run::cmd_eval(file, point),
        Command::Subdiff {
            file,
            point,
            variant,
        } => run::cmd_subdiff(file, point, variant),
        Command::NormalCone {
            file,
            point,
            variant,
        } => run::cmd_normal_cone(file, point, variant),
        Command::Coderiv {
            file,
            point,
            output,
            y_star,
            variant,
        } => run::cmd_coderiv(file, point, output, y_star, variant),
        Command::Rule {
            rule_id,
            file,
            assume_inner_semicontinuous,
        } => run::cmd_rule(rule_id, file, *assume_inner_semicontinuous),
        Command::Verify {
            suite,
            oracle,
            jobs,
            report,
        } => {
            let dir = std::env::var_os("VACAL_CORPUS")
                .map(PathBuf::from)
                .or_else(|| suite.clone());
            let Some(dir) = dir else {
                eprintln!("error: no suite directory given and VACAL_CORPUS is not set");
                return ExitCode::from(2);
            };
            let oracle_on = match oracle.as_str() {
                "on" => true,
                "off" => false,
                other => {
                    eprintln!("error: --oracle takes \"on\" or \"off\", got \"{other}\"");
                    return ExitCode::from(2);
                }
            };
            run::cmd_verify(&VerifyOptions {
                suite: dir,
                oracle: oracle_on,
                jobs: *jobs,
                report_path: report.clone(),
            })
        }
    };
    match result {
        Ok(CmdOutput { body, exit }) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&body).expect("serializable")
            );
            ExitCode::from(exit as u8)
        }
        Err(e) => {
            e.emit();
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

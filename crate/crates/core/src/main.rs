use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypglue::cli::{default_data_dir, run, Command, Inputs, Options};

#[derive(Parser)]
#[command(name = "hypglue", version, about = "Build and verify the glued hyperbolic 4-manifold from shipped data")]
struct Args {
    #[command(subcommand)]
    command: Cmd,

    /// Directory with vectors.txt, q.cox, gram.txt, form.txt, gluing.txt and reference.toml.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,

    /// Write the JSON certificate here.
    #[arg(long, global = true)]
    json: Option<PathBuf>,

    /// Closing involutions (h on the half-height part, c on the central part), as words like a*r12.
    #[arg(long, global = true, num_args = 2, value_names = ["H", "C"])]
    pair: Option<Vec<String>>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Diagram, orbifold Euler characteristic and arithmetic invariants of Q.
    VerifyQ,
    /// The polytope P, its symmetries and vertices.
    BuildP,
    /// The manifold with corners X glued from five copies of P.
    BuildX,
    /// The closed manifold M.
    BuildM,
    /// The six closings by pairs of central-coset involutions.
    Variants,
    /// Every stage.
    All,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::VerifyQ => Command::VerifyQ,
            Cmd::BuildP => Command::BuildP,
            Cmd::BuildX => Command::BuildX,
            Cmd::BuildM => Command::BuildM,
            Cmd::Variants => Command::Variants,
            Cmd::All => Command::All,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let dir = args.data_dir.unwrap_or_else(default_data_dir);
    let inputs = match Inputs::load(&dir) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let options = Options {
        pair: args.pair.map(|p| (p[0].clone(), p[1].clone())),
    };
    let cert = run(args.command.into(), &inputs, &options);
    print!("{}", cert.summary());
    if let Some(path) = args.json {
        if let Err(e) = std::fs::write(&path, cert.to_json()) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if cert.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

use std::process::ExitCode;

use choquard_core::cli::{resolve, run, write_outputs, Cli};
use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = resolve(cli).and_then(|cfg| {
        let out = run(&cfg)?;
        let written = write_outputs(&cfg, &out)?;
        Ok((out, written))
    });
    match outcome {
        Ok((out, written)) => {
            println!("{}", out.summary);
            for path in written {
                println!("wrote {}", path.display());
            }
            ExitCode::from(out.status.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

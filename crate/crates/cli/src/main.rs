use clap::Parser;
use donut_cli::{run, Cli, WORKDIR_ENV};

fn main() {
    let cli = Cli::parse();
    let env_workdir = std::env::var_os(WORKDIR_ENV).map(Into::into);
    if let Err(e) = run(cli, env_workdir) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

use clap::Parser;
use garp_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("garp: {e}");
        std::process::exit(e.stage.exit_code());
    }
}

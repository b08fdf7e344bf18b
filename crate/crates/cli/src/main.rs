use clap::Parser;
use zkz_cli::{run, Cli, RunConfig};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = RunConfig::from_cli(cli).and_then(|cfg| run(&cfg));
    if let Err(f) = result {
        eprintln!("zkz: {f}");
        std::process::exit(f.exit_code());
    }
}

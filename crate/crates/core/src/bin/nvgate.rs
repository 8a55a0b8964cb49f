use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = nvgate::cli::Cli::parse();
    std::process::exit(nvgate::cli::run(cli));
}

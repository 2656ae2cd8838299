use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = chargeplan::cli::Cli::parse();
    std::process::exit(chargeplan::cli::dispatch(cli));
}

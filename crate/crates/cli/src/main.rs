use clap::Parser as _;

use tifa_gcl_cli::args::Cli;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(err) = tifa_gcl_cli::run(&cli) {
        tifa_gcl_cli::write_error_record(cli.out_dir(), &err);
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

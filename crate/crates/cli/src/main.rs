use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = rmg_cli::Cli::parse();
    let code = match rmg_cli::init_threads().and_then(|_| rmg_cli::run(cli)) {
        Ok(()) => rmg_cli::exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

use clap::Parser;
use dichotomy_cli::config::threads_from_env;
use dichotomy_cli::{resolve, run, Cli, CliError};

fn main() {
    let cli = Cli::parse();
    let outcome = (|| -> Result<_, CliError> {
        if let Some(threads) = threads_from_env()? {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| CliError::Config(format!("cannot start {threads} threads: {e}")))?;
        }
        run(&resolve(&cli)?)
    })();
    match outcome {
        Ok(out) => println!("{}", out.csv.display()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

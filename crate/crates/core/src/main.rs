use clap::Parser;

use swapgate::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for line in outcome.lines {
                println!("{line}");
            }
        }
        Err(e) => {
            let cat = e.category();
            eprintln!("error: {e}");
            eprintln!("category: {}", cat.as_str());
            std::process::exit(cat.exit_code());
        }
    }
}

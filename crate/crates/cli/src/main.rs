use clap::Parser;
use homdip_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr();
    if let Err(e) = run(&cli, &mut stdout, &mut stderr) {
        eprintln!("homdip: {e}");
        std::process::exit(e.exit_code());
    }
}

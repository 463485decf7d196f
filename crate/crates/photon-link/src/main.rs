use clap::Parser;

use photon_link::cli::{execute, Cli};
use photon_link::Error;

fn main() {
    // clap itself exits with code 2 on usage errors
    let cli = Cli::parse();
    if let Err(err) = execute(cli) {
        eprintln!("error: {err}");
        let code = match err {
            Error::NonFinite(_) => 3,
            Error::Config(_) | Error::Domain(_) => 2,
        };
        std::process::exit(code);
    }
}

use clap::Parser;

fn main() {
    // usage errors exit with code 2 via clap; runtime failures with 1
    let cli = sinolab::cli::Cli::parse();
    if let Err(e) = sinolab::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

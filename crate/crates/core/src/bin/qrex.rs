use clap::Parser;

fn main() {
    let cli = qrex::cli::Cli::parse();
    std::process::exit(qrex::cli::run(&cli));
}

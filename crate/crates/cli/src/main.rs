use clap::Parser;

fn main() {
    if let Err(err) = snrwall_cli::run(snrwall_cli::Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

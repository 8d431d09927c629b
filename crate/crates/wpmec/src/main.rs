use clap::Parser;

fn main() {
    let cli = wpmec::cli::Cli::parse();
    std::process::exit(wpmec::cli::main_with(&cli));
}

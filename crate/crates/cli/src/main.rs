use clap::Parser;

fn main() {
    let cli = calabi_pack::Cli::parse();
    if let Err(e) = calabi_pack::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

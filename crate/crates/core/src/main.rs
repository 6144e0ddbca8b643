use clap::Parser;

fn main() {
    let cli = tablegene::cli::Cli::parse();
    match tablegene::cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

use clap::Parser;

fn main() {
    let cli = dctx_cli::Cli::parse();
    if let Err(e) = dctx_cli::run(cli) {
        eprintln!("dctx: {e}");
        std::process::exit(e.exit_code());
    }
}

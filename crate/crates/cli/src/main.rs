use clap::Parser;

fn main() {
    let cli = jigsaw_tools::Cli::parse();
    if let Err(e) = jigsaw_tools::run(cli) {
        eprintln!("error: {}", jigsaw_tools::describe(&e));
        std::process::exit(jigsaw_tools::exit_code(&e));
    }
}

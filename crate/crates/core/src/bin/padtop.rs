fn main() {
    std::process::exit(padtop::cli::run_cli(std::env::args_os()));
}

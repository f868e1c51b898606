fn main() {
    std::process::exit(startrace::cli::run_cli(std::env::args_os()));
}

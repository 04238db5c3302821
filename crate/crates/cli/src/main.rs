fn main() {
    std::process::exit(cohomflow_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(eulersurf_cli::run(std::env::args_os()));
}

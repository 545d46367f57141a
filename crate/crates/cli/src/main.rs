fn main() {
    std::process::exit(miscal_cli::run_cli(std::env::args()));
}

fn main() {
    std::process::exit(modred::cli::run_command(std::env::args()));
}

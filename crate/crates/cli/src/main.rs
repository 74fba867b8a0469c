fn main() { std::process::exit(carleman_lab_cli::run_command(std::env::args())) }

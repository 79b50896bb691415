fn main() {
    std::process::exit(herdsim_cli::run_command(std::env::args_os()));
}

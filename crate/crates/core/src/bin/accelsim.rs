fn main() {
    std::process::exit(accelsim::cli::run_command(std::env::args_os()));
}

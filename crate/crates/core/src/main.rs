fn main() {
    std::process::exit(illusory::cli::run_command(std::env::args_os()));
}

fn main() {
    std::process::exit(coreg_cli::run_command(std::env::args_os()));
}

fn main() {
    std::process::exit(phg_cli::main_with_args(std::env::args_os()));
}

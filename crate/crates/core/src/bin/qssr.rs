fn main() {
    std::process::exit(qssr::cli::main_with_args(std::env::args_os()));
}

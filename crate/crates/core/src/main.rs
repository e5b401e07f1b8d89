fn main() {
    std::process::exit(pairlab::cli::main_with_args(std::env::args_os()));
}

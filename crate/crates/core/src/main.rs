fn main() {
    std::process::exit(invdyn::cli::main_with_args(std::env::args_os()));
}

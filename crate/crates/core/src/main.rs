fn main() {
    std::process::exit(vbchain::cli::main_with_args(std::env::args_os()));
}

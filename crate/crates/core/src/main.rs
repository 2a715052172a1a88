fn main() {
    std::process::exit(racl_core::cli::main_with_args(std::env::args_os()));
}

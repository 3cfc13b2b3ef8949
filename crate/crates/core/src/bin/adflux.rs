fn main() {
    std::process::exit(adflux::cli::main_with_args(std::env::args_os()));
}

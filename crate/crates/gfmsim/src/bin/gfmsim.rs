fn main() {
    std::process::exit(gfmsim::cli::main_from_args(std::env::args_os()));
}

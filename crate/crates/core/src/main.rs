fn main() {
    std::process::exit(relaxedsync::cli::main_with_args(std::env::args_os()));
}

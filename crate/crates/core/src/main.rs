fn main() {
    std::process::exit(homfill::cli::main_with_args(std::env::args_os()));
}

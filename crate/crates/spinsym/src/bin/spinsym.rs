fn main() {
    std::process::exit(spinsym::cli::main_with_args(std::env::args_os()));
}

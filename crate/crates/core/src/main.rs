fn main() {
    std::process::exit(radhess::cli::main_with_args(std::env::args_os()));
}

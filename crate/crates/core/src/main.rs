fn main() {
    std::process::exit(wolfflab::cli::main_with(std::env::args_os()));
}

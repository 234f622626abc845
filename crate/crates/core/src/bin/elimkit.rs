fn main() {
    std::process::exit(elimkit::cli::main_with(std::env::args_os()));
}

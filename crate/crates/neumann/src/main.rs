fn main() {
    std::process::exit(neumann::cli::main_with(std::env::args_os()));
}

fn main() {
    std::process::exit(scauction::cli::run(std::env::args_os()));
}

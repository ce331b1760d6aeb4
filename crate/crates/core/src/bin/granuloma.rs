fn main() {
    std::process::exit(granuloma::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(maxarea::cli::run(std::env::args_os()));
}

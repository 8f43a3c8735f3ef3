fn main() {
    std::process::exit(granred::cli::run(std::env::args_os()));
}

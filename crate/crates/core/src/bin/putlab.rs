fn main() {
    std::process::exit(putlab::cli::run(std::env::args_os()));
}

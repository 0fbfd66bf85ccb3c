fn main() {
    std::process::exit(imqkd::cli::run(std::env::args_os()));
}

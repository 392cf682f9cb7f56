fn main() {
    std::process::exit(anodet::cli::run(std::env::args_os()));
}

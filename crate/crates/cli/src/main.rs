fn main() {
    std::process::exit(bishap_cli::run(std::env::args_os()));
}

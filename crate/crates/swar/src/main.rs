fn main() {
    std::process::exit(swar::cli::run(std::env::args_os()));
}

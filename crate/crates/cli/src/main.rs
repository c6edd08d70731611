fn main() {
    std::process::exit(fresco_cli::run(std::env::args_os()));
}

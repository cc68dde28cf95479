fn main() {
    std::process::exit(betagas::cli::run(std::env::args_os()));
}

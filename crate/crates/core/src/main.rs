fn main() {
    std::process::exit(spiky::cli::run(std::env::args_os()));
}

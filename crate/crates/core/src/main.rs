fn main() {
    std::process::exit(mixbvp::cli::run(std::env::args_os()));
}

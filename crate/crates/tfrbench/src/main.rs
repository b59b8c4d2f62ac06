fn main() {
    std::process::exit(tfrbench::cli::run(std::env::args_os()));
}

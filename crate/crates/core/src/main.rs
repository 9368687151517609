fn main() {
    std::process::exit(tailsim::cli::run(std::env::args_os()));
}

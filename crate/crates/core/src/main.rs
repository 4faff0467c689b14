fn main() {
    std::process::exit(toricdeg::cli::run(std::env::args_os()));
}

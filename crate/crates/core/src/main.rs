fn main() {
    std::process::exit(masslock::cli::run(std::env::args_os()));
}

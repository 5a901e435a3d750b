fn main() {
    std::process::exit(bowenlab::cli::run(std::env::args()));
}

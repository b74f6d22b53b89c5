fn main() {
    std::process::exit(johnlab::cli::run());
}

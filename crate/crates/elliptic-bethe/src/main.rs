fn main() {
    std::process::exit(elliptic_bethe::cli::run());
}

fn main() {
    std::process::exit(frf_cli::run());
}

fn main() {
    std::process::exit(fqplane::cli::run());
}

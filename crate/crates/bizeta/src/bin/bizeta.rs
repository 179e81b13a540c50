fn main() {
    std::process::exit(bizeta::cli::run());
}

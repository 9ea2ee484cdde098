fn main() {
    std::process::exit(telsell::cli::run());
}

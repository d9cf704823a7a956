fn main() {
    std::process::exit(tvar::cli::run())
}

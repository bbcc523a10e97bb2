fn main() {
    std::process::exit(weyl3::cli::run());
}

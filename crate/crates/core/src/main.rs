fn main() {
    std::process::exit(tvreview::cli::main());
}

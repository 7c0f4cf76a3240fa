fn main() {
    std::process::exit(comlearn::cli::run_main());
}

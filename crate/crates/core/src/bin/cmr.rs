fn main() {
    std::process::exit(cmr::cli::main());
}

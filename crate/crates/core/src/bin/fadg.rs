fn main() {
    std::process::exit(fadg::cli::main());
}

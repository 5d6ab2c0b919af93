fn main() {
    std::process::exit(jumppath::cli::main());
}

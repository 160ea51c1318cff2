fn main() {
    std::process::exit(vmcts::cli::main());
}

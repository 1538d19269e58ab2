fn main() {
    std::process::exit(ucc_lab::cli::main());
}

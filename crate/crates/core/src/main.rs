fn main() {
    std::process::exit(pricewell::cli::main());
}

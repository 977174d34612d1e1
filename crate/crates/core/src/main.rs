fn main() {
    std::process::exit(prophet_lab::harness::cli::main());
}

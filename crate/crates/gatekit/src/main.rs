fn main() {
    let code = gatekit::cli::run(std::env::args().skip(1));
    std::process::exit(code);
}

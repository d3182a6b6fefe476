fn main() {
    std::process::exit(phikit::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(qcb::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(navier_mems::cli::run(std::env::args_os()));
}

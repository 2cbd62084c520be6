fn main() {
    std::process::exit(faber_core::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(spectral_shift::cli::run(std::env::args_os()));
}

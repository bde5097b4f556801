fn main() {
    std::process::exit(spectral_forge::cli::main());
}

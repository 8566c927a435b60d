fn main() {
    std::process::exit(phonon_qng::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(beamcap_cli::run(std::env::args_os()));
}

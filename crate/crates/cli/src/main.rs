fn main() {
    std::process::exit(simcap_cli::run(std::env::args_os()));
}

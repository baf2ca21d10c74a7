fn main() {
    std::process::exit(adiabat_cli::run_cli(std::env::args_os()));
}
